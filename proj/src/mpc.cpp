#include "ffc/mpc.hpp"

#include <cmath>
#include <stdexcept>

#include "ffc/textio.hpp"

namespace ffc {

double MpcConfig::cost(int j) const { return cp_base * std::pow(cp_growth, j); }

void MpcConfig::validate() const {
    if (N < 1) throw std::invalid_argument("mpc: horizon N must be at least 1");
    if (!(Ts > 0.0)) throw std::invalid_argument("mpc: sampling period must be positive");
    if (!(f_lo < f_hi)) throw std::invalid_argument("mpc: frequency limits must satisfy f_lo < f_hi");
    if (!(r_lo < r_hi)) throw std::invalid_argument("mpc: RoCoF limits must satisfy r_lo < r_hi");
    if (!(cp_base > 0.0) || cp_growth < 1.0)
        throw std::invalid_argument("mpc: cost schedule must be positive and non-decreasing");
    if (!(C_H > 10.0 * cost(N))) throw std::invalid_argument("mpc: slack penalty must dominate the control cost");
    if (!(C_B > 0.0)) throw std::invalid_argument("mpc: flow slack penalty must be positive");
    if (!(deadband >= 0.0) || !(trigger_window > 0.0) || !(deact_window > 0.0))
        throw std::invalid_argument("mpc: trigger settings must be positive");
    if (predictor != "coi" && predictor != "rocof-baseline")
        throw std::invalid_argument("mpc: predictor must be coi or rocof-baseline, got '" + predictor + "'");
}

Vec DecParams::vector() const {
    Vec l(kDecParams);
    l << x(0), x(1), soc, p_set, dP_net, f_prev;
    return l;
}

namespace {

// Affine expression in (parameters l, decisions v): a + P l + G v.
struct Aff {
    double a = 0.0;
    Vec P, G;
    Aff(int np, int nv) : P(Vec::Zero(np)), G(Vec::Zero(nv)) {}
};

struct RowSink {
    std::vector<Vec> G, P;
    std::vector<double> b;
    // a + P l + G v <= bound
    void le(const Aff& e, double bound) {
        G.push_back(e.G);
        P.push_back(e.P);
        b.push_back(bound - e.a);
    }
    void ge(const Aff& e, double bound) {
        Aff n = e;
        n.a = -e.a;
        n.P = -e.P;
        n.G = -e.G;
        le(n, -bound);
    }
};

}  // namespace

LpStandard build_decentralized(const LinearSS& coi_d, const CoiParams& coi, const VscUnitParams& v,
                               const MpcConfig& cfg, double S_base) {
    cfg.validate();
    if (!coi_d.has_discrete) throw std::invalid_argument("build_decentralized: CoI model is not discretized");
    if (std::abs(coi_d.Ts - cfg.Ts) > 1e-12)
        throw std::invalid_argument("build_decentralized: model sampled at a different period");
    const int H = cfg.N + 1;
    const int nv = 2 * H + 2;
    const int np = kDecParams;
    const int ief = 2 * H, ier = 2 * H + 1;
    const Mat& Ad = coi_d.Ad;
    const Vec Bd = coi_d.Bd.col(0) / coi.power_base;
    const Eigen::RowVector2d C = coi_d.Cd.row(0);
    const double fb = coi.f_b, f0 = coi.f_0, Ts = cfg.Ts;
    const double R = v.Rp;
    const double E = v.energy_pus(S_base);

    auto cum = [&](int j) {
        Vec g = Vec::Zero(nv);
        for (int r = 0; r <= j; ++r) {
            g(r) = 1.0;
            g(H + r) = -1.0;
        }
        return g;
    };

    // x(j) as affine maps
    Vec xa = Vec::Zero(2);
    Mat xP = Mat::Zero(2, np), xG = Mat::Zero(2, nv);
    xP(0, 0) = 1.0;
    xP(1, 1) = 1.0;
    const Mat xP0 = xP;

    RowSink rows;
    Aff fprev(np, nv);
    fprev.P(5) = 1.0;
    Aff chi(np, nv);
    chi.P(2) = 1.0;
    const bool baseline = cfg.predictor == "rocof-baseline";
    const double slope = fb / (coi.M * coi.power_base);
    Aff lin(np, nv);  // baseline: drift accumulated so far
    for (int j = 0; j < H; ++j) {
        Aff f(np, nv);
        f.a = fb * C.dot(xa) + f0;
        f.P = (fb * C * xP).transpose();
        f.G = (fb * C * xG).transpose();
        if (baseline) {
            f.a = f0;
            f.P = (fb * C * xP0).transpose() + lin.P;
            f.G = lin.G;
        }

        Aff e = f;
        e.G(ief) = -1.0;
        rows.le(e, cfg.f_hi);
        e.G(ief) = 1.0;
        rows.ge(e, cfg.f_lo);

        Aff r(np, nv);
        r.a = (f.a - fprev.a) / Ts;
        r.P = (f.P - fprev.P) / Ts;
        r.G = (f.G - fprev.G) / Ts;
        r.G(ier) = -1.0;
        rows.le(r, cfg.r_hi);
        r.G(ier) = 1.0;
        rows.ge(r, cfg.r_lo);

        // frequency seen at the converter right after the setpoint jump
        Aff s = f;
        s.G(j) += R * fb;
        s.G(H + j) -= R * fb;
        s.G(ief) = -1.0;
        rows.le(s, cfg.f_hi);
        s.G(ief) = 1.0;
        rows.ge(s, cfg.f_lo);

        // converter power: setpoint + participation share + droop response
        const double droop = cfg.literal_droop ? R / fb : 1.0 / (fb * R);
        Aff p(np, nv);
        p.a = -droop * (f.a - f0);
        p.P = -droop * f.P;
        p.P(3) += 1.0;
        p.G = v.k_p * cum(j) - droop * f.G;
        rows.le(p, v.p_lim_hi);
        rows.ge(p, v.p_lim_lo);

        // state of charge with p_dc = p*
        chi.a += Ts * (v.p_c_star - p.a) / E;
        chi.P -= Ts * p.P / E;
        chi.G -= Ts * p.G / E;
        rows.le(chi, v.soc_hi);
        rows.ge(chi, v.soc_lo);

        fprev = f;
        if (baseline) {
            // f(j+1) = f(j) + Ts * f_b * (cumulative action - dP_net) / M
            lin.P(4) -= Ts * slope;
            lin.G += Ts * slope * cum(j);
            continue;
        }
        xa = Ad * xa;
        xP = Ad * xP;
        xP.col(4) -= Bd;
        xG = Ad * xG + Bd * cum(j).transpose();
    }

    const int m = static_cast<int>(rows.b.size());
    LpStandard lp;
    lp.c = Vec::Zero(nv);
    for (int j = 0; j < H; ++j) lp.c(j) = lp.c(H + j) = cfg.cost(j);
    lp.c(ief) = lp.c(ier) = cfg.C_H;
    lp.A_ub = Mat(m, nv);
    lp.b_ub = Vec(m);
    lp.S = Mat(m, np);
    for (int i = 0; i < m; ++i) {
        lp.A_ub.row(i) = rows.G[i].transpose();
        lp.b_ub(i) = rows.b[i];
        lp.S.row(i) = -rows.P[i].transpose();
    }
    return lp;
}

LpStandard build_decentralized(const LinearSS& coi_d, const CoiParams& coi, const VscUnitParams& vsc,
                               const MpcConfig& cfg, double S_base, const DecParams& params) {
    return build_decentralized(coi_d, coi, vsc, cfg, S_base).at(params.vector());
}

Mat dec_first_move_map(const MpcConfig& cfg) {
    const int H = cfg.N + 1;
    Mat out = Mat::Zero(1, 2 * H + 2);
    out(0, 0) = 1.0;
    out(0, H) = -1.0;
    return out;
}

void dec_param_box(const CoiParams& coi, const VscUnitParams& v, Vec& lo, Vec& hi, double max_dP) {
    // Envelope of the CoI state under a step of max_dP, with margin.
    const LinearSS ss = discretize_zoh(coi_state_space(coi), 0.01);
    Vec x = Vec::Zero(2);
    Vec xmax = Vec::Zero(2);
    for (int k = 0; k < 6000; ++k) {
        x = ss.Ad * x + ss.Bd.col(0) * (max_dP / coi.power_base);
        xmax = xmax.cwiseMax(x.cwiseAbs());
    }
    xmax *= 1.25;
    lo = Vec(kDecParams);
    hi = Vec(kDecParams);
    lo << -xmax(0), -xmax(1), 0.0, v.p_lim_lo, -max_dP, coi.f_0 - 1.0;
    hi << xmax(0), xmax(1), 1.0, v.p_lim_hi, max_dP, coi.f_0 + 1.0;
}

LpStandard build_centralized(const MultiMachineSS& mm, const GridCase& grid, const MpcConfig& cfg,
                             const CenInputs& in) {
    cfg.validate();
    const auto& ss = mm.ss;
    if (!ss.has_discrete || std::abs(ss.Ts - cfg.Ts) > 1e-12)
        throw std::invalid_argument("build_centralized: model not discretized at the MPC period");
    const int nc = mm.n_c, nu = mm.n_units(), nb = mm.n_b, nn = mm.n_n, nx = mm.nx();
    if (in.x.size() != nx || in.u_prev.size() != nc || in.p_l.size() != nn || in.f_prev.size() != nu ||
        in.soc.size() != nc)
        throw std::invalid_argument("build_centralized: measurement dimensions do not match the model");
    const int H = cfg.N + 1;
    const int nd = nc * H;
    const bool flows = cfg.flow_limits && nb > 0;
    const int nv = 2 * nd + 2 + (flows ? 1 : 0);
    const int ief = 2 * nd, ier = 2 * nd + 1, ieb = 2 * nd + 2;
    const double fb = grid.f_b, Ts = cfg.Ts;

    const Mat Bc = ss.Bd.leftCols(nc), Bl = ss.Bd.rightCols(nn);
    const Mat Dc = ss.D.leftCols(nc), Dl = ss.D.rightCols(nn);
    const Mat& C = ss.C;

    auto cum = [&](int j) {
        Mat g = Mat::Zero(nc, nv);
        for (int r = 0; r <= j; ++r)
            for (int i = 0; i < nc; ++i) {
                g(i, i * H + r) = 1.0;
                g(i, nd + i * H + r) = -1.0;
            }
        return g;
    };

    std::vector<Vec> G;
    std::vector<double> b;
    auto le = [&](const Vec& g, double a, double bound) {
        if (g.head(2 * nd).cwiseAbs().maxCoeff() < 1e-12) return;  // not influenced by any decision
        G.push_back(g);
        b.push_back(bound - a);
    };

    Vec xa = in.x;
    Mat xG = Mat::Zero(nx, nv);
    Vec fpa = in.f_prev;
    Mat fpg = Mat::Zero(nu, nv);
    Vec chia = in.soc;
    Mat chig = Mat::Zero(nc, nv);
    for (int j = 0; j < H; ++j) {
        const Mat ug = cum(j);
        const Vec ya = C * xa + Dc * in.u_prev + Dl * in.p_l;
        const Mat yg = C * xG + Dc * ug;
        const Vec fa = ya.head(nu) + mm.f0;
        const Mat fg = yg.topRows(nu);
        for (int q = 0; q < nu; ++q) {
            Vec g = fg.row(q).transpose();
            g(ief) = -1.0;
            le(g, fa(q), cfg.f_hi);
            g = -fg.row(q).transpose();
            g(ief) = -1.0;
            le(g, -fa(q), -cfg.f_lo);
            const double ra = (fa(q) - fpa(q)) / Ts;
            const Vec rg = (fg.row(q) - fpg.row(q)).transpose() / Ts;
            g = rg;
            g(ier) = -1.0;
            le(g, ra, cfg.r_hi);
            g = -rg;
            g(ier) = -1.0;
            le(g, -ra, -cfg.r_lo);
        }
        for (int i = 0; i < nc; ++i) {
            const auto& v = grid.vscs[i];
            const double droop = cfg.literal_droop ? v.Rp / fb : 1.0 / (fb * v.Rp);
            const double pa = v.p_c_star + in.u_prev(i) - droop * (fa(i) - mm.f0(i));
            const Vec pg = ug.row(i).transpose() - droop * fg.row(i).transpose();
            le(pg, pa, v.p_lim_hi);
            le(-pg, -pa, -v.p_lim_lo);
            const double E = v.energy_pus(grid.S_base);
            chia(i) += Ts * (v.p_c_star - pa) / E;
            chig.row(i) -= Ts * pg.transpose() / E;
            le(chig.row(i).transpose(), chia(i), v.soc_hi);
            le(-chig.row(i).transpose(), -chia(i), -v.soc_lo);
        }
        if (flows) {
            for (int k = 0; k < nb; ++k) {
                const double pa = ya(nu + k) + mm.pb0(k);
                const double lim = grid.network.branches[k].rate;
                Vec g = yg.row(nu + k).transpose();
                g(ieb) = -1.0;
                le(g, pa, lim);
                g = -yg.row(nu + k).transpose();
                g(ieb) = -1.0;
                le(g, -pa, lim);
            }
        }
        fpa = fa;
        fpg = fg;
        xa = ss.Ad * xa + Bc * in.u_prev + Bl * in.p_l;
        xG = ss.Ad * xG + Bc * ug;
    }

    LpStandard lp;
    lp.c = Vec::Zero(nv);
    for (int i = 0; i < nc; ++i)
        for (int j = 0; j < H; ++j) lp.c(i * H + j) = lp.c(nd + i * H + j) = cfg.cost(j);
    lp.c(ief) = lp.c(ier) = cfg.C_H;
    if (flows) lp.c(ieb) = cfg.C_B;
    const int m = static_cast<int>(b.size());
    lp.A_ub = Mat(m, nv);
    lp.b_ub = Vec(m);
    for (int i = 0; i < m; ++i) {
        lp.A_ub.row(i) = G[i].transpose();
        lp.b_ub(i) = b[i];
    }
    return lp;
}

namespace {
double mean_of(const std::vector<double>& w) {
    double s = 0.0;
    for (double x : w) s += x;
    return w.empty() ? 0.0 : s / static_cast<double>(w.size());
}
}  // namespace

bool trigger_decentralized(const std::vector<double>& window, double deadband) {
    return !window.empty() && std::abs(mean_of(window)) > deadband;
}

bool deactivate_decentralized(const std::vector<double>& window, double margin) {
    return !window.empty() && std::abs(mean_of(window)) < margin;
}

CenTrigger trigger_centralized(const Vec& measured, const Vec& scheduled, double threshold) {
    if (measured.size() != scheduled.size())
        throw std::invalid_argument("trigger_centralized: measured and scheduled injections differ in length");
    CenTrigger t;
    t.p_l = measured - scheduled;
    t.active = t.p_l.size() > 0 && t.p_l.cwiseAbs().maxCoeff() > threshold;
    return t;
}

// ---------------------------------------------------------------------------

DecentralizedController::DecentralizedController(int index, const VscUnitParams& vsc, const CoiParams& coi,
                                                 const MpcConfig& cfg, double S_base, double plant_dt,
                                                 const PwaLaw* law)
    : index_(index), vsc_(vsc), coi_(coi), cfg_(cfg), law_(law), S_base_(S_base), dt_(plant_dt) {
    cfg_.validate();
    if (!(plant_dt > 0.0)) throw std::invalid_argument("controller: plant step must be positive");
    ss_ = discretize_zoh(coi_state_space(coi_), cfg_.Ts);
    param_lp_ = build_decentralized(ss_, coi_, vsc_, cfg_, S_base_);
    n_trig_ = std::max(1, static_cast<int>(std::lround(cfg_.trigger_window / dt_)));
    n_deact_ = std::max(1, static_cast<int>(std::lround(cfg_.deact_window / dt_)));
    n_step_ = std::max(1, static_cast<int>(std::lround(cfg_.Ts / dt_)));
    if (law_ && law_->n_params() != kDecParams)
        throw std::invalid_argument("controller: explicit law has the wrong parameter dimension");
}

double DecentralizedController::step(int k, double t, double rocof, double f_meas, double soc,
                                     std::vector<ControllerEvent>& events) {
    const std::string name = "vsc" + std::to_string(index_ + 1);
    buf_.push_back(rocof);
    while (static_cast<int>(buf_.size()) > std::max(n_trig_, n_deact_)) buf_.pop_front();
    auto window_mean = [&](int n) {
        double s = 0.0;
        const int cnt = std::min<int>(n, static_cast<int>(buf_.size()));
        for (int i = 0; i < cnt; ++i) s += buf_[buf_.size() - 1 - i];
        return s / cnt;
    };

    if (mode_ == Mode::Idle) {
        if (!crossing_) {
            if (static_cast<int>(buf_.size()) >= n_trig_ && std::abs(window_mean(n_trig_)) > cfg_.deadband) {
                crossing_ = true;
                since_.assign(1, rocof);
                events.push_back({t, name, "trigger", "rocof deadband crossed"});
            }
            return 0.0;
        }
        if (static_cast<int>(since_.size()) < n_trig_) {
            since_.push_back(rocof);
            return 0.0;
        }
        // Disturbance estimate from the window that starts at the crossing.
        const double avg = mean_of(since_);
        const double M_sys = coi_.M * coi_.power_base;
        const double inc = estimate_disturbance(avg / coi_.f_b, M_sys);
        if (!has_est_) first_est_ = inc;
        est_ += inc;
        has_est_ = true;
        const ZohPair w = zoh(coi_state_space(coi_).A, coi_state_space(coi_).B, n_trig_ * dt_);
        x_ = w.Bd.col(0) * ((U_ - est_) / coi_.power_base);
        f_prev_ = f_meas;
        mode_ = Mode::Active;
        next_k_ = k;
        act_k_ = k;
        events.push_back({t, name, "activate",
                          "estimate_pu=" + text::format_number(inc) + " accumulated_pu=" + text::format_number(est_)});
    }

    if (mode_ != Mode::Active || k != next_k_) return 0.0;

    DecParams prm;
    prm.x = x_;
    prm.soc = soc;
    prm.p_set = vsc_.p_c_star + vsc_.k_p * U_;
    prm.dP_net = est_ - U_;
    prm.f_prev = f_prev_;
    const Vec l = prm.vector();
    double d0 = 0.0;
    bool done = false;
    if (law_) {
        ExplicitResult er = eval_explicit(*law_, l, &law_hint_);
        if (er.covered) {
            d0 = er.u(0);
            done = true;
            ++explicit_hits_;
        } else {
            events.push_back({t, name, "fallback", "parameter outside explicit law, solving online"});
        }
    }
    last_lp_ = param_lp_.at(l);
    if (!done) {
        LpResult r = solve_lp(last_lp_);
        ++solves_;
        if (r.status != LpStatus::Optimal) {
            events.push_back({t, name, "alarm", "lp " + to_string(r.status) + ", holding setpoint"});
            d0 = 0.0;
        } else {
            const int H = cfg_.N + 1;
            d0 = r.z(0) - r.z(H);
        }
    }
    U_ += d0;
    const double applied = vsc_.k_p * d0;
    applied_ += applied;
    events.push_back({t, name, "solve", "move_pu=" + text::format_number(d0) + " applied_pu=" + text::format_number(applied)});
    f_prev_ = coi_.f_b * ss_.Cd.row(0).dot(x_) + coi_.f_0;
    x_ = ss_.Ad * x_ + ss_.Bd.col(0) * ((U_ - est_) / coi_.power_base);
    next_k_ = k + n_step_;
    if (k - act_k_ > n_deact_ && std::abs(window_mean(n_deact_)) < cfg_.deact_margin) {
        mode_ = Mode::Idle;
        crossing_ = false;
        since_.clear();
        events.push_back({t, name, "deactivate", "average rocof below margin"});
    }
    return applied;
}

// ---------------------------------------------------------------------------

CentralizedController::CentralizedController(const MultiMachineSS& mm_Ts, const GridCase& grid, const MpcConfig& cfg,
                                             double plant_dt)
    : mm_(mm_Ts), grid_(grid), cfg_(cfg), dt_(plant_dt) {
    cfg_.validate();
    if (!mm_.ss.has_discrete || std::abs(mm_.ss.Ts - cfg_.Ts) > 1e-12)
        throw std::invalid_argument("centralized controller: model must be discretized at the MPC period");
    n_step_ = std::max(1, static_cast<int>(std::lround(cfg_.Ts / dt_)));
    n_deact_ = std::max(1, static_cast<int>(std::lround(cfg_.deact_window / dt_)));
    uc_ = Vec::Zero(mm_.n_c);
    handled_pl_ = Vec::Zero(mm_.n_n);
}

Vec CentralizedController::step(int k, double t, const Vec& x, const Vec& p_l, const Vec& f_meas, const Vec& soc,
                                const Vec& rocof_avg, std::vector<ControllerEvent>& events) {
    Vec du = Vec::Zero(mm_.n_c);
    if (mode_ == Mode::Idle) {
        const CenTrigger tr = trigger_centralized(p_l, handled_pl_, cfg_.cen_threshold);
        if (!tr.active) return du;
        handled_pl_ = p_l;
        mode_ = Mode::Active;
        next_k_ = k;
        act_k_ = k;
        f_prev_ = f_meas;
        events.push_back({t, "central", "activate",
                          "max_injection_change_pu=" + text::format_number(tr.p_l.cwiseAbs().maxCoeff())});
    }
    if (k != next_k_) return du;
    CenInputs in{x, uc_, p_l, f_prev_, soc};
    LpStandard lp = build_centralized(mm_, grid_, cfg_, in);
    LpResult r = solve_lp(lp);
    ++solves_;
    const int H = cfg_.N + 1, nd = mm_.n_c * H;
    if (r.status != LpStatus::Optimal) {
        events.push_back({t, "central", "alarm", "lp " + to_string(r.status) + ", holding setpoints"});
    } else {
        for (int i = 0; i < mm_.n_c; ++i) du(i) = r.z(i * H) - r.z(nd + i * H);
        std::string moves = "moves_pu=";
        for (int i = 0; i < mm_.n_c; ++i) moves += (i ? ";" : "") + text::format_number(du(i));
        events.push_back({t, "central", "solve", moves});
    }
    uc_ += du;
    Vec u(mm_.n_c + mm_.n_n);
    u << uc_, p_l;
    f_prev_ = (mm_.ss.C * x + mm_.ss.D * u).head(mm_.n_units()) + mm_.f0;
    next_k_ = k + n_step_;
    if (k - act_k_ > n_deact_ && rocof_avg.size() > 0 && rocof_avg.cwiseAbs().maxCoeff() < cfg_.deact_margin) {
        mode_ = Mode::Idle;
        events.push_back({t, "central", "deactivate", "average rocof below margin at every unit"});
    }
    return du;
}

}  // namespace ffc
