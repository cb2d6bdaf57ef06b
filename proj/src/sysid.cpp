#include "ffc/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include "ffc/textio.hpp"

namespace ffc {

namespace {

constexpr double kInfCost = std::numeric_limits<double>::infinity();

}  // namespace

void IdDataset::validate() const {
    if (!(Ts > 0.0) || !std::isfinite(Ts)) throw std::invalid_argument("dataset: sample period must be positive");
    if (df.size() != dp.size()) throw std::invalid_argument("dataset: frequency and input lengths differ");
    if (df.size() < 50) throw std::invalid_argument("dataset: at least 50 samples are required");
    if (x0.size() != 2) throw std::invalid_argument("dataset: initial state must have two entries");
    for (std::size_t i = 0; i < df.size(); ++i)
        if (!std::isfinite(df[i]) || !std::isfinite(dp[i]))
            throw std::invalid_argument("dataset: non-finite value at sample " + std::to_string(i));
}

DiscreteModel id_model(const IdParams& p, double Ts, double f_b) {
    Mat A(2, 2), B(2, 1);
    A << 0.0, 1.0, -p.wn * p.wn, -2.0 * p.zeta * p.wn;
    B << 0.0, 1.0;
    const ZohPair z = zoh(A, B, Ts);
    DiscreteModel m;
    m.Ad = z.Ad;
    m.Bd = z.Bd;
    m.C.resize(1, 2);
    m.C << f_b * p.g, f_b * p.h;
    return m;
}

PredictorStep predictor_step(const DiscreteModel& m, const Vec& K, const Vec& x, double dp, double df) {
    PredictorStep s;
    s.df_hat = (m.C * x)(0);
    s.x_next = m.Ad * x + m.Bd.col(0) * dp + K * (df - s.df_hat);
    return s;
}

std::vector<double> predict_series(const IdParams& p, const IdDataset& d) {
    const DiscreteModel m = id_model(p, d.Ts, d.f_b);
    std::vector<double> out(d.df.size());
    Vec x = d.x0;
    for (std::size_t i = 0; i < d.df.size(); ++i) {
        PredictorStep s = predictor_step(m, p.K, x, d.dp[i], d.df[i]);
        out[i] = s.df_hat;
        x = std::move(s.x_next);
    }
    return out;
}

namespace {

double peak_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

struct Packing {
    bool fit_gain;
    int size() const { return fit_gain ? 6 : 4; }

    Vec pack(const IdParams& p) const {
        Vec th(size());
        th(0) = std::log(p.wn);
        th(1) = std::log(p.zeta);
        th(2) = std::log(p.g);
        th(3) = std::log(p.h);
        if (fit_gain) th.tail(2) = p.K;
        return th;
    }

    IdParams unpack(const Vec& th) const {
        IdParams p;
        p.wn = std::exp(th(0));
        p.zeta = std::exp(th(1));
        p.g = std::exp(th(2));
        p.h = std::exp(th(3));
        p.K = fit_gain ? Vec(th.tail(2)) : Vec(Vec::Zero(2));
        return p;
    }
};

Vec clamp_to_bounds(Vec th, const IdBounds& b, bool fit_gain) {
    th(0) = std::clamp(th(0), std::log(b.wn_lo), std::log(b.wn_hi));
    th(1) = std::clamp(th(1), std::log(b.zeta_lo), std::log(b.zeta_hi));
    th(2) = std::clamp(th(2), std::log(b.g_lo), std::log(b.g_hi));
    th(3) = std::clamp(th(3), std::log(b.h_lo), std::log(b.h_hi));
    if (fit_gain)
        for (int i = 4; i < 6; ++i) th(i) = std::clamp(th(i), -b.K_abs, b.K_abs);
    return th;
}

// Residuals after the burn-in; empty when the predictor is unstable.
Vec residuals(const IdParams& p, const IdDataset& d, int burn_in) {
    const DiscreteModel m = id_model(p, d.Ts, d.f_b);
    if (spectral_radius(m.Ad - p.K * m.C) >= 1.0) return {};
    const int n = static_cast<int>(d.df.size());
    Vec r(n - burn_in);
    Vec x = d.x0;
    for (int i = 0; i < n; ++i) {
        PredictorStep s = predictor_step(m, p.K, x, d.dp[i], d.df[i]);
        if (i >= burn_in) r(i - burn_in) = d.df[i] - s.df_hat;
        x = std::move(s.x_next);
    }
    if (!r.allFinite()) return {};
    return r;
}

double cost_of(const Vec& r) { return r.size() == 0 ? kInfCost : 0.5 * r.squaredNorm(); }

}  // namespace

FitReport pem_fit(const IdDataset& d, const IdParams& init, const IdBounds& bounds, const FitOptions& opt) {
    d.validate();
    if (!(init.wn > 0 && init.zeta > 0 && init.g > 0 && init.h > 0) || init.K.size() != 2 || !init.K.allFinite())
        throw std::invalid_argument("pem_fit: initial guess must be finite with positive model parameters");
    if (opt.burn_in < 0 || opt.burn_in >= static_cast<int>(d.df.size()) - 10)
        throw std::invalid_argument("pem_fit: burn-in leaves too few samples");

    const Packing pk{opt.fit_gain};
    Vec th = clamp_to_bounds(pk.pack(init), bounds, opt.fit_gain);
    Vec r = residuals(pk.unpack(th), d, opt.burn_in);
    double cost = cost_of(r);
    FitReport rep;
    if (!std::isfinite(cost)) {
        rep.params = pk.unpack(th);
        rep.message = "initial predictor is unstable";
        rep.cost = cost;
        return rep;
    }

    rep.cost_history.push_back(cost);
    const int np = pk.size();
    double lambda = 1e-3;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        Mat J(r.size(), np);
        for (int j = 0; j < np; ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(th(j)));
            Vec tp = th, tm = th;
            tp(j) += h;
            tm(j) -= h;
            const Vec rp = residuals(pk.unpack(tp), d, opt.burn_in);
            const Vec rm = residuals(pk.unpack(tm), d, opt.burn_in);
            if (rp.size() && rm.size()) J.col(j) = (rp - rm) / (2.0 * h);
            else if (rp.size()) J.col(j) = (rp - r) / h;
            else if (rm.size()) J.col(j) = (r - rm) / h;
            else J.col(j).setZero();
        }
        const Mat JtJ = J.transpose() * J;
        const Vec g = J.transpose() * r;
        bool accepted = false;
        double new_cost = cost;
        Vec step;
        for (int tries = 0; tries < 30; ++tries) {
            Mat Aug = JtJ;
            for (int j = 0; j < np; ++j) Aug(j, j) += lambda * std::max(JtJ(j, j), 1e-12);
            step = Aug.ldlt().solve(-g);
            const Vec cand = clamp_to_bounds(th + step, bounds, opt.fit_gain);
            const Vec rc = residuals(pk.unpack(cand), d, opt.burn_in);
            new_cost = cost_of(rc);
            if (new_cost < cost) {
                step = cand - th;
                th = cand;
                r = rc;
                accepted = true;
                lambda = std::max(lambda / 3.0, 1e-12);
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) {
            rep.converged = true;
            rep.message = "no further decrease";
            break;
        }
        const double rel = (cost - new_cost) / std::max(cost, 1e-300);
        cost = new_cost;
        rep.cost_history.push_back(cost);
        if (rel < opt.tol || step.norm() < 1e-12) {
            rep.converged = true;
            rep.message = "converged";
            ++it;
            break;
        }
    }
    if (!rep.converged) rep.message = "iteration limit reached; returning best iterate";
    rep.params = pk.unpack(th);
    rep.iterations = it;
    rep.cost = cost;
    const double peak = peak_abs(d.df);
    rep.rmse_pct = peak > 0.0 ? 100.0 * std::sqrt(r.squaredNorm() / r.size()) / peak : 0.0;
    const DiscreteModel m = id_model(rep.params, d.Ts, d.f_b);
    rep.predictor_radius = spectral_radius(m.Ad - rep.params.K * m.C);
    rep.stable = rep.predictor_radius < 1.0 && spectral_radius(m.Ad) < 1.0;
    if (!rep.stable) {
        rep.converged = false;
        rep.message = "rejected: identified model or predictor is not stable (radius " +
                      text::format_number(rep.predictor_radius) + ")";
    }
    return rep;
}

double simulation_rmse_pct(const IdParams& p, const IdDataset& d) {
    IdParams q = p;
    q.K = Vec::Zero(2);
    const auto yhat = predict_series(q, d);
    double s = 0.0;
    for (std::size_t i = 0; i < yhat.size(); ++i) s += (d.df[i] - yhat[i]) * (d.df[i] - yhat[i]);
    const double peak = peak_abs(d.df);
    return peak > 0.0 ? 100.0 * std::sqrt(s / yhat.size()) / peak : 0.0;
}

IdDataset simulate_dataset(const IdParams& p, const std::vector<double>& dp, double Ts, double noise_frac,
                           std::uint64_t seed, double f_b) {
    IdDataset d;
    d.Ts = Ts;
    d.f_b = f_b;
    d.dp = dp;
    const DiscreteModel m = id_model(p, Ts, f_b);
    Vec x = Vec::Zero(2);
    d.df.resize(dp.size());
    for (std::size_t i = 0; i < dp.size(); ++i) {
        d.df[i] = (m.C * x)(0);
        x = m.Ad * x + m.Bd.col(0) * dp[i];
    }
    if (noise_frac > 0.0) {
        const double sigma = noise_frac * peak_abs(d.df);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> n(0.0, sigma);
        for (double& v : d.df) v += n(rng);
    }
    return d;
}

IdDataset make_dataset(const std::vector<double>& t, const std::vector<double>& f, const std::vector<double>& dp,
                       double t_event, double Ts, double f_b) {
    if (t.size() != f.size() || t.size() != dp.size() || t.size() < 2)
        throw std::invalid_argument("make_dataset: trajectory columns must have equal length of at least 2");
    if (!(Ts > 0.0)) throw std::invalid_argument("make_dataset: sample period must be positive");
    if (t_event <= t.front() || t_event >= t.back())
        throw std::invalid_argument("make_dataset: event not found inside the trajectory");
    double pre = 0.0;
    int n_pre = 0;
    for (std::size_t i = 0; i < t.size() && t[i] < t_event - 1e-12; ++i) {
        pre += f[i];
        ++n_pre;
    }
    if (n_pre == 0) throw std::invalid_argument("make_dataset: no samples before the event");
    pre /= n_pre;
    auto interp = [&](const std::vector<double>& y, double tq) {
        const auto it = std::upper_bound(t.begin(), t.end(), tq);
        if (it == t.begin()) return y.front();
        if (it == t.end()) return y.back();
        const std::size_t j = static_cast<std::size_t>(it - t.begin());
        const double a = (tq - t[j - 1]) / (t[j] - t[j - 1]);
        return y[j - 1] + a * (y[j] - y[j - 1]);
    };
    // Zero-order samples of the input: the value held over [t, t + Ts).
    auto held = [&](double tq) {
        auto it = std::upper_bound(t.begin(), t.end(), tq + 1e-9);
        return it == t.begin() ? dp.front() : dp[static_cast<std::size_t>(it - t.begin()) - 1];
    };
    IdDataset d;
    d.Ts = Ts;
    d.f_b = f_b;
    const double t0 = std::max(t.front(), t_event - Ts);
    const double base_dp = held(t0);
    for (double tq = t0; tq <= t.back() + 1e-9; tq += Ts) {
        d.df.push_back(interp(f, tq) - pre);
        d.dp.push_back(held(tq) - base_dp);
    }
    return d;
}

void write_dataset_csv(const IdDataset& d, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "t,df_hz,dp_pu\n";
    for (std::size_t i = 0; i < d.df.size(); ++i)
        os << text::format_number(i * d.Ts) << ',' << text::format_number(d.df[i]) << ','
           << text::format_number(d.dp[i]) << '\n';
    if (!os) throw std::runtime_error("write failed: " + path);
}

IdDataset read_dataset_csv(const std::string& path, double f_b) {
    const text::CsvTable c = text::read_csv(path);
    const int it = c.column("t"), jf = c.column("df_hz"), jp = c.column("dp_pu");
    if (it < 0 || jf < 0 || jp < 0) throw std::invalid_argument(path + ": expected columns t, df_hz, dp_pu");
    if (c.rows.size() < 2) throw std::invalid_argument(path + ": too few samples");
    IdDataset d;
    d.f_b = f_b;
    d.Ts = c.rows[1][it] - c.rows[0][it];
    for (std::size_t i = 0; i < c.rows.size(); ++i) {
        if (i > 0 && std::abs(c.rows[i][it] - c.rows[i - 1][it] - d.Ts) > 1e-6 * std::max(1.0, d.Ts))
            throw std::invalid_argument(path + ": non-uniform sample spacing at row " + std::to_string(i + 2));
        d.df.push_back(c.rows[i][jf]);
        d.dp.push_back(c.rows[i][jp]);
    }
    d.validate();
    return d;
}

}  // namespace ffc
