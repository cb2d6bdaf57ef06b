#include "ffc/vsc.hpp"

#include <cmath>
#include <fstream>

#include "ffc/textio.hpp"

namespace ffc {

VscDroop droop_from_unit(const VscUnitParams& u) {
    VscDroop d;
    d.Rp = u.Rp_dev;
    d.Rq = u.Rq_dev;
    d.omega_f = u.omega_f;
    d.p_star = u.p_set_mw / u.P_bar;
    d.q_star = u.q_set_mvar / u.P_bar;
    d.omega_star = u.omega_c_star;
    d.V_star = u.V_c_star;
    return d;
}

void VscDevice::validate() const {
    const auto& e = params.el;
    if (!(e.r_f > 0 && e.l_f > 0 && e.c_f > 0 && e.r_t > 0 && e.l_t > 0 && e.omega_b > 0))
        throw std::invalid_argument("device: electrical parameters must be positive");
    const auto& k = params.gains;
    if (!(k.Kp_v > 0 && k.Kp_i > 0 && k.Kp_dc > 0)) throw std::invalid_argument("device: proportional gains must be positive");
    if (k.Ki_v < 0 || k.Ki_i < 0 || k.Ki_dc < 0) throw std::invalid_argument("device: integral gains must be non-negative");
    for (double f : {k.Kf_v, k.Kf_i, k.Kf_dc})
        if (f != 0.0 && f != 1.0) throw std::invalid_argument("device: feed-forward gains must be 0 or 1");
    const auto& c = params.dc;
    if (!(c.c_dc > 0 && c.g_dc > 0 && c.v_dc_star > 0 && c.e_b > 0))
        throw std::invalid_argument("device: DC-side parameters must be positive");
    if (!(droop.Rp > 0)) throw std::invalid_argument("device: active droop gain must be positive");
}

Vec VscState::pack() const {
    Vec v(kSize);
    v << i_f, v_f, i_g, p_tilde, q_tilde, xi, gamma, v_dc, chi_dc, soc, theta_c;
    return v;
}

VscState VscState::unpack(const Vec& v, int o) {
    VscState s;
    s.i_f = v.segment<2>(o);
    s.v_f = v.segment<2>(o + 2);
    s.i_g = v.segment<2>(o + 4);
    s.p_tilde = v(o + 6);
    s.q_tilde = v(o + 7);
    s.xi = v.segment<2>(o + 8);
    s.gamma = v.segment<2>(o + 10);
    s.v_dc = v(o + 12);
    s.chi_dc = v(o + 13);
    s.soc = v(o + 14);
    s.theta_c = v(o + 15);
    return s;
}

const std::vector<std::string>& VscState::names() {
    static const std::vector<std::string> n = {"i_f_d", "i_f_q", "v_f_d",   "v_f_q",   "i_g_d",  "i_g_q",
                                               "p_tilde", "q_tilde", "xi_d", "xi_q", "gamma_d", "gamma_q",
                                               "v_dc",  "chi_dc", "soc",     "theta_c"};
    return n;
}

ElectricalRates electrical_derivatives(const VscElectricalParams& el, const VscState& s, const V2& v_sw,
                                       const V2& v_t, double omega_r) {
    const double wb = el.omega_b;
    ElectricalRates r;
    r.di_f = wb / el.l_f * (v_sw - s.v_f) - (el.r_f / el.l_f * wb) * s.i_f - wb * omega_r * jrot(s.i_f);
    r.dv_f = wb / el.c_f * (s.i_f - s.i_g) - wb * omega_r * jrot(s.v_f);
    r.di_g = wb / el.l_t * (s.v_f - v_t) - (el.r_t / el.l_t * wb) * s.i_g - wb * omega_r * jrot(s.i_g);
    return r;
}

DroopOutput droop_outer(const VscState& s, const VscDroop& d, double dp_star) {
    DroopOutput o;
    o.p_c = s.v_f.dot(s.i_g);
    o.q_c = s.v_f.dot(-jrot(s.i_g));  // v_f' j' i_g
    o.omega_c = d.omega_star + d.Rp * (d.p_star + dp_star - s.p_tilde);
    o.v_c_mag = d.V_star + d.Rq * (d.q_star - s.q_tilde);
    o.dp_tilde = d.omega_f * (o.p_c - s.p_tilde);
    o.dq_tilde = d.omega_f * (o.q_c - s.q_tilde);
    return o;
}

double rocof_state(const VscState& s, const VscDroop& d) {
    return d.Rp * d.omega_f * (s.p_tilde - s.v_f.dot(s.i_g));
}

InnerOutput inner_loops(const VscState& s, const VscElectricalParams& el, const VscControlGains& k,
                        const V2& v_f_ref, double omega_c) {
    InnerOutput o;
    o.dxi = v_f_ref - s.v_f;
    o.i_f_ref = k.Kp_v * (v_f_ref - s.v_f) + k.Ki_v * s.xi + k.Kf_v * s.i_g + omega_c * el.c_f * jrot(s.v_f);
    o.dgamma = o.i_f_ref - s.i_f;
    o.v_sw = k.Kp_i * (o.i_f_ref - s.i_f) + k.Ki_i * s.gamma + k.Kf_i * s.v_f + omega_c * el.l_f * jrot(s.i_f);
    return o;
}

double dc_current_reference(double p_star, double q_star, double V_star, const DcSideParams& dc, double r_f) {
    if (V_star == 0.0 || dc.v_dc_star == 0.0)
        throw std::invalid_argument("dc_current_reference: voltage setpoints must be non-zero");
    return (p_star + r_f * (p_star * p_star + q_star * q_star) / (V_star * V_star)) / dc.v_dc_star +
           dc.g_dc * dc.v_dc_star;
}

DcPiOutput dc_pi(const VscState& s, const DcSideParams& dc, const VscControlGains& k, double i_dc_star) {
    const double e = dc.v_dc_star - s.v_dc;
    return {k.Kp_dc * e + k.Ki_dc * s.chi_dc + k.Kf_dc * i_dc_star, e};
}

DcRates dc_dynamics(const VscState& s, const DcSideParams& dc, double omega_b, double i_dc, double p_sw,
                    double p_dc) {
    const double i_sw = p_sw / s.v_dc;
    return {omega_b / dc.c_dc * (-dc.g_dc * s.v_dc - i_sw + i_dc), (p_dc - p_sw) / dc.e_b};
}

VscOutputs device_derivative(const VscDevice& dev, const VscState& s, const V2& v_t, double dp_star,
                             VscState& ds) {
    const auto& P = dev.params;
    const DroopOutput dr = droop_outer(s, dev.droop, dp_star);
    const V2 v_ref(dr.v_c_mag, 0.0);
    const InnerOutput in = inner_loops(s, P.el, P.gains, v_ref, dr.omega_c);
    const ElectricalRates el = electrical_derivatives(P.el, s, in.v_sw, v_t, dr.omega_c);
    const double i_ref = dc_current_reference(dev.droop.p_star, dev.droop.q_star, dev.droop.V_star, P.dc, P.el.r_f);
    const DcPiOutput pi = dc_pi(s, P.dc, P.gains, i_ref);
    VscOutputs o;
    o.p_c = dr.p_c;
    o.q_c = dr.q_c;
    o.omega_c = dr.omega_c;
    o.p_sw = in.v_sw.dot(s.i_f);
    o.i_dc = pi.i_dc;
    o.p_dc = s.v_dc * pi.i_dc;
    o.rocof = dev.droop.Rp * dev.droop.omega_f * (s.p_tilde - dr.p_c);
    o.p_term = v_t.dot(s.i_g);
    const DcRates dcr = dc_dynamics(s, P.dc, P.el.omega_b, pi.i_dc, o.p_sw, o.p_dc);
    ds.i_f = el.di_f;
    ds.v_f = el.dv_f;
    ds.i_g = el.di_g;
    ds.p_tilde = dr.dp_tilde;
    ds.q_tilde = dr.dq_tilde;
    ds.xi = in.dxi;
    ds.gamma = in.dgamma;
    ds.v_dc = dcr.dv_dc;
    ds.chi_dc = pi.dchi;
    ds.soc = dcr.dsoc;
    ds.theta_c = P.el.omega_b * (dr.omega_c - 1.0);
    return o;
}

V2 terminal_in_frame(double V_t, double theta_t, double theta_c) {
    return V2(V_t * std::cos(theta_t - theta_c), V_t * std::sin(theta_t - theta_c));
}

Vec rk4_step(const Rhs& f, double t, const Vec& x, double dt, const std::vector<std::string>& names) {
    const Vec k1 = f(t, x);
    const Vec k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
    const Vec k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
    const Vec k4 = f(t + dt, x + dt * k3);
    Vec out = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    for (int i = 0; i < out.size(); ++i) {
        if (!std::isfinite(out(i))) {
            const std::string n = i < static_cast<int>(names.size()) ? names[i] : "x[" + std::to_string(i) + "]";
            throw IntegrationFault("integration produced a non-finite value in " + n + " at t=" +
                                   text::format_number(t + dt));
        }
    }
    return out;
}

VscState vsc_equilibrium(const VscDevice& dev, double dp_star, double V_t, double theta_t, double soc) {
    dev.validate();
    const auto& P = dev.params;
    const double p_ref = dev.droop.p_star + dp_star;
    // Initial guess: voltage at V*, angle lead from the transformer reactance.
    VscState s;
    const double delta = std::asin(std::clamp(p_ref * P.el.l_t / (dev.droop.V_star * V_t), -0.9, 0.9));
    s.theta_c = theta_t + delta;
    s.v_f = V2(dev.droop.V_star, 0.0);
    const V2 vt = terminal_in_frame(V_t, theta_t, s.theta_c);
    s.i_g = V2(p_ref / dev.droop.V_star, (s.v_f(1) - vt(1)) * 0.0);
    s.i_f = s.i_g + P.el.c_f * jrot(s.v_f);
    s.p_tilde = p_ref;
    s.v_dc = P.dc.v_dc_star;
    s.soc = soc;

    // Unknowns: every state except soc.
    auto to_vec = [](const VscState& st) {
        Vec v = st.pack();
        Vec u(15);
        u << v.head(14), v(15);
        return u;
    };
    auto from_vec = [&](const Vec& u) {
        Vec v(16);
        v << u.head(14), soc, u(14);
        return VscState::unpack(v);
    };
    auto residual = [&](const Vec& u) {
        const VscState st = from_vec(u);
        VscState ds;
        device_derivative(dev, st, terminal_in_frame(V_t, theta_t, st.theta_c), dp_star, ds);
        Vec r = ds.pack();
        Vec out(15);
        out << r.head(14), r(15) / P.el.omega_b;
        // soc drift from DC losses is not an equilibrium condition.
        return out;
    };
    Vec u = to_vec(s);
    for (int it = 0; it < 100; ++it) {
        const Vec r = residual(u);
        if (r.cwiseAbs().maxCoeff() < 1e-13) break;
        Mat J(15, 15);
        for (int j = 0; j < 15; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(u(j)));
            Vec up = u, um = u;
            up(j) += h;
            um(j) -= h;
            J.col(j) = (residual(up) - residual(um)) / (2.0 * h);
        }
        u -= J.fullPivLu().solve(r);
    }
    const Vec r = residual(u);
    if (!(r.cwiseAbs().maxCoeff() < 1e-9)) throw std::runtime_error("vsc_equilibrium: Newton iteration did not converge");
    return from_vec(u);
}

VscTrajectory simulate_infinite_bus(const VscDevice& dev, const VscState& x0, double t_end, double dt,
                                    const std::function<double(double)>& dp_star, int record_every) {
    dev.validate();
    if (!(dt > 0.0) || dt > 1e-3) throw std::invalid_argument("simulate_infinite_bus: step must be in (0, 1 ms]");
    const Rhs f = [&](double t, const Vec& x) {
        const VscState s = VscState::unpack(x);
        VscState ds;
        device_derivative(dev, s, terminal_in_frame(1.0, 0.0, s.theta_c), dp_star(t), ds);
        return ds.pack();
    };
    VscTrajectory tr;
    const int steps = static_cast<int>(std::lround(t_end / dt));
    Vec x = x0.pack();
    for (int k = 0; k <= steps; ++k) {
        const double t = k * dt;
        const VscState s = VscState::unpack(x);
        if (!(s.v_dc > 0.0)) throw IntegrationFault("dc voltage collapsed at t=" + text::format_number(t));
        if (k % record_every == 0 || k == steps) {
            VscState ds;
            tr.t.push_back(t);
            tr.x.push_back(s);
            tr.y.push_back(device_derivative(dev, s, terminal_in_frame(1.0, 0.0, s.theta_c), dp_star(t), ds));
        }
        if (k < steps) x = rk4_step(f, t, x, dt, VscState::names());
    }
    return tr;
}

void write_vsc_csv(const VscTrajectory& tr, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "t";
    for (const auto& n : VscState::names()) os << ',' << n;
    os << ",p_c,q_c,omega_c,p_sw,p_dc,i_dc,rocof\n";
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        os << text::format_number(tr.t[k]);
        const Vec v = tr.x[k].pack();
        for (int i = 0; i < v.size(); ++i) os << ',' << text::format_number(v(i));
        const auto& y = tr.y[k];
        for (double q : {y.p_c, y.q_c, y.omega_c, y.p_sw, y.p_dc, y.i_dc, y.rocof}) os << ',' << text::format_number(q);
        os << '\n';
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace ffc
