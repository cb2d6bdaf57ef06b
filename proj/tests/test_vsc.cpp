#include <gtest/gtest.h>

#include <cmath>

#include "ffc/vsc.hpp"

using namespace ffc;

namespace {

VscDevice device(double p_star = 0.2) {
    VscDevice d;
    d.droop.Rp = 0.04;
    d.droop.omega_f = 2.5;
    d.droop.p_star = p_star;
    return d;
}

auto step_at(double t0, double dp) {
    return [=](double t) { return t >= t0 ? dp : 0.0; };
}

}  // namespace

TEST(Electrical, ZeroCurrentsLeaveOnlyRotation) {
    VscElectricalParams el;
    VscState s;
    s.v_f = V2(0.9, 0.2);
    const auto r = electrical_derivatives(el, s, s.v_f, V2(1.0, 0.0), 1.02);
    EXPECT_EQ(r.di_f.norm(), 0.0);
    const V2 expect = -el.omega_b * 1.02 * jrot(s.v_f);
    EXPECT_NEAR((r.dv_f - expect).norm(), 0.0, 1e-12);
}

TEST(Electrical, LinearInInputs) {
    VscElectricalParams el;
    VscState a, b;
    a.i_f = V2(0.3, -0.1);
    a.v_f = V2(1.0, 0.05);
    a.i_g = V2(0.2, 0.0);
    b.i_f = V2(-0.2, 0.4);
    b.v_f = V2(0.1, 0.7);
    b.i_g = V2(0.5, -0.3);
    VscState c;
    c.i_f = a.i_f + b.i_f;
    c.v_f = a.v_f + b.v_f;
    c.i_g = a.i_g + b.i_g;
    const V2 sa(0.9, 0.1), sb(0.2, -0.3), ta(1.0, 0.0), tb(0.0, 0.1);
    const auto ra = electrical_derivatives(el, a, sa, ta, 1.0);
    const auto rb = electrical_derivatives(el, b, sb, tb, 1.0);
    const auto rc = electrical_derivatives(el, c, sa + sb, ta + tb, 1.0);
    EXPECT_NEAR((rc.di_f - ra.di_f - rb.di_f).norm(), 0.0, 1e-9);
    EXPECT_NEAR((rc.dv_f - ra.dv_f - rb.dv_f).norm(), 0.0, 1e-9);
    EXPECT_NEAR((rc.di_g - ra.di_g - rb.di_g).norm(), 0.0, 1e-9);
}

TEST(Droop, NullAndArithmetic) {
    VscDroop d;
    d.Rp = 0.02;
    d.p_star = 0.3;
    VscState s;
    s.p_tilde = 0.3 + 0.1;
    EXPECT_DOUBLE_EQ(droop_outer(s, d, 0.1).omega_c, d.omega_star);
    s.p_tilde = 0.3 + 0.1 + 0.5;
    EXPECT_NEAR(droop_outer(s, d, 0.1).omega_c, d.omega_star - 0.01, 1e-15);
}

TEST(Droop, FilterReaches632PercentInOneTimeConstant) {
    VscDroop d;
    d.omega_f = 31.4;
    VscState s;
    s.v_f = V2(1.0, 0.0);
    s.i_g = V2(0.5, 0.0);  // p_c = 0.5 held constant
    const double tau = 1.0 / d.omega_f;
    const int n = 10000;
    const double h = tau / n;
    const Rhs f = [&](double, const Vec& x) {
        VscState st = s;
        st.p_tilde = x(0);
        Vec r(1);
        r(0) = droop_outer(st, d, 0.0).dp_tilde;
        return r;
    };
    Vec x = Vec::Zero(1);
    for (int k = 0; k < n; ++k) x = rk4_step(f, k * h, x, h);
    EXPECT_NEAR(x(0) / 0.5, 1.0 - std::exp(-1.0), 1e-10);
    EXPECT_NEAR(x(0) / 0.5, 0.632, 1e-3);
}

TEST(Droop, RocofStateProduct) {
    VscDroop d;
    d.Rp = 0.02;
    d.omega_f = 31.4;
    VscState s;
    s.v_f = V2(1.0, 0.0);
    s.i_g = V2(0.6, 0.0);
    s.p_tilde = 0.5;
    EXPECT_NEAR(rocof_state(s, d), -0.0628, 1e-12);
}

TEST(Inner, ResidualCrossCoupling) {
    VscElectricalParams el;
    VscControlGains k;
    k.Kf_v = 0.0;
    k.Kf_i = 0.0;
    VscState s;
    s.v_f = V2(1.0, 0.0);
    s.i_f = V2(0.0, el.c_f * 1.0);  // equals the voltage-loop output at this point
    const auto o = inner_loops(s, el, k, s.v_f, 1.0);
    EXPECT_NEAR((o.i_f_ref - s.i_f).norm(), 0.0, 1e-15);
    EXPECT_NEAR((o.v_sw - 1.0 * el.l_f * jrot(s.i_f)).norm(), 0.0, 1e-15);
}

TEST(Inner, FeedForwardOnly) {
    VscElectricalParams el;
    VscControlGains k;
    k.Kp_v = k.Ki_v = k.Kp_i = k.Ki_i = 0.0;
    VscState s;
    s.v_f = V2(0.98, 0.1);
    s.i_g = V2(0.4, -0.2);
    s.i_f = V2(0.1, 0.3);
    s.xi = V2(5, 5);
    s.gamma = V2(7, 7);
    const auto o = inner_loops(s, el, k, V2(1, 0), 1.01);
    EXPECT_NEAR((o.i_f_ref - (s.i_g + 1.01 * el.c_f * jrot(s.v_f))).norm(), 0.0, 1e-15);
}

TEST(Dc, CurrentReferenceExamples) {
    DcSideParams dc;
    dc.v_dc_star = 1.0;
    dc.g_dc = 0.1;
    EXPECT_NEAR(dc_current_reference(0, 0, 1, dc, 0.03), 0.1, 1e-15);
    dc.g_dc = 0.0;
    EXPECT_NEAR(dc_current_reference(1, 0, 1, dc, 0.01), 1.01, 1e-15);
    EXPECT_THROW(dc_current_reference(1, 0, 0, dc, 0.01), std::invalid_argument);
    dc.v_dc_star = 0.0;
    EXPECT_THROW(dc_current_reference(1, 0, 1, dc, 0.01), std::invalid_argument);
}

TEST(Dc, PiTrackingAndProportional) {
    DcSideParams dc;
    VscControlGains k;
    VscState s;
    s.v_dc = dc.v_dc_star;
    const double ref = dc_current_reference(0.4, 0.1, 1.0, dc, 0.03);
    EXPECT_DOUBLE_EQ(dc_pi(s, dc, k, ref).i_dc, ref);
    k.Ki_dc = 0;
    k.Kf_dc = 0;
    k.Kp_dc = 5;
    s.v_dc = dc.v_dc_star - 0.02;
    s.chi_dc = 3.0;
    EXPECT_NEAR(dc_pi(s, dc, k, ref).i_dc, 0.1, 1e-14);
}

TEST(Dc, BalancePoints) {
    DcSideParams dc;
    VscState s;
    s.v_dc = 1.1;
    const double p_sw = 0.3;
    const auto r = dc_dynamics(s, dc, 314.0, dc.g_dc * s.v_dc + p_sw / s.v_dc, p_sw, p_sw);
    EXPECT_NEAR(r.dv_dc, 0.0, 1e-13);
    EXPECT_EQ(r.dsoc, 0.0);
}

TEST(Device, ValidationRejectsBadParameters) {
    VscDevice d = device();
    d.params.gains.Kf_v = 0.5;
    EXPECT_THROW(d.validate(), std::invalid_argument);
    d = device();
    d.params.dc.c_dc = 0;
    EXPECT_THROW(d.validate(), std::invalid_argument);
    d = device();
    d.params.el.l_f = -1;
    EXPECT_THROW(d.validate(), std::invalid_argument);
}

TEST(Simulate, EquilibriumHoldsFiveSeconds) {
    const VscDevice d = device();
    const VscState x0 = vsc_equilibrium(d, 0.0, 1.0, 0.0);
    const auto tr = simulate_infinite_bus(d, x0, 5.0, 1e-4, [](double) { return 0.0; }, 1000);
    const Vec a = x0.pack();
    for (const auto& s : tr.x) {
        Vec diff = s.pack() - a;
        diff(14) = 0.0;  // soc drains through the DC conductance
        EXPECT_LE(diff.cwiseAbs().maxCoeff(), 1e-9);
    }
    // The drain rate is the DC conductance loss.
    const double rate = d.params.dc.g_dc * x0.v_dc * x0.v_dc / d.params.dc.e_b;
    EXPECT_NEAR(tr.x.back().soc - x0.soc, rate * 5.0, 1e-9);
}

TEST(Simulate, Rk4OrderFour) {
    const VscDevice d = device();
    const VscState x0 = vsc_equilibrium(d, 0.0, 1.0, 0.0);
    auto end_state = [&](double dt) {
        return simulate_infinite_bus(d, x0, 0.05, dt, step_at(0.0, 0.1), 1 << 30).x.back().pack();
    };
    const Vec ref = end_state(1.25e-5);
    const double e1 = (end_state(1e-4) - ref).norm();
    const double e2 = (end_state(5e-5) - ref).norm();
    const double ratio = e1 / e2;
    EXPECT_GT(ratio, 12.0);
    EXPECT_LT(ratio, 20.0);
}

TEST(Simulate, SetpointStepOnInfiniteBus) {
    const VscDevice d = device();
    const VscState x0 = vsc_equilibrium(d, 0.0, 1.0, 0.0);
    const auto tr = simulate_infinite_bus(d, x0, 40.0, 1e-4, step_at(0.5, 0.1), 1000);
    const auto& y0 = tr.y.front();
    const auto& y1 = tr.y.back();
    EXPECT_NEAR(y1.p_c - y0.p_c, 0.1, 1e-5);
    EXPECT_NEAR(y1.omega_c - y0.omega_c, 0.0, 1e-7);
    // Oracle: the new equilibrium computed directly.
    const VscState x1 = vsc_equilibrium(d, 0.1, 1.0, 0.0);
    EXPECT_NEAR(tr.x.back().theta_c, x1.theta_c, 1e-5);
    // DC voltage recovers.
    EXPECT_LE(std::abs(tr.x.back().v_dc - d.params.dc.v_dc_star), 0.01 * d.params.dc.v_dc_star);
}

TEST(Simulate, FilterNodePowerBalance) {
    const VscDevice d = device();
    const VscState x0 = vsc_equilibrium(d, 0.0, 1.0, 0.0);
    const auto tr = simulate_infinite_bus(d, x0, 0.3, 1e-4, step_at(0.05, 0.1), 1);
    const auto& el = d.params.el;
    double worst = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < tr.x.size(); ++k) {
        const VscState& s = tr.x[k];
        VscState ds;
        const auto y = device_derivative(d, s, terminal_in_frame(1.0, 0.0, s.theta_c), tr.t[k] >= 0.05 ? 0.1 : 0.0, ds);
        // Stored energy (l_f |i_f|^2 + c_f |v_f|^2) / (2 omega_b), differentiated.
        const double dE = (el.l_f * s.i_f.dot(ds.i_f) + el.c_f * s.v_f.dot(ds.v_f)) / el.omega_b;
        const double losses = el.r_f * s.i_f.squaredNorm();
        worst = std::max(worst, std::abs(y.p_sw - y.p_c - losses - dE));
        scale = std::max(scale, std::abs(y.p_sw));
    }
    EXPECT_LE(worst, 1e-6 * scale);
}

TEST(Simulate, EnergyBookkeeping) {
    const VscDevice d = device();
    const VscState x0 = vsc_equilibrium(d, 0.0, 1.0, 0.0);
    const auto tr = simulate_infinite_bus(d, x0, 2.0, 1e-4, step_at(0.2, 0.1), 1);
    double integral = 0.0;
    for (std::size_t k = 1; k < tr.x.size(); ++k) {
        const double a = tr.y[k - 1].p_dc - tr.y[k - 1].p_sw;
        const double b = tr.y[k].p_dc - tr.y[k].p_sw;
        integral += 0.5 * (a + b) * (tr.t[k] - tr.t[k - 1]);
    }
    EXPECT_NEAR(integral / d.params.dc.e_b, tr.x.back().soc - tr.x.front().soc, 1e-8);
}

TEST(Simulate, SocFallsWhileDischarging) {
    const VscDevice d = device();
    const VscState x0 = vsc_equilibrium(d, 0.0, 1.0, 0.0);
    const auto tr = simulate_infinite_bus(d, x0, 1.0, 1e-4, step_at(0.1, 0.3), 10);
    int checked = 0;
    for (std::size_t k = 1; k < tr.x.size(); ++k) {
        if (tr.y[k - 1].p_sw > tr.y[k - 1].p_dc && tr.y[k].p_sw > tr.y[k].p_dc) {
            EXPECT_LT(tr.x[k].soc, tr.x[k - 1].soc);
            ++checked;
        }
    }
    EXPECT_GT(checked, 0);
}

namespace {

// Largest deviation of the detailed converter speed from the two-state droop
// model after the first 100 ms, relative to the peak reduced response.
double reduced_mismatch(const VscDevice& d) {
    const VscState x0 = vsc_equilibrium(d, 0.0, 1.0, 0.0);
    const double dt = 1e-4, dp = 0.02;
    const int rec = 10;
    const auto tr = simulate_infinite_bus(d, x0, 3.0, dt, step_at(0.0, dp), rec);
    // Synchronizing coefficient of the detailed model from two equilibria.
    const VscState x1 = vsc_equilibrium(d, 1e-3, 1.0, 0.0);
    const double k_sync = 1e-3 / (x1.theta_c - x0.theta_c);
    const double wb = d.params.el.omega_b;
    double th = 0.0, pt = 0.0, worst = 0.0, peak = 0.0;
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        const double w_red = d.droop.Rp * (dp - pt);
        peak = std::max(peak, std::abs(w_red));
        if (tr.t[k] > 0.1) worst = std::max(worst, std::abs(tr.y[k].omega_c - 1.0 - w_red));
        for (int j = 0; j < rec; ++j) {
            const double dth = wb * d.droop.Rp * (dp - pt);
            const double dpt = d.droop.omega_f * (k_sync * th - pt);
            th += dt * dth;
            pt += dt * dpt;
        }
    }
    return worst / peak;
}

}  // namespace

// With the default voltage-loop integral gain the q-axis voltage error settles
// on a seconds time scale and shifts the effective angle; the two-state model
// does not see it. The recorded mismatch is about 50%.
TEST(Simulate, ReducedAngleRateMismatchAtDefaultGains) {
    const double rel = reduced_mismatch(device());
    RecordProperty("relative_mismatch", std::to_string(rel));
    EXPECT_GT(rel, 0.05);
    EXPECT_LT(rel, 1.0);
}

TEST(Simulate, MatchesReducedAngleRateWithFastVoltageIntegrators) {
    VscDevice d = device();
    d.params.gains.Ki_v *= 10.0;
    d.params.gains.Ki_i *= 10.0;
    EXPECT_LE(reduced_mismatch(d), 0.05);
}
