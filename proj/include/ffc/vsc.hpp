#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ffc/grid.hpp"
#include "ffc/vsc_params.hpp"

namespace ffc {

using V2 = Eigen::Vector2d;

// 90 degree rotation used for every dq cross-coupling term.
inline V2 jrot(const V2& x) { return V2(-x(1), x(0)); }

struct VscDroop {
    double Rp = 0.04, Rq = 0.001, omega_f = 2.5;
    double p_star = 0.0, q_star = 0.0, omega_star = 1.0, V_star = 1.0;
};

VscDroop droop_from_unit(const VscUnitParams& u);

struct VscDevice {
    VscDeviceParams params;
    VscDroop droop;
    void validate() const;  // throws std::invalid_argument
};

struct VscState {
    static constexpr int kSize = 16;
    V2 i_f = V2::Zero(), v_f = V2::Zero(), i_g = V2::Zero();
    double p_tilde = 0.0, q_tilde = 0.0;
    V2 xi = V2::Zero(), gamma = V2::Zero();
    double v_dc = 1.0, chi_dc = 0.0, soc = 0.5, theta_c = 0.0;

    Vec pack() const;
    static VscState unpack(const Vec& v, int offset = 0);
    static const std::vector<std::string>& names();
};

struct ElectricalRates {
    V2 di_f, dv_f, di_g;
};
ElectricalRates electrical_derivatives(const VscElectricalParams& el, const VscState& s, const V2& v_sw,
                                       const V2& v_t, double omega_r);

struct DroopOutput {
    double omega_c, v_c_mag, p_c, q_c, dp_tilde, dq_tilde;
};
DroopOutput droop_outer(const VscState& s, const VscDroop& d, double dp_star);

// p.u./s
double rocof_state(const VscState& s, const VscDroop& d);

struct InnerOutput {
    V2 i_f_ref, v_sw, dxi, dgamma;
};
InnerOutput inner_loops(const VscState& s, const VscElectricalParams& el, const VscControlGains& k,
                        const V2& v_f_ref, double omega_c);

double dc_current_reference(double p_star, double q_star, double V_star, const DcSideParams& dc, double r_f);

struct DcPiOutput {
    double i_dc, dchi;
};
DcPiOutput dc_pi(const VscState& s, const DcSideParams& dc, const VscControlGains& k, double i_dc_star);

struct DcRates {
    double dv_dc, dsoc;
};
DcRates dc_dynamics(const VscState& s, const DcSideParams& dc, double omega_b, double i_dc, double p_sw,
                    double p_dc);

struct VscOutputs {
    double p_c = 0, q_c = 0, omega_c = 1, p_sw = 0, p_dc = 0, i_dc = 0, rocof = 0, p_term = 0;
};

// Full right-hand side. v_t is the terminal voltage in the converter frame;
// the frame turns at omega_c, theta_c advances at omega_b*(omega_c - 1).
VscOutputs device_derivative(const VscDevice& dev, const VscState& s, const V2& v_t, double dp_star,
                             VscState& ds);

// Terminal phasor (magnitude, synchronous-frame angle) expressed in the converter frame.
V2 terminal_in_frame(double V_t, double theta_t, double theta_c);

struct IntegrationFault : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Rhs = std::function<Vec(double, const Vec&)>;
// One classical RK4 step; throws IntegrationFault naming the first non-finite
// component (names optional).
Vec rk4_step(const Rhs& f, double t, const Vec& x, double dt, const std::vector<std::string>& names = {});

// Equilibrium of one device behind a terminal voltage (V_t, theta_t) with the
// frame at nominal speed. soc is kept at the given value. Newton iteration.
VscState vsc_equilibrium(const VscDevice& dev, double dp_star, double V_t, double theta_t, double soc = 0.5);

struct VscTrajectory {
    std::vector<double> t;
    std::vector<VscState> x;
    std::vector<VscOutputs> y;
};

// Single converter on an infinite bus (1 p.u. at angle 0). dp_star(t) is the
// supervisory setpoint change. Records every `record_every` steps.
VscTrajectory simulate_infinite_bus(const VscDevice& dev, const VscState& x0, double t_end, double dt,
                                    const std::function<double(double)>& dp_star, int record_every = 1);

// CSV with a fixed header: t, every state, then p_c,q_c,omega_c,p_sw,p_dc,i_dc,rocof.
void write_vsc_csv(const VscTrajectory& tr, const std::string& path);

}  // namespace ffc
