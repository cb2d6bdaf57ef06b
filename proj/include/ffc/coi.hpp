#pragma once

#include <vector>

#include "ffc/grid.hpp"
#include "ffc/linalg.hpp"

namespace ffc {

// Aggregate frequency model parameters. Quantities are per unit on the fleet
// rating; power_base is that rating expressed in system p.u., so a system-p.u.
// power enters the model divided by power_base.
struct CoiParams {
    double M = 0.0;    // aggregate inertia, p.u. s
    double D = 0.0;    // aggregate damping
    double R_g = 0.0;  // average inverse governor droop
    double F_g = 0.0;  // high-pressure turbine fraction
    double T = 0.0;    // governor time constant, s
    double f_b = 50.0;
    double f_0 = 50.0;
    double power_base = 1.0;

    double omega_n() const;
    double zeta() const;
    void validate() const;  // throws std::invalid_argument
};

struct LinearSS {
    Mat A, B, C, D;
    bool has_discrete = false;
    Mat Ad, Bd, Cd, Dd;
    double Ts = 0.0;

    int nx() const { return static_cast<int>(A.rows()); }
    int nu() const { return static_cast<int>(B.cols()); }
    int ny() const { return static_cast<int>(C.rows()); }
};

// Rating-weighted averages over the fleet. Converters contribute a virtual
// machine with inertia 1/(Rp*omega_f) and damping 1/Rp (device base).
CoiParams coi_from_fleet(const std::vector<SyncGenParams>& sgs, const std::vector<VscUnitParams>& vscs,
                         double S_base, double f_b = 50.0);

LinearSS coi_state_space(const CoiParams& p);
LinearSS discretize_zoh(const LinearSS& ss, double Ts);

// Disturbance magnitude (positive = generation deficit) from the initial
// frequency slope in p.u./s.
double estimate_disturbance(double rocof_max_pu, double M);

struct FrequencyPrediction {
    std::vector<double> f;     // Hz, k = 1..N
    std::vector<double> rocof; // Hz/s, k = 1..N
};

// x(k+1) = Ad x(k) + Bd (u(k) - dP); f = f_b * Cd x + f_0.
// dP and u are in system p.u. and are rescaled by params.power_base.
FrequencyPrediction predict_frequency(const LinearSS& ss, const CoiParams& params, const Vec& x0, double dP,
                                      const std::vector<double>& u_seq, int N);

// Linear RoCoF extrapolation. Literal mode returns r_f*T_s + f_b*dp(j)/(2H)*T_s
// for every j; cumulative mode sums those increments.
std::vector<double> rocof_baseline_predict(double rocof_now, double H, const std::vector<double>& dp_seq,
                                           double Ts, int N, bool cumulative = false, double f_b = 50.0);

}  // namespace ffc
