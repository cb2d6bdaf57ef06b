#pragma once

#include <string>
#include <vector>

#include "ffc/coi.hpp"
#include "ffc/grid.hpp"

namespace ffc {

// Linear multi-machine model. State layout: for each converter (theta, p_filt),
// then for each SG (theta, omega, p_gov). Inputs: converter setpoint changes,
// then per-bus load injection changes p_l (negative = extra load). Outputs:
// converter frequency deviations (Hz), SG frequency deviations (Hz), branch flow
// deviations (p.u.). Absolute outputs add f0 / pb0.
struct MultiMachineSS {
    LinearSS ss;
    int n_c = 0, n_g = 0, n_n = 0, n_b = 0;
    std::vector<int> angle_index;  // per unit (converters first)
    std::vector<int> unit_bus;     // terminal bus per unit
    Vec f0;                        // Hz, per unit
    Vec pb0;                       // p.u., per branch
    Mat Lred;                      // unit power = Lred * unit angles + Sp * p_l
    Mat Sp;
    Mat Tbus;                      // bus angles = Tbus * unit angles + Tp * p_l
    Mat Tp;
    std::vector<double> coi_weights;  // per unit: SG M_s, converter 1/(Rp*omega_f)
    double f_b = 50.0;

    int n_units() const { return n_c + n_g; }
    int nx() const { return ss.nx(); }
    int state_index(int unit, const std::string& name) const;
    int output_index(const std::string& signal, int k) const;  // "fc", "fs", "pb"
    Vec unit_powers(const Vec& x, const Vec& p_l) const;
    Vec bus_angles(const Vec& x, const Vec& p_l) const;
};

MultiMachineSS assemble(const GridCase& grid);

struct DiscreteTrajectory {
    std::vector<Vec> x;  // k = 0..N
    std::vector<Vec> y;  // absolute outputs (Hz / p.u.), k = 0..N-1
};

// Requires ss.has_discrete; y(k) = Cd x(k) + Dd u(k) + (f0, pb0).
DiscreteTrajectory simulate_discrete(const MultiMachineSS& m, const Vec& x0, const std::vector<Vec>& u_seq, int N);

// Inertia-weighted average of unit frequencies; `freqs` holds one row per sample.
std::vector<double> coi_of(const MultiMachineSS& m, const std::vector<Vec>& freqs);

// CoI parameters matched to the assembled model's fleet.
CoiParams coi_for_case(const GridCase& grid);

}  // namespace ffc
