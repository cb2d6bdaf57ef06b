#pragma once

#include <deque>
#include <string>
#include <vector>

#include "ffc/coi.hpp"
#include "ffc/grid.hpp"
#include "ffc/lp.hpp"
#include "ffc/mplp.hpp"
#include "ffc/reduced.hpp"

namespace ffc {

struct MpcConfig {
    int N = 3;
    double Ts = 0.25;
    double f_lo = 49.5, f_hi = 50.5;  // Hz
    double r_lo = -1.0, r_hi = 1.0;   // Hz/s
    double cp_base = 1.0;
    double cp_growth = 1.5;  // C_P(j) = cp_base * cp_growth^j
    double C_H = 1e5;
    double C_B = 1.0;  // branch-flow slack penalty, on the scale of the move cost
    double deadband = 0.1;       // Hz/s, trigger
    double trigger_window = 0.01;  // s
    double deact_window = 0.5;   // s
    double deact_margin = 0.1;   // Hz/s
    double cen_threshold = 0.5;  // p.u. on |p_l|_inf
    bool literal_droop = false;  // (w* - w) * Rp instead of (w* - w) / Rp
    bool flow_limits = true;
    // Decentralized prediction model: "coi" (aggregate model) or
    // "rocof-baseline" (onset slope extrapolated, shifted by the cumulative action).
    std::string predictor = "coi";

    double cost(int j) const;
    void validate() const;  // throws std::invalid_argument
};

// Decentralized problem parameters, in this order:
// CoI state (2), SoC, current power setpoint p* + k_p * accumulated, estimated
// disturbance minus accumulated action, previous predicted frequency (Hz).
constexpr int kDecParams = 6;
struct DecParams {
    Vec x = Vec::Zero(2);
    double soc = 0.5;
    double p_set = 0.0;
    double dP_net = 0.0;
    double f_prev = 50.0;

    Vec vector() const;
};

// Decision layout: d+(0..N), d-(0..N), eta_f, eta_r. Returns the parametric
// instance (b_ub + S l); call .at(l) for a concrete LP.
LpStandard build_decentralized(const LinearSS& coi_d, const CoiParams& coi, const VscUnitParams& vsc,
                               const MpcConfig& cfg, double S_base);
LpStandard build_decentralized(const LinearSS& coi_d, const CoiParams& coi, const VscUnitParams& vsc,
                               const MpcConfig& cfg, double S_base, const DecParams& params);
// Row vector selecting the first move d+(0) - d-(0).
Mat dec_first_move_map(const MpcConfig& cfg);
// Parameter box for the explicit law around the case's operating range.
void dec_param_box(const CoiParams& coi, const VscUnitParams& vsc, Vec& lo, Vec& hi, double max_dP = 20.0);

struct CenInputs {
    Vec x;       // multi-machine state
    Vec u_prev;  // accumulated converter setpoint changes
    Vec p_l;     // per-bus injection changes
    Vec f_prev;  // Hz, per unit
    Vec soc;     // per converter
};

// Decision layout: per converter i and step j, d+ at i*(N+1)+j, d- after all d+,
// then eta_f, eta_r and (when flow limits are on) eta_b.
LpStandard build_centralized(const MultiMachineSS& mm, const GridCase& grid, const MpcConfig& cfg,
                             const CenInputs& in);

struct ControllerEvent {
    double t = 0.0;
    std::string unit;  // "vsc1".., or "central"
    std::string kind;  // trigger, activate, solve, deactivate, alarm, fallback
    std::string detail;
};

enum class Mode { Idle, Active };

// Triggering on a window of internal RoCoF samples (Hz/s).
bool trigger_decentralized(const std::vector<double>& window, double deadband);
bool deactivate_decentralized(const std::vector<double>& window, double margin);

struct CenTrigger {
    bool active = false;
    Vec p_l;
};
CenTrigger trigger_centralized(const Vec& measured, const Vec& scheduled, double threshold);

class DecentralizedController {
public:
    DecentralizedController(int index, const VscUnitParams& vsc, const CoiParams& coi, const MpcConfig& cfg,
                            double S_base, double plant_dt, const PwaLaw* law = nullptr);

    // One plant sample. Returns the change of this converter's setpoint (p.u.).
    double step(int k, double t, double rocof_internal, double f_meas, double soc,
                std::vector<ControllerEvent>& events);

    Mode mode() const { return mode_; }
    double accumulated() const { return U_; }      // sum of common first moves
    double applied_total() const { return applied_; }  // sum of k_p-weighted moves
    double estimate() const { return est_; }             // accumulated over re-activations
    double first_estimate() const { return first_est_; } // from the first activation
    bool has_estimate() const { return has_est_; }
    int solves() const { return solves_; }
    int explicit_hits() const { return explicit_hits_; }
    const LpStandard& last_lp() const { return last_lp_; }

private:
    int index_;
    VscUnitParams vsc_;
    CoiParams coi_;
    MpcConfig cfg_;
    LinearSS ss_;
    LpStandard param_lp_;
    const PwaLaw* law_;
    int law_hint_ = 0;
    double S_base_, dt_;
    int n_trig_, n_deact_, n_step_;
    std::deque<double> buf_;
    std::vector<double> since_;  // samples since the crossing
    Mode mode_ = Mode::Idle;
    bool crossing_ = false;
    bool has_est_ = false;
    double est_ = 0.0, first_est_ = 0.0, U_ = 0.0, applied_ = 0.0, f_prev_ = 50.0;
    Vec x_ = Vec::Zero(2);
    int next_k_ = 0, act_k_ = 0;
    int solves_ = 0, explicit_hits_ = 0;
    LpStandard last_lp_;
};

class CentralizedController {
public:
    CentralizedController(const MultiMachineSS& mm_Ts, const GridCase& grid, const MpcConfig& cfg, double plant_dt);

    // Returns the per-converter setpoint changes to add this sample.
    // rocof_avg: per-unit RoCoF (Hz/s) averaged over the deactivation window.
    Vec step(int k, double t, const Vec& x, const Vec& p_l, const Vec& f_meas, const Vec& soc, const Vec& rocof_avg,
             std::vector<ControllerEvent>& events);

    Mode mode() const { return mode_; }
    const Vec& accumulated() const { return uc_; }
    int solves() const { return solves_; }

private:
    const MultiMachineSS& mm_;
    const GridCase& grid_;
    MpcConfig cfg_;
    double dt_;
    int n_step_, n_deact_;
    Mode mode_ = Mode::Idle;
    Vec uc_, f_prev_, handled_pl_;
    int next_k_ = 0, act_k_ = 0, solves_ = 0;
};

}  // namespace ffc
