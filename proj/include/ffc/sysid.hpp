#pragma once

// Grey-box identification of the aggregate frequency model from step-test
// telemetry with a prediction-error criterion and a parametrized Kalman gain.

#include <cstdint>
#include <string>
#include <vector>

#include "ffc/linalg.hpp"

namespace ffc {

struct IdDataset {
    double Ts = 0.02;            // sample period, s
    double f_b = 50.0;           // output scaling, Hz per p.u.
    std::vector<double> df;      // frequency deviation, Hz
    std::vector<double> dp;      // input power, p.u. on the model base
    Vec x0 = Vec::Zero(2);

    void validate() const;  // throws std::invalid_argument
};

// Transfer function f_b * (h s + g) / (s^2 + 2 zeta wn s + wn^2); g = 1/(M T),
// h = 1/M. K is the predictor gain on the discretized model.
struct IdParams {
    double wn = 1.0;
    double zeta = 0.5;
    double g = 1.0;
    double h = 1.0;
    Vec K = Vec::Zero(2);

    double gain() const { return g; }
    double dc_gain() const { return g / (wn * wn); }
};

struct IdBounds {
    double wn_lo = 1e-3, wn_hi = 1e2;
    double zeta_lo = 1e-3, zeta_hi = 1e1;
    double g_lo = 1e-6, g_hi = 1e4;
    double h_lo = 1e-6, h_hi = 1e4;
    double K_abs = 1e3;
};

struct DiscreteModel {
    Mat Ad, Bd, C;  // C includes the f_b scaling
};

DiscreteModel id_model(const IdParams& p, double Ts, double f_b);

struct PredictorStep {
    Vec x_next;
    double df_hat = 0.0;
};

PredictorStep predictor_step(const DiscreteModel& m, const Vec& K, const Vec& x, double dp, double df);

// One-step-ahead predictions over the whole dataset.
std::vector<double> predict_series(const IdParams& p, const IdDataset& d);

struct FitOptions {
    int max_iter = 200;
    int burn_in = 5;
    bool fit_gain = true;  // false keeps K at zero (output-error fit)
    double tol = 1e-10;
};

struct FitReport {
    IdParams params;
    double cost = 0.0;
    double rmse_pct = 0.0;  // RMSE as percent of peak |df|
    int iterations = 0;
    bool converged = false;
    bool stable = false;
    double predictor_radius = 0.0;
    std::vector<double> cost_history;  // initial cost, then one entry per accepted step
    std::string message;
};

FitReport pem_fit(const IdDataset& d, const IdParams& init, const IdBounds& bounds = {}, const FitOptions& opt = {});

// RMSE of the open-loop (K = 0) simulation against the data, percent of peak.
double simulation_rmse_pct(const IdParams& p, const IdDataset& d);

// Synthetic data from the model with additive Gaussian noise, sigma given as
// a fraction of the noise-free peak |df|.
IdDataset simulate_dataset(const IdParams& p, const std::vector<double>& dp, double Ts, double noise_frac,
                           std::uint64_t seed, double f_b = 50.0);

// Resamples a recorded trajectory at Ts from slightly before the event and
// removes the pre-event mean. Throws if the event is outside the record or
// no pre-event samples exist.
IdDataset make_dataset(const std::vector<double>& t, const std::vector<double>& f, const std::vector<double>& dp,
                       double t_event, double Ts, double f_b = 50.0);

void write_dataset_csv(const IdDataset& d, const std::string& path);
IdDataset read_dataset_csv(const std::string& path, double f_b = 50.0);

}  // namespace ffc
