#include "ffc/coi.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace ffc {

double CoiParams::omega_n() const { return std::sqrt((D + R_g) / (M * T)); }

double CoiParams::zeta() const { return (M + T * (D + F_g)) / (2.0 * std::sqrt(M * T * (D + R_g))); }

void CoiParams::validate() const {
    if (!(M > 0.0) || !(T > 0.0)) throw std::invalid_argument("CoI: M and T must be positive");
    if (D < 0.0 || R_g < 0.0 || F_g < 0.0) throw std::invalid_argument("CoI: D, R_g, F_g must be non-negative");
    if (!(D + R_g > 0.0)) throw std::invalid_argument("CoI: D + R_g must be positive");
    if (!(power_base > 0.0)) throw std::invalid_argument("CoI: power base must be positive");
}

CoiParams coi_from_fleet(const std::vector<SyncGenParams>& sgs, const std::vector<VscUnitParams>& vscs,
                         double S_base, double f_b) {
    if (sgs.empty()) throw std::invalid_argument("coi_from_fleet: no online synchronous generator");
    double total = 0.0;
    for (const auto& s : sgs) total += s.rating;
    for (const auto& v : vscs) total += v.P_bar;

    CoiParams p;
    p.f_b = f_b;
    p.f_0 = f_b;
    double sg_total = 0.0;
    for (const auto& s : sgs) {
        const double w = s.rating / total;
        p.M += w * 2.0 * s.H;
        p.D += w * s.D;
        p.R_g += w * s.Kg;
        sg_total += s.rating;
    }
    for (const auto& s : sgs) p.T += (s.rating / sg_total) * s.T_g;
    for (const auto& v : vscs) {
        const double w = v.P_bar / total;
        p.M += w / (v.Rp_dev * v.omega_f);
        p.D += w / v.Rp_dev;
    }
    p.F_g = 0.0;
    p.power_base = total / S_base;
    p.validate();
    return p;
}

LinearSS coi_state_space(const CoiParams& p) {
    p.validate();
    const double wn = p.omega_n(), z = p.zeta();
    LinearSS ss;
    ss.A = Mat(2, 2);
    ss.A << 0.0, 1.0, -wn * wn, -2.0 * z * wn;
    ss.B = Mat(2, 1);
    ss.B << 0.0, 1.0;
    ss.C = Mat(1, 2);
    ss.C << 1.0 / (p.M * p.T), 1.0 / p.M;
    ss.D = Mat::Zero(1, 1);
    return ss;
}

LinearSS discretize_zoh(const LinearSS& ss, double Ts) {
    if (!(Ts > 0.0)) throw std::invalid_argument("discretize_zoh: T_s must be positive");
    LinearSS out = ss;
    ZohPair z = zoh(ss.A, ss.B, Ts);
    out.Ad = z.Ad;
    out.Bd = z.Bd;
    out.Cd = ss.C;
    out.Dd = ss.D;
    out.Ts = Ts;
    out.has_discrete = true;
    return out;
}

double estimate_disturbance(double rocof_max_pu, double M) {
    if (!(M > 0.0)) throw std::invalid_argument("estimate_disturbance: M must be positive");
    return -M * rocof_max_pu;
}

FrequencyPrediction predict_frequency(const LinearSS& ss, const CoiParams& params, const Vec& x0, double dP,
                                      const std::vector<double>& u_seq, int N) {
    if (!ss.has_discrete) throw std::invalid_argument("predict_frequency: model has no discrete pair");
    if (static_cast<int>(u_seq.size()) < N) throw std::invalid_argument("predict_frequency: u_seq shorter than N");
    FrequencyPrediction out;
    Vec x = x0;
    double f_prev = params.f_b * (ss.Cd * x)(0) + params.f_0;
    for (int k = 0; k < N; ++k) {
        const double u = (u_seq[k] - dP) / params.power_base;
        x = ss.Ad * x + ss.Bd.col(0) * u;
        const double f = params.f_b * (ss.Cd * x)(0) + params.f_0;
        out.f.push_back(f);
        out.rocof.push_back((f - f_prev) / ss.Ts);
        f_prev = f;
    }
    return out;
}

std::vector<double> rocof_baseline_predict(double rocof_now, double H, const std::vector<double>& dp_seq,
                                           double Ts, int N, bool cumulative, double f_b) {
    if (!(H > 0.0)) throw std::invalid_argument("rocof_baseline_predict: H must be positive");
    std::vector<double> out;
    double acc = 0.0;
    for (int j = 0; j < N; ++j) {
        const double dp = j < static_cast<int>(dp_seq.size()) ? dp_seq[j] : 0.0;
        const double step = rocof_now * Ts + f_b * dp / (2.0 * H) * Ts;
        acc += step;
        out.push_back(cumulative ? acc : step);
    }
    return out;
}

}  // namespace ffc
