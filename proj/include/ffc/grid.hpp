#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ffc/linalg.hpp"
#include "ffc/textio.hpp"
#include "ffc/vsc_params.hpp"

namespace ffc {

struct CaseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Branch {
    int from = 0;  // 0-based bus index
    int to = 0;
    double x = 0.0;     // series reactance, p.u.
    double rate = 0.0;  // flow limit, p.u. (system base)
    double rate_mw = 0.0;
};

struct NetworkGraph {
    int n_n = 0;
    std::vector<Branch> branches;
    Mat G;   // n_b x n_n incidence
    Mat Xb;  // n_b x n_b diagonal susceptances
    Mat L;   // n_n x n_n Laplacian
    int n_b() const { return static_cast<int>(branches.size()); }
};

// Throws CaseError on non-positive reactance, bad bus index or a disconnected graph.
NetworkGraph build_laplacian(int n_n, const std::vector<Branch>& branches);
Vec line_flows(const NetworkGraph& net, const Vec& theta);

struct SyncGenParams {
    int bus = 0;
    // system base
    double M_s = 0.0, D_s = 0.0, T_g = 0.0, K_g = 0.0, p_m_star = 0.0, x_int = 0.0;
    // as written in the case file (machine base)
    double rating = 0.0;  // MVA
    double H = 0.0, D = 0.0, Kg = 0.0, x_int_dev = 0.0, p_m_mw = 0.0;
};

struct VscUnitParams {
    int bus = 0;
    // system base
    double Rp = 0.0, Rq = 0.0, omega_f = 0.0;
    double p_c_star = 0.0, q_c_star = 0.0, omega_c_star = 1.0, V_c_star = 1.0;
    double P_bar = 0.0;  // MW
    double E_b = 0.0;    // MWh
    double soc_lo = 0.0, soc_hi = 1.0, soc0 = 0.5;
    double p_lim_lo = 0.0, p_lim_hi = 0.0;
    double k_p = 1.0;
    double x_int = 0.0;
    // as written in the case file (device base / MW)
    double Rp_dev = 0.0, Rq_dev = 0.0, p_set_mw = 0.0, q_set_mvar = 0.0;
    double p_min_mw = 0.0, p_max_mw = 0.0, x_int_dev = 0.0;

    // Battery energy in system p.u. seconds.
    double energy_pus(double s_base) const { return E_b * 3600.0 / s_base; }
};

struct GridCase {
    std::string name;
    double f_b = 50.0;
    double S_base = 100.0;
    NetworkGraph network;
    std::vector<SyncGenParams> sgs;
    std::vector<VscUnitParams> vscs;
    Vec p_sched;  // scheduled net injection per bus, p.u.
    std::vector<double> p_sched_mw;
    int reference_bus = 0;
    VscDeviceParams device;

    int n_units() const { return static_cast<int>(sgs.size() + vscs.size()); }
};

// Pre-disturbance bus angles from the scheduled injections, reference bus at zero.
Vec base_angles(const GridCase& grid);
Vec base_flows(const GridCase& grid);

GridCase case_from_document(const text::Document& doc);
text::Document case_to_document(const GridCase& grid);
GridCase load_case(const std::string& path);
void save_case(const GridCase& grid, const std::string& path);
std::string bundled_case_path();

// Throws CaseError naming the violated invariant.
void validate(const GridCase& grid);

}  // namespace ffc
