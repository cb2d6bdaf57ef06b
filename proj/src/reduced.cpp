#include "ffc/reduced.hpp"

#include <cmath>
#include <stdexcept>

namespace ffc {

int MultiMachineSS::state_index(int unit, const std::string& name) const {
    if (unit < 0 || unit >= n_units()) throw std::out_of_range("state_index: bad unit");
    if (unit < n_c) {
        if (name == "theta") return 2 * unit;
        if (name == "p_filt") return 2 * unit + 1;
    } else {
        const int base = 2 * n_c + 3 * (unit - n_c);
        if (name == "theta") return base;
        if (name == "omega") return base + 1;
        if (name == "p_gov") return base + 2;
    }
    throw std::out_of_range("state_index: unknown state '" + name + "'");
}

int MultiMachineSS::output_index(const std::string& signal, int k) const {
    if (signal == "fc" && k >= 0 && k < n_c) return k;
    if (signal == "fs" && k >= 0 && k < n_g) return n_c + k;
    if (signal == "pb" && k >= 0 && k < n_b) return n_c + n_g + k;
    throw std::out_of_range("output_index: bad signal or index");
}

Vec MultiMachineSS::unit_powers(const Vec& x, const Vec& p_l) const {
    Vec th(n_units());
    for (int u = 0; u < n_units(); ++u) th(u) = x(angle_index[u]);
    return Lred * th + Sp * p_l;
}

Vec MultiMachineSS::bus_angles(const Vec& x, const Vec& p_l) const {
    Vec th(n_units());
    for (int u = 0; u < n_units(); ++u) th(u) = x(angle_index[u]);
    return Tbus * th + Tp * p_l;
}

MultiMachineSS assemble(const GridCase& grid) {
    const auto& net = grid.network;
    const int nc = static_cast<int>(grid.vscs.size());
    const int ng = static_cast<int>(grid.sgs.size());
    const int nu = nc + ng;
    const int nn = net.n_n;
    const int nb = net.n_b();
    const double wb = 2.0 * M_PI * grid.f_b;
    const double fb = grid.f_b;

    MultiMachineSS m;
    m.n_c = nc;
    m.n_g = ng;
    m.n_n = nn;
    m.n_b = nb;
    m.f_b = fb;

    // Augmented Laplacian: buses 0..nn-1, then one internal node per unit behind x_int.
    Mat L = Mat::Zero(nn + nu, nn + nu);
    L.topLeftCorner(nn, nn) = net.L;
    for (int u = 0; u < nu; ++u) {
        const int bus = u < nc ? grid.vscs[u].bus : grid.sgs[u - nc].bus;
        const double x = u < nc ? grid.vscs[u].x_int : grid.sgs[u - nc].x_int;
        if (bus < 0 || bus >= nn) throw CaseError("assemble: unit " + std::to_string(u + 1) + " on nonexistent bus");
        const double y = 1.0 / x;
        const int a = nn + u;
        L(a, a) += y;
        L(bus, bus) += y;
        L(a, bus) -= y;
        L(bus, a) -= y;
        m.unit_bus.push_back(bus);
    }
    const Mat Lgg = L.block(nn, nn, nu, nu);
    const Mat Lgr = L.block(nn, 0, nu, nn);
    const Mat Lrg = L.block(0, nn, nn, nu);
    const Mat Lrr = L.topLeftCorner(nn, nn);
    Eigen::FullPivLU<Mat> lu(Lrr);
    if (!lu.isInvertible()) throw CaseError("assemble: reduced Laplacian is singular");
    const Mat Lrr_inv = lu.inverse();
    m.Lred = Lgg - Lgr * Lrr_inv * Lrg;
    m.Sp = Lgr * Lrr_inv;
    m.Tbus = -Lrr_inv * Lrg;
    m.Tp = Lrr_inv;

    const int nx = 2 * nc + 3 * ng;
    const int ni = nc + nn;
    Mat A = Mat::Zero(nx, nx), B = Mat::Zero(nx, ni);
    for (int i = 0; i < nc; ++i) m.angle_index.push_back(2 * i);
    for (int j = 0; j < ng; ++j) m.angle_index.push_back(2 * nc + 3 * j);

    for (int i = 0; i < nc; ++i) {
        const auto& v = grid.vscs[i];
        const int r = 2 * i;
        A(r, r + 1) = -wb * v.Rp;
        B(r, i) = wb * v.Rp;
        A(r + 1, r + 1) = -v.omega_f;
        for (int u = 0; u < nu; ++u) A(r + 1, m.angle_index[u]) += v.omega_f * m.Lred(i, u);
        for (int b = 0; b < nn; ++b) B(r + 1, nc + b) = v.omega_f * m.Sp(i, b);
    }
    for (int j = 0; j < ng; ++j) {
        const auto& s = grid.sgs[j];
        const int r = 2 * nc + 3 * j;
        const int u = nc + j;
        A(r, r + 1) = wb;
        A(r + 1, r + 1) = -s.D_s / s.M_s;
        A(r + 1, r + 2) = 1.0 / s.M_s;
        for (int w = 0; w < nu; ++w) A(r + 1, m.angle_index[w]) -= m.Lred(u, w) / s.M_s;
        for (int b = 0; b < nn; ++b) B(r + 1, nc + b) = -m.Sp(u, b) / s.M_s;
        A(r + 2, r + 1) = -s.K_g / s.T_g;
        A(r + 2, r + 2) = -1.0 / s.T_g;
    }

    const int ny = nc + ng + nb;
    Mat C = Mat::Zero(ny, nx), D = Mat::Zero(ny, ni);
    for (int i = 0; i < nc; ++i) {
        C(i, 2 * i + 1) = -fb * grid.vscs[i].Rp;
        D(i, i) = fb * grid.vscs[i].Rp;
    }
    for (int j = 0; j < ng; ++j) C(nc + j, 2 * nc + 3 * j + 1) = fb;
    Mat Th = Mat::Zero(nn, nx);
    for (int u = 0; u < nu; ++u) Th.col(m.angle_index[u]) = m.Tbus.col(u);
    C.bottomRows(nb) = net.Xb * net.G * Th;
    D.bottomRightCorner(nb, nn) = net.Xb * net.G * m.Tp;

    m.ss.A = A;
    m.ss.B = B;
    m.ss.C = C;
    m.ss.D = D;
    m.f0 = Vec::Constant(nu, fb);
    m.pb0 = base_flows(grid);
    for (const auto& v : grid.vscs) m.coi_weights.push_back(1.0 / (v.Rp * v.omega_f));
    for (const auto& s : grid.sgs) m.coi_weights.push_back(s.M_s);
    return m;
}

DiscreteTrajectory simulate_discrete(const MultiMachineSS& m, const Vec& x0, const std::vector<Vec>& u_seq, int N) {
    if (!m.ss.has_discrete) throw std::invalid_argument("simulate_discrete: model not discretized");
    if (x0.size() != m.nx()) throw std::invalid_argument("simulate_discrete: x0 dimension mismatch");
    if (static_cast<int>(u_seq.size()) < N) throw std::invalid_argument("simulate_discrete: u_seq shorter than N");
    DiscreteTrajectory tr;
    Vec x = x0;
    const int nu = m.n_units();
    tr.x.push_back(x);
    for (int k = 0; k < N; ++k) {
        if (u_seq[k].size() != m.ss.nu()) throw std::invalid_argument("simulate_discrete: input dimension mismatch");
        Vec y = m.ss.Cd * x + m.ss.Dd * u_seq[k];
        y.head(nu) += m.f0;
        y.tail(m.n_b) += m.pb0;
        tr.y.push_back(y);
        x = m.ss.Ad * x + m.ss.Bd * u_seq[k];
        tr.x.push_back(x);
    }
    return tr;
}

std::vector<double> coi_of(const MultiMachineSS& m, const std::vector<Vec>& freqs) {
    double wsum = 0.0;
    for (double w : m.coi_weights) wsum += w;
    std::vector<double> out;
    out.reserve(freqs.size());
    for (const auto& f : freqs) {
        if (f.size() != m.n_units()) throw std::invalid_argument("coi_of: expected one frequency per unit");
        double acc = 0.0;
        for (int u = 0; u < m.n_units(); ++u) acc += m.coi_weights[u] * f(u);
        out.push_back(acc / wsum);
    }
    return out;
}

CoiParams coi_for_case(const GridCase& grid) { return coi_from_fleet(grid.sgs, grid.vscs, grid.S_base, grid.f_b); }

}  // namespace ffc
