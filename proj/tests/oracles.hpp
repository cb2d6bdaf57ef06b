#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance run.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/LU>

#include "ffc/grid.hpp"
#include "ffc/lp.hpp"

namespace ffc::oracle {

using Poly = std::vector<double>;  // ascending coefficients

inline Poly mul(const Poly& a, const Poly& b) {
    Poly c(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

inline Poly add(Poly a, const Poly& b) {
    if (b.size() > a.size()) a.resize(b.size(), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    return a;
}

inline Poly scale(Poly a, double k) {
    for (double& v : a) v *= k;
    return a;
}

// Durand-Kerner root finder for a polynomial with ascending coefficients.
inline std::vector<std::complex<double>> roots(const Poly& p) {
    const int n = static_cast<int>(p.size()) - 1;
    std::vector<std::complex<double>> z(n);
    const double lead = p.back();
    const double radius = 1.0 + [&] {
        double m = 0.0;
        for (int i = 0; i < n; ++i) m = std::max(m, std::abs(p[i] / lead));
        return m;
    }();
    for (int i = 0; i < n; ++i) z[i] = std::polar(radius, 0.4 + 2.0 * M_PI * i / n);
    auto eval = [&](std::complex<double> s) {
        std::complex<double> v = 0.0;
        for (int i = n; i >= 0; --i) v = v * s + p[i];
        return v;
    };
    for (int it = 0; it < 5000; ++it) {
        double change = 0.0;
        for (int i = 0; i < n; ++i) {
            std::complex<double> den = lead;
            for (int j = 0; j < n; ++j)
                if (j != i) den *= (z[i] - z[j]);
            const auto dz = eval(z[i]) / den;
            z[i] -= dz;
            change = std::max(change, std::abs(dz));
        }
        if (change < 1e-15) break;
    }
    // Newton polish on the original polynomial.
    for (auto& r : z)
        for (int k = 0; k < 3; ++k) {
            std::complex<double> v = 0.0, d = 0.0;
            for (int i = n; i >= 0; --i) {
                d = d * r + v;
                v = v * r + p[i];
            }
            if (std::abs(d) > 0.0) r -= v / d;
        }
    return z;
}

inline Branch br(int a, int b, double x) {
    Branch k;
    k.from = a;
    k.to = b;
    k.x = x;
    k.rate = 10;
    k.rate_mw = 1000;
    return k;
}

// One converter at bus 1, one synchronous machine at bus 2.
inline GridCase two_bus() {
    GridCase g;
    g.name = "two-bus";
    g.network = build_laplacian(2, {br(0, 1, 0.05)});
    g.p_sched = Vec::Zero(2);
    g.reference_bus = 1;
    SyncGenParams s;
    s.bus = 1;
    s.M_s = 60;
    s.D_s = 8;
    s.K_g = 40;
    s.T_g = 6;
    s.x_int = 0.04;
    s.rating = 500;
    s.H = 6;
    s.D = 1.6;
    s.Kg = 8;
    g.sgs.push_back(s);
    VscUnitParams v;
    v.bus = 0;
    v.Rp = 0.02;
    v.Rp_dev = 0.04;
    v.omega_f = 5.0;
    v.x_int = 0.03;
    v.P_bar = 500;
    v.E_b = 10;
    v.p_lim_lo = -5;
    v.p_lim_hi = 5;
    v.k_p = 1.0;
    g.vscs.push_back(v);
    return g;
}

inline std::vector<std::complex<double>> sorted(std::vector<std::complex<double>> v) {
    std::sort(v.begin(), v.end(), [](auto a, auto b) {
        return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    return v;
}

// Characteristic polynomial of two_bus(), expanded by hand. Eliminating the
// angle difference gives
//   s * [ s (s + wf) Q + wb b (wf Rp Q + (T s + 1)(s + wf)) ],
//   Q = (M s + D)(T s + 1) + K.
inline Poly two_bus_charpoly(const GridCase& g) {
    const auto& v = g.vscs[0];
    const auto& s = g.sgs[0];
    const double wb = 2 * M_PI * g.f_b;
    const double b = 1.0 / (v.x_int + g.network.branches[0].x + s.x_int);
    const Poly Q = add(mul({s.D_s, s.M_s}, {1.0, s.T_g}), {s.K_g});
    const Poly left = mul(mul({0.0, 1.0}, {v.omega_f, 1.0}), Q);
    const Poly right = scale(add(scale(Q, v.omega_f * v.Rp), mul({1.0, s.T_g}, {v.omega_f, 1.0})), wb * b);
    return mul({0.0, 1.0}, add(left, right));
}

// ZOH pair by a truncated power series of the augmented exponential with
// scaling and squaring: Ad = e^{A T}, Bd = sum_k A^k T^{k+1} / (k+1)! B.
inline std::pair<Mat, Mat> zoh_series(const Mat& A, const Mat& B, double T) {
    const int n = static_cast<int>(A.rows());
    const double norm = (A * T).cwiseAbs().rowwise().sum().maxCoeff();
    int sq = 0;
    while (norm / std::ldexp(1.0, sq) > 0.1) ++sq;
    const double h = T / std::ldexp(1.0, sq);
    Mat Ad = Mat::Identity(n, n), S = Mat::Identity(n, n) * h;
    Mat term = Mat::Identity(n, n);
    for (int k = 1; k < 30; ++k) {
        term = term * A * (h / k);
        Ad += term;
        S += term * (h / (k + 1));
    }
    Mat Bd = S * B;
    for (int i = 0; i < sq; ++i) {
        Bd = Bd + Ad * Bd;
        Ad = Ad * Ad;
    }
    return {Ad, Bd};
}

struct Oracle {
    bool feasible = false;
    double best = kInf;
};

// Brute force over basic solutions of {A z <= b, z >= 0}: every choice of n
// tight rows among the m + n rows of [A; -I].
inline Oracle enumerate_vertices(const Vec& c, const Mat& A, const Vec& b) {
    const int n = static_cast<int>(c.size()), m = static_cast<int>(A.rows());
    Mat G(m + n, n);
    Vec g(m + n);
    G << A, -Mat::Identity(n, n);
    g << b, Vec::Zero(n);
    Oracle o;
    std::vector<int> pick(n);
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == n) {
            Mat Gs(n, n);
            Vec gs(n);
            for (int k = 0; k < n; ++k) {
                Gs.row(k) = G.row(pick[k]);
                gs(k) = g(pick[k]);
            }
            Eigen::FullPivLU<Mat> lu(Gs);
            if (lu.rank() < n) return;
            const Vec z = lu.solve(gs);
            if (((G * z - g).array() > 1e-9).any()) return;
            o.feasible = true;
            o.best = std::min(o.best, c.dot(z));
            return;
        }
        for (int r = start; r < m + n; ++r) {
            pick[depth] = r;
            rec(r + 1, depth + 1);
        }
    };
    rec(0, 0);
    return o;
}

}  // namespace ffc::oracle
