#include "ffc/lp.hpp"

#include <cmath>
#include <stdexcept>

namespace ffc {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

bool all_finite(const Mat& m) { return m.size() == 0 || m.allFinite(); }

// Internal form: min c'x, rows (ineq first, then eq), x >= 0.
struct VarMap {
    int plus = -1, minus = -1;
    double offset = 0.0;
    double sign = 1.0;
};

class Tableau {
public:
    Tableau(const Mat& A, const Vec& b, std::vector<int>& basis, const LpOptions& opt)
        : opt_(opt), m_(static_cast<int>(A.rows())), n_(static_cast<int>(A.cols())), basis_(basis) {
        T_ = RowMat::Zero(m_ + 1, n_ + 1);
        T_.topLeftCorner(m_, n_) = A;
        T_.col(n_).head(m_) = b;
    }

    double& rhs(int i) { return T_(i, n_); }
    RowMat& T() { return T_; }

    void set_cost(const Vec& cost) {
        T_.row(m_).setZero();
        for (int j = 0; j < n_; ++j) T_(m_, j) = cost(j);
        for (int i = 0; i < m_; ++i) {
            const double cb = cost(basis_[i]);
            if (cb != 0.0) T_.row(m_) -= cb * T_.row(i);
        }
    }

    void pivot(int r, int col) {
        const double p = T_(r, col);
        T_.row(r) /= p;
        for (int i = 0; i <= m_; ++i) {
            if (i == r) continue;
            const double f = T_(i, col);
            if (f != 0.0) T_.row(i) -= f * T_.row(r);
        }
        T_(r, col) = 1.0;
        basis_[r] = col;
    }

    // Returns Optimal, Unbounded or IterationLimit. `allowed` limits entering columns.
    LpStatus run(int allowed, int& iters) {
        while (true) {
            if (iters >= opt_.max_iter) return LpStatus::IterationLimit;
            int enter = -1;
            for (int j = 0; j < allowed; ++j) {
                if (T_(m_, j) < -opt_.opt_tol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return LpStatus::Optimal;
            int leave = -1;
            double best = 0.0;
            for (int i = 0; i < m_; ++i) {
                const double a = T_(i, enter);
                if (a <= opt_.feas_tol) continue;
                const double ratio = T_(i, n_) / a;
                if (leave < 0 || ratio < best - 1e-12 ||
                    (std::abs(ratio - best) <= 1e-12 && basis_[i] < basis_[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave < 0) return LpStatus::Unbounded;
            pivot(leave, enter);
            ++iters;
        }
    }

    int rows() const { return m_; }

private:
    LpOptions opt_;
    int m_, n_;
    std::vector<int>& basis_;
    RowMat T_;
};

}  // namespace

std::string to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        case LpStatus::IterationLimit: return "iteration_limit";
    }
    return "unknown";
}

void LpStandard::check() const {
    const int n = n_vars();
    if (n == 0) throw std::invalid_argument("lp: no variables");
    if (A_ub.rows() != b_ub.size() || (A_ub.rows() > 0 && A_ub.cols() != n))
        throw std::invalid_argument("lp: inequality block has inconsistent dimensions");
    if (A_eq.rows() != b_eq.size() || (A_eq.rows() > 0 && A_eq.cols() != n))
        throw std::invalid_argument("lp: equality block has inconsistent dimensions");
    if ((lb.size() != 0 && lb.size() != n) || (ub.size() != 0 && ub.size() != n))
        throw std::invalid_argument("lp: bound vectors must have one entry per variable");
    if (S.size() != 0 && S.rows() != A_ub.rows()) throw std::invalid_argument("lp: parameter map rows mismatch");
    if (!all_finite(c) || !all_finite(A_ub) || !all_finite(b_ub) || !all_finite(A_eq) || !all_finite(b_eq) ||
        !all_finite(S))
        throw std::invalid_argument("lp: non-finite data");
    for (int j = 0; j < lb.size(); ++j)
        if (std::isnan(lb(j)) || lb(j) == kInf) throw std::invalid_argument("lp: invalid lower bound");
    for (int j = 0; j < ub.size(); ++j) {
        if (std::isnan(ub(j)) || ub(j) == -kInf) throw std::invalid_argument("lp: invalid upper bound");
        if (lb.size() && ub(j) < lb(j)) throw std::invalid_argument("lp: upper bound below lower bound");
    }
}

LpStandard LpStandard::at(const Vec& l) const {
    if (l.size() != n_params()) throw std::invalid_argument("lp: parameter dimension mismatch");
    LpStandard out = *this;
    if (n_params() > 0) out.b_ub = b_ub + S * l;
    out.S.resize(0, 0);
    return out;
}

LpResult solve_lp(const LpStandard& lp, const LpOptions& opt) {
    lp.check();
    const int n = lp.n_vars();
    const int m_ub = lp.n_ub(), m_eq = lp.n_eq();
    Vec b_orig = lp.b_ub;
    if (lp.n_params() > 0) throw std::invalid_argument("lp: parametric instance, call at(l) first");

    // Variable substitution.
    std::vector<VarMap> vm(n);
    int n_int = 0;
    std::vector<std::pair<int, double>> bound_rows;  // (internal column, upper value)
    for (int j = 0; j < n; ++j) {
        const double lo = lp.lb.size() ? lp.lb(j) : 0.0;
        const double hi = lp.ub.size() ? lp.ub(j) : kInf;
        if (std::isfinite(lo)) {
            vm[j] = {n_int++, -1, lo, 1.0};
            if (std::isfinite(hi)) bound_rows.push_back({vm[j].plus, hi - lo});
        } else if (std::isfinite(hi)) {
            vm[j] = {n_int++, -1, hi, -1.0};
        } else {
            vm[j].plus = n_int++;
            vm[j].minus = n_int++;
        }
    }
    auto expand = [&](const Mat& A, const Vec& b, Mat& Ai, Vec& bi) {
        Ai = Mat::Zero(A.rows(), n_int);
        bi = b;
        for (int j = 0; j < n; ++j) {
            if (A.rows() == 0) break;
            Ai.col(vm[j].plus) += vm[j].sign * A.col(j);
            if (vm[j].minus >= 0) Ai.col(vm[j].minus) -= A.col(j);
            bi -= A.col(j) * vm[j].offset;
        }
    };
    Mat Aub_i, Aeq_i;
    Vec bub_i, beq_i;
    expand(lp.A_ub, lp.b_ub, Aub_i, bub_i);
    expand(lp.A_eq, lp.b_eq, Aeq_i, beq_i);
    const int m_bnd = static_cast<int>(bound_rows.size());
    const int m_in = m_ub + m_bnd;
    const int m = m_in + m_eq;
    const int N = n_int + m_in;  // real columns: internal vars + slacks

    Mat A = Mat::Zero(m, N);
    Vec b(m);
    A.topLeftCorner(m_ub, n_int) = Aub_i;
    b.head(m_ub) = bub_i;
    for (int k = 0; k < m_bnd; ++k) {
        A(m_ub + k, bound_rows[k].first) = 1.0;
        b(m_ub + k) = bound_rows[k].second;
    }
    if (m_eq) {
        A.bottomLeftCorner(m_eq, n_int) = Aeq_i;
        b.tail(m_eq) = beq_i;
    }
    for (int i = 0; i < m_in; ++i) A(i, n_int + i) = 1.0;

    Vec cost = Vec::Zero(N);
    double c_offset = 0.0;
    for (int j = 0; j < n; ++j) {
        cost(vm[j].plus) += vm[j].sign * lp.c(j);
        if (vm[j].minus >= 0) cost(vm[j].minus) -= lp.c(j);
        c_offset += lp.c(j) * vm[j].offset;
    }

    // Row signs so that b >= 0; artificial columns where the slack cannot start basic.
    Vec rsign = Vec::Ones(m);
    std::vector<int> basis(m, -1);
    std::vector<int> art_rows;
    for (int i = 0; i < m; ++i) {
        if (b(i) < 0.0) rsign(i) = -1.0;
        if (i < m_in && rsign(i) > 0) basis[i] = n_int + i;
        else art_rows.push_back(i);
    }
    const int n_art = static_cast<int>(art_rows.size());
    Mat Af = Mat::Zero(m, N + n_art);
    Vec bf(m);
    for (int i = 0; i < m; ++i) {
        Af.row(i).head(N) = rsign(i) * A.row(i);
        bf(i) = rsign(i) * b(i);
    }
    for (int k = 0; k < n_art; ++k) {
        Af(art_rows[k], N + k) = 1.0;
        basis[art_rows[k]] = N + k;
    }

    LpResult res;
    Tableau tab(Af, bf, basis, opt);
    int iters = 0;
    std::vector<bool> row_dropped(m, false);
    if (n_art > 0) {
        Vec c1 = Vec::Zero(N + n_art);
        c1.tail(n_art).setOnes();
        tab.set_cost(c1);
        LpStatus st = tab.run(N + n_art, iters);
        if (st == LpStatus::IterationLimit) {
            res.status = st;
            res.iterations = iters;
            return res;
        }
        const double scale = std::max(1.0, bf.cwiseAbs().maxCoeff());
        if (-tab.T()(m, N + n_art) > opt.feas_tol * scale) {
            res.status = LpStatus::Infeasible;
            res.iterations = iters;
            return res;
        }
        for (int i = 0; i < m; ++i) {
            if (basis[i] < N) continue;
            int col = -1;
            for (int j = 0; j < N; ++j)
                if (std::abs(tab.T()(i, j)) > 1e-9) {
                    col = j;
                    break;
                }
            if (col >= 0) tab.pivot(i, col);
            else row_dropped[i] = true;  // redundant equality
        }
    }
    Vec c2 = Vec::Zero(N + n_art);
    c2.head(N) = cost;
    tab.set_cost(c2);
    for (int i = 0; i < m; ++i)
        if (row_dropped[i]) tab.T().row(i).setZero();
    LpStatus st = tab.run(N, iters);
    res.iterations = iters;
    res.status = st;
    if (st != LpStatus::Optimal) return res;

    // Recompute the basic solution and duals from the original data.
    std::vector<int> rows_kept, cols;
    for (int i = 0; i < m; ++i)
        if (!row_dropped[i]) {
            rows_kept.push_back(i);
            cols.push_back(basis[i]);
        }
    const int mk = static_cast<int>(rows_kept.size());
    Mat Bm(mk, mk);
    Vec bk(mk), cB(mk);
    for (int a = 0; a < mk; ++a) {
        bk(a) = b(rows_kept[a]);
        cB(a) = cost(cols[a]);
        for (int c = 0; c < mk; ++c) Bm(a, c) = A(rows_kept[a], cols[c]);
    }
    Eigen::PartialPivLU<Mat> lu(Bm);
    Vec xB = lu.solve(bk);
    Vec yk = lu.transpose().solve(cB);
    Vec x = Vec::Zero(N);
    for (int a = 0; a < mk; ++a) x(cols[a]) = std::max(0.0, xB(a));
    Vec y = Vec::Zero(m);
    for (int a = 0; a < mk; ++a) y(rows_kept[a]) = yk(a);

    res.z.resize(n);
    for (int j = 0; j < n; ++j) {
        double v = vm[j].offset + vm[j].sign * x(vm[j].plus);
        if (vm[j].minus >= 0) v -= x(vm[j].minus);
        res.z(j) = v;
    }
    res.objective = lp.c.dot(res.z);
    res.y_ub = y.head(m_ub);
    res.y_eq = y.tail(m_eq);
    res.dual_objective = b.dot(y) + c_offset;
    const double scale = std::max(1.0, b_orig.size() ? b_orig.cwiseAbs().maxCoeff() : 1.0);
    for (int i = 0; i < m_ub; ++i) {
        const double slack = lp.b_ub(i) - lp.A_ub.row(i).dot(res.z);
        if (slack <= opt.feas_tol * scale) res.active.push_back(i);
    }
    res.basis.assign(basis.begin(), basis.end());
    return res;
}

}  // namespace ffc
