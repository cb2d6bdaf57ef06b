#pragma once

#include <limits>
#include <string>
#include <vector>

#include "ffc/linalg.hpp"

namespace ffc {

constexpr double kInf = std::numeric_limits<double>::infinity();

// min c'z  s.t.  A_ub z <= b_ub,  A_eq z = b_eq,  lb <= z <= ub.
// Empty lb/ub mean z >= 0 without an upper bound. When S is non-empty the
// inequality right-hand side is b_ub + S * l for a parameter vector l.
struct LpStandard {
    Vec c;
    Mat A_ub;
    Vec b_ub;
    Mat A_eq;
    Vec b_eq;
    Vec lb, ub;
    Mat S;

    int n_vars() const { return static_cast<int>(c.size()); }
    int n_ub() const { return static_cast<int>(A_ub.rows()); }
    int n_eq() const { return static_cast<int>(A_eq.rows()); }
    int n_params() const { return static_cast<int>(S.cols()); }
    // Throws std::invalid_argument on inconsistent dimensions or non-finite data.
    void check() const;
    // Copy with b_ub replaced by b_ub + S * l and no parameter embedding.
    LpStandard at(const Vec& l) const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };
std::string to_string(LpStatus s);

struct LpOptions {
    double feas_tol = 1e-9;
    double opt_tol = 1e-9;
    int max_iter = 50000;
};

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Vec z;
    double objective = 0.0;
    Vec y_ub;  // inequality duals (<= 0 for a minimization)
    Vec y_eq;
    double dual_objective = 0.0;
    std::vector<int> active;  // inequality rows with zero slack
    // Basis of the internal form [A_ub I; A_eq 0] (columns: variables, then
    // slacks). Only meaningful when all bounds are the defaults.
    std::vector<int> basis;
    int iterations = 0;
};

// Two-phase dense tableau simplex with Bland's rule.
LpResult solve_lp(const LpStandard& lp, const LpOptions& opt = {});

}  // namespace ffc
