#pragma once

#include <string>
#include <vector>

#include "ffc/lp.hpp"

namespace ffc {

// Parameters are normalized to s = (l - mid) / half_width, so the domain box is
// [-1, 1]^p. Regions and affine laws are stored in normalized coordinates.
struct CriticalRegion {
    Mat H;  // H s <= h (rows unit-norm)
    Vec h;
    Mat J;  // u = J s + q
    Vec q;
    std::vector<int> basis;
    Vec center;
    double radius = 0.0;
};

struct PwaLaw {
    Vec box_lo, box_hi;
    std::vector<CriticalRegion> regions;

    int n_params() const { return static_cast<int>(box_lo.size()); }
    int n_outputs() const { return regions.empty() ? 0 : static_cast<int>(regions.front().q.size()); }
    Vec normalize(const Vec& l) const;
    Vec denormalize(const Vec& s) const;
    bool in_box(const Vec& l) const;
};

struct MplpOptions {
    LpOptions lp;
    double facet_tol = 1e-8;   // point-in-region tolerance
    double step = 1e-5;        // facet crossing distance, normalized units
    double min_radius = 1e-7;  // regions thinner than this are discarded
    int max_regions = 20000;
    double time_limit_s = 600.0;
};

struct MplpReport {
    int regions = 0;
    int lp_solves = 0;
    int degenerate_skips = 0;
    bool budget_exhausted = false;
    double seconds = 0.0;
};

// Explicit solution of min c'z s.t. A_ub z <= b_ub + S l, z >= 0 over the box
// [lo, hi]. `out` maps z to the law output (rows = outputs).
PwaLaw solve_mplp(const LpStandard& lp, const Mat& out, const Vec& lo, const Vec& hi, const MplpOptions& opt = {},
                  MplpReport* report = nullptr);

struct ExplicitResult {
    bool covered = false;
    Vec u;
    int region = -1;
};

// Sequential scan; `hint` (region index of the previous hit) is tried first and updated.
ExplicitResult eval_explicit(const PwaLaw& law, const Vec& l, int* hint = nullptr, double tol = 1e-8);

// Output of region r evaluated at l, regardless of membership.
Vec eval_region(const PwaLaw& law, int r, const Vec& l);

void save_law(const PwaLaw& law, const std::string& path);
PwaLaw load_law(const std::string& path);
std::string law_to_string(const PwaLaw& law);
PwaLaw law_from_string(const std::string& text);

}  // namespace ffc
