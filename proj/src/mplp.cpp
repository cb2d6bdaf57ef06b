#include "ffc/mplp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>

#include "ffc/textio.hpp"

namespace ffc {

Vec PwaLaw::normalize(const Vec& l) const {
    if (l.size() != n_params()) throw std::invalid_argument("law: parameter dimension mismatch");
    return ((l - 0.5 * (box_lo + box_hi)).array() / (0.5 * (box_hi - box_lo)).array()).matrix();
}

Vec PwaLaw::denormalize(const Vec& s) const {
    return 0.5 * (box_lo + box_hi) + (s.array() * (0.5 * (box_hi - box_lo)).array()).matrix();
}

bool PwaLaw::in_box(const Vec& l) const {
    if (l.size() != n_params()) return false;
    for (int i = 0; i < l.size(); ++i)
        if (!(l(i) >= box_lo(i) && l(i) <= box_hi(i))) return false;
    return true;
}

namespace {

struct Poly {
    Mat H;
    Vec h;
    std::vector<bool> is_box;
};

// max r  s.t.  H_k s + r <= h_k (k != skip), H_skip s = h_skip when skip >= 0.
bool chebyshev(const Mat& H, const Vec& h, int skip, const LpOptions& lpo, Vec& center, double& radius,
               int& solves) {
    const int p = static_cast<int>(H.cols());
    const int m = static_cast<int>(H.rows());
    LpStandard lp;
    lp.c = Vec::Zero(p + 1);
    lp.c(p) = -1.0;
    const int rows = skip >= 0 ? m - 1 : m;
    lp.A_ub = Mat::Zero(rows + 1, p + 1);
    lp.b_ub = Vec::Zero(rows + 1);
    int r = 0;
    for (int k = 0; k < m; ++k) {
        if (k == skip) continue;
        lp.A_ub.row(r).head(p) = H.row(k);
        lp.A_ub(r, p) = 1.0;
        lp.b_ub(r) = h(k);
        ++r;
    }
    lp.A_ub(rows, p) = 1.0;  // cap the radius
    lp.b_ub(rows) = 2.0;
    if (skip >= 0) {
        lp.A_eq = Mat::Zero(1, p + 1);
        lp.A_eq.row(0).head(p) = H.row(skip);
        lp.b_eq = Vec::Constant(1, h(skip));
    }
    lp.lb = Vec::Constant(p + 1, -kInf);
    lp.lb(p) = 0.0;
    ++solves;
    LpResult res = solve_lp(lp, lpo);
    if (res.status != LpStatus::Optimal) return false;
    center = res.z.head(p);
    radius = res.z(p);
    return true;
}

// Drops rows implied by the others. Box rows come last and are kept when tight.
void remove_redundant(Poly& P, const LpOptions& lpo, int& solves) {
    const int p = static_cast<int>(P.H.cols());
    std::vector<bool> keep(P.H.rows(), true);
    for (int i = 0; i < P.H.rows(); ++i) {
        // Cheap test against the unit box.
        if (!P.is_box[i] && P.H.row(i).cwiseAbs().sum() <= P.h(i) + 1e-12) keep[i] = false;
    }
    for (int i = 0; i < P.H.rows(); ++i) {
        if (!keep[i]) continue;
        LpStandard lp;
        lp.c = -P.H.row(i).transpose();
        int cnt = 0;
        for (int k = 0; k < P.H.rows(); ++k)
            if (keep[k] && k != i) ++cnt;
        lp.A_ub = Mat(cnt + 1, p);
        lp.b_ub = Vec(cnt + 1);
        int r = 0;
        for (int k = 0; k < P.H.rows(); ++k)
            if (keep[k] && k != i) {
                lp.A_ub.row(r) = P.H.row(k);
                lp.b_ub(r) = P.h(k);
                ++r;
            }
        // Relaxed copy of row i keeps the problem bounded.
        lp.A_ub.row(r) = P.H.row(i);
        lp.b_ub(r) = P.h(i) + 1.0;
        lp.lb = Vec::Constant(p, -kInf);
        ++solves;
        LpResult res = solve_lp(lp, lpo);
        if (res.status == LpStatus::Optimal && -res.objective <= P.h(i) + 1e-9) keep[i] = false;
    }
    int cnt = 0;
    for (bool k : keep) cnt += k;
    Poly out;
    out.H = Mat(cnt, p);
    out.h = Vec(cnt);
    int r = 0;
    for (int i = 0; i < P.H.rows(); ++i)
        if (keep[i]) {
            out.H.row(r) = P.H.row(i);
            out.h(r) = P.h(i);
            out.is_box.push_back(P.is_box[i]);
            ++r;
        }
    P = std::move(out);
}

struct Builder {
    const Mat& A;   // A_ub
    Mat Sn;         // normalized parameter map
    Vec b0n;        // normalized offset
    const Mat& out;
    int n, m, p;
    const MplpOptions& opt;
    MplpReport rep;

    // Region of the optimal basis at s. Returns false on LP failure or a thin region.
    bool region_at(const Vec& s, CriticalRegion& cr, Poly& poly) {
        LpStandard lp;
        lp.c = c;
        lp.A_ub = A;
        lp.b_ub = b0n + Sn * s;
        ++rep.lp_solves;
        LpResult res = solve_lp(lp, opt.lp);
        if (res.status != LpStatus::Optimal) return false;
        cr.basis = res.basis;
        Mat Bm(m, m);
        for (int k = 0; k < m; ++k) {
            const int col = res.basis[k];
            if (col < n) Bm.col(k) = A.col(col);
            else {
                Bm.col(k).setZero();
                Bm(col - n, k) = 1.0;
            }
        }
        Eigen::PartialPivLU<Mat> lu(Bm);
        const Mat HB = lu.solve(Sn);
        const Vec hB = lu.solve(b0n);
        // z_B = hB + HB s >= 0
        std::vector<int> rows;
        for (int k = 0; k < m; ++k) {
            const double nr = HB.row(k).norm();
            if (nr < 1e-12) {
                if (hB(k) < -1e-9) return false;
                continue;
            }
            rows.push_back(k);
        }
        const int nr_rows = static_cast<int>(rows.size());
        poly.H = Mat(nr_rows + 2 * p, p);
        poly.h = Vec(nr_rows + 2 * p);
        poly.is_box.assign(nr_rows + 2 * p, false);
        for (int a = 0; a < nr_rows; ++a) {
            const double nr = HB.row(rows[a]).norm();
            poly.H.row(a) = -HB.row(rows[a]) / nr;
            poly.h(a) = hB(rows[a]) / nr;
        }
        for (int j = 0; j < p; ++j) {
            poly.H.row(nr_rows + 2 * j).setZero();
            poly.H(nr_rows + 2 * j, j) = 1.0;
            poly.h(nr_rows + 2 * j) = 1.0;
            poly.H.row(nr_rows + 2 * j + 1).setZero();
            poly.H(nr_rows + 2 * j + 1, j) = -1.0;
            poly.h(nr_rows + 2 * j + 1) = 1.0;
            poly.is_box[nr_rows + 2 * j] = poly.is_box[nr_rows + 2 * j + 1] = true;
        }
        int solves = 0;
        if (!chebyshev(poly.H, poly.h, -1, opt.lp, cr.center, cr.radius, solves) || cr.radius < opt.min_radius) {
            rep.lp_solves += solves;
            return false;
        }
        remove_redundant(poly, opt.lp, solves);
        rep.lp_solves += solves;
        cr.H = poly.H;
        cr.h = poly.h;
        // Law: u = out * z, z_B = hB + HB s.
        const int no = static_cast<int>(out.rows());
        cr.J = Mat::Zero(no, p);
        cr.q = Vec::Zero(no);
        for (int k = 0; k < m; ++k) {
            const int col = res.basis[k];
            if (col >= n) continue;
            cr.J += out.col(col) * HB.row(k);
            cr.q += out.col(col) * hB(k);
        }
        return true;
    }

    Vec c;
};

bool inside(const CriticalRegion& r, const Vec& s, double tol) {
    return ((r.H * s - r.h).array() <= tol).all();
}

}  // namespace

PwaLaw solve_mplp(const LpStandard& lp, const Mat& out, const Vec& lo, const Vec& hi, const MplpOptions& opt,
                  MplpReport* report) {
    lp.check();
    const int p = lp.n_params();
    if (p < 1 || p > 6) throw std::invalid_argument("mplp: parameter dimension must be between 1 and 6");
    if (lp.n_eq() > 0 || lp.lb.size() || lp.ub.size())
        throw std::invalid_argument("mplp: only inequality form with z >= 0 is supported");
    if (lo.size() != p || hi.size() != p || !((hi - lo).array() > 0.0).all())
        throw std::invalid_argument("mplp: domain box must be bounded with lo < hi");
    if (out.cols() != lp.n_vars()) throw std::invalid_argument("mplp: output map has wrong width");
    const auto t0 = std::chrono::steady_clock::now();

    PwaLaw law;
    law.box_lo = lo;
    law.box_hi = hi;
    const Vec mid = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
    Builder B{lp.A_ub, lp.S * hw.asDiagonal(), lp.b_ub + lp.S * mid, out, lp.n_vars(), lp.n_ub(), p, opt, {}, lp.c};

    std::set<std::vector<int>> seen;
    std::deque<int> queue;
    auto add_region = [&](const Vec& s) -> bool {
        CriticalRegion cr;
        Poly poly;
        if (!B.region_at(s, cr, poly)) return false;
        std::vector<int> key = cr.basis;
        std::sort(key.begin(), key.end());
        if (!seen.insert(key).second) return false;
        law.regions.push_back(std::move(cr));
        queue.push_back(static_cast<int>(law.regions.size()) - 1);
        return true;
    };
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    add_region(Vec::Zero(p));
    int hint = 0;
    while (!queue.empty()) {
        if (static_cast<int>(law.regions.size()) >= opt.max_regions || elapsed() > opt.time_limit_s) {
            B.rep.budget_exhausted = true;
            break;
        }
        const int ri = queue.front();
        queue.pop_front();
        const Mat H = law.regions[ri].H;
        const Vec h = law.regions[ri].h;
        for (int f = 0; f < H.rows(); ++f) {
            // Box facets have a single unit entry and offset 1.
            if (std::abs(h(f) - 1.0) < 1e-15 && std::abs(H.row(f).cwiseAbs().sum() - 1.0) < 1e-15 &&
                std::abs(H.row(f).cwiseAbs().maxCoeff() - 1.0) < 1e-15)
                continue;
            Vec fc;
            double fr = 0.0;
            int solves = 0;
            bool ok = chebyshev(H, h, f, opt.lp, fc, fr, solves);
            B.rep.lp_solves += solves;
            if (!ok || fr < opt.min_radius) continue;
            for (double mult : {1.0, 10.0, 100.0}) {
                const Vec s = fc + mult * opt.step * H.row(f).transpose();
                if ((s.array().abs() > 1.0).any()) break;
                bool covered = false;
                for (std::size_t k = 0; k < law.regions.size() && !covered; ++k) {
                    const std::size_t idx = (k + static_cast<std::size_t>(hint)) % law.regions.size();
                    if (inside(law.regions[idx], s, opt.facet_tol)) {
                        covered = true;
                        hint = static_cast<int>(idx);
                    }
                }
                if (covered || add_region(s)) break;
                ++B.rep.degenerate_skips;
            }
        }
    }
    B.rep.regions = static_cast<int>(law.regions.size());
    B.rep.seconds = elapsed();
    if (report) *report = B.rep;
    return law;
}

Vec eval_region(const PwaLaw& law, int r, const Vec& l) {
    const auto& cr = law.regions.at(r);
    return cr.J * law.normalize(l) + cr.q;
}

ExplicitResult eval_explicit(const PwaLaw& law, const Vec& l, int* hint, double tol) {
    ExplicitResult res;
    if (!law.in_box(l) || law.regions.empty()) return res;
    const Vec s = law.normalize(l);
    const int nr = static_cast<int>(law.regions.size());
    const int start = (hint && *hint >= 0 && *hint < nr) ? *hint : 0;
    for (int k = 0; k < nr; ++k) {
        const int idx = k == 0 ? start : (k <= start ? k - 1 : k);
        if (inside(law.regions[idx], s, tol)) {
            res.covered = true;
            res.region = idx;
            res.u = law.regions[idx].J * s + law.regions[idx].q;
            if (hint) *hint = idx;
            return res;
        }
    }
    return res;
}

namespace {

std::vector<double> flat(const Mat& M) {
    std::vector<double> v;
    v.reserve(M.size());
    for (int i = 0; i < M.rows(); ++i)
        for (int j = 0; j < M.cols(); ++j) v.push_back(M(i, j));
    return v;
}

std::vector<double> flat(const Vec& x) { return std::vector<double>(x.data(), x.data() + x.size()); }

Mat unflat(const std::vector<double>& v, int rows, int cols, const std::string& what) {
    if (static_cast<int>(v.size()) != rows * cols) throw std::runtime_error("law file: " + what + " has wrong size");
    Mat M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) M(i, j) = v[i * cols + j];
    return M;
}

Vec tovec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<int>(v.size())); }

text::Document law_document(const PwaLaw& law) {
    text::Document doc;
    doc.header_comments = {
        "# Explicit piecewise-affine control law.",
        "# Parameters are normalized: s = (l - (box_lo + box_hi)/2) / ((box_hi - box_lo)/2).",
        "# Region k is {s : H s <= h} with H stored row-major (rows x n_params);",
        "# inside it the output is u = J s + q with J row-major (n_outputs x n_params).",
    };
    auto& t = doc.add("law", false);
    t.set_num("n_params", law.n_params());
    t.set_num("n_outputs", law.n_outputs());
    t.set_num("n_regions", static_cast<double>(law.regions.size()));
    t.set_arr("box_lo", flat(law.box_lo));
    t.set_arr("box_hi", flat(law.box_hi));
    for (const auto& r : law.regions) {
        auto& rt = doc.add("region", true);
        rt.set_num("rows", static_cast<double>(r.H.rows()));
        rt.set_arr("H", flat(r.H));
        rt.set_arr("h", flat(r.h));
        rt.set_arr("J", flat(r.J));
        rt.set_arr("q", flat(r.q));
        rt.set_arr("center", flat(r.center));
        rt.set_num("radius", r.radius);
    }
    return doc;
}

PwaLaw law_from_document(const text::Document& doc) {
    const text::Table* t = doc.table("law");
    if (!t) throw std::runtime_error("law file: missing [law] section");
    t->require_known({"n_params", "n_outputs", "n_regions", "box_lo", "box_hi"});
    PwaLaw law;
    const int p = t->integer("n_params");
    const int no = t->integer("n_outputs");
    law.box_lo = tovec(t->arr("box_lo"));
    law.box_hi = tovec(t->arr("box_hi"));
    if (law.box_lo.size() != p || law.box_hi.size() != p) throw std::runtime_error("law file: box size mismatch");
    for (const text::Table* r : doc.array("region")) {
        r->require_known({"rows", "H", "h", "J", "q", "center", "radius"});
        CriticalRegion cr;
        const int rows = r->integer("rows");
        cr.H = unflat(r->arr("H"), rows, p, "H");
        cr.h = tovec(r->arr("h"));
        cr.J = unflat(r->arr("J"), no, p, "J");
        cr.q = tovec(r->arr("q"));
        cr.center = tovec(r->arr("center"));
        cr.radius = r->num("radius");
        if (cr.h.size() != rows || cr.q.size() != no) throw std::runtime_error("law file: region size mismatch");
        law.regions.push_back(std::move(cr));
    }
    if (static_cast<int>(law.regions.size()) != t->integer("n_regions"))
        throw std::runtime_error("law file: region count does not match n_regions");
    return law;
}

}  // namespace

std::string law_to_string(const PwaLaw& law) { return text::write(law_document(law)); }
PwaLaw law_from_string(const std::string& s) { return law_from_document(text::parse(s, "<law>")); }
void save_law(const PwaLaw& law, const std::string& path) { text::write_file(law_document(law), path); }
PwaLaw load_law(const std::string& path) { return law_from_document(text::parse_file(path)); }

}  // namespace ffc
