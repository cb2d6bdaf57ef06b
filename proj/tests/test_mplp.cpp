#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "ffc/mplp.hpp"

using namespace ffc;

namespace {

// min -z  s.t. z <= 1, z <= l. Solution z = min(l, 1).
LpStandard toy() {
    LpStandard lp;
    lp.c = -Vec::Ones(1);
    lp.A_ub = Mat::Ones(2, 1);
    lp.b_ub = Vec(2);
    lp.b_ub << 1.0, 0.0;
    lp.S = Mat::Zero(2, 1);
    lp.S(1, 0) = 1.0;
    return lp;
}

// Two parameters, four variables, several activation switches.
LpStandard small() {
    LpStandard lp;
    lp.c = Vec(4);
    lp.c << 1.0, 2.0, 1.5, 3.0;
    lp.A_ub = Mat::Zero(7, 4);
    lp.b_ub = Vec::Zero(7);
    lp.S = Mat::Zero(7, 2);
    lp.A_ub.row(0) << -1, -1, 0, 0;
    lp.S(0, 0) = -1;  // z1 + z2 >= l1
    lp.A_ub.row(1) << -1, 0, -1, 0;
    lp.S(1, 1) = -1;  // z1 + z3 >= l2
    lp.A_ub.row(2) << 1, 0, 0, 0;
    lp.b_ub(2) = 0.5;
    lp.A_ub.row(3) << 0, 1, 0, 0;
    lp.b_ub(3) = 1.0;
    lp.A_ub.row(4) << 0, 0, 1, 0;
    lp.b_ub(4) = 1.0;
    lp.A_ub.row(5) << 0, 0, 0, 1;
    lp.b_ub(5) = 2.0;
    lp.A_ub.row(6) << 0, -1, -1, -1;
    lp.S(6, 0) = -0.5;
    lp.S(6, 1) = -0.5;  // z2 + z3 + z4 >= (l1 + l2) / 2
    return lp;
}

Mat first_two() {
    Mat m = Mat::Zero(2, 4);
    m(0, 0) = 1;
    m(1, 1) = 1;
    return m;
}

Vec online(const LpStandard& lp, const Mat& out, const Vec& l) {
    const auto r = solve_lp(lp.at(l));
    if (r.status != LpStatus::Optimal) return Vec();
    return out * r.z;
}

}  // namespace

TEST(Mplp, ToyProblemHasTwoContinuousRegions) {
    const LpStandard lp = toy();
    const Mat out = Mat::Ones(1, 1);
    Vec lo(1), hi(1);
    lo << 0.1;
    hi << 2.0;
    MplpReport rep;
    const PwaLaw law = solve_mplp(lp, out, lo, hi, {}, &rep);
    EXPECT_EQ(law.regions.size(), 2u);
    EXPECT_EQ(rep.regions, 2);
    EXPECT_FALSE(rep.budget_exhausted);
    for (double l : {0.1, 0.5, 0.99, 1.01, 1.5, 2.0}) {
        Vec v(1);
        v << l;
        const auto e = eval_explicit(law, v);
        ASSERT_TRUE(e.covered) << l;
        EXPECT_NEAR(e.u(0), std::min(l, 1.0), 1e-12) << l;
    }
    Vec edge(1);
    edge << 1.0;
    EXPECT_NEAR(eval_region(law, 0, edge)(0), eval_region(law, 1, edge)(0), 1e-12);
}

TEST(Mplp, ChebyshevCentersMatchOnline) {
    const LpStandard lp = small();
    const Mat out = first_two();
    const Vec lo = Vec::Constant(2, -1.0), hi = Vec::Constant(2, 1.5);
    const PwaLaw law = solve_mplp(lp, out, lo, hi);
    ASSERT_GE(law.regions.size(), 3u);
    for (std::size_t r = 0; r < law.regions.size(); ++r) {
        const Vec l = law.denormalize(law.regions[r].center);
        EXPECT_GT(law.regions[r].radius, 0.0);
        const auto e = eval_explicit(law, l);
        ASSERT_TRUE(e.covered);
        EXPECT_EQ(e.region, static_cast<int>(r));
        EXPECT_LE((e.u - online(lp, out, l)).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Mplp, RandomSamplesMatchOnline) {
    const LpStandard lp = small();
    const Mat out = first_two();
    const Vec lo = Vec::Constant(2, -1.0), hi = Vec::Constant(2, 1.5);
    const PwaLaw law = solve_mplp(lp, out, lo, hi);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int hint = -1;
    for (int k = 0; k < 1000; ++k) {
        Vec l(2);
        for (int i = 0; i < 2; ++i) l(i) = lo(i) + U(rng) * (hi(i) - lo(i));
        const auto e = eval_explicit(law, l, &hint);
        const Vec u = online(lp, out, l);
        ASSERT_TRUE(e.covered) << l.transpose();
        ASSERT_GT(u.size(), 0);
        EXPECT_LE((e.u - u).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(Mplp, ContinuousAcrossSampledFacets) {
    const LpStandard lp = small();
    const Mat out = first_two();
    const Vec lo = Vec::Constant(2, -1.0), hi = Vec::Constant(2, 1.5);
    const PwaLaw law = solve_mplp(lp, out, lo, hi);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int crossings = 0;
    for (int k = 0; k < 400; ++k) {
        Vec a(2), b(2);
        for (int i = 0; i < 2; ++i) {
            a(i) = lo(i) + U(rng) * (hi(i) - lo(i));
            b(i) = lo(i) + U(rng) * (hi(i) - lo(i));
        }
        const int ra = eval_explicit(law, a).region;
        if (ra == eval_explicit(law, b).region) continue;
        // Exact exit point of the segment from region ra, in normalized coordinates.
        const auto& R = law.regions[ra];
        const Vec sa = law.normalize(a), d = law.normalize(b) - sa;
        double t = 1.0;
        for (int i = 0; i < R.H.rows(); ++i) {
            const double rate = R.H.row(i).dot(d);
            if (rate > 1e-14) t = std::min(t, (R.h(i) - R.H.row(i).dot(sa)) / rate);
        }
        const Vec p = law.denormalize(sa + t * d);
        const int rb = eval_explicit(law, law.denormalize(sa + (t + 1e-6) * d)).region;
        if (rb < 0 || rb == ra) continue;
        EXPECT_LE((eval_region(law, ra, p) - eval_region(law, rb, p)).cwiseAbs().maxCoeff(), 1e-8);
        ++crossings;
    }
    EXPECT_GT(crossings, 20);
}

TEST(Mplp, OutsideBoxIsUncovered) {
    const PwaLaw law = solve_mplp(toy(), Mat::Ones(1, 1), Vec::Constant(1, 0.1), Vec::Constant(1, 2.0));
    EXPECT_FALSE(eval_explicit(law, Vec::Constant(1, 2.5)).covered);
    EXPECT_FALSE(eval_explicit(law, Vec::Constant(1, 0.0)).covered);
    EXPECT_FALSE(law.in_box(Vec::Constant(1, -3.0)));
    EXPECT_FALSE(eval_explicit(law, Vec::Zero(2)).covered);
}

TEST(Mplp, RejectsUnsupportedInput) {
    LpStandard lp = toy();
    EXPECT_THROW(solve_mplp(lp, Mat::Ones(1, 1), Vec::Constant(1, 1.0), Vec::Constant(1, 0.5)), std::invalid_argument);
    EXPECT_THROW(solve_mplp(lp, Mat::Ones(1, 2), Vec::Constant(1, 0.1), Vec::Constant(1, 2.0)), std::invalid_argument);
    LpStandard big = toy();
    big.S = Mat::Zero(2, 7);
    EXPECT_THROW(solve_mplp(big, Mat::Ones(1, 1), Vec::Zero(7), Vec::Ones(7)), std::invalid_argument);
}

TEST(Mplp, SerializationIsBitExact) {
    const PwaLaw law = solve_mplp(small(), first_two(), Vec::Constant(2, -1.0), Vec::Constant(2, 1.5));
    const std::string s1 = law_to_string(law);
    const PwaLaw back = law_from_string(s1);
    EXPECT_EQ(law_to_string(back), s1);
    ASSERT_EQ(back.regions.size(), law.regions.size());
    for (std::size_t r = 0; r < law.regions.size(); ++r) {
        EXPECT_EQ(back.regions[r].H, law.regions[r].H);
        EXPECT_EQ(back.regions[r].h, law.regions[r].h);
        EXPECT_EQ(back.regions[r].J, law.regions[r].J);
        EXPECT_EQ(back.regions[r].q, law.regions[r].q);
    }
    EXPECT_EQ(back.box_lo, law.box_lo);
    EXPECT_EQ(back.box_hi, law.box_hi);

    const auto path = (std::filesystem::temp_directory_path() / "ffc_law_roundtrip.toml").string();
    save_law(law, path);
    EXPECT_EQ(law_to_string(load_law(path)), s1);
    std::remove(path.c_str());
    EXPECT_THROW(law_from_string("[law]\nn_params = 2\n"), std::runtime_error);
}
