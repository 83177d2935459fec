#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "saddlesmith/cauchy_heine.hpp"
#include "saddlesmith/rng.hpp"

using namespace saddlesmith;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

NecklaceData eps_necklace(double ep, double em, Complex mu = 0.0) {
    NecklaceData f = NecklaceData::zero(1, mu);
    if (ep != 0.0) f.phi_plus[0] = {Complex(ep)};
    if (em != 0.0) f.phi_minus[0] = {Complex(em)};
    return f;
}

ModelIntegralSpec mspec_for(double c, Complex mu = 0.0) {
    return ModelIntegralSpec{1, mu, c, ResonancePair(1, 1)};
}
} // namespace

TEST_CASE("zero data transforms to zero") {
    NecklaceData f = NecklaceData::zero(1, 0.0);
    SectorialGrid g = SectorialGrid::zero(mspec_for(6.0), GridConfig());
    std::vector<std::pair<SectorId, Complex>> pts = {
        {SectorId{0, SectorFamily::ZI}, Complex(0.0, 0.8)},
        {SectorId{0, SectorFamily::IZ}, Complex(0.0, -0.8)},
        {SectorId{0, SectorFamily::ZI}, Complex(0.7, 0.1)},
    };
    for (Complex v : ch_transform(g, f, pts, 3)) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("jump identities of the transform at c = 8") {
    NecklaceData f = eps_necklace(0.05, 0.05);
    GridConfig cfg;
    cfg.n_rad = 512;
    SectorialGrid g = SectorialGrid::zero(mspec_for(8.0), cfg);
    JumpData jd = JumpData::from_necklace(f);
    ModelIntegralSpec spec = mspec_for(8.0);
    SectorId zi{0, SectorFamily::ZI}, iz{0, SectorFamily::IZ};
    Rng rng(9);
    double worst_plus = 0.0, worst_minus = 0.0;
    for (int t = 0; t < 50; ++t) {
        int iy = rng.uniform_int(0, 31);
        Complex y = g.y_nodes()[std::size_t(iy)];
        bool plus = t % 2 == 0;
        double center = plus ? kPi : 0.0;
        double ang = center + 0.45 * intersection_half_width(1) * (2.0 * rng.next_double() - 1.0);
        Complex u = std::polar(0.4 + 1.8 * rng.next_double(), ang);
        TransformValue szi = ch_transform_point(g, jd, zi, u, iy);
        TransformValue siz = ch_transform_point(g, jd, iz, u, iy);
        if (plus) {
            Complex rhs = jd.eval_plus(std::exp(log_model_first_integral(spec, zi, u, y)));
            worst_plus = std::max(worst_plus, std::abs(szi.value - siz.value - rhs));
        } else {
            Complex rhs = jd.eval_minus(std::exp(-log_model_first_integral(spec, iz, u, y)));
            worst_minus = std::max(worst_minus, std::abs(szi.value - siz.value - rhs));
        }
    }
    CHECK(worst_plus < 1e-8);
    CHECK(worst_minus < 1e-8);
}

TEST_CASE("transform decay near the origin") {
    NecklaceData f = eps_necklace(0.05, 0.05);
    SectorialGrid g = SectorialGrid::zero(mspec_for(6.0), GridConfig());
    JumpData jd = JumpData::from_necklace(f);
    double prev = 1e300;
    for (int i = 0; i < 7; ++i) {
        double r = 0.5 * std::pow(0.5, i);
        TransformValue v = ch_transform_point(g, jd, SectorId{0, SectorFamily::ZI},
                                              std::polar(r, kPi / 2.0), 0);
        double ratio = std::abs(v.value) / std::sqrt(r);
        CHECK(ratio < prev * (1.0 + 1e-9)); // decreasing: Sigma = O(u)
        prev = ratio;
    }
}

TEST_CASE("transform is linear in the data") {
    SectorialGrid g = SectorialGrid::zero(mspec_for(6.0), GridConfig());
    NecklaceData f1 = eps_necklace(0.04, 0.0), f2 = eps_necklace(0.0, 0.03);
    NecklaceData fmix = eps_necklace(2.0 * 0.04, -0.5 * 0.03);
    std::vector<std::pair<SectorId, Complex>> pts;
    Rng rng(21);
    for (int t = 0; t < 8; ++t) {
        SectorFamily fam = t % 2 ? SectorFamily::ZI : SectorFamily::IZ;
        double base = t % 2 ? kPi / 2.0 : -kPi / 2.0;
        pts.push_back({SectorId{0, fam}, std::polar(0.4 + rng.next_double(), base + 0.4 * rng.next_double())});
    }
    auto v1 = ch_transform(g, f1, pts, 2);
    auto v2 = ch_transform(g, f2, pts, 2);
    auto vm = ch_transform(g, fmix, pts, 2);
    for (std::size_t i = 0; i < pts.size(); ++i)
        CHECK(std::abs(vm[i] - (2.0 * v1[i] - 0.5 * v2[i])) < 1e-9);
}

TEST_CASE("lambda_step basics") {
    NecklaceData zero = NecklaceData::zero(1, 0.0);
    GridConfig cfg;
    cfg.n_y = 8;
    cfg.n_rad = 64;
    SectorialGrid g = SectorialGrid::zero(mspec_for(5.0), cfg);
    CHECK(lambda_step(g, zero).sup_norm() == 0.0);

    // quadrupling c shrinks ||Lambda(0)|| by at least 8x
    NecklaceData f = eps_necklace(0.05, 0.05);
    SectorialGrid g1 = SectorialGrid::zero(mspec_for(5.0), cfg);
    SectorialGrid g4 = SectorialGrid::zero(mspec_for(20.0), cfg);
    double n1 = lambda_step(g1, f).sup_norm();
    double n4 = lambda_step(g4, f).sup_norm();
    CHECK(n1 > 0.0);
    CHECK(n1 / std::max(n4, 1e-300) > 8.0);

    // successive steps contract
    SectorialGrid s1 = lambda_step(g1, f);
    SectorialGrid s2 = lambda_step(s1, f);
    SectorialGrid s3 = lambda_step(s2, f);
    CHECK(s3.distance(s2) <= 0.5 * s2.distance(s1));

    // unit ball enforcement
    SectorialGrid big = SectorialGrid::zero(mspec_for(5.0), cfg);
    big.set(0, 0, 0, 0, Complex(2.0), 0.0);
    CHECK_THROWS_WITH_AS(lambda_step(big, f), doctest::Contains("NotInUnitBall"), SaddleError);
}

TEST_CASE("choose_twist behaviour") {
    GridConfig cfg;
    cfg.n_y = 8;
    cfg.n_rad = 64;

    NecklaceData zero = NecklaceData::zero(1, 0.0);
    double c_zero = choose_twist(zero, cfg);
    CHECK(c_zero >= 2.0);
    CHECK(c_zero < 16.0);

    // scaling phi by 4 doubles the start when the sqrt branch binds
    NecklaceData big = eps_necklace(4.0, 4.0);
    NecklaceData bigger = eps_necklace(16.0, 16.0);
    double cb = choose_twist(big, cfg);
    double cbb = choose_twist(bigger, cfg);
    CHECK(cbb / cb == doctest::Approx(2.0).epsilon(0.35));

    // shrinking rho forces logarithmic growth
    NecklaceData small1 = eps_necklace(0.05, 0.05);
    small1.rho_plus[0] = small1.rho_minus[0] = 1e-2;
    NecklaceData small2 = eps_necklace(0.05, 0.05);
    small2.rho_plus[0] = small2.rho_minus[0] = 1e-6;
    double c1 = choose_twist(small1, cfg);
    double c2 = choose_twist(small2, cfg);
    CHECK(c2 > c1 + 1.0);
    CHECK(c2 < c1 + 3.0 * std::log(1e4)); // logarithmic, not worse

    // unusably small radius exhausts the doublings
    NecklaceData dead = eps_necklace(0.05, 0.05);
    dead.rho_plus[0] = 1e-300;
    CHECK_THROWS_WITH_AS(choose_twist(dead, cfg), doctest::Contains("TwistSearchFailed"), SaddleError);
    NecklaceData dead0 = eps_necklace(0.05, 0.05);
    dead0.rho_minus[0] = 0.0;
    CHECK_THROWS_AS(choose_twist(dead0, cfg), SaddleError);
}

TEST_CASE("contraction ratio at the chosen twist") {
    NecklaceData f = eps_necklace(0.05, 0.05);
    GridConfig cfg;
    cfg.n_y = 8;
    cfg.n_rad = 64;
    double c = choose_twist(f, cfg);
    double lip = measured_lipschitz(f, c, cfg, 77, 5);
    CHECK(lip <= 0.5);
}

TEST_CASE("realize: zero necklace") {
    RealizeOptions opts;
    opts.grid.n_y = 8;
    opts.grid.n_rad = 64;
    RealizeResult r = realize(NecklaceData::zero(1, 0.0), opts);
    CHECK(r.report.iterations <= 1);
    CHECK(r.nf.r.is_zero(1e-13));
    CHECK(r.report.jump_residual == 0.0);
}

TEST_CASE("realize: epsilon fixture satisfies the shape constraints") {
    NecklaceData f = eps_necklace(0.05, 0.05);
    RealizeOptions opts;
    opts.grid.n_y = 16;
    RealizeResult r = realize(f, opts);

    REQUIRE(r.report.step_norms.size() >= 2);
    for (std::size_t i = 1; i < r.report.step_norms.size(); ++i) {
        if (r.report.step_norms[i - 1] < 1e-13) break;
        CHECK(r.report.step_norms[i] <= 0.5 * r.report.step_norms[i - 1]);
    }
    CHECK(r.report.jump_residual < 1e-7);
    CHECK(r.report.gluing_residual < 1e-6);
    CHECK(r.report.g0_abs < 1e-6);
    CHECK(r.report.fn0_abs < 1e-6);
    CHECK(r.report.overfit_abs < 1e-6);
    CHECK(r.report.negative_mode_abs < 1e-6);
    CHECK(!r.nf.r.is_zero(1e-8)); // a genuine perturbation was produced

    // an unconverged grid has a visibly larger Cousin residual
    ModelIntegralSpec spec = mspec_for(r.report.c);
    SectorialGrid g0 = SectorialGrid::zero(spec, opts.grid);
    SectorialGrid g1 = lambda_step(g0, f);
    double early = jump_residual(g1, f, 30);
    CHECK(early > 10.0 * r.report.jump_residual);
}

TEST_CASE("natural_section on zero and nonzero targets") {
    NecklaceData base = eps_necklace(0.05, 0.05);
    RealizeOptions opts;
    opts.grid.n_y = 16;
    RealizeResult r = realize(base, opts);
    SectionResult sec = natural_section(r.nf, r.grid, base, NecklaceData::zero(1, 0.0));
    CHECK(sec.g.is_zero(1e-12));

    NecklaceData target = NecklaceData::zero(1, 0.0);
    target.phi_plus[0] = {Complex(0.03), Complex(0.0, 0.01)};
    target.phi_minus[0] = {Complex(0.02, -0.01)};
    SectionResult sec2 = natural_section(r.nf, r.grid, base, target);
    CHECK(!sec2.g.is_zero(1e-8));
    CHECK(sec2.g0_abs < 1e-6);
    CHECK(sec2.overfit_abs < 1e-6);
    CHECK(sec2.negative_mode_abs < 1e-6);
}

TEST_CASE("adaptedness violations are reported") {
    NecklaceData f = eps_necklace(0.05, 0.05);
    f.rho_plus[0] = 1e-9; // far smaller than the leaf-space image at small c
    GridConfig cfg;
    cfg.n_y = 8;
    cfg.n_rad = 64;
    SectorialGrid g = SectorialGrid::zero(mspec_for(2.0), cfg);
    CHECK_THROWS_WITH_AS(lambda_step(g, f), doctest::Contains("NotAdapted"), SaddleError);
}
