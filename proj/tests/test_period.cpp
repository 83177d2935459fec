#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "saddlesmith/period.hpp"
#include "saddlesmith/rng.hpp"

using namespace saddlesmith;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

OrbitalNormalForm model_nf(double c, Complex mu = 0.0) {
    OrbitalNormalForm nf;
    nf.pq = ResonancePair(1, 1);
    nf.modulus.k = 1;
    nf.modulus.mu = mu;
    nf.c = c;
    nf.r = CStarFunction::zero(1);
    nf.g = CStarFunction::zero(1);
    return nf;
}

NecklaceData eps_necklace(double ep, double em) {
    NecklaceData f = NecklaceData::zero(1, 0.0);
    if (ep != 0.0) f.phi_plus[0] = {Complex(ep)};
    if (em != 0.0) f.phi_minus[0] = {Complex(em)};
    return f;
}

// one RK4 step of the flow of X_R (p = q = 1)
std::pair<Complex, Complex> flow_step(const OrbitalNormalForm& nf, Complex x, Complex y, Complex tau) {
    auto rhs = [&](Complex xx, Complex yy) {
        Complex u = xx * yy;
        Complex m = nf.c * (Complex(1.0) - u * u) + nf.modulus.mu * u + nf.r.eval(u, yy);
        return std::pair<Complex, Complex>(u * xx - xx * m, yy * m);
    };
    auto [k1x, k1y] = rhs(x, y);
    auto [k2x, k2y] = rhs(x + tau / 2.0 * k1x, y + tau / 2.0 * k1y);
    auto [k3x, k3y] = rhs(x + tau / 2.0 * k2x, y + tau / 2.0 * k2y);
    auto [k4x, k4y] = rhs(x + tau * k3x, y + tau * k3y);
    return {x + tau / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
            y + tau / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)};
}
} // namespace

TEST_CASE("coboundary integrand reproduces the global solution") {
    OrbitalNormalForm nf = model_nf(3.0);
    Integrand g_u2;
    g_u2.terms.push_back({2, 2, Complex(1.0)});
    AsymptoticPathSpec ps;
    Complex x0(0.5, 0.1), y0(1.3, 0.2);
    for (SectorFamily fam : {SectorFamily::ZI, SectorFamily::IZ}) {
        Complex f = sectorial_solution(nf, {0, fam}, x0, y0, g_u2, ps);
        CHECK(std::abs(f - x0 * y0) < 2e-5); // F = u globally, in both sectors
    }
    CHECK(std::abs(sectorial_solution(nf, {0, SectorFamily::ZI}, x0, y0, Integrand{}, ps)) == 0.0);
}

TEST_CASE("obstructed integrands are rejected") {
    OrbitalNormalForm nf = model_nf(2.0);
    AsymptoticPathSpec ps;
    for (int n = 0; n <= 1; ++n) { // k = 1: u^0 and u^1 blocked
        Integrand g;
        g.terms.push_back({n, n, Complex(1.0)});
        CHECK_THROWS_WITH_AS(integrate_leaf(nf, {0, SectorFamily::ZI}, Complex(0.5), Complex(1.2), g, ps),
                             doctest::Contains("ObstructedIntegrand"), SaddleError);
    }
    Integrand ok;
    ok.terms.push_back({2, 2, Complex(1.0)});
    ok.terms.push_back({1, 3, Complex(0.5)}); // non-resonant content is fine
    CHECK_NOTHROW(ok.check_admissible(nf.pq, 1));
}

TEST_CASE("path asymptotics") {
    OrbitalNormalForm nf = model_nf(3.0, Complex(0.3, 0.1));
    Integrand g;
    g.terms.push_back({2, 2, Complex(1.0)});
    AsymptoticPathSpec ps;
    Rng rng(5);
    for (int trial = 0; trial < 4; ++trial) {
        SectorFamily fam = trial % 2 ? SectorFamily::IZ : SectorFamily::ZI;
        double target = (fam == SectorFamily::ZI) ? kPi / 2.0 : -kPi / 2.0;
        double base = (fam == SectorFamily::ZI) ? 0.6 : -0.6;
        Complex y0 = std::polar(1.2 + 0.4 * rng.next_double(), 0.4 * rng.next_double());
        Complex u0 = std::polar(0.4 + 0.3 * rng.next_double(), base + 0.3 * rng.next_double());
        LeafTrajectory tr = integrate_leaf(nf, {0, fam}, u0 / y0, y0, g, ps, true);
        CHECK(std::abs(std::arg(tr.final_u) - target) < 0.05);
        REQUIRE(tr.u_samples.size() > 20);
        double lo = 1e300, hi = 0.0;
        for (std::size_t i = tr.u_samples.size() * 9 / 10; i < tr.u_samples.size(); ++i) {
            double v = std::abs(tr.u_samples[i]) * tr.t_samples[i];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK((hi - lo) / hi < 0.10);
    }
}

TEST_CASE("flow-derivative residual of sectorial solutions") {
    OrbitalNormalForm nf = model_nf(2.5);
    nf.r.fn[0] = {Complex(0.01, 0.004)};
    nf.r.fn[1] = {Complex(-0.006, 0.002)};
    Integrand g;
    g.terms.push_back({2, 2, Complex(0.8, 0.1)});
    g.terms.push_back({1, 2, Complex(0.5)});
    g.terms.push_back({3, 2, Complex(0.3)});
    AsymptoticPathSpec ps;
    Rng rng(11);
    for (int trial = 0; trial < 3; ++trial) {
        Complex y0 = std::polar(1.3, 0.5 * rng.next_double());
        Complex u0 = std::polar(0.5, kPi / 2.0 + 0.2 * rng.next_double());
        Complex x0 = u0 / y0;
        double tau = 5e-4;
        auto [xp, yp] = flow_step(nf, x0, y0, Complex(tau));
        auto [xm, ym] = flow_step(nf, x0, y0, Complex(-tau));
        SectorId id{0, SectorFamily::ZI};
        Complex fp = sectorial_solution(nf, id, xp, yp, g, ps);
        Complex fm = sectorial_solution(nf, id, xm, ym, g, ps);
        Complex lie = (fp - fm) / (2.0 * tau);
        CHECK(std::abs(lie - g.eval(x0, y0)) < 1e-4);
    }
}

TEST_CASE("periods of coboundaries vanish and the operator is linear") {
    OrbitalNormalForm nf = model_nf(2.0);
    PlanarVectorField x0 = build_model_field(nf.pq, 1, 0.0, nf.c, 10);
    Rng rng(3);

    BiSeries fpoly(10);
    fpoly.set_coef(1, 1, rng.complex_in_disk(1.0));
    fpoly.set_coef(2, 1, rng.complex_in_disk(1.0));
    fpoly.set_coef(0, 2, rng.complex_in_disk(1.0));
    Integrand g_cob = Integrand::from_series(lie_derivative(x0, fpoly), 1e-14);

    PeriodOptions po;
    po.n_args = 4;
    auto samples = period_samples(nf, g_cob, po);
    REQUIRE(samples.size() == 16);
    for (const auto& s : samples) CHECK(std::abs(s.value) < 1e-4);

    // linearity: period(a g1 + b g2) = a period(g1) + b period(g2)
    Integrand g1, g2, gmix;
    g1.terms.push_back({2, 2, Complex(1.0)});
    g1.terms.push_back({1, 2, Complex(0.4)});
    g2.terms.push_back({2, 3, Complex(1.0)});
    Complex a(0.7, 0.2), b(-0.3, 0.5);
    for (auto [i, j, cv] : g1.terms) gmix.terms.push_back({i, j, a * cv});
    for (auto [i, j, cv] : g2.terms) gmix.terms.push_back({i, j, b * cv});
    auto s1 = period_samples(nf, g1, po);
    auto s2 = period_samples(nf, g2, po);
    auto sm = period_samples(nf, gmix, po);
    for (std::size_t i = 0; i < sm.size(); ++i) {
        CHECK(std::abs(sm[i].h - s1[i].h) < 1e-12); // same sampled points on the model
        CHECK(std::abs(sm[i].value - (a * s1[i].value + b * s2[i].value)) < 1e-4);
    }
}

TEST_CASE("roundtrip: one-sided and two-sided necklaces") {
    for (int side = 0; side < 2; ++side) {
        NecklaceData f = side == 0 ? eps_necklace(0.05, 0.0) : eps_necklace(0.05, 0.05);
        RealizeOptions ro;
        ro.grid.n_y = 16;
        PeriodOptions po;
        po.n_args = 4;
        RoundtripReport rep = roundtrip_check(f, ro, po);
        INFO("side=", side, " c=", rep.c, " err=", rep.max_rel_error);
        CHECK(rep.max_rel_error < 1e-3);
        REQUIRE(rep.rows.size() == 16);
    }
    // zero necklace: exact zero
    RoundtripReport rep0 = roundtrip_check(NecklaceData::zero(1, 0.0), RealizeOptions(), PeriodOptions());
    CHECK(rep0.max_rel_error == 0.0);
}

TEST_CASE("unattainable levels are reported") {
    OrbitalNormalForm nf = model_nf(2.0);
    PeriodOptions po;
    po.radius_fractions = {1e9}; // far outside the leaf-space image
    Integrand g;
    g.terms.push_back({2, 2, Complex(1.0)});
    CHECK_THROWS_WITH_AS(period_samples(nf, g, po), doctest::Contains("HNotAttained"), SaddleError);
}

TEST_CASE("temporal normalization") {
    NecklaceData base = eps_necklace(0.04, 0.03);
    RealizeOptions ro;
    ro.grid.n_y = 16;
    RealizeResult rr = realize(base, ro);

    int D = 12;
    PeriodOptions po;
    po.n_args = 4;

    // U = 1: P = 1, G = 0
    TemporalResult t1 = temporal_normalize(rr, base, BiSeries::constant(1.0, D), po);
    CHECK(std::abs(t1.p_poly[0] - Complex(1.0)) < 1e-12);
    CHECK(t1.g.is_zero(1e-10));

    // U = 1 + u/4 is already a temporal polynomial: G vanishes within tolerance
    BiSeries up(D);
    up.set_coef(0, 0, 1.0);
    up.set_coef(1, 1, 0.25);
    TemporalResult t2 = temporal_normalize(rr, base, up, po);
    CHECK(std::abs(t2.p_poly[0] - Complex(1.0)) < 1e-10);
    CHECK(std::abs(t2.p_poly[1] - Complex(0.25)) < 1e-10);
    CHECK(t2.g.max_abs_coef() < 2e-4);

    // random unit: the defect 1/U - 1/P - G has vanishing periods
    BiSeries u3(D);
    u3.set_coef(0, 0, 1.0);
    u3.set_coef(1, 0, 0.1);
    u3.set_coef(2, 2, 0.1);
    TemporalResult t3 = temporal_normalize(rr, base, u3, po);
    BiSeries defect = invert_unit(u3);
    std::vector<Complex> invp = invert_poly_series(t3.p_poly, D / 2 + 1);
    for (int l = 0; l < int(invp.size()); ++l)
        if (2 * l <= D) defect.add_coef(l, l, -invp[std::size_t(l)]);
    defect -= t3.g.to_xy_series(rr.nf.pq, D);
    Integrand gdef = Integrand::from_series(defect, 1e-13);
    auto samples = period_samples(rr.nf, gdef, po);
    for (const auto& s : samples) CHECK(std::abs(s.value) < 3e-4);
}
