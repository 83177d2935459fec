#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "saddlesmith/formal.hpp"
#include "saddlesmith/rng.hpp"

using namespace saddlesmith;

namespace {

double series_dist(const BiSeries& a, const BiSeries& b) {
    double m = 0.0;
    for (const auto& [k, v] : a.terms()) m = std::max(m, std::abs(v - b.coef(k.first, k.second)));
    for (const auto& [k, v] : b.terms()) m = std::max(m, std::abs(v - a.coef(k.first, k.second)));
    return m;
}

OrbitalNormalForm make_nf(int k, Complex mu, double c) {
    OrbitalNormalForm nf;
    nf.pq = ResonancePair(1, 1);
    nf.modulus.k = k;
    nf.modulus.mu = mu;
    nf.c = c;
    nf.r = CStarFunction::zero(k);
    nf.g = CStarFunction::zero(k);
    return nf;
}

} // namespace

TEST_CASE("model field values match the displayed expansion") {
    ResonancePair pq(1, 1);
    // p=q=k=1, mu=0, c=1: X0(1,1) = (1, 0) since u=1 kills the twist factor
    PlanarVectorField x0 = build_model_field(pq, 1, 0.0, 1.0, 8);
    CHECK(std::abs(x0.a.eval(1.0, 1.0) - Complex(1.0)) < 1e-14);
    CHECK(std::abs(x0.b.eval(1.0, 1.0)) < 1e-14);

    // X0(0, y) = (0, c q y) on the axis
    PlanarVectorField x1 = build_model_field(pq, 1, 0.0, 2.5, 8);
    Complex y(0.4, 0.3);
    CHECK(std::abs(x1.a.eval(0.0, y)) < 1e-14);
    CHECK(std::abs(x1.b.eval(0.0, y) - 2.5 * y) < 1e-14);

    // mu = 0 expansion: y^{pk} x^{qk+1} dx + c(1 - x^{2qk} y^{2pk}) (-p x dx + q y dy)
    ResonancePair pq23(2, 3);
    int k = 2;
    double c = 1.7;
    PlanarVectorField xg = build_model_field(pq23, k, 0.0, c, 30);
    CHECK(std::abs(xg.a.coef(pq23.q * k + 1, pq23.p * k) - Complex(1.0)) < 1e-14);
    CHECK(std::abs(xg.a.coef(1, 0) - Complex(-pq23.p * c)) < 1e-14);
    CHECK(std::abs(xg.a.coef(2 * pq23.q * k + 1, 2 * pq23.p * k) - Complex(pq23.p * c)) < 1e-14);
    CHECK(std::abs(xg.b.coef(0, 1) - Complex(pq23.q * c)) < 1e-14);

    CHECK_THROWS_AS(build_model_field(pq, 1, 0.0, 1.0, 3), SaddleError);
}

TEST_CASE("normal form degenerations") {
    // G=R=0, P=1 -> X0 exactly
    OrbitalNormalForm nf = make_nf(1, Complex(0.2, -0.1), 2.0);
    PlanarVectorField z = build_normal_form(nf, 10);
    PlanarVectorField x0 = build_model_field(nf.pq, 1, nf.modulus.mu, nf.c, 10);
    CHECK(series_dist(z.a, x0.a) < 1e-14);
    CHECK(series_dist(z.b, x0.b) < 1e-14);

    // P = 2 scales the field
    OrbitalNormalForm nf2 = make_nf(1, 0.0, 2.0);
    nf2.modulus.p_poly = {Complex(2.0)};
    PlanarVectorField z2 = build_normal_form(nf2, 10);
    CHECK(series_dist(z2.a, x0.a * Complex(2.0 / 1.0) * Complex(0.0) + z2.a) < 1e-12); // shape guard
    PlanarVectorField x02 = build_model_field(nf2.pq, 1, 0.0, 2.0, 10);
    CHECK(series_dist(z2.a, x02.a * Complex(2.0)) < 1e-13);
    CHECK(series_dist(z2.b, x02.b * Complex(2.0)) < 1e-13);

    // R = y u f1 with f1 = 1: X_R = X0 + x y^2 Y
    OrbitalNormalForm nf3 = make_nf(1, 0.0, 2.0);
    nf3.r.fn[0] = {Complex(1.0)};
    PlanarVectorField z3 = build_orbital_field(nf3, 10);
    BiSeries rxy = BiSeries::monomial(1, 2, 1.0, 10); // x y^2
    BiSeries ax = x02.a + rxy * BiSeries::monomial(1, 0, -1.0, 10);
    BiSeries by = x02.b + rxy * BiSeries::monomial(0, 1, 1.0, 10);
    CHECK(series_dist(z3.a, ax) < 1e-14);
    CHECK(series_dist(z3.b, by) < 1e-14);
}

TEST_CASE("formal orbital modulus recovers model parameters") {
    Rng rng(101);
    for (auto [p, q] : {std::pair{1, 1}, {1, 2}}) {
        ResonancePair pq(p, q);
        for (int k : {1, 2}) {
            Complex mu = rng.complex_in_disk(1.2);
            double c = 1.5 + 2.0 * rng.next_double();
            int D = (p + q) * 2 * k + 4;
            PlanarVectorField x0 = build_model_field(pq, k, mu, c, D);
            NormalizationResult res = formal_orbital_modulus(x0);
            CHECK(res.k == k);
            CHECK(std::abs(res.mu - mu) < 1e-10);
            REQUIRE(res.p_poly.size() == std::size_t(k + 1));
            CHECK(std::abs(res.p_poly[0] - Complex(1.0)) < 1e-10);
            for (int l = 1; l <= k; ++l) CHECK(std::abs(res.p_poly[std::size_t(l)]) < 1e-10);
        }
    }
}

TEST_CASE("modulus is invariant under tangent-to-identity conjugation") {
    Rng rng(202);
    ResonancePair pq(1, 1);
    int k = 1;
    Complex mu(0.5, 0.0);
    int D = 10;
    PlanarVectorField x0 = build_model_field(pq, k, mu, 3.0, D);
    for (int trial = 0; trial < 3; ++trial) {
        BiSeries n(D);
        n.set_coef(1, 0, rng.complex_in_disk(0.25));
        n.set_coef(0, 1, rng.complex_in_disk(0.25));
        n.set_coef(1, 1, rng.complex_in_disk(0.25));
        PlanarVectorField z = flow_conjugate(x0, n);
        NormalizationResult res = formal_orbital_modulus(z);
        CHECK(res.k == k);
        CHECK(std::abs(res.mu - mu) < 1e-9);
    }
}

TEST_CASE("non-saddle inputs are classified") {
    ResonancePair pq(1, 1);
    // linear saddle: formally linearizable
    PlanarVectorField lin(BiSeries::monomial(1, 0, 1.0, 8), BiSeries::monomial(0, 1, -1.0, 8), pq);
    // eigenratio -1/1 but with no resonant terms (the modulus cannot be read)
    CHECK_THROWS_WITH_AS(formal_orbital_modulus(lin), doctest::Contains("ResonantOrderExceedsTruncation"),
                         SaddleError);

    // eigenratio mismatch
    PlanarVectorField bad(BiSeries::monomial(1, 0, 2.0, 8), BiSeries::monomial(0, 1, 1.0, 8), pq);
    CHECK_THROWS_WITH_AS(formal_orbital_modulus(bad), doctest::Contains("NotResonantSaddle"), SaddleError);
}

TEST_CASE("formal temporal modulus") {
    ResonancePair pq(1, 1);
    BiSeries one = BiSeries::constant(1.0, 8);
    auto p1 = formal_temporal_modulus(one, pq, 1);
    CHECK(std::abs(p1[0] - Complex(1.0)) < 1e-14);
    CHECK(std::abs(p1[1]) < 1e-14);

    BiSeries u_plus_1(8);
    u_plus_1.set_coef(0, 0, 1.0);
    u_plus_1.set_coef(1, 1, 1.0); // 1 + u
    auto p2 = formal_temporal_modulus(u_plus_1, pq, 1);
    CHECK(std::abs(p2[0] - Complex(1.0)) < 1e-12);
    CHECK(std::abs(p2[1] - Complex(1.0)) < 1e-12);

    BiSeries x_unit(8);
    x_unit.set_coef(0, 0, 1.0);
    x_unit.set_coef(1, 0, 1.0); // 1 + x: no resonant content at order <= 1
    auto p3 = formal_temporal_modulus(x_unit, pq, 1);
    CHECK(std::abs(p3[0] - Complex(1.0)) < 1e-12);
    CHECK(std::abs(p3[1]) < 1e-12);

    CHECK_THROWS_AS(formal_temporal_modulus(BiSeries::monomial(1, 0, 1.0, 8), pq, 1), SaddleError);
}

TEST_CASE("cohomological solve examples and properties") {
    ResonancePair pq(1, 1);
    int D = 12;
    PlanarVectorField x0 = build_model_field(pq, 1, 0.0, 2.0, D);

    // g = u^2 -> F = u
    BiSeries u2 = BiSeries::monomial(2, 2, 1.0, D);
    BiSeries F = formal_cohomological_solve(x0, u2);
    CHECK(series_dist(F, BiSeries::monomial(1, 1, 1.0, D)) < 1e-12);

    // g = 1 -> obstruction at n = 0
    CHECK_THROWS_WITH_AS(formal_cohomological_solve(x0, BiSeries::constant(1.0, D)),
                         doctest::Contains("ObstructedMonomial"), SaddleError);
    // g = u -> obstruction at n = 1 = k
    CHECK_THROWS_AS(formal_cohomological_solve(x0, BiSeries::monomial(1, 1, 1.0, D)), SaddleError);

    // g = x: residual check through the Lie derivative
    BiSeries gx = BiSeries::monomial(1, 0, 1.0, D);
    BiSeries Fx = formal_cohomological_solve(x0, gx);
    BiSeries back = lie_derivative(x0, Fx);
    // the solve is exact only below the truncation couplings; compare low orders
    CHECK(series_dist(back.truncated(D - 4), gx.truncated(D - 4)) < 1e-10);
    CHECK(std::abs(Fx.constant_term()) == 0.0);

    // with R != 0 in the family
    OrbitalNormalForm nf = make_nf(1, Complex(0.1, 0.2), 2.0);
    nf.r.fn[0] = {Complex(0.3, 0.1)};
    nf.r.fn[1] = {Complex(-0.2, 0.05)};
    PlanarVectorField xr = build_orbital_field(nf, D);
    Rng rng(7);
    BiSeries g(D);
    g.set_coef(1, 0, rng.complex_in_disk(1.0));
    g.set_coef(0, 2, rng.complex_in_disk(1.0));
    g.set_coef(3, 3, rng.complex_in_disk(0.5));
    BiSeries Fr = formal_cohomological_solve(xr, g);
    CHECK(series_dist(lie_derivative(xr, Fr).truncated(D - 5), g.truncated(D - 5)) < 1e-10);

    // order independence
    BiSeries Fr2 = formal_cohomological_solve_ordered(xr, g, true);
    CHECK(series_dist(Fr, Fr2) < 1e-13);
}

TEST_CASE("involution transform") {
    CStarFunction r = CStarFunction::zero(1);
    SUBCASE("zero maps to zero") {
        auto lists = involution_lists(r);
        for (const auto& l : lists)
            for (Complex c : l) CHECK(std::abs(c) == 0.0);
    }
    SUBCASE("k=1 formula and double application") {
        r.fn[0] = {Complex(2.0, 1.0), Complex(0.5)}; // f_1
        r.fn[1] = {Complex(-1.0, 3.0)};              // f_2
        auto star = involution_lists(r);
        // R* = -y (f_2 z^0 + f_1 z^1)
        REQUIRE(star.size() == 3);
        CHECK(std::abs(star[0][0] - Complex(1.0, -3.0)) < 1e-15); // -f_2
        CHECK(std::abs(star[1][0] - Complex(-2.0, -1.0)) < 1e-15); // -f_1
        CHECK(star[2].empty());
        auto back = involution_transform(star);
        CHECK(std::abs(back[1][0] - r.fn[0][0]) < 1e-15);
        CHECK(std::abs(back[2][0] - r.fn[1][0]) < 1e-15);
    }
}

TEST_CASE("saddle-node form annihilates the pushforward") {
    Rng rng(31);
    OrbitalNormalForm nf = make_nf(1, rng.complex_in_disk(1.0), 2.3);
    nf.r.fn[0] = {rng.complex_in_disk(0.5), rng.complex_in_disk(0.3)};
    nf.r.fn[1] = {rng.complex_in_disk(0.4)};
    int order = 12;
    auto [A, B] = saddle_node_form(nf, order);
    auto [vu, vy] = pushforward_uy(nf, order);
    CHECK((A * vy + B * vu).max_abs_coef() < 1e-13);

    // R=0, mu=0, k=1: A = u^2, B = -c y (1-u^2)
    OrbitalNormalForm nf0 = make_nf(1, 0.0, 2.0);
    auto [A0, B0] = saddle_node_form(nf0, 8);
    CHECK(std::abs(A0.coef(2, 0) - Complex(1.0)) < 1e-15);
    CHECK(std::abs(B0.coef(0, 1) - Complex(-2.0)) < 1e-15);
    CHECK(std::abs(B0.coef(2, 1) - Complex(2.0)) < 1e-15);
    // B(u, 0) = 0: every term of B carries y
    for (const auto& [key, v] : B0.terms()) CHECK(key.second >= 1);
}
