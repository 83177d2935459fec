#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "saddlesmith/rng.hpp"
#include "saddlesmith/sectors.hpp"

using namespace saddlesmith;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_CASE("sector membership, k = 1 examples") {
    SectorId zi{0, SectorFamily::ZI}, iz{0, SectorFamily::IZ};
    CHECK(sector_contains(1, zi, Complex(0.0, 1.0)));  // u = i
    CHECK(sector_contains(1, iz, Complex(1.0, 0.0)));  // |0 + pi/2| = pi/2 < 5pi/8
    CHECK(sector_contains(1, zi, Complex(1.0, 0.0)));
    CHECK(!sector_contains(1, iz, Complex(0.0, 1.0))); // |pi/2 + pi/2| = pi > 5pi/8
    CHECK_THROWS_AS(sector_contains(1, zi, Complex(0.0)), SaddleError);
}

TEST_CASE("intersection membership, k = 1 components") {
    IntersectionId minus{0, Polarity::MINUS}, plus{0, Polarity::PLUS};
    CHECK(intersection_contains(1, minus, Complex(1.0, 0.0)));
    CHECK(!intersection_contains(1, plus, Complex(1.0, 0.0)));
    CHECK(intersection_contains(1, plus, Complex(-1.0, 0.0)));
    CHECK(!intersection_contains(1, minus, Complex(-1.0, 0.0)));
    CHECK(!intersection_contains(1, minus, Complex(0.0, 1.0)));
    CHECK(!intersection_contains(1, plus, Complex(0.0, 1.0)));
    CHECK_THROWS_AS(intersection_contains(1, plus, Complex(0.0)), SaddleError);
}

TEST_CASE("sector covering and intersections inside sectors") {
    Rng rng(5);
    for (int k : {1, 2, 3}) {
        for (int t = 0; t < 3000; ++t) {
            Complex u = std::polar(0.01 + 3.0 * rng.next_double(), 2.0 * kPi * rng.next_double());
            bool inside = false;
            for (int j = 0; j < k && !inside; ++j)
                for (SectorFamily fam : {SectorFamily::ZI, SectorFamily::IZ})
                    if (sector_contains(k, {j, fam}, u)) inside = true;
            CHECK(inside);
        }
        for (int j = 0; j < k; ++j)
            for (Polarity pol : {Polarity::MINUS, Polarity::PLUS}) {
                IntersectionId iid{j, pol};
                auto [cw, ccw] = intersection_sectors(k, iid);
                for (int t = 0; t < 40; ++t) {
                    double ang = intersection_center(k, iid) +
                                 0.999 * intersection_half_width(k) * (2.0 * rng.next_double() - 1.0);
                    Complex u = std::polar(0.05 + 2.0 * rng.next_double(), ang);
                    CHECK(intersection_contains(k, iid, u));
                    CHECK(sector_contains(k, cw, u));
                    CHECK(sector_contains(k, ccw, u));
                }
            }
    }
}

TEST_CASE("contour rays") {
    auto [lo, hi] = contour_rays(1, {0, Polarity::MINUS}, 0.0);
    CHECK(lo.angle == doctest::Approx(-kPi / 8.0));
    CHECK(hi.angle == doctest::Approx(kPi / 8.0));
    auto [lo2, hi2] = contour_rays(1, {0, Polarity::MINUS}, 0.02);
    CHECK(lo2.angle == doctest::Approx(-kPi / 8.0 + 0.02));
    CHECK(hi2.angle == doctest::Approx(kPi / 8.0 - 0.02));
    CHECK(std::abs(hi2.point(2.0)) > std::abs(hi2.point(1.0))); // oriented 0 -> infinity
    CHECK_THROWS_AS(contour_rays(1, {0, Polarity::MINUS}, kPi / 8.0), SaddleError);
    CHECK_THROWS_AS(contour_rays(1, {0, Polarity::MINUS}, -0.1), SaddleError);
}

TEST_CASE("model hat integral values") {
    // k=1, mu=0, c=5, u=1 limit from above: exp(10)
    ModelIntegralSpec spec{1, 0.0, 5.0, ResonancePair(1, 1)};
    CHECK(std::abs(model_hat_integral(spec, Complex(1.0, 0.0)) - std::exp(10.0)) <
          1e-9 * std::exp(10.0));

    // modulus identity on the unit circle: |Hhat| = exp(2c cos(k theta)/k)
    Rng rng(3);
    for (int k : {1, 2}) {
        ModelIntegralSpec sk{k, 0.0, 2.0, ResonancePair(1, 1)};
        for (int t = 0; t < 20; ++t) {
            double th = 2.0 * kPi * rng.next_double();
            double expect = std::exp(2.0 * sk.c * std::cos(k * th) / double(k));
            CHECK(std::abs(model_hat_integral(sk, std::polar(1.0, th))) ==
                  doctest::Approx(expect).epsilon(1e-10));
        }
    }

    // c -> 0 gives Hhat = 1 for mu = 0
    ModelIntegralSpec s0{1, 0.0, 1e-14, ResonancePair(1, 1)};
    CHECK(std::abs(model_hat_integral(s0, Complex(0.3, 0.7)) - Complex(1.0)) < 1e-12);
}

TEST_CASE("branch consistency around the cut") {
    Rng rng(11);
    Complex mu(0.7, -0.4);
    ModelIntegralSpec spec{1, mu, 3.0, ResonancePair(1, 1)};
    for (int t = 0; t < 25; ++t) {
        double r = 0.2 + 2.0 * rng.next_double();
        double th = 2.0 * kPi * rng.next_double();
        Complex a = std::exp(log_model_hat(spec, std::log(r), th));
        Complex b = std::exp(log_model_hat(spec, std::log(r), th + 2.0 * kPi));
        CHECK(std::abs(b / a - std::exp(Complex(0.0, -2.0 * kPi) * mu)) < 1e-10);
    }
}

TEST_CASE("model first-integral sigma factors and transitions") {
    // mu = 0 -> sigma = 1 -> same value in every sector
    ModelIntegralSpec s0{2, 0.0, 1.5, ResonancePair(1, 1)};
    CHECK(std::abs(s0.sigma() - Complex(1.0)) < 1e-15);

    // mu = k -> sigma = -1; n-exponents 0 and 2k-1
    ModelIntegralSpec s1{2, Complex(2.0), 1.5, ResonancePair(1, 1)};
    CHECK(std::abs(s1.sigma() - Complex(-1.0)) < 1e-14);
    CHECK(sector_n_exponent(2, {0, SectorFamily::ZI}) == 0);
    CHECK(sector_n_exponent(2, {0, SectorFamily::IZ}) == 2 * 2 - 1);
    CHECK(sector_n_exponent(2, {1, SectorFamily::IZ}) == 1);

    Rng rng(13);
    for (int k : {1, 2, 3}) {
        Complex mu = rng.complex_in_disk(1.0);
        ModelIntegralSpec spec{k, mu, 2.0, ResonancePair(1, 1)};
        Complex sigma = spec.sigma();
        CHECK(std::abs(std::pow(sigma, 2 * k) - std::exp(Complex(0.0, 2.0 * kPi) * mu)) < 1e-12);
        for (int j = 0; j < k; ++j) {
            for (int t = 0; t < 30; ++t) {
                Complex y = std::polar(1.0 + 0.999 * rng.next_double(), 2.0 * kPi * rng.next_double());
                {
                    IntersectionId iid{j, Polarity::MINUS};
                    double ang = intersection_center(k, iid) +
                                 0.95 * intersection_half_width(k) * (2.0 * rng.next_double() - 1.0);
                    Complex u = std::polar(0.2 + 1.5 * rng.next_double(), ang);
                    Complex hz = model_first_integral(spec, {j, SectorFamily::ZI}, u, y);
                    Complex hi = model_first_integral(spec, {j, SectorFamily::IZ}, u, y);
                    CHECK(std::abs(hz - sigma * hi) < 1e-9 * std::abs(hz));
                }
                {
                    IntersectionId iid{j, Polarity::PLUS};
                    double ang = intersection_center(k, iid) +
                                 0.95 * intersection_half_width(k) * (2.0 * rng.next_double() - 1.0);
                    Complex u = std::polar(0.2 + 1.5 * rng.next_double(), ang);
                    Complex hz = model_first_integral(spec, {j, SectorFamily::ZI}, u, y);
                    Complex hi = model_first_integral(spec, {(j + 1) % k, SectorFamily::IZ}, u, y);
                    CHECK(std::abs(hi - sigma * hz) < 1e-9 * std::abs(hi));
                }
            }
        }
    }
}

TEST_CASE("sectorial first integral multiplies by exp(n)") {
    ModelIntegralSpec spec{1, Complex(0.3, 0.1), 2.0, ResonancePair(1, 1)};
    SectorId zi{0, SectorFamily::ZI};
    Complex u(0.2, 0.8), y(1.2, -0.3);
    Complex h0 = model_first_integral(spec, zi, u, y);
    CHECK(std::abs(sectorial_first_integral(spec, zi, u, y, 0.0) - h0) < 1e-12 * std::abs(h0));
    Complex n(0.0, kPi);
    CHECK(std::abs(sectorial_first_integral(spec, zi, u, y, n) + h0) < 1e-10 * std::abs(h0));
    CHECK_THROWS_AS(model_first_integral(spec, {0, SectorFamily::IZ}, Complex(0.0, 1.0), y), SaddleError);
}

TEST_CASE("empirical intersection bound and adaptedness") {
    // restricted to the positive real ray: sup 1/|H0| = e^{-2c} (at u = 1, |y| -> 1)
    ModelIntegralSpec s5{1, 0.0, 5.0, ResonancePair(1, 1)};
    double best = 0.0;
    for (int i = 0; i <= 400; ++i) {
        double r = std::exp(-2.0 + 4.0 * double(i) / 400.0);
        Complex h = model_first_integral(s5, {0, SectorFamily::IZ}, Complex(r, 1e-13),
                                         Complex(1.0 + 1e-12, 0.0));
        best = std::max(best, 1.0 / std::abs(h));
    }
    CHECK(best == doctest::Approx(std::exp(-10.0)).epsilon(1e-6));

    // doubling c shrinks the wedge sup at least like e^{-2 dc * cos(max angle)}
    ModelIntegralSpec s10{1, 0.0, 10.0, ResonancePair(1, 1)};
    double b5 = empirical_intersection_bound(s5, 3000).max();
    double b10 = empirical_intersection_bound(s10, 3000).max();
    double logratio = std::log(b10 / b5);
    CHECK(logratio / (-2.0 * 5.0) == doctest::Approx(1.0).epsilon(0.1));

    // adaptedness monotone in rho and trivial for huge c
    ModelIntegralSpec s40{1, 0.0, 40.0, ResonancePair(1, 1)};
    CHECK(adaptedness_check(s40, 1.0, 0.0));
    CHECK(!adaptedness_check(s5, 1e-30, 0.0));
    CHECK(!adaptedness_check(s5, 0.0, 0.0));
}
