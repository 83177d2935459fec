#include "saddlesmith/sectors.hpp"

#include <algorithm>
#include <cmath>

namespace saddlesmith {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;

// signed angular difference in (-pi, pi]
double ang_diff(double a, double b) {
    double d = std::fmod(a - b, kTwoPi);
    if (d <= -kPi) d += kTwoPi;
    if (d > kPi) d -= kTwoPi;
    return d;
}

int mod_k(int j, int k) {
    int m = j % k;
    return m < 0 ? m + k : m;
}
} // namespace

int sector_n_exponent(int k, const SectorId& id) {
    int j = mod_k(id.j, k);
    if (id.family == SectorFamily::ZI) return 2 * j;
    return j > 0 ? 2 * j - 1 : 2 * k - 1;
}

double sector_center(int k, const SectorId& id) {
    return kPi * double(2 * sector_n_exponent(k, id) + 1) / double(2 * k);
}

double intersection_center(int k, const IntersectionId& id) {
    int j = mod_k(id.j, k);
    if (id.polarity == Polarity::MINUS) return kTwoPi * double(j) / double(k);
    return kPi * double(2 * j + 1) / double(k);
}

double sector_half_width(int k) { return 5.0 * kPi / (8.0 * double(k)); }
double intersection_half_width(int k) { return kPi / (8.0 * double(k)); }

double sector_theta(int k, const SectorId& id, Complex u) {
    if (u == Complex(0.0)) fail(ErrorKind::ZeroInput, "argument determination undefined at u = 0");
    double center = sector_center(k, id);
    return center + ang_diff(std::arg(u), center);
}

bool sector_contains(int k, const SectorId& id, Complex u) {
    if (u == Complex(0.0)) fail(ErrorKind::ZeroInput, "sector membership undefined at u = 0");
    return std::abs(ang_diff(std::arg(u), sector_center(k, id))) < sector_half_width(k);
}

bool intersection_contains(int k, const IntersectionId& id, Complex u) {
    if (u == Complex(0.0)) fail(ErrorKind::ZeroInput, "intersection membership undefined at u = 0");
    return std::abs(ang_diff(std::arg(u), intersection_center(k, id))) < intersection_half_width(k);
}

std::pair<SectorId, SectorId> intersection_sectors(int k, const IntersectionId& id) {
    int j = mod_k(id.j, k);
    if (id.polarity == Polarity::MINUS) {
        // V^-_j = S^{iz}_j (cw side) overlapping S^{zi}_j (ccw side)
        return {SectorId{j, SectorFamily::IZ}, SectorId{j, SectorFamily::ZI}};
    }
    // V^+_j = S^{zi}_j (cw) overlapping S^{iz}_{j+1} (ccw)
    return {SectorId{j, SectorFamily::ZI}, SectorId{mod_k(j + 1, k), SectorFamily::IZ}};
}

std::pair<Ray, Ray> contour_rays(int k, const IntersectionId& id, double delta) {
    double hw = intersection_half_width(k);
    if (delta < 0.0 || delta >= hw)
        fail(ErrorKind::BadOffset, "contour offset must lie in [0, pi/(8k))");
    double center = intersection_center(k, id);
    return {Ray{center - (hw - delta)}, Ray{center + (hw - delta)}};
}

Complex ModelIntegralSpec::sigma() const {
    return std::exp(Complex(0.0, 1.0) * kPi * mu / double(k));
}

Complex log_model_hat(const ModelIntegralSpec& spec, double log_abs_u, double theta) {
    Complex logu(log_abs_u, theta);
    Complex u_pow_k = std::exp(logu * double(spec.k));
    Complex u_pow_mk = std::exp(-logu * double(spec.k));
    return -spec.mu / double(spec.pq.q) * logu +
           spec.c * (u_pow_mk + u_pow_k) / double(spec.pq.q * spec.k);
}

Complex model_hat_integral(const ModelIntegralSpec& spec, Complex u) {
    if (u == Complex(0.0)) fail(ErrorKind::ZeroInput, "Hhat undefined at u = 0");
    double theta = std::arg(u); // (-pi, pi]
    if (theta < 0.0) theta += kTwoPi;
    // cut on the positive reals, limit from above: theta in [0, 2pi)
    return std::exp(log_model_hat(spec, std::log(std::abs(u)), theta));
}

Complex log_model_first_integral(const ModelIntegralSpec& spec, const SectorId& id, Complex u, Complex y) {
    if (!sector_contains(spec.k, id, u))
        fail(ErrorKind::OutOfSector, "first-integral evaluation outside the sector");
    double theta = sector_theta(spec.k, id, u);
    int n = sector_n_exponent(spec.k, id);
    Complex logsigma = Complex(0.0, 1.0) * kPi * spec.mu / double(spec.k);
    Complex logy = std::log(y) / double(spec.pq.q); // principal branch of y^{1/q}; exact for q = 1
    return double(n) * logsigma + logy + log_model_hat(spec, std::log(std::abs(u)), theta);
}

Complex model_first_integral(const ModelIntegralSpec& spec, const SectorId& id, Complex u, Complex y) {
    return std::exp(log_model_first_integral(spec, id, u, y));
}

Complex sectorial_first_integral(const ModelIntegralSpec& spec, const SectorId& id, Complex u, Complex y,
                                 Complex n_value) {
    return std::exp(log_model_first_integral(spec, id, u, y) + n_value);
}

IntersectionBound empirical_intersection_bound(const ModelIntegralSpec& spec, int samples) {
    if (samples < 1) samples = 1;
    const int k = spec.k;
    int n_ang = std::max(5, int(std::sqrt(double(samples) / double(8 * k))));
    int n_rad = std::max(7, samples / std::max(1, 2 * k * n_ang * 3));
    const double hw = intersection_half_width(k);

    IntersectionBound out;
    for (int j = 0; j < k; ++j) {
        for (Polarity pol : {Polarity::PLUS, Polarity::MINUS}) {
            IntersectionId iid{j, pol};
            auto [cw, ccw] = intersection_sectors(k, iid);
            double center = intersection_center(k, iid);
            for (int ia = 0; ia < n_ang; ++ia) {
                double frac = (n_ang == 1) ? 0.0 : (double(ia) / double(n_ang - 1) * 2.0 - 1.0);
                double ang = center + 0.999 * hw * frac;
                for (int ir = 0; ir < n_rad; ++ir) {
                    // log-spaced radii in (0, 1]; the sup sits at |u| = 1
                    double r = std::exp(-3.0 * double(n_rad - 1 - ir) / std::max(1, n_rad - 1));
                    Complex u = std::polar(r, ang);
                    for (double ay : {1.0 + 1e-9, 1.5, 2.0 - 1e-9}) {
                        for (const SectorId& sid : {cw, ccw}) {
                            double re = (log_model_first_integral(spec, sid, u, Complex(ay, 0.0))).real();
                            if (pol == Polarity::PLUS)
                                out.sup_h_plus = std::max(out.sup_h_plus, std::exp(re));
                            else
                                out.sup_inv_h_minus = std::max(out.sup_inv_h_minus, std::exp(-re));
                        }
                    }
                }
            }
        }
    }
    return out;
}

double empirical_A(const ModelIntegralSpec& spec, int samples) {
    return empirical_intersection_bound(spec, samples).max() * std::exp(spec.c / double(spec.k));
}

bool adaptedness_check(const ModelIntegralSpec& spec, double rho, double n_norm) {
    if (!(rho > 0.0)) return false;
    double bound = 2.0 * empirical_intersection_bound(spec, 4000).max() * std::exp(n_norm);
    return bound <= rho;
}

} // namespace saddlesmith
