#ifndef SADDLESMITH_SECTORS_HPP
#define SADDLESMITH_SECTORS_HPP

#include <utility>
#include <vector>

#include "saddlesmith/series.hpp"

namespace saddlesmith {

enum class SectorFamily { ZI, IZ };
enum class Polarity { PLUS, MINUS };

/// One of the 2k infinite sectors in u-space.
struct SectorId {
    int j = 0;
    SectorFamily family = SectorFamily::ZI;
};

/// One of the 2k overlap wedges between consecutive sectors.
struct IntersectionId {
    int j = 0;
    Polarity polarity = Polarity::MINUS;
};

/// sigma-exponent of the sector (Def. 3.1 table): 2j for ZI, 2j-1 for IZ (j>0),
/// 2k-1 for IZ j=0.
int sector_n_exponent(int k, const SectorId& id);

/// Central direction of a sector: pi(2n+1)/(2k) with n the sigma-exponent.
double sector_center(int k, const SectorId& id);

/// Central direction of an intersection wedge: 2 pi j / k (MINUS), (2j+1) pi / k (PLUS).
double intersection_center(int k, const IntersectionId& id);

/// Half-openings: sectors 5pi/(8k), intersection wedges pi/(8k).
double sector_half_width(int k);
double intersection_half_width(int k);

/// The continuous argument determination attached to a sector: the value in
/// [center - 5pi/8k, center + 5pi/8k] congruent to arg u. ZeroInput on u = 0.
double sector_theta(int k, const SectorId& id, Complex u);

bool sector_contains(int k, const SectorId& id, Complex u);
bool intersection_contains(int k, const IntersectionId& id, Complex u);

/// The two sectors adjacent to a wedge, listed (clockwise, counterclockwise).
std::pair<SectorId, SectorId> intersection_sectors(int k, const IntersectionId& id);

struct Ray {
    double angle = 0.0; // direction, oriented 0 -> infinity
    Complex point(double r) const { return std::polar(r, angle); }
};

/// Rays bounding an intersection wedge, pulled inside by delta:
/// {center - (pi/8k - delta), center + (pi/8k - delta)}. BadOffset unless
/// 0 <= delta < pi/(8k).
std::pair<Ray, Ray> contour_rays(int k, const IntersectionId& id, double delta);

/// Parameters of the model first-integrals H_0 = sigma^n y Hhat(u).
struct ModelIntegralSpec {
    int k = 1;
    Complex mu = 0.0;
    double c = 2.0;
    ResonancePair pq;

    Complex sigma() const; // exp(i pi mu / k)
};

/// Hhat(u) = u^{-mu/q} exp(c(u^{-k}+u^k)/(qk)) with arg u in (0, 2pi),
/// limit from above on the positive real cut.
Complex model_hat_integral(const ModelIntegralSpec& spec, Complex u);

/// log Hhat with an explicit argument determination theta = arg u.
Complex log_model_hat(const ModelIntegralSpec& spec, double log_abs_u, double theta);

/// H_0^{j,#}(u,y) = sigma^n y^{1/q} Hhat_theta(u) with the sector determination.
/// OutOfSector if u is not in the sector.
Complex model_first_integral(const ModelIntegralSpec& spec, const SectorId& id, Complex u, Complex y);

/// log of the model first-integral (y != 0), sector determination.
Complex log_model_first_integral(const ModelIntegralSpec& spec, const SectorId& id, Complex u, Complex y);

/// H_N = H_0 exp(n_value).
Complex sectorial_first_integral(const ModelIntegralSpec& spec, const SectorId& id, Complex u, Complex y,
                                 Complex n_value);

struct IntersectionBound {
    double sup_h_plus = 0.0;      // sup of |H_0| over the V^+ fibers
    double sup_inv_h_minus = 0.0; // sup of |H_0|^{-1} over the V^- fibers
    double max() const { return sup_h_plus > sup_inv_h_minus ? sup_h_plus : sup_inv_h_minus; }
};

/// Grid sup of |H_0|^{+-1} over the intersection fibers with |u| <= 1 and
/// 1 < |y| < 2 (Def. 2.3(3) ranges). `samples` caps the total grid size.
IntersectionBound empirical_intersection_bound(const ModelIntegralSpec& spec, int samples);

/// Empirical constant A with sup <= A e^{-c/k}.
double empirical_A(const ModelIntegralSpec& spec, int samples);

/// 2 A_emp e^{-c/k} e^{n_norm} <= rho (closed inequality).
bool adaptedness_check(const ModelIntegralSpec& spec, double rho, double n_norm);

} // namespace saddlesmith

#endif
