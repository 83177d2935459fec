#ifndef SADDLESMITH_CAUCHY_HEINE_HPP
#define SADDLESMITH_CAUCHY_HEINE_HPP

#include <array>
#include <optional>
#include <vector>

#include "saddlesmith/formal.hpp"
#include "saddlesmith/sectors.hpp"
#include "saddlesmith/series.hpp"

namespace saddlesmith {

/// Orbital necklace input: order k, residue mu, and the logarithmic data
/// phi^+-_j as coefficient lists. phi_plus[j][m] is the coefficient of h^{m+1}
/// (germ at 0 with no constant term); phi_minus[j][m] the coefficient of
/// w^{m+1}, w = 1/h (germ at infinity vanishing there). rho_* are the radii of
/// the disks on which the germs are used.
struct NecklaceData {
    int k = 1;
    Complex mu = 0.0;
    std::vector<std::vector<Complex>> phi_plus;
    std::vector<double> rho_plus;
    std::vector<std::vector<Complex>> phi_minus;
    std::vector<double> rho_minus;

    static NecklaceData zero(int k, Complex mu);
    void validate() const;
    bool is_zero(double tol = 0.0) const;
    Complex eval_plus(int j, Complex h) const;
    Complex eval_plus_deriv(int j, Complex h) const;
    Complex eval_minus(int j, Complex w) const; // as a function of w = 1/h
    Complex eval_minus_deriv(int j, Complex w) const;
    /// sup |phi|/|local coordinate| over the stated disk, bounded by coefficient sums.
    double primed_norm() const;
    double min_radius() const;
};

struct GridConfig {
    double delta = 0.098174770424681; // pi/32
    int n_rad = 96;
    double r_min = 0.02;
    double r_max = 50.0;
    int n_y = 32;            // nodes per y-circle
    double y_outer = 1.5;    // working circle
    double y_inner = 0.5;    // inner circle tracked for the ZI read-off
};

/// Node-sampled sectorial data: N and dN/dy for both sectors on their two
/// evaluation rays (which double as the quadrature contours), for every y node.
/// Sector 0 (ZI) lives on the V+ rays, sector 1 (IZ) on the V- rays.
class SectorialGrid {
public:
    SectorialGrid() = default;
    static SectorialGrid zero(const ModelIntegralSpec& mspec, const GridConfig& cfg);

    const ModelIntegralSpec& mspec() const { return mspec_; }
    const GridConfig& config() const { return cfg_; }
    int n_rad() const { return cfg_.n_rad; }
    int n_y_total() const { return int(y_nodes_.size()); }
    const std::vector<Complex>& y_nodes() const { return y_nodes_; }
    const std::vector<double>& r_nodes() const { return r_nodes_; }
    const std::vector<double>& weights() const { return weights_; }

    /// u-plane contour rays: 0 V- cw, 1 V- ccw, 2 V+ cw, 3 V+ ccw.
    double ray_angle(int ray) const { return ray_angles_[std::size_t(ray)]; }
    /// Argument determination carried by the integrand sector on a ray.
    double ray_theta(int ray) const { return ray_thetas_[std::size_t(ray)]; }

    // sector: 0 = ZI, 1 = IZ; slot: 0 = cw ray, 1 = ccw ray of its wedge pair
    int global_ray(int sector, int slot) const { return sector == 0 ? 2 + slot : slot; }
    std::size_t index(int sector, int slot, int iy, int ir) const;

    Complex n_at(int sector, int slot, int iy, int ir) const { return nval_[index(sector, slot, iy, ir)]; }
    Complex dy_at(int sector, int slot, int iy, int ir) const { return dval_[index(sector, slot, iy, ir)]; }
    void set(int sector, int slot, int iy, int ir, Complex n, Complex d);

    double sup_norm() const;
    double sup_dy_norm() const;
    double distance(const SectorialGrid& other) const;

private:
    ModelIntegralSpec mspec_;
    GridConfig cfg_;
    std::vector<Complex> y_nodes_;
    std::vector<double> r_nodes_, weights_;
    std::array<double, 4> ray_angles_{}, ray_thetas_{};
    std::vector<Complex> nval_, dval_;
};

/// Jump data fed to the transform: (f^-, f^+) with radii, k = 1.
struct JumpData {
    std::vector<Complex> minus; // coefficients of w^{m+1}
    std::vector<Complex> plus;  // coefficients of h^{m+1}
    double rho_minus = 1.0;
    double rho_plus = 1.0;

    static JumpData from_necklace(const NecklaceData& f);
    static JumpData cousin_from_necklace(const NecklaceData& f); // (phi^-, -phi^+)
    Complex eval_minus(Complex w) const;
    Complex eval_minus_deriv(Complex w) const;
    Complex eval_plus(Complex h) const;
    Complex eval_plus_deriv(Complex h) const;
};

struct TransformValue {
    Complex value{};
    Complex dy{};  // d/dy
    Complex du{};  // d/du (only when requested)
};

/// Values of Sigma(N, f) (and tracked derivatives) at one point of a sector.
/// The grid supplies N; f supplies the jump data. Quadrature runs over the
/// grid's own nodes; evaluation near a contour switches to the other ray of
/// the wedge plus the exact residue correction.
TransformValue ch_transform_point(const SectorialGrid& grid, const JumpData& f, const SectorId& id,
                                  Complex u, int iy, bool need_du = false);

/// Spec-level convenience: values of Sigma(N, f) at the given (u, sector)
/// pairs for the y node iy.
std::vector<Complex> ch_transform(const SectorialGrid& grid, const NecklaceData& f,
                                  const std::vector<std::pair<SectorId, Complex>>& eval_points, int iy);

/// One fixed-point step: new grid = Sigma(grid, (phi^-, -phi^+)), so that the
/// fixed point solves the Cousin system. NotInUnitBall if the input leaves the
/// unit ball; NotAdapted when leaf-space values leave the phi disks.
SectorialGrid lambda_step(const SectorialGrid& grid, const NecklaceData& necklace);

/// Adaptive twist choice: start from the self-map estimate, double until the
/// adaptedness margin and the measured Lipschitz ratio pass. TwistSearchFailed
/// after 12 doublings.
double choose_twist(const NecklaceData& necklace, const GridConfig& cfg = GridConfig(), unsigned seed = 1);

/// Measured Lipschitz ratio of Lambda on random unit-ball grid pairs.
double measured_lipschitz(const NecklaceData& necklace, double c, const GridConfig& cfg, unsigned seed,
                          int pairs);

struct RealizeReport {
    double c = 0.0;
    int iterations = 0;
    std::vector<double> step_norms; // ||N_{m+1} - N_m|| per iteration
    double jump_residual = 0.0;
    double gluing_residual = 0.0;
    double g0_abs = 0.0;            // |u^0 coefficient| of the fitted Q
    double fn0_abs = 0.0;           // max |g_n(0)|
    double overfit_abs = 0.0;       // extended-degree (n > 2k) coefficients
    double negative_mode_abs = 0.0; // relative negative Fourier modes
    double fit_residual = 0.0;
    double image_radius_minus = 0.0; // measured radius of the 1/H image on V-
    double image_radius_plus = 0.0;  // measured radius of the H image on V+
    double n_sup = 0.0;
};

struct RealizeResult {
    OrbitalNormalForm nf;
    SectorialGrid grid;
    RealizeReport report;
};

struct RealizeOptions {
    GridConfig grid;
    double c_override = 0.0; // > 0 forces the twist
    double fixpoint_tol = 1e-10;
    int max_iterations = 60;
    unsigned seed = 1;
    bool check_contraction = true;
};

/// Full orbital realization: fixed point of Lambda from the zero grid, then
/// extraction of R = -(u^{k+1} N_u + M0 y N_y)/(1 + y N_y) as an element of C_*.
RealizeResult realize(const NecklaceData& necklace, const RealizeOptions& opts = RealizeOptions());

/// Max residual of the Cousin identities over sampled intersection points.
double jump_residual(const SectorialGrid& grid, const NecklaceData& necklace, int samples);

/// Point values of the sectorial solution N and derivatives from the converged
/// grid via the fixed-point identity N = Sigma(N, (phi^-, -phi^+)). y is given
/// by its grid node index (the iteration is parametric in y).
TransformValue evaluate_solution(const SectorialGrid& grid, const NecklaceData& necklace,
                                 const SectorId& id, Complex u, int iy, bool need_du = false);

/// Natural section of the period operator: G = X_R . Sigma(N, (f^-, -f^+))
/// extracted in C_* form. `realized_grid` is the converged Cousin grid of nf.
struct SectionResult {
    CStarFunction g;
    double fit_residual = 0.0;
    double overfit_abs = 0.0;
    double g0_abs = 0.0;
    double negative_mode_abs = 0.0;
};
SectionResult natural_section(const OrbitalNormalForm& nf, const SectorialGrid& realized_grid,
                              const NecklaceData& necklace, const NecklaceData& target);

} // namespace saddlesmith

#endif
