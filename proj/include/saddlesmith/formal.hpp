#ifndef SADDLESMITH_FORMAL_HPP
#define SADDLESMITH_FORMAL_HPP

#include <vector>

#include "saddlesmith/series.hpp"

namespace saddlesmith {

/// Formal modulus (k, mu, P): order, residue-type invariant, temporal polynomial.
struct FormalModulus {
    int k = 1;
    Complex mu = 0.0;
    std::vector<Complex> p_poly = {Complex(1.0)}; // coefficients in u, degree <= k, P(0) != 0

    void validate() const;
};

/// A function y * sum_{n=1}^{2k} u^n f_n(y) with f_n holomorphic on |y| < 2,
/// stored as Taylor coefficient lists.
struct CStarFunction {
    int k = 1;
    std::vector<std::vector<Complex>> fn; // size 2k, fn[n-1] = Taylor coefficients of f_n

    static CStarFunction zero(int k);
    bool is_zero(double tol = 0.0) const;
    Complex eval_fn(int n, Complex y) const;           // f_n(y), 1 <= n <= 2k
    Complex eval(Complex u, Complex y) const;          // y sum u^n f_n(y)
    Complex eval_du(Complex u, Complex y) const;       // d/du of the above
    Complex eval_dy(Complex u, Complex y) const;       // d/dy
    BiSeries to_xy_series(const ResonancePair& pq, int order) const;
    BiSeries to_uy_series(int order) const;            // variables (u,y)
    double max_abs_coef() const;
};

/// Fully specified orbital/temporal normal form data Z_{G,R} (X_R when g is zero).
struct OrbitalNormalForm {
    ResonancePair pq;
    FormalModulus modulus;
    double c = 2.0; // twist, > 1
    CStarFunction r; // orbital part R
    CStarFunction g; // temporal part G

    void validate() const;
    int k() const { return modulus.k; }
};

/// Default truncation bound used throughout: (p+q)(2k+2)+4.
int default_truncation(const ResonancePair& pq, int k);

/// X0 = u^k x d/dx + (c(1-u^{2k}) + mu u^k) Y, Y = -p x d/dx + q y d/dy.
PlanarVectorField build_model_field(const ResonancePair& pq, int k, Complex mu, double c, int trunc);

/// Z_{G,R} = P/(1+PG) X_R with X_R = X0 + R Y.
PlanarVectorField build_normal_form(const OrbitalNormalForm& nf, int trunc);

/// X_R = X0 + R Y (temporal part ignored).
PlanarVectorField build_orbital_field(const OrbitalNormalForm& nf, int trunc);

struct PoincareDulacStep {
    int degree = 0;
    BiSeries hx, hy; // change of variables (x,y) -> (x + hx, y + hy)
};

struct NormalizationResult {
    int k = 0;
    Complex mu = 0.0;
    Complex time_scale = 0.0;            // t with linear part t Y
    std::vector<Complex> p_poly;         // temporal polynomial of the reduced unit
    std::vector<PoincareDulacStep> steps;
    PlanarVectorField reduced{BiSeries(0), BiSeries(0), ResonancePair()}; // resonant-only field
};

/// Degree-by-degree Poincare-Dulac elimination of non-resonant terms; returns
/// (k, mu) and the coordinate changes. NotResonantSaddle if the linear part is
/// not a p:q saddle (diagonal, eigenratio -p/q); ResonantOrderExceedsTruncation
/// if every resonant x d/dx-coefficient vanishes up to the truncation order.
NormalizationResult formal_orbital_modulus(const PlanarVectorField& z);

/// Unique P with deg <= k, P(0) != 0 and Pi_k(1/U - 1/P) = 0.
std::vector<Complex> formal_temporal_modulus(const BiSeries& u_unit, const ResonancePair& pq, int k);

/// Unique formal F with X_R . F = g and F(0,0) = 0, up to truncation.
/// ObstructedMonomial(n) if g carries u^n, n <= k, above tolerance.
BiSeries formal_cohomological_solve(const PlanarVectorField& x_r, const BiSeries& g);

/// Internal knob used by tests to confirm order independence of the solve.
BiSeries formal_cohomological_solve_ordered(const PlanarVectorField& x_r, const BiSeries& g,
                                            bool descending_within_degree);

/// Coefficient data of R*(z,y) = -z^{2k} R(1/z, y). Input and output are lists
/// indexed by the power of the (u or z) variable, 0..2k, of y-Taylor lists;
/// a CStarFunction R corresponds to powers 1..2k. Exact involution.
std::vector<std::vector<Complex>> involution_transform(const std::vector<std::vector<Complex>>& lists);
std::vector<std::vector<Complex>> involution_lists(const CStarFunction& r);

/// Dual 1-form data of the (u,y)-reduced foliation: (A, B) with
/// omega = A(u,y) dy + B(u,y) du, sign fixed so the pairing with the
/// pushforward of X_R vanishes identically.
std::pair<BiSeries, BiSeries> saddle_node_form(const OrbitalNormalForm& nf, int order);

/// Pushforward of X_R to (u,y): (X_R.u, X_R.y) = (q u^{k+1}, q y M(u,y)).
std::pair<BiSeries, BiSeries> pushforward_uy(const OrbitalNormalForm& nf, int order);

/// Membership of a monomial x^a y^b in the C_* cone: a = q n, 1 <= n <= 2k,
/// b >= p n + 1.
bool in_cstar_cone(int a, int b, const ResonancePair& pq, int k);

struct CStarReduction {
    BiSeries r{0};                  // reduced multiplier, inside the C_* cone
    double residual = 0.0;          // non-C_* mass left after the sweeps
    double obstructed_residue = 0.0; // dropped resonant u^n, n <= k content
    int sweeps = 0;
    std::vector<BiSeries> gauge_times; // flow times of Y applied, in order
};

/// Iteratively conjugate X_0 + R Y by flows of Y to push every monomial of R
/// into the C_* cone. The removable monomials are non-resonant (or resonant of
/// order k < n <= 2k), so the cohomological solves are unobstructed; resonant
/// content of order <= k cannot be moved and is dropped and reported.
CStarReduction reduce_to_cstar(const BiSeries& r_in, const ResonancePair& pq, int k, Complex mu,
                               double c, int trunc);

/// g composed with the gauge flows of a reduction, in application order.
BiSeries co_transport(const BiSeries& g, const std::vector<BiSeries>& gauge_times,
                      const ResonancePair& pq, int trunc);

/// Restriction of a cone series to C_* coefficient lists.
CStarFunction cstar_lists_from_series(const BiSeries& r, const ResonancePair& pq, int k);

/// Pullback by (x,y) -> (x + hx, y + hy) with val(h) >= 2 (Taylor increments).
PlanarVectorField pullback_near_identity(const PlanarVectorField& z, const BiSeries& hx, const BiSeries& hy);

/// Pullback by the diagonal map (x,y) -> (alpha x, beta y).
PlanarVectorField diagonal_conjugate(const PlanarVectorField& z, Complex alpha, Complex beta);

} // namespace saddlesmith

#endif
