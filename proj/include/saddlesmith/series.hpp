#ifndef SADDLESMITH_SERIES_HPP
#define SADDLESMITH_SERIES_HPP

#include <complex>
#include <map>
#include <utility>
#include <vector>

#include "saddlesmith/errors.hpp"

namespace saddlesmith {

using Complex = std::complex<double>;

/// Coprime pair (p,q) of the resonance; the eigenratio is -p/q and u = x^q y^p.
struct ResonancePair {
    int p = 1;
    int q = 1;

    ResonancePair() = default;
    ResonancePair(int p_, int q_);
};

/// Truncated bivariate power series over C, truncation by total degree.
/// Stored keys never exceed the truncation order; arithmetic truncates results
/// to the minimum of the operand orders.
class BiSeries {
public:
    using Key = std::pair<int, int>; // (a,b) exponent of x^a y^b
    using Map = std::map<Key, Complex>;

    explicit BiSeries(int truncation_order = 0);

    static BiSeries constant(Complex value, int order);
    static BiSeries monomial(int a, int b, Complex coef, int order);
    static BiSeries zero(int order) { return BiSeries(order); }

    int order() const { return order_; }
    const Map& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    Complex coef(int a, int b) const;
    void set_coef(int a, int b, Complex value); // drops terms beyond order or below tiny floor
    void add_coef(int a, int b, Complex value);

    Complex constant_term() const { return coef(0, 0); }
    double max_abs_coef() const;

    BiSeries truncated(int new_order) const;

    BiSeries operator+(const BiSeries& rhs) const;
    BiSeries operator-(const BiSeries& rhs) const;
    BiSeries operator*(const BiSeries& rhs) const;
    BiSeries operator*(Complex scalar) const;
    BiSeries operator-() const { return *this * Complex(-1.0, 0.0); }
    BiSeries& operator+=(const BiSeries& rhs) { return *this = *this + rhs; }
    BiSeries& operator-=(const BiSeries& rhs) { return *this = *this - rhs; }

    BiSeries dx() const; // partial derivative in the first variable
    BiSeries dy() const;

    /// Multiplicative inverse of a unit, exact up to the truncation order.
    BiSeries inverse_unit() const;

    Complex eval(Complex x, Complex y) const;

    /// Largest |coef| within one total degree; used for relative zero tests.
    double degree_scale(int degree) const;

private:
    int order_;
    Map terms_;
};

BiSeries operator*(Complex scalar, const BiSeries& s);

/// x^a y^b -> coefficient map composition f(X, Y) for series X, Y.
/// Requires X(0,0) = Y(0,0) = 0 so the composition is well defined on truncations.
BiSeries compose(const BiSeries& f, const BiSeries& X, const BiSeries& Y);

/// exp of a series with zero constant term.
BiSeries exp_series(const BiSeries& s);

struct PlanarVectorField {
    BiSeries a; // coefficient of d/dx
    BiSeries b; // coefficient of d/dy
    ResonancePair pq;

    PlanarVectorField(BiSeries a_, BiSeries b_, ResonancePair pq_);
    int order() const { return a.order(); }
};

/// Lie derivative z . f = A df/dx + B df/dy, truncated.
BiSeries lie_derivative(const PlanarVectorField& z, const BiSeries& f);

BiSeries multiply(const BiSeries& f, const BiSeries& g);

/// Inverse of a unit series; ZeroConstantTerm if f(0,0) = 0.
BiSeries invert_unit(const BiSeries& f);

/// Pi_k: extracts sum_{l<=k} coef(x^{ql} y^{pl}) u^l as a dense coefficient vector
/// (index l). TruncationTooLow if the truncation order cannot see u^k.
std::vector<Complex> resonant_projection(const BiSeries& f, const ResonancePair& pq, int k);

/// Series in (u,y) -> series in (x,y) by u = x^q y^p. The input uses exponent
/// pairs (a,b) = (u-power, y-power).
BiSeries substitute_resonant(const BiSeries& g, const ResonancePair& pq, int out_order);

/// Pullback of z under a (formal) change of variables Phi = (X, Y), i.e.
/// DPhi^{-1} (z o Phi). Phi must be invertible: linear part nondegenerate.
PlanarVectorField pullback(const PlanarVectorField& z, const BiSeries& X, const BiSeries& Y);

/// Pullback of z under the time-n flow of Y = -p x d/dx + q y d/dy:
/// (x,y) -> (x e^{-pn}, y e^{qn}). NonvanishingTimeGerm if n(0,0) != 0.
PlanarVectorField flow_conjugate(const PlanarVectorField& z, const BiSeries& n);

/// Evaluate a dense u-polynomial (index = power) at u.
Complex eval_poly(const std::vector<Complex>& coefs, Complex u);

/// 1 / P(u) as a truncated u-power series of length len; P[0] != 0 required.
std::vector<Complex> invert_poly_series(const std::vector<Complex>& P, int len);

} // namespace saddlesmith

#endif
