#include "saddlesmith/series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace saddlesmith {

namespace {

// Coefficients below this absolute floor are dropped from the sparse maps.
// It sits far under every tolerance used by the analytic layers.
constexpr double kStoreFloor = 1e-300;

int checked_gcd(int a, int b) { return std::gcd(a, b); }

// dense triangular packing of (a,b), a+b <= D
inline std::size_t tri_index(int a, int b) {
    int d = a + b;
    return std::size_t(d) * (d + 1) / 2 + b;
}
inline std::size_t tri_size(int D) { return std::size_t(D + 1) * (D + 2) / 2; }

} // namespace

ResonancePair::ResonancePair(int p_, int q_) : p(p_), q(q_) {
    if (p < 1 || q < 1) fail(ErrorKind::ParseError, "resonance pair entries must be positive");
    if (checked_gcd(p, q) != 1) fail(ErrorKind::ParseError, "resonance pair must be coprime");
}

BiSeries::BiSeries(int truncation_order) : order_(truncation_order) {
    if (order_ < 0) fail(ErrorKind::TruncationTooLow, "negative truncation order");
}

BiSeries BiSeries::constant(Complex value, int order) {
    BiSeries s(order);
    s.set_coef(0, 0, value);
    return s;
}

BiSeries BiSeries::monomial(int a, int b, Complex coef, int order) {
    BiSeries s(order);
    s.set_coef(a, b, coef);
    return s;
}

Complex BiSeries::coef(int a, int b) const {
    auto it = terms_.find({a, b});
    return it == terms_.end() ? Complex(0.0) : it->second;
}

void BiSeries::set_coef(int a, int b, Complex value) {
    if (a < 0 || b < 0) fail(ErrorKind::ParseError, "negative exponent");
    if (a + b > order_) return; // beyond truncation: unrepresented
    if (std::abs(value) < kStoreFloor) {
        terms_.erase({a, b});
    } else {
        terms_[{a, b}] = value;
    }
}

void BiSeries::add_coef(int a, int b, Complex value) { set_coef(a, b, coef(a, b) + value); }

double BiSeries::max_abs_coef() const {
    double m = 0.0;
    for (const auto& [k, v] : terms_) m = std::max(m, std::abs(v));
    return m;
}

double BiSeries::degree_scale(int degree) const {
    double m = 0.0;
    for (const auto& [k, v] : terms_)
        if (k.first + k.second == degree) m = std::max(m, std::abs(v));
    return m;
}

BiSeries BiSeries::truncated(int new_order) const {
    BiSeries out(new_order);
    for (const auto& [k, v] : terms_)
        if (k.first + k.second <= new_order) out.terms_[k] = v;
    return out;
}

BiSeries BiSeries::operator+(const BiSeries& rhs) const {
    int ord = std::min(order_, rhs.order_);
    BiSeries out(ord);
    for (const auto& [k, v] : terms_)
        if (k.first + k.second <= ord) out.terms_[k] = v;
    for (const auto& [k, v] : rhs.terms_) {
        if (k.first + k.second > ord) continue;
        auto it = out.terms_.find(k);
        Complex sum = (it == out.terms_.end() ? v : it->second + v);
        if (std::abs(sum) < kStoreFloor) {
            if (it != out.terms_.end()) out.terms_.erase(it);
        } else {
            out.terms_[k] = sum;
        }
    }
    return out;
}

BiSeries BiSeries::operator-(const BiSeries& rhs) const { return *this + rhs * Complex(-1.0); }

BiSeries BiSeries::operator*(const BiSeries& rhs) const {
    int ord = std::min(order_, rhs.order_);
    BiSeries out(ord);
    if (terms_.empty() || rhs.terms_.empty()) return out;

    // Sparse path when few cross terms, dense convolution otherwise.
    std::size_t sparse_cost = terms_.size() * rhs.terms_.size();
    std::size_t dense_cost = tri_size(ord) * 8 + tri_size(ord) * tri_size(ord) / 4;
    if (sparse_cost <= dense_cost || ord <= 4) {
        for (const auto& [ka, va] : terms_) {
            if (ka.first + ka.second > ord) continue;
            for (const auto& [kb, vb] : rhs.terms_) {
                int a = ka.first + kb.first, b = ka.second + kb.second;
                if (a + b > ord) continue;
                out.add_coef(a, b, va * vb);
            }
        }
        return out;
    }

    std::vector<Complex> da(tri_size(ord)), db(tri_size(ord)), dc(tri_size(ord));
    for (const auto& [k, v] : terms_)
        if (k.first + k.second <= ord) da[tri_index(k.first, k.second)] = v;
    for (const auto& [k, v] : rhs.terms_)
        if (k.first + k.second <= ord) db[tri_index(k.first, k.second)] = v;
    for (int d1 = 0; d1 <= ord; ++d1) {
        for (int b1 = 0; b1 <= d1; ++b1) {
            Complex va = da[std::size_t(d1) * (d1 + 1) / 2 + b1];
            if (va == Complex(0.0)) continue;
            int a1 = d1 - b1;
            for (int d2 = 0; d2 + d1 <= ord; ++d2) {
                std::size_t base2 = std::size_t(d2) * (d2 + 1) / 2;
                std::size_t baseo = std::size_t(d1 + d2) * (d1 + d2 + 1) / 2 + b1;
                for (int b2 = 0; b2 <= d2; ++b2) {
                    Complex vb = db[base2 + b2];
                    if (vb == Complex(0.0)) continue;
                    dc[baseo + b2] += va * vb;
                }
            }
            (void)a1;
        }
    }
    for (int d = 0; d <= ord; ++d)
        for (int b = 0; b <= d; ++b) {
            Complex v = dc[std::size_t(d) * (d + 1) / 2 + b];
            if (std::abs(v) >= kStoreFloor) out.terms_[{d - b, b}] = v;
        }
    return out;
}

BiSeries BiSeries::operator*(Complex scalar) const {
    BiSeries out(order_);
    if (scalar == Complex(0.0)) return out;
    for (const auto& [k, v] : terms_) out.terms_[k] = v * scalar;
    return out;
}

BiSeries operator*(Complex scalar, const BiSeries& s) { return s * scalar; }

BiSeries BiSeries::dx() const {
    BiSeries out(order_);
    for (const auto& [k, v] : terms_)
        if (k.first > 0) out.terms_[{k.first - 1, k.second}] = v * double(k.first);
    return out;
}

BiSeries BiSeries::dy() const {
    BiSeries out(order_);
    for (const auto& [k, v] : terms_)
        if (k.second > 0) out.terms_[{k.first, k.second - 1}] = v * double(k.second);
    return out;
}

BiSeries BiSeries::inverse_unit() const {
    Complex c0 = constant_term();
    if (std::abs(c0) == 0.0) fail(ErrorKind::ZeroConstantTerm, "cannot invert a series vanishing at the origin");
    // g = (1/c0) sum_m (-(f - c0)/c0)^m
    BiSeries rest = (*this - BiSeries::constant(c0, order_)) * (Complex(-1.0) / c0);
    BiSeries out = BiSeries::constant(1.0, order_);
    BiSeries power = BiSeries::constant(1.0, order_);
    for (int m = 1; m <= order_; ++m) {
        power = power * rest;
        if (power.empty()) break;
        out += power;
    }
    return out * (Complex(1.0) / c0);
}

Complex BiSeries::eval(Complex x, Complex y) const {
    // Horner over x-degree groups keeps this reasonably stable for small |x|,|y|.
    Complex total(0.0);
    std::vector<Complex> ypow(std::size_t(order_) + 1);
    ypow[0] = Complex(1.0);
    for (int m = 1; m <= order_; ++m) ypow[std::size_t(m)] = ypow[std::size_t(m - 1)] * y;
    Complex xpow(1.0);
    int cur_a = 0;
    // terms_ is sorted by (a,b)
    auto it = terms_.begin();
    while (it != terms_.end()) {
        int a = it->first.first;
        while (cur_a < a) {
            xpow *= x;
            ++cur_a;
        }
        Complex row(0.0);
        while (it != terms_.end() && it->first.first == a) {
            row += it->second * ypow[std::size_t(it->first.second)];
            ++it;
        }
        total += xpow * row;
    }
    return total;
}

BiSeries compose(const BiSeries& f, const BiSeries& X, const BiSeries& Y) {
    int ord = std::min({f.order(), X.order(), Y.order()});
    if (std::abs(X.constant_term()) != 0.0 || std::abs(Y.constant_term()) != 0.0)
        fail(ErrorKind::ParseError, "composition requires maps vanishing at the origin");
    // cache Y powers, Horner over x-degrees
    int amax = 0, bmax = 0;
    for (const auto& [k, v] : f.terms()) {
        amax = std::max(amax, k.first);
        bmax = std::max(bmax, k.second);
    }
    std::vector<BiSeries> ypow;
    ypow.reserve(std::size_t(bmax) + 1);
    ypow.push_back(BiSeries::constant(1.0, ord));
    for (int b = 1; b <= bmax; ++b) ypow.push_back(ypow.back() * Y);

    // rows g_a(Y) = sum_b f_{a,b} Y^b, then Horner: ((g_amax X + g_{amax-1}) X + ...)
    std::vector<BiSeries> rows(std::size_t(amax) + 1, BiSeries::zero(ord));
    for (const auto& [k, v] : f.terms()) rows[std::size_t(k.first)] += ypow[std::size_t(k.second)] * v;
    BiSeries acc = rows[std::size_t(amax)];
    for (int a = amax - 1; a >= 0; --a) acc = acc * X + rows[std::size_t(a)];
    return acc.truncated(ord);
}

BiSeries exp_series(const BiSeries& s) {
    if (std::abs(s.constant_term()) != 0.0)
        fail(ErrorKind::ParseError, "exp_series requires zero constant term");
    BiSeries out = BiSeries::constant(1.0, s.order());
    BiSeries power = BiSeries::constant(1.0, s.order());
    double fact = 1.0;
    for (int m = 1; m <= s.order(); ++m) {
        power = power * s;
        if (power.empty()) break;
        fact *= double(m);
        out += power * Complex(1.0 / fact);
    }
    return out;
}

PlanarVectorField::PlanarVectorField(BiSeries a_, BiSeries b_, ResonancePair pq_)
    : a(std::move(a_)), b(std::move(b_)), pq(pq_) {
    if (a.order() != b.order()) fail(ErrorKind::TruncationTooLow, "vector field components must share a truncation order");
}

BiSeries lie_derivative(const PlanarVectorField& z, const BiSeries& f) {
    return z.a * f.dx() + z.b * f.dy();
}

BiSeries multiply(const BiSeries& f, const BiSeries& g) { return f * g; }

BiSeries invert_unit(const BiSeries& f) { return f.inverse_unit(); }

std::vector<Complex> resonant_projection(const BiSeries& f, const ResonancePair& pq, int k) {
    if (f.order() < (pq.p + pq.q) * k)
        fail(ErrorKind::TruncationTooLow, "truncation order below (p+q)k cannot see u^k");
    std::vector<Complex> out(std::size_t(k) + 1, Complex(0.0));
    for (int l = 0; l <= k; ++l) out[std::size_t(l)] = f.coef(pq.q * l, pq.p * l);
    return out;
}

BiSeries substitute_resonant(const BiSeries& g, const ResonancePair& pq, int out_order) {
    BiSeries out(out_order);
    for (const auto& [k, v] : g.terms()) {
        int upow = k.first, ypow = k.second;
        int a = pq.q * upow;
        int b = pq.p * upow + ypow;
        if (a + b > out_order)
            fail(ErrorKind::TruncationTooLow, "substituted monomial exceeds the output truncation order");
        out.add_coef(a, b, v);
    }
    return out;
}

PlanarVectorField pullback(const PlanarVectorField& z, const BiSeries& X, const BiSeries& Y) {
    int ord = std::min({z.order(), X.order(), Y.order()});
    BiSeries ax = compose(z.a.truncated(ord), X, Y);
    BiSeries by = compose(z.b.truncated(ord), X, Y);
    BiSeries j11 = X.dx().truncated(ord), j12 = X.dy().truncated(ord);
    BiSeries j21 = Y.dx().truncated(ord), j22 = Y.dy().truncated(ord);
    BiSeries det = j11 * j22 - j12 * j21;
    BiSeries inv_det = det.inverse_unit();
    BiSeries na = (j22 * ax - j12 * by) * inv_det;
    BiSeries nb = (j11 * by - j21 * ax) * inv_det;
    return PlanarVectorField(na, nb, z.pq);
}

PlanarVectorField flow_conjugate(const PlanarVectorField& z, const BiSeries& n) {
    if (std::abs(n.constant_term()) != 0.0)
        fail(ErrorKind::NonvanishingTimeGerm, "flow time germ must vanish at the origin");
    int ord = std::min(z.order(), n.order());
    BiSeries nt = n.truncated(ord);
    BiSeries x_mon = BiSeries::monomial(1, 0, 1.0, ord);
    BiSeries y_mon = BiSeries::monomial(0, 1, 1.0, ord);
    BiSeries X = x_mon * exp_series(nt * Complex(double(-z.pq.p)));
    BiSeries Y = y_mon * exp_series(nt * Complex(double(z.pq.q)));
    return pullback(z, X, Y);
}

Complex eval_poly(const std::vector<Complex>& coefs, Complex u) {
    Complex acc(0.0);
    for (auto it = coefs.rbegin(); it != coefs.rend(); ++it) acc = acc * u + *it;
    return acc;
}

std::vector<Complex> invert_poly_series(const std::vector<Complex>& P, int len) {
    if (P.empty() || std::abs(P[0]) == 0.0)
        fail(ErrorKind::ZeroConstantTerm, "polynomial with zero constant term has no series inverse");
    std::vector<Complex> inv(std::size_t(len), Complex(0.0));
    inv[0] = Complex(1.0) / P[0];
    for (int m = 1; m < len; ++m) {
        Complex acc(0.0);
        for (int j = 1; j <= m && j < int(P.size()); ++j) acc += P[std::size_t(j)] * inv[std::size_t(m - j)];
        inv[std::size_t(m)] = -acc / P[0];
    }
    return inv;
}

} // namespace saddlesmith
