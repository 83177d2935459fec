#include "saddlesmith/formal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace saddlesmith {

namespace {
constexpr double kZeroRelTol = 1e-10; // relative zero test for classification decisions
}

void FormalModulus::validate() const {
    if (k < 1) fail(ErrorKind::ParseError, "modulus order k must be positive");
    if (p_poly.empty() || std::abs(p_poly[0]) == 0.0)
        fail(ErrorKind::ZeroConstantTerm, "temporal polynomial must have nonzero constant term");
    if (int(p_poly.size()) > k + 1)
        fail(ErrorKind::ParseError, "temporal polynomial degree exceeds k");
}

CStarFunction CStarFunction::zero(int k) {
    CStarFunction f;
    f.k = k;
    f.fn.assign(std::size_t(2 * k), {});
    return f;
}

bool CStarFunction::is_zero(double tol) const {
    for (const auto& list : fn)
        for (Complex c : list)
            if (std::abs(c) > tol) return false;
    return true;
}

Complex CStarFunction::eval_fn(int n, Complex y) const {
    const auto& list = fn[std::size_t(n - 1)];
    Complex acc(0.0);
    for (auto it = list.rbegin(); it != list.rend(); ++it) acc = acc * y + *it;
    return acc;
}

Complex CStarFunction::eval(Complex u, Complex y) const {
    Complex acc(0.0);
    for (int n = 2 * k; n >= 1; --n) acc = acc * u + eval_fn(n, y);
    return acc * u * y;
}

Complex CStarFunction::eval_du(Complex u, Complex y) const {
    Complex acc(0.0);
    for (int n = 2 * k; n >= 1; --n) acc = acc * u + eval_fn(n, y) * double(n);
    return acc * y; // sum n u^{n-1} f_n(y) * y
}

Complex CStarFunction::eval_dy(Complex u, Complex y) const {
    Complex acc(0.0);
    for (int n = 2 * k; n >= 1; --n) {
        const auto& list = fn[std::size_t(n - 1)];
        Complex f(0.0), fp(0.0);
        for (int m = int(list.size()) - 1; m >= 0; --m) {
            fp = fp * y + f;
            f = f * y + list[std::size_t(m)];
        }
        acc = acc * u + (f + y * fp);
    }
    return acc * u;
}

BiSeries CStarFunction::to_uy_series(int order) const {
    BiSeries out(order);
    for (int n = 1; n <= 2 * k; ++n) {
        const auto& list = fn[std::size_t(n - 1)];
        for (int m = 0; m < int(list.size()); ++m) {
            if (n + m + 1 > order) break;
            out.add_coef(n, m + 1, list[std::size_t(m)]);
        }
    }
    return out;
}

BiSeries CStarFunction::to_xy_series(const ResonancePair& pq, int order) const {
    BiSeries uy(order);
    for (int n = 1; n <= 2 * k; ++n) {
        const auto& list = fn[std::size_t(n - 1)];
        for (int m = 0; m < int(list.size()); ++m) {
            int a = pq.q * n, b = pq.p * n + m + 1;
            if (a + b > order) break;
            uy.add_coef(a, b, list[std::size_t(m)]);
        }
    }
    return uy;
}

double CStarFunction::max_abs_coef() const {
    double m = 0.0;
    for (const auto& list : fn)
        for (Complex c : list) m = std::max(m, std::abs(c));
    return m;
}

void OrbitalNormalForm::validate() const {
    modulus.validate();
    if (!(c > 1.0)) fail(ErrorKind::ParseError, "twist c must exceed 1");
    if (int(r.fn.size()) != 2 * modulus.k || int(g.fn.size()) != 2 * modulus.k)
        fail(ErrorKind::ParseError, "coefficient lists must have 2k entries");
}

int default_truncation(const ResonancePair& pq, int k) { return (pq.p + pq.q) * (2 * k + 2) + 4; }

PlanarVectorField build_model_field(const ResonancePair& pq, int k, Complex mu, double c, int trunc) {
    if (c <= 0.0) fail(ErrorKind::ParseError, "twist must be positive");
    if (trunc < (pq.p + pq.q) * (2 * k + 1))
        fail(ErrorKind::TruncationTooLow, "model field needs truncation >= (p+q)(2k+1)");
    // M0 = c + mu u^k - c u^{2k} substituted with u = x^q y^p
    BiSeries m0(trunc);
    m0.set_coef(0, 0, c);
    m0.add_coef(pq.q * k, pq.p * k, mu);
    m0.add_coef(2 * pq.q * k, 2 * pq.p * k, -c);
    BiSeries x_mon = BiSeries::monomial(1, 0, 1.0, trunc);
    BiSeries y_mon = BiSeries::monomial(0, 1, 1.0, trunc);
    BiSeries uk_x = BiSeries::monomial(pq.q * k + 1, pq.p * k, 1.0, trunc);
    BiSeries a = uk_x + m0 * x_mon * Complex(double(-pq.p));
    BiSeries b = m0 * y_mon * Complex(double(pq.q));
    return PlanarVectorField(a, b, pq);
}

PlanarVectorField build_orbital_field(const OrbitalNormalForm& nf, int trunc) {
    nf.validate();
    PlanarVectorField x0 = build_model_field(nf.pq, nf.modulus.k, nf.modulus.mu, nf.c, trunc);
    if (nf.r.is_zero()) return x0;
    BiSeries rxy = nf.r.to_xy_series(nf.pq, trunc);
    BiSeries x_mon = BiSeries::monomial(1, 0, 1.0, trunc);
    BiSeries y_mon = BiSeries::monomial(0, 1, 1.0, trunc);
    return PlanarVectorField(x0.a + rxy * x_mon * Complex(double(-nf.pq.p)),
                             x0.b + rxy * y_mon * Complex(double(nf.pq.q)), nf.pq);
}

PlanarVectorField build_normal_form(const OrbitalNormalForm& nf, int trunc) {
    PlanarVectorField xr = build_orbital_field(nf, trunc);
    // temporal factor P/(1+PG)
    BiSeries p_sub(trunc);
    for (int l = 0; l < int(nf.modulus.p_poly.size()); ++l) {
        int a = nf.pq.q * l, b = nf.pq.p * l;
        if (a + b > trunc) fail(ErrorKind::TruncationTooLow, "temporal polynomial exceeds truncation");
        p_sub.add_coef(a, b, nf.modulus.p_poly[std::size_t(l)]);
    }
    BiSeries one = BiSeries::constant(1.0, trunc);
    BiSeries gxy = nf.g.to_xy_series(nf.pq, trunc);
    BiSeries factor = p_sub * invert_unit(one + p_sub * gxy);
    return PlanarVectorField(factor * xr.a, factor * xr.b, nf.pq);
}

PlanarVectorField pullback_near_identity(const PlanarVectorField& z, const BiSeries& hx, const BiSeries& hy) {
    int D = z.order();
    int val = D + 1;
    for (const auto& part : {&hx, &hy})
        for (const auto& [key, v] : part->terms()) val = std::min(val, key.first + key.second);
    if (val < 2) fail(ErrorKind::ParseError, "near-identity pullback needs valuation >= 2");
    if (val > D) return z;

    int mmax = (D - 1) / (val - 1);
    // f(x+hx, y+hy) via bivariate Taylor increments
    auto shift = [&](const BiSeries& f) {
        BiSeries acc = f;
        // iterate i (x-derivatives), inner j (y-derivatives); powers built incrementally
        BiSeries hx_pow = BiSeries::constant(1.0, D);
        double ifact = 1.0;
        for (int i = 0; i <= mmax; ++i) {
            if (i > 0) {
                hx_pow = hx_pow * hx;
                ifact *= double(i);
                if (hx_pow.empty()) break;
            }
            BiSeries dfi = f;
            for (int s = 0; s < i; ++s) dfi = dfi.dx();
            BiSeries mixed = hx_pow;
            double jfact = 1.0;
            for (int j = 0; i + j <= mmax; ++j) {
                if (j > 0) {
                    mixed = mixed * hy;
                    jfact *= double(j);
                    if (mixed.empty()) break;
                    dfi = dfi.dy();
                } else if (i == 0) {
                    continue; // (0,0) term is f itself, already in acc
                }
                if (dfi.empty()) break;
                acc += mixed * dfi * Complex(1.0 / (ifact * jfact));
            }
        }
        return acc;
    };

    BiSeries ax = shift(z.a);
    BiSeries by = shift(z.b);
    // (I + Dh)^{-1} = sum (-Dh)^m, valuation of Dh >= val-1
    BiSeries j11 = hx.dx(), j12 = hx.dy(), j21 = hy.dx(), j22 = hy.dy();
    BiSeries na = ax, nb = by;
    BiSeries tx = ax, ty = by;
    for (int m = 0; m < D; ++m) { // each factor raises valuation by >= 1

        BiSeries ntx = (j11 * tx + j12 * ty) * Complex(-1.0);
        BiSeries nty = (j21 * tx + j22 * ty) * Complex(-1.0);
        tx = ntx;
        ty = nty;
        if (tx.empty() && ty.empty()) break;
        na += tx;
        nb += ty;
    }
    return PlanarVectorField(na, nb, z.pq);
}

PlanarVectorField diagonal_conjugate(const PlanarVectorField& z, Complex alpha, Complex beta) {
    if (std::abs(alpha) == 0.0 || std::abs(beta) == 0.0)
        fail(ErrorKind::ParseError, "diagonal map must be invertible");
    BiSeries na(z.order()), nb(z.order());
    for (const auto& [key, v] : z.a.terms())
        na.set_coef(key.first, key.second, v * std::pow(alpha, key.first - 1) * std::pow(beta, key.second));
    for (const auto& [key, v] : z.b.terms())
        nb.set_coef(key.first, key.second, v * std::pow(alpha, key.first) * std::pow(beta, key.second - 1));
    return PlanarVectorField(na, nb, z.pq);
}

NormalizationResult formal_orbital_modulus(const PlanarVectorField& z) {
    const int D = z.order();
    const int p = z.pq.p, q = z.pq.q;
    Complex l1 = z.a.coef(1, 0), l2 = z.b.coef(0, 1);
    double lin_scale = std::max(std::abs(l1), std::abs(l2));
    double off = std::max(std::abs(z.a.coef(0, 1)), std::abs(z.b.coef(1, 0)));
    if (lin_scale == 0.0) fail(ErrorKind::NotResonantSaddle, "degenerate linear part");
    if (off > 1e-9 * lin_scale)
        fail(ErrorKind::NotResonantSaddle, "linear part is not diagonal");
    if (std::abs(double(q) * l1 + double(p) * l2) > 1e-8 * lin_scale * double(p + q))
        fail(ErrorKind::NotResonantSaddle, "eigenratio differs from -p/q");
    Complex t = l2 / double(q);

    NormalizationResult res;
    res.time_scale = t;
    PlanarVectorField zc = z;

    for (int d = 2; d <= D; ++d) {
        BiSeries hx(D), hy(D);
        bool any = false;
        for (const auto& [key, v] : zc.a.terms()) {
            if (key.first + key.second != d) continue;
            long r = long(q) * key.second - long(p) * (key.first - 1);
            if (r == 0) continue;
            hx.add_coef(key.first, key.second, v / (t * double(r)));
            any = true;
        }
        for (const auto& [key, v] : zc.b.terms()) {
            if (key.first + key.second != d) continue;
            long r = long(q) * (key.second - 1) - long(p) * key.first;
            if (r == 0) continue;
            hy.add_coef(key.first, key.second, v / (t * double(r)));
            any = true;
        }
        if (!any) continue;
        zc = pullback_near_identity(zc, hx, hy);
        res.steps.push_back({d, hx, hy});
    }

    // resonant blocks: a: u^l x, b: u^l y
    int lmax = 0;
    while ((p + q) * (lmax + 1) + 1 <= D) ++lmax;
    auto read_blocks = [&](const PlanarVectorField& z2, std::vector<Complex>& alpha,
                           std::vector<Complex>& beta, std::vector<Complex>& aprime) {
        alpha.assign(std::size_t(lmax) + 1, Complex(0.0));
        beta.assign(std::size_t(lmax) + 1, Complex(0.0));
        aprime.assign(std::size_t(lmax) + 1, Complex(0.0));
        for (int l = 0; l <= lmax; ++l) {
            alpha[std::size_t(l)] = z2.a.coef(q * l + 1, p * l);
            beta[std::size_t(l)] = z2.b.coef(q * l, p * l + 1);
            aprime[std::size_t(l)] = double(q) * alpha[std::size_t(l)] + double(p) * beta[std::size_t(l)];
        }
    };
    std::vector<Complex> alpha, beta, aprime;
    read_blocks(zc, alpha, beta, aprime);

    int k = 0;
    for (int l = 1; l <= lmax; ++l) {
        double scale = std::max({std::abs(t), std::abs(alpha[std::size_t(l)]) * q + std::abs(beta[std::size_t(l)]) * p});
        if (std::abs(aprime[std::size_t(l)]) > kZeroRelTol * scale) {
            k = l;
            break;
        }
    }
    if (k == 0)
        fail(ErrorKind::ResonantOrderExceedsTruncation,
             "no resonant term up to the truncation order (formally linearizable at this order)");
    if (2 * k > lmax)
        fail(ErrorKind::TruncationTooLow, "truncation too low to read mu at order 2k");

    // the foliation series m(u) = (Z.y/y) / (Z.u/u^{k+1}): beta = A'-shifted * m
    auto m_series = [&](const std::vector<Complex>& bet, const std::vector<Complex>& apr, int len) {
        std::vector<Complex> m(std::size_t(len), Complex(0.0));
        for (int i = 0; i < len; ++i) {
            Complex acc = bet[std::size_t(i)];
            for (int j = 1; j <= i; ++j) acc -= apr[std::size_t(k + j)] * m[std::size_t(i - j)];
            m[std::size_t(i)] = acc / apr[std::size_t(k)];
        }
        return m;
    };
    {
        std::vector<Complex> m = m_series(beta, aprime, k + 1);
        res.k = k;
        res.mu = m[std::size_t(k)];
    }

    // ----- resonant (secondary) normalization: kill m_j for j > k -----
    // Changes y -> y (1 + g u^j) act triangularly on m starting at order j + k;
    // the step size is solved with a numerically measured derivative, which is
    // robust for every (p, q, k) without tracking the commutator algebra.
    // Conditions per order j: the foliation series stays (1 + mu u^k)-shaped
    // (m_{j+k} = 0) and beyond the P-window the unit stays polynomial
    // (A'_{k+j} = 0 for j > k). The x- and y-multiplier directions give one or
    // two knobs per order; solved with numerically measured derivatives.
    const int mlen = lmax - k + 1;
    const bool dbg = std::getenv("SADDLESMITH_DEBUG_STAGE2") != nullptr;
    for (int j = 1; j + k < mlen; ++j) {
        bool two = j > k;
        auto defects = [&](const PlanarVectorField& z2) {
            std::vector<Complex> a2, b2, ap2;
            read_blocks(z2, a2, b2, ap2);
            std::vector<Complex> m2 = m_series(b2, ap2, mlen);
            return std::pair<Complex, Complex>(m2[std::size_t(j + k)],
                                               two ? ap2[std::size_t(k + j)] / double(q) : Complex(0.0));
        };
        auto apply = [&](const PlanarVectorField& z2, Complex fstep, Complex gstep) {
            BiSeries x_map = BiSeries::monomial(1, 0, 1.0, D);
            if (fstep != Complex(0.0)) x_map.add_coef(q * j + 1, p * j, fstep);
            BiSeries y_map = BiSeries::monomial(0, 1, 1.0, D);
            if (gstep != Complex(0.0)) y_map.add_coef(q * j, p * j + 1, gstep);
            return pullback(z2, x_map, y_map);
        };
        double scale;
        {
            std::vector<Complex> m0 = m_series(beta, aprime, mlen);
            scale = std::max(std::abs(t), std::abs(m0[std::size_t(k)]) + std::abs(m0[0]));
        }
        auto norm2 = [](Complex a, Complex b) { return std::max(std::abs(a), std::abs(b)); };

        for (int attempt = 0; attempt < 40; ++attempt) {
            auto [d1, d2] = defects(zc);
            if (dbg)
                std::fprintf(stderr, "stage2 j=%d attempt=%d |d1|=%.3e |d2|=%.3e\n", j, attempt,
                             std::abs(d1), std::abs(d2));
            if (norm2(d1, d2) < 1e-13 * scale) break;

            const Complex h(1e-6, 0.0);
            auto [f1m, f1a] = defects(apply(zc, h, 0.0));
            auto [g1m, g1a] = defects(apply(zc, 0.0, h));
            Complex dfm = (f1m - d1) / h, dfa = (f1a - d2) / h;
            Complex dgm = (g1m - d1) / h, dga = (g1a - d2) / h;

            Complex fstep(0.0), gstep(0.0);
            if (!two) {
                // one condition, two knobs: use the better-conditioned one
                if (std::abs(dgm) >= std::abs(dfm)) {
                    if (std::abs(dgm) < 1e-12 * scale) break;
                    gstep = -d1 / dgm;
                } else {
                    if (std::abs(dfm) < 1e-12 * scale) break;
                    fstep = -d1 / dfm;
                }
            } else {
                Complex det = dfm * dga - dfa * dgm;
                if (std::abs(det) < 1e-14 * scale * scale) break;
                fstep = -(d1 * dga - d2 * dgm) / det;
                gstep = -(dfm * d2 - dfa * d1) / det;
            }
            double mag = std::max(std::abs(fstep), std::abs(gstep));
            if (mag > 0.5) {
                fstep *= 0.5 / mag;
                gstep *= 0.5 / mag;
            }
            // backtracking line search on the defect magnitude
            bool accepted = false;
            double before = norm2(d1, d2);
            for (int bt = 0; bt < 7; ++bt) {
                PlanarVectorField cand = apply(zc, fstep, gstep);
                auto [c1, c2] = defects(cand);
                if (norm2(c1, c2) < before * (1.0 - 1e-3)) {
                    zc = cand;
                    accepted = true;
                    break;
                }
                fstep *= 0.5;
                gstep *= 0.5;
            }
            if (!accepted) break; // no descent available along these knobs
        }
    }
    read_blocks(zc, alpha, beta, aprime);

    // temporal unit    // temporal unit in the normalized coordinates: U = A'-shifted / q
    std::vector<Complex> f(std::size_t(k) + 1);
    for (int i = 0; i <= k; ++i) f[std::size_t(i)] = aprime[std::size_t(k + i)] / double(q);
    std::vector<Complex> w = invert_poly_series(f, k + 1);
    res.p_poly = invert_poly_series(w, k + 1);
    res.reduced = zc;
    return res;
}

std::vector<Complex> formal_temporal_modulus(const BiSeries& u_unit, const ResonancePair& pq, int k) {
    BiSeries inv = invert_unit(u_unit);
    std::vector<Complex> w = resonant_projection(inv, pq, k);
    return invert_poly_series(w, k + 1);
}

namespace {

// Extract (k, M-series, m0) from a field in the family X_R = u^k x dx + M Y.
struct XrShape {
    int k;
    BiSeries m; // multiplier of Y
    Complex m0;
};

XrShape xr_shape(const PlanarVectorField& x_r) {
    const int p = x_r.pq.p, q = x_r.pq.q, D = x_r.order();
    // b = q y M  =>  M = b / (q y)
    BiSeries m(D);
    for (const auto& [key, v] : x_r.b.terms()) {
        if (key.second < 1)
            fail(ErrorKind::ParseError, "field is not in the X_R family (y-component not divisible by y)");
        m.add_coef(key.first, key.second - 1, v / double(q));
    }
    // a + p x M = u^k x
    BiSeries x_mon = BiSeries::monomial(1, 0, 1.0, D);
    BiSeries e = x_r.a + m * x_mon * Complex(double(p));
    int k = 0;
    double scale = std::max(1.0, e.max_abs_coef());
    for (int l = 1; (p + q) * l + 1 <= D; ++l) {
        if (std::abs(e.coef(q * l + 1, p * l) - Complex(1.0)) < 1e-8) {
            k = l;
            break;
        }
    }
    if (k == 0) fail(ErrorKind::ParseError, "field is not in the X_R family (no unit u^k x dx part)");
    (void)scale;
    Complex m0 = m.constant_term();
    if (std::abs(m0) == 0.0) fail(ErrorKind::ParseError, "X_R multiplier vanishes at the origin");
    return {k, m, m0};
}

} // namespace

BiSeries formal_cohomological_solve_ordered(const PlanarVectorField& x_r, const BiSeries& g,
                                            bool descending_within_degree) {
    const int p = x_r.pq.p, q = x_r.pq.q;
    const int D = std::min(x_r.order(), g.order());
    XrShape shape = xr_shape(x_r);
    const int k = shape.k;

    BiSeries F(D);
    BiSeries residual = g.truncated(D);
    const double tol = 1e-12 * std::max(1.0, g.max_abs_coef());

    for (int d = 0; d <= D; ++d) {
        // snapshot the degree-d terms; processing order within a degree is immaterial
        std::vector<std::pair<BiSeries::Key, Complex>> batch;
        for (const auto& [key, v] : residual.terms())
            if (key.first + key.second == d) batch.push_back({key, v});
        if (descending_within_degree) std::reverse(batch.begin(), batch.end());
        for (const auto& [key, v0] : batch) {
            Complex v = residual.coef(key.first, key.second);
            if (std::abs(v) <= tol) continue;
            int a = key.first, b = key.second;
            if (long(q) * b == long(p) * a) {
                int l = a / q; // resonant monomial u^l
                if (l <= k)
                    fail(ErrorKind::ObstructedMonomial,
                         "right-hand side contains u^" + std::to_string(l) + " with n <= k");
                Complex cf = v / double(q * (l - k));
                F.add_coef(q * (l - k), p * (l - k), cf);
                // X_R . u^{l-k} = q(l-k) u^l exactly
                residual.add_coef(a, b, -v);
            } else {
                Complex denom = shape.m0 * double(long(q) * b - long(p) * a);
                Complex cf = v / denom;
                F.add_coef(a, b, cf);
                BiSeries mono = BiSeries::monomial(a, b, 1.0, D);
                residual -= lie_derivative(x_r, mono) * cf;
                residual.set_coef(a, b, 0.0); // leading term cancels exactly
            }
        }
    }
    return F;
}

BiSeries formal_cohomological_solve(const PlanarVectorField& x_r, const BiSeries& g) {
    return formal_cohomological_solve_ordered(x_r, g, false);
}

std::vector<std::vector<Complex>> involution_transform(const std::vector<std::vector<Complex>>& lists) {
    std::size_t n = lists.size(); // 2k+1 entries, powers 0..2k
    std::vector<std::vector<Complex>> out(n);
    for (std::size_t m = 0; m < n; ++m) {
        out[m] = lists[n - 1 - m];
        for (auto& c : out[m]) c = -c;
    }
    return out;
}

std::vector<std::vector<Complex>> involution_lists(const CStarFunction& r) {
    std::vector<std::vector<Complex>> lists(std::size_t(2 * r.k) + 1);
    for (int n = 1; n <= 2 * r.k; ++n) lists[std::size_t(n)] = r.fn[std::size_t(n - 1)];
    return involution_transform(lists);
}

bool in_cstar_cone(int a, int b, const ResonancePair& pq, int k) {
    if (a <= 0 || a % pq.q != 0) return false;
    int n = a / pq.q;
    return n >= 1 && n <= 2 * k && b >= pq.p * n + 1;
}

CStarReduction reduce_to_cstar(const BiSeries& r_in, const ResonancePair& pq, int k, Complex mu,
                               double c, int trunc) {
    CStarReduction out;
    BiSeries r = r_in.truncated(trunc);
    PlanarVectorField x0 = build_model_field(pq, k, mu, c, trunc);
    BiSeries x_mon = BiSeries::monomial(1, 0, 1.0, trunc);
    BiSeries y_mon = BiSeries::monomial(0, 1, 1.0, trunc);

    for (int sweep = 0; sweep < 8; ++sweep) {
        BiSeries bad(trunc);
        double bad_norm = 0.0;
        out.obstructed_residue = 0.0;
        for (const auto& [key, v] : r.terms()) {
            if (in_cstar_cone(key.first, key.second, pq, k)) continue;
            bool resonant = long(key.second) * pq.q == long(key.first) * pq.p;
            if (resonant && key.first / pq.q <= k) {
                out.obstructed_residue = std::max(out.obstructed_residue, std::abs(v));
                continue; // cannot be gauged away; dropped at the end
            }
            bad.add_coef(key.first, key.second, v);
            bad_norm = std::max(bad_norm, std::abs(v));
        }
        out.residual = bad_norm;
        if (bad_norm < 1e-12) break;
        ++out.sweeps;

        PlanarVectorField xr(x0.a + r * x_mon * Complex(double(-pq.p)),
                             x0.b + r * y_mon * Complex(double(pq.q)), pq);
        BiSeries d = formal_cohomological_solve(xr, bad);
        out.gauge_times.push_back(d);
        PlanarVectorField moved = flow_conjugate(xr, d);
        // recover the multiplier from the Y part: b-component = q y (M0 + R)
        BiSeries m_new(trunc);
        for (const auto& [key, v] : moved.b.terms()) {
            if (key.second < 1) continue; // truncation dust
            m_new.add_coef(key.first, key.second - 1, v / double(pq.q));
        }
        m_new.add_coef(0, 0, -c);
        m_new.add_coef(pq.q * k, pq.p * k, -mu);
        m_new.add_coef(2 * pq.q * k, 2 * pq.p * k, c);
        r = m_new;
    }
    BiSeries clean(trunc);
    for (const auto& [key, v] : r.terms())
        if (in_cstar_cone(key.first, key.second, pq, k)) clean.add_coef(key.first, key.second, v);
    out.r = clean;
    return out;
}

BiSeries co_transport(const BiSeries& g, const std::vector<BiSeries>& gauge_times,
                      const ResonancePair& pq, int trunc) {
    BiSeries out = g.truncated(trunc);
    BiSeries x_mon = BiSeries::monomial(1, 0, 1.0, trunc);
    BiSeries y_mon = BiSeries::monomial(0, 1, 1.0, trunc);
    for (const BiSeries& d : gauge_times) {
        BiSeries dt = d.truncated(trunc);
        BiSeries X = x_mon * exp_series(dt * Complex(double(-pq.p)));
        BiSeries Y = y_mon * exp_series(dt * Complex(double(pq.q)));
        out = compose(out, X, Y);
    }
    return out;
}

CStarFunction cstar_lists_from_series(const BiSeries& r, const ResonancePair& pq, int k) {
    CStarFunction fun = CStarFunction::zero(k);
    int maxm = 0;
    for (const auto& [key, v] : r.terms()) {
        int n = key.first / pq.q;
        maxm = std::max(maxm, key.second - pq.p * n - 1);
    }
    for (int n = 1; n <= 2 * k; ++n) fun.fn[std::size_t(n - 1)].assign(std::size_t(maxm) + 1, Complex(0.0));
    for (const auto& [key, v] : r.terms()) {
        if (!in_cstar_cone(key.first, key.second, pq, k)) continue;
        int n = key.first / pq.q;
        int m = key.second - pq.p * n - 1;
        fun.fn[std::size_t(n - 1)][std::size_t(m)] = v;
    }
    for (auto& list : fun.fn)
        while (!list.empty() && std::abs(list.back()) < 1e-14) list.pop_back();
    return fun;
}

std::pair<BiSeries, BiSeries> pushforward_uy(const OrbitalNormalForm& nf, int order) {
    const int k = nf.modulus.k, q = nf.pq.q;
    BiSeries vu = BiSeries::monomial(k + 1, 0, double(q), order);
    BiSeries m(order);
    m.set_coef(0, 0, nf.c);
    m.add_coef(k, 0, nf.modulus.mu);
    m.add_coef(2 * k, 0, -nf.c);
    m += nf.r.to_uy_series(order);
    BiSeries vy = m * BiSeries::monomial(0, 1, double(q), order);
    return {vu, vy};
}

std::pair<BiSeries, BiSeries> saddle_node_form(const OrbitalNormalForm& nf, int order) {
    const int k = nf.modulus.k;
    BiSeries A = BiSeries::monomial(k + 1, 0, 1.0, order);
    BiSeries m(order);
    m.set_coef(0, 0, nf.c);
    m.add_coef(k, 0, nf.modulus.mu);
    m.add_coef(2 * k, 0, -nf.c);
    m += nf.r.to_uy_series(order);
    BiSeries B = m * BiSeries::monomial(0, 1, -1.0, order);
    return {A, B};
}

} // namespace saddlesmith
