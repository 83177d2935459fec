#include "saddlesmith/period.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "saddlesmith/parallel.hpp"

namespace saddlesmith {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;
constexpr Complex kI(0.0, 1.0);
} // namespace

double AsymptoticPathSpec::effective_alpha(const ResonancePair& pq, int k) const {
    if (alpha > 0.0) return alpha;
    return 0.4 / double(pq.p * k);
}

Integrand Integrand::from_series(const BiSeries& s, double drop_tol) {
    Integrand g;
    for (const auto& [key, v] : s.terms())
        if (std::abs(v) > drop_tol) g.terms.push_back({key.first, key.second, v});
    return g;
}

Integrand Integrand::from_cstar(const CStarFunction& f, const ResonancePair& pq, Complex scale) {
    Integrand g;
    for (int n = 1; n <= 2 * f.k; ++n) {
        const auto& list = f.fn[std::size_t(n - 1)];
        for (int m = 0; m < int(list.size()); ++m) {
            Complex c = list[std::size_t(m)] * scale;
            if (std::abs(c) > 0.0) g.terms.push_back({pq.q * n, pq.p * n + m + 1, c});
        }
    }
    return g;
}

Complex Integrand::eval(Complex x, Complex y) const {
    // terms are few; power cache keyed by exponent
    Complex acc(0.0);
    for (const auto& [a, b, c] : terms) {
        Complex xa(1.0), yb(1.0);
        Complex px = x;
        int ea = a;
        while (ea > 0) {
            if (ea & 1) xa *= px;
            px *= px;
            ea >>= 1;
        }
        Complex py = y;
        int eb = b;
        while (eb > 0) {
            if (eb & 1) yb *= py;
            py *= py;
            eb >>= 1;
        }
        acc += c * xa * yb;
    }
    return acc;
}

void Integrand::check_admissible(const ResonancePair& pq, int k, double tol) const {
    double scale = 0.0;
    for (const auto& [a, b, c] : terms) scale = std::max(scale, std::abs(c));
    for (const auto& [a, b, c] : terms) {
        if (long(a) * pq.p == long(b) * pq.q) { // resonant monomial u^l
            int l = a / pq.q;
            if (l <= k && std::abs(c) > tol * std::max(1.0, scale))
                fail(ErrorKind::ObstructedIntegrand,
                     "integrand carries u^" + std::to_string(l) + " with n <= k");
        }
    }
}

namespace {

// Field data in the X_R family shape: u^k x dx + (c(1-u^{2k}) + mu u^k + R) Y,
// with R given as a monomial list in (u, y). Mirrors of C_* fields carry a
// constant-in-u part, so the list is more general than CStarFunction.
struct FieldData {
    int k = 1;
    Complex mu = 0.0;
    double c = 2.0;
    std::vector<std::tuple<int, int, Complex>> r_terms; // u^a y^b monomials

    static FieldData from_nf(const OrbitalNormalForm& nf) {
        FieldData f;
        f.k = nf.modulus.k;
        f.mu = nf.modulus.mu;
        f.c = nf.c;
        for (int n = 1; n <= 2 * f.k; ++n) {
            const auto& list = nf.r.fn[std::size_t(n - 1)];
            for (int m = 0; m < int(list.size()); ++m)
                if (std::abs(list[std::size_t(m)]) > 0.0)
                    f.r_terms.push_back({n, m + 1, list[std::size_t(m)]});
        }
        return f;
    }

    // the u -> 1/u mirror: (k, -mu, c, R*) with R*(z,y) = -z^{2k} R(1/z, y)
    FieldData mirror() const {
        FieldData f;
        f.k = k;
        f.mu = -mu;
        f.c = c;
        for (const auto& [a, b, v] : r_terms) f.r_terms.push_back({2 * k - a, b, -v});
        return f;
    }

    Complex r_eval(Complex u, Complex y) const {
        Complex acc(0.0);
        for (const auto& [a, b, v] : r_terms) {
            Complex t(1.0);
            for (int i = 0; i < a; ++i) t *= u;
            for (int i = 0; i < b; ++i) t *= y;
            acc += v * t;
        }
        return acc;
    }
};

struct OdeContext {
    const FieldData* field;
    const Integrand* g;
    double alpha;
    int winding;
    Complex y0;
    int k;

    Complex y_of(double t) const {
        return y0 * std::pow(1.0 + t, -alpha) * std::exp(kI * double(winding) * t);
    }
    Complex phi_of(double t) const { // ydot / y
        return Complex(-alpha / (1.0 + t), double(winding));
    }
    Complex m_of(Complex u, Complex y) const {
        Complex uk(1.0);
        for (int i = 0; i < k; ++i) uk *= u;
        Complex m = field->c * (Complex(1.0) - uk * uk) + field->mu * uk;
        if (!field->r_terms.empty()) m += field->r_eval(u, y);
        return m;
    }

    // state = (x, I, J, K) with J = int I and K = int J; the second
    // difference of K over one winding period annihilates every integer
    // oscillation frequency exactly, leaving the smooth tail for Richardson.
    void rhs(double t, const Complex* s, Complex* ds) const {
        Complex y = y_of(t);
        Complex x = s[0];
        Complex u = x * y; // p = q = 1
        Complex m = m_of(u, y);
        Complex ph = phi_of(t);
        Complex uk(1.0);
        for (int i = 0; i < k; ++i) uk *= u;
        ds[0] = ph * x * (uk - m) / m;     // p = q = 1
        ds[1] = g->eval(x, y) * ph / m;    // G du/u^{k+1} along the path
        ds[2] = s[1];
        ds[3] = s[2];
    }
};

// Dormand-Prince 5(4) coefficients
struct Dopri {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
};

struct IntegrationOutcome {
    Complex extrapolated{};
    Complex raw{};
    double tail = 0.0;
    double final_t = 0.0;
    Complex final_u{};
    int steps = 0;
    bool left_sector = false;
    bool tail_ok = false;
    std::vector<double> t_samples;
    std::vector<Complex> u_samples;
};

IntegrationOutcome run_path(const OdeContext& ctx, const SectorId& id, Complex x_start,
                            const AsymptoticPathSpec& spec, bool record) {
    IntegrationOutcome out;
    const double atol = spec.ode_tol, rtol = spec.ode_tol;
    const double W = kTwoPi; // averaging window: one winding period

    // checkpoints 100 * 2^j; at each we need K at T, T-W, T-2W
    std::vector<double> checkpoints;
    for (double tc = 100.0; tc <= spec.t_cap + 1e-9; tc *= 2.0) checkpoints.push_back(tc);
    std::vector<double> stops;
    for (double tc : checkpoints) {
        stops.push_back(tc - 2.0 * W);
        stops.push_back(tc - W);
        stops.push_back(tc);
    }
    std::vector<Complex> k_at_stops(stops.size());
    std::size_t next_stop = 0;

    Complex s[4] = {x_start, Complex(0.0), Complex(0.0), Complex(0.0)};
    double t = 0.0, h = 1e-3;
    Complex k1[4], k2[4], k3[4], k4[4], k5[4], k6[4], k7[4], tmp[4];
    ctx.rhs(t, s, k1);
    std::vector<Complex> means;
    int since_record = 0;

    while (t < spec.t_cap) {
        double hmax = 0.35;
        if (next_stop < stops.size()) hmax = std::min(hmax, stops[next_stop] - t + 1e-14);
        h = std::min(h, hmax);
        if (t + h > spec.t_cap) h = spec.t_cap - t;

        auto stage = [&](double frac, const double* coefs, int n, Complex* kk) {
            for (int i = 0; i < 4; ++i) tmp[i] = s[i];
            const Complex* ks[6] = {k1, k2, k3, k4, k5, k6};
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < 4; ++i) tmp[i] += h * coefs[j] * ks[j][i];
            ctx.rhs(t + frac * h, tmp, kk);
        };
        {
            const double a2[] = {Dopri::a21};
            stage(Dopri::c2, a2, 1, k2);
            const double a3[] = {Dopri::a31, Dopri::a32};
            stage(Dopri::c3, a3, 2, k3);
            const double a4[] = {Dopri::a41, Dopri::a42, Dopri::a43};
            stage(Dopri::c4, a4, 3, k4);
            const double a5[] = {Dopri::a51, Dopri::a52, Dopri::a53, Dopri::a54};
            stage(Dopri::c5, a5, 4, k5);
            const double a6[] = {Dopri::a61, Dopri::a62, Dopri::a63, Dopri::a64, Dopri::a65};
            stage(1.0, a6, 5, k6);
        }
        Complex y5[4];
        for (int i = 0; i < 4; ++i)
            y5[i] = s[i] + h * (Dopri::b1 * k1[i] + Dopri::b3 * k3[i] + Dopri::b4 * k4[i] +
                                Dopri::b5 * k5[i] + Dopri::b6 * k6[i]);
        ctx.rhs(t + h, y5, k7);
        double err = 0.0;
        for (int i = 0; i < 2; ++i) { // the averaged states are exact integrals
            Complex e = h * (Dopri::e1 * k1[i] + Dopri::e3 * k3[i] + Dopri::e4 * k4[i] +
                             Dopri::e5 * k5[i] + Dopri::e6 * k6[i] + Dopri::e7 * k7[i]);
            err = std::max(err, std::abs(e) / (atol + rtol * std::max(std::abs(s[i]), std::abs(y5[i]))));
        }
        if (err <= 1.0) {
            t += h;
            for (int i = 0; i < 4; ++i) s[i] = y5[i];
            for (int i = 0; i < 4; ++i) k1[i] = k7[i];
            ++out.steps;
            Complex y = ctx.y_of(t);
            Complex u = s[0] * y;
            if (!sector_contains(ctx.k, id, u)) {
                out.left_sector = true;
                out.final_t = t;
                out.final_u = u;
                return out;
            }
            if (record && ++since_record >= 40) {
                since_record = 0;
                out.t_samples.push_back(t);
                out.u_samples.push_back(u);
            }
            while (next_stop < stops.size() && t >= stops[next_stop] - 1e-12) {
                k_at_stops[next_stop] = s[3];
                std::size_t idx = next_stop;
                ++next_stop;
                if (idx % 3 == 2) {
                    // a checkpoint triple is complete
                    Complex m2 = (k_at_stops[idx] - 2.0 * k_at_stops[idx - 1] + k_at_stops[idx - 2]) /
                                 (W * W);
                    means.push_back(m2);
                    if (means.size() >= 3) {
                        std::size_t n = means.size();
                        Complex m_lo = means[n - 3], m_mid = means[n - 2], m_hi = means[n - 1];
                        Complex extra = (8.0 * m_hi - 6.0 * m_mid + m_lo) / 3.0;
                        double tail = std::abs(extra - (2.0 * m_hi - m_mid));
                        out.extrapolated = extra;
                        out.tail = tail;
                        if (tail <= spec.tail_goal) {
                            out.tail_ok = true;
                            out.raw = s[1];
                            out.final_t = t;
                            out.final_u = u;
                            return out;
                        }
                    }
                }
            }
            if (out.steps > 40'000'000) break;
        }
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        h *= std::clamp(fac, 0.2, 5.0);
        if (h < 1e-12) break;
    }
    out.final_t = t;
    {
        Complex y = ctx.y_of(t);
        out.final_u = s[0] * y;
    }
    out.raw = s[1];
    if (means.size() >= 3) {
        std::size_t n = means.size();
        Complex extra = (8.0 * means[n - 1] - 6.0 * means[n - 2] + means[n - 3]) / 3.0;
        out.extrapolated = extra;
        out.tail = std::abs(extra - (2.0 * means[n - 1] - means[n - 2]));
        out.tail_ok = out.tail <= spec.tail_goal * 20.0; // loose acceptance at the cap
    } else if (!means.empty()) {
        out.extrapolated = means.back();
        out.tail = std::abs(out.extrapolated - s[1]);
    } else {
        out.extrapolated = s[1];
        out.tail = std::abs(s[1]);
    }
    return out;
}

} // namespace

namespace {

LeafTrajectory integrate_leaf_field(const FieldData& field, const SectorId& id, Complex x0, Complex y0,
                                    const Integrand& g, const AsymptoticPathSpec& spec,
                                    bool record_samples) {
    Complex u0 = x0 * y0;
    if (u0 == Complex(0.0) || !sector_contains(field.k, id, u0))
        fail(ErrorKind::OutOfSector, "start point is not in the sector");

    OdeContext ctx;
    ctx.field = &field;
    ctx.g = &g;
    ctx.alpha = spec.effective_alpha(ResonancePair(1, 1), field.k);
    ctx.winding = (id.family == SectorFamily::ZI) ? spec.winding_zi : spec.winding_iz;
    ctx.y0 = y0;
    ctx.k = field.k;

    IntegrationOutcome oc = run_path(ctx, id, x0, spec, record_samples);
    if (oc.left_sector) {
        ctx.winding = -ctx.winding; // one retry with the opposite winding
        oc = run_path(ctx, id, x0, spec, record_samples);
        if (oc.left_sector) fail(ErrorKind::LeftSector, "leaf path exited the sector for both windings");
    }
    if (!oc.tail_ok && oc.tail > 1e-4)
        fail(ErrorKind::TailNotConverged, "period tail did not settle below tolerance");

    LeafTrajectory traj;
    traj.solution_value = -oc.extrapolated; // F(start) with F(0,0) = 0
    traj.raw_integral = oc.raw;
    traj.tail_estimate = oc.tail;
    traj.final_t = oc.final_t;
    traj.final_u = oc.final_u;
    traj.steps = oc.steps;
    traj.winding_used = ctx.winding;
    traj.t_samples = std::move(oc.t_samples);
    traj.u_samples = std::move(oc.u_samples);
    return traj;
}

} // namespace

LeafTrajectory integrate_leaf(const OrbitalNormalForm& nf, const SectorId& id, Complex x0, Complex y0,
                              const Integrand& g, const AsymptoticPathSpec& spec, bool record_samples) {
    if (nf.pq.p != 1 || nf.pq.q != 1)
        fail(ErrorKind::ParseError, "path integration is restricted to p = q = 1");
    g.check_admissible(nf.pq, nf.modulus.k);
    FieldData field = FieldData::from_nf(nf);
    return integrate_leaf_field(field, id, x0, y0, g, spec, record_samples);
}

Complex sectorial_solution(const OrbitalNormalForm& nf, const SectorId& id, Complex x0, Complex y0,
                           const Integrand& g, const AsymptoticPathSpec& spec) {
    if (g.empty()) return Complex(0.0);
    return integrate_leaf(nf, id, x0, y0, g, spec).solution_value;
}

namespace {

// log of the model first-integral factor along a centre ray (arg y = 0 part):
// re/im split handled by the caller.
// Find r in (0, 0.95] on the V+ centre ray (arg = pi) with log|Hhat| = target;
// monotone bisection in s = ln r.
double solve_plus_radius(const ModelIntegralSpec& mspec, double log_target_hat) {
    auto logabs = [&](double s) { return log_model_hat(mspec, s, kPi).real(); };
    double lo = std::log(1e-4), hi = std::log(0.95);
    double flo = logabs(lo), fhi = logabs(hi);
    bool increasing = fhi > flo;
    if ((log_target_hat < std::min(flo, fhi)) || (log_target_hat > std::max(flo, fhi)))
        fail(ErrorKind::HNotAttained, "target leaf level is outside the attainable range");
    for (int it = 0; it < 200; ++it) {
        double mid = (lo + hi) / 2.0;
        if ((logabs(mid) < log_target_hat) == increasing)
            lo = mid;
        else
            hi = mid;
    }
    return std::exp((lo + hi) / 2.0);
}

// Plus-side period samples of an X_R-family field at its V^+ wedge (arg pi):
// value = F^{iz} - F^{zi} at the attained leaf coordinate h = H_N(point).
std::vector<PeriodSample> plus_samples_for_field(const FieldData& field, const Integrand& g,
                                                 bool g_is_minus_r, const PeriodOptions& opts) {
    ModelIntegralSpec mspec{field.k, field.mu, field.c, ResonancePair(1, 1)};
    SectorId zi{0, SectorFamily::ZI}, iz{0, SectorFamily::IZ};
    Integrand minus_r;
    for (const auto& [a, b, v] : field.r_terms) minus_r.terms.push_back({a, a + b, -v});

    double log_hat_edge = log_model_hat(mspec, 0.0, kPi).real();
    struct Task {
        double r;
        double arg_target;
    };
    std::vector<Task> tasks;
    for (double frac : opts.radius_fractions) {
        double log_target_hat = log_hat_edge + std::log(frac);
        for (int ia = 0; ia < opts.n_args; ++ia) {
            double arg = kTwoPi * double(ia) / double(opts.n_args);
            tasks.push_back({solve_plus_radius(mspec, log_target_hat), arg});
        }
    }

    std::vector<PeriodSample> out(tasks.size());
    std::vector<std::string> errors(tasks.size());
    std::vector<int> failed(tasks.size(), 0);
    parallel_for(tasks.size(), [&](std::size_t ti) {
        try {
            const Task& task = tasks[ti];
            Complex u = std::polar(task.r, kPi);
            Complex base_log = log_model_first_integral(mspec, zi, u, Complex(opts.abs_y, 0.0));
            double need = task.arg_target - base_log.imag();
            Complex y = std::polar(opts.abs_y, need);
            Complex x = u / y;

            Complex f_zi = g.empty() ? Complex(0.0)
                                     : integrate_leaf_field(field, zi, x, y, g, opts.path, false)
                                           .solution_value;
            Complex f_iz = g.empty() ? Complex(0.0)
                                     : integrate_leaf_field(field, iz, x, y, g, opts.path, false)
                                           .solution_value;
            Complex n_h;
            if (field.r_terms.empty()) {
                n_h = Complex(0.0);
            } else if (g_is_minus_r) {
                n_h = f_zi;
            } else {
                n_h = integrate_leaf_field(field, zi, x, y, minus_r, opts.path, false).solution_value;
            }
            PeriodSample ps;
            ps.j = 0;
            ps.polarity = Polarity::PLUS;
            ps.h = std::exp(log_model_first_integral(mspec, zi, u, y) + n_h);
            ps.value = f_iz - f_zi;
            ps.base_x = x;
            ps.base_y = y;
            out[ti] = ps;
        } catch (const SaddleError& e) {
            failed[ti] = 1;
            errors[ti] = e.what();
        }
    });
    for (std::size_t ti = 0; ti < tasks.size(); ++ti)
        if (failed[ti]) throw SaddleError(ErrorKind::HNotAttained, errors[ti]);
    return out;
}

// -z^{2k} g(1/z, y) as a monomial list; requires y-heavy content of u-degree <= 2k.
Integrand mirror_integrand(const Integrand& g, int k) {
    Integrand out;
    for (const auto& [a, b, v] : g.terms) {
        if (b < a || a > 2 * k)
            fail(ErrorKind::ParseError,
                 "mirror transport needs y-heavy monomials of u-degree <= 2k; reduce first");
        // x^a y^b = u^a y^{b-a} -> -z^{2k-a} y^{b-a}, z = x' y
        int zp = 2 * k - a, yp = b - a;
        out.terms.push_back({zp, zp + yp, -v});
    }
    return out;
}

// Subtract truncated coboundaries X_R . T until only transportable (y-heavy,
// u-degree <= 2k) content remains. Periods are unchanged up to the truncation
// tail of the triangular solve.
Integrand reduce_to_transportable(const Integrand& g, const OrbitalNormalForm& nf, int order) {
    BiSeries s(order);
    for (const auto& [a, b, v] : g.terms) {
        if (a + b > order) fail(ErrorKind::ParseError, "integrand degree exceeds the reduction order");
        s.add_coef(a, b, v);
    }
    PlanarVectorField xr = build_orbital_field(nf, order);
    const int k = nf.modulus.k;
    for (int sweep = 0; sweep < 8; ++sweep) {
        BiSeries bad(order);
        double bad_norm = 0.0;
        for (const auto& [key, v] : s.terms()) {
            bool transportable = key.second >= key.first && key.first <= 2 * k;
            if (transportable) continue;
            bad.add_coef(key.first, key.second, v);
            bad_norm = std::max(bad_norm, std::abs(v));
        }
        if (bad_norm < 1e-13) break;
        BiSeries t = formal_cohomological_solve(xr, bad);
        s -= lie_derivative(xr, t);
    }
    Integrand out;
    for (const auto& [key, v] : s.terms())
        if (key.second >= key.first && key.first <= 2 * k && std::abs(v) > 1e-14)
            out.terms.push_back({key.first, key.second, v});
    return out;
}

} // namespace

namespace {

// Shared mirror preparation: gauge-reduced mirror field, its gauge flows, and
// the transported integrand.
struct MirrorSetup {
    FieldData field;                 // mirror normal form (k, -mu, c, R-hat)
    std::vector<BiSeries> gauge;     // flow times applied during the reduction
    Integrand g;                     // transported + co-transported integrand
    int trunc = 0;
};

MirrorSetup build_mirror(const OrbitalNormalForm& nf, const Integrand& g_transportable, int k,
                         bool g_is_minus_r) {
    MirrorSetup ms;
    FieldData field = FieldData::from_nf(nf);
    FieldData mirror = field.mirror();
    int trunc = default_truncation(ResonancePair(1, 1), k);
    for (const auto& [a, b, v] : mirror.r_terms) trunc = std::max(trunc, 2 * a + b + 2);
    for (const auto& [a, b, v] : g_transportable.terms) trunc = std::max(trunc, 2 * k + b + 2);
    ms.trunc = trunc;

    BiSeries r_star_xy(trunc);
    for (const auto& [a, b, v] : mirror.r_terms)
        if (2 * a + b <= trunc) r_star_xy.add_coef(a, a + b, v);
    CStarReduction red = reduce_to_cstar(r_star_xy, ResonancePair(1, 1), k, mirror.mu, mirror.c, trunc);
    ms.gauge = red.gauge_times;
    ms.field.k = k;
    ms.field.mu = mirror.mu;
    ms.field.c = mirror.c;
    for (const auto& [key, v] : red.r.terms())
        ms.field.r_terms.push_back({key.first, key.second - key.first, v});

    if (g_is_minus_r) {
        for (const auto& [a, b, v] : ms.field.r_terms) ms.g.terms.push_back({a, a + b, -v});
    } else {
        Integrand raw = mirror_integrand(g_transportable, k);
        BiSeries gs(trunc);
        for (const auto& [a, b, v] : raw.terms)
            if (a + b <= trunc) gs.add_coef(a, b, v);
        BiSeries moved = co_transport(gs, red.gauge_times, ResonancePair(1, 1), trunc);
        ms.g = Integrand::from_series(moved, 1e-14);
    }
    return ms;
}

// image of a point under the mirror map followed by the reduction gauges
std::pair<Complex, Complex> mirror_point(Complex x, Complex y, const std::vector<BiSeries>& gauge) {
    Complex xp = Complex(1.0) / (x * y * y); // z = 1/u, x' = z / y
    Complex yp = y;
    for (const BiSeries& d : gauge) {
        Complex t = d.eval(xp, yp);
        xp *= std::exp(-t);
        yp *= std::exp(t);
    }
    return {xp, yp};
}

} // namespace

std::vector<PeriodSample> period_samples(const OrbitalNormalForm& nf, const Integrand& g,
                                         const PeriodOptions& opts) {
    if (nf.pq.p != 1 || nf.pq.q != 1 || nf.modulus.k != 1)
        fail(ErrorKind::ParseError, "period sampling is restricted to k = 1, p = q = 1");
    g.check_admissible(nf.pq, nf.modulus.k);
    const int k = nf.modulus.k;
    FieldData field = FieldData::from_nf(nf);

    // resonant monomials u^n (n > k) are exact forms u^{n-k-1} du with zero
    // periods on every cycle; dropping them costs nothing and keeps the
    // mirror transport admissible (u^{2k} would land on the obstructed u'^0).
    Integrand g_clean;
    for (const auto& [a, b, v] : g.terms)
        if (long(a) * nf.pq.p != long(b) * nf.pq.q) g_clean.terms.push_back({a, b, v});

    // minus-side germs live at the infinity pole of the leaf space; cycles of
    // u -> 0 paths cannot see them, so they are read off as plus-side germs of
    // the u -> 1/u mirror field (gauge-reduced back into C_* form) with the
    // exactly transported and co-transported integrand.
    Integrand g_transportable = g_clean;
    bool needs_reduction = false;
    for (const auto& [a, b, v] : g_clean.terms)
        if (b < a || a > 2 * k) needs_reduction = true;
    if (needs_reduction) {
        int order = 0;
        for (const auto& [a, b, v] : g_clean.terms) order = std::max(order, a + b);
        Integrand reduced = reduce_to_transportable(g_clean, nf, order + 4 * k + 2);
        g_transportable.terms.clear();
        for (const auto& [a, b, v] : reduced.terms)
            if (a != b) g_transportable.terms.push_back({a, b, v});
    }
    MirrorSetup ms = build_mirror(nf, g_transportable, k, opts.g_is_minus_r);

    std::vector<PeriodSample> plus = plus_samples_for_field(field, g_clean, opts.g_is_minus_r, opts);
    std::vector<PeriodSample> minus = plus_samples_for_field(ms.field, ms.g, opts.g_is_minus_r, opts);

    std::vector<PeriodSample> out;
    out.reserve(plus.size() + minus.size());
    for (auto& s : minus) {
        // report in the original leaf coordinate (the mirror plus-germ argument
        // is the original 1/h), with the involution's sign
        s.polarity = Polarity::MINUS;
        s.h = Complex(1.0) / s.h;
        s.value = -s.value;
        out.push_back(s);
    }
    for (auto& s : plus) out.push_back(s);
    return out;
}


std::vector<PeriodSample> minus_two_ended_probe(const OrbitalNormalForm& nf, const Integrand& g,
                                                const std::vector<double>& fractions, int n_args,
                                                const AsymptoticPathSpec& path) {
    const int k = nf.modulus.k;
    FieldData field = FieldData::from_nf(nf);
    MirrorSetup ms = build_mirror(nf, g, k, false);
    ModelIntegralSpec mspec{k, nf.modulus.mu, nf.c, ResonancePair(1, 1)};
    SectorId zi{0, SectorFamily::ZI}, iz{0, SectorFamily::IZ};

    // level solve on the original V^- centre ray: theta_iz = 2 pi there
    double th_iz = sector_theta(k, iz, Complex(1.0, 1e-13));
    auto logabs = [&](double s) { return log_model_hat(mspec, s, th_iz).real(); };
    double log_edge = logabs(0.0);

    std::vector<PeriodSample> out;
    for (double frac : fractions) {
        double target = log_edge + std::log(1.0 / frac); // |1/h| = frac * image radius
        double lo = std::log(1e-4), hi = 0.0;
        for (int it = 0; it < 200; ++it) {
            double mid = (lo + hi) / 2.0;
            if (logabs(mid) > target) lo = mid; // log|Hhat| decreasing in r on (0,1)
            else hi = mid;
        }
        double r = std::exp((lo + hi) / 2.0);
        for (int ia = 0; ia < n_args; ++ia) {
            double arg = 2.0 * kPi * double(ia) / double(n_args);
            Complex u = std::polar(r, 0.0);
            Complex base_log = log_model_first_integral(mspec, iz, u, Complex(1.5, 0.0));
            Complex y = std::polar(1.5, arg - base_log.imag());
            Complex x = u / y;
            Complex f1 = integrate_leaf_field(field, zi, x, y, g, path, false).solution_value;
            auto [xp, yp] = mirror_point(x, y, ms.gauge);
            Complex f2 =
                integrate_leaf_field(ms.field, zi, xp, yp, ms.g, path, false).solution_value;
            PeriodSample ps;
            ps.polarity = Polarity::MINUS;
            ps.h = std::exp(log_model_first_integral(mspec, iz, u, y));
            ps.value = f1 - f2;
            ps.base_x = x;
            ps.base_y = y;
            out.push_back(ps);
        }
    }
    return out;
}

namespace {

// pack/unpack the f_n Taylor lists as a flat complex parameter vector
std::vector<Complex> pack_lists(const CStarFunction& f, int len) {
    std::vector<Complex> out;
    for (const auto& list : f.fn)
        for (int m = 0; m < len; ++m)
            out.push_back(m < int(list.size()) ? list[std::size_t(m)] : Complex(0.0));
    return out;
}

CStarFunction unpack_lists(const std::vector<Complex>& params, int k, int len) {
    CStarFunction f = CStarFunction::zero(k);
    std::size_t idx = 0;
    for (auto& list : f.fn) {
        list.assign(std::size_t(len), Complex(0.0));
        for (int m = 0; m < len; ++m) list[std::size_t(m)] = params[idx++];
        while (!list.empty() && std::abs(list.back()) < 1e-16) list.pop_back();
    }
    return f;
}

// residuals of sampled periods against the target germs
std::vector<Complex> sample_residuals(const std::vector<PeriodSample>& samples,
                                      const NecklaceData& target, double* scale_out) {
    std::vector<Complex> res;
    double scale = 1e-9;
    for (const auto& s : samples) {
        Complex expected = (s.polarity == Polarity::MINUS) ? target.eval_minus(0, Complex(1.0) / s.h)
                                                           : target.eval_plus(0, s.h);
        res.push_back(s.value - expected);
        scale = std::max(scale, std::abs(expected));
    }
    if (scale_out) *scale_out = scale;
    return res;
}

// dense complex least squares via normal equations
std::vector<Complex> lsq_solve(const std::vector<std::vector<Complex>>& cols,
                               const std::vector<Complex>& rhs) {
    int n = int(cols.size());
    std::vector<Complex> ata(std::size_t(n) * std::size_t(n), Complex(0.0));
    std::vector<Complex> atb(std::size_t(n), Complex(0.0));
    for (int i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < rhs.size(); ++r) atb[std::size_t(i)] += std::conj(cols[std::size_t(i)][r]) * rhs[r];
        for (int j = 0; j < n; ++j) {
            Complex acc(0.0);
            for (std::size_t r = 0; r < rhs.size(); ++r)
                acc += std::conj(cols[std::size_t(i)][r]) * cols[std::size_t(j)][r];
            ata[std::size_t(i) * std::size_t(n) + std::size_t(j)] = acc;
        }
    }
    // ridge for safety
    for (int i = 0; i < n; ++i) ata[std::size_t(i) * std::size_t(n) + std::size_t(i)] *= 1.0 + 1e-10;
    for (int col = 0; col < n; ++col) {
        int best = col;
        double mag = std::abs(ata[std::size_t(col) * std::size_t(n) + std::size_t(col)]);
        for (int row = col + 1; row < n; ++row) {
            double m2 = std::abs(ata[std::size_t(row) * std::size_t(n) + std::size_t(col)]);
            if (m2 > mag) {
                mag = m2;
                best = row;
            }
        }
        if (best != col) {
            for (int j = 0; j < n; ++j)
                std::swap(ata[std::size_t(col) * std::size_t(n) + std::size_t(j)],
                          ata[std::size_t(best) * std::size_t(n) + std::size_t(j)]);
            std::swap(atb[std::size_t(col)], atb[std::size_t(best)]);
        }
        Complex d = ata[std::size_t(col) * std::size_t(n) + std::size_t(col)];
        for (int row = col + 1; row < n; ++row) {
            Complex f = ata[std::size_t(row) * std::size_t(n) + std::size_t(col)] / d;
            for (int j = col; j < n; ++j)
                ata[std::size_t(row) * std::size_t(n) + std::size_t(j)] -=
                    f * ata[std::size_t(col) * std::size_t(n) + std::size_t(j)];
            atb[std::size_t(row)] -= f * atb[std::size_t(col)];
        }
    }
    std::vector<Complex> x(std::size_t(n), Complex(0.0));
    for (int row = n - 1; row >= 0; --row) {
        Complex acc = atb[std::size_t(row)];
        for (int j = row + 1; j < n; ++j)
            acc -= ata[std::size_t(row) * std::size_t(n) + std::size_t(j)] * x[std::size_t(j)];
        x[std::size_t(row)] = acc / ata[std::size_t(row) * std::size_t(n) + std::size_t(row)];
    }
    return x;
}

// shared Newton least-squares driver; measure(params) returns sampled periods
template <typename MeasureFn>
RefineReport newton_refine(std::vector<Complex>& params, const NecklaceData& target,
                           const RefineOptions& opts, MeasureFn&& measure) {
    RefineReport rep;
    double scale = 1.0;
    std::vector<PeriodSample> base = measure(params);
    std::vector<Complex> res = sample_residuals(base, target, &scale);
    auto rel = [&](const std::vector<Complex>& r) {
        double worst = 0.0;
        for (Complex v : r) worst = std::max(worst, std::abs(v));
        return worst / scale;
    };
    rep.initial_residual = rel(res);
    rep.final_residual = rep.initial_residual;
    if (rep.initial_residual < opts.tol) {
        rep.converged = true;
        return rep;
    }

    // frozen Jacobian of the residual map by complex finite differences
    std::vector<std::vector<Complex>> cols(params.size());
    for (std::size_t j = 0; j < params.size(); ++j) {
        std::vector<Complex> p2 = params;
        p2[j] += opts.fd_step;
        std::vector<PeriodSample> pert = measure(p2);
        std::vector<Complex> res2 = sample_residuals(pert, target, nullptr);
        cols[j].resize(res.size());
        for (std::size_t r = 0; r < res.size(); ++r) cols[j][r] = (res2[r] - res[r]) / opts.fd_step;
    }

    for (int it = 0; it < opts.max_iterations; ++it) {
        std::vector<Complex> step = lsq_solve(cols, res);
        for (std::size_t j = 0; j < params.size(); ++j) params[j] -= step[j];
        base = measure(params);
        res = sample_residuals(base, target, &scale);
        rep.final_residual = rel(res);
        ++rep.iterations;
        if (rep.final_residual < opts.tol) {
            rep.converged = true;
            break;
        }
    }
    return rep;
}

PeriodOptions refine_period_options(const RefineOptions& opts) {
    PeriodOptions po;
    po.n_args = opts.n_args;
    po.radius_fractions = opts.radius_fractions;
    po.g_is_minus_r = true;
    po.path.tail_goal = 2e-7;
    return po;
}

} // namespace

RefineReport refine_realization(OrbitalNormalForm& nf, const NecklaceData& target,
                                const RefineOptions& opts) {
    PeriodOptions po = refine_period_options(opts);
    const int k = nf.modulus.k;
    std::vector<Complex> params = pack_lists(nf.r, opts.list_length);
    auto measure = [&](const std::vector<Complex>& p) {
        OrbitalNormalForm cand = nf;
        cand.r = unpack_lists(p, k, opts.list_length);
        Integrand minus_r = Integrand::from_cstar(cand.r, cand.pq, Complex(-1.0));
        return period_samples(cand, minus_r, po);
    };
    RefineReport rep = newton_refine(params, target, opts, measure);
    nf.r = unpack_lists(params, k, opts.list_length);
    return rep;
}

RefineReport refine_section(const OrbitalNormalForm& nf, CStarFunction& g, const NecklaceData& target,
                            const RefineOptions& opts) {
    PeriodOptions po = refine_period_options(opts);
    po.g_is_minus_r = false;
    const int k = nf.modulus.k;
    std::vector<Complex> params = pack_lists(g, opts.list_length);
    auto measure = [&](const std::vector<Complex>& p) {
        CStarFunction cand = unpack_lists(p, k, opts.list_length);
        Integrand gi = Integrand::from_cstar(cand, nf.pq, Complex(1.0));
        return period_samples(nf, gi, po);
    };
    RefineReport rep = newton_refine(params, target, opts, measure);
    g = unpack_lists(params, k, opts.list_length);
    return rep;
}

NecklaceData fit_period_germs(const std::vector<PeriodSample>& samples, int k, Complex mu, int degree) {
    NecklaceData out = NecklaceData::zero(k, mu);
    for (Polarity pol : {Polarity::MINUS, Polarity::PLUS}) {
        std::vector<Complex> zs, vs;
        double maxz = 0.0;
        for (const auto& s : samples) {
            if (s.polarity != pol) continue;
            Complex z = (pol == Polarity::MINUS) ? Complex(1.0) / s.h : s.h;
            zs.push_back(z);
            vs.push_back(s.value);
            maxz = std::max(maxz, std::abs(z));
        }
        if (zs.empty()) continue;
        int deg = std::min<int>(degree, int(zs.size()) - 1);
        // least squares for coefficients of z^1..z^deg
        std::vector<Complex> ata(std::size_t(deg) * std::size_t(deg), Complex(0.0));
        std::vector<Complex> atb(std::size_t(deg), Complex(0.0));
        for (std::size_t s = 0; s < zs.size(); ++s) {
            std::vector<Complex> pw(std::size_t(deg) + 1);
            pw[0] = Complex(1.0);
            for (int i = 1; i <= deg; ++i) pw[std::size_t(i)] = pw[std::size_t(i - 1)] * zs[s];
            for (int i = 1; i <= deg; ++i) {
                atb[std::size_t(i - 1)] += std::conj(pw[std::size_t(i)]) * vs[s];
                for (int j = 1; j <= deg; ++j)
                    ata[std::size_t(i - 1) * std::size_t(deg) + std::size_t(j - 1)] +=
                        std::conj(pw[std::size_t(i)]) * pw[std::size_t(j)];
            }
        }
        // tiny Gaussian solve
        for (int col = 0; col < deg; ++col) {
            int best = col;
            double mag = std::abs(ata[std::size_t(col) * std::size_t(deg) + std::size_t(col)]);
            for (int row = col + 1; row < deg; ++row) {
                double mm = std::abs(ata[std::size_t(row) * std::size_t(deg) + std::size_t(col)]);
                if (mm > mag) {
                    mag = mm;
                    best = row;
                }
            }
            if (best != col) {
                for (int j = 0; j < deg; ++j)
                    std::swap(ata[std::size_t(col) * std::size_t(deg) + std::size_t(j)],
                              ata[std::size_t(best) * std::size_t(deg) + std::size_t(j)]);
                std::swap(atb[std::size_t(col)], atb[std::size_t(best)]);
            }
            Complex d = ata[std::size_t(col) * std::size_t(deg) + std::size_t(col)];
            for (int row = col + 1; row < deg; ++row) {
                Complex f = ata[std::size_t(row) * std::size_t(deg) + std::size_t(col)] / d;
                for (int j = col; j < deg; ++j)
                    ata[std::size_t(row) * std::size_t(deg) + std::size_t(j)] -=
                        f * ata[std::size_t(col) * std::size_t(deg) + std::size_t(j)];
                atb[std::size_t(row)] -= f * atb[std::size_t(col)];
            }
        }
        std::vector<Complex> coef(std::size_t(deg), Complex(0.0));
        for (int row = deg - 1; row >= 0; --row) {
            Complex acc = atb[std::size_t(row)];
            for (int j = row + 1; j < deg; ++j)
                acc -= ata[std::size_t(row) * std::size_t(deg) + std::size_t(j)] * coef[std::size_t(j)];
            coef[std::size_t(row)] = acc / ata[std::size_t(row) * std::size_t(deg) + std::size_t(row)];
        }
        // the fitted germs are polynomials (entire), so the declared disk only
        // needs to cover the leaf-space images downstream
        if (pol == Polarity::MINUS) {
            out.phi_minus[0] = coef;
            out.rho_minus[0] = std::max(2.5 * maxz, 0.2);
        } else {
            out.phi_plus[0] = coef;
            out.rho_plus[0] = std::max(2.5 * maxz, 0.2);
        }
    }
    return out;
}

RoundtripReport roundtrip_check(const NecklaceData& necklace, const RealizeOptions& ropts,
                                const PeriodOptions& popts) {
    using clock = std::chrono::steady_clock;
    RoundtripReport rep;
    auto t0 = clock::now();
    RealizeResult real = realize(necklace, ropts);
    if (!necklace.is_zero()) {
        // the Cousin stage pins the 0-end germ; the Newton stage pins both ends
        refine_realization(real.nf, necklace);
    }
    auto t1 = clock::now();
    rep.c = real.report.c;
    rep.realize_report = real.report;

    Integrand minus_r = Integrand::from_cstar(real.nf.r, real.nf.pq, Complex(-1.0));
    PeriodOptions po = popts;
    po.g_is_minus_r = true;
    std::vector<PeriodSample> samples = period_samples(real.nf, minus_r, po);
    auto t2 = clock::now();
    rep.realize_seconds = std::chrono::duration<double>(t1 - t0).count();
    rep.period_seconds = std::chrono::duration<double>(t2 - t1).count();

    // error relative to the modulus scale at the sampled levels (a per-sample
    // denominator is ill-posed on one-sided fixtures where half the expected
    // values vanish identically)
    double scale = 1e-12;
    std::vector<Complex> expecteds;
    for (const auto& s : samples) {
        Complex expected = (s.polarity == Polarity::MINUS) ? necklace.eval_minus(0, Complex(1.0) / s.h)
                                                           : necklace.eval_plus(0, s.h);
        expecteds.push_back(expected);
        scale = std::max(scale, std::abs(expected));
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        double rel = std::abs(s.value - expecteds[i]) / std::max(std::abs(expecteds[i]), scale);
        rep.rows.push_back({s.polarity, s.h, s.value, expecteds[i], rel});
        rep.max_rel_error = std::max(rep.max_rel_error, rel);
    }
    return rep;
}

TemporalResult temporal_normalize(const RealizeResult& realized, const NecklaceData& necklace,
                                  const BiSeries& u_unit, const PeriodOptions& opts) {
    const OrbitalNormalForm& nf = realized.nf;
    TemporalResult out;
    out.p_poly = formal_temporal_modulus(u_unit, nf.pq, nf.modulus.k);

    int D = u_unit.order();
    BiSeries inv_u = invert_unit(u_unit);
    std::vector<Complex> inv_p = invert_poly_series(out.p_poly, D / (nf.pq.p + nf.pq.q) + 1);
    BiSeries inv_p_sub(D);
    for (int l = 0; l < int(inv_p.size()); ++l) {
        int a = nf.pq.q * l, b = nf.pq.p * l;
        if (a + b > D) break;
        inv_p_sub.add_coef(a, b, inv_p[std::size_t(l)]);
    }
    BiSeries defect = inv_u - inv_p_sub;
    Integrand g = Integrand::from_series(defect, 1e-14);
    if (g.empty()) {
        out.g = CStarFunction::zero(nf.modulus.k);
        return out;
    }
    out.defect_samples = period_samples(nf, g, opts);
    NecklaceData target = fit_period_germs(out.defect_samples, nf.modulus.k, nf.modulus.mu);
    out.section = natural_section(nf, realized.grid, necklace, target);
    out.g = out.section.g;
    refine_section(nf, out.g, target);
    return out;
}

} // namespace saddlesmith
