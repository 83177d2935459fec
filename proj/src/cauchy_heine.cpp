#include "saddlesmith/cauchy_heine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "saddlesmith/parallel.hpp"
#include "saddlesmith/rng.hpp"

namespace saddlesmith {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr Complex kI(0.0, 1.0);

Complex eval_vanishing_series(const std::vector<Complex>& coefs, Complex z) {
    // sum coefs[m] z^{m+1}
    Complex acc(0.0);
    for (auto it = coefs.rbegin(); it != coefs.rend(); ++it) acc = (acc + *it) * z;
    return acc;
}

Complex eval_vanishing_series_deriv(const std::vector<Complex>& coefs, Complex z) {
    Complex acc(0.0);
    for (int m = int(coefs.size()) - 1; m >= 0; --m) acc = acc * z + coefs[std::size_t(m)] * double(m + 1);
    return acc;
}

double vanishing_primed_norm(const std::vector<Complex>& coefs, double rho) {
    // sup |f(z)|/|z| bounded by sum |c_m| rho^m
    double acc = 0.0, pw = 1.0;
    for (Complex c : coefs) {
        acc += std::abs(c) * pw;
        pw *= rho;
    }
    return acc;
}

Complex log_sigma_of(const ModelIntegralSpec& m) { return kI * kPi * m.mu / double(m.k); }
} // namespace

NecklaceData NecklaceData::zero(int k, Complex mu) {
    NecklaceData f;
    f.k = k;
    f.mu = mu;
    f.phi_plus.assign(std::size_t(k), {});
    f.phi_minus.assign(std::size_t(k), {});
    f.rho_plus.assign(std::size_t(k), 1.0);
    f.rho_minus.assign(std::size_t(k), 1.0);
    return f;
}

void NecklaceData::validate() const {
    if (k < 1) fail(ErrorKind::ParseError, "necklace order k must be positive");
    if (int(phi_plus.size()) != k || int(phi_minus.size()) != k || int(rho_plus.size()) != k ||
        int(rho_minus.size()) != k)
        fail(ErrorKind::ParseError, "necklace requires k components per polarity");
}

bool NecklaceData::is_zero(double tol) const {
    for (const auto* side : {&phi_plus, &phi_minus})
        for (const auto& list : *side)
            for (Complex c : list)
                if (std::abs(c) > tol) return false;
    return true;
}

Complex NecklaceData::eval_plus(int j, Complex h) const { return eval_vanishing_series(phi_plus[std::size_t(j)], h); }
Complex NecklaceData::eval_plus_deriv(int j, Complex h) const {
    return eval_vanishing_series_deriv(phi_plus[std::size_t(j)], h);
}
Complex NecklaceData::eval_minus(int j, Complex w) const { return eval_vanishing_series(phi_minus[std::size_t(j)], w); }
Complex NecklaceData::eval_minus_deriv(int j, Complex w) const {
    return eval_vanishing_series_deriv(phi_minus[std::size_t(j)], w);
}

double NecklaceData::primed_norm() const {
    double m = 0.0;
    for (int j = 0; j < k; ++j) {
        m = std::max(m, vanishing_primed_norm(phi_plus[std::size_t(j)], rho_plus[std::size_t(j)]));
        m = std::max(m, vanishing_primed_norm(phi_minus[std::size_t(j)], rho_minus[std::size_t(j)]));
    }
    return m;
}

double NecklaceData::min_radius() const {
    double r = std::numeric_limits<double>::infinity();
    for (double v : rho_plus) r = std::min(r, v);
    for (double v : rho_minus) r = std::min(r, v);
    return r;
}

JumpData JumpData::from_necklace(const NecklaceData& f) {
    f.validate();
    if (f.k != 1) fail(ErrorKind::ParseError, "the transform is implemented for k = 1");
    return {f.phi_minus[0], f.phi_plus[0], f.rho_minus[0], f.rho_plus[0]};
}

JumpData JumpData::cousin_from_necklace(const NecklaceData& f) {
    JumpData d = from_necklace(f);
    for (auto& c : d.plus) c = -c; // fixed point of Sigma(., (phi^-, -phi^+)) solves (*)
    return d;
}

Complex JumpData::eval_minus(Complex w) const { return eval_vanishing_series(minus, w); }
Complex JumpData::eval_minus_deriv(Complex w) const { return eval_vanishing_series_deriv(minus, w); }
Complex JumpData::eval_plus(Complex h) const { return eval_vanishing_series(plus, h); }
Complex JumpData::eval_plus_deriv(Complex h) const { return eval_vanishing_series_deriv(plus, h); }

SectorialGrid SectorialGrid::zero(const ModelIntegralSpec& mspec, const GridConfig& cfg) {
    if (mspec.k != 1 || mspec.pq.p != 1 || mspec.pq.q != 1)
        fail(ErrorKind::ParseError, "numeric realization is restricted to k = 1, p = q = 1");
    if (cfg.delta <= 0.0 || cfg.delta >= kPi / 8.0)
        fail(ErrorKind::BadOffset, "grid ray offset must lie in (0, pi/8)");
    SectorialGrid g;
    g.mspec_ = mspec;
    g.cfg_ = cfg;
    g.y_nodes_.reserve(std::size_t(cfg.n_y) * 2);
    for (int j = 0; j < cfg.n_y; ++j)
        g.y_nodes_.push_back(std::polar(cfg.y_outer, 2.0 * kPi * double(j) / double(cfg.n_y)));
    for (int j = 0; j < cfg.n_y; ++j)
        g.y_nodes_.push_back(std::polar(cfg.y_inner, 2.0 * kPi * double(j) / double(cfg.n_y)));

    g.r_nodes_.resize(std::size_t(cfg.n_rad));
    g.weights_.resize(std::size_t(cfg.n_rad));
    double s0 = std::log(cfg.r_min), s1 = std::log(cfg.r_max);
    double ds = (s1 - s0) / double(cfg.n_rad - 1);
    for (int i = 0; i < cfg.n_rad; ++i) {
        double r = std::exp(s0 + ds * double(i));
        g.r_nodes_[std::size_t(i)] = r;
        double w = (i == 0 || i == cfg.n_rad - 1) ? ds / 2.0 : ds;
        g.weights_[std::size_t(i)] = w * r; // dr = r ds
    }

    double d = cfg.delta;
    g.ray_angles_ = {-kPi / 8.0 + d, kPi / 8.0 - d, 7.0 * kPi / 8.0 + d, 9.0 * kPi / 8.0 - d};
    // V- rays carry H^{iz} whose determination sits 2pi up; V+ rays carry H^{zi}.
    g.ray_thetas_ = {g.ray_angles_[0] + 2.0 * kPi, g.ray_angles_[1] + 2.0 * kPi, g.ray_angles_[2],
                     g.ray_angles_[3]};

    g.nval_.assign(std::size_t(4) * g.y_nodes_.size() * std::size_t(cfg.n_rad), Complex(0.0));
    g.dval_.assign(g.nval_.size(), Complex(0.0));
    return g;
}

std::size_t SectorialGrid::index(int sector, int slot, int iy, int ir) const {
    return ((std::size_t(sector) * 2 + std::size_t(slot)) * y_nodes_.size() + std::size_t(iy)) *
               std::size_t(cfg_.n_rad) +
           std::size_t(ir);
}

void SectorialGrid::set(int sector, int slot, int iy, int ir, Complex n, Complex d) {
    std::size_t i = index(sector, slot, iy, ir);
    nval_[i] = n;
    dval_[i] = d;
}

double SectorialGrid::sup_norm() const {
    double m = 0.0;
    for (Complex v : nval_) m = std::max(m, std::abs(v));
    return m;
}

double SectorialGrid::sup_dy_norm() const {
    double m = 0.0;
    for (Complex v : dval_) m = std::max(m, std::abs(v));
    return m;
}

double SectorialGrid::distance(const SectorialGrid& other) const {
    double m = 0.0;
    for (std::size_t i = 0; i < nval_.size(); ++i) m = std::max(m, std::abs(nval_[i] - other.nval_[i]));
    return m;
}

namespace {

inline int ray_sector(int ray) { return ray < 2 ? 1 : 0; } // V- rays hold IZ data, V+ rays ZI
inline int ray_slot(int ray) { return ray < 2 ? ray : ray - 2; }

struct ContourChoice {
    int ray_m = 0, ray_p = 3;
    int corr_m = 0, corr_p = 0; // multipliers of the residue corrections
};

ContourChoice choose_contours(const SectorialGrid& g, const SectorId& id, double theta) {
    const double guard = g.config().delta / 2.0;
    const double gA = g.ray_angle(0), gB = g.ray_angle(1), gC = g.ray_angle(2), gD = g.ray_angle(3);
    ContourChoice c;
    if (id.family == SectorFamily::ZI) {
        if (theta <= gA + guard) {
            c.ray_m = 1;
            c.corr_m = +1;
        } else {
            c.ray_m = 0;
        }
        if (theta >= gD - guard) {
            c.ray_p = 2;
            c.corr_p = +1;
        } else {
            c.ray_p = 3;
        }
    } else {
        if (theta >= 2.0 * kPi + gB - guard) {
            c.ray_m = 0;
            c.corr_m = -1;
        } else {
            c.ray_m = 1;
        }
        if (theta <= gC + guard) {
            c.ray_p = 3;
            c.corr_p = -1;
        } else {
            c.ray_p = 2;
        }
    }
    return c;
}

// Integrand tables and point evaluation of Sigma(N_grid, f) for one y node.
class ChEval {
public:
    ChEval(const SectorialGrid& g, JumpData jd, int iy) : g_(g), jd_(std::move(jd)), iy_(iy) {
        y_ = g.y_nodes()[std::size_t(iy)];
        build_tables();
        build_constants();
    }

    const SectorialGrid& grid() const { return g_; }
    Complex y() const { return y_; }
    const JumpData& jump_data() const { return jd_; }

    // log H_N at a stored node of a ray
    Complex log_h_at_node(int ray, int ir) const { return logh_[std::size_t(ray)][std::size_t(ir)]; }

    /// Principal-contour transform value; EvalOnContour in guard zones.
    TransformValue principal(const SectorId& id, Complex u, bool need_du) const {
        double theta = sector_theta(g_.mspec().k, id, u);
        ContourChoice cc = choose_contours(g_, id, theta);
        if (cc.corr_m != 0 || cc.corr_p != 0)
            fail(ErrorKind::EvalOnContour, "evaluation point lies in a contour guard zone");
        return raw(id, cc, u, need_du);
    }

    /// Transform value anywhere in the sector. In guard zones the residue
    /// corrections are added; self-referential corrections are resolved with
    /// the fixed-point reading H = H_0 exp(Sigma), which is exact once the
    /// grid is converged (and coincides with the stored values on the rays).
    TransformValue solution(const SectorId& id, Complex u, bool need_du) const {
        double theta = sector_theta(g_.mspec().k, id, u);
        ContourChoice cc = choose_contours(g_, id, theta);
        TransformValue base = raw(id, cc, u, need_du);
        if (cc.corr_m == 0 && cc.corr_p == 0) return base;

        const auto& m = g_.mspec();
        Complex lsig = log_sigma_of(m);
        SectorId zi{0, SectorFamily::ZI}, iz{0, SectorFamily::IZ};
        Complex logH0_zi = std::log(y_) + log_model_hat(m, std::log(std::abs(u)), sector_theta(m.k, zi, u));
        Complex logH0_iz = double(2 * m.k - 1) * lsig + std::log(y_) +
                           log_model_hat(m, std::log(std::abs(u)), sector_theta(m.k, iz, u));
        auto dlog_du = [&](const SectorId& sid) {
            double th = sector_theta(m.k, sid, u);
            Complex logu(std::log(std::abs(u)), th);
            Complex u1 = std::exp(logu), uk = std::exp(logu * double(m.k));
            double q = double(m.pq.q), kk = double(m.k);
            return (-m.mu / q) / u1 + m.c * (uk / u1 * kk - kk / (uk * u1)) / (q * kk);
        };

        // companion sector value (principal by the wedge geometry)
        bool self_plus = (id.family == SectorFamily::ZI) ? (cc.corr_p != 0) : false;
        bool self_minus = (id.family == SectorFamily::IZ) ? (cc.corr_m != 0) : false;
        bool need_comp = (id.family == SectorFamily::ZI && cc.corr_m != 0) ||
                         (id.family == SectorFamily::IZ && cc.corr_p != 0);
        TransformValue comp{};
        if (need_comp) {
            SectorId other{0, id.family == SectorFamily::ZI ? SectorFamily::IZ : SectorFamily::ZI};
            comp = principal(other, u, need_du);
        }

        TransformValue out = base;
        Complex corr_known(0.0), corr_known_dy(0.0), corr_known_du(0.0);
        if (id.family == SectorFamily::ZI && cc.corr_m != 0) {
            Complex w = std::exp(-(logH0_iz + comp.value));
            Complex fp = jd_.eval_minus_deriv(w);
            corr_known += double(cc.corr_m) * jd_.eval_minus(w);
            corr_known_dy += double(cc.corr_m) * (-fp * w * (Complex(1.0) / y_ + comp.dy));
            corr_known_du += double(cc.corr_m) * (-fp * w * (dlog_du(iz) + comp.du));
        }
        if (id.family == SectorFamily::IZ && cc.corr_p != 0) {
            Complex h = std::exp(logH0_zi + comp.value);
            Complex fp = jd_.eval_plus_deriv(h);
            corr_known += double(cc.corr_p) * jd_.eval_plus(h);
            corr_known_dy += double(cc.corr_p) * (fp * h * (Complex(1.0) / y_ + comp.dy));
            corr_known_du += double(cc.corr_p) * (fp * h * (dlog_du(zi) + comp.du));
        }

        if (self_plus || self_minus) {
            Complex x = base.value + corr_known;
            for (int it = 0; it < 8; ++it) {
                Complex corr = self_plus
                                   ? double(cc.corr_p) * jd_.eval_plus(std::exp(logH0_zi + x))
                                   : double(cc.corr_m) * jd_.eval_minus(std::exp(-(logH0_iz + x)));
                x = base.value + corr_known + corr;
            }
            out.value = x;
            Complex s;
            Complex dl0;
            if (self_plus) {
                Complex h = std::exp(logH0_zi + out.value);
                s = double(cc.corr_p) * jd_.eval_plus_deriv(h) * h;
                dl0 = dlog_du(zi);
            } else {
                Complex w = std::exp(-(logH0_iz + out.value));
                s = double(cc.corr_m) * (-jd_.eval_minus_deriv(w) * w);
                dl0 = dlog_du(iz);
            }
            out.dy = (base.dy + corr_known_dy + s / y_) / (Complex(1.0) - s);
            out.du = (base.du + corr_known_du + s * dl0) / (Complex(1.0) - s);
        } else {
            out.value = base.value + corr_known;
            out.dy = base.dy + corr_known_dy;
            out.du = base.du + corr_known_du;
        }
        return out;
    }

    /// Raw contour sums for an explicit contour choice, corrections excluded,
    /// normalization included.
    TransformValue raw(const SectorId& id, const ContourChoice& cc, Complex u, bool need_du) const {
        Complex inv2pi = Complex(1.0) / (2.0 * kPi * kI);
        Complex im(0.0), ip(0.0), im_dy(0.0), ip_dy(0.0), im_du(0.0), ip_du(0.0);
        for (int which = 0; which < 2; ++which) {
            int ray = which == 0 ? cc.ray_m : cc.ray_p;
            Complex eib = std::polar(1.0, g_.ray_angle(ray));
            const auto& vals = val_[std::size_t(ray)];
            const auto& dys = dyv_[std::size_t(ray)];
            const auto& r = g_.r_nodes();
            const auto& w = g_.weights();
            Complex acc(0.0), acc_dy(0.0), acc_du(0.0);
            double min_dist = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < r.size(); ++i) {
                Complex z = eib * r[i];
                Complex dz = z - u;
                min_dist = std::min(min_dist, std::abs(dz));
                Complex ker = w[i] * eib / dz;
                acc += ker * vals[i];
                acc_dy += ker * dys[i];
                if (need_du) acc_du += (ker / dz) * vals[i];
            }
            if (min_dist < 1e-12 * std::max(1.0, std::abs(u)))
                fail(ErrorKind::EvalOnContour, "evaluation point collides with a quadrature contour");
            if (which == 0) {
                im = acc;
                im_dy = acc_dy;
                im_du = acc_du;
            } else {
                ip = acc;
                ip_dy = acc_dy;
                ip_du = acc_du;
            }
        }
        bool is_zi = id.family == SectorFamily::ZI;
        TransformValue out;
        out.value = inv2pi * (im - ip) - (is_zi ? c0_zi_ : c0_iz_);
        out.dy = inv2pi * (im_dy - ip_dy) - (is_zi ? c0_zi_dy_ : c0_iz_dy_);
        if (need_du) out.du = inv2pi * (im_du - ip_du);
        return out;
    }

private:
    void build_tables() {
        const auto& r = g_.r_nodes();
        Complex logy = std::log(y_);
        Complex lsig = log_sigma_of(g_.mspec());
        for (int ray = 0; ray < 4; ++ray) {
            int sec = ray_sector(ray), slot = ray_slot(ray);
            int nexp = (sec == 1) ? 2 * g_.mspec().k - 1 : 0;
            double theta = g_.ray_theta(ray);
            auto& vals = val_[std::size_t(ray)];
            auto& dys = dyv_[std::size_t(ray)];
            auto& lhs = logh_[std::size_t(ray)];
            vals.resize(r.size());
            dys.resize(r.size());
            lhs.resize(r.size());
            for (std::size_t i = 0; i < r.size(); ++i) {
                Complex n = g_.n_at(sec, slot, iy_, int(i));
                Complex d = g_.dy_at(sec, slot, iy_, int(i));
                Complex logH = double(nexp) * lsig + logy +
                               log_model_hat(g_.mspec(), std::log(r[i]), theta) + n;
                lhs[i] = logH;
                Complex dlog = Complex(1.0) / y_ + d;
                if (ray < 2) {
                    Complex w = std::exp(-logH);
                    if (std::abs(w) > jd_.rho_minus * (1.0 + 1e-9))
                        fail(ErrorKind::NotAdapted, "leaf coordinate left the phi^- disk");
                    vals[i] = jd_.eval_minus(w);
                    dys[i] = -jd_.eval_minus_deriv(w) * w * dlog;
                } else {
                    Complex h = std::exp(logH);
                    if (std::abs(h) > jd_.rho_plus * (1.0 + 1e-9))
                        fail(ErrorKind::NotAdapted, "leaf coordinate left the phi^+ disk");
                    vals[i] = jd_.eval_plus(h);
                    dys[i] = jd_.eval_plus_deriv(h) * h * dlog;
                }
            }
        }
    }

    void build_constants() {
        Complex inv2pi = Complex(1.0) / (2.0 * kPi * kI);
        auto pair_c0 = [&](int rm, int rp, Complex& c0, Complex& c0dy) {
            Complex acc(0.0), acc_dy(0.0);
            for (int which = 0; which < 2; ++which) {
                int ray = which == 0 ? rm : rp;
                Complex eib = std::polar(1.0, g_.ray_angle(ray));
                const auto& vals = val_[std::size_t(ray)];
                const auto& dys = dyv_[std::size_t(ray)];
                const auto& r = g_.r_nodes();
                const auto& w = g_.weights();
                Complex a(0.0), ady(0.0);
                for (std::size_t i = 0; i < r.size(); ++i) {
                    Complex ker = w[i] * eib / (eib * r[i]);
                    a += ker * vals[i];
                    ady += ker * dys[i];
                }
                double sgn = which == 0 ? 1.0 : -1.0;
                acc += sgn * a;
                acc_dy += sgn * ady;
            }
            c0 = inv2pi * acc;
            c0dy = inv2pi * acc_dy;
        };
        pair_c0(0, 3, c0_zi_, c0_zi_dy_);
        pair_c0(1, 2, c0_iz_, c0_iz_dy_);
    }

    const SectorialGrid& g_;
    JumpData jd_;
    int iy_;
    Complex y_;
    std::array<std::vector<Complex>, 4> val_, dyv_, logh_;
    Complex c0_zi_{}, c0_iz_{}, c0_zi_dy_{}, c0_iz_dy_{};
};

} // namespace

TransformValue ch_transform_point(const SectorialGrid& grid, const JumpData& f, const SectorId& id,
                                  Complex u, int iy, bool need_du) {
    if (!sector_contains(grid.mspec().k, id, u))
        fail(ErrorKind::OutOfSector, "transform evaluation outside the sector");
    ChEval ev(grid, f, iy);
    return ev.principal(id, u, need_du);
}

std::vector<Complex> ch_transform(const SectorialGrid& grid, const NecklaceData& f,
                                  const std::vector<std::pair<SectorId, Complex>>& eval_points, int iy) {
    JumpData jd = JumpData::from_necklace(f);
    ChEval ev(grid, jd, iy);
    std::vector<Complex> out;
    out.reserve(eval_points.size());
    for (const auto& [id, u] : eval_points) {
        if (!sector_contains(grid.mspec().k, id, u))
            fail(ErrorKind::OutOfSector, "transform evaluation outside the sector");
        out.push_back(ev.principal(id, u, false).value);
    }
    return out;
}

TransformValue evaluate_solution(const SectorialGrid& grid, const NecklaceData& necklace,
                                 const SectorId& id, Complex u, int iy, bool need_du) {
    ChEval ev(grid, JumpData::cousin_from_necklace(necklace), iy);
    return ev.solution(id, u, need_du);
}

namespace {

// One Lambda sweep for a single y node; corrections read the *old* grid values,
// which is the literal meaning of Sigma(N_old, f) at its own nodes.
void lambda_at_nodes(const SectorialGrid& g, const ChEval& ev, const JumpData& jd, int iy,
                     SectorialGrid& out) {
    Complex y = ev.y();
    for (int sector = 0; sector < 2; ++sector) {
        SectorId id{0, sector == 0 ? SectorFamily::ZI : SectorFamily::IZ};
        for (int slot = 0; slot < 2; ++slot) {
            int ray = g.global_ray(sector, slot);
            double ang = g.ray_angle(ray);
            double theta = (sector == 1) ? ang + 2.0 * kPi : ang;
            ContourChoice cc = choose_contours(g, id, theta);
            Complex eic = std::polar(1.0, ang);
            for (int ir = 0; ir < g.n_rad(); ++ir) {
                Complex u = eic * g.r_nodes()[std::size_t(ir)];
                TransformValue v = ev.raw(id, cc, u, false);
                Complex val = v.value, dy = v.dy;
                if (cc.corr_m != 0) {
                    // f^-(H^{iz}(u,y)); u is a V- node so the IZ data live here
                    Complex logH = ev.log_h_at_node(ray, ir);
                    Complex d = g.dy_at(1, ray_slot(ray), iy, ir);
                    Complex w = std::exp(-logH);
                    val += double(cc.corr_m) * jd.eval_minus(w);
                    dy += double(cc.corr_m) * (-jd.eval_minus_deriv(w) * w * (Complex(1.0) / y + d));
                }
                if (cc.corr_p != 0) {
                    Complex logH = ev.log_h_at_node(ray, ir);
                    Complex d = g.dy_at(0, ray_slot(ray), iy, ir);
                    Complex h = std::exp(logH);
                    val += double(cc.corr_p) * jd.eval_plus(h);
                    dy += double(cc.corr_p) * (jd.eval_plus_deriv(h) * h * (Complex(1.0) / y + d));
                }
                out.set(sector, slot, iy, ir, val, dy);
            }
        }
    }
}

} // namespace

SectorialGrid lambda_step(const SectorialGrid& grid, const NecklaceData& necklace) {
    if (grid.sup_norm() > 1.0 + 1e-12)
        fail(ErrorKind::NotInUnitBall, "fixed-point iterate left the unit ball");
    JumpData jd = JumpData::cousin_from_necklace(necklace);
    SectorialGrid out = SectorialGrid::zero(grid.mspec(), grid.config());
    std::size_t ny = std::size_t(grid.n_y_total());
    std::vector<int> failed(ny, 0);
    std::vector<std::string> messages(ny);
    parallel_for(ny, [&](std::size_t iy) {
        try {
            ChEval ev(grid, jd, int(iy));
            lambda_at_nodes(grid, ev, jd, int(iy), out);
        } catch (const SaddleError& e) {
            failed[iy] = 1;
            messages[iy] = e.what();
        }
    });
    for (std::size_t iy = 0; iy < ny; ++iy)
        if (failed[iy]) fail(ErrorKind::NotAdapted, messages[iy]);
    return out;
}

double jump_residual(const SectorialGrid& grid, const NecklaceData& necklace, int samples) {
    const auto& m = grid.mspec();
    Complex lsig = log_sigma_of(m);
    int n_r = std::max(2, samples / 12);
    const int n_off = 3;
    double res = 0.0;
    SectorId zi{0, SectorFamily::ZI}, iz{0, SectorFamily::IZ};
    JumpData jd = JumpData::cousin_from_necklace(necklace);
    std::vector<int> ys = {0, grid.n_y_total() / 3, grid.n_y_total() - 1};
    for (int iy : ys) {
        ChEval ev(grid, jd, iy);
        Complex y = grid.y_nodes()[std::size_t(iy)];
        for (Polarity pol : {Polarity::MINUS, Polarity::PLUS}) {
            double center = (pol == Polarity::MINUS) ? 0.0 : kPi;
            for (int io = 0; io < n_off; ++io) {
                double off = 0.04 * (double(io) / double(n_off - 1) * 2.0 - 1.0);
                for (int ir = 0; ir < n_r; ++ir) {
                    double r = 0.5 * std::pow(4.0, double(ir) / double(n_r - 1)); // 0.5 .. 2
                    Complex u = std::polar(r, center + off);
                    TransformValue nzi = ev.solution(zi, u, false);
                    TransformValue niz = ev.solution(iz, u, false);
                    if (pol == Polarity::MINUS) {
                        Complex logHiz = double(2 * m.k - 1) * lsig + std::log(y) +
                                         log_model_hat(m, std::log(std::abs(u)), sector_theta(m.k, iz, u)) +
                                         niz.value;
                        Complex rhs = necklace.eval_minus(0, std::exp(-logHiz));
                        res = std::max(res, std::abs(nzi.value - niz.value - rhs));
                    } else {
                        Complex logHzi = std::log(y) +
                                         log_model_hat(m, std::log(std::abs(u)), sector_theta(m.k, zi, u)) +
                                         nzi.value;
                        Complex rhs = necklace.eval_plus(0, std::exp(logHzi));
                        res = std::max(res, std::abs(niz.value - nzi.value - rhs));
                    }
                }
            }
        }
    }
    return res;
}

double measured_lipschitz(const NecklaceData& necklace, double c, const GridConfig& cfg, unsigned seed,
                          int pairs) {
    ModelIntegralSpec m{necklace.k, necklace.mu, c, ResonancePair(1, 1)};
    Rng rng(seed);
    double worst = 0.0;
    for (int p = 0; p < pairs; ++p) {
        SectorialGrid g1 = SectorialGrid::zero(m, cfg), g2 = SectorialGrid::zero(m, cfg);
        for (int sector = 0; sector < 2; ++sector)
            for (int slot = 0; slot < 2; ++slot)
                for (int iy = 0; iy < g1.n_y_total(); ++iy)
                    for (int ir = 0; ir < cfg.n_rad; ++ir) {
                        g1.set(sector, slot, iy, ir, rng.complex_in_disk(1.0), rng.complex_in_disk(0.5));
                        g2.set(sector, slot, iy, ir, rng.complex_in_disk(1.0), rng.complex_in_disk(0.5));
                    }
        SectorialGrid l1 = lambda_step(g1, necklace);
        SectorialGrid l2 = lambda_step(g2, necklace);
        double dn = g1.distance(g2);
        if (dn > 0.0) worst = std::max(worst, l1.distance(l2) / dn);
    }
    return worst;
}

double choose_twist(const NecklaceData& necklace, const GridConfig& cfg, unsigned seed) {
    necklace.validate();
    if (necklace.k != 1) fail(ErrorKind::ParseError, "twist search is restricted to k = 1");
    double rho = necklace.min_radius();
    double norm = necklace.primed_norm();
    ModelIntegralSpec probe{necklace.k, necklace.mu, 5.0, ResonancePair(1, 1)};
    double a_ref = empirical_A(probe, 4000);

    double c0 = std::max(2.0, std::sqrt(std::exp(1.0) * norm));
    if (rho > 0.0 && std::isfinite(rho)) {
        double c_adapt = double(necklace.k) * std::log(2.0 * a_ref / (std::exp(1.0) * rho));
        c0 = std::max(c0, c_adapt);
    }
    const double c_cap = 200.0;
    double c = c0;
    for (int attempt = 0; attempt <= 12; ++attempt, c *= 2.0) {
        if (c > c_cap) continue;
        ModelIntegralSpec m{necklace.k, necklace.mu, c, ResonancePair(1, 1)};
        // margin 2 on the adaptedness radius, ball bound e^1 on exp||N||
        if (!(rho > 0.0) || !adaptedness_check(m, rho / 2.0, 1.0)) continue;
        if (necklace.is_zero()) return c;
        double lip;
        try {
            lip = measured_lipschitz(necklace, c, cfg, seed, 2);
        } catch (const SaddleError&) {
            continue;
        }
        if (lip <= 0.5) return c;
    }
    fail(ErrorKind::TwistSearchFailed, "no admissible twist after 12 doublings");
}

namespace {

// dense complex least squares for a small Vandermonde system
std::vector<Complex> poly_lsq(const std::vector<Complex>& us, const std::vector<Complex>& qs, int deg) {
    int n = deg + 1;
    std::vector<Complex> ata(std::size_t(n) * std::size_t(n), Complex(0.0));
    std::vector<Complex> atb(std::size_t(n), Complex(0.0));
    for (std::size_t s = 0; s < us.size(); ++s) {
        std::vector<Complex> pw(std::size_t(n), Complex(0.0));
        pw[0] = Complex(1.0);
        for (int i = 1; i < n; ++i) pw[std::size_t(i)] = pw[std::size_t(i - 1)] * us[s];
        for (int i = 0; i < n; ++i) {
            atb[std::size_t(i)] += std::conj(pw[std::size_t(i)]) * qs[s];
            for (int j = 0; j < n; ++j)
                ata[std::size_t(i) * std::size_t(n) + std::size_t(j)] +=
                    std::conj(pw[std::size_t(i)]) * pw[std::size_t(j)];
        }
    }
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
            Complex fct = ata[std::size_t(row) * std::size_t(n) + std::size_t(col)] / d;
            for (int j = col; j < n; ++j)
                ata[std::size_t(row) * std::size_t(n) + std::size_t(j)] -=
                    fct * ata[std::size_t(col) * std::size_t(n) + std::size_t(j)];
            atb[std::size_t(row)] -= fct * atb[std::size_t(col)];
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

struct FitSummary {
    std::vector<std::vector<Complex>> coeffs; // per y node, u-powers 0..2k
    double gluing = 0.0, fit_residual = 0.0, overfit = 0.0, g0 = 0.0;
};

// Fit samples (per y node) of a function expected to be sum_{n<=2k} g_n(y) u^n.
// sample_fn(iy, u) must return the two sectorial values (ZI, IZ).
template <typename F>
FitSummary fit_u_polynomial(const SectorialGrid& grid, int kk, F&& sample_fn) {
    FitSummary out;
    std::size_t ny = std::size_t(grid.n_y_total());
    out.coeffs.assign(ny, {});
    const int n_rad_fit = 10;
    std::vector<double> glue(ny, 0.0), fitr(ny, 0.0), over(ny, 0.0), g0(ny, 0.0);
    std::vector<int> failed(ny, 0);
    std::vector<std::string> msg(ny);
    parallel_for(ny, [&](std::size_t iy) {
        try {
            std::vector<Complex> us, qs;
            for (double ang : {0.0, kPi}) {
                for (int irr = 0; irr < n_rad_fit; ++irr) {
                    double r = 0.3 * std::pow(2.0 / 0.3, double(irr) / double(n_rad_fit - 1));
                    Complex u = std::polar(r, ang);
                    auto [q1, q2] = sample_fn(int(iy), u);
                    double scale = std::max({std::abs(q1), std::abs(q2), 1e-9});
                    glue[iy] = std::max(glue[iy], std::abs(q1 - q2) / scale);
                    us.push_back(u);
                    qs.push_back((q1 + q2) / 2.0);
                }
            }
            std::vector<Complex> fit = poly_lsq(us, qs, 2 * kk);
            std::vector<Complex> fit_ext = poly_lsq(us, qs, 2 * kk + 2);
            for (int n = 2 * kk + 1; n <= 2 * kk + 2; ++n)
                over[iy] = std::max(over[iy], std::abs(fit_ext[std::size_t(n)]));
            g0[iy] = std::abs(fit[0]);
            for (std::size_t s = 0; s < us.size(); ++s) {
                Complex model(0.0);
                for (int n = 2 * kk; n >= 0; --n) model = model * us[s] + fit[std::size_t(n)];
                fitr[iy] = std::max(fitr[iy], std::abs(qs[s] - model));
            }
            out.coeffs[iy] = std::move(fit);
        } catch (const SaddleError& e) {
            failed[iy] = 1;
            msg[iy] = e.what();
        }
    });
    for (std::size_t iy = 0; iy < ny; ++iy) {
        if (failed[iy]) fail(ErrorKind::NotAdapted, msg[iy]);
        out.gluing = std::max(out.gluing, glue[iy]);
        out.fit_residual = std::max(out.fit_residual, fitr[iy]);
        out.overfit = std::max(out.overfit, over[iy]);
        out.g0 = std::max(out.g0, g0[iy]);
    }
    return out;
}

// Fourier (Laurent) modes of the fitted u-coefficients over the outer circle,
// assembled into a bivariate series in (x,y). The raw Cousin normalization
// produces a gauge of R that is a holomorphic (x,y)-germ but not yet in C_*
// (monomials x^n y^{n+m} with m <= 0 appear); those are removed afterwards by
// the C_* gauge reduction.
struct LaurentExtract {
    BiSeries series{0};
    double fn0 = 0.0;        // resonant modes g_n(0) of the raw fit
    double raw_scale = 0.0;  // dominant coefficient magnitude
};

LaurentExtract laurent_extract(const FitSummary& fit, const GridConfig& cfg, int kk,
                               const ResonancePair& pq, int trunc) {
    LaurentExtract out;
    out.series = BiSeries(trunc);
    const int n_y = cfg.n_y;
    const int m_keep = n_y / 2 - 2;
    for (int n = 0; n <= 2 * kk; ++n) {
        for (int m = -n_y / 2; m < m_keep; ++m) {
            Complex acc(0.0);
            for (int j = 0; j < n_y; ++j) {
                double ph = -2.0 * kPi * double(j) * double(m) / double(n_y);
                acc += fit.coeffs[std::size_t(j)][std::size_t(n)] * std::polar(1.0, ph);
            }
            acc /= double(n_y);
            Complex coef = acc / std::pow(cfg.y_outer, m);
            if (std::abs(coef) < 1e-13) continue;
            out.raw_scale = std::max(out.raw_scale, std::abs(coef));
            if (m == 0) out.fn0 = std::max(out.fn0, std::abs(coef));
            int a = pq.q * n, b = pq.p * n + m;
            if (b < 0 || a + b > trunc) continue;
            out.series.add_coef(a, b, coef);
        }
    }
    return out;
}

} // namespace

RealizeResult realize(const NecklaceData& necklace, const RealizeOptions& opts) {
    necklace.validate();
    if (necklace.k != 1) fail(ErrorKind::ParseError, "realization is restricted to k = 1, p = q = 1");
    RealizeResult out;
    RealizeReport& rep = out.report;

    double c = opts.c_override > 0.0 ? opts.c_override : choose_twist(necklace, opts.grid, opts.seed);
    rep.c = c;
    ModelIntegralSpec mspec{necklace.k, necklace.mu, c, ResonancePair(1, 1)};

    SectorialGrid grid = SectorialGrid::zero(mspec, opts.grid);
    bool converged = necklace.is_zero(); // the zero grid is already the fixed point
    for (int it = 0; !converged && it < opts.max_iterations; ++it) {
        SectorialGrid next = lambda_step(grid, necklace);
        double step = next.distance(grid);
        rep.step_norms.push_back(step);
        grid = std::move(next);
        ++rep.iterations;
        if (step < opts.fixpoint_tol) converged = true;
    }
    if (!converged)
        fail(ErrorKind::NoConvergence, "fixed point did not converge within the iteration budget");
    rep.n_sup = grid.sup_norm();
    rep.jump_residual = necklace.is_zero() ? 0.0 : jump_residual(grid, necklace, 30);

    // ----- extraction of R = -(u^{k+1} N_u + M0 y N_y) / (1 + y N_y) in C_* -----
    const int kk = necklace.k;
    JumpData jd = JumpData::cousin_from_necklace(necklace);
    std::vector<std::unique_ptr<ChEval>> evals(std::size_t(grid.n_y_total()));
    for (int iy = 0; iy < grid.n_y_total(); ++iy) evals[std::size_t(iy)] = std::make_unique<ChEval>(grid, jd, iy);

    SectorId zi{0, SectorFamily::ZI}, iz{0, SectorFamily::IZ};
    FitSummary fit = fit_u_polynomial(grid, kk, [&](int iy, Complex u) {
        Complex y = grid.y_nodes()[std::size_t(iy)];
        Complex m0 = c * (Complex(1.0) - std::pow(u, 2 * kk)) + necklace.mu * std::pow(u, kk);
        auto qof = [&](const TransformValue& v) {
            return -(std::pow(u, kk + 1) * v.du + m0 * y * v.dy) / (Complex(1.0) + y * v.dy);
        };
        TransformValue vzi = evals[std::size_t(iy)]->principal(zi, u, true);
        TransformValue viz = evals[std::size_t(iy)]->principal(iz, u, true);
        return std::pair<Complex, Complex>(qof(vzi), qof(viz));
    });
    rep.gluing_residual = fit.gluing;
    rep.fit_residual = fit.fit_residual;
    rep.overfit_abs = fit.overfit;
    rep.g0_abs = fit.g0;

    // Laurent extraction in the raw Cousin gauge, then reduction into C_*.
    const int trunc = std::max(default_truncation(ResonancePair(1, 1), kk), 4 * kk + opts.grid.n_y / 2 + 6);
    LaurentExtract lx = laurent_extract(fit, opts.grid, kk, ResonancePair(1, 1), trunc);
    CStarReduction gauge = reduce_to_cstar(lx.series, ResonancePair(1, 1), kk, necklace.mu, c, trunc);
    double scale = std::max(lx.raw_scale, 1e-30);
    rep.negative_mode_abs = gauge.residual / scale;
    rep.fn0_abs = gauge.obstructed_residue; // mode-0 content that no gauge can remove
    CStarFunction r_fun = cstar_lists_from_series(gauge.r, ResonancePair(1, 1), kk);

    // measured image radii of the leaf coordinates on the wedge fibers
    {
        Complex lsig = log_sigma_of(mspec);
        double rm = 0.0, rp = 0.0;
        for (int iy = 0; iy < opts.grid.n_y; iy += std::max(1, opts.grid.n_y / 8)) {
            Complex y = grid.y_nodes()[std::size_t(iy)];
            for (int irr = 0; irr < 9; ++irr) {
                double r = 0.4 * std::pow(2.5 / 0.4, double(irr) / 8.0);
                Complex um = std::polar(r, 0.0), up = std::polar(r, kPi);
                TransformValue nm = evals[std::size_t(iy)]->solution(iz, um, false);
                TransformValue np = evals[std::size_t(iy)]->solution(zi, up, false);
                Complex lm = double(2 * kk - 1) * lsig + std::log(y) +
                             log_model_hat(mspec, std::log(r), sector_theta(kk, iz, um)) + nm.value;
                Complex lp = std::log(y) + log_model_hat(mspec, std::log(r), sector_theta(kk, zi, up)) +
                             np.value;
                rm = std::max(rm, std::abs(std::exp(-lm)));
                rp = std::max(rp, std::abs(std::exp(lp)));
            }
        }
        rep.image_radius_minus = rm;
        rep.image_radius_plus = rp;
    }

    if (!necklace.is_zero()) {
        if (rep.gluing_residual > 1e-5)
            fail(ErrorKind::GluingResidualTooLarge, "sectorial R values do not glue");
        if (rep.overfit_abs > 1e-5 || rep.fit_residual > 1e-5)
            fail(ErrorKind::DegreeFitResidualTooLarge, "Q is not a degree-2k polynomial in u");
    }

    out.nf.pq = ResonancePair(1, 1);
    out.nf.modulus.k = kk;
    out.nf.modulus.mu = necklace.mu;
    out.nf.modulus.p_poly = {Complex(1.0)};
    out.nf.c = c;
    out.nf.r = std::move(r_fun);
    out.nf.g = CStarFunction::zero(kk);
    out.grid = std::move(grid);
    return out;
}

SectionResult natural_section(const OrbitalNormalForm& nf, const SectorialGrid& realized_grid,
                              const NecklaceData& necklace, const NecklaceData& target) {
    target.validate();
    if (target.k != 1) fail(ErrorKind::ParseError, "the section is restricted to k = 1");
    const int kk = target.k;
    const double c = nf.c;

    JumpData jd = JumpData::cousin_from_necklace(target); // (f^-, -f^+): periods come out as (f^-, f^+)
    JumpData jn = JumpData::cousin_from_necklace(necklace);
    std::vector<std::unique_ptr<ChEval>> evals(std::size_t(realized_grid.n_y_total()));
    std::vector<std::unique_ptr<ChEval>> nevals(std::size_t(realized_grid.n_y_total()));
    for (int iy = 0; iy < realized_grid.n_y_total(); ++iy) {
        evals[std::size_t(iy)] = std::make_unique<ChEval>(realized_grid, jd, iy);
        nevals[std::size_t(iy)] = std::make_unique<ChEval>(realized_grid, jn, iy);
    }

    // G = X_R . F with the grid-gauge R (read pointwise from the converged
    // Cousin solution), so that the two sectorial values glue exactly.
    SectorId zi{0, SectorFamily::ZI}, iz{0, SectorFamily::IZ};
    FitSummary fit = fit_u_polynomial(realized_grid, kk, [&](int iy, Complex u) {
        Complex y = realized_grid.y_nodes()[std::size_t(iy)];
        Complex m0 = c * (Complex(1.0) - std::pow(u, 2 * kk)) + nf.modulus.mu * std::pow(u, kk);
        auto gof = [&](const TransformValue& f, const TransformValue& n) {
            Complex r_old = -(std::pow(u, kk + 1) * n.du + m0 * y * n.dy) / (Complex(1.0) + y * n.dy);
            return std::pow(u, kk + 1) * f.du + (m0 + r_old) * y * f.dy;
        };
        TransformValue fzi = evals[std::size_t(iy)]->principal(zi, u, true);
        TransformValue fiz = evals[std::size_t(iy)]->principal(iz, u, true);
        TransformValue nzi = nevals[std::size_t(iy)]->principal(zi, u, true);
        TransformValue niz = nevals[std::size_t(iy)]->principal(iz, u, true);
        return std::pair<Complex, Complex>(gof(fzi, nzi), gof(fiz, niz));
    });

    // Laurent extraction, then reduce to C_* by adding coboundaries X_R . T,
    // which leaves every period untouched.
    const GridConfig& cfg = realized_grid.config();
    const int trunc = std::max(default_truncation(nf.pq, kk), 4 * kk + cfg.n_y / 2 + 6);
    LaurentExtract lx = laurent_extract(fit, cfg, kk, nf.pq, trunc);
    PlanarVectorField xr = build_orbital_field(nf, trunc);
    BiSeries g_series = lx.series;
    double residual = 0.0, obstructed = 0.0;
    for (int sweep = 0; sweep < 6; ++sweep) {
        BiSeries bad(trunc);
        residual = 0.0;
        obstructed = 0.0;
        for (const auto& [key, v] : g_series.terms()) {
            if (in_cstar_cone(key.first, key.second, nf.pq, kk)) continue;
            bool resonant = long(key.second) * nf.pq.q == long(key.first) * nf.pq.p;
            if (resonant && key.first / nf.pq.q <= kk) {
                obstructed = std::max(obstructed, std::abs(v));
                continue;
            }
            bad.add_coef(key.first, key.second, v);
            residual = std::max(residual, std::abs(v));
        }
        if (residual < 1e-12) break;
        BiSeries t = formal_cohomological_solve(xr, bad);
        g_series -= lie_derivative(xr, t);
    }
    BiSeries clean(trunc);
    for (const auto& [key, v] : g_series.terms())
        if (in_cstar_cone(key.first, key.second, nf.pq, kk)) clean.add_coef(key.first, key.second, v);

    SectionResult out;
    out.g = cstar_lists_from_series(clean, nf.pq, kk);
    out.fit_residual = std::max(fit.fit_residual, fit.gluing);
    out.overfit_abs = fit.overfit;
    out.g0_abs = obstructed;
    out.negative_mode_abs = residual / std::max(lx.raw_scale, 1e-30);
    if (out.overfit_abs > 1e-5 || out.fit_residual > 1e-4)
        fail(ErrorKind::FitResidualTooLarge, "section output does not fit the C_* form");
    return out;
}

} // namespace saddlesmith
