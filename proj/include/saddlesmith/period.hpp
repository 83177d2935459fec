#ifndef SADDLESMITH_PERIOD_HPP
#define SADDLESMITH_PERIOD_HPP

#include <tuple>
#include <vector>

#include "saddlesmith/cauchy_heine.hpp"
#include "saddlesmith/formal.hpp"
#include "saddlesmith/sectors.hpp"

namespace saddlesmith {

/// Path parameters for the asymptotic leaves y(t) = y0 (1+t)^{-alpha} e^{iwt}.
struct AsymptoticPathSpec {
    double alpha = 0.0; // 0 selects the default 0.4/(p k)
    int winding_zi = +1;
    int winding_iz = -1;
    double t_cap = 6400.0;
    double ode_tol = 1e-10;
    double tail_goal = 5e-8;

    double effective_alpha(const ResonancePair& pq, int k) const;
};

/// Finite monomial integrand sum_j coef_j x^a y^b.
struct Integrand {
    std::vector<std::tuple<int, int, Complex>> terms;

    static Integrand from_series(const BiSeries& s, double drop_tol = 0.0);
    /// y sum u^n f_n(y) (times scale), expanded into monomials.
    static Integrand from_cstar(const CStarFunction& f, const ResonancePair& pq, Complex scale);
    Complex eval(Complex x, Complex y) const;
    bool empty() const { return terms.empty(); }
    /// ObstructedIntegrand if any u^n, n <= k, carries weight above tolerance.
    void check_admissible(const ResonancePair& pq, int k, double tol = 1e-12) const;
};

struct LeafTrajectory {
    Complex solution_value{};  // F at the start point (= -extrapolated integral)
    Complex raw_integral{};    // integral accumulated up to the final horizon
    double tail_estimate = 0.0;
    double final_t = 0.0;
    Complex final_u{};
    int steps = 0;
    int winding_used = 0;
    std::vector<double> t_samples;  // decimated path record
    std::vector<Complex> u_samples;
};

/// Integrate along the asymptotic leaf through (x0, y0) inside the sector and
/// accumulate int G du/u^{k+1}. LeftSector if the path exits (after retrying
/// the opposite winding once); TailNotConverged if the horizon cap is reached
/// with an unsettled tail.
LeafTrajectory integrate_leaf(const OrbitalNormalForm& nf, const SectorId& id, Complex x0, Complex y0,
                              const Integrand& g, const AsymptoticPathSpec& spec,
                              bool record_samples = false);

/// Canonical sectorial solution value F^{j,#}(x0, y0) of X_R . F = G.
Complex sectorial_solution(const OrbitalNormalForm& nf, const SectorId& id, Complex x0, Complex y0,
                           const Integrand& g, const AsymptoticPathSpec& spec);

struct PeriodSample {
    int j = 0;
    Polarity polarity = Polarity::MINUS;
    Complex h{};     // attained leaf coordinate H_N at the base point
    Complex value{}; // f^{+-}(h)
    double tail = 0.0;
    Complex base_x{}, base_y{};
};

struct PeriodOptions {
    AsymptoticPathSpec path;
    int n_args = 8;
    std::vector<double> radius_fractions = {0.3, 0.6};
    double abs_y = 1.5;
    bool g_is_minus_r = false; // reuse F as the sectorial normalization N
};

/// Sampled period operator: for each polarity and each target level, the
/// difference of the two sectorial solutions, reported at the attained h.
std::vector<PeriodSample> period_samples(const OrbitalNormalForm& nf, const Integrand& g,
                                         const PeriodOptions& opts);

/// Least-squares germ fit of sampled periods (degree-3 polynomials in h resp. 1/h).
NecklaceData fit_period_germs(const std::vector<PeriodSample>& samples, int k, Complex mu, int degree = 3);

/// Diagnostic probe of the minus-side two-ended cycle: difference of the
/// original ZI-path solution and the mirrored-path solution at the image
/// point, reported against the original leaf coordinate h.
std::vector<PeriodSample> minus_two_ended_probe(const OrbitalNormalForm& nf, const Integrand& g,
                                                const std::vector<double>& fractions, int n_args,
                                                const AsymptoticPathSpec& path);

struct RefineOptions {
    int max_iterations = 8;
    double tol = 4e-4;     // max relative sample mismatch accepted
    int n_args = 2;        // sampling density during the refinement
    std::vector<double> radius_fractions = {0.35, 0.65};
    int list_length = 3;   // Taylor coefficients kept per f_n during refinement
    double fd_step = 3e-4; // complex finite-difference step for the Jacobian
};

struct RefineReport {
    int iterations = 0;
    double initial_residual = 0.0;
    double final_residual = 0.0;
    bool converged = false;
};

/// Newton least-squares refinement of the realized R: drives the sampled
/// periods of -R (both polarities) onto the target necklace germs. The CH
/// fixed point provides the initial guess; the measurement map is holomorphic
/// in the coefficient lists, so a frozen complex-step Jacobian suffices.
RefineReport refine_realization(OrbitalNormalForm& nf, const NecklaceData& target,
                                const RefineOptions& opts = RefineOptions());

/// Same refinement for the natural section: X_R stays fixed and the G lists
/// are driven so that period(G) matches the target germs.
RefineReport refine_section(const OrbitalNormalForm& nf, CStarFunction& g, const NecklaceData& target,
                            const RefineOptions& opts = RefineOptions());

struct RoundtripRow {
    Polarity polarity;
    Complex h;
    Complex measured;
    Complex expected;
    double rel_error;
};

struct RoundtripReport {
    double c = 0.0;
    double max_rel_error = 0.0;
    double realize_seconds = 0.0;
    double period_seconds = 0.0;
    std::vector<RoundtripRow> rows;
    RealizeReport realize_report;
};

/// modulus -> normal form -> modulus: realize the necklace, then compare
/// period(-R) with the input phi at sampled leaf coordinates.
RoundtripReport roundtrip_check(const NecklaceData& necklace, const RealizeOptions& ropts = RealizeOptions(),
                                const PeriodOptions& popts = PeriodOptions());

struct TemporalResult {
    std::vector<Complex> p_poly;
    CStarFunction g;
    std::vector<PeriodSample> defect_samples;
    SectionResult section;
};

/// Temporal normalization of U X_R: P from the resonant projection of 1/U,
/// G = natural_section(period(1/U - 1/P)).
TemporalResult temporal_normalize(const RealizeResult& realized, const NecklaceData& necklace,
                                  const BiSeries& u_unit, const PeriodOptions& opts);

} // namespace saddlesmith

#endif
