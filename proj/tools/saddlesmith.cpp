// saddlesmith: workbench for resonant-saddle normal forms.
//   normalize  vector field -> formal modulus (k, mu, P) and reduction steps
//   realize    orbital necklace -> normal form coefficients + convergence data
//   period     normal form + integrand -> sampled period operator (CSV)
//   roundtrip  necklace -> realize -> period(-R) -> comparison report
//   verify     run the module invariant suites

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "saddlesmith/io.hpp"
#include "saddlesmith/verify.hpp"

using namespace saddlesmith;

namespace {

std::string stem_of(const std::string& path) {
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return path;
    return path.substr(0, dot);
}

void write_or_print(const std::string& output, const std::string& text) {
    if (output.empty())
        std::cout << text << std::endl;
    else
        save_text_file(output, text);
}

struct GridOverride {
    int radial = 0;
    int y = 0;
    void apply(GridConfig& cfg) const {
        if (radial > 0) cfg.n_rad = radial;
        if (y > 0) cfg.n_y = y;
    }
};

int cmd_normalize(const std::string& input, const std::string& output) {
    Json j = load_json_file(input);
    PlanarVectorField z = vector_field_from_json(j);
    NormalizationResult res = formal_orbital_modulus(z);
    write_or_print(output, modulus_to_json(z.pq, res).dump(2));
    return 0;
}

int cmd_realize(const std::string& input, const std::string& output, double c_override,
                const GridOverride& grid, unsigned seed, double tol) {
    NecklaceData f = necklace_from_json(load_json_file(input));
    RealizeOptions opts;
    opts.c_override = c_override;
    opts.seed = seed;
    if (tol > 0.0) opts.fixpoint_tol = tol;
    grid.apply(opts.grid);
    RealizeResult res = realize(f, opts);

    Json out = normal_form_to_json(res.nf);
    out["report"] = realize_report_to_json(res.report);
    write_or_print(output, out.dump(2));

    std::string csv = "iteration,step_norm,ratio\n";
    for (std::size_t i = 0; i < res.report.step_norms.size(); ++i) {
        char buf[96];
        double ratio = i == 0 ? 0.0 : res.report.step_norms[i] / res.report.step_norms[i - 1];
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i + 1, res.report.step_norms[i], ratio);
        csv += buf;
    }
    if (!output.empty()) save_text_file(stem_of(output) + ".convergence.csv", csv);
    return 0;
}

Integrand integrand_from_json(const Json& j, const OrbitalNormalForm& nf) {
    if (j.is_object() && j.value("minus_r", false))
        return Integrand::from_cstar(nf.r, nf.pq, Complex(-1.0));
    const Json& terms = j.is_object() && j.contains("terms") ? j.at("terms") : j;
    Integrand g;
    for (const auto& t : terms) {
        if (!t.contains("a") || !t.contains("b"))
            fail(ErrorKind::ParseError, "integrand terms need exponents a, b");
        g.terms.push_back({t["a"].get<int>(), t["b"].get<int>(),
                           Complex(t.value("coef_re", 0.0), t.value("coef_im", 0.0))});
    }
    return g;
}

int cmd_period(const std::string& input, const std::string& integrand_path, const std::string& output,
               int n_args) {
    Json j = load_json_file(input);
    OrbitalNormalForm nf = normal_form_from_json(j);
    Json ji = integrand_path.empty() ? (j.contains("integrand") ? j["integrand"] : Json())
                                     : load_json_file(integrand_path);
    if (ji.is_null()) fail(ErrorKind::ParseError, "no integrand given (file or embedded key)");
    Integrand g = integrand_from_json(ji, nf);
    PeriodOptions opts;
    if (n_args > 0) opts.n_args = n_args;
    opts.g_is_minus_r = ji.is_object() && ji.value("minus_r", false);
    auto samples = period_samples(nf, g, opts);
    write_or_print(output, period_samples_to_csv(samples));
    return 0;
}

int cmd_roundtrip(const std::string& input, const std::string& output, double c_override,
                  const GridOverride& grid, unsigned seed, int n_args) {
    NecklaceData f = necklace_from_json(load_json_file(input));
    RealizeOptions ropts;
    ropts.c_override = c_override;
    ropts.seed = seed;
    grid.apply(ropts.grid);
    PeriodOptions popts;
    if (n_args > 0) popts.n_args = n_args;
    RoundtripReport rep = roundtrip_check(f, ropts, popts);
    write_or_print(output, roundtrip_report_to_json(rep).dump(2));
    return 0;
}

int cmd_verify(unsigned seed, const std::string& level, const std::string& output) {
    VerifyReport rep = run_verification(seed, level == "full");
    std::string text = verify_report_text(rep);
    std::cout << text;
    if (!output.empty()) save_text_file(output, text);
    return rep.all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"resonant-saddle normal form workbench"};
    app.require_subcommand(1);

    std::string input, output, integrand, level = "fast";
    double c_override = 0.0, tol = 0.0;
    unsigned seed = 1;
    int n_args = 0;
    GridOverride grid;

    auto add_common = [&](CLI::App* cmd, bool needs_input) {
        if (needs_input) cmd->add_option("--input", input, "input JSON path")->required();
        cmd->add_option("--output", output, "output path (stdout when omitted)");
        cmd->add_option("--seed", seed, "seed for randomized suites");
        cmd->add_option("--tol", tol, "tolerance override");
    };

    CLI::App* normalize = app.add_subcommand("normalize", "formal modulus of a vector field");
    add_common(normalize, true);

    CLI::App* realize_cmd = app.add_subcommand("realize", "orbital realization of a necklace");
    add_common(realize_cmd, true);
    realize_cmd->add_option("--c-override", c_override, "force the twist value");
    realize_cmd->add_option("--grid-radial", grid.radial, "radial nodes per ray");
    realize_cmd->add_option("--grid-y", grid.y, "nodes per y circle");

    CLI::App* period_cmd = app.add_subcommand("period", "sample the period operator");
    add_common(period_cmd, true);
    period_cmd->add_option("--integrand", integrand, "integrand JSON path");
    period_cmd->add_option("--args", n_args, "arguments per sampled circle");

    CLI::App* roundtrip = app.add_subcommand("roundtrip", "modulus -> normal form -> modulus check");
    add_common(roundtrip, true);
    roundtrip->add_option("--c-override", c_override, "force the twist value");
    roundtrip->add_option("--grid-radial", grid.radial, "radial nodes per ray");
    roundtrip->add_option("--grid-y", grid.y, "nodes per y circle");
    roundtrip->add_option("--args", n_args, "arguments per sampled circle");

    CLI::App* verify = app.add_subcommand("verify", "run the invariant suites");
    add_common(verify, false);
    verify->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (normalize->parsed()) return cmd_normalize(input, output);
        if (realize_cmd->parsed()) return cmd_realize(input, output, c_override, grid, seed, tol);
        if (period_cmd->parsed()) return cmd_period(input, integrand, output, n_args);
        if (roundtrip->parsed()) return cmd_roundtrip(input, output, c_override, grid, seed, n_args);
        if (verify->parsed()) return cmd_verify(seed, level, output);
    } catch (const SaddleError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return error_kind_exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 4;
    }
    return 0;
}
