#include "saddlesmith/io.hpp"

#include <fstream>
#include <sstream>

namespace saddlesmith {

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j) {
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    if (!j.is_array() || j.size() != 2)
        fail(ErrorKind::ParseError, "complex values are [re, im] pairs");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

namespace {

Json coef_list_to_json(const std::vector<Complex>& list) {
    Json out = Json::array();
    for (Complex c : list) out.push_back(complex_to_json(c));
    return out;
}

std::vector<Complex> coef_list_from_json(const Json& j) {
    std::vector<Complex> out;
    for (const auto& e : j) out.push_back(complex_from_json(e));
    return out;
}

Json series_to_json(const BiSeries& s) {
    Json terms = Json::array();
    for (const auto& [key, v] : s.terms()) {
        Json t;
        t["a"] = key.first;
        t["b"] = key.second;
        t["coef_re"] = v.real();
        t["coef_im"] = v.imag();
        terms.push_back(t);
    }
    return terms;
}

BiSeries series_from_json(const Json& j, int order) {
    BiSeries s(order);
    for (const auto& t : j) {
        if (!t.contains("a") || !t.contains("b"))
            fail(ErrorKind::ParseError, "monomial terms need integer exponents a, b");
        double re = t.value("coef_re", 0.0), im = t.value("coef_im", 0.0);
        s.add_coef(t["a"].get<int>(), t["b"].get<int>(), Complex(re, im));
    }
    return s;
}

} // namespace

Json vector_field_to_json(const PlanarVectorField& z) {
    Json out;
    out["p"] = z.pq.p;
    out["q"] = z.pq.q;
    out["truncation"] = z.order();
    out["a"] = series_to_json(z.a);
    out["b"] = series_to_json(z.b);
    return out;
}

PlanarVectorField vector_field_from_json(const Json& j) {
    try {
        ResonancePair pq(j.at("p").get<int>(), j.at("q").get<int>());
        int order = j.value("truncation", default_truncation(pq, 3));
        return PlanarVectorField(series_from_json(j.at("a"), order), series_from_json(j.at("b"), order), pq);
    } catch (const Json::exception& e) {
        fail(ErrorKind::ParseError, std::string("vector field: ") + e.what());
    }
}

Json necklace_to_json(const NecklaceData& f) {
    Json out;
    out["k"] = f.k;
    out["mu"] = complex_to_json(f.mu);
    Json plus = Json::array(), minus = Json::array();
    for (const auto& l : f.phi_plus) plus.push_back(coef_list_to_json(l));
    for (const auto& l : f.phi_minus) minus.push_back(coef_list_to_json(l));
    out["phi_plus"] = plus;
    out["rho_plus"] = f.rho_plus;
    out["phi_minus"] = minus;
    out["rho_minus"] = f.rho_minus;
    return out;
}

NecklaceData necklace_from_json(const Json& j) {
    try {
        NecklaceData f;
        f.k = j.at("k").get<int>();
        f.mu = complex_from_json(j.at("mu"));
        for (const auto& l : j.at("phi_plus")) f.phi_plus.push_back(coef_list_from_json(l));
        for (const auto& l : j.at("phi_minus")) f.phi_minus.push_back(coef_list_from_json(l));
        f.rho_plus = j.at("rho_plus").get<std::vector<double>>();
        f.rho_minus = j.at("rho_minus").get<std::vector<double>>();
        f.validate();
        return f;
    } catch (const Json::exception& e) {
        fail(ErrorKind::ParseError, std::string("necklace: ") + e.what());
    }
}

Json normal_form_to_json(const OrbitalNormalForm& nf) {
    Json out;
    out["p"] = nf.pq.p;
    out["q"] = nf.pq.q;
    out["k"] = nf.modulus.k;
    out["mu"] = complex_to_json(nf.modulus.mu);
    out["c"] = nf.c;
    out["P"] = coef_list_to_json(nf.modulus.p_poly);
    Json fs = Json::array(), gs = Json::array();
    for (const auto& l : nf.r.fn) fs.push_back(coef_list_to_json(l));
    for (const auto& l : nf.g.fn) gs.push_back(coef_list_to_json(l));
    out["f_n"] = fs;
    out["g_n"] = gs;
    return out;
}

OrbitalNormalForm normal_form_from_json(const Json& j) {
    try {
        OrbitalNormalForm nf;
        nf.pq = ResonancePair(j.at("p").get<int>(), j.at("q").get<int>());
        nf.modulus.k = j.at("k").get<int>();
        nf.modulus.mu = complex_from_json(j.at("mu"));
        nf.c = j.at("c").get<double>();
        nf.modulus.p_poly = coef_list_from_json(j.at("P"));
        nf.r.k = nf.modulus.k;
        nf.g.k = nf.modulus.k;
        for (const auto& l : j.at("f_n")) nf.r.fn.push_back(coef_list_from_json(l));
        if (j.contains("g_n"))
            for (const auto& l : j.at("g_n")) nf.g.fn.push_back(coef_list_from_json(l));
        while (int(nf.g.fn.size()) < 2 * nf.modulus.k) nf.g.fn.push_back({});
        nf.validate();
        return nf;
    } catch (const Json::exception& e) {
        fail(ErrorKind::ParseError, std::string("normal form: ") + e.what());
    }
}

Json modulus_to_json(const ResonancePair& pq, const NormalizationResult& res) {
    Json out;
    out["p"] = pq.p;
    out["q"] = pq.q;
    out["k"] = res.k;
    out["mu"] = complex_to_json(res.mu);
    out["P_coeffs"] = coef_list_to_json(res.p_poly);
    out["time_scale"] = complex_to_json(res.time_scale);
    Json steps = Json::array();
    for (const auto& st : res.steps) {
        Json s;
        s["degree"] = st.degree;
        s["hx"] = series_to_json(st.hx);
        s["hy"] = series_to_json(st.hy);
        steps.push_back(s);
    }
    out["transform_steps"] = steps;
    return out;
}

Json realize_report_to_json(const RealizeReport& rep) {
    Json out;
    out["c"] = rep.c;
    out["iterations"] = rep.iterations;
    out["step_norms"] = rep.step_norms;
    out["n_sup"] = rep.n_sup;
    out["jump_residual"] = rep.jump_residual;
    out["gluing_residual"] = rep.gluing_residual;
    out["g0_abs"] = rep.g0_abs;
    out["fn0_abs"] = rep.fn0_abs;
    out["overfit_abs"] = rep.overfit_abs;
    out["negative_mode_abs"] = rep.negative_mode_abs;
    out["fit_residual"] = rep.fit_residual;
    out["image_radius_minus"] = rep.image_radius_minus;
    out["image_radius_plus"] = rep.image_radius_plus;
    return out;
}

Json roundtrip_report_to_json(const RoundtripReport& rep) {
    Json out;
    out["c"] = rep.c;
    out["max_rel_error"] = rep.max_rel_error;
    out["realize_seconds"] = rep.realize_seconds;
    out["period_seconds"] = rep.period_seconds;
    out["realize"] = realize_report_to_json(rep.realize_report);
    Json rows = Json::array();
    for (const auto& r : rep.rows) {
        Json row;
        row["polarity"] = r.polarity == Polarity::PLUS ? "+" : "-";
        row["h"] = complex_to_json(r.h);
        row["measured"] = complex_to_json(r.measured);
        row["expected"] = complex_to_json(r.expected);
        row["rel_error"] = r.rel_error;
        rows.push_back(row);
    }
    out["samples"] = rows;
    return out;
}

std::string period_samples_to_csv(const std::vector<PeriodSample>& samples) {
    std::ostringstream os;
    os.precision(17);
    os << "j,polarity,re_h,im_h,re_f,im_f,tail_estimate\n";
    for (const auto& s : samples) {
        os << s.j << ',' << (s.polarity == Polarity::PLUS ? '+' : '-') << ',' << s.h.real() << ','
           << s.h.imag() << ',' << s.value.real() << ',' << s.value.imag() << ',' << s.tail << '\n';
    }
    return os.str();
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::ParseError, "cannot open " + path);
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) fail(ErrorKind::ParseError, "invalid JSON in " + path);
    return j;
}

void save_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::ParseError, "cannot write " + path);
    out << text;
}

} // namespace saddlesmith
