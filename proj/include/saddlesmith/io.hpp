#ifndef SADDLESMITH_IO_HPP
#define SADDLESMITH_IO_HPP

#include <string>

#include <json.hpp>

#include "saddlesmith/cauchy_heine.hpp"
#include "saddlesmith/formal.hpp"
#include "saddlesmith/period.hpp"
#include "saddlesmith/series.hpp"

namespace saddlesmith {

using Json = nlohmann::ordered_json;

Json complex_to_json(Complex z);
Complex complex_from_json(const Json& j);

Json vector_field_to_json(const PlanarVectorField& z);
PlanarVectorField vector_field_from_json(const Json& j);

Json necklace_to_json(const NecklaceData& f);
NecklaceData necklace_from_json(const Json& j);

Json normal_form_to_json(const OrbitalNormalForm& nf);
OrbitalNormalForm normal_form_from_json(const Json& j);

Json modulus_to_json(const ResonancePair& pq, const NormalizationResult& res);

Json realize_report_to_json(const RealizeReport& rep);
Json roundtrip_report_to_json(const RoundtripReport& rep);

std::string period_samples_to_csv(const std::vector<PeriodSample>& samples);

Json load_json_file(const std::string& path);      // ParseError on failure
void save_text_file(const std::string& path, const std::string& text);

} // namespace saddlesmith

#endif
