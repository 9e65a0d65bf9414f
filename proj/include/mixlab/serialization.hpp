#pragma once

#include <string>

#include "json.hpp"

#include "mixlab/identifiability.hpp"
#include "mixlab/kernels.hpp"
#include "mixlab/measures.hpp"
#include "mixlab/posterior.hpp"
#include "mixlab/probes.hpp"

namespace mixlab {

using Json = nlohmann::ordered_json;

/// %.17g, with "inf" / "-inf" / "nan" spelled out.
std::string format_number(double x);

Json to_json(const MixingMeasure& g);
Json to_json(const NonIdentWitness& w);
Json to_json(const GramReport& r);
Json to_json(const LinearSystemReport& r);
Json to_json(const SlopeFit& f);
/// Parameters, verdicts and flags; the table itself goes to CSV.
Json envelope(const ProbeReport& r);

/// {"atoms": [[..], ..] or [x, ..], "weights": [..]}. Throws SchemaError
/// naming `path` and the offending field, including parameter-box
/// violations when a kernel is given.
MixingMeasure measure_from_json(const Json& j, const std::string& path,
                                const Kernel* kernel = nullptr);

/// Header plus one line per row; numbers in %.17g.
std::string to_csv(const ProbeReport& r);
std::string to_csv(const ContractionReport& r);

}  // namespace mixlab
