#pragma once
#include <json.hpp>

#include <string>

#include "riemalpha/alpha.hpp"
#include "riemalpha/newton.hpp"

namespace riemalpha {

using Json = nlohmann::json;

// Scalars serialize at full double precision (shortest round-trip decimals,
// so parsing recovers the exact bits). Non-finite values, which JSON numbers
// cannot carry, become the strings "inf", "-inf", "nan".
Json json_double(double v);
double double_from_json(const Json& j);  // throws ConfigError

Json to_json(const VectorXd& v);
VectorXd vector_from_json(const Json& j);  // throws ConfigError

Json to_json(const TheoryConstants& c);  // exactly the five constant keys
Json to_json(const BasinRadius& radius);
Json to_json(const GammaBracket& gb);
Json to_json(const AlphaCertificate& cert);
Json to_json(const LemmaRow& row);
Json to_json(const LemmaReport& rep);
// points as arrays of ambient coordinates, plus the manifold id
Json to_json(const NewtonTrace& trace);

// One row per point: k, beta_k (empty on the final row, which took no
// step), dist_to_root only when a root is attached, cumulative_distance,
// termination. '.' decimal separator, ',' field separator, header first.
std::string trace_csv(const NewtonTrace& trace);

// Shortest round-trip decimal for one value ("inf" style for non-finite).
std::string format_double(double v);

}  // namespace riemalpha
