#pragma once

// JSON encodings. Matrices are row-major arrays of rows; complex entries are
// [re, im] pairs and real matrices use plain numbers. Channels and states are
// {"repr", "dim", "data"} objects, where a Kraus set's data is a list of
// matrices.

#include <string>

#include <json.hpp>

#include "qstiefel/channels.hpp"

namespace qstiefel {

using Json = nlohmann::ordered_json;

Json to_json(const MatrixXcd& m);
Json to_json(const MatrixXd& m);
// `where` names the field in error messages.
MatrixXcd complex_matrix_from_json(const Json& j, const std::string& where);
MatrixXd real_matrix_from_json(const Json& j, const std::string& where);

Json channel_to_json(const AnyChannel& chan);
AnyChannel channel_from_json(const Json& j);

Json state_to_json(const DensityOperator& rho);
DensityOperator state_from_json(const Json& j);

Json to_json(const EstimateDiagnostics& d);
Json to_json(const SamplerDiagnostics& d);
Json to_json(const RepresentabilityVerdict& v);
Json to_json(const DistributionRecord& r);

// Parses text, reporting line and column of syntax errors as InvalidArgument.
Json parse_json(const std::string& text, const std::string& source);
Json read_json_file(const std::string& path);

}  // namespace qstiefel
