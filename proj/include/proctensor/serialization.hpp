#pragma once

// JSON forms of the library's values.  Complex matrices are
// {"rows": r, "cols": c, "data": [[re, im], ...]} in row-major order.
// Malformed input raises ValidationError naming the offending field.

#include "proctensor/decoupling.hpp"
#include "proctensor/witnesses.hpp"

#include <json.hpp>

#include <string>

namespace proctensor {

using nlohmann::json;

json to_json(const CMatrix& m);
CMatrix matrix_from_json(const json& j, const std::string& where = "matrix");

json to_json(const CPMapChoi& m);
CPMapChoi map_from_json(const json& j, const std::string& where = "map");

json to_json(const OpBasis& b);
OpBasis basis_from_json(const json& j, const std::string& where = "basis");

json to_json(const ProcessTensor& pt);
ProcessTensor process_tensor_from_json(const json& j);

json to_json(const Scenario& sc);
Scenario scenario_from_json(const json& j);

json to_json(const CorrelationWitness& w);
json to_json(const MarkovReport& r, const std::string& basis_label);
json to_json(const CptpConsistency& r, const std::string& basis_label);

json to_json(const DecoupleResult& r);
DecoupleResult decouple_result_from_json(const json& j);

// Canonical text form used for every output file.
std::string dump(const json& j);

json read_json_file(const std::string& path);
// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace proctensor
