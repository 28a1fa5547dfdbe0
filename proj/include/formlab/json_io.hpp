#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "formlab/common.hpp"

// Small helpers shared by the file readers. All failures surface as
// InvalidInput so the CLI can map them to exit code 2.
namespace formlab::json_io {

using Json = nlohmann::json;

/// Parses text, reporting the byte position on syntax errors.
Json parse(const std::string& text);

/// A JSON number, or a string holding a decimal number.
double real_value(const Json& v, const std::string& what);
std::vector<double> real_list(const Json& v, const std::string& what);
const Json::array_t& array(const Json& v, const std::string& what);

/// [re, im] pair (a bare real is accepted as im = 0).
cplx complex_value(const Json& v);
Json complex_json(cplx v);

std::string read_file(const std::string& path);

}  // namespace formlab::json_io
