#include "formlab/json_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace formlab::json_io {

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InvalidInput("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

double real_value(const Json& v, const std::string& what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
      throw InvalidInput(what + ": \"" + s + "\" is not a decimal number");
    }
    return x;
  }
  throw InvalidInput(what + ": expected a number");
}

const Json::array_t& array(const Json& v, const std::string& what) {
  if (!v.is_array()) throw InvalidInput(what + ": expected an array");
  return v.get_ref<const Json::array_t&>();
}

std::vector<double> real_list(const Json& v, const std::string& what) {
  std::vector<double> out;
  for (const auto& x : array(v, what)) out.push_back(real_value(x, what));
  return out;
}

cplx complex_value(const Json& v) {
  if (v.is_array()) {
    if (v.size() != 2) throw InvalidInput("complex value must be [re, im]");
    return {real_value(v[0], "re"), real_value(v[1], "im")};
  }
  return {real_value(v, "value"), 0.0};
}

Json complex_json(cplx v) { return Json::array({v.real(), v.imag()}); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace formlab::json_io
