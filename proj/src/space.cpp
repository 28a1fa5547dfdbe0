#include "formlab/space.hpp"

#include <cmath>
#include <limits>

#include "formlab/json_io.hpp"

namespace formlab {

FiniteMeasureSpace::FiniteMeasureSpace(std::vector<double> weights) {
  if (weights.empty()) throw InvalidInput("measure space needs at least one point");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] <= 0.0) {
      throw InvalidInput("weight " + std::to_string(i) + " must be finite and > 0");
    }
  }
  weights_ = std::make_shared<const std::vector<double>>(std::move(weights));
}

double FiniteMeasureSpace::total_mass() const {
  double s = 0.0;
  for (double w : *weights_) s += w;
  return s;
}

cplx FiniteMeasureSpace::pair(std::span<const cplx> a, std::span<const cplx> b) const {
  const auto& w = *weights_;
  cplx s{};
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * (a[i] * b[i]);
  return s;
}

FiniteMeasureSpace make_space(std::vector<double> weights) {
  return FiniteMeasureSpace(std::move(weights));
}

FiniteMeasureSpace z2_space() {
  static const FiniteMeasureSpace z2({0.5, 0.5});
  return z2;
}

CFunction::CFunction(FiniteMeasureSpace space, std::vector<cplx> values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (values_.size() != space_.size()) {
    throw InvalidInput("function has " + std::to_string(values_.size()) +
                       " values but the space has " + std::to_string(space_.size()) + " points");
  }
  for (cplx v : values_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw InvalidInput("function values must be finite");
  }
}

CFunction CFunction::constant(const FiniteMeasureSpace& space, cplx value) {
  return CFunction(space, std::vector<cplx>(space.size(), value));
}

double dual_exponent(double p) {
  if (!(p >= 1.0)) throw InvalidInput("exponent must be >= 1");
  if (std::isinf(p)) return 1.0;
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return p / (p - 1.0);
}

static void require_same(const FiniteMeasureSpace& space, const CFunction& f) {
  if (!(f.space() == space)) throw InvalidInput("function lives on a different space");
}

cplx integrate(const FiniteMeasureSpace& space, const CFunction& f) {
  require_same(space, f);
  cplx s{};
  for (std::size_t i = 0; i < space.size(); ++i) s += space.weight(i) * f[i];
  return s;
}

cplx duality_pair(const FiniteMeasureSpace& space, const CFunction& f, const CFunction& g) {
  require_same(space, f);
  require_same(space, g);
  return space.pair(f.values(), g.values());
}

double lp_norm(const FiniteMeasureSpace& space, const CFunction& f, double p) {
  require_same(space, f);
  if (!(p >= 1.0)) throw InvalidInput("lp_norm needs p >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (cplx v : f.values()) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) s += space.weight(i) * std::pow(std::abs(f[i]), p);
  return std::pow(s, 1.0 / p);
}

CFunction conj(const CFunction& f) {
  std::vector<cplx> v(f.values().begin(), f.values().end());
  for (auto& x : v) x = std::conj(x);
  return CFunction(f.space(), std::move(v));
}

CFunction abs(const CFunction& f) {
  std::vector<cplx> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(f[i]);
  return CFunction(f.space(), std::move(v));
}

CFunction linear_combination(cplx alpha, const CFunction& f, cplx beta, const CFunction& g) {
  require_same(f.space(), g);
  std::vector<cplx> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = alpha * f[i] + beta * g[i];
  return CFunction(f.space(), std::move(v));
}

CFunction parse_function_json(const std::string& text) {
  const auto doc = json_io::parse(text);
  if (!doc.is_object() || !doc.contains("space") || !doc.contains("values")) {
    throw InvalidInput("function file needs \"space\" and \"values\"");
  }
  auto space = make_space(json_io::real_list(doc.at("space"), "space"));
  std::vector<cplx> values;
  for (const auto& v : json_io::array(doc.at("values"), "values")) values.push_back(json_io::complex_value(v));
  return CFunction(space, std::move(values));
}

std::string function_to_json(const CFunction& f) {
  json_io::Json doc;
  doc["space"] = std::vector<double>(f.space().weights().begin(), f.space().weights().end());
  auto& vals = doc["values"] = json_io::Json::array();
  for (cplx v : f.values()) vals.push_back(json_io::complex_json(v));
  return doc.dump();
}

}  // namespace formlab
