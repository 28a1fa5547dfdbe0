#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "formlab/common.hpp"

namespace formlab {

/// A finite discrete measure space: points 0..n-1 with strictly positive
/// masses. Every subset is measurable and the only null set is empty, so
/// "almost everywhere" statements are plain pointwise identities here.
///
/// The weights live behind a shared immutable buffer; copies are cheap and
/// compare equal to the original.
class FiniteMeasureSpace {
 public:
  /// Throws InvalidInput for an empty list or a weight that is not finite
  /// and strictly positive.
  explicit FiniteMeasureSpace(std::vector<double> weights);

  std::size_t size() const { return weights_->size(); }
  double weight(std::size_t i) const { return (*weights_)[i]; }
  std::span<const double> weights() const { return *weights_; }
  double total_mass() const;

  /// Bilinear pairing sum_i mu_i a_i b_i over raw value spans, ascending index.
  cplx pair(std::span<const cplx> a, std::span<const cplx> b) const;

  friend bool operator==(const FiniteMeasureSpace& a, const FiniteMeasureSpace& b) {
    return a.weights_ == b.weights_ || *a.weights_ == *b.weights_;
  }

 private:
  std::shared_ptr<const std::vector<double>> weights_;
};

FiniteMeasureSpace make_space(std::vector<double> weights);

/// The Bernoulli (1/2, 1/2) space.
FiniteMeasureSpace z2_space();

/// A complex function on a finite measure space, stored by point values.
class CFunction {
 public:
  CFunction(FiniteMeasureSpace space, std::vector<cplx> values);

  static CFunction constant(const FiniteMeasureSpace& space, cplx value);

  const FiniteMeasureSpace& space() const { return space_; }
  std::size_t size() const { return values_.size(); }
  std::span<const cplx> values() const { return values_; }
  cplx operator[](std::size_t i) const { return values_[i]; }

 private:
  FiniteMeasureSpace space_;
  std::vector<cplx> values_;
};

/// Dual exponent with the conventions 1 <-> infinity.
double dual_exponent(double p);

/// sum_i mu_i f_i, ascending index.
cplx integrate(const FiniteMeasureSpace& space, const CFunction& f);

/// sum_i mu_i f_i g_i. No conjugation: callers wanting the sesquilinear
/// pairing conjugate g themselves.
cplx duality_pair(const FiniteMeasureSpace& space, const CFunction& f, const CFunction& g);

/// (sum_i mu_i |f_i|^p)^(1/p), or max_i |f_i| for p = infinity.
double lp_norm(const FiniteMeasureSpace& space, const CFunction& f, double p);

/// Entrywise helpers used by tests and the forms module.
CFunction conj(const CFunction& f);
CFunction abs(const CFunction& f);
CFunction linear_combination(cplx alpha, const CFunction& f, cplx beta, const CFunction& g);

/// Reads the function file format {"space": [...], "values": [[re, im], ...]}.
/// Numbers may be JSON numbers or decimal strings.
CFunction parse_function_json(const std::string& text);
std::string function_to_json(const CFunction& f);

}  // namespace formlab
