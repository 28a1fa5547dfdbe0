#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "formlab/bilinear.hpp"
#include "formlab/expr.hpp"
#include "formlab/kernel_operator.hpp"

namespace formlab {

struct FormPair {
  Expr f;
  Expr g;
};

/// m pairs (F_j, G_j) of functions C^d -> C. The form under study is
///   Re sum_j int (Id - T) F_j(f) . G_j(f) dmu.
struct FormFamily {
  std::size_t d = 1;
  std::vector<FormPair> pairs;
  std::string name;
  std::map<std::string, double> params;
};

/// Validates d >= 1, m >= 1 and that every expression uses at most d variables.
FormFamily make_family(std::size_t d, std::vector<FormPair> pairs, std::string name = "custom",
                       std::map<std::string, double> params = {});

/// F(x) = x, G(x) = e^{i sign phi} conj(x) |x|^{p-2} with G(0) = 0.
FormFamily family_analyticity(double p, double phi, int sign);

/// Parses "F1:G1,F2:G2,..." where each item is DSL text or the path of a file
/// holding DSL text. Separators inside parentheses are ignored.
FormFamily parse_family(std::size_t d, const std::string& pairs_spec);

/// Evaluates every F_j and G_j at x. Throws EvalError on a singular point.
void evaluate_family(const FormFamily& family, std::span<const cplx> x, std::vector<cplx>& fs,
                     std::vector<cplx>& gs);

/// s(x) = Re sum_j F_j(x) G_j(x).
double scalar_form(const FormFamily& family, std::span<const cplx> x);

/// Sampling plan for the sweeps. Each complex coordinate is drawn from a polar
/// grid (radii geometric in [r_min, r_max], `angular` equispaced angles, plus
/// the origin) and/or from `random_count` log-uniform random points. Point
/// sets larger than max_points are subsampled with `seed`. The best
/// `refine_starts` samples are then polished by Nelder-Mead.
struct SamplerSpec {
  bool use_grid = true;
  double r_min = 1e-3;
  double r_max = 1e3;
  std::size_t radial = 13;
  std::size_t angular = 24;
  std::size_t random_count = 64;
  std::uint64_t seed = 0;
  std::size_t max_points = 400;
  std::size_t refine_starts = 6;
  std::size_t refine_iters = 600;
};

/// Sample points in C^d according to the spec (deterministic).
std::vector<std::vector<cplx>> sample_points(const SamplerSpec& spec, std::size_t d);

struct ScalarWitness {
  std::vector<cplx> x;
};

struct Z2Witness {
  cplx lambda{1.0, 0.0};
  std::vector<cplx> z;
  std::vector<cplx> w;
};

struct FunctionWitness {
  std::uint64_t operator_seed = 0;
  std::uint64_t function_seed = 0;
  int sign = 1;
  std::vector<cplx> f;
};

using Witness = std::variant<ScalarWitness, Z2Witness, FunctionWitness>;

enum class Verdict { pass, violated };

/// Result of a sampled check. min_value is the smallest magnitude-normalized
/// form value v / (1 + scale) seen, where scale bounds |v| by the sum of the
/// absolute products entering it; raw_value is v at the witness.
/// verdict == violated exactly when min_value < -tolerance.
struct CheckReport {
  double min_value = 0.0;
  double raw_value = 0.0;
  Witness witness;
  std::size_t samples = 0;
  std::size_t skipped = 0;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::pass;
  std::string note;
};

std::string to_string(Verdict v);

/// Scalar-case inequality s(x) >= 0 over the sampled points.
CheckReport scalar_check(const FormFamily& family, const SamplerSpec& sampler, double tol);
/// Normalized s at a point (the quantity scalar_check minimizes).
double normalized_scalar_value(const FormFamily& family, std::span<const cplx> x);

/// Re sum_j int_{Z2} (Id - T) F_j(f) . G_j(f) dzeta_2 for f = (z on atom 1,
/// w on atom 2), computed by applying T on Z2 and pairing.
double z2_operator_form_value(const FormFamily& family, const KernelOperator& t, std::span<const cplx> z,
                              std::span<const cplx> w);
/// The Z2 block with T = E_lambda.
double z2_form_value(const FormFamily& family, cplx lambda, std::span<const cplx> z, std::span<const cplx> w);
/// The Z2 block with T = 0, i.e. 1/2 (s(z) + s(w)).
double z2_zero_operator_value(const FormFamily& family, std::span<const cplx> z, std::span<const cplx> w);
/// Normalized Z2 block value (the quantity z2_criterion_check minimizes).
double normalized_z2_value(const FormFamily& family, cplx lambda, std::span<const cplx> z,
                           std::span<const cplx> w);

enum class CriterionMode { general, sub_markovian, markovian };
std::string to_string(CriterionMode m);
CriterionMode criterion_mode_from_string(const std::string& s);

/// Minimum of the Z2 block over lambda_count equispaced points of the circle
/// and sampled (z, w), refined by golden-section in lambda and Nelder-Mead.
/// sub_markovian mode uses lambda = 1 plus the scalar check; markovian mode
/// uses lambda = 1 only.
CheckReport z2_criterion_check(const FormFamily& family, std::size_t lambda_count, const SamplerSpec& sampler,
                               double tol, CriterionMode mode = CriterionMode::general);

/// Re-evaluates a report's witness to the normalized value it was reported at.
double reevaluate(const FormFamily& family, const CheckReport& report);

/// Re sum_j <(Id - T)(F_j o f), G_j o f> for d functions f on T's space.
double full_form_value(const FormFamily& family, const KernelOperator& t, const std::vector<CFunction>& f);

struct ReductionCrosscheck {
  double direct = 0.0;
  double decomposed = 0.0;
  double z2_min = 0.0;
  double scalar_min = 0.0;
  bool identity_ok = false;
  bool ok = false;
};

/// Evaluates the form directly and through the disintegration of T:
/// sum_i d_i s(f(i)) + sum_pairs mass * z2_form_value(lambda(x,y), f(x), f(y)).
/// ok requires the two to agree within tol (1 + |direct|) and, when every
/// block and diagonal term is >= -tol, a direct value >= -tol (1 + magnitude).
ReductionCrosscheck reduction_crosscheck(const FormFamily& family, const KernelOperator& t,
                                         const std::vector<CFunction>& f, double tol);

/// The disintegration of one operator with its Z2 block operators
/// Id - E_{lambda(x,y)} built once, for sweeping many families and functions.
class ReductionPlan {
 public:
  explicit ReductionPlan(const KernelOperator& t);

  const KernelOperator& op() const { return t_; }
  const Disintegration& disintegration() const { return dis_; }

  ReductionCrosscheck crosscheck(const FormFamily& family, const std::vector<CFunction>& f, double tol) const;

 private:
  KernelOperator t_;
  Disintegration dis_;
  std::vector<KernelOperator> blocks_;
};

json_io::Json check_report_json(const CheckReport& r);
json_io::Json witness_json(const Witness& w);

}  // namespace formlab
