#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "formlab/json_io.hpp"
#include "formlab/space.hpp"

namespace formlab {

using CMatrix = Eigen::MatrixXcd;

/// A kernel operator on a finite measure space: (Tf)_i = sum_j t_ij f_j.
/// The measure only enters through pairings and the classification criteria.
class KernelOperator {
 public:
  /// Throws InvalidInput if the matrix is not square of the space's size or
  /// has a non-finite entry.
  KernelOperator(FiniteMeasureSpace space, CMatrix entries);

  static KernelOperator identity(const FiniteMeasureSpace& space);
  static KernelOperator zero(const FiniteMeasureSpace& space);

  const FiniteMeasureSpace& space() const { return space_; }
  const CMatrix& entries() const { return entries_; }
  std::size_t size() const { return space_.size(); }
  cplx operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }

  /// Throws InvalidInput when f lives on another space.
  CFunction apply(const CFunction& f) const;

  /// Allocation-free application on raw value spans (ascending-index sums).
  void apply_into(std::span<const cplx> in, std::span<cplx> out) const;

 private:
  FiniteMeasureSpace space_;
  CMatrix entries_;
};

// Entrywise derived operators. For kernels the conjugate operator
// f -> conj(T conj(f)) is entrywise conjugation.
KernelOperator conj(const KernelOperator& t);
KernelOperator real_part(const KernelOperator& t);
KernelOperator imag_part(const KernelOperator& t);
KernelOperator operator+(const KernelOperator& a, const KernelOperator& b);
KernelOperator operator-(const KernelOperator& a, const KernelOperator& b);
KernelOperator operator*(cplx s, const KernelOperator& t);
/// a after b, i.e. the matrix product a.entries() * b.entries().
KernelOperator compose(const KernelOperator& a, const KernelOperator& b);

/// Norm on L^infinity: max_i sum_j |t_ij|.
double linf_norm(const KernelOperator& t);
/// Norm on L^1: max_j (sum_i mu_i |t_ij|) / mu_j.
double l1_norm(const KernelOperator& t);

/// Outcome of one family of scalar conditions. max_defect is the largest
/// violation seen (0 when every condition holds exactly); (i, j) locates it.
struct ConditionCheck {
  bool holds = true;
  double max_defect = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
};

/// Classification of a kernel. The flags are nested:
/// markovian => sub_markovian => dunford_schwartz.
struct OperatorClass {
  bool symmetric = false;
  bool dunford_schwartz = false;
  bool sub_markovian = false;
  bool markovian = false;
  double tolerance = 0.0;

  ConditionCheck symmetry;      // mu_i t_ij = mu_j conj(t_ji)
  ConditionCheck linf_rows;     // sum_j |t_ij| <= 1
  ConditionCheck l1_columns;    // sum_i mu_i |t_ij| / mu_j <= 1
  ConditionCheck nonnegative;   // t_ij real and >= 0
  ConditionCheck unit_row_sums; // sum_j t_ij = 1
};

inline constexpr double kDefaultClassifyTolerance = 1e-9;

OperatorClass classify(const KernelOperator& t, double tol = kDefaultClassifyTolerance);

/// Linear modulus |T|. On a finite space the supremum defining |T|f is
/// attained by g_j = f_j * conj(t_ij)/|t_ij| for each row i, so |T| is the
/// entrywise absolute value of the kernel.
KernelOperator modulus(const KernelOperator& t);

/// Bilinear adjoint S with s_ji = mu_i t_ij / mu_j, so that
/// <Tf, g> = <f, Sg> for the non-conjugating pairing.
KernelOperator adjoint(const KernelOperator& t);

struct Restriction {
  FiniteMeasureSpace space;
  KernelOperator op;
};

/// T_B = Res_B T Ext_B on the subspace B (kept in the order given).
/// Throws InvalidInput for an empty, out-of-range or repeated index set.
Restriction restrict(const KernelOperator& t, const std::vector<std::size_t>& subset);

/// Res_B f, the values of f on B.
CFunction restrict_function(const CFunction& f, const FiniteMeasureSpace& sub,
                            const std::vector<std::size_t>& subset);
/// Ext_B g, extension by zero from B to the full space.
CFunction extend_function(const FiniteMeasureSpace& full, const CFunction& g,
                          const std::vector<std::size_t>& subset);
/// M_B f = 1_B f.
CFunction indicator_multiply(const CFunction& f, const std::vector<std::size_t>& subset);

/// Phi f := f o phi, with phi mapping points of `fine` onto points of f's space.
CFunction pushforward(const std::vector<std::size_t>& phi, const FiniteMeasureSpace& fine,
                      const CFunction& f);

enum class CatalogFunction { abs_squared, conj, abspow_1_5 };
std::function<cplx(cplx)> catalog_function(CatalogFunction which);
std::optional<CatalogFunction> catalog_function_from_name(const std::string& name);

/// Checks Phi(F(f)) = F(Phi f) pointwise and that Phi preserves the integral.
/// phi must be onto and measure preserving within tol, otherwise InvalidInput.
bool pushforward_check(const std::vector<std::size_t>& phi, const FiniteMeasureSpace& fine,
                       const FiniteMeasureSpace& coarse, const std::function<cplx(cplx)>& fn,
                       const CFunction& f, double tol);

/// E_lambda = (0 conj(lambda); lambda 0) on Z2. lambda must be unimodular
/// within 1e-12.
KernelOperator e_lambda(cplx lambda);

/// Whether the symmetric 2x2 matrix (a conj(w); w b) is an absolute
/// contraction on Z2: max(|a|, |b|) <= 1 - |w|.
bool c2_membership(double a, double b, cplx w);

enum class ContractionClass { general, sub_markovian, markovian };
std::string to_string(ContractionClass c);
ContractionClass contraction_class_from_string(const std::string& s);

/// Random weights in [0.25, 2), deterministic in (n, seed).
FiniteMeasureSpace random_space(std::size_t n, std::uint64_t seed);

/// Deterministic random symmetric contraction of the requested class.
/// Without a space, weights come from random_space(n, seed).
KernelOperator random_symmetric_contraction(std::size_t n, std::uint64_t seed, ContractionClass cls,
                                            std::optional<FiniteMeasureSpace> space = std::nullopt);

/// Operator file format {"weights": [...], "matrix": [[[re, im], ...], ...]}.
KernelOperator parse_operator_json(const std::string& text);
std::string operator_to_json(const KernelOperator& t);
json_io::Json operator_class_json(const OperatorClass& c);

}  // namespace formlab
