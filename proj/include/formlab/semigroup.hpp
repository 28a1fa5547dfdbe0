#pragma once

#include <cstdint>
#include <vector>

#include "formlab/forms.hpp"
#include "formlab/kernel_operator.hpp"

namespace formlab {

/// A = Id - T for a symmetric Dunford-Schwartz T. On a finite space A is
/// bounded and its domain is everything, so no domain bookkeeping is needed.
struct GeneratorInstance {
  KernelOperator t;
  CMatrix a;

  const FiniteMeasureSpace& space() const { return t.space(); }
};

/// Throws InvalidInput unless classify(T, tol) reports symmetric and
/// Dunford-Schwartz.
GeneratorInstance make_generator(const KernelOperator& t, double tol = kDefaultClassifyTolerance);

/// exp(m) by scaling and squaring around a degree-13 Pade approximant.
CMatrix expm(const CMatrix& m);

/// S_t = exp(-t A); S_0 is exactly the identity. Throws InvalidInput for t < 0.
KernelOperator exp_semigroup(const GeneratorInstance& g, double t);

struct ResolventCheck {
  bool ok = false;
  double error = 0.0;  // max-norm distance between the two routes
  std::vector<cplx> quadrature;
  std::vector<cplx> direct;
};

/// (Id + A)^{-1} f two ways: Gauss-Laguerre quadrature of int_0^inf e^{-t} S_t f dt
/// and a direct linear solve. quad_points must be >= 8.
ResolventCheck resolvent_check(const GeneratorInstance& g, const CFunction& f, std::size_t quad_points,
                               double tol);

/// ||(1/eps)(Id - S_eps) g - A g||_p for each eps (positive, decreasing).
std::vector<double> generator_approx_check(const GeneratorInstance& gen, const CFunction& g,
                                           const std::vector<double>& eps_list, double p = 2.0);

/// Optimal sector angle arccos|1 - 2/p|; pi/2 at p = 2. Throws InvalidInput
/// unless 1 < p < inf.
double phi_p(double p);

struct AngleSearchSpec {
  std::size_t radial = 60;
  std::size_t angular = 72;
  std::size_t refine_starts = 4;
  std::size_t refine_iters = 400;
  std::size_t symmetry_probes = 100;
  std::uint64_t seed = 1;
};

struct AngleReport {
  double p = 0.0;
  double phi_closed = 0.0;
  double phi_numeric = 0.0;
  double gap = 0.0;
  cplx witness_z;
  double symmetry_defect = 0.0;  // max | |arg zeta(z)| - |arg zeta(reduced z)| | over probes
};

/// arg of zeta(z) = (z - 1)(conj(z)|z|^{p-2} - 1) in (-pi, pi]; 0 where
/// |zeta| < 1e-9 (arg is undefined there and the constraint is inactive).
double zeta_arg(double p, cplx z);

/// pi/2 - sup |arg zeta(z)|, searched over |z| <= 1, Im z <= 0. The
/// constraint is invariant under z -> conj(z) and, up to a positive factor,
/// z -> 1/z, which justifies the reduced domain; symmetry_probes random
/// points outside it are compared with their reflections.
AngleReport scalar_angle(double p, const AngleSearchSpec& spec = {});

struct DissipativitySampler {
  std::size_t random_count = 200;
  std::uint64_t seed = 0;
  /// Extra probe vectors (values on the generator's space) checked verbatim.
  std::vector<std::vector<cplx>> probes;
};

/// Re(e^{i sign phi} <A f, conj(f)|f|^{p-2}>) / (1 + scale), scale =
/// sum_i mu_i |(Af)_i| |f_i|^{p-1}. conj(f)|f|^{p-2} is 0 where f is.
double normalized_dissipativity_value(const GeneratorInstance& g, double p, double phi, int sign,
                                      std::span<const cplx> f);

/// Minimum over random vectors, indicators, the constant one, two-point
/// supported vectors, the explicit probes and both signs.
CheckReport dissipativity_check(const GeneratorInstance& g, double p, double phi,
                                const DissipativitySampler& sampler, double tol);

json_io::Json angle_report_json(const AngleReport& r);

}  // namespace formlab
