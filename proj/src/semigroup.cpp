#include "formlab/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>

#include <gsl/gsl_integration.h>

#include "formlab/optimize.hpp"
#include "formlab/parallel.hpp"

namespace formlab {

GeneratorInstance make_generator(const KernelOperator& t, double tol) {
  const OperatorClass cls = classify(t, tol);
  if (!cls.symmetric) throw InvalidInput("generator needs a symmetric operator");
  if (!cls.dunford_schwartz) throw InvalidInput("generator needs a Dunford-Schwartz operator");
  const auto n = static_cast<Eigen::Index>(t.size());
  return {t, CMatrix::Identity(n, n) - t.entries()};
}

CMatrix expm(const CMatrix& m) {
  // Degree-13 Pade coefficients and the matching scaling threshold.
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const Eigen::Index n = m.rows();
  const CMatrix id = CMatrix::Identity(n, n);
  if (!m.allFinite()) throw NumericFailure("expm of a non-finite matrix");
  const double norm1 = n == 0 ? 0.0 : m.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  const CMatrix a = m / std::ldexp(1.0, s);

  const CMatrix a2 = a * a;
  const CMatrix a4 = a2 * a2;
  const CMatrix a6 = a4 * a2;
  const CMatrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  const CMatrix u = a * u_inner;
  const CMatrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  CMatrix r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < s; ++k) r = r * r;
  if (!r.allFinite()) throw NumericFailure("expm produced a non-finite result");
  return r;
}

KernelOperator exp_semigroup(const GeneratorInstance& g, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidInput("semigroup time must be finite and >= 0");
  if (t == 0.0) return KernelOperator::identity(g.space());
  return {g.space(), expm(-t * g.a)};
}

ResolventCheck resolvent_check(const GeneratorInstance& g, const CFunction& f, std::size_t quad_points,
                               double tol) {
  if (quad_points < 8) throw InvalidInput("resolvent quadrature needs at least 8 points");
  if (!(f.space() == g.space())) throw InvalidInput("function lives on a different space");
  const auto n = static_cast<Eigen::Index>(g.space().size());
  Eigen::VectorXcd fv(n);
  for (Eigen::Index i = 0; i < n; ++i) fv(i) = f[static_cast<std::size_t>(i)];

  // Weight x^0 e^{-x} on [0, inf).
  std::unique_ptr<gsl_integration_fixed_workspace, decltype(&gsl_integration_fixed_free)> ws(
      gsl_integration_fixed_alloc(gsl_integration_fixed_laguerre, quad_points, 0.0, 1.0, 0.0, 0.0),
      &gsl_integration_fixed_free);
  if (!ws) throw NumericFailure("could not build Gauss-Laguerre rule");
  const double* nodes = gsl_integration_fixed_nodes(ws.get());
  const double* weights = gsl_integration_fixed_weights(ws.get());

  std::vector<Eigen::VectorXcd> terms(quad_points);
  parallel_for(quad_points, [&](std::size_t k) { terms[k] = weights[k] * (expm(-nodes[k] * g.a) * fv); });
  Eigen::VectorXcd quad = Eigen::VectorXcd::Zero(n);
  for (const auto& t : terms) quad += t;

  const CMatrix id_plus_a = CMatrix::Identity(n, n) + g.a;
  const Eigen::VectorXcd direct = id_plus_a.partialPivLu().solve(fv);

  ResolventCheck out;
  out.error = (quad - direct).cwiseAbs().maxCoeff();
  out.ok = out.error <= tol * (1.0 + direct.cwiseAbs().maxCoeff());
  out.quadrature.assign(quad.data(), quad.data() + n);
  out.direct.assign(direct.data(), direct.data() + n);
  return out;
}

std::vector<double> generator_approx_check(const GeneratorInstance& gen, const CFunction& g,
                                           const std::vector<double>& eps_list, double p) {
  if (!(g.space() == gen.space())) throw InvalidInput("function lives on a different space");
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (!(eps_list[k] > 0.0) || (k > 0 && !(eps_list[k] < eps_list[k - 1]))) {
      throw InvalidInput("eps list must be positive and decreasing");
    }
  }
  const auto& sp = gen.space();
  const KernelOperator a(sp, gen.a);
  const CFunction ag = a.apply(g);
  std::vector<double> errors;
  for (double eps : eps_list) {
    const CFunction se = exp_semigroup(gen, eps).apply(g);
    std::vector<cplx> diff(sp.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = (g[i] - se[i]) / eps - ag[i];
    errors.push_back(lp_norm(sp, CFunction(sp, std::move(diff)), p));
  }
  return errors;
}

double phi_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidInput("phi_p needs 1 < p < inf");
  if (p == 2.0) return std::numbers::pi / 2.0;
  return std::acos(std::abs(1.0 - 2.0 / p));
}

double zeta_arg(double p, cplx z) {
  const double r = std::abs(z);
  const cplx second = r == 0.0 ? cplx(-1.0, 0.0) : std::conj(z) * std::pow(r, p - 2.0) - 1.0;
  const cplx zeta = (z - 1.0) * second;
  if (std::abs(zeta) < 1e-9) return 0.0;
  return std::arg(zeta);
}

AngleReport scalar_angle(double p, const AngleSearchSpec& spec) {
  AngleReport rep;
  rep.p = p;
  rep.phi_closed = phi_p(p);

  // Two grids on the reduced domain: polar around the origin and polar
  // around z = 1, where the supremum is approached.
  std::vector<cplx> pts;
  for (std::size_t i = 0; i < spec.radial; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(spec.radial - 1, 1));
    const double r0 = std::pow(10.0, -4.0 * (1.0 - t));  // 1e-4 .. 1 around the origin
    const double r1 = std::pow(10.0, -6.0 + 6.3 * t);    // 1e-6 .. 2 around z = 1
    for (std::size_t k = 0; k < spec.angular; ++k) {
      const double u = static_cast<double>(k) / static_cast<double>(spec.angular);
      pts.push_back(std::polar(r0, -std::numbers::pi * u));
      const cplx z = 1.0 + std::polar(r1, 2.0 * std::numbers::pi * u);
      if (std::abs(z) <= 1.0 && z.imag() <= 0.0) pts.push_back(z);
    }
  }
  std::vector<double> vals(pts.size());
  parallel_for(pts.size(), [&](std::size_t k) { vals[k] = std::abs(zeta_arg(p, pts[k])); });

  std::vector<std::size_t> order(pts.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });

  double sup = vals[order[0]];
  cplx arg_z = pts[order[0]];
  for (std::size_t s = 0; s < std::min(spec.refine_starts, order.size()); ++s) {
    const cplx z0 = pts[order[s]];
    const double step = 0.25 * std::max(std::abs(z0 - 1.0), 1e-8);
    auto objective = [&](const std::vector<double>& v) { return -std::abs(zeta_arg(p, {v[0], v[1]})); };
    const auto res = nelder_mead(objective, {z0.real(), z0.imag()}, {step, step}, spec.refine_iters, 1e-14);
    if (-res.value > sup) {
      sup = -res.value;
      arg_z = {res.x[0], res.x[1]};
    }
  }
  // Map the witness back into the reduced domain.
  if (arg_z.imag() > 0.0) arg_z = std::conj(arg_z);
  if (std::abs(arg_z) > 1.0) arg_z = 1.0 / arg_z;
  if (arg_z.imag() > 0.0) arg_z = std::conj(arg_z);

  rep.phi_numeric = std::numbers::pi / 2.0 - sup;
  rep.gap = std::abs(rep.phi_closed - rep.phi_numeric);
  rep.witness_z = arg_z;

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> logr(-3.0, 3.0), ang(-std::numbers::pi, std::numbers::pi);
  for (std::size_t k = 0; k < spec.symmetry_probes; ++k) {
    cplx z = std::polar(std::pow(10.0, logr(rng)), ang(rng));
    if (std::abs(z) <= 1.0 && z.imag() <= 0.0) z = 1.0 / std::conj(z);  // force it outside
    cplx reduced = z;
    if (reduced.imag() > 0.0) reduced = std::conj(reduced);
    if (std::abs(reduced) > 1.0) reduced = 1.0 / reduced;
    if (reduced.imag() > 0.0) reduced = std::conj(reduced);
    rep.symmetry_defect =
        std::max(rep.symmetry_defect, std::abs(std::abs(zeta_arg(p, z)) - std::abs(zeta_arg(p, reduced))));
  }
  return rep;
}

namespace {

double dissipativity_raw(const GeneratorInstance& g, double p, double phi, int sign, std::span<const cplx> f,
                         double& scale) {
  const auto& sp = g.space();
  const std::size_t n = sp.size();
  std::vector<cplx> af(n), h(n);
  KernelOperator(sp, g.a).apply_into(f, af);
  scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::abs(f[i]);
    h[i] = r == 0.0 ? cplx(0.0, 0.0) : std::conj(f[i]) * std::pow(r, p - 2.0);
    scale += sp.weight(i) * std::abs(af[i]) * std::pow(r, p - 1.0);
  }
  return (std::polar(1.0, sign * phi) * sp.pair(af, h)).real();
}

}  // namespace

double normalized_dissipativity_value(const GeneratorInstance& g, double p, double phi, int sign,
                                      std::span<const cplx> f) {
  if (f.size() != g.space().size()) throw InvalidInput("probe vector has the wrong length");
  double scale = 0.0;
  const double v = dissipativity_raw(g, p, phi, sign, f, scale);
  return v / (1.0 + scale);
}

CheckReport dissipativity_check(const GeneratorInstance& g, double p, double phi,
                                const DissipativitySampler& sampler, double tol) {
  if (!(p > 1.0)) throw InvalidInput("dissipativity check needs p > 1");
  const std::size_t n = g.space().size();
  std::vector<std::vector<cplx>> probes;
  std::mt19937_64 rng(sampler.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t k = 0; k < sampler.random_count; ++k) {
    std::vector<cplx> f(n);
    for (auto& v : f) v = {gauss(rng), gauss(rng)};
    probes.push_back(std::move(f));
  }
  probes.emplace_back(n, cplx(1.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<cplx> f(n);
    f[i] = 1.0;
    probes.push_back(std::move(f));
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t k = 0; k < std::min<std::size_t>(sampler.random_count, 4 * n); ++k) {
    std::vector<cplx> f(n);
    f[pick(rng)] = {gauss(rng), gauss(rng)};
    f[pick(rng)] = {gauss(rng), gauss(rng)};
    probes.push_back(std::move(f));
  }
  for (const auto& pr : sampler.probes) {
    if (pr.size() != n) throw InvalidInput("probe vector has the wrong length");
    probes.push_back(pr);
  }

  std::vector<double> vals(2 * probes.size());
  parallel_for(probes.size(), [&](std::size_t k) {
    vals[2 * k] = normalized_dissipativity_value(g, p, phi, +1, probes[k]);
    vals[2 * k + 1] = normalized_dissipativity_value(g, p, phi, -1, probes[k]);
  });
  std::size_t best = 0;
  for (std::size_t k = 1; k < vals.size(); ++k) {
    if (vals[k] < vals[best]) best = k;
  }
  CheckReport r;
  r.seed = sampler.seed;
  r.tolerance = tol;
  r.samples = vals.size();
  const int sign = best % 2 == 0 ? 1 : -1;
  const auto& f = probes[best / 2];
  r.witness = FunctionWitness{0, sampler.seed, sign, f};
  r.min_value = normalized_dissipativity_value(g, p, phi, sign, f);
  double scale = 0.0;
  r.raw_value = dissipativity_raw(g, p, phi, sign, f, scale);
  r.verdict = r.min_value < -tol ? Verdict::violated : Verdict::pass;
  r.note = r.verdict == Verdict::pass ? "dissipative on the sampled vectors"
                                      : "hypothesis fails for this generator/angle";
  return r;
}

json_io::Json angle_report_json(const AngleReport& r) {
  return {{"p", r.p},
          {"phi_closed", r.phi_closed},
          {"phi_numeric", r.phi_numeric},
          {"gap", r.gap},
          {"witness_z", json_io::complex_json(r.witness_z)},
          {"symmetry_defect", r.symmetry_defect}};
}

}  // namespace formlab
