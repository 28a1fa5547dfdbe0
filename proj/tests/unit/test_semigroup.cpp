#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "formlab/semigroup.hpp"

using namespace formlab;

namespace {

constexpr double kPi = std::numbers::pi;

// exp(-t A) through the Hermitian matrix D^{1/2} A D^{-1/2}, D = diag(mu).
CMatrix expm_oracle(const GeneratorInstance& g, double t) {
  const auto n = static_cast<Eigen::Index>(g.space().size());
  Eigen::VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i) s(i) = std::sqrt(g.space().weight(static_cast<std::size_t>(i)));
  CMatrix h = s.asDiagonal() * g.a * s.cwiseInverse().asDiagonal();
  h = 0.5 * (h + h.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  const Eigen::VectorXd ev = eig.eigenvalues();
  CMatrix e = eig.eigenvectors() * (-t * ev.array()).exp().matrix().asDiagonal() * eig.eigenvectors().adjoint();
  return s.cwiseInverse().asDiagonal() * e * s.asDiagonal();
}

CFunction random_function(const FiniteMeasureSpace& s, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<cplx> v(s.size());
  for (auto& x : v) x = cplx(g(rng), g(rng));
  return CFunction(s, v);
}

}  // namespace

TEST_CASE("generator preconditions") {
  CHECK_NOTHROW(make_generator(e_lambda(1.0)));
  CMatrix m(2, 2);
  m << 0.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(make_generator(KernelOperator(z2_space(), m)), InvalidInput);
  CHECK_THROWS_AS(make_generator(cplx(1.5) * e_lambda(1.0)), InvalidInput);
}

TEST_CASE("semigroup of E_1 in closed form") {
  const auto g = make_generator(e_lambda(1.0));
  CHECK(exp_semigroup(g, 0.0).entries() == CMatrix::Identity(2, 2));
  for (double t : {0.01, 0.3, 1.0, 5.0, 40.0}) {
    const double a = 0.5 * (1.0 + std::exp(-2.0 * t)), b = 0.5 * (1.0 - std::exp(-2.0 * t));
    const auto s = exp_semigroup(g, t);
    CHECK(std::abs(s(0, 0) - a) <= 1e-15);
    CHECK(std::abs(s(0, 1) - b) <= 1e-15);
    CHECK(std::abs(s(1, 0) - b) <= 1e-15);
    CHECK(std::abs(s(1, 1) - a) <= 1e-15);
  }
  CHECK_THROWS_AS(exp_semigroup(g, -1.0), InvalidInput);
}

TEST_CASE("expm agrees with a Hermitian eigendecomposition") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto g = make_generator(random_symmetric_contraction(1 + seed % 30, seed, static_cast<ContractionClass>(seed % 3)));
    for (double t : {0.01, 0.5, 3.0, 25.0}) {
      const CMatrix got = exp_semigroup(g, t).entries();
      const CMatrix want = expm_oracle(g, t);
      CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("expm on general matrices") {
  CMatrix z = CMatrix::Zero(3, 3);
  CHECK((expm(z) - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-15);
  CMatrix nil = CMatrix::Zero(2, 2);
  nil(0, 1) = 3.0;
  CMatrix want = CMatrix::Identity(2, 2);
  want(0, 1) = 3.0;
  CHECK((expm(nil) - want).cwiseAbs().maxCoeff() <= 1e-15);
  CMatrix rot(2, 2);
  rot << 0.0, -1.0, 1.0, 0.0;
  const CMatrix r = expm(rot * 2.0);
  CHECK(std::abs(r(0, 0) - std::cos(2.0)) <= 1e-14);
  CHECK(std::abs(r(1, 0) - std::sin(2.0)) <= 1e-14);
  CMatrix big = CMatrix::Zero(1, 1);
  big(0, 0) = cplx(-30.0, 2.0);
  CHECK(std::abs(expm(big)(0, 0) - std::exp(cplx(-30.0, 2.0))) <= 1e-14 * std::exp(-30.0));
}

TEST_CASE("semigroup law and contractivity") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto g = make_generator(random_symmetric_contraction(2 + seed % 20, seed, static_cast<ContractionClass>(seed % 3)));
    for (double t : {0.01, 0.1, 1.0, 10.0}) {
      const auto s = exp_semigroup(g, t);
      CHECK(l1_norm(s) <= 1.0 + 1e-11);
      CHECK(linf_norm(s) <= 1.0 + 1e-11);
      const auto c = classify(s);
      CHECK(c.symmetric);
      CHECK(c.dunford_schwartz);
    }
    const auto ab = compose(exp_semigroup(g, 0.3), exp_semigroup(g, 0.9));
    CHECK((ab.entries() - exp_semigroup(g, 1.2).entries()).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("resolvent") {
  const auto g = make_generator(e_lambda(1.0));
  const auto r = resolvent_check(g, CFunction(z2_space(), {1.0, 0.0}), 64, 1e-12);
  CHECK(r.ok);
  CHECK(std::abs(r.direct[0] - 2.0 / 3.0) <= 1e-15);
  CHECK(std::abs(r.direct[1] - 1.0 / 3.0) <= 1e-15);
  CHECK(std::abs(r.quadrature[0] - 2.0 / 3.0) <= 1e-12);

  std::mt19937_64 rng(3);
  const auto sp = random_space(5, 3);
  const auto f = random_function(sp, rng);
  const auto id = resolvent_check(make_generator(KernelOperator::identity(sp)), f, 16, 1e-13);
  CHECK(id.ok);
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(id.quadrature[i] - f[i]) <= 1e-13);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto gen = make_generator(random_symmetric_contraction(20, seed, static_cast<ContractionClass>(seed % 3)));
    CHECK(resolvent_check(gen, random_function(gen.space(), rng), 64, 1e-10).ok);
  }
  CHECK_THROWS_AS(resolvent_check(g, CFunction(z2_space(), {1.0, 0.0}), 4, 1e-10), InvalidInput);
}

TEST_CASE("generator approximation") {
  const auto g = make_generator(e_lambda(1.0));
  const std::vector<double> eps{1e-1, 5e-2, 2.5e-2, 1.25e-2, 6.25e-3, 1e-3, 1e-4};
  const auto errs = generator_approx_check(g, CFunction(z2_space(), {1.0, 0.0}), eps);
  for (std::size_t i = 1; i < 5; ++i) {
    const double ratio = errs[i] / errs[i - 1];
    CHECK(ratio >= 0.3);
    CHECK(ratio <= 0.7);
  }
  // Taylor remainder: ||A^2 g||_2 = 2 sqrt(2) * sqrt(1/2) = 2 for g = (1, 0), ||A|| = 2.
  for (std::size_t i = 0; i < eps.size(); ++i) CHECK(errs[i] <= eps[i] * 2.0 / 2.0 * (1.0 + 2.0 * eps[i]));

  const auto m = make_generator(random_symmetric_contraction(10, 4, ContractionClass::markovian));
  for (double e : generator_approx_check(m, CFunction::constant(m.space(), 1.0), {0.1, 0.01})) CHECK(e <= 1e-12);
  CHECK_THROWS_AS(generator_approx_check(g, CFunction(z2_space(), {1.0, 0.0}), {0.01, 0.1}), InvalidInput);
  CHECK_THROWS_AS(generator_approx_check(g, CFunction(z2_space(), {1.0, 0.0}), {0.0}), InvalidInput);
}

TEST_CASE("optimal angle closed form") {
  CHECK(phi_p(2.0) == kPi / 2.0);
  CHECK(std::abs(phi_p(4.0) - kPi / 3.0) <= 1e-15);
  for (double p : {1.25, 1.5, 3.0}) CHECK(phi_p(p) == doctest::Approx(phi_p(dual_exponent(p))).epsilon(1e-14));
  CHECK(std::abs(phi_p(3.0) - std::acos(1.0 / 3.0)) <= 1e-15);
  CHECK_THROWS_AS(phi_p(1.0), InvalidInput);
  CHECK_THROWS_AS(phi_p(std::numeric_limits<double>::infinity()), InvalidInput);
}

TEST_CASE("zeta argument") {
  CHECK(zeta_arg(3.0, 0.0) == 0.0);
  CHECK(zeta_arg(3.0, 1.0) == 0.0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const cplx z(g(rng), g(rng));
    const double p = 1.1 + 0.05 * k;
    const cplx zeta = (z - 1.0) * (std::conj(z) * std::pow(std::abs(z), p - 2.0) - 1.0);
    CHECK(zeta_arg(p, z) == doctest::Approx(std::arg(zeta)).epsilon(1e-12));
    CHECK(std::abs(zeta_arg(2.0, z)) <= 1e-12);
    CHECK(std::abs(std::abs(zeta_arg(p, z)) - std::abs(zeta_arg(p, std::conj(z)))) <= 1e-12);
    CHECK(std::abs(std::abs(zeta_arg(p, z)) - std::abs(zeta_arg(p, 1.0 / z))) <= 1e-9);
  }
}

TEST_CASE("scalar angle search") {
  const auto two = scalar_angle(2.0);
  CHECK(two.phi_numeric == doctest::Approx(kPi / 2.0).epsilon(1e-12));
  double previous = 0.0;
  for (double p : {1.25, 1.5}) {
    const auto r = scalar_angle(p);
    CHECK(std::abs(r.gap) <= 1e-3);
    CHECK(r.phi_numeric >= previous);
    previous = r.phi_numeric;
  }
  previous = 0.0;
  for (double p : {10.0, 4.0, 3.0}) {
    const auto r = scalar_angle(p);
    CHECK(std::abs(r.gap) <= 1e-3);
    CHECK(r.phi_numeric <= kPi / 2.0);
    CHECK(r.phi_numeric >= previous);
    CHECK(r.symmetry_defect <= 1e-9);
    previous = r.phi_numeric;
  }
  CHECK(scalar_angle(3.0).phi_numeric == doctest::Approx(1.230959).epsilon(1e-3));
}

TEST_CASE("dissipativity on the sector") {
  const auto m = make_generator(random_symmetric_contraction(8, 2, ContractionClass::markovian));
  const auto one = std::vector<cplx>(8, 1.0);
  for (int sign : {1, -1}) CHECK(std::abs(normalized_dissipativity_value(m, 3.0, 0.4, sign, one)) <= 1e-15);

  const auto e1 = make_generator(e_lambda(1.0));
  DissipativitySampler ds;
  ds.random_count = 1000;
  ds.seed = 3;
  CHECK(dissipativity_check(e1, 3.0, phi_p(3.0), ds, 1e-9).verdict == Verdict::pass);

  // Above the optimal angle a two-point witness of the Z2 criterion is a
  // violating probe for E_lambda.
  const double phi = phi_p(3.0) + 0.05;
  SamplerSpec sampler;
  sampler.radial = 9;
  sampler.r_min = 1e-2;
  sampler.r_max = 1e2;
  sampler.random_count = 48;
  const auto z2 = z2_criterion_check(family_analyticity(3.0, phi, 1), 360, sampler, 1e-9);
  REQUIRE(z2.verdict == Verdict::violated);
  const auto& w = std::get<Z2Witness>(z2.witness);
  DissipativitySampler probe;
  probe.random_count = 0;
  probe.probes.push_back({w.z[0], w.w[0]});
  const auto r = dissipativity_check(make_generator(e_lambda(w.lambda)), 3.0, phi, probe, 1e-9);
  CHECK(r.verdict == Verdict::violated);

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto g = make_generator(random_symmetric_contraction(2 + seed % 29, seed, static_cast<ContractionClass>(seed % 3)));
    for (double p : {1.5, 2.0, 3.0, 10.0}) {
      DissipativitySampler s;
      s.random_count = 40;
      s.seed = seed;
      CHECK(dissipativity_check(g, p, phi_p(p), s, 1e-9).verdict == Verdict::pass);
    }
  }
}

TEST_CASE("angle report JSON") {
  const auto j = angle_report_json(scalar_angle(4.0));
  CHECK(j["p"] == 4.0);
  CHECK(j.contains("phi_numeric"));
  CHECK(j.contains("witness_z"));
}
