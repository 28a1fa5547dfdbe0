#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "formlab/forms.hpp"
#include "formlab/semigroup.hpp"

using namespace formlab;

namespace {

constexpr double kPi = std::numbers::pi;
const cplx I{0.0, 1.0};

std::vector<CFunction> random_functions(const FiniteMeasureSpace& s, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<CFunction> out;
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<cplx> v(s.size());
    for (auto& x : v) x = cplx(g(rng), g(rng));
    out.emplace_back(s, v);
  }
  return out;
}

// G of the analyticity family written out by hand.
cplx analyticity_g(double p, double phi, int sign, cplx x) {
  if (x == cplx(0.0)) return 0.0;
  return std::polar(1.0, sign * phi) * std::conj(x) * std::pow(std::abs(x), p - 2.0);
}

SamplerSpec small_sampler(std::uint64_t seed) {
  SamplerSpec s;
  s.radial = 9;
  s.r_min = 1e-2;
  s.r_max = 1e2;
  s.random_count = 48;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("analyticity family") {
  const std::vector<cplx> x{2.0 * I};
  std::vector<cplx> fs, gs;
  evaluate_family(family_analyticity(3.0, 0.0, 1), x, fs, gs);
  CHECK(fs[0] == 2.0 * I);
  CHECK(std::abs(gs[0] - cplx(0.0, -4.0)) <= 1e-15);
  for (double p : {1.1, 1.5, 2.0, 3.0}) {
    evaluate_family(family_analyticity(p, 0.4, -1), std::vector<cplx>{0.0}, fs, gs);
    CHECK(gs[0] == cplx(0.0));
  }
  const cplx y(0.3, -0.8);
  evaluate_family(family_analyticity(2.0, 0.7, 1), std::vector<cplx>{y}, fs, gs);
  CHECK(std::abs(gs[0] - std::polar(1.0, 0.7) * std::conj(y)) <= 1e-15);
  CHECK_THROWS_AS(family_analyticity(1.0, 0.1, 1), InvalidInput);
  CHECK_THROWS_AS(family_analyticity(3.0, 0.1, 0), InvalidInput);
}

TEST_CASE("custom families from text and files") {
  const auto fam = parse_family(2, "x1:conj(x2),abspow(x1, 2):phase(0.5)*x2");
  CHECK(fam.pairs.size() == 2);
  CHECK(fam.d == 2);
  const std::string path = "custom_family_g.expr";
  {
    std::ofstream out(path);
    out << "conj(x1) * abspow0(x1, 1)";
  }
  const auto from_file = parse_family(1, "x1:" + path);
  std::vector<cplx> fs, gs;
  evaluate_family(from_file, std::vector<cplx>{cplx(3.0, 4.0)}, fs, gs);
  CHECK(std::abs(gs[0] - cplx(15.0, -20.0)) <= 1e-14);
  std::remove(path.c_str());
  CHECK_THROWS_AS(parse_family(1, "x1"), InvalidInput);
  CHECK_THROWS_AS(parse_family(1, "x1:x2"), InvalidInput);
  CHECK_THROWS_AS(parse_family(1, ""), InvalidInput);
}

TEST_CASE("scalar check") {
  for (double phi : {0.0, 0.7, kPi / 2.0}) {
    const auto r = scalar_check(family_analyticity(3.0, phi, 1), small_sampler(1), 1e-9);
    CHECK(r.verdict == Verdict::pass);
  }
  const auto bad = scalar_check(family_analyticity(3.0, kPi / 2.0 + 0.1, 1), small_sampler(2), 1e-9);
  CHECK(bad.verdict == Verdict::violated);
  CHECK(bad.note == "hypothesis fails for this family/angle");
  CHECK(reevaluate(family_analyticity(3.0, kPi / 2.0 + 0.1, 1), bad) == bad.min_value);

  const auto square = make_family(1, {{parse_expr("x1", 1), parse_expr("x1", 1)}});
  CHECK(scalar_form(square, std::vector<cplx>{I}) == -1.0);
  CHECK(scalar_check(square, small_sampler(3), 1e-9).verdict == Verdict::violated);
}

TEST_CASE("Z2 block examples") {
  const auto a2 = family_analyticity(2.0, kPi / 2.0, 1);
  CHECK(std::abs(z2_form_value(a2, 1.0, std::vector<cplx>{0.0}, std::vector<cplx>{1.0})) <= 1e-16);

  const auto square = make_family(1, {{parse_expr("x1", 1), parse_expr("x1", 1)}});
  CHECK(z2_form_value(square, 1.0, std::vector<cplx>{1.0}, std::vector<cplx>{-1.0}) == 2.0);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const std::vector<cplx> z{cplx(g(rng), g(rng))};
    CHECK(std::abs(z2_form_value(family_analyticity(1.5 + k * 0.1, 0.3, 1), 1.0, z, z)) <= 1e-13);
  }
}

TEST_CASE("Z2 block equals the hand expansion") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double p = 1.05 + 9.0 * u(rng), phi = kPi * (u(rng) - 0.5);
    const int sign = k % 2 ? 1 : -1;
    const auto fam = family_analyticity(p, phi, sign);
    const cplx l = std::polar(1.0, 2.0 * kPi * u(rng));
    const cplx z(g(rng), g(rng)), w(g(rng), g(rng));
    const cplx gz = analyticity_g(p, phi, sign, z), gw = analyticity_g(p, phi, sign, w);
    const double hand = 0.5 * ((z - std::conj(l) * w) * gz + (w - l * z) * gw).real();
    const double scale = 1.0 + (std::abs(z) + std::abs(w)) * (std::abs(gz) + std::abs(gw));
    CHECK(std::abs(z2_form_value(fam, l, std::vector<cplx>{z}, std::vector<cplx>{w}) - hand) <= 1e-13 * scale);
  }
}

TEST_CASE("T = 0 block is the average of the scalar form") {
  const auto fam = family_analyticity(3.0, 0.5, 1);
  const std::vector<cplx> z{cplx(0.3, 1.0)}, w{cplx(-2.0, 0.1)};
  const double expected = 0.5 * (scalar_form(fam, z) + scalar_form(fam, w));
  CHECK(z2_zero_operator_value(fam, z, w) == doctest::Approx(expected).epsilon(1e-14));
  const double via_operator = z2_operator_form_value(fam, KernelOperator::zero(z2_space()), z, w);
  CHECK(via_operator == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("Z2 criterion: pass at the optimal angle, violation just above it") {
  for (double p : {1.5, 3.0, 4.0}) {
    const auto r = z2_criterion_check(family_analyticity(p, phi_p(p), 1), 360, small_sampler(5), 1e-9);
    CHECK(r.verdict == Verdict::pass);
    CHECK(r.min_value >= -1e-9);
  }
  const auto fam = family_analyticity(3.0, phi_p(3.0) + 0.05, 1);
  const auto r = z2_criterion_check(fam, 360, small_sampler(6), 1e-9);
  CHECK(r.verdict == Verdict::violated);
  REQUIRE(std::holds_alternative<Z2Witness>(r.witness));
  CHECK(reevaluate(fam, r) == r.min_value);
  const auto& w = std::get<Z2Witness>(r.witness);
  CHECK(z2_form_value(fam, w.lambda, w.z, w.w) < 0.0);
}

TEST_CASE("Z2 criterion modes") {
  const auto fam = family_analyticity(3.0, 0.2, 1);
  CHECK(z2_criterion_check(fam, 1, small_sampler(7), 1e-9, CriterionMode::markovian).verdict == Verdict::pass);
  CHECK(z2_criterion_check(fam, 1, small_sampler(7), 1e-9, CriterionMode::sub_markovian).verdict == Verdict::pass);
  // F = G = x1 fails the scalar part even though the lambda = 1 block is a square.
  const auto square = make_family(1, {{parse_expr("conj(x1)", 1), parse_expr("conj(x1)", 1)}});
  CHECK(z2_criterion_check(square, 1, small_sampler(8), 1e-9, CriterionMode::sub_markovian).verdict ==
        Verdict::violated);
  CHECK_THROWS_AS(z2_criterion_check(fam, 0, small_sampler(8), 1e-9), InvalidInput);
  CHECK(criterion_mode_from_string(to_string(CriterionMode::markovian)) == CriterionMode::markovian);
}

TEST_CASE("full form value examples") {
  std::mt19937_64 rng(12);
  const auto fam = family_analyticity(3.0, 0.9, -1);
  const auto t = random_symmetric_contraction(8, 4, ContractionClass::general);
  const auto f = random_functions(t.space(), 1, rng);
  CHECK(full_form_value(fam, KernelOperator::identity(t.space()), f) == 0.0);
  double expected = 0.0;
  for (std::size_t i = 0; i < 8; ++i) expected += t.space().weight(i) * scalar_form(fam, std::vector<cplx>{f[0][i]});
  CHECK(full_form_value(fam, KernelOperator::zero(t.space()), f) == doctest::Approx(expected).epsilon(1e-13));

  const auto l2 = family_analyticity(2.0, 0.0, 1);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto s = random_symmetric_contraction(2 + seed % 20, seed, ContractionClass::general);
    CHECK(full_form_value(l2, s, random_functions(s.space(), 1, rng)) >= -1e-12);
  }
}

TEST_CASE("full form value is affine in T") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto fam = family_analyticity(2.5, 0.6, 1);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto sp = random_space(10, seed);
    const auto t1 = random_symmetric_contraction(10, seed, ContractionClass::general, sp);
    const auto t2 = random_symmetric_contraction(10, seed + 1000, ContractionClass::markovian, sp);
    const double theta = u(rng);
    const auto mix = cplx(theta) * t1 + cplx(1.0 - theta) * t2;
    const auto f = random_functions(sp, 1, rng);
    const double a = full_form_value(fam, mix, f);
    const double b = theta * full_form_value(fam, t1, f) + (1.0 - theta) * full_form_value(fam, t2, f);
    CHECK(std::abs(a - b) <= 1e-13 * (1.0 + std::abs(a)));
  }
}

TEST_CASE("reduction cross-check") {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double p : {1.5, 3.0, 10.0}) {
    const auto fam = family_analyticity(p, phi_p(p), 1);
    for (int k = 0; k < 20; ++k) {
      const std::vector<CFunction> f{CFunction(z2_space(), {cplx(g(rng), g(rng)), cplx(g(rng), g(rng))})};
      const auto r = reduction_crosscheck(fam, e_lambda(1.0), f, 1e-9);
      CHECK(r.ok);
      CHECK(r.direct >= -1e-9);
      CHECK(r.decomposed == doctest::Approx(r.direct).epsilon(1e-12));
    }
  }
  const auto fam = family_analyticity(3.0, phi_p(3.0), 1);
  const auto sp = random_space(6, 2);
  const auto idr = reduction_crosscheck(fam, KernelOperator::identity(sp), random_functions(sp, 1, rng), 1e-9);
  CHECK(idr.direct == 0.0);
  CHECK(std::abs(idr.decomposed) <= 1e-15);

  const ReductionPlan plan(random_symmetric_contraction(20, 6, ContractionClass::markovian));
  for (int k = 0; k < 50; ++k) CHECK(plan.crosscheck(fam, random_functions(plan.op().space(), 1, rng), 1e-9).ok);
}

TEST_CASE("decomposition identity on random instances") {
  std::mt19937_64 rng(15);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto t = random_symmetric_contraction(2 + seed % 25, seed, static_cast<ContractionClass>(seed % 3));
    const auto fam = family_analyticity(1.2 + 0.05 * static_cast<double>(seed % 100), 0.4, seed % 2 ? 1 : -1);
    const auto r = reduction_crosscheck(fam, t, random_functions(t.space(), 1, rng), 1e-10);
    CHECK(r.identity_ok);
  }
}

TEST_CASE("reduction with a violating family is caught") {
  // Above the optimal angle a two-point instance makes the form negative; the
  // implication still holds because a block is negative too.
  const double p = 3.0, phi = phi_p(p) + 0.05;
  const auto fam = family_analyticity(p, phi, 1);
  const auto r = z2_criterion_check(fam, 360, small_sampler(16), 1e-9);
  REQUIRE(r.verdict == Verdict::violated);
  const auto& w = std::get<Z2Witness>(r.witness);
  const std::vector<CFunction> f{CFunction(z2_space(), {w.z[0], w.w[0]})};
  const auto cc = reduction_crosscheck(fam, e_lambda(w.lambda), f, 1e-9);
  CHECK(cc.direct < 0.0);
  CHECK(cc.z2_min < 0.0);
  CHECK(cc.ok);
}

TEST_CASE("sample points are deterministic and include the origin") {
  SamplerSpec s = small_sampler(3);
  const auto a = sample_points(s, 1), b = sample_points(s, 1);
  CHECK(a == b);
  CHECK(std::find(a.begin(), a.end(), std::vector<cplx>{0.0}) != a.end());
  s.max_points = 50;
  CHECK(sample_points(s, 2).size() <= 50 + s.random_count);
}

TEST_CASE("check report JSON") {
  const auto r = z2_criterion_check(family_analyticity(3.0, 1.4, 1), 36, small_sampler(1), 1e-9);
  const auto j = check_report_json(r);
  CHECK(j["verdict"] == "violated");
  CHECK(j.contains("witness"));
  CHECK(j["witness"].contains("lambda"));
}
