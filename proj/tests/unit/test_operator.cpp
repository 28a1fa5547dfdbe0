#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "formlab/kernel_operator.hpp"

using namespace formlab;

namespace {

const cplx I{0.0, 1.0};

KernelOperator uniform(std::initializer_list<std::initializer_list<cplx>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  CMatrix m(n, n);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (cplx v : r) m(i, j++) = v;
    ++i;
  }
  return {make_space(std::vector<double>(rows.size(), 1.0 / static_cast<double>(n))), m};
}

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// sup { |(T g)_i| : |g| <= f } by cyclic coordinate ascent over the phases
// of g, started from several random phase vectors. Knows nothing about the
// entrywise formula it is meant to confirm.
std::vector<double> brute_force_modulus(const KernelOperator& t, const std::vector<double>& f, std::mt19937_64& rng) {
  const std::size_t n = t.size();
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int start = 0; start < 4; ++start) {
      std::vector<cplx> g(n);
      for (std::size_t j = 0; j < n; ++j) g[j] = std::polar(f[j], angle(rng));
      for (int sweep = 0; sweep < 6; ++sweep) {
        for (std::size_t j = 0; j < n; ++j) {
          cplx rest = 0.0;
          for (std::size_t k = 0; k < n; ++k) {
            if (k != j) rest += t(i, k) * g[k];
          }
          // Best phase for coordinate j: try a fine angular grid.
          double best = -1.0;
          cplx best_g = g[j];
          for (int a = 0; a < 720; ++a) {
            const cplx cand = std::polar(f[j], 2.0 * std::numbers::pi * a / 720.0);
            const double v = std::abs(rest + t(i, j) * cand);
            if (v > best) {
              best = v;
              best_g = cand;
            }
          }
          g[j] = best_g;
        }
      }
      cplx s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += t(i, j) * g[j];
      out[i] = std::max(out[i], std::abs(s));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("apply") {
  const auto z2 = z2_space();
  const CFunction f(z2, {cplx(1.0, 2.0), cplx(-3.0, 0.5)});
  const auto id = KernelOperator::identity(z2).apply(f);
  CHECK(id[0] == f[0]);
  CHECK(id[1] == f[1]);
  const auto sw = e_lambda(1.0).apply(f);
  CHECK(sw[0] == f[1]);
  CHECK(sw[1] == f[0]);
  const auto zero = KernelOperator::zero(z2).apply(f);
  CHECK(zero[0] == cplx(0.0));
  CHECK(zero[1] == cplx(0.0));
  CHECK_THROWS_AS(KernelOperator::identity(make_space({1.0, 1.0, 1.0})).apply(f), InvalidInput);
}

TEST_CASE("operator construction validates its input") {
  CHECK_THROWS_AS(KernelOperator(z2_space(), CMatrix::Zero(3, 3)), InvalidInput);
  CMatrix bad = CMatrix::Zero(2, 2);
  bad(0, 1) = cplx(std::nan(""), 0.0);
  CHECK_THROWS_AS(KernelOperator(z2_space(), bad), InvalidInput);
}

TEST_CASE("classify examples") {
  for (std::size_t n : {1u, 2u, 5u}) {
    const auto sp = make_space(std::vector<double>(n, 1.0));
    const KernelOperator t(sp, CMatrix::Constant(n, n, 1.0 / static_cast<double>(n)));
    const auto c = classify(t);
    CHECK(c.symmetric);
    CHECK(c.markovian);
  }
  for (cplx l : {cplx(1.0), I, std::polar(1.0, 2.0), cplx(-1.0)}) {
    const auto c = classify(e_lambda(l));
    CHECK(c.symmetric);
    CHECK(c.dunford_schwartz);
    CHECK(c.sub_markovian == (l == cplx(1.0)));
  }
  const auto c = classify(uniform({{0.6, 0.5}, {0.5, 0.6}}));
  CHECK(c.symmetric);
  CHECK_FALSE(c.dunford_schwartz);
  CHECK(c.linf_rows.max_defect == doctest::Approx(0.1));
}

TEST_CASE("classification criteria follow the kernel convention") {
  // Row sums within 1 but weighted column sums above 1.
  const KernelOperator t(make_space({4.0, 1.0}), (CMatrix(2, 2) << 0.0, 0.9, 0.0, 0.0).finished());
  const auto c = classify(t);
  CHECK(c.linf_rows.holds);
  CHECK_FALSE(c.l1_columns.holds);
  CHECK_FALSE(c.symmetric);
}

TEST_CASE("modulus examples and brute-force supremum oracle") {
  const auto m = modulus(uniform({{0.5, -0.3}, {-0.3, 0.5}}));
  CHECK(m(0, 1) == cplx(0.3));
  CHECK(m(0, 0) == cplx(0.5));
  for (cplx l : {I, std::polar(1.0, -0.7)}) {
    CHECK(max_abs(modulus(e_lambda(l)).entries() - e_lambda(1.0).entries()) <= 1e-15);
  }
  const auto pos = random_symmetric_contraction(6, 3, ContractionClass::sub_markovian);
  CHECK(modulus(pos).entries() == pos.entries());

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto t = random_symmetric_contraction(4, seed, ContractionClass::general);
    std::vector<double> f(4);
    for (auto& x : f) x = u(rng);
    const auto sup = brute_force_modulus(t, f, rng);
    std::vector<cplx> fc(f.begin(), f.end());
    const auto mf = modulus(t).apply(CFunction(t.space(), fc));
    for (std::size_t i = 0; i < 4; ++i) CHECK(sup[i] == doctest::Approx(mf[i].real()).epsilon(1e-5));
  }
}

TEST_CASE("adjoint") {
  CMatrix m(3, 3);
  m << 0.1, cplx(0.2, 0.3), 0.0, -0.4, 0.5, cplx(0.0, -0.6), 0.7, 0.8, 0.9;
  const KernelOperator t(make_space({2.0, 2.0, 2.0}), m);
  CHECK(max_abs(adjoint(t).entries() - m.transpose()) == 0.0);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto s = random_symmetric_contraction(1 + seed % 9, seed, ContractionClass::general);
    CHECK(max_abs(adjoint(s).entries() - conj(s).entries()) <= 1e-14);
    CHECK(max_abs(modulus(adjoint(s)).entries() - adjoint(modulus(s)).entries()) <= 1e-15);
    CHECK(max_abs(adjoint(adjoint(s)).entries() - s.entries()) <= 1e-14);
  }
}

TEST_CASE("adjoint satisfies the bilinear relation") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto sp = random_space(7, 2);
  CMatrix m(7, 7);
  for (Eigen::Index i = 0; i < 7; ++i)
    for (Eigen::Index j = 0; j < 7; ++j) m(i, j) = cplx(g(rng), g(rng));
  const KernelOperator t(sp, m);
  std::vector<cplx> fv(7), gv(7);
  for (auto& x : fv) x = cplx(g(rng), g(rng));
  for (auto& x : gv) x = cplx(g(rng), g(rng));
  const CFunction f(sp, fv), h(sp, gv);
  const cplx a = duality_pair(sp, t.apply(f), h), b = duality_pair(sp, f, adjoint(t).apply(h));
  CHECK(std::abs(a - b) <= 1e-13 * (1.0 + std::abs(a)));
}

TEST_CASE("restriction") {
  const auto t = random_symmetric_contraction(6, 9, ContractionClass::general);
  const std::vector<std::size_t> all{0, 1, 2, 3, 4, 5};
  const auto r = restrict(t, all);
  CHECK(r.space == t.space());
  CHECK(r.op.entries() == t.entries());
  const auto part = restrict(t, {4, 1, 2});
  CHECK(part.space.size() == 3);
  CHECK(part.space.weight(0) == t.space().weight(4));
  CHECK(part.op(0, 1) == t(4, 1));
  const auto c = classify(part.op);
  CHECK(c.symmetric);
  CHECK(c.dunford_schwartz);
  CHECK_THROWS_AS(restrict(t, {}), InvalidInput);
  CHECK_THROWS_AS(restrict(t, {1, 1}), InvalidInput);
  CHECK_THROWS_AS(restrict(t, {6}), InvalidInput);

  // Uniform three-state chain restricted to two states loses row mass.
  const auto chain = KernelOperator(make_space({1.0, 1.0, 1.0}), CMatrix::Constant(3, 3, 1.0 / 3.0));
  const auto sub = classify(restrict(chain, {0, 1}).op);
  CHECK(sub.sub_markovian);
  CHECK_FALSE(sub.markovian);
}

TEST_CASE("restriction identity against multiplication by the indicator") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto t = random_symmetric_contraction(8, seed, ContractionClass::general);
    const std::vector<std::size_t> b{6, 0, 3};
    std::vector<cplx> fv(8), gv(8);
    for (auto& x : fv) x = cplx(g(rng), g(rng));
    for (auto& x : gv) x = cplx(g(rng), g(rng));
    const CFunction f(t.space(), fv), h(t.space(), gv);
    const auto mf = indicator_multiply(f, b), mh = indicator_multiply(h, b);
    const cplx lhs = duality_pair(t.space(), linear_combination(1.0, mf, -1.0, t.apply(mf)), mh);
    const auto r = restrict(t, b);
    const auto rf = restrict_function(f, r.space, b), rh = restrict_function(h, r.space, b);
    const cplx rhs = duality_pair(r.space, linear_combination(1.0, rf, -1.0, r.op.apply(rf)), rh);
    CHECK(std::abs(lhs - rhs) <= 1e-13 * (1.0 + std::abs(lhs)));
    const auto back = extend_function(t.space(), rf, b);
    for (std::size_t i = 0; i < 8; ++i) CHECK(back[i] == mf[i]);
  }
}

TEST_CASE("pushforward functional calculus") {
  const auto coarse = make_space({0.5, 0.5});
  const auto fine = make_space({0.25, 0.25, 0.25, 0.25});
  const std::vector<std::size_t> phi{0, 0, 1, 1};
  const CFunction f(coarse, {cplx(1.0, -2.0), cplx(0.0, 3.0)});
  for (const char* name : {"abs2", "conj", "abspow1.5"}) {
    const auto which = catalog_function_from_name(name);
    REQUIRE(which.has_value());
    CHECK(pushforward_check(phi, fine, coarse, catalog_function(*which), f, 1e-14));
  }
  CHECK_FALSE(catalog_function_from_name("sqrt").has_value());
  CHECK(catalog_function(CatalogFunction::abs_squared)(cplx(3.0, 4.0)) == cplx(25.0));
  CHECK(catalog_function(CatalogFunction::abspow_1_5)(cplx(0.0, 4.0)) == cplx(8.0));
  CHECK(pushforward_check({0, 1}, coarse, coarse, catalog_function(CatalogFunction::conj), f, 1e-14));
  CHECK_THROWS_AS(pushforward_check({0, 0, 0, 1}, fine, coarse, catalog_function(CatalogFunction::conj), f, 1e-14),
                  InvalidInput);
  CHECK_THROWS_AS(pushforward_check({0, 0, 0, 0}, fine, coarse, catalog_function(CatalogFunction::conj), f, 1e-14),
                  InvalidInput);
}

TEST_CASE("E_lambda and the set C2") {
  const auto e1 = e_lambda(1.0);
  CHECK(e1(0, 1) == cplx(1.0));
  CHECK(e1(1, 0) == cplx(1.0));
  CHECK(e1(0, 0) == cplx(0.0));
  const auto ei = e_lambda(I);
  CHECK(ei(0, 1) == -I);
  CHECK(ei(1, 0) == I);
  for (double a : {0.0, 0.3, 2.0, -1.1}) {
    const auto e = e_lambda(std::polar(1.0, a));
    CHECK(max_abs(compose(e, e).entries() - CMatrix::Identity(2, 2)) <= 1e-15);
  }
  CHECK_THROWS_AS(e_lambda(cplx(0.5, 0.0)), InvalidInput);
  CHECK(c2_membership(0.0, 0.0, std::polar(1.0, 0.4)));
  CHECK(c2_membership(0.5, -0.5, 0.5));
  CHECK_FALSE(c2_membership(0.9, 0.0, 0.2));
}

TEST_CASE("C2 membership matches classification of the 2x2 kernel") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const double a = u(rng), b = u(rng);
    const cplx w(u(rng), u(rng));
    CMatrix m(2, 2);
    m << a, std::conj(w), w, b;
    const bool ds = classify(KernelOperator(z2_space(), m), 0.0).dunford_schwartz;
    // classify allows no slack at tol 0; skip draws within rounding of the boundary.
    if (std::abs(std::max(std::abs(a), std::abs(b)) + std::abs(w) - 1.0) < 1e-12) continue;
    CHECK(c2_membership(a, b, w) == ds);
  }
}

TEST_CASE("random symmetric contractions") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t n = 1 + seed % 25;
    CHECK(classify(random_symmetric_contraction(n, seed, ContractionClass::markovian)).markovian);
    CHECK(classify(random_symmetric_contraction(n, seed, ContractionClass::sub_markovian)).sub_markovian);
    const auto g = classify(random_symmetric_contraction(n, seed, ContractionClass::general));
    CHECK(g.symmetric);
    CHECK(g.dunford_schwartz);
    CHECK(g.linf_rows.holds == g.l1_columns.holds);
  }
  const auto one = random_symmetric_contraction(1, 77, ContractionClass::markovian);
  CHECK(one(0, 0) == cplx(1.0));
  const auto a = random_symmetric_contraction(9, 5, ContractionClass::general);
  const auto b = random_symmetric_contraction(9, 5, ContractionClass::general);
  CHECK(a.entries() == b.entries());
  CHECK(a.space() == b.space());
}

TEST_CASE("symmetric kernels: row criterion iff column criterion, modulus keeps the class") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto base = random_symmetric_contraction(2 + seed % 20, seed, ContractionClass::general);
    const double scale = 0.8 + 0.005 * static_cast<double>(seed);
    const auto t = cplx(scale, 0.0) * base;
    const auto c = classify(t);
    CHECK(c.linf_rows.holds == c.l1_columns.holds);
    if (c.dunford_schwartz) CHECK(classify(modulus(t)).dunford_schwartz);
  }
}

TEST_CASE("operator JSON round trip and errors") {
  const auto t = random_symmetric_contraction(5, 12, ContractionClass::general);
  const auto back = parse_operator_json(operator_to_json(t));
  CHECK(back.space() == t.space());
  CHECK(back.entries() == t.entries());
  CHECK_THROWS_AS(parse_operator_json("{\"weights\": [1, 1], \"matrix\": [[[0, 0], [1, 0]]"), InvalidInput);
  CHECK_THROWS_AS(parse_operator_json("{\"weights\": [1, 1], \"matrix\": [[[0, 0]]]}"), InvalidInput);
  CHECK_THROWS_AS(parse_operator_json("{\"matrix\": [[[0, 0]]]}"), InvalidInput);
  const auto j = operator_class_json(classify(e_lambda(1.0)));
  CHECK(j["symmetric"] == true);
  CHECK(j["dunford_schwartz"] == true);
  CHECK(j["sub_markovian"] == true);
  CHECK(j["markovian"] == true);
}
