#include "formlab/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "formlab/bilinear.hpp"
#include "formlab/forms.hpp"
#include "formlab/kernel_operator.hpp"
#include "formlab/parallel.hpp"
#include "formlab/semigroup.hpp"
#include "formlab/space.hpp"
#include "formlab/version.hpp"

namespace formlab {
namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream * 0x10001ULL + index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CFunction random_function(const FiniteMeasureSpace& sp, std::mt19937_64& rng, double zero_rate = 0.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<cplx> v(sp.size());
  for (auto& x : v) {
    x = cplx(gauss(rng), gauss(rng));
    if (zero_rate > 0.0 && u(rng) < zero_rate) x = 0.0;
  }
  return CFunction(sp, std::move(v));
}

std::string sci(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

ContractionClass class_for(std::size_t k) {
  static const ContractionClass classes[] = {ContractionClass::general, ContractionClass::sub_markovian,
                                             ContractionClass::markovian};
  return classes[k % 3];
}

// Shared sweep for the disintegration and representing-measure suites.
struct KernelDraw {
  KernelOperator t;
  CFunction f;
  CFunction g;
};

KernelDraw draw_kernel(std::uint64_t seed, std::uint64_t stream, std::size_t k, ContractionClass cls) {
  const std::size_t n = 2 + (k * 7) % 49;
  const std::uint64_t s = mix(seed, stream, k);
  KernelOperator t = random_symmetric_contraction(n, s, cls);
  std::mt19937_64 rng(mix(s, 99));
  CFunction f = random_function(t.space(), rng);
  CFunction g = random_function(t.space(), rng);
  return {std::move(t), std::move(f), std::move(g)};
}

template <typename Row>
std::vector<Row> sweep(std::size_t count, const std::function<Row(std::size_t)>& body) {
  std::vector<Row> rows(count);
  parallel_for(count, [&](std::size_t k) { rows[k] = body(k); });
  return rows;
}

struct ErrRow {
  double err = 0.0;
  bool ok = true;
};

double identity_defect(const Disintegration& d, const KernelOperator& t, const CFunction& f, const CFunction& g) {
  const CFunction tf = t.apply(f);
  const CFunction lhs = linear_combination(1.0, f, -1.0, tf);
  const cplx direct = duality_pair(t.space(), lhs, g);
  const cplx decomposed = evaluate_disintegration(d, f, g);
  double scale = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) row += std::abs(t(i, j)) * std::abs(f[j]);
    scale += t.space().weight(i) * (std::abs(f[i]) + row) * std::abs(g[i]);
  }
  return std::abs(direct - decomposed) / (1.0 + scale);
}

SuiteResult c1(std::uint64_t seed) {
  const auto rows = sweep<ErrRow>(200, [&](std::size_t k) {
    const auto draw = draw_kernel(seed, 1, k, ContractionClass::general);
    const auto d = disintegrate(draw.t, DisintegrationMode::general);
    const double e = identity_defect(d, draw.t, draw.f, draw.g);
    return ErrRow{e, e <= 1e-10};
  });
  double worst = 0.0;
  bool ok = true;
  for (const auto& r : rows) {
    worst = std::max(worst, r.err);
    ok = ok && r.ok;
  }
  return {"C1", "Thm Disintegration", "bilinear", ok,
          "200 kernels n in [2,50], max relative defect " + sci(worst) + " (limit 1e-10)"};
}

SuiteResult c2(std::uint64_t seed) {
  struct Row {
    double err = 0.0;
    double diag = 0.0;
    bool phases_one = true;
  };
  const auto rows = sweep<Row>(200, [&](std::size_t k) {
    const bool markov = k % 2 == 1;
    const auto draw =
        draw_kernel(seed, 2, k, markov ? ContractionClass::markovian : ContractionClass::sub_markovian);
    Row r;
    const auto sub = disintegrate(draw.t, DisintegrationMode::sub_markovian);
    r.err = identity_defect(sub, draw.t, draw.f, draw.g);
    for (const auto& p : sub.pairs) r.phases_one = r.phases_one && p.phase == cplx(1.0, 0.0);
    if (markov) {
      const auto& sp = draw.t.space();
      for (std::size_t i = 0; i < draw.t.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < draw.t.size(); ++j) row += std::abs(draw.t(i, j));
        r.diag = std::max(r.diag, std::abs(sp.weight(i) * (1.0 - row)));
      }
      const auto mk = disintegrate(draw.t, DisintegrationMode::markovian);
      for (double v : mk.diagonal) r.diag = std::max(r.diag, std::abs(v));
      r.err = std::max(r.err, identity_defect(mk, draw.t, draw.f, draw.g));
    }
    return r;
  });
  double worst = 0.0, diag = 0.0;
  bool phases = true;
  for (const auto& r : rows) {
    worst = std::max(worst, r.err);
    diag = std::max(diag, r.diag);
    phases = phases && r.phases_one;
  }
  const bool ok = worst <= 1e-10 && diag <= 1e-12 && phases;
  return {"C2", "Cor sub-Markovian disintegration", "bilinear", ok,
          "200 kernels, max defect " + sci(worst) + ", markovian diagonal " + sci(diag) +
              (phases ? ", all phases 1" : ", phase != 1 found")};
}

SuiteResult c3(std::uint64_t seed) {
  const auto rows = sweep<ErrRow>(200, [&](std::size_t k) {
    const auto draw = draw_kernel(seed, 1, k, ContractionClass::general);
    const auto rep = representing_measure(draw.t);
    const auto rep_mod = representing_measure(modulus(draw.t));
    const double e = (rep.masses.cwiseAbs() - rep_mod.masses.real()).cwiseAbs().maxCoeff();
    return ErrRow{e, e <= 1e-14 && rep_mod.masses.imag().cwiseAbs().maxCoeff() == 0.0};
  });
  double worst = 0.0;
  bool ok = true;
  for (const auto& r : rows) {
    worst = std::max(worst, r.err);
    ok = ok && r.ok;
  }
  return {"C3", "Thm modulus of representing measure", "bilinear", ok,
          "200 kernels, max entrywise gap " + sci(worst) + " (limit 1e-14)"};
}

SuiteResult c4(std::uint64_t seed) {
  const auto rows = sweep<ErrRow>(200, [&](std::size_t k) {
    const auto draw = draw_kernel(seed, 1, k, ContractionClass::general);
    const auto pf = phase_field(draw.t);
    double e = 0.0;
    for (Eigen::Index x = 0; x < pf.masses.rows(); ++x) {
      for (Eigen::Index y = 0; y < pf.masses.cols(); ++y) {
        if (pf.masses(x, y) > 0.0) e = std::max(e, std::abs(pf.phases(x, y) - std::conj(pf.phases(y, x))));
      }
    }
    return ErrRow{e, e <= 1e-12};
  });
  double worst = 0.0;
  bool ok = true;
  for (const auto& r : rows) {
    worst = std::max(worst, r.err);
    ok = ok && r.ok;
  }
  return {"C4", "Cor phase symmetry", "bilinear", ok,
          "200 kernels, max |lambda(x,y) - conj lambda(y,x)| " + sci(worst) + " (limit 1e-12)"};
}

SuiteResult c5(std::uint64_t seed) {
  struct Row {
    double slack = 0.0;
    bool ok = true;
  };
  const auto rows = sweep<Row>(200, [&](std::size_t k) {
    const std::uint64_t s = mix(seed, 5, k);
    const std::size_t n = 1 + k % 30;
    const auto t = random_symmetric_contraction(n, s, class_for(k));
    std::mt19937_64 rng(mix(s, 7));
    std::vector<CFunction> fs;
    const std::size_t m = 1 + k % 10;
    for (std::size_t j = 0; j < m; ++j) fs.push_back(random_function(t.space(), rng, 0.1));
    const auto r = grothendieck_sup_check(t, fs, 1e-12);
    return Row{r.lhs - r.rhs, r.ok};
  });
  double worst = -1e300;
  bool ok = true;
  for (const auto& r : rows) {
    worst = std::max(worst, r.slack);
    ok = ok && r.ok;
  }
  return {"C5", "Lemma L1 sup-inequality", "bilinear", ok,
          "200 (T, family) draws, max lhs - rhs " + sci(worst) + " (limit 1e-12)"};
}

const double kProbeP[] = {1.1, 1.5, 3.0, 4.0, 10.0};

SuiteResult c6(std::uint64_t seed) {
  std::ostringstream detail;
  bool ok = true;
  double worst = 0.0;
  for (double p : kProbeP) {
    AngleSearchSpec spec;
    spec.seed = mix(seed, 6, static_cast<std::uint64_t>(p * 10));
    const auto r = scalar_angle(p, spec);
    worst = std::max(worst, std::abs(r.gap));
    ok = ok && std::abs(r.gap) <= 1e-3;
    if (p == 4.0) {
      const double closed_err = std::abs(r.phi_closed - kPi / 3.0);
      const double delta = 1e-3;
      // Below: every searched point satisfies the constraint; above: the witness breaks it.
      const bool lower = r.phi_numeric >= kPi / 3.0 - delta;
      const bool upper = std::abs(zeta_arg(4.0, r.witness_z)) > kPi / 2.0 - (kPi / 3.0 + delta);
      ok = ok && closed_err <= 1e-15 && lower && upper;
      detail << "p=4 closed-form error " << sci(closed_err) << ", bracket [pi/3 -+ 1e-3] "
             << (lower && upper ? "holds" : "fails") << "; ";
    }
  }
  detail << "max |phi_numeric - phi_p| " << sci(worst) << " over p in {1.1,1.5,3,4,10} (limit 1e-3)";
  return {"C6", "Optimal sector angle", "semigroup", ok, detail.str()};
}

SamplerSpec sharpness_sampler(std::uint64_t seed) {
  SamplerSpec s;
  s.radial = 9;
  s.r_min = 1e-2;
  s.r_max = 1e2;
  s.angular = 24;
  s.random_count = 48;
  s.seed = seed;
  s.refine_starts = 6;
  s.refine_iters = 600;
  return s;
}

struct Sharpness {
  double p = 0.0;
  double pass_min = 0.0;
  CheckReport violation;
  bool ok = false;
};

Sharpness sharpness(double p, std::uint64_t seed) {
  Sharpness out;
  out.p = p;
  const double phi = phi_p(p);
  out.pass_min = 1e300;
  for (int sign : {1, -1}) {
    const auto r =
        z2_criterion_check(family_analyticity(p, phi, sign), 360, sharpness_sampler(mix(seed, 7, sign + 2)), 1e-9);
    out.pass_min = std::min(out.pass_min, r.min_value);
  }
  const auto fam = family_analyticity(p, phi + 0.05, 1);
  out.violation = z2_criterion_check(fam, 360, sharpness_sampler(mix(seed, 7, 5)), 1e-9);
  const bool exact = reevaluate(fam, out.violation) == out.violation.min_value;
  out.ok = out.pass_min >= -1e-9 && out.violation.verdict == Verdict::violated && exact;
  return out;
}

SuiteResult c7(std::uint64_t seed) {
  std::ostringstream detail;
  bool ok = true;
  for (double p : kProbeP) {
    const auto s = sharpness(p, mix(seed, 70, static_cast<std::uint64_t>(p * 10)));
    ok = ok && s.ok;
    detail << "p=" << p << ": min@phi_p " << sci(s.pass_min) << ", min@phi_p+0.05 " << sci(s.violation.min_value)
           << (s.ok ? "" : " FAIL") << "; ";
  }
  std::string d = detail.str();
  d.resize(d.size() - 2);
  return {"C7", "Z2 sharpness of the angle", "forms", ok, d};
}

const double kMainP[] = {1.5, 3.0, 10.0};

SuiteResult c8(std::uint64_t seed) {
  struct Row {
    double min_direct = 1e300;
    double max_identity = 0.0;
    std::size_t bad = 0;
  };
  const auto rows = sweep<Row>(50, [&](std::size_t k) {
    const std::uint64_t s = mix(seed, 8, k);
    const std::size_t n = 2 + (k * 11) % 29;
    const ReductionPlan plan(random_symmetric_contraction(n, s, class_for(k)));
    std::mt19937_64 rng(mix(s, 3));
    Row row;
    for (double p : kMainP) {
      const FormFamily fams[2] = {family_analyticity(p, phi_p(p), 1), family_analyticity(p, phi_p(p), -1)};
      for (std::size_t i = 0; i < 100; ++i) {
        const std::vector<CFunction> f{random_function(plan.op().space(), rng, 0.1)};
        const auto r = plan.crosscheck(fams[i % 2], f, 1e-9);
        row.min_direct = std::min(row.min_direct, r.direct);
        row.max_identity = std::max(row.max_identity, std::abs(r.direct - r.decomposed) / (1.0 + std::abs(r.direct)));
        if (!r.ok || r.direct < -1e-9) ++row.bad;
      }
    }
    return row;
  });
  Row total;
  for (const auto& r : rows) {
    total.min_direct = std::min(total.min_direct, r.min_direct);
    total.max_identity = std::max(total.max_identity, r.max_identity);
    total.bad += r.bad;
  }
  return {"C8", "Thm symmetric contraction semigroups", "forms", total.bad == 0,
          "50 kernels x p in {1.5,3,10} x 100 f: min form " + sci(total.min_direct) + " (limit -1e-9), identity gap " +
              sci(total.max_identity) + ", failing instances " + std::to_string(total.bad)};
}

SuiteResult c9(std::uint64_t seed) {
  struct Row {
    double min_value = 1e300;
  };
  const auto rows = sweep<Row>(50, [&](std::size_t k) {
    const std::uint64_t s = mix(seed, 8, k);
    const std::size_t n = 2 + (k * 11) % 29;
    const auto g = make_generator(random_symmetric_contraction(n, s, class_for(k)));
    Row row;
    for (double p : kMainP) {
      DissipativitySampler ds;
      ds.random_count = 100;
      ds.seed = mix(s, 9, static_cast<std::uint64_t>(p * 10));
      row.min_value = std::min(row.min_value, dissipativity_check(g, p, phi_p(p), ds, 1e-9).min_value);
    }
    return row;
  });
  double min_pass = 1e300;
  for (const auto& r : rows) min_pass = std::min(min_pass, r.min_value);
  bool ok = min_pass >= -1e-9;

  std::ostringstream detail;
  detail << "50 generators at phi_p: min " << sci(min_pass) << "; transplanted witnesses at phi_p+0.05:";
  for (double p : kMainP) {
    const double phi = phi_p(p) + 0.05;
    const auto fam = family_analyticity(p, phi, 1);
    const auto z2 = z2_criterion_check(fam, 360, sharpness_sampler(mix(seed, 90, static_cast<std::uint64_t>(p))), 1e-9);
    bool violated = false;
    double value = 0.0;
    if (const auto* w = std::get_if<Z2Witness>(&z2.witness); w && z2.verdict == Verdict::violated) {
      const auto g = make_generator(e_lambda(w->lambda));
      DissipativitySampler ds;
      ds.random_count = 0;
      ds.seed = mix(seed, 91);
      ds.probes.push_back({w->z[0], w->w[0]});
      const auto r = dissipativity_check(g, p, phi, ds, 1e-9);
      violated = r.verdict == Verdict::violated;
      value = r.min_value;
    }
    ok = ok && violated;
    detail << " p=" << p << " " << (violated ? sci(value) : std::string("none"));
  }
  return {"C9", "Dissipativity on the sector", "semigroup", ok, detail.str()};
}

SuiteResult c10(std::uint64_t seed) {
  std::ostringstream detail;
  bool ok = true;

  double res_err = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    const std::uint64_t s = mix(seed, 10, k);
    const auto g = make_generator(random_symmetric_contraction(20, s, class_for(k)));
    std::mt19937_64 rng(mix(s, 1));
    const auto r = resolvent_check(g, random_function(g.space(), rng), 64, 1e-10);
    res_err = std::max(res_err, r.error);
    ok = ok && r.ok;
  }
  detail << "resolvent gap " << sci(res_err);

  const std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
  double rmin = 1e300, rmax = 0.0;
  auto ratios = [&](const GeneratorInstance& g, const CFunction& f) {
    const auto errs = generator_approx_check(g, f, eps);
    for (std::size_t i = 1; i < errs.size(); ++i) {
      const double r = errs[i] / errs[i - 1];
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
    }
  };
  ratios(make_generator(e_lambda(1.0)), CFunction(z2_space(), {1.0, 0.0}));
  for (std::size_t k = 0; k < 3; ++k) {
    const std::uint64_t s = mix(seed, 11, k);
    const auto g = make_generator(random_symmetric_contraction(12, s, class_for(k)));
    std::mt19937_64 rng(mix(s, 1));
    ratios(g, random_function(g.space(), rng));
  }
  ok = ok && rmin >= 0.3 && rmax <= 0.7;
  detail << ", generator ratios [" << rmin << ", " << rmax << "]";

  double restr = 0.0;
  for (std::size_t k = 0; k < 20; ++k) {
    const std::uint64_t s = mix(seed, 12, k);
    const std::size_t n = 2 + k % 19;
    const auto t = random_symmetric_contraction(n, s, class_for(k));
    std::mt19937_64 rng(mix(s, 1));
    std::vector<std::size_t> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = i;
    std::shuffle(b.begin(), b.end(), rng);
    b.resize(1 + rng() % n);
    const auto f = random_function(t.space(), rng);
    const auto g = random_function(t.space(), rng);
    const auto mf = indicator_multiply(f, b), mg = indicator_multiply(g, b);
    const cplx lhs = duality_pair(t.space(), linear_combination(1.0, mf, -1.0, t.apply(mf)), mg);
    const auto rs = restrict(t, b);
    const auto rf = restrict_function(f, rs.space, b), rg = restrict_function(g, rs.space, b);
    const cplx rhs = duality_pair(rs.space, linear_combination(1.0, rf, -1.0, rs.op.apply(rf)), rg);
    restr = std::max(restr, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
  }
  ok = ok && restr <= 1e-13;
  detail << ", restriction gap " << sci(restr);

  bool push = true;
  for (std::size_t k = 0; k < 10; ++k) {
    const std::uint64_t s = mix(seed, 13, k);
    const std::size_t m = 1 + k % 5, n = m + 3 + k % 7;
    const auto fine = random_space(n, s);
    std::mt19937_64 rng(mix(s, 1));
    std::vector<std::size_t> phi(n);
    for (std::size_t y = 0; y < n; ++y) phi[y] = y < m ? y : rng() % m;
    std::vector<double> coarse_w(m, 0.0);
    for (std::size_t y = 0; y < n; ++y) coarse_w[phi[y]] += fine.weight(y);
    const auto coarse = make_space(coarse_w);
    const auto f = random_function(coarse, rng, 0.2);
    for (auto c : {CatalogFunction::abs_squared, CatalogFunction::conj, CatalogFunction::abspow_1_5}) {
      push = push && pushforward_check(phi, fine, coarse, catalog_function(c), f, 1e-14);
    }
  }
  ok = ok && push;
  detail << ", pushforward " << (push ? "exact" : "mismatch");
  return {"C10", "Semigroup plumbing", "semigroup", ok, detail.str()};
}

// Property suites.

SuiteResult p_space(std::uint64_t seed) {
  double worst = -1e300;
  double tri = -1e300;
  for (std::size_t k = 0; k < 200; ++k) {
    const std::uint64_t s = mix(seed, 20, k);
    const auto sp = random_space(1 + k % 25, s);
    std::mt19937_64 rng(mix(s, 1));
    const auto f = random_function(sp, rng, 0.1), g = random_function(sp, rng, 0.1);
    const double p = 1.0 + std::uniform_real_distribution<double>(0.0, 9.0)(rng);
    const double lhs = std::abs(duality_pair(sp, f, g));
    const double rhs = lp_norm(sp, f, p) * lp_norm(sp, g, dual_exponent(p));
    worst = std::max(worst, lhs - rhs * (1.0 + 1e-12));
    const double sum = lp_norm(sp, linear_combination(1.0, f, 1.0, g), p);
    tri = std::max(tri, sum - (lp_norm(sp, f, p) + lp_norm(sp, g, p)) * (1.0 + 1e-12));
  }
  return {"P-space-1", "Hoelder and Minkowski", "space", worst <= 0.0 && tri <= 0.0,
          "200 draws, max Hoelder excess " + sci(worst) + ", max Minkowski excess " + sci(tri)};
}

SuiteResult p_operator(std::uint64_t seed) {
  std::size_t disagreements = 0, modulus_bad = 0;
  double adj = 0.0;
  for (std::size_t k = 0; k < 200; ++k) {
    const std::uint64_t s = mix(seed, 21, k);
    const std::size_t n = 1 + k % 30;
    auto t = random_symmetric_contraction(n, s, class_for(k));
    // Push half the draws past the contraction boundary.
    if (k % 2 == 1) t = cplx(1.0 + 0.5 * (k % 5) / 4.0 + 1e-3, 0.0) * t;
    const auto c = classify(t);
    if (c.linf_rows.holds != c.l1_columns.holds) ++disagreements;
    if (c.dunford_schwartz && !classify(modulus(t)).dunford_schwartz) ++modulus_bad;
    adj = std::max(adj, (adjoint(t).entries() - conj(t).entries()).cwiseAbs().maxCoeff());
  }
  const bool ok = disagreements == 0 && modulus_bad == 0 && adj <= 1e-12;
  return {"P-operator-1", "Symmetric kernels: Linf iff L1, modulus, adjoint", "operator", ok,
          "200 kernels, criterion disagreements " + std::to_string(disagreements) + ", modulus failures " +
              std::to_string(modulus_bad) + ", max |T* - T| " + sci(adj)};
}

SuiteResult p_bilinear(std::uint64_t seed) {
  double worst = 0.0;
  bool diag_nonneg = true;
  for (std::size_t k = 0; k < 100; ++k) {
    const std::uint64_t s = mix(seed, 22, k);
    const auto t = random_symmetric_contraction(1 + k % 20, s, class_for(k));
    std::mt19937_64 rng(mix(s, 1));
    const auto f = random_function(t.space(), rng), g = random_function(t.space(), rng);
    const auto rep = representing_measure(t);
    const cplx a = measure_pairing(rep, f, g), b = duality_pair(t.space(), t.apply(f), g);
    worst = std::max(worst, std::abs(a - b) / (1.0 + std::abs(b)));
    const auto d = disintegrate(t, DisintegrationMode::general);
    for (std::size_t i = 0; i < t.size(); ++i) {
      diag_nonneg = diag_nonneg && d.diagonal[i] >= -1e-13 * t.space().weight(i);
    }
  }
  return {"P-bilinear-1", "Representing measure pairing", "bilinear", worst <= 1e-12 && diag_nonneg,
          "100 kernels, max pairing gap " + sci(worst) + (diag_nonneg ? ", diagonals >= 0" : ", negative diagonal")};
}

SuiteResult p_forms(std::uint64_t seed) {
  double oracle = 0.0, zero_gap = 0.0;
  std::mt19937_64 rng(mix(seed, 23));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (std::size_t k = 0; k < 200; ++k) {
    const double p = 1.1 + 0.1 * static_cast<double>(k % 90);
    const int sign = k % 2 ? 1 : -1;
    const auto fam = family_analyticity(p, 0.3 * phi_p(p), sign);
    const cplx lambda = std::polar(1.0, angle(rng));
    const std::vector<cplx> z{cplx(gauss(rng), gauss(rng))}, w{cplx(gauss(rng), gauss(rng))};
    // Closed-form block: Re 1/2 [(F(z) - conj(l) F(w)) G(z) + (F(w) - l F(z)) G(w)].
    auto G = [&](cplx x) {
      return std::abs(x) == 0.0 ? cplx(0.0)
                                : std::polar(1.0, sign * 0.3 * phi_p(p)) * std::conj(x) * std::pow(std::abs(x), p - 2.0);
    };
    const double expected =
        0.5 * ((z[0] - std::conj(lambda) * w[0]) * G(z[0]) + (w[0] - lambda * z[0]) * G(w[0])).real();
    const double got = z2_form_value(fam, lambda, z, w);
    const double scale = 1.0 + std::abs(z[0]) * std::abs(G(z[0])) + std::abs(w[0]) * std::abs(G(w[0])) +
                         std::abs(w[0]) * std::abs(G(z[0])) + std::abs(z[0]) * std::abs(G(w[0]));
    oracle = std::max(oracle, std::abs(got - expected) / scale);
    zero_gap = std::max(zero_gap, std::abs(got - z2_operator_form_value(fam, e_lambda(lambda), z, w)));
  }
  return {"P-forms-1", "Z2 block closed form", "forms", oracle <= 1e-13 && zero_gap <= 1e-13,
          "200 draws, max gap to hand-expanded block " + sci(oracle) + ", operator route gap " + sci(zero_gap)};
}

SuiteResult p_semigroup(std::uint64_t seed) {
  double law = 0.0, excess = 0.0;
  for (std::size_t k = 0; k < 20; ++k) {
    const std::uint64_t s = mix(seed, 24, k);
    const auto g = make_generator(random_symmetric_contraction(2 + k % 15, s, class_for(k)));
    const double a = 0.1 + 0.2 * static_cast<double>(k % 5), b = 0.7;
    const auto sa = exp_semigroup(g, a), sb = exp_semigroup(g, b), sab = exp_semigroup(g, a + b);
    law = std::max(law, (compose(sa, sb).entries() - sab.entries()).cwiseAbs().maxCoeff());
    excess = std::max(excess, std::max(linf_norm(sab), l1_norm(sab)) - 1.0);
  }
  return {"P-semigroup-1", "Semigroup law and contractivity", "semigroup", law <= 1e-12 && excess <= 1e-12,
          "20 generators, max |S_a S_b - S_(a+b)| " + sci(law) + ", max norm excess " + sci(excess)};
}

using Suite = std::function<SuiteResult(std::uint64_t)>;

struct Entry {
  std::string module;
  Suite run;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {"space", p_space},         {"operator", p_operator}, {"bilinear", c1},  {"bilinear", c2},
      {"bilinear", c3},           {"bilinear", c4},         {"bilinear", c5},  {"bilinear", p_bilinear},
      {"forms", c7},              {"forms", c8},            {"forms", p_forms}, {"semigroup", c6},
      {"semigroup", c9},          {"semigroup", c10},       {"semigroup", p_semigroup},
  };
  return entries;
}

}  // namespace

std::vector<std::string> verify_scopes() { return {"all", "space", "operator", "bilinear", "forms", "semigroup"}; }

SuiteResult run_criterion(int k, std::uint64_t seed) {
  static const Suite criteria[] = {c1, c2, c3, c4, c5, c6, c7, c8, c9, c10};
  if (k < 1 || k > 10) throw InvalidInput("criterion index must be in 1..10");
  const auto start = std::chrono::steady_clock::now();
  SuiteResult r = criteria[k - 1](seed);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<SuiteResult> run_verify(const VerifyOptions& options) {
  const auto scopes = verify_scopes();
  if (std::find(scopes.begin(), scopes.end(), options.scope) == scopes.end()) {
    throw InvalidInput("unknown verify scope '" + options.scope + "'");
  }
  std::vector<SuiteResult> out;
  for (const auto& e : registry()) {
    if (options.scope != "all" && options.scope != e.module) continue;
    const auto start = std::chrono::steady_clock::now();
    SuiteResult r;
    try {
      r = e.run(options.seed);
    } catch (const std::exception& ex) {
      r.module = e.module;
      r.id = "?";
      r.passed = false;
      r.detail = std::string("suite raised: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_summary(const std::vector<SuiteResult>& results, const VerifyOptions& options) {
  std::ostringstream os;
  os << "formlab verify " << kVersion << " scope=" << options.scope << " seed=" << options.seed << "\n";
  std::size_t passed = 0;
  for (const auto& r : results) {
    std::string anchor = r.anchor;
    if (anchor.size() < 48) anchor.resize(48, ' ');
    std::string id = r.id;
    if (id.size() < 14) id.resize(14, ' ');
    os << (r.passed ? "PASS  " : "FAIL  ") << id << anchor << "  " << r.detail << "\n";
    passed += r.passed ? 1 : 0;
  }
  os << passed << "/" << results.size() << " suites passed\n";
  return os.str();
}

json_io::Json verify_json(const std::vector<SuiteResult>& results, const VerifyOptions& options) {
  json_io::Json suites = json_io::Json::array();
  bool all = true;
  for (const auto& r : results) {
    suites.push_back({{"id", r.id}, {"anchor", r.anchor}, {"module", r.module}, {"passed", r.passed},
                      {"detail", r.detail}});
    all = all && r.passed;
  }
  return {{"command", "verify"}, {"version", kVersion}, {"seed", options.seed}, {"scope", options.scope},
          {"verdict", all ? "pass" : "violated"}, {"suites", suites}};
}

}  // namespace formlab
