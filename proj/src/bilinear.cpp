#include "formlab/bilinear.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace formlab {

static void require_on(const FiniteMeasureSpace& sp, const CFunction& f) {
  if (!(f.space() == sp)) throw InvalidInput("function lives on a different space");
}

cplx measure_pairing(const RepresentingMeasure& m, const CFunction& f, const CFunction& g) {
  require_on(m.source, f);
  require_on(m.target, g);
  cplx s{};
  for (Eigen::Index x = 0; x < m.masses.rows(); ++x) {
    for (Eigen::Index y = 0; y < m.masses.cols(); ++y) {
      s += m.masses(x, y) * f[static_cast<std::size_t>(x)] * g[static_cast<std::size_t>(y)];
    }
  }
  return s;
}

RepresentingMeasure representing_measure(const KernelOperator& t) {
  const auto& sp = t.space();
  const auto n = static_cast<Eigen::Index>(t.size());
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(j, i) = sp.weight(static_cast<std::size_t>(i)) * t.entries()(i, j);
  }
  RepresentingMeasure rep{sp, sp, std::move(m)};

  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cplx> fv(t.size()), gv(t.size());
  for (auto& v : fv) v = {u(rng), u(rng)};
  for (auto& v : gv) v = {u(rng), u(rng)};
  const CFunction f(sp, fv), g(sp, gv);
  const cplx direct = duality_pair(sp, t.apply(f), g);
  const cplx via = measure_pairing(rep, f, g);
  const double scale = 1.0 + t.entries().cwiseAbs().sum() * sp.total_mass();
  if (!(std::abs(direct - via) <= 1e-12 * scale)) {
    throw NumericFailure("representing measure failed its probe identity");
  }
  return rep;
}

bool modulus_measure_check(const KernelOperator& t, double tol) {
  const auto mt = representing_measure(t);
  const auto mabs = representing_measure(modulus(t));
  for (Eigen::Index x = 0; x < mt.masses.rows(); ++x) {
    for (Eigen::Index y = 0; y < mt.masses.cols(); ++y) {
      if (std::abs(std::abs(mt.masses(x, y)) - mabs.masses(x, y)) > tol) return false;
    }
  }
  return true;
}

HolderCheck holder_extension_check(const KernelOperator& t, double p, const CFunction& f,
                                   const CFunction& g, double tol) {
  if (!(p >= 1.0)) throw InvalidInput("holder check needs p in [1, inf]");
  HolderCheck out;
  out.via_operator = duality_pair(t.space(), t.apply(f), g);
  out.via_measure = measure_pairing(representing_measure(t), f, g);
  out.ok = std::abs(out.via_operator - out.via_measure) <= tol * (1.0 + std::abs(out.via_operator));
  return out;
}

GrothendieckCheck grothendieck_sup_check(const KernelOperator& t, const std::vector<CFunction>& fs,
                                         double tol) {
  if (fs.empty()) throw InvalidInput("grothendieck check needs at least one function");
  const auto& sp = t.space();
  std::vector<double> sup_tf(t.size(), 0.0), sup_f(t.size(), 0.0);
  for (const auto& f : fs) {
    require_on(sp, f);
    const CFunction tf = t.apply(f);
    for (std::size_t i = 0; i < t.size(); ++i) {
      sup_tf[i] = std::max(sup_tf[i], std::abs(tf[i]));
      sup_f[i] = std::max(sup_f[i], std::abs(f[i]));
    }
  }
  GrothendieckCheck out;
  double int_f = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    out.lhs += sp.weight(i) * sup_tf[i];
    int_f += sp.weight(i) * sup_f[i];
  }
  out.rhs = l1_norm(t) * int_f;
  out.ok = out.lhs <= out.rhs + tol;
  return out;
}

PhaseField phase_field(const KernelOperator& t) {
  const auto rep = representing_measure(t);
  const auto n = rep.masses.rows();
  PhaseField pf{Eigen::MatrixXd(n, n), CMatrix(n, n)};
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      const cplx m = rep.masses(x, y);
      const double a = std::abs(m);
      pf.masses(x, y) = a;
      pf.phases(x, y) = a > 0.0 ? m / a : cplx(1.0, 0.0);
    }
  }
  return pf;
}

std::string to_string(DisintegrationMode m) {
  switch (m) {
    case DisintegrationMode::general: return "general";
    case DisintegrationMode::sub_markovian: return "sub_markovian";
    case DisintegrationMode::markovian: return "markovian";
  }
  return "general";
}

DisintegrationMode disintegration_mode_from_string(const std::string& s) {
  if (s == "general") return DisintegrationMode::general;
  if (s == "sub_markovian") return DisintegrationMode::sub_markovian;
  if (s == "markovian") return DisintegrationMode::markovian;
  throw InvalidInput("unknown disintegration mode '" + s + "'");
}

Disintegration disintegrate(const KernelOperator& t, DisintegrationMode mode, double tol,
                            bool allow_noncontractive) {
  const OperatorClass cls = classify(t, tol);
  if (!cls.symmetric) {
    throw InvalidInput("disintegration needs a symmetric operator (defect " +
                       std::to_string(cls.symmetry.max_defect) + " at " + std::to_string(cls.symmetry.i) +
                       "," + std::to_string(cls.symmetry.j) + ")");
  }
  Disintegration d{t.space(), {}, {}, mode, 0.0, {}};
  switch (mode) {
    case DisintegrationMode::general:
      if (!cls.dunford_schwartz) {
        if (!allow_noncontractive) throw InvalidInput("operator is not a Dunford-Schwartz contraction");
        d.warnings.push_back("operator is not Dunford-Schwartz: diagonal weights may be negative");
      }
      break;
    case DisintegrationMode::sub_markovian:
      if (!cls.sub_markovian) throw InvalidInput("sub_markovian mode needs a sub-Markovian operator");
      break;
    case DisintegrationMode::markovian:
      if (!cls.markovian) throw InvalidInput("markovian mode needs a Markovian operator");
      break;
  }

  const auto& sp = t.space();
  const std::size_t n = t.size();
  d.diagonal.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(t(i, j));
    d.diagonal[i] = sp.weight(i) * (1.0 - row);
    if (mode == DisintegrationMode::markovian) {
      if (std::abs(d.diagonal[i]) > tol * static_cast<double>(n + 1) * sp.weight(i)) throw NumericFailure("Markovian operator with nonzero diagonal weight");
      d.diagonal[i] = 0.0;
    }
  }

  const PhaseField pf = phase_field(t);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      const double mass = pf.masses(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
      if (mass <= tol) {
        d.dropped_mass += mass;
        continue;
      }
      cplx phase = pf.phases(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
      if (mode != DisintegrationMode::general) phase = 1.0;
      d.pairs.push_back({x, y, mass, phase});
    }
  }
  return d;
}

cplx evaluate_disintegration(const Disintegration& d, const CFunction& f, const CFunction& g) {
  require_on(d.space, f);
  require_on(d.space, g);
  std::vector<cplx> terms(d.pairs.size());
  for (std::size_t k = 0; k < d.pairs.size(); ++k) {
    const auto& p = d.pairs[k];
    const cplx fx = f[p.x], fy = f[p.y], gx = g[p.x], gy = g[p.y];
    terms[k] = p.mass * 0.5 * ((fx - std::conj(p.phase) * fy) * gx + (fy - p.phase * fx) * gy);
  }
  cplx diag{};
  for (std::size_t i = 0; i < d.diagonal.size(); ++i) diag += d.diagonal[i] * f[i] * g[i];
  return diag + pairwise_sum(terms);
}

json_io::Json disintegration_json(const Disintegration& d) {
  json_io::Json out;
  out["diagonal"] = d.diagonal;
  auto& pairs = out["pairs"] = json_io::Json::array();
  for (const auto& p : d.pairs) {
    pairs.push_back({{"x", p.x}, {"y", p.y}, {"mass", p.mass}, {"phase", json_io::complex_json(p.phase)}});
  }
  out["mode"] = to_string(d.mode);
  out["dropped_mass"] = d.dropped_mass;
  out["warnings"] = d.warnings;
  return out;
}

}  // namespace formlab
