#include "formlab/kernel_operator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace formlab {

KernelOperator::KernelOperator(FiniteMeasureSpace space, CMatrix entries)
    : space_(std::move(space)), entries_(std::move(entries)) {
  const auto n = static_cast<Eigen::Index>(space_.size());
  if (entries_.rows() != n || entries_.cols() != n) {
    throw InvalidInput("kernel must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (!entries_.allFinite()) throw InvalidInput("kernel has a non-finite entry");
}

KernelOperator KernelOperator::identity(const FiniteMeasureSpace& space) {
  const auto n = static_cast<Eigen::Index>(space.size());
  return KernelOperator(space, CMatrix::Identity(n, n));
}

KernelOperator KernelOperator::zero(const FiniteMeasureSpace& space) {
  const auto n = static_cast<Eigen::Index>(space.size());
  return KernelOperator(space, CMatrix::Zero(n, n));
}

CFunction KernelOperator::apply(const CFunction& f) const {
  if (!(f.space() == space_)) throw InvalidInput("apply: function lives on a different space");
  std::vector<cplx> out(size());
  apply_into(f.values(), out);
  return CFunction(space_, std::move(out));
}

void KernelOperator::apply_into(std::span<const cplx> in, std::span<cplx> out) const {
  const auto n = static_cast<Eigen::Index>(size());
  for (Eigen::Index i = 0; i < n; ++i) {
    cplx s{};
    for (Eigen::Index j = 0; j < n; ++j) s += entries_(i, j) * in[j];
    out[i] = s;
  }
}

KernelOperator conj(const KernelOperator& t) { return {t.space(), t.entries().conjugate()}; }

KernelOperator real_part(const KernelOperator& t) {
  return {t.space(), t.entries().real().cast<cplx>()};
}

KernelOperator imag_part(const KernelOperator& t) {
  return {t.space(), t.entries().imag().cast<cplx>()};
}

static void require_same_space(const KernelOperator& a, const KernelOperator& b) {
  if (!(a.space() == b.space())) throw InvalidInput("operators live on different spaces");
}

KernelOperator operator+(const KernelOperator& a, const KernelOperator& b) {
  require_same_space(a, b);
  return {a.space(), a.entries() + b.entries()};
}

KernelOperator operator-(const KernelOperator& a, const KernelOperator& b) {
  require_same_space(a, b);
  return {a.space(), a.entries() - b.entries()};
}

KernelOperator operator*(cplx s, const KernelOperator& t) { return {t.space(), s * t.entries()}; }

KernelOperator compose(const KernelOperator& a, const KernelOperator& b) {
  require_same_space(a, b);
  return {a.space(), a.entries() * b.entries()};
}

double linf_norm(const KernelOperator& t) {
  double m = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) row += std::abs(t(i, j));
    m = std::max(m, row);
  }
  return m;
}

double l1_norm(const KernelOperator& t) {
  const auto& sp = t.space();
  double m = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) col += sp.weight(i) * std::abs(t(i, j));
    m = std::max(m, col / sp.weight(j));
  }
  return m;
}

namespace {

void record(ConditionCheck& c, double defect, std::size_t i, std::size_t j, double tol) {
  if (defect > c.max_defect) {
    c.max_defect = defect;
    c.i = i;
    c.j = j;
  }
  if (defect > tol) c.holds = false;
}

}  // namespace

OperatorClass classify(const KernelOperator& t, double tol) {
  OperatorClass out;
  out.tolerance = tol;
  const auto& sp = t.space();
  const std::size_t n = t.size();
  for (std::size_t i = 0; i < n; ++i) {
    double row_abs = 0.0;
    cplx row_sum{};
    for (std::size_t j = 0; j < n; ++j) {
      const cplx v = t(i, j);
      const cplx mirrored = sp.weight(j) * std::conj(t(j, i)) / sp.weight(i);
      record(out.symmetry, std::abs(v - mirrored), i, j, tol);
      record(out.nonnegative, std::max(std::abs(v.imag()), -v.real()), i, j, tol);
      row_abs += std::abs(v);
      row_sum += v;
    }
    record(out.linf_rows, row_abs - 1.0, i, i, tol);
    record(out.unit_row_sums, std::abs(row_sum - 1.0), i, i, tol);
  }
  for (std::size_t j = 0; j < n; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < n; ++i) col += sp.weight(i) * std::abs(t(i, j));
    record(out.l1_columns, col / sp.weight(j) - 1.0, j, j, tol);
  }
  out.symmetric = out.symmetry.holds;
  out.dunford_schwartz = out.linf_rows.holds && out.l1_columns.holds;
  out.sub_markovian = out.dunford_schwartz && out.nonnegative.holds;
  out.markovian = out.sub_markovian && out.unit_row_sums.holds;
  return out;
}

KernelOperator modulus(const KernelOperator& t) {
  return {t.space(), t.entries().cwiseAbs().cast<cplx>()};
}

KernelOperator adjoint(const KernelOperator& t) {
  const auto& sp = t.space();
  const auto n = static_cast<Eigen::Index>(t.size());
  CMatrix s(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      s(j, i) = sp.weight(static_cast<std::size_t>(i)) * t.entries()(i, j) /
                sp.weight(static_cast<std::size_t>(j));
    }
  }
  return {sp, std::move(s)};
}

static void validate_subset(const std::vector<std::size_t>& subset, std::size_t n) {
  if (subset.empty()) throw InvalidInput("restriction needs a nonempty index set");
  std::vector<bool> seen(n, false);
  for (std::size_t b : subset) {
    if (b >= n) throw InvalidInput("index " + std::to_string(b) + " out of range");
    if (seen[b]) throw InvalidInput("index " + std::to_string(b) + " repeated");
    seen[b] = true;
  }
}

Restriction restrict(const KernelOperator& t, const std::vector<std::size_t>& subset) {
  validate_subset(subset, t.size());
  std::vector<double> w;
  w.reserve(subset.size());
  for (std::size_t b : subset) w.push_back(t.space().weight(b));
  const auto m = static_cast<Eigen::Index>(subset.size());
  CMatrix sub(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) {
      sub(r, c) = t.entries()(static_cast<Eigen::Index>(subset[r]), static_cast<Eigen::Index>(subset[c]));
    }
  }
  FiniteMeasureSpace space(std::move(w));
  return {space, KernelOperator(space, std::move(sub))};
}

CFunction restrict_function(const CFunction& f, const FiniteMeasureSpace& sub,
                            const std::vector<std::size_t>& subset) {
  validate_subset(subset, f.size());
  std::vector<cplx> v;
  v.reserve(subset.size());
  for (std::size_t b : subset) v.push_back(f[b]);
  return CFunction(sub, std::move(v));
}

CFunction extend_function(const FiniteMeasureSpace& full, const CFunction& g,
                          const std::vector<std::size_t>& subset) {
  validate_subset(subset, full.size());
  if (g.size() != subset.size()) throw InvalidInput("extension: size mismatch");
  std::vector<cplx> v(full.size());
  for (std::size_t k = 0; k < subset.size(); ++k) v[subset[k]] = g[k];
  return CFunction(full, std::move(v));
}

CFunction indicator_multiply(const CFunction& f, const std::vector<std::size_t>& subset) {
  validate_subset(subset, f.size());
  std::vector<cplx> v(f.size());
  for (std::size_t b : subset) v[b] = f[b];
  return CFunction(f.space(), std::move(v));
}

CFunction pushforward(const std::vector<std::size_t>& phi, const FiniteMeasureSpace& fine,
                      const CFunction& f) {
  if (phi.size() != fine.size()) throw InvalidInput("point map must cover every fine point");
  std::vector<cplx> v(fine.size());
  for (std::size_t y = 0; y < phi.size(); ++y) {
    if (phi[y] >= f.size()) throw InvalidInput("point map target out of range");
    v[y] = f[phi[y]];
  }
  return CFunction(fine, std::move(v));
}

std::function<cplx(cplx)> catalog_function(CatalogFunction which) {
  switch (which) {
    case CatalogFunction::abs_squared:
      return [](cplx z) { return cplx(std::norm(z)); };
    case CatalogFunction::conj:
      return [](cplx z) { return std::conj(z); };
    case CatalogFunction::abspow_1_5:
      return [](cplx z) { return cplx(std::pow(std::abs(z), 1.5)); };
  }
  throw InvalidInput("unknown catalog function");
}

std::optional<CatalogFunction> catalog_function_from_name(const std::string& name) {
  if (name == "abs2") return CatalogFunction::abs_squared;
  if (name == "conj") return CatalogFunction::conj;
  if (name == "abspow1.5") return CatalogFunction::abspow_1_5;
  return std::nullopt;
}

bool pushforward_check(const std::vector<std::size_t>& phi, const FiniteMeasureSpace& fine,
                       const FiniteMeasureSpace& coarse, const std::function<cplx(cplx)>& fn,
                       const CFunction& f, double tol) {
  if (!(f.space() == coarse)) throw InvalidInput("f must live on the coarse space");
  if (phi.size() != fine.size()) throw InvalidInput("point map must cover every fine point");
  std::vector<double> image_mass(coarse.size(), 0.0);
  for (std::size_t y = 0; y < phi.size(); ++y) {
    if (phi[y] >= coarse.size()) throw InvalidInput("point map target out of range");
    image_mass[phi[y]] += fine.weight(y);
  }
  for (std::size_t x = 0; x < coarse.size(); ++x) {
    if (image_mass[x] == 0.0) throw InvalidInput("point map is not onto (point " + std::to_string(x) + ")");
    if (std::abs(image_mass[x] - coarse.weight(x)) > tol) {
      throw InvalidInput("point map is not measure preserving at point " + std::to_string(x));
    }
  }

  std::vector<cplx> fx(f.size());
  for (std::size_t x = 0; x < f.size(); ++x) fx[x] = fn(f[x]);
  const CFunction lhs = pushforward(phi, fine, CFunction(coarse, std::move(fx)));
  const CFunction phi_f = pushforward(phi, fine, f);
  for (std::size_t y = 0; y < fine.size(); ++y) {
    if (std::abs(lhs[y] - fn(phi_f[y])) > tol) return false;
  }
  const cplx before = integrate(coarse, f);
  const cplx after = integrate(fine, phi_f);
  return std::abs(before - after) <= tol * (1.0 + std::abs(before));
}

KernelOperator e_lambda(cplx lambda) {
  if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()) ||
      std::abs(std::abs(lambda) - 1.0) > 1e-12) {
    throw InvalidInput("E_lambda needs a unimodular lambda");
  }
  CMatrix m(2, 2);
  m << 0.0, std::conj(lambda), lambda, 0.0;
  return {z2_space(), std::move(m)};
}

bool c2_membership(double a, double b, cplx w) {
  return std::max(std::abs(a), std::abs(b)) <= 1.0 - std::abs(w);
}

std::string to_string(ContractionClass c) {
  switch (c) {
    case ContractionClass::general: return "general";
    case ContractionClass::sub_markovian: return "sub_markovian";
    case ContractionClass::markovian: return "markovian";
  }
  return "general";
}

ContractionClass contraction_class_from_string(const std::string& s) {
  if (s == "general") return ContractionClass::general;
  if (s == "sub_markovian") return ContractionClass::sub_markovian;
  if (s == "markovian") return ContractionClass::markovian;
  throw InvalidInput("unknown operator class '" + s + "'");
}

FiniteMeasureSpace random_space(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidInput("random space needs n >= 1");
  std::mt19937_64 rng(seed ^ 0x5eedf00dULL);
  std::uniform_real_distribution<double> u(0.25, 2.0);
  std::vector<double> w(n);
  for (auto& x : w) x = u(rng);
  return FiniteMeasureSpace(std::move(w));
}

KernelOperator random_symmetric_contraction(std::size_t n, std::uint64_t seed, ContractionClass cls,
                                            std::optional<FiniteMeasureSpace> space) {
  if (n == 0) throw InvalidInput("random operator needs n >= 1");
  FiniteMeasureSpace sp = space ? *space : random_space(n, seed);
  if (sp.size() != n) throw InvalidInput("space size does not match n");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto N = static_cast<Eigen::Index>(n);

  // Symmetric sparsity pattern: roughly a quarter of off-diagonal cells empty.
  Eigen::MatrixXi keep = Eigen::MatrixXi::Ones(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = i + 1; j < N; ++j) {
      if (u(rng) < 0.25) keep(i, j) = keep(j, i) = 0;
    }
  }

  if (cls == ContractionClass::markovian) {
    // Metropolis: symmetric proposal q with row sums <= 1, accepted with
    // min(1, mu_j / mu_i). Then mu_i t_ij = q_ij min(mu_i, mu_j) is symmetric.
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
      for (Eigen::Index j = i + 1; j < N; ++j) {
        if (keep(i, j)) q(i, j) = q(j, i) = u(rng);
      }
    }
    const double max_row = N > 1 ? q.rowwise().sum().maxCoeff() : 0.0;
    if (max_row > 0.0) q /= max_row;
    CMatrix t = CMatrix::Zero(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
      double off = 0.0;
      for (Eigen::Index j = 0; j < N; ++j) {
        if (j == i) continue;
        const double wi = sp.weight(static_cast<std::size_t>(i));
        const double wj = sp.weight(static_cast<std::size_t>(j));
        const double v = q(i, j) * std::min(1.0, wj / wi);
        t(i, j) = v;
        off += v;
      }
      t(i, i) = 1.0 - off;
    }
    return {sp, std::move(t)};
  }

  CMatrix x(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      if (!keep(i, j)) {
        x(i, j) = 0.0;
      } else if (cls == ContractionClass::general) {
        x(i, j) = cplx(gauss(rng), gauss(rng));
      } else {
        x(i, j) = u(rng);
      }
    }
  }
  CMatrix t(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const double wi = sp.weight(static_cast<std::size_t>(i));
    t(i, i) = x(i, i).real();
    for (Eigen::Index j = i + 1; j < N; ++j) {
      const double wj = sp.weight(static_cast<std::size_t>(j));
      t(i, j) = 0.5 * (x(i, j) + wj * std::conj(x(j, i)) / wi);
      t(j, i) = wi * std::conj(t(i, j)) / wj;
    }
  }
  KernelOperator raw(sp, t);
  const double norm = std::max(linf_norm(raw), l1_norm(raw));
  // Half the draws sit on the boundary (norm exactly 1), the rest inside.
  const double target = u(rng) < 0.5 ? 1.0 : 0.6 + 0.4 * u(rng);
  if (norm > 0.0) t *= target / norm;
  return {sp, std::move(t)};
}

KernelOperator parse_operator_json(const std::string& text) {
  const auto doc = json_io::parse(text);
  if (!doc.is_object() || !doc.contains("weights") || !doc.contains("matrix")) {
    throw InvalidInput("operator file needs \"weights\" and \"matrix\"");
  }
  FiniteMeasureSpace sp(json_io::real_list(doc.at("weights"), "weights"));
  const auto& rows = json_io::array(doc.at("matrix"), "matrix");
  const auto n = static_cast<Eigen::Index>(sp.size());
  if (static_cast<Eigen::Index>(rows.size()) != n) throw InvalidInput("matrix row count differs from weights");
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = json_io::array(rows[static_cast<std::size_t>(i)], "matrix row");
    if (static_cast<Eigen::Index>(row.size()) != n) throw InvalidInput("matrix row " + std::to_string(i) + " has wrong length");
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = json_io::complex_value(row[static_cast<std::size_t>(j)]);
  }
  return {sp, std::move(m)};
}

std::string operator_to_json(const KernelOperator& t) {
  json_io::Json doc;
  doc["weights"] = std::vector<double>(t.space().weights().begin(), t.space().weights().end());
  auto& rows = doc["matrix"] = json_io::Json::array();
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto row = json_io::Json::array();
    for (std::size_t j = 0; j < t.size(); ++j) row.push_back(json_io::complex_json(t(i, j)));
    rows.push_back(std::move(row));
  }
  return doc.dump();
}

static json_io::Json condition_json(const ConditionCheck& c) {
  return {{"holds", c.holds}, {"max_defect", c.max_defect}, {"i", c.i}, {"j", c.j}};
}

json_io::Json operator_class_json(const OperatorClass& c) {
  json_io::Json out;
  out["symmetric"] = c.symmetric;
  out["dunford_schwartz"] = c.dunford_schwartz;
  out["sub_markovian"] = c.sub_markovian;
  out["markovian"] = c.markovian;
  out["tolerance"] = c.tolerance;
  out["conditions"] = {{"symmetry", condition_json(c.symmetry)},
                       {"linf_rows", condition_json(c.linf_rows)},
                       {"l1_columns", condition_json(c.l1_columns)},
                       {"nonnegative", condition_json(c.nonnegative)},
                       {"unit_row_sums", condition_json(c.unit_row_sums)}};
  return out;
}

}  // namespace formlab
