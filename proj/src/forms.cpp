#include "formlab/forms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>

#include "formlab/optimize.hpp"
#include "formlab/parallel.hpp"

namespace formlab {

FormFamily make_family(std::size_t d, std::vector<FormPair> pairs, std::string name,
                       std::map<std::string, double> params) {
  if (d == 0) throw InvalidInput("form family needs d >= 1");
  if (pairs.empty()) throw InvalidInput("form family needs at least one (F, G) pair");
  for (const auto& p : pairs) {
    if (p.f.arity() > d || p.g.arity() > d) throw InvalidInput("expression uses more than d variables");
  }
  return FormFamily{d, std::move(pairs), std::move(name), std::move(params)};
}

FormFamily family_analyticity(double p, double phi, int sign) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidInput("analyticity family needs finite p > 1");
  if (sign != 1 && sign != -1) throw InvalidInput("sign must be +1 or -1");
  const Expr x = Expr::variable(1);
  const Expr g = Expr::binary(Expr::Kind::mul,
                              Expr::binary(Expr::Kind::mul, Expr::phase(sign * phi), Expr::unary(Expr::Kind::conj, x)),
                              Expr::power(x, p - 2.0, true));
  return make_family(1, {{x, g}}, "analyticity", {{"p", p}, {"phi", phi}, {"sign", sign}});
}

namespace {

// Splits on `sep` outside parentheses.
std::vector<std::string> split_top_level(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string expression_source(const std::string& item) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(item, ec)) return json_io::read_file(item);
  return item;
}

}  // namespace

FormFamily parse_family(std::size_t d, const std::string& pairs_spec) {
  std::vector<FormPair> pairs;
  for (const auto& item : split_top_level(pairs_spec, ',')) {
    const auto parts = split_top_level(item, ':');
    if (parts.size() != 2) throw InvalidInput("pair '" + item + "' must look like F:G");
    pairs.push_back({parse_expr(expression_source(parts[0]), d), parse_expr(expression_source(parts[1]), d)});
  }
  return make_family(d, std::move(pairs));
}

void evaluate_family(const FormFamily& family, std::span<const cplx> x, std::vector<cplx>& fs,
                     std::vector<cplx>& gs) {
  fs.resize(family.pairs.size());
  gs.resize(family.pairs.size());
  for (std::size_t j = 0; j < family.pairs.size(); ++j) {
    fs[j] = eval_expr(family.pairs[j].f, x);
    gs[j] = eval_expr(family.pairs[j].g, x);
  }
}

double scalar_form(const FormFamily& family, std::span<const cplx> x) {
  std::vector<cplx> fs, gs;
  evaluate_family(family, x, fs, gs);
  double s = 0.0;
  for (std::size_t j = 0; j < fs.size(); ++j) s += (fs[j] * gs[j]).real();
  return s;
}

double normalized_scalar_value(const FormFamily& family, std::span<const cplx> x) {
  std::vector<cplx> fs, gs;
  evaluate_family(family, x, fs, gs);
  double s = 0.0, scale = 0.0;
  for (std::size_t j = 0; j < fs.size(); ++j) {
    s += (fs[j] * gs[j]).real();
    scale += std::abs(fs[j]) * std::abs(gs[j]);
  }
  return s / (1.0 + scale);
}

std::vector<std::vector<cplx>> sample_points(const SamplerSpec& spec, std::size_t d) {
  if (d == 0) throw InvalidInput("sampling needs d >= 1");
  if (!(spec.r_min > 0.0) || !(spec.r_max >= spec.r_min)) throw InvalidInput("sampler radii must satisfy 0 < r_min <= r_max");
  std::mt19937_64 rng(spec.seed);
  std::vector<std::vector<cplx>> out;

  if (spec.use_grid) {
    std::vector<cplx> coord{cplx(0.0, 0.0)};
    for (std::size_t r = 0; r < spec.radial; ++r) {
      const double t = spec.radial == 1 ? 0.0 : static_cast<double>(r) / static_cast<double>(spec.radial - 1);
      const double radius = spec.r_min * std::pow(spec.r_max / spec.r_min, t);
      for (std::size_t a = 0; a < spec.angular; ++a) {
        coord.push_back(std::polar(radius, 2.0 * std::numbers::pi * static_cast<double>(a) /
                                               static_cast<double>(std::max<std::size_t>(spec.angular, 1))));
      }
    }
    double total = 1.0;
    for (std::size_t k = 0; k < d; ++k) total *= static_cast<double>(coord.size());
    if (total <= static_cast<double>(spec.max_points)) {
      std::vector<std::size_t> idx(d, 0);
      for (;;) {
        std::vector<cplx> pt(d);
        for (std::size_t k = 0; k < d; ++k) pt[k] = coord[idx[k]];
        out.push_back(std::move(pt));
        std::size_t k = 0;
        while (k < d && ++idx[k] == coord.size()) idx[k++] = 0;
        if (k == d) break;
      }
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, coord.size() - 1);
      for (std::size_t s = 0; s < spec.max_points; ++s) {
        std::vector<cplx> pt(d);
        for (auto& c : pt) c = coord[pick(rng)];
        out.push_back(std::move(pt));
      }
    }
  }

  std::uniform_real_distribution<double> logr(std::log(spec.r_min), std::log(spec.r_max));
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  for (std::size_t s = 0; s < spec.random_count; ++s) {
    std::vector<cplx> pt(d);
    for (auto& c : pt) c = std::polar(std::exp(logr(rng)), ang(rng));
    out.push_back(std::move(pt));
  }
  return out;
}

std::string to_string(Verdict v) { return v == Verdict::pass ? "pass" : "violated"; }

namespace {

std::vector<double> pack(std::span<const cplx> a) {
  std::vector<double> out;
  for (cplx c : a) {
    out.push_back(c.real());
    out.push_back(c.imag());
  }
  return out;
}

std::vector<cplx> unpack(const std::vector<double>& v, std::size_t offset, std::size_t d) {
  std::vector<cplx> out(d);
  for (std::size_t k = 0; k < d; ++k) out[k] = {v[offset + 2 * k], v[offset + 2 * k + 1]};
  return out;
}

std::vector<double> steps_for(std::span<const cplx> a, double rel) {
  std::vector<double> out;
  for (cplx c : a) {
    const double s = rel * std::abs(c) + 1e-6;
    out.push_back(s);
    out.push_back(s);
  }
  return out;
}

void finish(CheckReport& r) {
  r.verdict = r.min_value < -r.tolerance ? Verdict::violated : Verdict::pass;
  r.note = r.verdict == Verdict::pass ? "no sampled violation" : "hypothesis fails for this family/angle";
}

// Sample with precomputed F_j, G_j values.
struct Evaluated {
  std::vector<cplx> x;
  std::vector<cplx> fs, gs;
};

std::vector<Evaluated> evaluate_points(const FormFamily& family, const std::vector<std::vector<cplx>>& pts,
                                       std::size_t& skipped) {
  std::vector<Evaluated> out;
  out.reserve(pts.size());
  for (const auto& x : pts) {
    Evaluated e{x, {}, {}};
    try {
      evaluate_family(family, x, e.fs, e.gs);
    } catch (const EvalError&) {
      ++skipped;
      continue;
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

CheckReport scalar_check(const FormFamily& family, const SamplerSpec& sampler, double tol) {
  CheckReport r;
  r.seed = sampler.seed;
  r.tolerance = tol;
  const auto pts = evaluate_points(family, sample_points(sampler, family.d), r.skipped);
  if (pts.empty()) throw InvalidInput("every sample point failed to evaluate");

  std::vector<double> vals(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    double s = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < pts[k].fs.size(); ++j) {
      s += (pts[k].fs[j] * pts[k].gs[j]).real();
      scale += std::abs(pts[k].fs[j]) * std::abs(pts[k].gs[j]);
    }
    vals[k] = s / (1.0 + scale);
  }
  r.samples = pts.size();

  std::vector<std::size_t> order(pts.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });

  std::vector<cplx> best_x = pts[order[0]].x;
  double best = vals[order[0]];
  const std::size_t d = family.d;
  for (std::size_t s = 0; s < std::min(sampler.refine_starts, order.size()); ++s) {
    const auto& start = pts[order[s]].x;
    auto objective = [&](const std::vector<double>& v) {
      return normalized_scalar_value(family, unpack(v, 0, d));
    };
    const auto res = nelder_mead(objective, pack(start), steps_for(start, 0.1), sampler.refine_iters);
    r.samples += res.iterations;
    if (res.value < best) {
      best = res.value;
      best_x = unpack(res.x, 0, d);
    }
  }
  r.witness = ScalarWitness{best_x};
  r.min_value = normalized_scalar_value(family, best_x);
  r.raw_value = scalar_form(family, best_x);
  finish(r);
  return r;
}

double z2_operator_form_value(const FormFamily& family, const KernelOperator& t, std::span<const cplx> z,
                              std::span<const cplx> w) {
  const FiniteMeasureSpace z2 = z2_space();
  if (!(t.space() == z2)) throw InvalidInput("Z2 block needs an operator on Z2");
  std::vector<cplx> fz, gz, fw, gw;
  evaluate_family(family, z, fz, gz);
  evaluate_family(family, w, fw, gw);
  const KernelOperator a = KernelOperator::identity(z2) - t;
  double value = 0.0;
  for (std::size_t j = 0; j < fz.size(); ++j) {
    const CFunction f(z2, {fz[j], fw[j]});
    const CFunction g(z2, {gz[j], gw[j]});
    value += duality_pair(z2, a.apply(f), g).real();
  }
  return value;
}

double z2_form_value(const FormFamily& family, cplx lambda, std::span<const cplx> z, std::span<const cplx> w) {
  return z2_operator_form_value(family, e_lambda(lambda), z, w);
}

double z2_zero_operator_value(const FormFamily& family, std::span<const cplx> z, std::span<const cplx> w) {
  return z2_operator_form_value(family, KernelOperator::zero(z2_space()), z, w);
}

namespace {

double z2_scale(const std::vector<cplx>& fz, const std::vector<cplx>& gz, const std::vector<cplx>& fw,
                const std::vector<cplx>& gw) {
  double scale = 0.0;
  for (std::size_t j = 0; j < fz.size(); ++j) {
    scale += 0.5 * (std::abs(fz[j]) + std::abs(fw[j])) * (std::abs(gz[j]) + std::abs(gw[j]));
  }
  return scale;
}

}  // namespace

double normalized_z2_value(const FormFamily& family, cplx lambda, std::span<const cplx> z,
                           std::span<const cplx> w) {
  std::vector<cplx> fz, gz, fw, gw;
  evaluate_family(family, z, fz, gz);
  evaluate_family(family, w, fw, gw);
  return z2_form_value(family, lambda, z, w) / (1.0 + z2_scale(fz, gz, fw, gw));
}

std::string to_string(CriterionMode m) {
  switch (m) {
    case CriterionMode::general: return "general";
    case CriterionMode::sub_markovian: return "sub_markovian";
    case CriterionMode::markovian: return "markovian";
  }
  return "general";
}

CriterionMode criterion_mode_from_string(const std::string& s) {
  if (s == "general") return CriterionMode::general;
  if (s == "sub_markovian") return CriterionMode::sub_markovian;
  if (s == "markovian") return CriterionMode::markovian;
  throw InvalidInput("unknown criterion mode '" + s + "'");
}

CheckReport z2_criterion_check(const FormFamily& family, std::size_t lambda_count, const SamplerSpec& sampler,
                               double tol, CriterionMode mode) {
  if (lambda_count == 0) throw InvalidInput("lambda_count must be >= 1");
  CheckReport r;
  r.seed = sampler.seed;
  r.tolerance = tol;
  const auto pts = evaluate_points(family, sample_points(sampler, family.d), r.skipped);
  if (pts.empty()) throw InvalidInput("every sample point failed to evaluate");

  const bool sweep_lambda = mode == CriterionMode::general;
  const std::size_t n_lambda = sweep_lambda ? lambda_count : 1;
  const double dtheta = 2.0 * std::numbers::pi / static_cast<double>(n_lambda);
  std::vector<KernelOperator> blocks;
  blocks.reserve(n_lambda);
  const FiniteMeasureSpace z2 = z2_space();
  for (std::size_t k = 0; k < n_lambda; ++k) {
    blocks.push_back(KernelOperator::identity(z2) - e_lambda(std::polar(1.0, dtheta * static_cast<double>(k))));
  }

  // Exhaustive sweep; one slot per first point, reduced in index order.
  struct Best {
    double value = std::numeric_limits<double>::infinity();
    std::size_t b = 0, k = 0;
  };
  std::vector<Best> best(pts.size());
  const std::size_t m = family.pairs.size();
  parallel_for(pts.size(), [&](std::size_t a) {
    std::array<cplx, 2> fv{}, gv{}, av{};
    Best local;
    for (std::size_t b = 0; b < pts.size(); ++b) {
      const double scale = z2_scale(pts[a].fs, pts[a].gs, pts[b].fs, pts[b].gs);
      for (std::size_t k = 0; k < n_lambda; ++k) {
        double v = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          fv = {pts[a].fs[j], pts[b].fs[j]};
          gv = {pts[a].gs[j], pts[b].gs[j]};
          blocks[k].apply_into(fv, av);
          v += z2.pair(av, gv).real();
        }
        const double nv = v / (1.0 + scale);
        if (nv < local.value) local = {nv, b, k};
      }
    }
    best[a] = local;
  });
  r.samples = pts.size() * pts.size() * n_lambda;

  std::vector<std::size_t> order(pts.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return best[a].value < best[b].value; });

  const std::size_t d = family.d;
  Z2Witness wit{std::polar(1.0, dtheta * static_cast<double>(best[order[0]].k)), pts[order[0]].x,
                pts[best[order[0]].b].x};
  double wit_value = normalized_z2_value(family, wit.lambda, wit.z, wit.w);

  for (std::size_t s = 0; s < std::min(sampler.refine_starts, order.size()); ++s) {
    const auto& cand = best[order[s]];
    const auto& z0 = pts[order[s]].x;
    const auto& w0 = pts[cand.b].x;
    double theta = dtheta * static_cast<double>(cand.k);
    if (sweep_lambda) {
      theta = golden_section_min(
          [&](double th) {
            try {
              return normalized_z2_value(family, std::polar(1.0, th), z0, w0);
            } catch (const EvalError&) {
              return 1e300;
            }
          },
          theta - dtheta, theta + dtheta, 40);
    }
    std::vector<double> x0, step;
    if (sweep_lambda) {
      x0.push_back(theta);
      step.push_back(dtheta / 2.0);
    }
    const double rel = 0.05;
    for (double v : pack(z0)) x0.push_back(v);
    for (double v : steps_for(z0, rel)) step.push_back(v);
    for (double v : pack(w0)) x0.push_back(v);
    for (double v : steps_for(w0, rel)) step.push_back(v);
    const std::size_t off = sweep_lambda ? 1 : 0;
    auto decode = [&](const std::vector<double>& v) {
      return Z2Witness{sweep_lambda ? std::polar(1.0, v[0]) : cplx(1.0, 0.0), unpack(v, off, d), unpack(v, off + 2 * d, d)};
    };
    auto objective = [&](const std::vector<double>& v) {
      const auto c = decode(v);
      return normalized_z2_value(family, c.lambda, c.z, c.w);
    };
    const auto res = nelder_mead(objective, x0, step, sampler.refine_iters);
    r.samples += res.iterations;
    const auto c = decode(res.x);
    double cv;
    try {
      cv = normalized_z2_value(family, c.lambda, c.z, c.w);
    } catch (const EvalError&) {
      continue;
    }
    if (cv < wit_value) {
      wit = c;
      wit_value = cv;
    }
  }

  r.witness = wit;
  r.min_value = wit_value;
  r.raw_value = z2_form_value(family, wit.lambda, wit.z, wit.w);

  if (mode == CriterionMode::sub_markovian) {
    const CheckReport sc = scalar_check(family, sampler, tol);
    r.samples += sc.samples;
    r.skipped += sc.skipped;
    if (sc.min_value < r.min_value) {
      r.min_value = sc.min_value;
      r.raw_value = sc.raw_value;
      r.witness = sc.witness;
    }
  }
  finish(r);
  return r;
}

double reevaluate(const FormFamily& family, const CheckReport& report) {
  if (const auto* s = std::get_if<ScalarWitness>(&report.witness)) return normalized_scalar_value(family, s->x);
  if (const auto* z = std::get_if<Z2Witness>(&report.witness)) return normalized_z2_value(family, z->lambda, z->z, z->w);
  throw InvalidInput("function witnesses are re-evaluated by the semigroup module");
}

double full_form_value(const FormFamily& family, const KernelOperator& t, const std::vector<CFunction>& f) {
  if (f.size() != family.d) throw InvalidInput("need exactly d functions");
  const auto& sp = t.space();
  for (const auto& fi : f) {
    if (!(fi.space() == sp)) throw InvalidInput("functions must live on the operator's space");
  }
  const std::size_t n = sp.size(), m = family.pairs.size();
  std::vector<std::vector<cplx>> fv(m, std::vector<cplx>(n)), gv(m, std::vector<cplx>(n));
  std::vector<cplx> x(family.d), fs, gs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < family.d; ++k) x[k] = f[k][i];
    evaluate_family(family, x, fs, gs);
    for (std::size_t j = 0; j < m; ++j) {
      fv[j][i] = fs[j];
      gv[j][i] = gs[j];
    }
  }
  const KernelOperator a = KernelOperator::identity(sp) - t;
  double value = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    value += duality_pair(sp, a.apply(CFunction(sp, fv[j])), CFunction(sp, gv[j])).real();
  }
  return value;
}

ReductionPlan::ReductionPlan(const KernelOperator& t)
    : t_(t), dis_(disintegrate(t, DisintegrationMode::general)) {
  blocks_.reserve(dis_.pairs.size());
  const FiniteMeasureSpace z2 = z2_space();
  for (const auto& p : dis_.pairs) blocks_.push_back(KernelOperator::identity(z2) - e_lambda(p.phase));
}

ReductionCrosscheck ReductionPlan::crosscheck(const FormFamily& family, const std::vector<CFunction>& f,
                                              double tol) const {
  ReductionCrosscheck out;
  out.direct = full_form_value(family, t_, f);
  const std::size_t n = t_.size(), m = family.pairs.size();
  std::vector<std::vector<cplx>> fs(n), gs(n);
  std::vector<cplx> x(family.d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < family.d; ++k) x[k] = f[k][i];
    evaluate_family(family, x, fs[i], gs[i]);
  }

  double magnitude = 0.0;
  std::vector<double> terms;
  terms.reserve(n + dis_.pairs.size());
  out.scalar_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += (fs[i][j] * gs[i][j]).real();
    const double v = dis_.diagonal[i] * s;
    terms.push_back(v);
    magnitude += std::abs(v);
    out.scalar_min = std::min(out.scalar_min, v);
  }
  // Same arithmetic as z2_form_value: apply the block on Z2, then pair.
  const FiniteMeasureSpace z2 = z2_space();
  std::array<cplx, 2> fv{}, gv{}, av{};
  out.z2_min = dis_.pairs.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < dis_.pairs.size(); ++k) {
    const auto& p = dis_.pairs[k];
    double block = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      fv = {fs[p.x][j], fs[p.y][j]};
      gv = {gs[p.x][j], gs[p.y][j]};
      blocks_[k].apply_into(fv, av);
      block += z2.pair(av, gv).real();
    }
    terms.push_back(p.mass * block);
    magnitude += std::abs(p.mass * block);
    out.z2_min = std::min(out.z2_min, block);
  }
  out.decomposed = pairwise_sum(terms);
  out.identity_ok = std::abs(out.direct - out.decomposed) <= tol * (1.0 + std::abs(out.direct));
  const bool premise = out.z2_min >= -tol && out.scalar_min >= -tol;
  out.ok = out.identity_ok && (!premise || out.direct >= -tol * (1.0 + magnitude));
  return out;
}

ReductionCrosscheck reduction_crosscheck(const FormFamily& family, const KernelOperator& t,
                                         const std::vector<CFunction>& f, double tol) {
  if (f.size() != family.d) throw InvalidInput("need exactly d functions");
  return ReductionPlan(t).crosscheck(family, f, tol);
}

json_io::Json witness_json(const Witness& w) {
  using json_io::complex_json;
  json_io::Json out;
  auto list = [](const std::vector<cplx>& v) {
    auto a = json_io::Json::array();
    for (cplx c : v) a.push_back(complex_json(c));
    return a;
  };
  if (const auto* s = std::get_if<ScalarWitness>(&w)) {
    out["kind"] = "scalar";
    out["x"] = list(s->x);
  } else if (const auto* z = std::get_if<Z2Witness>(&w)) {
    out["kind"] = "z2";
    out["lambda"] = complex_json(z->lambda);
    out["z"] = list(z->z);
    out["w"] = list(z->w);
  } else {
    const auto& f = std::get<FunctionWitness>(w);
    out["kind"] = "function";
    out["operator_seed"] = f.operator_seed;
    out["function_seed"] = f.function_seed;
    out["sign"] = f.sign;
    out["f"] = list(f.f);
  }
  return out;
}

json_io::Json check_report_json(const CheckReport& r) {
  return {{"min_value", r.min_value}, {"raw_value", r.raw_value}, {"witness", witness_json(r.witness)},
          {"samples", r.samples},     {"skipped", r.skipped},     {"seed", r.seed},
          {"tolerance", r.tolerance}, {"verdict", to_string(r.verdict)}, {"note", r.note}};
}

}  // namespace formlab
