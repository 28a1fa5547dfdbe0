#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "formlab/bilinear.hpp"
#include "formlab/forms.hpp"
#include "formlab/json_io.hpp"
#include "formlab/kernel_operator.hpp"
#include "formlab/parallel.hpp"
#include "formlab/semigroup.hpp"
#include "formlab/verify.hpp"
#include "formlab/version.hpp"

using namespace formlab;
using json_io::Json;

namespace {

enum Exit { kPass = 0, kViolated = 1, kInvalid = 2, kNumeric = 3 };

struct Common {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  std::string output;

  std::uint64_t resolved_seed() {
    if (!seed) seed = (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}();
    return *seed;
  }
};

Json envelope(const std::string& command, std::uint64_t seed, Json tolerances, Json anchors, bool pass,
              Json result) {
  return {{"command", command}, {"version", kVersion},     {"seed", seed},
          {"tolerances", std::move(tolerances)},            {"anchors", std::move(anchors)},
          {"verdict", pass ? "pass" : "violated"},          {"result", std::move(result)}};
}

void emit(const Json& report, const std::string& output) {
  const std::string text = report.dump(2);
  if (output.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream out(output);
    if (!out) throw InvalidInput("cannot write " + output);
    out << text << "\n";
  }
}

int verdict_code(bool pass) { return pass ? kPass : kViolated; }

KernelOperator load_operator(const std::string& path) { return parse_operator_json(json_io::read_file(path)); }

double parse_phi(const std::string& text, double p) {
  if (text == "auto") return phi_p(p);
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw InvalidInput("");
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("--phi must be 'auto' or a number of radians, got '" + text + "'");
  }
}

std::vector<int> parse_signs(const std::string& text) {
  if (text == "both") return {1, -1};
  if (text == "+1" || text == "1" || text == "plus") return {1};
  if (text == "-1" || text == "minus") return {-1};
  throw InvalidInput("--sign must be both, +1 or -1");
}

struct FamilyOptions {
  std::string family = "analyticity";
  double p = 3.0;
  std::string phi = "auto";
  std::string sign = "both";
  std::size_t d = 1;
  std::string pairs;

  void add(CLI::App* cmd) {
    cmd->add_option("--family", family, "analyticity or custom");
    cmd->add_option("--p", p, "exponent p > 1");
    cmd->add_option("--phi", phi, "angle in radians or 'auto' for the optimal angle");
    cmd->add_option("--sign", sign, "both, +1 or -1");
    cmd->add_option("--d", d, "number of variables of a custom family");
    cmd->add_option("--pairs", pairs, "F1:G1,F2:G2,... (DSL text or file paths)");
  }

  std::vector<FormFamily> families() const {
    if (family == "custom") {
      if (pairs.empty()) throw InvalidInput("--family custom needs --pairs");
      return {parse_family(d, pairs)};
    }
    if (family != "analyticity") throw InvalidInput("unknown family '" + family + "'");
    std::vector<FormFamily> out;
    for (int s : parse_signs(sign)) out.push_back(family_analyticity(p, parse_phi(phi, p), s));
    return out;
  }
};

void apply_grid_spec(SamplerSpec& s, const std::string& spec) {
  if (spec.empty()) return;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidInput("grid spec items look like key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    double v = 0.0;
    try {
      v = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw InvalidInput("bad number in grid spec item '" + item + "'");
    }
    auto count = [&] {
      if (!(v >= 0.0) || v != std::floor(v)) throw InvalidInput("'" + key + "' must be a nonnegative integer");
      return static_cast<std::size_t>(v);
    };
    if (key == "radial") s.radial = count();
    else if (key == "angular") s.angular = count();
    else if (key == "random") s.random_count = count();
    else if (key == "max_points") s.max_points = count();
    else if (key == "refine_starts") s.refine_starts = count();
    else if (key == "refine_iters") s.refine_iters = count();
    else if (key == "r_min") s.r_min = v;
    else if (key == "r_max") s.r_max = v;
    else if (key == "grid") s.use_grid = v != 0.0;
    else throw InvalidInput("unknown grid spec key '" + key + "'");
  }
  if (!(s.r_min > 0.0 && s.r_max > s.r_min)) throw InvalidInput("grid spec needs 0 < r_min < r_max");
}

Json complex_list(std::span<const cplx> v) {
  Json a = Json::array();
  for (const auto& z : v) a.push_back(json_io::complex_json(z));
  return a;
}

int cmd_validate(const std::string& path, Common& c) {
  const auto t = load_operator(path);
  const auto cls = classify(t);
  Json r = operator_class_json(cls);
  emit(envelope("validate", c.resolved_seed(), {{"classify", cls.tolerance}}, {"Kernel operator classes"}, true, r),
       c.output);
  return kPass;
}

int cmd_modulus(const std::string& path, Common& c) {
  const auto t = load_operator(path);
  const auto m = modulus(t);
  Json r = {{"operator", Json::parse(operator_to_json(m))},
            {"classification", operator_class_json(classify(m))},
            {"measure_check", modulus_measure_check(t, 1e-14)}};
  const bool ok = r["measure_check"].get<bool>();
  emit(envelope("modulus", c.resolved_seed(), {{"measure_check", 1e-14}}, {"Linear modulus of a kernel"}, ok, r),
       c.output);
  return verdict_code(ok);
}

int cmd_disintegrate(const std::string& path, const std::string& mode, double tol, bool allow, Common& c) {
  const auto t = load_operator(path);
  const auto d = disintegrate(t, disintegration_mode_from_string(mode), tol, allow);
  const std::uint64_t seed = c.resolved_seed();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double residual = 0.0;
  for (int k = 0; k < 20; ++k) {
    std::vector<cplx> fv(t.size()), gv(t.size());
    for (auto& x : fv) x = cplx(gauss(rng), gauss(rng));
    for (auto& x : gv) x = cplx(gauss(rng), gauss(rng));
    const CFunction f(t.space(), fv), g(t.space(), gv);
    const cplx direct = duality_pair(t.space(), linear_combination(1.0, f, -1.0, t.apply(f)), g);
    residual = std::max(residual, std::abs(direct - evaluate_disintegration(d, f, g)) / (1.0 + std::abs(direct)));
  }
  Json r = disintegration_json(d);
  r["residual"] = residual;
  const bool ok = residual <= 1e-10 + d.dropped_mass;
  emit(envelope("disintegrate", seed, {{"classify", tol}, {"residual", 1e-10}}, {"Thm Disintegration"}, ok, r),
       c.output);
  return verdict_code(ok);
}

// Normalized full-space form value: v / (1 + sum of the absolute products entering v).
double normalized_full_value(const FormFamily& fam, const KernelOperator& t, const std::vector<CFunction>& f) {
  const double v = full_form_value(fam, t, f);
  const std::size_t n = t.size();
  std::vector<std::vector<cplx>> fs(n), gs(n);
  std::vector<cplx> x(fam.d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < fam.d; ++k) x[k] = f[k][i];
    evaluate_family(fam, x, fs[i], gs[i]);
  }
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < fam.pairs.size(); ++j) {
      double tf = std::abs(fs[i][j]);
      for (std::size_t k = 0; k < n; ++k) tf += std::abs(t(i, k)) * std::abs(fs[k][j]);
      scale += t.space().weight(i) * tf * std::abs(gs[i][j]);
    }
  }
  return v / (1.0 + scale);
}

int cmd_check_form(const FamilyOptions& fo, const std::string& op_path, std::size_t samples, double tol, Common& c) {
  if (op_path.empty()) throw InvalidInput("check-form needs --operator");
  if (samples == 0) throw InvalidInput("--samples must be positive");
  const ReductionPlan plan(load_operator(op_path));
  const auto& t = plan.op();
  const std::uint64_t seed = c.resolved_seed();
  CheckReport best;
  best.min_value = std::numeric_limits<double>::infinity();
  best.seed = seed;
  best.tolerance = tol;
  bool crosscheck_ok = true;
  double identity_gap = 0.0;
  const auto families = fo.families();
  for (std::size_t fi = 0; fi < families.size(); ++fi) {
    const auto& fam = families[fi];
    std::mt19937_64 rng(seed + fi);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t s = 0; s < samples; ++s) {
      std::vector<CFunction> f;
      for (std::size_t k = 0; k < fam.d; ++k) {
        std::vector<cplx> v(t.size());
        for (auto& z : v) z = cplx(gauss(rng), gauss(rng));
        f.emplace_back(t.space(), std::move(v));
      }
      double value = 0.0;
      try {
        value = normalized_full_value(fam, t, f);
        const auto cc = plan.crosscheck(fam, f, tol);
        crosscheck_ok = crosscheck_ok && cc.ok;
        identity_gap = std::max(identity_gap, std::abs(cc.direct - cc.decomposed) / (1.0 + std::abs(cc.direct)));
      } catch (const EvalError&) {
        ++best.skipped;
        continue;
      }
      ++best.samples;
      if (value < best.min_value) {
        best.min_value = value;
        best.raw_value = full_form_value(fam, t, f);
        const int sign = fam.params.count("sign") ? static_cast<int>(fam.params.at("sign")) : 1;
        best.witness = FunctionWitness{0, seed + fi, sign, std::vector<cplx>(f[0].values().begin(), f[0].values().end())};
      }
    }
  }
  if (best.samples == 0) throw InvalidInput("every sample hit a singular point of the family");
  best.verdict = best.min_value < -tol ? Verdict::violated : Verdict::pass;
  if (best.verdict == Verdict::violated) best.note = "hypothesis fails for this family/angle";
  Json r = check_report_json(best);
  r["crosscheck_ok"] = crosscheck_ok;
  r["identity_gap"] = identity_gap;
  const bool ok = best.verdict == Verdict::pass && crosscheck_ok;
  emit(envelope("check-form", seed, {{"form", tol}}, {"Thm symmetric contraction semigroups"}, ok, r), c.output);
  return verdict_code(ok);
}

int cmd_check_z2(const FamilyOptions& fo, std::size_t lambda_grid, const std::string& grid_spec,
                 const std::string& mode, double tol, Common& c) {
  if (lambda_grid == 0) throw InvalidInput("--lambda-grid must be >= 1");
  SamplerSpec spec;
  apply_grid_spec(spec, grid_spec);
  spec.seed = c.resolved_seed();
  const auto cm = criterion_mode_from_string(mode);
  Json reports = Json::array();
  bool ok = true;
  for (const auto& fam : fo.families()) {
    const auto r = z2_criterion_check(fam, lambda_grid, spec, tol, cm);
    ok = ok && r.verdict == Verdict::pass;
    reports.push_back(check_report_json(r));
  }
  emit(envelope("check-z2", spec.seed, {{"criterion", tol}}, {"Z2 extreme-point criterion"}, ok,
                {{"mode", mode}, {"reports", reports}}),
       c.output);
  return verdict_code(ok);
}

std::vector<std::pair<double, double>> phi_sweep(double p, double lo, double hi, double step, std::size_t lambda_grid,
                                                 const SamplerSpec& spec) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && step > 0.0 && hi >= lo)) {
    throw InvalidInput("phi range needs finite min <= max and step > 0");
  }
  std::vector<std::pair<double, double>> rows;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t k = 0; k < count; ++k) {
    const double phi = lo + step * static_cast<double>(k);
    double m = std::numeric_limits<double>::infinity();
    for (int sign : {1, -1}) m = std::min(m, z2_criterion_check(family_analyticity(p, phi, sign), lambda_grid, spec, 1e-9).min_value);
    rows.emplace_back(phi, m);
  }
  return rows;
}

void write_csv(const std::string& path, const std::vector<std::pair<double, double>>& rows) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  out << "phi,min_value\n";
  for (const auto& [phi, m] : rows) out << format_double(phi) << "," << format_double(m) << "\n";
}

int cmd_angle(double p, const std::string& grid, const std::string& csv, double lo, double hi, double step,
              Common& c) {
  AngleSearchSpec spec;
  spec.seed = c.resolved_seed();
  if (!grid.empty()) {
    std::stringstream ss(grid);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw InvalidInput("--grid items look like key=value");
      const std::string key = item.substr(0, eq);
      const auto v = static_cast<std::size_t>(std::stoul(item.substr(eq + 1)));
      if (key == "radial") spec.radial = v;
      else if (key == "angular") spec.angular = v;
      else if (key == "refine_starts") spec.refine_starts = v;
      else if (key == "refine_iters") spec.refine_iters = v;
      else throw InvalidInput("unknown --grid key '" + key + "'");
    }
  }
  const auto r = scalar_angle(p, spec);
  Json res = angle_report_json(r);
  if (!csv.empty()) {
    SamplerSpec s;
    s.seed = spec.seed;
    write_csv(csv, phi_sweep(p, lo, hi, step, 360, s));
    res["csv"] = csv;
  }
  const bool ok = std::abs(r.gap) <= 1e-3;
  emit(envelope("angle", spec.seed, {{"gap", 1e-3}}, {"Optimal sector angle"}, ok, res), c.output);
  return verdict_code(ok);
}

int cmd_semigroup(const std::string& path, double t, const std::string& checks, Common& c) {
  const auto g = make_generator(load_operator(path));
  const std::uint64_t seed = c.resolved_seed();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cplx> v(g.space().size());
  for (auto& z : v) z = cplx(gauss(rng), gauss(rng));
  const CFunction f(g.space(), v);

  Json res = {{"t", t}};
  bool ok = true;
  std::stringstream ss(checks);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "resolvent") {
      const auto r = resolvent_check(g, f, 64, 1e-10);
      res["resolvent"] = {{"ok", r.ok}, {"error", r.error}};
      ok = ok && r.ok;
    } else if (item == "generator") {
      const std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
      const auto errs = generator_approx_check(g, f, eps);
      Json ratios = Json::array();
      bool in_range = true;
      for (std::size_t i = 1; i < errs.size(); ++i) {
        // A zero error (A f = 0 or A^2 f = 0) has no meaningful ratio.
        const double r = errs[i - 1] > 0.0 ? errs[i] / errs[i - 1] : 0.5;
        ratios.push_back(r);
        in_range = in_range && r >= 0.3 && r <= 0.7;
      }
      res["generator"] = {{"eps", eps}, {"errors", errs}, {"ratios", ratios}, {"ok", in_range}};
      ok = ok && in_range;
    } else if (item == "contraction") {
      const auto st = exp_semigroup(g, t);
      const double l1 = l1_norm(st), linf = linf_norm(st);
      const bool contr = l1 <= 1.0 + 1e-11 && linf <= 1.0 + 1e-11;
      res["contraction"] = {{"l1", l1}, {"linf", linf}, {"ok", contr}};
      ok = ok && contr;
    } else {
      throw InvalidInput("unknown semigroup check '" + item + "'");
    }
  }
  emit(envelope("semigroup", seed, {{"resolvent", 1e-10}, {"contraction", 1e-11}},
                {"Semigroup generated by Id - T"}, ok, res),
       c.output);
  return verdict_code(ok);
}

int cmd_verify(const std::string& scope, Common& c, bool timings) {
  VerifyOptions o;
  o.scope = scope;
  o.seed = c.seed.value_or(o.seed);
  const auto results = run_verify(o);
  std::cout << format_summary(results, o);
  if (timings) {
    for (const auto& r : results) std::cerr << r.id << " " << r.seconds << " s\n";
  }
  if (!c.output.empty()) {
    std::ofstream out(c.output);
    if (!out) throw InvalidInput("cannot write " + c.output);
    out << verify_json(results, o).dump(2) << "\n";
  }
  bool ok = true;
  for (const auto& r : results) ok = ok && r.passed;
  return verdict_code(ok);
}

int cmd_report_csv(double p, double lo, double hi, double step, std::size_t lambda_grid, const std::string& grid_spec,
                   Common& c) {
  SamplerSpec spec;
  apply_grid_spec(spec, grid_spec);
  spec.seed = c.resolved_seed();
  const auto rows = phi_sweep(p, lo, hi, step, lambda_grid, spec);
  if (c.output.empty()) {
    std::cout << "phi,min_value\n";
    for (const auto& [phi, m] : rows) std::cout << format_double(phi) << "," << format_double(m) << "\n";
  } else {
    write_csv(c.output, rows);
  }
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"formlab: finite-space checks for form inequalities of symmetric contraction semigroups"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", common.seed, "master seed (drawn from entropy and recorded when absent)");
    cmd->add_option("--threads", common.threads, "worker threads (default FORMLAB_THREADS or hardware)");
    cmd->add_option("-o,--output", common.output, "write the report here instead of stdout");
  };

  std::string path;
  auto* validate = app.add_subcommand("validate", "classify an operator file");
  validate->add_option("path", path, "operator JSON file")->required();
  add_common(validate);

  auto* mod = app.add_subcommand("modulus", "linear modulus of an operator file");
  mod->add_option("path", path, "operator JSON file")->required();
  add_common(mod);

  std::string mode = "general";
  double tol = kDefaultClassifyTolerance;
  bool allow = false;
  auto* dis = app.add_subcommand("disintegrate", "disintegration of a symmetric operator");
  dis->add_option("path", path, "operator JSON file")->required();
  dis->add_option("--mode", mode, "general, sub_markovian or markovian");
  dis->add_option("--tol", tol, "classification tolerance and mass cutoff");
  dis->add_flag("--allow-noncontractive", allow, "accept symmetric operators that are not contractions");
  add_common(dis);

  FamilyOptions fam;
  std::string op_path;
  std::size_t samples = 100;
  double form_tol = 1e-9;
  auto* cf = app.add_subcommand("check-form", "full-space form inequality over random functions");
  fam.add(cf);
  cf->add_option("--operator", op_path, "operator JSON file");
  cf->add_option("--samples", samples, "random functions per family");
  cf->add_option("--tol", form_tol, "tolerance");
  add_common(cf);

  std::size_t lambda_grid = 360;
  std::string grid_spec, crit_mode = "general";
  auto* cz = app.add_subcommand("check-z2", "two-point criterion for a form family");
  fam.add(cz);
  cz->add_option("--lambda-grid", lambda_grid, "equispaced points of the unit circle");
  cz->add_option("--grid-spec", grid_spec, "radial=,angular=,random=,r_min=,r_max=,max_points=,refine_starts=,...");
  cz->add_option("--mode", crit_mode, "general, sub_markovian or markovian");
  cz->add_option("--tol", form_tol, "tolerance");
  add_common(cz);

  double p = 3.0, lo = 1.0, hi = 1.4, step = 0.01;
  std::string angle_grid, csv;
  bool search = true;
  auto* an = app.add_subcommand("angle", "optimal sector angle by closed form and search");
  an->add_option("--p", p, "exponent p > 1");
  an->add_flag("--search", search, "run the numeric search (always on)");
  an->add_option("--grid", angle_grid, "radial=,angular=,refine_starts=,refine_iters=");
  an->add_option("--csv", csv, "also write phi,min_value rows of the two-point criterion");
  an->add_option("--phi-min", lo, "CSV sweep start");
  an->add_option("--phi-max", hi, "CSV sweep end");
  an->add_option("--step", step, "CSV sweep step");
  add_common(an);

  double t = 1.0;
  std::string checks = "resolvent,generator,contraction";
  auto* sg = app.add_subcommand("semigroup", "semigroup checks for Id - T");
  sg->add_option("--operator", op_path, "operator JSON file")->required();
  sg->add_option("--t", t, "time for the contraction check")->check(CLI::NonNegativeNumber);
  sg->add_option("--check", checks, "comma list of resolvent, generator, contraction");
  add_common(sg);

  std::string scope = "all";
  bool timings = false;
  auto* ver = app.add_subcommand("verify", "run every property suite");
  ver->add_option("--scope", scope, "all, space, operator, bilinear, forms or semigroup");
  ver->add_flag("--timings", timings, "print per-suite wall time to stderr");
  add_common(ver);

  auto* rc = app.add_subcommand("report-csv", "phi sweep of the two-point criterion as CSV");
  rc->add_option("--p", p, "exponent p > 1");
  rc->add_option("--phi-min", lo, "sweep start");
  rc->add_option("--phi-max", hi, "sweep end");
  rc->add_option("--step", step, "sweep step");
  rc->add_option("--lambda-grid", lambda_grid, "equispaced points of the unit circle");
  rc->add_option("--grid-spec", grid_spec, "sampler spec as for check-z2");
  add_common(rc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  set_thread_count(common.threads ? common.threads : default_thread_count());
  try {
    if (*validate) return cmd_validate(path, common);
    if (*mod) return cmd_modulus(path, common);
    if (*dis) return cmd_disintegrate(path, mode, tol, allow, common);
    if (*cf) return cmd_check_form(fam, op_path, samples, form_tol, common);
    if (*cz) return cmd_check_z2(fam, lambda_grid, grid_spec, crit_mode, form_tol, common);
    if (*an) return cmd_angle(p, angle_grid, csv, lo, hi, step, common);
    if (*sg) return cmd_semigroup(op_path, t, checks, common);
    if (*ver) return cmd_verify(scope, common, timings);
    if (*rc) return cmd_report_csv(p, lo, hi, step, lambda_grid, grid_spec, common);
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInvalid;
  } catch (const EvalError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInvalid;
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  }
  return kInvalid;
}
