#include "formlab/optimize.hpp"

#include <cmath>
#include <memory>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "formlab/common.hpp"

namespace formlab {
namespace {

using Objective = std::function<double(const std::vector<double>&)>;

struct Context {
  const Objective* f;
  std::vector<double> scratch;
};

double trampoline(const gsl_vector* v, void* params) {
  auto* ctx = static_cast<Context*>(params);
  for (std::size_t i = 0; i < ctx->scratch.size(); ++i) ctx->scratch[i] = gsl_vector_get(v, i);
  try {
    const double y = (*ctx->f)(ctx->scratch);
    return std::isfinite(y) ? y : 1e300;
  } catch (const EvalError&) {
    return 1e300;
  }
}

struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

}  // namespace

MinimizeResult nelder_mead(const Objective& objective, std::vector<double> start, std::vector<double> step,
                           std::size_t max_iters, double size_tol) {
  gsl_set_error_handler_off();
  const std::size_t n = start.size();
  MinimizeResult out{start, 0.0, 0};
  Context ctx{&objective, std::vector<double>(n)};
  try {
    const double y0 = objective(start);
    out.value = std::isfinite(y0) ? y0 : 1e300;
  } catch (const EvalError&) {
    out.value = 1e300;
  }
  if (n == 0) return out;

  std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(n)), ss(gsl_vector_alloc(n));
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x.get(), i, start[i]);
    gsl_vector_set(ss.get(), i, step[i]);
  }
  gsl_multimin_function fn{&trampoline, n, &ctx};
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
  gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), ss.get());

  for (std::size_t it = 0; it < max_iters; ++it) {
    out.iterations = it + 1;
    if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), size_tol) == GSL_SUCCESS) break;
  }
  const double best = gsl_multimin_fminimizer_minimum(m.get());
  if (best < out.value) {
    out.value = best;
    const gsl_vector* bx = gsl_multimin_fminimizer_x(m.get());
    for (std::size_t i = 0; i < n; ++i) out.x[i] = gsl_vector_get(bx, i);
  }
  return out;
}

double golden_section_min(const std::function<double(double)>& f, double a, double b, std::size_t iters) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double best_x = a, best_v = f(a);
  auto consider = [&](double x, double v) {
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  };
  consider(b, f(b));
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  consider(c, fc);
  consider(d, fd);
  for (std::size_t i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
      consider(d, fd);
    }
  }
  return best_x;
}

}  // namespace formlab
