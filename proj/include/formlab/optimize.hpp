#pragma once

#include <functional>
#include <vector>

namespace formlab {

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
};

/// Nelder-Mead simplex minimization (GSL nmsimplex2). step holds the initial
/// simplex size per coordinate. Non-finite objective values are treated as
/// +1e300 so the simplex retreats from singular points.
MinimizeResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                           std::vector<double> start, std::vector<double> step, std::size_t max_iters,
                           double size_tol = 1e-12);

/// Golden-section search for a minimum of a unimodal-ish function on [a, b].
/// Returns the best abscissa seen (including the bracket ends).
double golden_section_min(const std::function<double(double)>& f, double a, double b, std::size_t iters);

}  // namespace formlab
