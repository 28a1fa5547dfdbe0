#pragma once

#include <string>
#include <vector>

#include "formlab/kernel_operator.hpp"

namespace formlab {

/// Complex masses m(x, y) on the product of source and target spaces with
///   sum_i mu_i (Tf)_i g_i = sum_{x,y} m(x, y) f(x) g(y).
/// Under the kernel convention this is m(x = j, y = i) = mu_i t_ij.
struct RepresentingMeasure {
  FiniteMeasureSpace source;
  FiniteMeasureSpace target;
  CMatrix masses;  // indexed (source point x, target point y)
};

/// Builds mu_T and checks the defining identity on a fixed random probe.
RepresentingMeasure representing_measure(const KernelOperator& t);

/// sum_{x,y} m(x, y) f(x) g(y). Kept independent of KernelOperator::apply so
/// the two evaluation routes cross-check each other.
cplx measure_pairing(const RepresentingMeasure& m, const CFunction& f, const CFunction& g);

/// |mu_T| = mu_{|T|} entrywise within tol.
bool modulus_measure_check(const KernelOperator& t, double tol);

struct HolderCheck {
  bool ok = false;
  cplx via_operator;
  cplx via_measure;
};

/// <Tf, g> against the measure sum for f in L^p, g in L^q. On a finite space
/// both sides are finite for every p; p only has to lie in [1, inf].
HolderCheck holder_extension_check(const KernelOperator& t, double p, const CFunction& f,
                                   const CFunction& g, double tol);

struct GrothendieckCheck {
  double lhs = 0.0;  // int max_j |T f_j|
  double rhs = 0.0;  // ||T||_{1->1} int max_j |f_j|
  bool ok = false;
};

/// Throws InvalidInput for an empty family or a function on another space.
GrothendieckCheck grothendieck_sup_check(const KernelOperator& t, const std::vector<CFunction>& fs,
                                         double tol);

/// Polar split of the representing measure: m = |m| * phase, phase := 1
/// where m vanishes.
struct PhaseField {
  Eigen::MatrixXd masses;
  CMatrix phases;
};

PhaseField phase_field(const KernelOperator& t);

enum class DisintegrationMode { general, sub_markovian, markovian };
std::string to_string(DisintegrationMode m);
DisintegrationMode disintegration_mode_from_string(const std::string& s);

struct PairTerm {
  std::size_t x = 0;
  std::size_t y = 0;
  double mass = 0.0;  // mu_{|T|} mass at (x, y)
  cplx phase{1.0, 0.0};
};

/// Right-hand side of the disintegration of <(Id - T)f, g>:
/// a diagonal multiplication part d_i = mu_i (1 - (|T|1)_i) plus one Z2 block
/// Id - E_{lambda(x,y)} per positive-mass cell, weighted by that mass.
/// Every cell is stored separately, including the diagonal x = y and both
/// (x, y) and (y, x).
struct Disintegration {
  FiniteMeasureSpace space;
  std::vector<double> diagonal;
  std::vector<PairTerm> pairs;
  DisintegrationMode mode = DisintegrationMode::general;
  double dropped_mass = 0.0;  // total mass of cells at or below the cutoff
  std::vector<std::string> warnings;
};

/// Requires T symmetric within tol. General mode also requires a
/// Dunford-Schwartz T unless allow_noncontractive is set (then a warning is
/// recorded); sub_markovian and markovian modes require that class.
Disintegration disintegrate(const KernelOperator& t, DisintegrationMode mode,
                            double tol = kDefaultClassifyTolerance, bool allow_noncontractive = false);

/// sum_i d_i f_i g_i + sum_pairs mass * 1/2 [(f(x) - conj(l) f(y)) g(x) + (f(y) - l f(x)) g(y)].
/// Pair contributions are summed pairwise in storage order. Cells dropped by
/// the cutoff change the result by at most dropped_mass * max block value.
cplx evaluate_disintegration(const Disintegration& d, const CFunction& f, const CFunction& g);

json_io::Json disintegration_json(const Disintegration& d);

}  // namespace formlab
