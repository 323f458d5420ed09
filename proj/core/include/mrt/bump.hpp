#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "mrt/grid_field.hpp"

namespace mrt {

/// C_c^infinity profile exp(-(t-c)^2/(2 sigma^2) + b - b/(1 - u^2)),
/// u = (t-c)/radius, identically zero for |t-c| >= radius.  The Gaussian
/// factor (sigma > 0) concentrates the spectral mass; sigma <= 0 drops it
/// and leaves the plain mollifier.
struct BumpProfile {
  double center = 0.0;
  double sigma = 0.0;
  double radius = 1.0;
  double steep = 1.0;  // b

  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;
  double d3(double t) const;
  double derivative(double t, int order) const;  // order 0..3
};

/// Product of per-axis profiles times a complex amplitude.
struct SeparableBump {
  std::vector<BumpProfile> axes;
  Complex amplitude{1.0, 0.0};

  double shape(std::span<const double> x) const;  // product of profiles
  Complex value(std::span<const double> x) const;
  /// d/dx_a of the profile product (closed form).
  double shape_partial(std::span<const double> x, int axis) const;
};

/// Scalar bump sampled on a grid.
GridField sample_scalar_bump(const GridGeometry& geom, const SeparableBump& bump);

/// Rank-m field with one independent complex coefficient per canonical
/// component, all sharing the bump shape.
GridField sample_tensor_bump(const GridGeometry& geom, int rank, const SeparableBump& bump, std::span<const Complex> coeffs);

/// Random coefficients in the unit disc, via the supplied generator.
GridField random_tensor_bump(const GridGeometry& geom, int rank, const SeparableBump& bump, std::mt19937_64& rng);

/// Exact symmetized-gradient field d v of a rank-(m-1) bump field with
/// per-component coefficients: (dv)_I = (1/m) sum_j d_{I_j} v_{I \ j}.
/// Sampled analytically, not by grid differencing.
GridField analytic_inner_derivative_bump(const GridGeometry& geom, int rank_out, const SeparableBump& bump, std::span<const Complex> coeffs);

/// Pointwise i_delta applied to a sampled generator field.
GridField planted_isotropic_field(const GridField& generator);

/// Centered bump that fits the geometry with the given cell margin.
SeparableBump default_bump(const GridGeometry& geom, int margin_cells = 4);

}  // namespace mrt
