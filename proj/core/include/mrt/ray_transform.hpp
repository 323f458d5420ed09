#pragma once

#include <string>
#include <vector>

#include "mrt/grid_field.hpp"

namespace mrt {

struct Ray {
  RVec base;
  RVec dir;  // nonzero; unit length required only for restricted moments
};

/// Longitudinal ray transform I f = integral of <f(x+t xi), xi^m> dt.
/// Composite trapezoid with spatial step <= min_spacing/2 and multilinear
/// interpolation; rays missing the grid box integrate to zero.
Complex ray_transform(const GridField& f, const Ray& ray);

/// Momentum transform I^k with weight t^k; t = 0 sits at the ray base point.
Complex momentum_transform(const GridField& f, const Ray& ray, int k);

/// J^k: the momentum transform restricted to unit directions.
Complex restricted_moment(const GridField& f, const Ray& ray, int k);

/// F = sum of components of ranks 0..m on a shared grid.
struct TensorPolyField {
  std::vector<GridField> comps;  // comps[p] has rank p
  void validate() const;
};

/// I^{m,k} F = sum_p I^k f^(p).
Complex poly_moment(const TensorPolyField& F, const Ray& ray, int k);

struct RayBatchEntry {
  Ray ray;
  int k = 0;
};

/// Ray batch CSV: columns x1..xn, xi1..xin, k; results append re, im.
std::vector<RayBatchEntry> read_ray_batch(const std::string& path, int dim);
void write_ray_batch_results(const std::string& path, std::span<const RayBatchEntry> batch, std::span<const Complex> values);

}  // namespace mrt
