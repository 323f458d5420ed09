#pragma once

#include "mrt/grid_field.hpp"

namespace mrt {

/// Second-order central difference along one axis, zero beyond the grid
/// (fields are compactly supported, so zero padding is the exact extension).
GridField central_difference(const GridField& f, int axis);

/// Symmetrized gradient d = sigma(grad): rank m-1 -> rank m.
/// (dv)_I = (1/m) sum_j D_{I_j} v_{I w/o j} with central differences.
GridField inner_derivative(const GridField& v);

/// Pointwise i_delta lift of a field, rank m -> m+2.
GridField pointwise_i_delta(const GridField& f);

/// Saint Venant image: values over S^m (x) S^m, i.e. pairs of canonical
/// rank-m indices per grid point.  The output is blockwise symmetric only
/// (for m = 1 it is the antisymmetric curl), so it does not embed in a
/// fully symmetric rank-2m field.
class SaintVenantField {
 public:
  SaintVenantField(GridGeometry geom, int rank, int tensor_dim);

  const GridGeometry& geom() const { return geom_; }
  int rank() const { return layout_->rank(); }
  std::size_t block_size() const { return layout_->size(); }
  const SymLayout& layout() const { return *layout_; }

  Complex& at(std::size_t pt, std::size_t a, std::size_t b) {
    return data_[(pt * layout_->size() + a) * layout_->size() + b];
  }
  const Complex& at(std::size_t pt, std::size_t a, std::size_t b) const {
    return data_[(pt * layout_->size() + a) * layout_->size() + b];
  }
  double max_abs() const;
  std::span<const Complex> data() const { return data_; }
  std::span<Complex> data() { return data_; }

 private:
  GridGeometry geom_;
  std::shared_ptr<const SymLayout> layout_;
  CVec data_;
};

/// The Saint Venant operator W applied with m-th order composed central
/// differences.  Requires dims >= 2m+5 per axis.
SaintVenantField saint_venant(const GridField& u);

/// sup norm of W(u) without materializing the field.
double saint_venant_max_abs(const GridField& u);

/// Evaluate all W(u) block components at a single grid point.
void saint_venant_point(const GridField& u, std::span<const int> idx, std::span<Complex> out);

}  // namespace mrt
