#pragma once

#include <memory>
#include <span>
#include <vector>

#include "mrt/sym_tensor.hpp"

namespace mrt {

/// Regular grid: per-axis sample counts, origin and positive spacing.
/// Flat point order is lexicographic with the first axis slowest.
struct GridGeometry {
  std::vector<int> dims;
  RVec origin;
  RVec spacing;

  int dim() const { return static_cast<int>(dims.size()); }
  std::size_t num_points() const;
  std::size_t flat(std::span<const int> idx) const;
  void unflat(std::size_t p, std::span<int> idx) const;
  double coord(int axis, int i) const { return origin[axis] + spacing[axis] * i; }
  void point(std::size_t p, std::span<double> x) const;
  double min_spacing() const;
  /// Physical bounding box [origin, origin + (dims-1)*spacing].
  double lo(int axis) const { return origin[axis]; }
  double hi(int axis) const { return origin[axis] + spacing[axis] * (dims[axis] - 1); }
  bool same_as(const GridGeometry& o, double tol = 1e-12) const;
  void validate() const;
};

GridGeometry make_grid(std::vector<int> dims, RVec origin, RVec spacing);

/// Grid-sampled symmetric tensor field.  Data is point-major with the
/// canonical multi-index fastest.  The tensor dimension normally equals the
/// grid dimension; reduced fields (indices restricted to a subrange) may
/// carry a smaller tensor dimension.
class GridField {
 public:
  GridField();  // single-point placeholder grid
  GridField(GridGeometry geom, int tensor_rank);
  GridField(GridGeometry geom, int tensor_rank, int tensor_dim);

  const GridGeometry& geom() const { return geom_; }
  int rank() const { return layout_->rank(); }
  int tensor_dim() const { return layout_->dim(); }
  const SymLayout& layout() const { return *layout_; }
  std::size_t num_components() const { return layout_->size(); }

  Complex& at(std::size_t pt, std::size_t comp) { return data_[pt * layout_->size() + comp]; }
  const Complex& at(std::size_t pt, std::size_t comp) const { return data_[pt * layout_->size() + comp]; }
  std::span<Complex> tensor_at(std::size_t pt) { return {data_.data() + pt * layout_->size(), layout_->size()}; }
  std::span<const Complex> tensor_at(std::size_t pt) const { return {data_.data() + pt * layout_->size(), layout_->size()}; }
  SymTensor tensor_copy(std::size_t pt) const;
  void set_tensor(std::size_t pt, const SymTensor& t);

  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

  /// Multilinear interpolation of all components at x; zero outside the box.
  void interpolate(std::span<const double> x, std::span<Complex> out) const;

  double max_abs() const;
  bool is_zero() const;

  /// Width (in cells) of the all-zero ring at the grid boundary.
  int zero_ring_width() const;

  /// Index bounding box of entries with |value| > tol_rel * max_abs().
  /// Returns false when the field is identically zero.
  bool support_box(std::span<int> lo, std::span<int> hi, double tol_rel = 0.0) const;
  /// Longest physical extent of the support box (0 for the zero field).
  double support_width() const;
  /// Product of the physical extents of the support box.
  double support_volume() const;

  GridField& operator+=(const GridField& o);
  GridField& operator-=(const GridField& o);
  GridField& operator*=(Complex s);

 private:
  GridGeometry geom_;
  std::shared_ptr<const SymLayout> layout_;
  CVec data_;
};

}  // namespace mrt
