#include "mrt/grid_field.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace mrt {

std::size_t GridGeometry::num_points() const {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

std::size_t GridGeometry::flat(std::span<const int> idx) const {
  std::size_t p = 0;
  for (int a = 0; a < dim(); ++a) p = p * dims[a] + static_cast<std::size_t>(idx[a]);
  return p;
}

void GridGeometry::unflat(std::size_t p, std::span<int> idx) const {
  for (int a = dim() - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(p % dims[a]);
    p /= dims[a];
  }
}

void GridGeometry::point(std::size_t p, std::span<double> x) const {
  std::array<int, kMaxDim> idx;
  unflat(p, std::span<int>(idx.data(), dim()));
  for (int a = 0; a < dim(); ++a) x[a] = coord(a, idx[a]);
}

double GridGeometry::min_spacing() const { return *std::min_element(spacing.begin(), spacing.end()); }

bool GridGeometry::same_as(const GridGeometry& o, double tol) const {
  if (dims != o.dims) return false;
  for (int a = 0; a < dim(); ++a) {
    if (std::abs(origin[a] - o.origin[a]) > tol) return false;
    if (std::abs(spacing[a] - o.spacing[a]) > tol) return false;
  }
  return true;
}

void GridGeometry::validate() const {
  if (dims.empty() || dims.size() > kMaxDim) throw std::invalid_argument("grid dimension out of range");
  if (origin.size() != dims.size() || spacing.size() != dims.size())
    throw std::invalid_argument("grid origin/spacing size mismatch");
  for (std::size_t a = 0; a < dims.size(); ++a) {
    if (dims[a] < 1) throw std::invalid_argument("grid axis needs at least one sample");
    if (!(spacing[a] > 0)) throw std::invalid_argument("grid spacing must be positive");
  }
}

GridGeometry make_grid(std::vector<int> dims, RVec origin, RVec spacing) {
  GridGeometry g{std::move(dims), std::move(origin), std::move(spacing)};
  g.validate();
  return g;
}

GridField::GridField() : GridField(make_grid({1}, {0.0}, {1.0}), 0) {}

GridField::GridField(GridGeometry geom, int tensor_rank) : GridField(std::move(geom), tensor_rank, 0) {}

GridField::GridField(GridGeometry geom, int tensor_rank, int tensor_dim) : geom_(std::move(geom)) {
  geom_.validate();
  const int td = tensor_dim > 0 ? tensor_dim : geom_.dim();
  layout_ = SymLayout::get(td, tensor_rank);
  data_.assign(geom_.num_points() * layout_->size(), Complex{0.0, 0.0});
}

SymTensor GridField::tensor_copy(std::size_t pt) const {
  SymTensor t(tensor_dim(), rank());
  auto src = tensor_at(pt);
  std::copy(src.begin(), src.end(), t.components().begin());
  return t;
}

void GridField::set_tensor(std::size_t pt, const SymTensor& t) {
  if (t.dim() != tensor_dim() || t.rank() != rank()) throw std::invalid_argument("set_tensor: shape mismatch");
  auto dst = tensor_at(pt);
  std::copy(t.components().begin(), t.components().end(), dst.begin());
}

void GridField::interpolate(std::span<const double> x, std::span<Complex> out) const {
  const int n = geom_.dim();
  std::fill(out.begin(), out.end(), Complex{0.0, 0.0});
  std::array<int, kMaxDim> base;
  std::array<double, kMaxDim> frac;
  for (int a = 0; a < n; ++a) {
    const double u = (x[a] - geom_.origin[a]) / geom_.spacing[a];
    if (u < 0.0 || u > geom_.dims[a] - 1) return;  // outside: compactly supported
    int i = static_cast<int>(std::floor(u));
    if (i >= geom_.dims[a] - 1) i = geom_.dims[a] - 2;  // clamp for u == last node
    if (geom_.dims[a] == 1) {
      base[a] = 0;
      frac[a] = 0.0;
    } else {
      base[a] = i;
      frac[a] = u - i;
    }
  }
  const std::size_t ncomp = layout_->size();
  const int corners = 1 << n;
  std::array<int, kMaxDim> idx;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    bool skip = false;
    for (int a = 0; a < n; ++a) {
      const int bit = (c >> a) & 1;
      if (geom_.dims[a] == 1 && bit) {
        skip = true;
        break;
      }
      w *= bit ? frac[a] : (1.0 - frac[a]);
      idx[a] = base[a] + bit;
    }
    if (skip || w == 0.0) continue;
    const Complex* src = data_.data() + geom_.flat(std::span<const int>(idx.data(), n)) * ncomp;
    for (std::size_t k = 0; k < ncomp; ++k) out[k] += w * src[k];
  }
}

double GridField::max_abs() const {
  double s = 0;
  for (const Complex& c : data_) s = std::max(s, std::abs(c));
  return s;
}

bool GridField::is_zero() const {
  for (const Complex& c : data_)
    if (c != Complex{0.0, 0.0}) return false;
  return true;
}

int GridField::zero_ring_width() const {
  const int n = geom_.dim();
  std::array<int, kMaxDim> lo, hi;
  if (!support_box(std::span<int>(lo.data(), n), std::span<int>(hi.data(), n))) {
    return *std::min_element(geom_.dims.begin(), geom_.dims.end());
  }
  int ring = std::numeric_limits<int>::max();
  for (int a = 0; a < n; ++a) {
    ring = std::min(ring, lo[a]);
    ring = std::min(ring, geom_.dims[a] - 1 - hi[a]);
  }
  return ring;
}

bool GridField::support_box(std::span<int> lo, std::span<int> hi, double tol_rel) const {
  const int n = geom_.dim();
  const double tol = tol_rel > 0 ? tol_rel * max_abs() : 0.0;
  for (int a = 0; a < n; ++a) {
    lo[a] = geom_.dims[a];
    hi[a] = -1;
  }
  const std::size_t ncomp = layout_->size();
  std::array<int, kMaxDim> idx;
  bool any = false;
  for (std::size_t p = 0; p < geom_.num_points(); ++p) {
    const Complex* t = data_.data() + p * ncomp;
    bool nz = false;
    for (std::size_t k = 0; k < ncomp; ++k) {
      if (std::abs(t[k]) > tol) {
        nz = true;
        break;
      }
    }
    if (!nz) continue;
    any = true;
    geom_.unflat(p, std::span<int>(idx.data(), n));
    for (int a = 0; a < n; ++a) {
      lo[a] = std::min(lo[a], idx[a]);
      hi[a] = std::max(hi[a], idx[a]);
    }
  }
  return any;
}

double GridField::support_width() const {
  const int n = geom_.dim();
  std::array<int, kMaxDim> lo, hi;
  if (!support_box(std::span<int>(lo.data(), n), std::span<int>(hi.data(), n))) return 0.0;
  double w = 0.0;
  for (int a = 0; a < n; ++a) w = std::max(w, std::max(1, hi[a] - lo[a]) * geom_.spacing[a]);
  return w;
}

double GridField::support_volume() const {
  const int n = geom_.dim();
  std::array<int, kMaxDim> lo, hi;
  if (!support_box(std::span<int>(lo.data(), n), std::span<int>(hi.data(), n))) return 0.0;
  double v = 1.0;
  for (int a = 0; a < n; ++a) v *= std::max(1, hi[a] - lo[a]) * geom_.spacing[a];
  return v;
}

GridField& GridField::operator+=(const GridField& o) {
  if (!geom_.same_as(o.geom_) || o.rank() != rank() || o.tensor_dim() != tensor_dim())
    throw std::invalid_argument("GridField shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

GridField& GridField::operator-=(const GridField& o) {
  if (!geom_.same_as(o.geom_) || o.rank() != rank() || o.tensor_dim() != tensor_dim())
    throw std::invalid_argument("GridField shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

GridField& GridField::operator*=(Complex s) {
  for (Complex& c : data_) c *= s;
  return *this;
}

}  // namespace mrt
