#include "mrt/sym_tensor.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <mutex>
#include <stdexcept>

namespace mrt {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Complex cdot(std::span<const Complex> a, std::span<const Complex> b) {
  Complex s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

std::uint64_t index_multiplicity(std::span<const int> mi) {
  std::array<int, kMaxDim> counts{};
  for (int v : mi) {
    if (v < 0 || v >= kMaxDim) throw std::invalid_argument("multi-index entry out of range");
    ++counts[v];
  }
  auto factorial = [](int k) {
    std::uint64_t f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  std::uint64_t num = factorial(static_cast<int>(mi.size()));
  for (int c : counts) num /= factorial(c);
  return num;
}

SymLayout::SymLayout(int dim, int rank) : dim_(dim), rank_(rank) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("SymLayout: dimension out of range");
  if (rank < 0 || rank > 16) throw std::invalid_argument("SymLayout: rank out of range");
  std::vector<int> idx(rank, 0);
  while (true) {
    indices_.push_back(idx);
    multiplicity_.push_back(static_cast<double>(index_multiplicity(idx)));
    int j = rank - 1;
    while (j >= 0 && idx[j] == dim - 1) --j;
    if (j < 0) break;
    int v = idx[j] + 1;
    for (int t = j; t < rank; ++t) idx[t] = v;
  }
  if (rank == 0) {
    // loop above already inserted the single empty index once
    indices_.resize(1);
    multiplicity_.resize(1);
  }
}

std::shared_ptr<const SymLayout> SymLayout::get(int dim, int rank) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const SymLayout>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(dim, rank);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto layout = std::shared_ptr<const SymLayout>(new SymLayout(dim, rank));
  cache[key] = layout;
  return layout;
}

std::size_t SymLayout::position(std::span<const int> mi) const {
  std::array<int, 16> buf;
  if (mi.size() != static_cast<std::size_t>(rank_)) throw std::invalid_argument("multi-index rank mismatch");
  std::copy(mi.begin(), mi.end(), buf.begin());
  std::sort(buf.begin(), buf.begin() + rank_);
  return position_sorted(std::span<const int>(buf.data(), rank_));
}

std::size_t SymLayout::position_sorted(std::span<const int> t) const {
  // Combinatorial rank of a nondecreasing tuple in lexicographic order.
  std::size_t r = 0;
  int prev = 0;
  const int m = rank_;
  for (int j = 0; j < m; ++j) {
    if (t[j] < prev || t[j] >= dim_) throw std::invalid_argument("multi-index entry out of range");
    for (int v = prev; v < t[j]; ++v) r += binomial(dim_ - v + m - j - 2, m - j - 1);
    prev = t[j];
  }
  return r;
}

SymTensor::SymTensor(int dim, int rank) : layout_(SymLayout::get(dim, rank)), comp_(layout_->size(), Complex{0.0, 0.0}) {}

SymTensor SymTensor::delta(int dim) {
  SymTensor d(dim, 2);
  for (int i = 0; i < dim; ++i) {
    const int mi[2] = {i, i};
    d.set(mi, Complex{1.0, 0.0});
  }
  return d;
}

Complex SymTensor::at(std::span<const int> mi) const { return comp_[layout_->position(mi)]; }

void SymTensor::set(std::span<const int> mi, Complex value) { comp_[layout_->position(mi)] = value; }

double SymTensor::frobenius_norm() const {
  double s = 0;
  for (std::size_t p = 0; p < comp_.size(); ++p) s += layout_->multiplicity(p) * std::norm(comp_[p]);
  return std::sqrt(s);
}

double SymTensor::max_abs() const {
  double s = 0;
  for (const Complex& c : comp_) s = std::max(s, std::abs(c));
  return s;
}

SymTensor& SymTensor::operator+=(const SymTensor& o) {
  if (o.dim() != dim() || o.rank() != rank()) throw std::invalid_argument("SymTensor shape mismatch");
  for (std::size_t i = 0; i < comp_.size(); ++i) comp_[i] += o.comp_[i];
  return *this;
}

SymTensor& SymTensor::operator-=(const SymTensor& o) {
  if (o.dim() != dim() || o.rank() != rank()) throw std::invalid_argument("SymTensor shape mismatch");
  for (std::size_t i = 0; i < comp_.size(); ++i) comp_[i] -= o.comp_[i];
  return *this;
}

SymTensor& SymTensor::operator*=(Complex s) {
  for (Complex& c : comp_) c *= s;
  return *this;
}

}  // namespace mrt
