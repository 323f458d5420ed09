#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mrt/types.hpp"

namespace mrt {

/// Canonical storage layout for symmetric rank-m tensors in dimension n.
///
/// Components are indexed by nondecreasing multi-indices (0-based axes),
/// enumerated lexicographically; there are C(n+m-1, m) of them.  Each
/// canonical index carries the number of distinct permutations of its
/// entries, so that full contractions can be taken over canonical storage
/// alone.
class SymLayout {
 public:
  static std::shared_ptr<const SymLayout> get(int dim, int rank);

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  std::size_t size() const { return indices_.size(); }

  const std::vector<int>& index(std::size_t pos) const { return indices_[pos]; }
  double multiplicity(std::size_t pos) const { return multiplicity_[pos]; }

  /// Canonical position of an arbitrary (unsorted) multi-index.
  std::size_t position(std::span<const int> multi_index) const;

  /// Position of an already nondecreasing multi-index.
  std::size_t position_sorted(std::span<const int> sorted) const;

 private:
  SymLayout(int dim, int rank);
  int dim_;
  int rank_;
  std::vector<std::vector<int>> indices_;
  std::vector<double> multiplicity_;
};

std::uint64_t binomial(int n, int k);

/// Number of distinct permutations of a multi-index: m! / prod(rep_count!).
std::uint64_t index_multiplicity(std::span<const int> multi_index);

/// Dense complex symmetric tensor with canonical multi-index storage.
class SymTensor {
 public:
  SymTensor() : SymTensor(2, 0) {}
  SymTensor(int dim, int rank);

  static SymTensor delta(int dim);

  int dim() const { return layout_->dim(); }
  int rank() const { return layout_->rank(); }
  std::size_t size() const { return comp_.size(); }
  const SymLayout& layout() const { return *layout_; }

  Complex& operator[](std::size_t pos) { return comp_[pos]; }
  const Complex& operator[](std::size_t pos) const { return comp_[pos]; }

  /// Component at any permutation of a multi-index (0-based axes).
  Complex at(std::span<const int> multi_index) const;
  void set(std::span<const int> multi_index, Complex value);

  std::span<Complex> components() { return comp_; }
  std::span<const Complex> components() const { return comp_; }

  /// Frobenius norm of the underlying dense tensor (multiplicity weighted).
  double frobenius_norm() const;
  double max_abs() const;

  SymTensor& operator+=(const SymTensor& o);
  SymTensor& operator-=(const SymTensor& o);
  SymTensor& operator*=(Complex s);
  friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
  friend SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
  friend SymTensor operator*(Complex s, SymTensor a) { return a *= s; }

 private:
  std::shared_ptr<const SymLayout> layout_;
  CVec comp_;
};

}  // namespace mrt
