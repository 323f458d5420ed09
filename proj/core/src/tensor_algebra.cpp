#include "mrt/tensor_algebra.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace mrt {

namespace {

std::size_t dense_index(std::span<const int> mi, int dim) {
  std::size_t p = 0;
  for (int v : mi) p = p * dim + static_cast<std::size_t>(v);
  return p;
}

std::size_t ipow(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

SymTensor symmetrize(std::span<const Complex> raw, int dim, int rank) {
  if (raw.size() != ipow(dim, rank)) throw std::invalid_argument("symmetrize: raw size must be dim^rank");
  SymTensor out(dim, rank);
  const SymLayout& layout = out.layout();
  std::vector<int> perm(rank);
  for (std::size_t p = 0; p < layout.size(); ++p) {
    perm = layout.index(p);
    Complex sum = 0;
    std::size_t count = 0;
    do {
      sum += raw[dense_index(perm, dim)];
      ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out[p] = sum / static_cast<double>(count);
  }
  return out;
}

SymTensor sym_product(const SymTensor& f, const SymTensor& g) {
  if (f.dim() != g.dim()) throw std::invalid_argument("sym_product: dimension mismatch");
  const int m = f.rank();
  const int k = g.rank();
  SymTensor out(f.dim(), m + k);
  const SymLayout& layout = out.layout();
  // sigma(f (x) g)(I) = (m! k! / (m+k)!) sum over m-subsets S of positions
  // of f(I|_S) g(I|_Sc); f and g symmetric makes the subset sum exact.
  const double weight = static_cast<double>(binomial(m + k, m));
  std::array<int, 16> sel{}, fi{}, gi{};
  for (int i = 0; i < m; ++i) sel[i] = 1;
  for (int i = m; i < m + k; ++i) sel[i] = 0;
  // enumerate subsets via permutations of the selector mask
  std::vector<int> mask(sel.begin(), sel.begin() + m + k);
  std::sort(mask.begin(), mask.end());
  for (std::size_t p = 0; p < layout.size(); ++p) {
    const std::vector<int>& I = layout.index(p);
    Complex sum = 0;
    std::vector<int> msk = mask;
    do {
      int a = 0, b = 0;
      for (int t = 0; t < m + k; ++t) {
        if (msk[t]) fi[a++] = I[t];
        else gi[b++] = I[t];
      }
      sum += f.at(std::span<const int>(fi.data(), m)) * g.at(std::span<const int>(gi.data(), k));
    } while (std::next_permutation(msk.begin(), msk.end()));
    out[p] = sum / weight;
  }
  return out;
}

SymTensor i_delta(const SymTensor& f) { return sym_product(f, SymTensor::delta(f.dim())); }

namespace {

template <typename Scalar>
Complex eval_power_impl(const SymTensor& f, std::span<const Scalar> w) {
  if (w.size() != static_cast<std::size_t>(f.dim())) throw std::invalid_argument("eval_power: dimension mismatch");
  const SymLayout& layout = f.layout();
  Complex sum = 0;
  for (std::size_t p = 0; p < layout.size(); ++p) {
    Complex prod = layout.multiplicity(p);
    for (int v : layout.index(p)) prod *= w[v];
    sum += prod * f[p];
  }
  return sum;
}

}  // namespace

Complex eval_power(const SymTensor& f, std::span<const Complex> w) { return eval_power_impl<Complex>(f, w); }

Complex eval_power(const SymTensor& f, std::span<const double> w) { return eval_power_impl<double>(f, w); }

IsotropyProjection isotropy_project(const SymTensor& f) {
  if (f.rank() < 2) throw std::invalid_argument("isotropy_project: rank must be >= 2");
  const int n = f.dim();
  const int m = f.rank();
  auto gen_layout = SymLayout::get(n, m - 2);
  const SymLayout& out_layout = f.layout();
  const std::size_t rows = out_layout.size();
  const std::size_t cols = gen_layout->size();

  // Columns are the images i_delta(e_J) of the canonical generator basis,
  // rows weighted by sqrt(multiplicity) so the Euclidean norm is Frobenius.
  Eigen::MatrixXcd A(rows, cols);
  Eigen::VectorXcd b(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    SymTensor basis(n, m - 2);
    basis[c] = 1.0;
    SymTensor img = i_delta(basis);
    for (std::size_t r = 0; r < rows; ++r) A(r, c) = std::sqrt(out_layout.multiplicity(r)) * img[r];
  }
  for (std::size_t r = 0; r < rows; ++r) b(r) = std::sqrt(out_layout.multiplicity(r)) * f[r];

  // Normal equations; the basis is tiny and well conditioned at desk scale.
  Eigen::MatrixXcd gram = A.adjoint() * A;
  Eigen::VectorXcd rhs = A.adjoint() * b;
  Eigen::VectorXcd x = gram.ldlt().solve(rhs);

  SymTensor v(n, m - 2);
  for (std::size_t c = 0; c < cols; ++c) v[c] = x(c);
  SymTensor diff = f - i_delta(v);
  return IsotropyProjection{std::move(v), diff.frobenius_norm()};
}

}  // namespace mrt
