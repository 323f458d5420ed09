#pragma once

#include <span>

#include "mrt/sym_tensor.hpp"

namespace mrt {

/// Symmetrization of a dense rank-m array (n^m entries, first index slowest).
/// The output component at I is the average of the input over all
/// permutations of I; symmetric inputs are fixed points.
SymTensor symmetrize(std::span<const Complex> raw, int dim, int rank);

/// Symmetrized tensor product f (.) g of ranks m and k; commutative.
SymTensor sym_product(const SymTensor& f, const SymTensor& g);

/// f -> sigma(f (x) delta), raising the rank by two.
SymTensor i_delta(const SymTensor& f);

/// Full contraction <f, w^m> = sum f_{i1..im} w_{i1}...w_{im}.
Complex eval_power(const SymTensor& f, std::span<const Complex> w);
Complex eval_power(const SymTensor& f, std::span<const double> w);

struct IsotropyProjection {
  SymTensor generator;  // rank m-2 minimizer v
  double residual;      // || f - i_delta(v) ||_F at the minimum
};

/// Least-squares projection onto the range of i_delta.  The residual is zero
/// exactly when f is partially isotropic.
IsotropyProjection isotropy_project(const SymTensor& f);

}  // namespace mrt
