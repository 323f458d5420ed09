#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mrt/grid_field.hpp"

namespace mrt {

/// Real unit vector orthogonal to e1; encodes the null direction e1 + i eta.
struct ComplexDirection {
  RVec eta;
  double theta = 0.0;  // atan2(eta_3, eta_2) when n == 3, else sample index
};

ComplexDirection make_direction(RVec eta);

/// Deterministic ring of directions (0, cos theta, sin theta), n = 3.
std::vector<ComplexDirection> eta_circle(int count);

/// Null vector w = e1 + i eta.
CVec null_vector(const ComplexDirection& dir);

/// Moment of the slice x1 = 0: 1-D quadrature over x2 of
/// x2^k <f(0, x2, x''), (e1 + i eta)^m>, multilinear interpolation on the
/// slice.  Errors when k exceeds the tensor rank.
Complex complex_moment(const GridField& f, int k, const ComplexDirection& dir, std::span<const double> xpp);

/// Reduced slice fields f~^p with indices restricted to axes 2..n:
/// f~^p_{i1..ip} = C(m,p) f_{i1..ip 1..1}; the returned rank-p fields carry
/// tensor dimension n-1.  Reconstruction: sum_p i^p <f~^p, eta^p> equals
/// <f, (e1+i eta)^m> pointwise.
std::vector<GridField> binomial_reduce(const GridField& f);

/// Evaluate the binomial-reduced family against a direction at one point.
Complex binomial_eval(std::span<const GridField> family, const ComplexDirection& dir, std::size_t pt);

struct MomentRow {
  int k;
  double eta_theta;
  RVec xpp;
  double lambda;
  Complex value;
};

/// Values of complex-direction moments keyed by (k, eta, x'', lambda).
struct MomentTable {
  std::vector<MomentRow> rows;
  void write_csv(std::ostream& os) const;
  void write_csv(const std::string& path) const;
  double max_abs() const;
};

enum class VerdictKind { zero, partially_isotropic, nonzero };

const char* to_string(VerdictKind k);

struct Verdict {
  VerdictKind kind;
  double max_moment = 0.0;
  MomentRow argmax{};             // offending entry when kind == nonzero
  double scale = 0.0;             // ||f||_inf * support width
  std::optional<GridField> witness;  // rank m-2 slice generator (m >= 2)
  double witness_residual = 0.0;     // max pointwise projection residual
  MomentTable table;
};

/// Decide zero / partially isotropic / nonzero from vanishing moments over
/// the given directions, k = 0..m and all slice points x''.  Requires at
/// least 2m+2 distinct directions.  Thresholds scale with
/// ||f||_inf * support width so the verdict is invariant under rescaling.
Verdict injectivity_verdict(const GridField& f, std::span<const ComplexDirection> dirs, double tol);

/// Restriction of f to the hyperplane x1 = 0 (single-plane grid along axis 1).
GridField slice_x1_zero(const GridField& f);

}  // namespace mrt
