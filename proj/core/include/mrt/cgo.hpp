#pragma once

#include <optional>
#include <utility>

#include "mrt/bump.hpp"
#include "mrt/grid_field.hpp"

namespace mrt {

/// Semiclassical phase data: phi(x) = mu2.x, psi(x) = (h xi/2 + s mu1).x
/// with s = sqrt(1 - h^2|xi|^2/4), and the null vectors
/// zeta1 = i h xi/2 + i s mu1 + mu2, zeta2 = -i h xi/2 + i s mu1 - mu2.
struct PhaseBundle {
  double h = 0.0;
  RVec xi, mu1, mu2;
  double s = 1.0;
  RVec psi_grad;  // h xi/2 + s mu1; grad phi is mu2
  CVec zeta1, zeta2;

  int dim() const { return static_cast<int>(mu1.size()); }
  double phi(std::span<const double> x) const { return dot(mu2, x); }
  double psi(std::span<const double> x) const { return dot(psi_grad, x); }
  /// grad(phi + i psi)
  CVec phase_grad() const;
  /// xi_{+/-} = (xi', +/- (2/h) s mu1_n)
  RVec xi_plus() const;
  RVec xi_minus() const;
};

/// Validates the orthogonality constraints and h|xi| < 2; error messages
/// name the violated constraint.
PhaseBundle build_phases(RVec mu1, RVec mu2, RVec xi, double h);

/// The four exponential products of the reflection identity, as exponents
/// (log-space: overflow-free even when mu2_n != 0).  Each is computed from
/// the zeta combination and from the closed form on the right-hand side.
struct ExpProducts {
  // e^{x.z1/h} e^{x.conj(z2)/h}            = e^{i x.xi}
  Complex pair_exp, pair_closed;
  // e^{x.z1/h} e^{x*.conj(z2)/h}           = e^{i x.xi_+ + 2 mu2_n x_n/h}
  Complex cross_ab_exp, cross_ab_closed;
  // e^{x*.z1/h} e^{x.conj(z2)/h}           = e^{i x.xi_- - 2 mu2_n x_n/h}
  Complex cross_ba_exp, cross_ba_closed;
  // e^{x*.z1/h} e^{x*.conj(z2)/h}          = e^{i x*.xi}
  Complex starred_exp, starred_closed;
};

ExpProducts exp_products(const PhaseBundle& b, std::span<const double> x);

/// x* = (x', -x_n).
RVec reflect_point(std::span<const double> x);

/// Even/odd extension of a coefficient tensor field across {x_n = 0}: the
/// component with p indices equal to n picks up (-1)^p at the mirrored
/// point.  The input grid must start at the interface (origin_n = 0) and
/// the support must stay at least two cells above it.
GridField reflect_extend(const GridField& a);

/// Restriction of an extended field back to the upper half grid.
GridField restrict_upper_half(const GridField& extended);

/// Orthonormal frame (u1, eta, transverse...) carrying the complex
/// coordinate z = y1 + i y2 of the transport plane.
struct RotatedFrame {
  std::vector<RVec> basis;  // basis[0] = u1, basis[1] = eta

  int dim() const { return static_cast<int>(basis.size()); }
  static RotatedFrame from_eta(std::span<const double> eta);  // u1 = e1, n = 3
  static RotatedFrame from_basis(std::vector<RVec> basis);

  double y1(std::span<const double> x) const { return dot(basis[0], x); }
  double y2(std::span<const double> x) const { return dot(basis[1], x); }
  Complex z(std::span<const double> x) const { return Complex{y1(x), y2(x)}; }
  double ypp(std::span<const double> x, int r) const { return dot(basis[2 + r], x); }
};

/// Closed-form amplitude coeff * (z - zbar)^power * e^{-i lambda z} * g(y''_1)
/// carried with its frame; solves dzbar^m = 0 whenever power <= m-1.
struct Amplitude {
  RotatedFrame frame;
  Complex coeff{1.0, 0.0};
  int power = 0;
  double lambda = 0.0;
  std::optional<BumpProfile> g;  // transverse profile on y''_1; empty = 1

  Complex value(std::span<const double> x) const;
  /// Exact dzbar derivative (drops the power by one).
  Amplitude dbar() const;
  /// Exact mixed partial d^|axes| / dx_{axes}; profile derivatives cap the
  /// transverse order at three.
  Complex partial(std::span<const double> x, std::span<const int> axes) const;
  /// Evaluate on a grid.
  GridField sample(const GridGeometry& geom) const;
};

/// a0 = (z-zbar)^l and the conjugate amplitude b0bar = (z-zbar)^k e^{-i
/// lambda z} g(y''); both annihilated by dzbar^m (requires l, k <= m-1).
std::pair<Amplitude, Amplitude> amplitude_family(int m, int l, int k, double lambda,
                                                 std::optional<BumpProfile> g, const RotatedFrame& frame);

struct AmplitudeTerm {
  Complex c;
  int pw;
  int gd;
};

/// Point-independent expansion of every mixed partial of an amplitude up to
/// a given order; term lists are built once so grid sweeps stay cheap.
class AmplitudePartials {
 public:
  AmplitudePartials(Amplitude a, int max_order);
  const Amplitude& amplitude() const { return amp_; }
  int max_order() const { return static_cast<int>(layouts_.size()) - 1; }
  std::shared_ptr<const SymLayout> order_layout(int order) const { return layouts_[order]; }
  /// d^alpha a at x, alpha being the multiset at `pos` of order_layout(order).
  Complex eval(std::span<const double> x, int order, std::size_t pos) const;

 private:
  Amplitude amp_;
  std::vector<std::shared_ptr<const SymLayout>> layouts_;
  std::vector<std::vector<std::vector<AmplitudeTerm>>> terms_;  // [order][pos]
};

/// Transport operator T = 2 grad(phi + i psi) . grad (affine phases, so the
/// Laplacian term vanishes) applied by central differences.
GridField transport_apply(const PhaseBundle& b, const GridField& f);
/// h -> 0 frame form T = 2 (u1 + i u2) . grad = 4 dzbar on grid fields...
GridField transport_apply(const RotatedFrame& frame, const GridField& f);
/// ...and exactly on closed-form amplitudes.
Amplitude transport_apply(const RotatedFrame& frame, const Amplitude& a);
/// Exact finite-h transport of a closed-form amplitude.
Complex transport_apply_at(const PhaseBundle& b, const Amplitude& a, std::span<const double> x);

/// Conjugation factor product applied to an amplitude at a point:
/// prod_k ((1/h) D_{i_k}(phi + i psi) + D_{i_k}) a, with D = (1/i) d.
Complex conjugation_apply(const PhaseBundle& b, std::span<const int> multi_index, const Amplitude& a,
                          std::span<const double> x);

/// Grid version: factors applied by central differences.
GridField conjugation_apply(const PhaseBundle& b, std::span<const int> multi_index, const GridField& amp);

}  // namespace mrt
