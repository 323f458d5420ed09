#include "mrt/cgo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "mrt/field_ops.hpp"

namespace mrt {

namespace {

Complex cdot_rx(std::span<const double> x, std::span<const Complex> z) {
  Complex s = 0;
  for (std::size_t a = 0; a < x.size(); ++a) s += x[a] * z[a];
  return s;
}

}  // namespace

CVec PhaseBundle::phase_grad() const {
  CVec g(mu1.size());
  for (std::size_t a = 0; a < g.size(); ++a) g[a] = Complex{mu2[a], psi_grad[a]};
  return g;
}

RVec PhaseBundle::xi_plus() const {
  RVec v = xi;
  v[v.size() - 1] = 2.0 / h * s * mu1[mu1.size() - 1];
  return v;
}

RVec PhaseBundle::xi_minus() const {
  RVec v = xi;
  v[v.size() - 1] = -2.0 / h * s * mu1[mu1.size() - 1];
  return v;
}

PhaseBundle build_phases(RVec mu1, RVec mu2, RVec xi, double h) {
  const std::size_t n = mu1.size();
  if (mu2.size() != n || xi.size() != n) throw std::invalid_argument("build_phases: dimension mismatch");
  if (n < 2 || n > kMaxDim) throw std::invalid_argument("build_phases: dimension out of range");
  if (!(h > 0)) throw std::invalid_argument("build_phases: h must be positive");
  constexpr double tol = 1e-12;
  if (std::abs(norm2(mu1) - 1.0) > tol) throw std::invalid_argument("build_phases: mu1 must be a unit vector");
  if (std::abs(norm2(mu2) - 1.0) > tol) throw std::invalid_argument("build_phases: mu2 must be a unit vector");
  if (std::abs(dot(mu1, mu2)) > tol) throw std::invalid_argument("build_phases: mu1 and mu2 must be orthogonal");
  if (std::abs(dot(xi, mu1)) > tol) throw std::invalid_argument("build_phases: xi must be orthogonal to mu1");
  if (std::abs(dot(xi, mu2)) > tol) throw std::invalid_argument("build_phases: xi must be orthogonal to mu2");
  const double hxi = h * norm2(xi);
  if (hxi >= 2.0) throw std::invalid_argument("build_phases: h|xi| must be < 2");

  PhaseBundle b;
  b.h = h;
  b.s = std::sqrt(1.0 - hxi * hxi / 4.0);
  b.xi = std::move(xi);
  b.mu1 = std::move(mu1);
  b.mu2 = std::move(mu2);
  b.psi_grad.resize(n);
  b.zeta1.resize(n);
  b.zeta2.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    b.psi_grad[a] = 0.5 * h * b.xi[a] + b.s * b.mu1[a];
    b.zeta1[a] = Complex{b.mu2[a], 0.5 * h * b.xi[a] + b.s * b.mu1[a]};
    b.zeta2[a] = Complex{-b.mu2[a], -0.5 * h * b.xi[a] + b.s * b.mu1[a]};
  }
  return b;
}

ExpProducts exp_products(const PhaseBundle& b, std::span<const double> x) {
  const std::size_t n = b.mu1.size();
  if (x.size() != n) throw std::invalid_argument("exp_products: point dimension mismatch");
  RVec xs = reflect_point(x);
  CVec z2c(n);
  for (std::size_t a = 0; a < n; ++a) z2c[a] = std::conj(b.zeta2[a]);

  ExpProducts p;
  const double inv_h = 1.0 / b.h;
  p.pair_exp = (cdot_rx(x, b.zeta1) + cdot_rx(x, z2c)) * inv_h;
  p.cross_ab_exp = (cdot_rx(x, b.zeta1) + cdot_rx(xs, z2c)) * inv_h;
  p.cross_ba_exp = (cdot_rx(xs, b.zeta1) + cdot_rx(x, z2c)) * inv_h;
  p.starred_exp = (cdot_rx(xs, b.zeta1) + cdot_rx(xs, z2c)) * inv_h;

  const double mu2n = b.mu2[n - 1];
  const double xn = x[n - 1];
  p.pair_closed = kI * dot(x, b.xi);
  p.cross_ab_closed = kI * dot(x, b.xi_plus()) + 2.0 * mu2n * xn * inv_h;
  p.cross_ba_closed = kI * dot(x, b.xi_minus()) - 2.0 * mu2n * xn * inv_h;
  p.starred_closed = kI * dot(xs, b.xi);
  return p;
}

RVec reflect_point(std::span<const double> x) {
  RVec xs(x.begin(), x.end());
  xs.back() = -xs.back();
  return xs;
}

GridField reflect_extend(const GridField& a) {
  const GridGeometry& g = a.geom();
  const int n = g.dim();
  if (a.tensor_dim() != n) throw std::invalid_argument("reflect_extend: tensor dimension must match the grid");
  const int last = n - 1;
  if (std::abs(g.origin[last]) > 1e-12 * g.spacing[last])
    throw std::invalid_argument("reflect_extend: grid must start at the interface (origin_n = 0)");
  if (g.dims[last] < 3) throw std::invalid_argument("reflect_extend: grid too small");

  // support must clear the interface by two cells
  const double tol = 1e-14 * a.max_abs();
  std::array<int, kMaxDim> idx;
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    g.unflat(p, std::span<int>(idx.data(), n));
    if (idx[last] > 1) continue;
    for (std::size_t c = 0; c < a.num_components(); ++c) {
      if (std::abs(a.at(p, c)) > tol)
        throw std::invalid_argument("reflect_extend: support touches the interface (need two zero cells above x_n = 0)");
    }
  }

  GridGeometry eg = g;
  eg.dims[last] = 2 * g.dims[last] - 1;
  eg.origin[last] = -(g.dims[last] - 1) * g.spacing[last];
  GridField out(eg, a.rank());

  // (-1)^p parity per component, p = number of indices equal to n
  std::vector<double> parity(a.num_components());
  for (std::size_t c = 0; c < parity.size(); ++c) {
    int p = 0;
    for (int v : a.layout().index(c))
      if (v == last) ++p;
    parity[c] = (p % 2) ? -1.0 : 1.0;
  }

  const std::size_t ncomp = a.num_components();
  const int shift = g.dims[last] - 1;
  for (std::size_t p = 0; p < eg.num_points(); ++p) {
    eg.unflat(p, std::span<int>(idx.data(), n));
    const int j = idx[last] - shift;
    const bool mirrored = j < 0;
    idx[last] = mirrored ? -j : j;
    const std::size_t src = g.flat(std::span<const int>(idx.data(), n));
    auto dst = out.tensor_at(p);
    auto sv = a.tensor_at(src);
    for (std::size_t c = 0; c < ncomp; ++c) dst[c] = mirrored ? parity[c] * sv[c] : sv[c];
  }
  return out;
}

GridField restrict_upper_half(const GridField& extended) {
  const GridGeometry& eg = extended.geom();
  const int n = eg.dim();
  const int last = n - 1;
  if (eg.dims[last] % 2 == 0) throw std::invalid_argument("restrict_upper_half: extended axis must have odd sample count");
  const int half = (eg.dims[last] - 1) / 2;
  if (std::abs(eg.origin[last] + half * eg.spacing[last]) > 1e-12 * eg.spacing[last])
    throw std::invalid_argument("restrict_upper_half: grid is not centered on the interface");

  GridGeometry g = eg;
  g.dims[last] = half + 1;
  g.origin[last] = 0.0;
  GridField out(g, extended.rank(), extended.tensor_dim());
  std::array<int, kMaxDim> idx;
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    g.unflat(p, std::span<int>(idx.data(), n));
    idx[last] += half;
    const std::size_t src = eg.flat(std::span<const int>(idx.data(), n));
    std::copy(extended.tensor_at(src).begin(), extended.tensor_at(src).end(), out.tensor_at(p).begin());
  }
  return out;
}

RotatedFrame RotatedFrame::from_eta(std::span<const double> eta) {
  if (eta.size() != 3) throw std::invalid_argument("RotatedFrame::from_eta: expects n = 3");
  if (std::abs(norm2(eta) - 1.0) > 1e-12) throw std::invalid_argument("RotatedFrame: eta must be a unit vector");
  if (std::abs(eta[0]) > 1e-12) throw std::invalid_argument("RotatedFrame: eta must be orthogonal to e1");
  std::vector<RVec> basis(3);
  basis[0] = {1.0, 0.0, 0.0};
  basis[1] = {eta[0], eta[1], eta[2]};
  basis[2] = {0.0, -eta[2], eta[1]};  // e1 x eta
  return from_basis(std::move(basis));
}

RotatedFrame RotatedFrame::from_basis(std::vector<RVec> basis) {
  const std::size_t n = basis.size();
  for (const RVec& v : basis)
    if (v.size() != n) throw std::invalid_argument("RotatedFrame: basis must be square");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double want = (i == j) ? 1.0 : 0.0;
      if (std::abs(dot(basis[i], basis[j]) - want) > 1e-12)
        throw std::invalid_argument("RotatedFrame: basis is not orthonormal");
    }
  }
  RotatedFrame f;
  f.basis = std::move(basis);
  return f;
}

namespace {

using AmpTerm = AmplitudeTerm;

std::vector<AmpTerm> differentiate(const Amplitude& a, std::vector<AmpTerm> terms, int axis) {
  const RVec& u1 = a.frame.basis[0];
  const RVec& u2 = a.frame.basis[1];
  std::vector<AmpTerm> out;
  out.reserve(terms.size() * 3);
  for (const AmpTerm& t : terms) {
    if (t.pw > 0) out.push_back({t.c * (2.0 * kI * u2[axis]) * static_cast<double>(t.pw), t.pw - 1, t.gd});
    if (a.lambda != 0.0)
      out.push_back({t.c * (-kI * a.lambda) * Complex{u1[axis], u2[axis]}, t.pw, t.gd});
    if (a.g.has_value()) {
      const double w = a.frame.basis[2][axis];
      if (w != 0.0) out.push_back({t.c * w, t.pw, t.gd + 1});
    }
  }
  return out;
}

Complex eval_terms(const Amplitude& a, std::span<const AmpTerm> terms, std::span<const double> x) {
  const Complex zz = 2.0 * kI * a.frame.y2(x);  // z - zbar
  Complex holo{1.0, 0.0};
  if (a.lambda != 0.0) holo = std::exp(-kI * a.lambda * a.frame.z(x));
  const double ypp = a.g.has_value() ? a.frame.ypp(x, 0) : 0.0;
  Complex sum = 0;
  for (const AmpTerm& t : terms) {
    Complex v = t.c;
    for (int i = 0; i < t.pw; ++i) v *= zz;
    if (a.g.has_value()) {
      if (t.gd > 3) throw std::invalid_argument("Amplitude: transverse derivative order exceeds 3");
      v *= a.g->derivative(ypp, t.gd);
    }
    sum += v * holo;
  }
  return sum;
}

}  // namespace

Complex Amplitude::value(std::span<const double> x) const {
  const AmpTerm t{coeff, power, 0};
  return eval_terms(*this, std::span<const AmpTerm>(&t, 1), x);
}

Amplitude Amplitude::dbar() const {
  Amplitude d = *this;
  if (power == 0) {
    d.coeff = 0.0;
    return d;
  }
  d.coeff *= -static_cast<double>(power);
  d.power = power - 1;
  return d;
}

Complex Amplitude::partial(std::span<const double> x, std::span<const int> axes) const {
  std::vector<AmpTerm> terms{{coeff, power, 0}};
  for (int a : axes) terms = differentiate(*this, std::move(terms), a);
  return eval_terms(*this, terms, x);
}

GridField Amplitude::sample(const GridGeometry& geom) const {
  GridField f(geom, 0);
  std::array<double, kMaxDim> x;
  for (std::size_t p = 0; p < geom.num_points(); ++p) {
    geom.point(p, std::span<double>(x.data(), geom.dim()));
    f.at(p, 0) = value(std::span<const double>(x.data(), geom.dim()));
  }
  return f;
}

std::pair<Amplitude, Amplitude> amplitude_family(int m, int l, int k, double lambda,
                                                 std::optional<BumpProfile> g, const RotatedFrame& frame) {
  if (l < 0 || l > m - 1) throw std::invalid_argument("amplitude_family: l out of range (0..m-1)");
  if (k < 0 || k > m - 1) throw std::invalid_argument("amplitude_family: k out of range (0..m-1)");
  Amplitude a0{frame, Complex{1.0, 0.0}, l, 0.0, std::nullopt};
  Amplitude b0bar{frame, Complex{1.0, 0.0}, k, lambda, std::move(g)};
  return {std::move(a0), std::move(b0bar)};
}

namespace {

GridField directional_sum(std::span<const Complex> coeff, const GridField& f) {
  GridField out(f.geom(), f.rank(), f.tensor_dim());
  for (std::size_t a = 0; a < coeff.size(); ++a) {
    if (coeff[a] == Complex{0.0, 0.0}) continue;
    GridField d = central_difference(f, static_cast<int>(a));
    const Complex c = 2.0 * coeff[a];
    for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += c * d.data()[i];
  }
  return out;
}

}  // namespace

GridField transport_apply(const PhaseBundle& b, const GridField& f) {
  if (b.dim() != f.geom().dim()) throw std::invalid_argument("transport_apply: dimension mismatch");
  return directional_sum(b.phase_grad(), f);
}

GridField transport_apply(const RotatedFrame& frame, const GridField& f) {
  if (frame.dim() != f.geom().dim()) throw std::invalid_argument("transport_apply: dimension mismatch");
  CVec c(frame.dim());
  for (int a = 0; a < frame.dim(); ++a) c[a] = Complex{frame.basis[0][a], frame.basis[1][a]};
  return directional_sum(c, f);
}

Amplitude transport_apply(const RotatedFrame& frame, const Amplitude& a) {
  (void)frame;  // T in the h->0 frame is 4 dzbar, independent of the point
  Amplitude out = a.dbar();
  out.coeff *= 4.0;
  return out;
}

Complex transport_apply_at(const PhaseBundle& b, const Amplitude& a, std::span<const double> x) {
  CVec g = b.phase_grad();
  Complex sum = 0;
  for (int ax = 0; ax < b.dim(); ++ax) {
    const int axes[1] = {ax};
    sum += 2.0 * g[ax] * a.partial(x, axes);
  }
  return sum;
}

Complex conjugation_apply(const PhaseBundle& b, std::span<const int> multi_index, const Amplitude& a,
                          std::span<const double> x) {
  const int j = static_cast<int>(multi_index.size());
  CVec pg = b.phase_grad();
  CVec beta(pg.size());
  for (std::size_t t = 0; t < pg.size(); ++t) beta[t] = -kI * pg[t];  // D(phi + i psi)

  Complex total = 0;
  std::array<int, 16> rest;
  for (int mask = 0; mask < (1 << j); ++mask) {
    Complex factor{1.0, 0.0};
    int nrest = 0;
    for (int t = 0; t < j; ++t) {
      if (mask & (1 << t)) {
        factor *= beta[multi_index[t]] / b.h;
      } else {
        rest[nrest++] = multi_index[t];
      }
    }
    Complex dval = a.partial(x, std::span<const int>(rest.data(), nrest));
    for (int t = 0; t < nrest; ++t) dval *= -kI;  // D = (1/i) d
    total += factor * dval;
  }
  return total;
}

AmplitudePartials::AmplitudePartials(Amplitude a, int max_order) : amp_(std::move(a)) {
  if (max_order < 0) throw std::invalid_argument("AmplitudePartials: negative order");
  const int n = amp_.frame.dim();
  layouts_.resize(max_order + 1);
  terms_.resize(max_order + 1);
  for (int order = 0; order <= max_order; ++order) {
    layouts_[order] = SymLayout::get(n, order);
    terms_[order].resize(layouts_[order]->size());
    for (std::size_t pos = 0; pos < layouts_[order]->size(); ++pos) {
      std::vector<AmpTerm> t{{amp_.coeff, amp_.power, 0}};
      for (int axis : layouts_[order]->index(pos)) t = differentiate(amp_, std::move(t), axis);
      terms_[order][pos] = std::move(t);
    }
  }
}

Complex AmplitudePartials::eval(std::span<const double> x, int order, std::size_t pos) const {
  return eval_terms(amp_, terms_[order][pos], x);
}

GridField conjugation_apply(const PhaseBundle& b, std::span<const int> multi_index, const GridField& amp) {
  if (b.dim() != amp.geom().dim()) throw std::invalid_argument("conjugation_apply: dimension mismatch");
  CVec pg = b.phase_grad();
  GridField cur = amp;
  for (int t = static_cast<int>(multi_index.size()) - 1; t >= 0; --t) {
    const int ax = multi_index[t];
    const Complex beta = -kI * pg[ax];
    GridField d = central_difference(cur, ax);
    for (std::size_t i = 0; i < cur.data().size(); ++i)
      cur.data()[i] = beta / b.h * cur.data()[i] + (-kI) * d.data()[i];
  }
  return cur;
}

}  // namespace mrt
