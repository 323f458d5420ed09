#include "mrt/bump.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "mrt/tensor_algebra.hpp"

namespace mrt {

namespace {

// q(t) = -(t-c)^2/(2 sigma^2) + b - b/(1-u^2), u = (t-c)/r; profile = exp(q).
struct QDerivs {
  double q1, q2, q3;
};

QDerivs q_derivatives(const BumpProfile& p, double s, double u) {
  const double r = p.radius;
  const double w = 1.0 - u * u;
  const double b = p.steep;
  QDerivs d{};
  d.q1 = -2.0 * b * u / (r * w * w);
  d.q2 = -2.0 * b * (1.0 + 3.0 * u * u) / (r * r * w * w * w);
  d.q3 = -24.0 * b * u * (1.0 + u * u) / (r * r * r * w * w * w * w);
  if (p.sigma > 0) {
    const double s2 = p.sigma * p.sigma;
    d.q1 += -s / s2;
    d.q2 += -1.0 / s2;
  }
  return d;
}

}  // namespace

double BumpProfile::value(double t) const {
  const double s = t - center;
  const double u = s / radius;
  if (std::abs(u) >= 1.0) return 0.0;
  double q = steep - steep / (1.0 - u * u);
  if (sigma > 0) q -= s * s / (2.0 * sigma * sigma);
  return std::exp(q);
}

double BumpProfile::d1(double t) const {
  const double s = t - center;
  const double u = s / radius;
  if (std::abs(u) >= 1.0) return 0.0;
  return value(t) * q_derivatives(*this, s, u).q1;
}

double BumpProfile::d2(double t) const {
  const double s = t - center;
  const double u = s / radius;
  if (std::abs(u) >= 1.0) return 0.0;
  const QDerivs d = q_derivatives(*this, s, u);
  return value(t) * (d.q2 + d.q1 * d.q1);
}

double BumpProfile::d3(double t) const {
  const double s = t - center;
  const double u = s / radius;
  if (std::abs(u) >= 1.0) return 0.0;
  const QDerivs d = q_derivatives(*this, s, u);
  return value(t) * (d.q3 + 3.0 * d.q2 * d.q1 + d.q1 * d.q1 * d.q1);
}

double BumpProfile::derivative(double t, int order) const {
  switch (order) {
    case 0: return value(t);
    case 1: return d1(t);
    case 2: return d2(t);
    case 3: return d3(t);
    default: throw std::invalid_argument("BumpProfile: derivative order must be 0..3");
  }
}

double SeparableBump::shape(std::span<const double> x) const {
  double v = 1.0;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    v *= axes[a].value(x[a]);
    if (v == 0.0) return 0.0;
  }
  return v;
}

Complex SeparableBump::value(std::span<const double> x) const { return amplitude * shape(x); }

double SeparableBump::shape_partial(std::span<const double> x, int axis) const {
  double v = 1.0;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    v *= (static_cast<int>(a) == axis) ? axes[a].d1(x[a]) : axes[a].value(x[a]);
    if (v == 0.0) return 0.0;
  }
  return v;
}

GridField sample_scalar_bump(const GridGeometry& geom, const SeparableBump& bump) {
  GridField f(geom, 0);
  std::array<double, kMaxDim> x;
  for (std::size_t p = 0; p < geom.num_points(); ++p) {
    geom.point(p, std::span<double>(x.data(), geom.dim()));
    f.at(p, 0) = bump.value(std::span<const double>(x.data(), geom.dim()));
  }
  return f;
}

GridField sample_tensor_bump(const GridGeometry& geom, int rank, const SeparableBump& bump, std::span<const Complex> coeffs) {
  GridField f(geom, rank);
  if (coeffs.size() != f.num_components()) throw std::invalid_argument("sample_tensor_bump: coefficient count mismatch");
  std::array<double, kMaxDim> x;
  for (std::size_t p = 0; p < geom.num_points(); ++p) {
    geom.point(p, std::span<double>(x.data(), geom.dim()));
    const Complex s = bump.value(std::span<const double>(x.data(), geom.dim()));
    auto t = f.tensor_at(p);
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = coeffs[k] * s;
  }
  return f;
}

GridField random_tensor_bump(const GridGeometry& geom, int rank, const SeparableBump& bump, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const std::size_t ncomp = SymLayout::get(geom.dim(), rank)->size();
  CVec coeffs(ncomp);
  for (Complex& c : coeffs) {
    const double re = uni(rng);
    const double im = uni(rng);
    c = Complex{re, 0.5 * im};
  }
  return sample_tensor_bump(geom, rank, bump, coeffs);
}

GridField analytic_inner_derivative_bump(const GridGeometry& geom, int rank_out, const SeparableBump& bump, std::span<const Complex> coeffs) {
  if (rank_out < 1) throw std::invalid_argument("analytic_inner_derivative_bump: rank_out must be >= 1");
  const int n = geom.dim();
  const int m = rank_out;
  auto gen_layout = SymLayout::get(n, m - 1);
  if (coeffs.size() != gen_layout->size())
    throw std::invalid_argument("analytic_inner_derivative_bump: coefficient count mismatch");
  GridField f(geom, m);
  const SymLayout& out_layout = f.layout();
  std::array<double, kMaxDim> x;
  std::array<int, 16> sub;
  for (std::size_t p = 0; p < geom.num_points(); ++p) {
    geom.point(p, std::span<double>(x.data(), n));
    auto xs = std::span<const double>(x.data(), n);
    auto t = f.tensor_at(p);
    for (std::size_t c = 0; c < out_layout.size(); ++c) {
      const std::vector<int>& I = out_layout.index(c);
      Complex sum = 0;
      for (int j = 0; j < m; ++j) {
        int a = 0;
        for (int t2 = 0; t2 < m; ++t2)
          if (t2 != j) sub[a++] = I[t2];
        const std::size_t g = gen_layout->position(std::span<const int>(sub.data(), m - 1));
        sum += coeffs[g] * bump.shape_partial(xs, I[j]);
      }
      t[c] = bump.amplitude * sum / static_cast<double>(m);
    }
  }
  return f;
}

GridField planted_isotropic_field(const GridField& generator) {
  GridField out(generator.geom(), generator.rank() + 2, generator.tensor_dim());
  for (std::size_t p = 0; p < generator.geom().num_points(); ++p) {
    out.set_tensor(p, i_delta(generator.tensor_copy(p)));
  }
  return out;
}

SeparableBump default_bump(const GridGeometry& geom, int margin_cells) {
  SeparableBump b;
  b.axes.resize(geom.dim());
  for (int a = 0; a < geom.dim(); ++a) {
    const double lo = geom.lo(a), hi = geom.hi(a);
    const double radius = 0.5 * (hi - lo) - margin_cells * geom.spacing[a];
    if (radius <= 0) throw std::invalid_argument("default_bump: grid too small for the margin");
    b.axes[a] = BumpProfile{0.5 * (lo + hi), radius / 2.0, radius, 1.0};
  }
  return b;
}

}  // namespace mrt
