#include "mrt/mrt_inversion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "mrt/tensor_algebra.hpp"

namespace mrt {

ComplexDirection make_direction(RVec eta) {
  const int n = static_cast<int>(eta.size());
  if (n < 3) throw std::invalid_argument("ComplexDirection: dimension must be >= 3");
  if (std::abs(norm2(eta) - 1.0) > 1e-12) throw std::invalid_argument("ComplexDirection: eta must be a unit vector");
  if (std::abs(eta[0]) > 1e-12) throw std::invalid_argument("ComplexDirection: eta must be orthogonal to e1");
  ComplexDirection d;
  d.theta = (n == 3) ? std::atan2(eta[2], eta[1]) : 0.0;
  d.eta = std::move(eta);
  return d;
}

std::vector<ComplexDirection> eta_circle(int count) {
  if (count < 1) throw std::invalid_argument("eta_circle: count must be positive");
  std::vector<ComplexDirection> dirs;
  dirs.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / count;
    dirs.push_back(make_direction(RVec{0.0, std::cos(theta), std::sin(theta)}));
  }
  return dirs;
}

CVec null_vector(const ComplexDirection& dir) {
  CVec w(dir.eta.size());
  w[0] = Complex{1.0, dir.eta[0]};
  for (std::size_t a = 1; a < w.size(); ++a) w[a] = Complex{0.0, dir.eta[a]};
  return w;
}

Complex complex_moment(const GridField& f, int k, const ComplexDirection& dir, std::span<const double> xpp) {
  const GridGeometry& g = f.geom();
  const int n = g.dim();
  if (n < 3) throw std::invalid_argument("complex_moment: dimension must be >= 3");
  if (f.tensor_dim() != n) throw std::invalid_argument("complex_moment: tensor dimension must match the grid");
  if (static_cast<int>(dir.eta.size()) != n) throw std::invalid_argument("complex_moment: direction dimension mismatch");
  if (k < 0 || k > f.rank()) throw std::invalid_argument("complex_moment: k must satisfy 0 <= k <= rank");
  if (static_cast<int>(xpp.size()) != n - 2) throw std::invalid_argument("complex_moment: x'' needs n-2 entries");

  // line {(0, x2, x'')}: check it meets the box in the frozen coordinates
  if (g.lo(0) > 0.0 || g.hi(0) < 0.0) return Complex{0.0, 0.0};
  for (int a = 2; a < n; ++a) {
    if (xpp[a - 2] < g.lo(a) || xpp[a - 2] > g.hi(a)) return Complex{0.0, 0.0};
  }

  const CVec w = null_vector(dir);
  const SymLayout& layout = f.layout();
  CVec pow_w(layout.size());
  for (std::size_t c = 0; c < layout.size(); ++c) {
    Complex prod = layout.multiplicity(c);
    for (int v : layout.index(c)) prod *= w[v];
    pow_w[c] = prod;
  }

  const double t0 = g.lo(1), t1 = g.hi(1);
  const double dt_max = 0.5 * g.spacing[1];
  const int nsub = std::max<int>(1, static_cast<int>(std::ceil((t1 - t0) / dt_max)));
  const double dt = (t1 - t0) / nsub;

  std::array<double, kMaxDim> x;
  x[0] = 0.0;
  for (int a = 2; a < n; ++a) x[a] = xpp[a - 2];
  CVec vals(layout.size());
  Complex acc = 0;
  for (int i = 0; i <= nsub; ++i) {
    const double t = t0 + i * dt;
    x[1] = t;
    f.interpolate(std::span<const double>(x.data(), n), vals);
    Complex s = 0;
    for (std::size_t c = 0; c < vals.size(); ++c) s += pow_w[c] * vals[c];
    if (k > 0) s *= std::pow(t, k);
    acc += (i == 0 || i == nsub) ? 0.5 * s : s;
  }
  return acc * dt;
}

std::vector<GridField> binomial_reduce(const GridField& f) {
  const int n = f.tensor_dim();
  const int m = f.rank();
  if (n < 3) throw std::invalid_argument("binomial_reduce: dimension must be >= 3");
  std::vector<GridField> family;
  family.reserve(m + 1);
  std::array<int, 16> mi;
  for (int p = 0; p <= m; ++p) {
    GridField fp(f.geom(), p, n - 1);
    const SymLayout& red = fp.layout();
    const double binom = static_cast<double>(binomial(m, p));
    // reduced index j in 0..n-2 refers to the full-tensor axis j+1
    std::vector<std::size_t> src(red.size());
    for (std::size_t c = 0; c < red.size(); ++c) {
      for (int t = 0; t < m - p; ++t) mi[t] = 0;
      const std::vector<int>& J = red.index(c);
      for (int t = 0; t < p; ++t) mi[m - p + t] = J[t] + 1;
      src[c] = f.layout().position(std::span<const int>(mi.data(), m));
    }
    for (std::size_t pt = 0; pt < f.geom().num_points(); ++pt) {
      auto dst = fp.tensor_at(pt);
      for (std::size_t c = 0; c < red.size(); ++c) dst[c] = binom * f.at(pt, src[c]);
    }
    family.push_back(std::move(fp));
  }
  return family;
}

Complex binomial_eval(std::span<const GridField> family, const ComplexDirection& dir, std::size_t pt) {
  Complex acc = 0;
  Complex ip{1.0, 0.0};
  CVec eta_red(dir.eta.begin() + 1, dir.eta.end());
  for (std::size_t p = 0; p < family.size(); ++p) {
    acc += ip * eval_power(family[p].tensor_copy(pt), std::span<const Complex>(eta_red));
    ip *= kI;
  }
  return acc;
}

void MomentTable::write_csv(std::ostream& os) const {
  const int npp = rows.empty() ? 0 : static_cast<int>(rows[0].xpp.size());
  os << "k,eta_theta";
  for (int a = 0; a < npp; ++a) os << ",xpp" << (a + 1);
  os << ",lambda,re,im\n";
  char buf[64];
  for (const MomentRow& r : rows) {
    os << r.k << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", r.eta_theta);
    os << buf;
    for (double v : r.xpp) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      os << "," << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", r.lambda);
    os << "," << buf;
    std::snprintf(buf, sizeof(buf), "%.17g", r.value.real());
    os << "," << buf;
    std::snprintf(buf, sizeof(buf), "%.17g", r.value.imag());
    os << "," << buf << "\n";
  }
}

void MomentTable::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("MomentTable: cannot open " + path);
  write_csv(os);
}

double MomentTable::max_abs() const {
  double s = 0;
  for (const MomentRow& r : rows) s = std::max(s, std::abs(r.value));
  return s;
}

const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::zero: return "zero";
    case VerdictKind::partially_isotropic: return "partially_isotropic";
    case VerdictKind::nonzero: return "nonzero";
  }
  return "?";
}

GridField slice_x1_zero(const GridField& f) {
  const GridGeometry& g = f.geom();
  const int n = g.dim();
  GridGeometry sg = g;
  sg.dims[0] = 1;
  sg.origin[0] = 0.0;
  GridField out(sg, f.rank(), f.tensor_dim());

  // use the exact grid plane when x1 = 0 is a node, else interpolate
  const double u = (0.0 - g.origin[0]) / g.spacing[0];
  const int i0 = static_cast<int>(std::llround(u));
  const bool on_node = std::abs(u - i0) < 1e-9 && i0 >= 0 && i0 < g.dims[0];

  std::array<int, kMaxDim> idx{};
  std::array<double, kMaxDim> x;
  const std::size_t ncomp = f.num_components();
  CVec vals(ncomp);
  for (std::size_t p = 0; p < sg.num_points(); ++p) {
    sg.unflat(p, std::span<int>(idx.data(), n));
    if (on_node) {
      idx[0] = i0;
      const std::size_t q = g.flat(std::span<const int>(idx.data(), n));
      std::copy(f.tensor_at(q).begin(), f.tensor_at(q).end(), out.tensor_at(p).begin());
      idx[0] = 0;
    } else {
      sg.point(p, std::span<double>(x.data(), n));
      x[0] = 0.0;
      f.interpolate(std::span<const double>(x.data(), n), vals);
      std::copy(vals.begin(), vals.end(), out.tensor_at(p).begin());
    }
  }
  return out;
}

Verdict injectivity_verdict(const GridField& f, std::span<const ComplexDirection> dirs, double tol) {
  const GridGeometry& g = f.geom();
  const int n = g.dim();
  const int m = f.rank();
  if (n < 3) throw std::invalid_argument("injectivity_verdict: dimension must be >= 3");
  if (static_cast<int>(dirs.size()) < 2 * m + 2)
    throw std::invalid_argument("injectivity_verdict: need at least 2m+2 direction samples");
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    for (std::size_t j = i + 1; j < dirs.size(); ++j) {
      double d = 0;
      for (std::size_t a = 0; a < dirs[i].eta.size(); ++a) d = std::max(d, std::abs(dirs[i].eta[a] - dirs[j].eta[a]));
      if (d < 1e-12) throw std::invalid_argument("injectivity_verdict: direction samples must be distinct");
    }
  }

  Verdict v{};
  v.scale = f.max_abs() * f.support_width();

  // x'' runs over the grid coordinates of axes 3..n inside the support box
  std::array<int, kMaxDim> lo, hi;
  const bool nonzero_field = f.support_box(std::span<int>(lo.data(), n), std::span<int>(hi.data(), n));
  if (!nonzero_field) {
    for (int a = 0; a < n; ++a) {
      lo[a] = 0;
      hi[a] = 0;
    }
  }

  std::vector<RVec> xpps;
  {
    std::array<int, kMaxDim> it{};
    for (int a = 2; a < n; ++a) it[a] = lo[a];
    while (true) {
      RVec xpp(n - 2);
      for (int a = 2; a < n; ++a) xpp[a - 2] = g.coord(a, it[a]);
      xpps.push_back(std::move(xpp));
      int a = n - 1;
      while (a >= 2 && it[a] == hi[a]) --a;
      if (a < 2) break;
      ++it[a];
      for (int b = a + 1; b < n; ++b) it[b] = lo[b];
    }
  }

  v.max_moment = 0.0;
  for (int k = 0; k <= m; ++k) {
    for (const ComplexDirection& dir : dirs) {
      for (const RVec& xpp : xpps) {
        MomentRow row{k, dir.theta, xpp, 0.0, complex_moment(f, k, dir, xpp)};
        const double mag = std::abs(row.value);
        if (mag > v.max_moment) {
          v.max_moment = mag;
          v.argmax = row;
        }
        v.table.rows.push_back(std::move(row));
      }
    }
  }

  if (v.max_moment > tol * v.scale) {
    v.kind = VerdictKind::nonzero;
    return v;
  }
  if (m <= 1) {
    v.kind = VerdictKind::zero;
    return v;
  }

  v.kind = VerdictKind::partially_isotropic;
  GridField slice = slice_x1_zero(f);
  GridField witness(slice.geom(), m - 2, slice.tensor_dim());
  double residual = 0.0;
  for (std::size_t p = 0; p < slice.geom().num_points(); ++p) {
    IsotropyProjection proj = isotropy_project(slice.tensor_copy(p));
    witness.set_tensor(p, proj.generator);
    residual = std::max(residual, proj.residual);
  }
  v.witness = std::move(witness);
  v.witness_residual = residual;
  return v;
}

}  // namespace mrt
