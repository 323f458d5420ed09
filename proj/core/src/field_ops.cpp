#include "mrt/field_ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>

#include "mrt/tensor_algebra.hpp"

namespace mrt {

GridField central_difference(const GridField& f, int axis) {
  const GridGeometry& g = f.geom();
  const int n = g.dim();
  if (axis < 0 || axis >= n) throw std::invalid_argument("central_difference: bad axis");
  if (g.dims[axis] < 3) throw std::invalid_argument("central_difference: grid too small for the stencil");
  GridField out(g, f.rank(), f.tensor_dim());
  const std::size_t ncomp = f.num_components();
  const double inv2h = 1.0 / (2.0 * g.spacing[axis]);
  std::array<int, kMaxDim> idx;
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    g.unflat(p, std::span<int>(idx.data(), n));
    const int i = idx[axis];
    const Complex* up = nullptr;
    const Complex* dn = nullptr;
    if (i + 1 < g.dims[axis]) {
      idx[axis] = i + 1;
      up = f.tensor_at(g.flat(std::span<const int>(idx.data(), n))).data();
    }
    if (i - 1 >= 0) {
      idx[axis] = i - 1;
      dn = f.tensor_at(g.flat(std::span<const int>(idx.data(), n))).data();
    }
    idx[axis] = i;
    Complex* dst = out.tensor_at(p).data();
    for (std::size_t k = 0; k < ncomp; ++k) {
      const Complex a = up ? up[k] : Complex{0.0, 0.0};
      const Complex b = dn ? dn[k] : Complex{0.0, 0.0};
      dst[k] = (a - b) * inv2h;
    }
  }
  return out;
}

GridField inner_derivative(const GridField& v) {
  const GridGeometry& g = v.geom();
  const int n = g.dim();
  if (v.tensor_dim() != n) throw std::invalid_argument("inner_derivative: tensor dimension must match the grid");
  const int m = v.rank() + 1;
  std::vector<GridField> dv;
  dv.reserve(n);
  for (int a = 0; a < n; ++a) dv.push_back(central_difference(v, a));

  GridField out(g, m);
  const SymLayout& in_layout = v.layout();
  const SymLayout& out_layout = out.layout();
  std::array<int, 16> sub;
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    auto dst = out.tensor_at(p);
    for (std::size_t c = 0; c < out_layout.size(); ++c) {
      const std::vector<int>& I = out_layout.index(c);
      Complex sum = 0;
      for (int j = 0; j < m; ++j) {
        int a = 0;
        for (int t = 0; t < m; ++t)
          if (t != j) sub[a++] = I[t];
        sum += dv[I[j]].at(p, in_layout.position_sorted(std::span<const int>(sub.data(), m - 1)));
      }
      dst[c] = sum / static_cast<double>(m);
    }
  }
  return out;
}

GridField pointwise_i_delta(const GridField& f) {
  GridField out(f.geom(), f.rank() + 2, f.tensor_dim());
  for (std::size_t p = 0; p < f.geom().num_points(); ++p) out.set_tensor(p, i_delta(f.tensor_copy(p)));
  return out;
}

SaintVenantField::SaintVenantField(GridGeometry geom, int rank, int tensor_dim)
    : geom_(std::move(geom)), layout_(SymLayout::get(tensor_dim, rank)) {
  data_.assign(geom_.num_points() * layout_->size() * layout_->size(), Complex{0.0, 0.0});
}

double SaintVenantField::max_abs() const {
  double s = 0;
  for (const Complex& c : data_) s = std::max(s, std::abs(c));
  return s;
}

namespace {

struct StencilTap {
  std::array<int, kMaxDim> offset;
  double weight;
};

// Composed central differences for an m-th derivative multiset: the k-fold
// 1-D stencil has taps C(k,j)(-1)^j/(2h)^k at offsets k-2j, combined across
// axes by outer product.  Identical to repeated central_difference calls.
std::vector<StencilTap> build_stencil(std::span<const int> deriv_axes, const GridGeometry& g) {
  std::array<int, kMaxDim> order{};
  for (int a : deriv_axes) ++order[a];
  std::vector<StencilTap> taps;
  taps.push_back(StencilTap{{}, 1.0});
  for (int a = 0; a < g.dim(); ++a) {
    const int k = order[a];
    if (k == 0) continue;
    const double scale = 1.0 / std::pow(2.0 * g.spacing[a], k);
    std::vector<StencilTap> next;
    next.reserve(taps.size() * (k + 1));
    for (const StencilTap& t : taps) {
      for (int j = 0; j <= k; ++j) {
        StencilTap nt = t;
        nt.offset[a] += k - 2 * j;
        nt.weight *= scale * static_cast<double>(binomial(k, j)) * ((j % 2) ? -1.0 : 1.0);
        next.push_back(nt);
      }
    }
    taps = std::move(next);
  }
  return taps;
}

struct SvTerm {
  int pair_key;  // (c << 8) | d, both < 256 at desk scale
  double coeff;
};

struct SvTable {
  std::shared_ptr<const SymLayout> layout;       // rank m components
  std::shared_ptr<const SymLayout> deriv_layout; // rank m derivative multisets
  std::vector<std::vector<SvTerm>> terms;        // per output block (a, b)
  std::vector<std::pair<int, int>> used;         // distinct (c, d) pairs
  std::vector<int> used_slot;                    // pair_key -> slot in `used`
};

SvTable build_sv_table(int m, int n) {
  SvTable tab;
  tab.layout = SymLayout::get(n, m);
  tab.deriv_layout = SymLayout::get(n, m);
  const std::size_t S = tab.layout->size();
  tab.terms.resize(S * S);
  tab.used_slot.assign(1 << 16, -1);

  std::array<int, 16> comp{}, deriv{};
  for (std::size_t a = 0; a < S; ++a) {
    std::vector<int> iperm = tab.layout->index(a);
    for (std::size_t b = 0; b < S; ++b) {
      std::map<int, double> acc;
      std::vector<int> I = iperm;
      double nperm = 0;
      do {
        std::vector<int> J = tab.layout->index(b);
        do {
          for (int p = 0; p <= m; ++p) {
            // component u_{I'_1..I'_{m-p} J'_1..J'_p}
            for (int t = 0; t < m - p; ++t) comp[t] = I[t];
            for (int t = 0; t < p; ++t) comp[m - p + t] = J[t];
            // derivatives d/dx_{J'_{p+1}}..d/dx_{J'_m} d/dx_{I'_{m-p+1}}..d/dx_{I'_m}
            int dcount = 0;
            for (int t = p; t < m; ++t) deriv[dcount++] = J[t];
            for (int t = m - p; t < m; ++t) deriv[dcount++] = I[t];
            const int c = static_cast<int>(tab.layout->position(std::span<const int>(comp.data(), m)));
            const int d = static_cast<int>(tab.deriv_layout->position(std::span<const int>(deriv.data(), m)));
            const double coeff = static_cast<double>(binomial(m, p)) * ((p % 2) ? -1.0 : 1.0);
            acc[(c << 8) | d] += coeff;
          }
          nperm += 1.0;
        } while (std::next_permutation(J.begin(), J.end()));
      } while (std::next_permutation(I.begin(), I.end()));
      std::vector<SvTerm>& out = tab.terms[a * S + b];
      for (const auto& [key, coeff] : acc) {
        if (std::abs(coeff) < 1e-14 * nperm) continue;
        out.push_back(SvTerm{key, coeff / nperm});
        if (tab.used_slot[key] < 0) {
          tab.used_slot[key] = static_cast<int>(tab.used.size());
          tab.used.emplace_back(key >> 8, key & 0xff);
        }
      }
    }
  }
  return tab;
}

void check_sv_resolution(const GridField& u) {
  const int m = u.rank();
  for (int a = 0; a < u.geom().dim(); ++a) {
    if (u.geom().dims[a] < 2 * m + 5) throw std::invalid_argument("saint_venant: insufficient resolution (need dims >= 2m+5)");
  }
}

}  // namespace

void saint_venant_point(const GridField& u, std::span<const int> idx, std::span<Complex> out) {
  const int m = u.rank();
  const int n = u.geom().dim();
  static thread_local std::map<std::pair<int, int>, SvTable> table_cache;
  auto key = std::make_pair(m, n);
  auto it = table_cache.find(key);
  if (it == table_cache.end()) it = table_cache.emplace(key, build_sv_table(m, n)).first;
  const SvTable& tab = it->second;

  static thread_local std::map<std::pair<int, int>, std::vector<std::vector<StencilTap>>> stencil_cache;
  auto sit = stencil_cache.find(key);
  if (sit == stencil_cache.end()) {
    std::vector<std::vector<StencilTap>> st(tab.deriv_layout->size());
    for (std::size_t d = 0; d < st.size(); ++d) st[d] = build_stencil(tab.deriv_layout->index(d), u.geom());
    sit = stencil_cache.emplace(key, std::move(st)).first;
  }
  const auto& stencils = sit->second;

  const GridGeometry& g = u.geom();
  std::array<int, kMaxDim> tap_idx;
  // derivative values for every used (component, derivative multiset) pair
  std::vector<Complex> dval(tab.used.size());
  for (std::size_t s = 0; s < tab.used.size(); ++s) {
    const auto [c, d] = tab.used[s];
    Complex acc = 0;
    for (const StencilTap& tap : stencils[d]) {
      bool inside = true;
      for (int a = 0; a < n; ++a) {
        tap_idx[a] = idx[a] + tap.offset[a];
        if (tap_idx[a] < 0 || tap_idx[a] >= g.dims[a]) {
          inside = false;
          break;
        }
      }
      if (!inside) continue;  // zero padding
      acc += tap.weight * u.at(g.flat(std::span<const int>(tap_idx.data(), n)), c);
    }
    dval[s] = acc;
  }
  const std::size_t S = tab.layout->size();
  for (std::size_t ab = 0; ab < S * S; ++ab) {
    Complex acc = 0;
    for (const SvTerm& t : tab.terms[ab]) acc += t.coeff * dval[tab.used_slot[t.pair_key]];
    out[ab] = acc;
  }
}

SaintVenantField saint_venant(const GridField& u) {
  check_sv_resolution(u);
  if (u.tensor_dim() != u.geom().dim()) throw std::invalid_argument("saint_venant: tensor dimension must match the grid");
  SaintVenantField out(u.geom(), u.rank(), u.tensor_dim());
  const std::size_t S = out.block_size();
  const GridGeometry& g = u.geom();
  std::array<int, kMaxDim> idx;
  std::vector<Complex> block(S * S);
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    g.unflat(p, std::span<int>(idx.data(), g.dim()));
    saint_venant_point(u, std::span<const int>(idx.data(), g.dim()), block);
    std::copy(block.begin(), block.end(), out.data().begin() + p * S * S);
  }
  return out;
}

double saint_venant_max_abs(const GridField& u) {
  check_sv_resolution(u);
  const GridGeometry& g = u.geom();
  const std::size_t S = u.num_components();
  std::array<int, kMaxDim> idx;
  std::vector<Complex> block(S * S);
  double mx = 0;
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    g.unflat(p, std::span<int>(idx.data(), g.dim()));
    saint_venant_point(u, std::span<const int>(idx.data(), g.dim()), block);
    for (const Complex& c : block) mx = std::max(mx, std::abs(c));
  }
  return mx;
}

}  // namespace mrt
