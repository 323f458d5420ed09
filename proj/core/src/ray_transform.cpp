#include "mrt/ray_transform.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mrt {

namespace {

constexpr int kMaxMomentOrder = 8;

/// Chord of the grid bounding box along the ray, by the slab method.
bool chord(const GridGeometry& g, const Ray& ray, double& t0, double& t1) {
  t0 = -std::numeric_limits<double>::infinity();
  t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.dim(); ++a) {
    const double lo = g.lo(a), hi = g.hi(a);
    const double d = ray.dir[a];
    if (std::abs(d) < 1e-300) {
      if (ray.base[a] < lo || ray.base[a] > hi) return false;
      continue;
    }
    double ta = (lo - ray.base[a]) / d;
    double tb = (hi - ray.base[a]) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  return t0 < t1;
}

void check_ray(const GridField& f, const Ray& ray) {
  const int n = f.geom().dim();
  if (static_cast<int>(ray.base.size()) != n || static_cast<int>(ray.dir.size()) != n)
    throw std::invalid_argument("ray dimension mismatch");
  if (norm2(ray.dir) == 0.0) throw std::invalid_argument("ray direction must be nonzero");
}

}  // namespace

Complex momentum_transform(const GridField& f, const Ray& ray, int k) {
  check_ray(f, ray);
  if (k < 0 || k > kMaxMomentOrder) throw std::invalid_argument("momentum_transform: k out of range (0..8)");
  const GridGeometry& g = f.geom();
  const int n = g.dim();
  double t0, t1;
  if (!chord(g, ray, t0, t1)) return Complex{0.0, 0.0};

  // per-component direction powers, taken once per ray
  const SymLayout& layout = f.layout();
  CVec dir_pow(layout.size());
  for (std::size_t c = 0; c < layout.size(); ++c) {
    double prod = layout.multiplicity(c);
    for (int v : layout.index(c)) prod *= ray.dir[v];
    dir_pow[c] = prod;
  }

  const double speed = norm2(ray.dir);
  const double dt_max = 0.5 * g.min_spacing() / speed;
  const int nsub = std::max<int>(1, static_cast<int>(std::ceil((t1 - t0) / dt_max)));
  const double dt = (t1 - t0) / nsub;

  std::array<double, kMaxDim> x;
  CVec vals(layout.size());
  Complex acc = 0;
  for (int i = 0; i <= nsub; ++i) {
    const double t = t0 + i * dt;
    for (int a = 0; a < n; ++a) x[a] = ray.base[a] + t * ray.dir[a];
    f.interpolate(std::span<const double>(x.data(), n), vals);
    Complex s = 0;
    for (std::size_t c = 0; c < vals.size(); ++c) s += dir_pow[c] * vals[c];
    if (k > 0) s *= std::pow(t, k);
    acc += (i == 0 || i == nsub) ? 0.5 * s : s;
  }
  return acc * dt;
}

Complex ray_transform(const GridField& f, const Ray& ray) { return momentum_transform(f, ray, 0); }

Complex restricted_moment(const GridField& f, const Ray& ray, int k) {
  check_ray(f, ray);
  if (std::abs(norm2(ray.dir) - 1.0) > 1e-12)
    throw std::invalid_argument("restricted_moment: direction must be unit length");
  return momentum_transform(f, ray, k);
}

void TensorPolyField::validate() const {
  if (comps.empty()) throw std::invalid_argument("TensorPolyField: no components");
  for (std::size_t p = 0; p < comps.size(); ++p) {
    if (comps[p].rank() != static_cast<int>(p)) throw std::invalid_argument("TensorPolyField: component rank mismatch");
    if (!comps[p].geom().same_as(comps[0].geom())) throw std::invalid_argument("TensorPolyField: mismatched grids");
  }
}

Complex poly_moment(const TensorPolyField& F, const Ray& ray, int k) {
  F.validate();
  Complex acc = 0;
  for (const GridField& f : F.comps) acc += momentum_transform(f, ray, k);
  return acc;
}

std::vector<RayBatchEntry> read_ray_batch(const std::string& path, int dim) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_ray_batch: cannot open " + path);
  std::vector<RayBatchEntry> out;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (first) {
      first = false;
      if (line.find_first_not_of("0123456789+-.eE, \t") != std::string::npos) continue;  // header row
    }
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != static_cast<std::size_t>(2 * dim + 1))
      throw std::runtime_error("read_ray_batch: expected columns x1..xn, xi1..xin, k");
    RayBatchEntry e;
    e.ray.base.assign(vals.begin(), vals.begin() + dim);
    e.ray.dir.assign(vals.begin() + dim, vals.begin() + 2 * dim);
    e.k = static_cast<int>(vals[2 * dim]);
    out.push_back(std::move(e));
  }
  return out;
}

void write_ray_batch_results(const std::string& path, std::span<const RayBatchEntry> batch, std::span<const Complex> values) {
  if (batch.size() != values.size()) throw std::invalid_argument("write_ray_batch_results: size mismatch");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_ray_batch_results: cannot open " + path);
  const int dim = batch.empty() ? 0 : static_cast<int>(batch[0].ray.base.size());
  for (int a = 0; a < dim; ++a) os << "x" << (a + 1) << ",";
  for (int a = 0; a < dim; ++a) os << "xi" << (a + 1) << ",";
  os << "k,re,im\n";
  char buf[64];
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (double v : batch[i].ray.base) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      os << buf << ",";
    }
    for (double v : batch[i].ray.dir) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      os << buf << ",";
    }
    os << batch[i].k << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", values[i].real());
    os << buf << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", values[i].imag());
    os << buf << "\n";
  }
  if (!os) throw std::runtime_error("write_ray_batch_results: stream failure");
}

}  // namespace mrt
