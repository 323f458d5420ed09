#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "mrt/bump.hpp"
#include "mrt/ray_transform.hpp"
#include "oracles.hpp"

using namespace mrt;

namespace {

GridGeometry cube(int res) {
  return make_grid({res + 1, res + 1, res + 1}, {-0.5, -0.5, -0.5}, {1.0 / res, 1.0 / res, 1.0 / res});
}

Ray random_ray(std::mt19937_64& rng, double base_span = 0.25) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Ray r;
  r.base = {base_span * uni(rng), base_span * uni(rng), base_span * uni(rng)};
  r.dir = {uni(rng) + 1.4, uni(rng), uni(rng)};
  return r;
}

}  // namespace

TEST_CASE("ray_transform: zero fields, misses, and bad input") {
  const GridGeometry g = cube(16);
  GridField zero(g, 1);
  std::mt19937_64 rng(1);
  CHECK(ray_transform(zero, random_ray(rng)) == Complex{0.0, 0.0});

  GridField f = random_tensor_bump(g, 0, default_bump(g), rng);
  Ray miss;
  miss.base = {5.0, 5.0, 5.0};
  miss.dir = {0.0, 0.0, 1.0};
  CHECK(ray_transform(f, miss) == Complex{0.0, 0.0});

  Ray degenerate;
  degenerate.base = {0, 0, 0};
  degenerate.dir = {0, 0, 0};
  CHECK_THROWS_AS(ray_transform(f, degenerate), std::invalid_argument);
}

TEST_CASE("ray_transform: separable bump along a grid axis matches the 1-D oracle") {
  const GridGeometry g = cube(32);
  SeparableBump bump = default_bump(g);
  GridField f = sample_scalar_bump(g, bump);

  // axis-aligned ray through node coordinates: interpolation transverse to
  // the ray is exact, so only the 1-D quadrature error remains
  const double c2 = g.coord(1, 20), c3 = g.coord(2, 14);
  Ray ray;
  ray.base = {0.0, c2, c3};
  ray.dir = {1.0, 0.0, 0.0};
  const double want1d = oracle::simpson([&](double t) { return bump.axes[0].value(t); }, -0.5, 0.5);
  const Complex want = want1d * bump.axes[1].value(c2) * bump.axes[2].value(c3);
  const Complex got = ray_transform(f, ray);
  CHECK(std::abs(got - want) < 2e-5 * std::max(1.0, std::abs(want)));

  // an oblique ray carries the generic O(spacing^2) interpolation error
  Ray oblique;
  oblique.base = {0.013, -0.041, 0.007};
  oblique.dir = {1.0, 0.37, -0.22};
  const double t0 = -0.7, t1 = 0.7;
  const double want_obl = oracle::simpson(
      [&](double t) {
        const double x[3] = {oblique.base[0] + t * oblique.dir[0], oblique.base[1] + t * oblique.dir[1],
                             oblique.base[2] + t * oblique.dir[2]};
        return bump.axes[0].value(x[0]) * bump.axes[1].value(x[1]) * bump.axes[2].value(x[2]);
      },
      t0, t1);
  const Complex got_obl = ray_transform(f, oblique);
  const double sp2 = g.spacing[0] * g.spacing[0];
  CHECK(std::abs(got_obl - want_obl) < 20.0 * sp2 * std::max(1.0, std::abs(want_obl)));
}

TEST_CASE("momentum_transform: k=0 equality, odd integrand, k cap") {
  const GridGeometry g = cube(24);
  std::mt19937_64 rng(3);
  GridField f = random_tensor_bump(g, 1, default_bump(g), rng);
  const Ray ray = random_ray(rng);
  CHECK(momentum_transform(f, ray, 0) == ray_transform(f, ray));

  // scalar field even about the ray base along the ray: first moment vanishes
  SeparableBump bump = default_bump(g);
  GridField fe = sample_scalar_bump(g, bump);
  Ray centered;
  centered.base = {bump.axes[0].center, bump.axes[1].center, bump.axes[2].center};
  centered.dir = {1.0, 0.0, 0.0};
  CHECK(std::abs(momentum_transform(fe, centered, 1)) < 1e-12);

  CHECK_THROWS_AS(momentum_transform(f, ray, 9), std::invalid_argument);
  CHECK_THROWS_AS(momentum_transform(f, ray, -1), std::invalid_argument);
}

TEST_CASE("momentum_transform: shift identity against direct quadrature") {
  const GridGeometry g = cube(32);
  std::mt19937_64 rng(7);
  GridField f = random_tensor_bump(g, 0, default_bump(g), rng);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double worst = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const Ray ray = random_ray(rng);
    const double a = 0.3 * uni(rng);
    Ray shifted = ray;
    for (int ax = 0; ax < 3; ++ax) shifted.base[ax] += a * ray.dir[ax];
    for (int k = 0; k <= 3; ++k) {
      const Complex lhs = momentum_transform(f, shifted, k);
      Complex rhs = 0;
      for (int j = 0; j <= k; ++j)
        rhs += static_cast<double>(binomial(k, j)) * std::pow(-a, k - j) * momentum_transform(f, ray, j);
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("momentum_transform: homogeneity in the field is exact") {
  const GridGeometry g = cube(16);
  std::mt19937_64 rng(11);
  GridField f = random_tensor_bump(g, 1, default_bump(g), rng);
  GridField f2 = f;
  const Complex alpha{1.75, -0.25};
  f2 *= alpha;
  const Ray ray = random_ray(rng);
  for (int k = 0; k <= 2; ++k) {
    CHECK(std::abs(momentum_transform(f2, ray, k) - alpha * momentum_transform(f, ray, k)) < 1e-15);
  }
}

TEST_CASE("restricted_moment: unit-sphere restriction of the momentum transform") {
  const GridGeometry g = cube(20);
  std::mt19937_64 rng(13);
  GridField f = random_tensor_bump(g, 1, default_bump(g), rng);
  for (int rep = 0; rep < 10; ++rep) {
    Ray ray = random_ray(rng);
    const double len = norm2(ray.dir);
    for (double& d : ray.dir) d /= len;
    for (int k = 0; k <= 2; ++k) CHECK(restricted_moment(f, ray, k) == momentum_transform(f, ray, k));
  }
  Ray bad = random_ray(rng);
  bad.dir = {1.1, 0.0, 0.0};
  CHECK_THROWS_AS(restricted_moment(f, bad, 0), std::invalid_argument);
}

TEST_CASE("poly_moment: component sums, linearity, grid mismatch") {
  const GridGeometry g = cube(20);
  std::mt19937_64 rng(17);
  TensorPolyField F;
  for (int p = 0; p <= 2; ++p) F.comps.push_back(random_tensor_bump(g, p, default_bump(g), rng));
  const Ray ray = random_ray(rng);

  // equals the componentwise sum of separate transforms
  for (int k = 0; k <= 2; ++k) {
    Complex want = 0;
    for (const GridField& f : F.comps) want += momentum_transform(f, ray, k);
    CHECK(poly_moment(F, ray, k) == want);
  }

  // only f^(0): reduces to the scalar transform
  TensorPolyField F0;
  F0.comps.push_back(F.comps[0]);
  CHECK(poly_moment(F0, ray, 1) == momentum_transform(F.comps[0], ray, 1));

  // linearity
  TensorPolyField G;
  for (int p = 0; p <= 2; ++p) G.comps.push_back(random_tensor_bump(g, p, default_bump(g), rng));
  TensorPolyField FG;
  for (int p = 0; p <= 2; ++p) {
    GridField s = F.comps[p];
    s += G.comps[p];
    FG.comps.push_back(std::move(s));
  }
  CHECK(std::abs(poly_moment(FG, ray, 1) - (poly_moment(F, ray, 1) + poly_moment(G, ray, 1))) < 1e-14);

  // mismatched grids are rejected
  TensorPolyField bad;
  bad.comps.push_back(random_tensor_bump(g, 0, default_bump(g), rng));
  bad.comps.push_back(random_tensor_bump(cube(16), 1, default_bump(cube(16)), rng));
  CHECK_THROWS_AS(poly_moment(bad, ray, 0), std::invalid_argument);
}

TEST_CASE("ray batch csv: round trip with results") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "mrt_ray_batch_test";
  fs::create_directories(dir);
  const std::string in = (dir / "rays.csv").string();
  const std::string out = (dir / "rays_out.csv").string();
  {
    std::ofstream os(in);
    os << "x1,x2,x3,xi1,xi2,xi3,k\n";
    os << "0,0,0,1,0.5,0.25,0\n";
    os << "0.1,-0.2,0,0,1,0,2\n";
  }
  auto batch = read_ray_batch(in, 3);
  REQUIRE(batch.size() == 2);
  CHECK(batch[1].k == 2);
  CHECK(batch[1].ray.base[1] == -0.2);

  CVec values{Complex{1.5, -0.5}, Complex{0.0, 2.0}};
  write_ray_batch_results(out, batch, values);
  std::ifstream is(out);
  std::string header, row1;
  std::getline(is, header);
  std::getline(is, row1);
  CHECK(header == "x1,x2,x3,xi1,xi2,xi3,k,re,im");
  CHECK(row1.find(",1.5,-0.5") != std::string::npos);
  fs::remove_all(dir);
}
