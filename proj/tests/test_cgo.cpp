#include <doctest.h>

#include <random>

#include "mrt/bump.hpp"
#include "mrt/cgo.hpp"
#include "mrt/recovery.hpp"
#include "mrt/field_ops.hpp"

using namespace mrt;

namespace {

PhaseBundle reference_bundle(double h = 0.1) {
  return build_phases(RVec{0, 0, 1}, RVec{1, 0, 0}, RVec{0, 2, 0}, h);
}

}  // namespace

TEST_CASE("build_phases: closed forms and eikonal identities") {
  const PhaseBundle b = reference_bundle(0.1);
  // psi gradient = h xi/2 + sqrt(1 - h^2 |xi|^2/4) mu1
  CHECK(b.psi_grad[0] == 0.0);
  CHECK(b.psi_grad[1] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(b.psi_grad[2] == doctest::Approx(std::sqrt(1.0 - 0.01)).epsilon(1e-14));
  // eikonal: |grad phi| = |grad psi|, grad phi . grad psi = 0
  CHECK(std::abs(norm2(b.mu2) - norm2(b.psi_grad)) < 1e-15);
  CHECK(std::abs(dot(b.mu2, b.psi_grad)) < 1e-15);
  // phases evaluate as affine forms
  RVec x{0.3, -0.2, 0.5};
  CHECK(b.phi(x) == doctest::Approx(0.3));
  CHECK(b.psi(x) == doctest::Approx(dot(b.psi_grad, x)));

  // h -> 0: the psi direction collapses onto mu1
  const PhaseBundle tiny = reference_bundle(1e-8);
  CHECK(std::abs(tiny.psi_grad[2] - 1.0) < 1e-12);
}

TEST_CASE("build_phases: violated constraints are named") {
  CHECK_THROWS_WITH_AS(build_phases(RVec{0, 0, 1}, RVec{0, 0, 1}, RVec{0, 2, 0}, 0.1), doctest::Contains("orthogonal"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(build_phases(RVec{0, 0, 2}, RVec{1, 0, 0}, RVec{0, 2, 0}, 0.1), doctest::Contains("unit"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(build_phases(RVec{0, 0, 1}, RVec{1, 0, 0}, RVec{0, 2, 0}, -1.0), doctest::Contains("positive"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(build_phases(RVec{0, 0, 1}, RVec{1, 0, 0}, RVec{0, 25, 0}, 0.1), doctest::Contains("h|xi|"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(build_phases(RVec{0, 0, 1}, RVec{1, 0, 0}, RVec{0, 2, 0.5}, 0.1), doctest::Contains("xi"),
                       std::invalid_argument);
}

TEST_CASE("zeta vectors: null products and the closure relation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int rep = 0; rep < 40; ++rep) {
    // random orthonormal (mu1, mu2) and xi orthogonal to both, via Gram-Schmidt
    RVec a{uni(rng), uni(rng), uni(rng)}, b{uni(rng), uni(rng), uni(rng)}, c{uni(rng), uni(rng), uni(rng)};
    const double na = norm2(a);
    for (double& v : a) v /= na;
    const double ab = dot(a, b);
    for (int i = 0; i < 3; ++i) b[i] -= ab * a[i];
    const double nb = norm2(b);
    if (nb < 1e-3) continue;
    for (double& v : b) v /= nb;
    const double ca = dot(c, a), cb = dot(c, b);
    for (int i = 0; i < 3; ++i) c[i] -= ca * a[i] + cb * b[i];
    const double h = 0.05 + 0.3 * std::abs(uni(rng));

    const PhaseBundle bun = build_phases(a, b, c, h);
    CHECK(std::abs(cdot(bun.zeta1, bun.zeta1)) < 1e-13);
    CHECK(std::abs(cdot(bun.zeta2, bun.zeta2)) < 1e-13);
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(bun.zeta1[i] + std::conj(bun.zeta2[i]) - kI * h * bun.xi[i]) < 1e-13);
  }
}

TEST_CASE("exp_products: the four identities hold pointwise") {
  const PhaseBundle b = reference_bundle(0.07);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double worst = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    RVec x{uni(rng), uni(rng), uni(rng)};
    const ExpProducts p = exp_products(b, x);
    const double s = std::max({1.0, std::abs(p.pair_exp), std::abs(p.cross_ab_exp)});
    worst = std::max(worst, std::abs(p.pair_exp - p.pair_closed) / s);
    worst = std::max(worst, std::abs(p.cross_ab_exp - p.cross_ab_closed) / s);
    worst = std::max(worst, std::abs(p.cross_ba_exp - p.cross_ba_closed) / s);
    worst = std::max(worst, std::abs(p.starred_exp - p.starred_closed) / s);
  }
  CHECK(worst < 1e-10);

  // with mu2_n = 0 the cross oscillations are unimodular
  RVec x{0.2, 0.4, 0.9};
  const ExpProducts p = exp_products(b, x);
  CHECK(std::abs(p.cross_ab_closed.real()) < 1e-14);
  CHECK(std::abs(p.cross_ba_closed.real()) < 1e-14);
  // identity 1 is e^{i x.xi}
  CHECK(std::abs(p.pair_closed - kI * dot(x, b.xi)) < 1e-15);

  // on the interface x_n = 0 the cross products reduce to e^{i x'.xi'}
  RVec xi0{0.1, -0.3, 0.0};
  const ExpProducts q = exp_products(b, xi0);
  CHECK(std::abs(q.cross_ab_closed - q.pair_closed) < 1e-14);
  CHECK(std::abs(q.cross_ba_closed - q.pair_closed) < 1e-14);
}

TEST_CASE("exp_products: growing exponentials stay representable in log space") {
  // mu2 along the interface normal: the cross terms really grow
  const PhaseBundle b = build_phases(RVec{1, 0, 0}, RVec{0, 0, 1}, RVec{0, 2, 0}, 1e-4);
  RVec x{0.1, 0.2, 50.0};
  const ExpProducts p = exp_products(b, x);
  // exponent real part ~ 2 x_n / h = 1e6: e^{...} overflows, the exponent does not
  CHECK(std::isfinite(p.cross_ab_exp.real()));
  CHECK(p.cross_ab_exp.real() > 1e5);
  CHECK(std::abs(p.cross_ab_exp - p.cross_ab_closed) < 1e-10 * std::abs(p.cross_ab_exp));
}

TEST_CASE("reflection: extension parity, evenness of q, involution") {
  const GridGeometry g = make_grid({9, 9, 9}, {-0.5, -0.5, 0.0}, {0.125, 0.125, 0.125});
  std::mt19937_64 rng(7);
  SeparableBump bump;
  bump.axes = {BumpProfile{0.0, 0.1, 0.3, 1.0}, BumpProfile{0.0, 0.1, 0.3, 1.0}, BumpProfile{0.55, 0.08, 0.25, 1.0}};

  // rank 1: normal component odd, tangential components even
  GridField a = random_tensor_bump(g, 1, bump, rng);
  GridField ext = reflect_extend(a);
  const GridGeometry& eg = ext.geom();
  CHECK(eg.dims[2] == 17);
  CHECK(eg.origin[2] == doctest::Approx(-1.0));
  std::array<int, kMaxDim> idx;
  for (std::size_t p = 0; p < eg.num_points(); ++p) {
    eg.unflat(p, std::span<int>(idx.data(), 3));
    auto mir = idx;
    mir[2] = eg.dims[2] - 1 - idx[2];
    const std::size_t q = eg.flat(std::span<const int>(mir.data(), 3));
    CHECK(ext.at(p, 0) == ext.at(q, 0));
    CHECK(ext.at(p, 1) == ext.at(q, 1));
    CHECK(ext.at(p, 2) == -ext.at(q, 2));
  }

  // involution back to the upper half
  GridField back = restrict_upper_half(ext);
  CHECK(back.geom().same_as(g));
  for (std::size_t i = 0; i < a.data().size(); ++i) CHECK(a.data()[i] == back.data()[i]);

  // rank 0 extends evenly
  GridField q0 = sample_scalar_bump(g, bump);
  GridField q0e = reflect_extend(q0);
  for (std::size_t p = 0; p < eg.num_points(); ++p) {
    eg.unflat(p, std::span<int>(idx.data(), 3));
    auto mir = idx;
    mir[2] = eg.dims[2] - 1 - idx[2];
    CHECK(q0e.at(p, 0) == q0e.at(eg.flat(std::span<const int>(mir.data(), 3)), 0));
  }

  // rank 2: two normal indices flip twice, mixed entries are odd
  GridField a2 = random_tensor_bump(g, 2, bump, rng);
  GridField ext2 = reflect_extend(a2);
  const int i33[2] = {2, 2}, i13[2] = {0, 2};
  for (std::size_t p = 0; p < eg.num_points(); p += 11) {
    eg.unflat(p, std::span<int>(idx.data(), 3));
    auto mir = idx;
    mir[2] = eg.dims[2] - 1 - idx[2];
    const std::size_t q = eg.flat(std::span<const int>(mir.data(), 3));
    CHECK(ext2.tensor_copy(p).at(i33) == ext2.tensor_copy(q).at(i33));
    CHECK(ext2.tensor_copy(p).at(i13) == -ext2.tensor_copy(q).at(i13));
  }
}

TEST_CASE("reflection: support touching the interface is rejected") {
  const GridGeometry g = make_grid({9, 9, 9}, {-0.5, -0.5, 0.0}, {0.125, 0.125, 0.125});
  GridField a(g, 0);
  // put mass into the first plane above the interface
  std::array<int, 3> idx{4, 4, 1};
  a.at(g.flat(idx), 0) = 1.0;
  CHECK_THROWS_WITH_AS(reflect_extend(a), doctest::Contains("interface"), std::invalid_argument);

  // off-interface grids are rejected up front
  const GridGeometry shifted = make_grid({9, 9, 9}, {-0.5, -0.5, 0.3}, {0.125, 0.125, 0.125});
  GridField b(shifted, 0);
  CHECK_THROWS_WITH_AS(reflect_extend(b), doctest::Contains("origin"), std::invalid_argument);
}

TEST_CASE("rotated frame: construction and the complex coordinate") {
  const auto frame = RotatedFrame::from_eta(RVec{0.0, 0.6, 0.8});
  RVec x{0.3, 0.5, -0.2};
  CHECK(frame.y1(x) == doctest::Approx(0.3));
  CHECK(frame.y2(x) == doctest::Approx(0.5 * 0.6 - 0.2 * 0.8));
  CHECK(frame.z(x) == Complex{frame.y1(x), frame.y2(x)});
  // transverse coordinate completes the orthonormal triple
  CHECK(std::abs(frame.ypp(x, 0) - (-0.5 * 0.8 - 0.2 * 0.6)) < 1e-15);

  CHECK_THROWS_AS(RotatedFrame::from_eta(RVec{0.0, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_WITH_AS(RotatedFrame::from_basis({RVec{1, 0, 0}, RVec{1, 0, 0}, RVec{0, 0, 1}}),
                       doctest::Contains("orthonormal"), std::invalid_argument);
}

TEST_CASE("transport: closed forms, nilpotence, holomorphic kernels") {
  const auto frame = RotatedFrame::from_eta(RVec{0.0, 1.0, 0.0});

  // T(z - zbar) is a nonzero constant; only nonvanishing and nilpotence matter
  Amplitude zz{frame, Complex{1.0, 0.0}, 1, 0.0, std::nullopt};
  const Amplitude Tzz = transport_apply(frame, zz);
  CHECK(Tzz.power == 0);
  CHECK(Tzz.coeff == Complex{-4.0, 0.0});
  const Amplitude TTzz = transport_apply(frame, Tzz);
  CHECK(std::abs(TTzz.coeff) == 0.0);

  // constants are annihilated
  Amplitude one{frame, Complex{1.0, 0.0}, 0, 0.0, std::nullopt};
  CHECK(std::abs(transport_apply(frame, one).coeff) == 0.0);

  // grid mode: a holomorphic-in-z amplitude times g(y'') sits in the kernel
  const GridGeometry g = make_grid({33, 33, 33}, {-0.5, -0.5, -0.5}, {1.0 / 32, 1.0 / 32, 1.0 / 32});
  GridField fz(g, 0);
  std::array<double, 3> x;
  const BumpProfile prof{0.0, 0.2, 0.45, 1.0};
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    g.point(p, x);
    const Complex z = frame.z(x);
    fz.at(p, 0) = (z * z + 2.0 * z) * prof.value(frame.ypp(x, 0));
  }
  GridField Tf = transport_apply(frame, fz);
  double worst = 0;
  std::array<int, kMaxDim> idx;
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    g.unflat(p, std::span<int>(idx.data(), 3));
    bool interior = true;
    for (int a = 0; a < 3; ++a) interior = interior && idx[a] > 0 && idx[a] < g.dims[a] - 1;
    if (interior) worst = std::max(worst, std::abs(Tf.at(p, 0)));
  }
  CHECK(worst < 10.0 * g.spacing[0] * g.spacing[0]);

  // bundle mode approaches the frame mode as h -> 0 on closed forms
  const PhaseBundle nearly = build_phases(RVec{0, 1, 0}, RVec{1, 0, 0}, RVec{0, 0, 2}, 1e-7);
  RVec pt{0.2, -0.1, 0.3};
  const Complex via_bundle = transport_apply_at(nearly, zz, pt);
  CHECK(std::abs(via_bundle - Complex{-4.0, 0.0}) < 1e-6);
}

TEST_CASE("amplitude_family: degenerate members and the dzbar ladder") {
  const auto frame = RotatedFrame::from_eta(RVec{0.0, 1.0, 0.0});

  auto [a0, b0] = amplitude_family(3, 0, 0, 0.0, std::nullopt, frame);
  RVec x{0.4, 0.1, -0.3};
  CHECK(a0.value(x) == Complex{1.0, 0.0});
  CHECK(b0.value(x) == Complex{1.0, 0.0});

  // l = m-1: dzbar^{m-1} a0 is a nonzero constant, dzbar^m a0 = 0
  const int m = 3;
  auto [am, bm] = amplitude_family(m, m - 1, 1, 0.25, pipeline_g_profile(0.0), frame);
  Amplitude d = am;
  for (int i = 0; i < m - 1; ++i) d = d.dbar();
  CHECK(d.power == 0);
  CHECK(std::abs(d.coeff) == 2.0);  // (m-1)! = 2
  CHECK(std::abs(d.dbar().coeff) == 0.0);

  CHECK_THROWS_AS(amplitude_family(2, 2, 0, 0.0, std::nullopt, frame), std::invalid_argument);
  CHECK_THROWS_AS(amplitude_family(2, 0, 2, 0.0, std::nullopt, frame), std::invalid_argument);
}

TEST_CASE("amplitude partials: exact derivatives match finite differences") {
  const auto frame = RotatedFrame::from_eta(RVec{0.0, 0.8, 0.6});
  Amplitude a{frame, Complex{0.7, 0.2}, 2, 0.8, pipeline_g_profile(0.1)};
  RVec x{0.25, -0.15, 0.35};
  const double eps = 1e-5;

  for (int ax = 0; ax < 3; ++ax) {
    RVec xp = x, xm = x;
    xp[ax] += eps;
    xm[ax] -= eps;
    const Complex fd = (a.value(xp) - a.value(xm)) / (2 * eps);
    const int axes[1] = {ax};
    CHECK(std::abs(a.partial(x, axes) - fd) < 1e-8 * (1.0 + std::abs(fd)));
  }
  // a mixed second partial
  {
    RVec xpp = x, xpm = x, xmp = x, xmm = x;
    xpp[0] += eps;
    xpp[2] += eps;
    xpm[0] += eps;
    xpm[2] -= eps;
    xmp[0] -= eps;
    xmp[2] += eps;
    xmm[0] -= eps;
    xmm[2] -= eps;
    const Complex fd = (a.value(xpp) - a.value(xpm) - a.value(xmp) + a.value(xmm)) / (4 * eps * eps);
    const int axes[2] = {0, 2};
    CHECK(std::abs(a.partial(x, axes) - fd) < 1e-5 * (1.0 + std::abs(fd)));
  }

  // the precomputed table agrees with the one-shot path
  AmplitudePartials table(a, 2);
  const int axes[2] = {0, 2};
  auto layout = table.order_layout(2);
  CHECK(std::abs(table.eval(x, 2, layout->position(axes)) - a.partial(x, axes)) < 1e-14);
}

TEST_CASE("conjugation factors: constants, zero amplitude, h-scaling") {
  const PhaseBundle b = reference_bundle(0.05);
  const auto frame = RotatedFrame::from_eta(RVec{0.0, 1.0, 0.0});
  RVec x{0.15, -0.2, 0.3};

  // j = 1 on the constant amplitude: (1/h) D(phi + i psi)
  Amplitude one{frame, Complex{1.0, 0.0}, 0, 0.0, std::nullopt};
  const int i2[1] = {1};
  const Complex want = (1.0 / b.h) * (-kI) * (Complex{b.mu2[1], b.psi_grad[1]});
  CHECK(std::abs(conjugation_apply(b, i2, one, x) - want) < 1e-13);

  // zero amplitude
  Amplitude zero{frame, Complex{0.0, 0.0}, 0, 0.0, std::nullopt};
  const int ij[2] = {0, 2};
  CHECK(std::abs(conjugation_apply(b, ij, zero, x)) == 0.0);

  // leading h-scaling: h^j * value converges to the pure phase product
  Amplitude amp{frame, Complex{1.0, 0.0}, 1, 0.0, std::nullopt};
  const int jj[2] = {1, 2};
  Complex prev_err{1e9, 0.0};
  for (double h : {1e-2, 1e-3, 1e-4}) {
    const PhaseBundle bh = build_phases(RVec{0, 0, 1}, RVec{1, 0, 0}, RVec{0, 2, 0}, h);
    Complex lead{1.0, 0.0};
    for (int t : jj) lead *= -kI * Complex{bh.mu2[t], bh.psi_grad[t]};
    const Complex scaled = std::pow(h, 2) * conjugation_apply(bh, jj, amp, x);
    const Complex err = scaled - lead * amp.value(x);
    CHECK(std::abs(err) < std::abs(prev_err));
    prev_err = err;
  }

  // grid route agrees with the closed form away from the boundary
  const GridGeometry g = make_grid({25, 25, 25}, {-0.5, -0.5, -0.5}, RVec(3, 1.0 / 24));
  GridField amp_grid = amp.sample(g);
  GridField applied = conjugation_apply(b, jj, amp_grid);
  std::array<int, 3> center{12, 12, 12};
  std::array<double, 3> xc;
  g.point(g.flat(center), xc);
  const Complex closed = conjugation_apply(b, jj, amp, std::span<const double>(xc.data(), 3));
  const Complex grid_val = applied.at(g.flat(center), 0);
  CHECK(std::abs(grid_val - closed) < 1e-8 * std::max(1.0, std::abs(closed)));
}
