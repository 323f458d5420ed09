#include <doctest.h>

#include <random>
#include <sstream>

#include "mrt/field_ops.hpp"
#include "mrt/recovery.hpp"
#include "mrt/tensor_algebra.hpp"

using namespace mrt;

namespace {

SeparableBump pipeline_bump(double cx = 0.0, double cy = 0.0) {
  SeparableBump b;
  b.axes = {BumpProfile{cx, 0.12, 0.42, 1.0}, BumpProfile{cy, 0.12, 0.42, 1.0}, BumpProfile{0.6, 0.12, 0.55, 1.5}};
  return b;
}

CoefficientSet m3_set(const GridGeometry& g) {
  CoefficientSet set = zero_coefficients(3, g);
  return set;
}

}  // namespace

TEST_CASE("coefficient set: validation, zero detection, generator materialization") {
  const GridGeometry g = shipped_half_grid(16);
  CoefficientSet set = zero_coefficients(2, g);
  CHECK(set.is_zero());
  set.validate();

  // the materialized top order is partially isotropic pointwise
  SeparableBump bump = pipeline_bump();
  set.wbar = sample_scalar_bump(g, bump);
  CHECK(!set.is_zero());
  GridField wm = set.materialize_wm();
  CHECK(wm.rank() == 2);
  double worst = 0;
  for (std::size_t p = 0; p < g.num_points(); p += 53) {
    worst = std::max(worst, isotropy_project(wm.tensor_copy(p)).residual);
  }
  CHECK(worst < 1e-12);

  CoefficientSet bad = zero_coefficients(2, g);
  bad.w.pop_back();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(zero_coefficients(1, g), std::invalid_argument);
}

TEST_CASE("extension: reflection commutes with the i_delta lift") {
  const GridGeometry g = shipped_half_grid(16);
  CoefficientSet set = zero_coefficients(2, g);
  set.wbar = sample_scalar_bump(g, pipeline_bump(0.05, -0.04));
  const ExtendedCoefficientSet ext = extend(set);

  GridField route_a = ext.wm;                              // i_delta after reflection
  GridField route_b = reflect_extend(set.materialize_wm());  // reflection after i_delta
  REQUIRE(route_a.geom().same_as(route_b.geom()));
  double worst = 0;
  for (std::size_t i = 0; i < route_a.data().size(); ++i)
    worst = std::max(worst, std::abs(route_a.data()[i] - route_b.data()[i]));
  CHECK(worst == 0.0);
}

TEST_CASE("limiting_integral: zero data, exact linearity") {
  const GridGeometry g = shipped_half_grid(16);
  const ExtendedCoefficientSet ext0 = extend(zero_coefficients(2, g));
  const PhaseBundle bundle = build_phases(RVec{0, 0, 1}, RVec{1, 0, 0}, RVec{0, 2, 0}, 0.1);
  const RotatedFrame frame = RotatedFrame::from_eta(RVec{0, 1, 0});
  const Amplitude unit{frame, Complex{1, 0}, 0, 0.0, std::nullopt};

  const LimitTerms t0 = limiting_integral(ext0, bundle, unit, unit, 0);
  CHECK(t0.total() == Complex{0.0, 0.0});
  CHECK(t0.main_zero == Complex{0.0, 0.0});

  CoefficientSet set = shipped_bump_set(2, g);
  const ExtendedCoefficientSet ext = extend(set);
  CoefficientSet scaled = set;
  for (GridField& f : scaled.w) f *= Complex{0.0, 2.0};
  scaled.wbar *= Complex{0.0, 2.0};
  const ExtendedCoefficientSet ext2 = extend(scaled);

  const LimitTerms ta = limiting_integral(ext, bundle, unit, unit, 0);
  const LimitTerms tb = limiting_integral(ext2, bundle, unit, unit, 0);
  CHECK(std::abs(tb.total() - Complex{0.0, 2.0} * ta.total()) < 1e-12 * std::max(1.0, std::abs(ta.total())));

  // mu2 with a normal component is rejected for the reflected identity
  const PhaseBundle badmu = build_phases(RVec{1, 0, 0}, RVec{0, 0, 1}, RVec{0, 2, 0}, 0.1);
  CHECK_THROWS_WITH_AS(limiting_integral(ext, badmu, unit, unit, 0), doctest::Contains("mu2_n"), std::invalid_argument);
}

TEST_CASE("limiting_integral: zero-order term reproduces the Fourier integral") {
  const GridGeometry g = shipped_half_grid(32);
  const ExtendedCoefficientSet ext = extend(zero_order_only_set(2, g));
  const RotatedFrame frame = RotatedFrame::from_eta(RVec{0, 1, 0});
  const Amplitude unit{frame, Complex{1, 0}, 0, 0.0, std::nullopt};

  // independent oracle: plain Riemann sum of W^0 e^{i x.xi} on the doubled grid
  const RVec xi{0.0, 2.0, 0.0};
  Complex oracle = 0;
  const GridGeometry& eg = ext.geom();
  double dV = 1.0;
  for (int a = 0; a < 3; ++a) dV *= eg.spacing[a];
  std::array<double, 3> x;
  for (std::size_t p = 0; p < eg.num_points(); ++p) {
    eg.point(p, x);
    oracle += ext.order(0).at(p, 0) * std::exp(kI * dot(x, xi)) * dV;
  }

  const PhaseBundle bundle = build_phases(RVec{0, 0, 1}, RVec{1, 0, 0}, xi, 0.05);
  const LimitTerms t = limiting_integral(ext, bundle, unit, unit, 0);
  CHECK(std::abs(t.main_zero - oracle) < 1e-12 * std::abs(oracle));
  // at h = 0.05 the only deviation is the Riemann-Lebesgue cross term
  CHECK(std::abs(t.total() - oracle) < 1e-4 * std::abs(oracle));
  CHECK(std::abs(std::abs(t.total() - oracle) - std::abs(t.cross_zero)) < 1e-9 * std::abs(t.cross_zero));
}

TEST_CASE("decay sweep: cross terms fall under the halving threshold") {
  const ExtendedCoefficientSet ext = extend(shipped_bump_set(2, shipped_half_grid(32)));
  const RVec hs{0.2, 0.1, 0.05, 0.025};
  const auto rows = decay_sweep(ext, RVec{0, 0, 1}, RVec{1, 0, 0}, RVec{0, 2, 0}, hs);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].cross_tensor < 0.7 * rows[i - 1].cross_tensor);
    CHECK(rows[i].cross_zero < 0.7 * rows[i - 1].cross_zero);
  }
}

TEST_CASE("step1_extract: null-vector invariance and defect detection") {
  const GridGeometry g = shipped_half_grid(20);

  // m = 3 with W^2 planted in the i_delta range: all data vanish
  CoefficientSet set = m3_set(g);
  GridField gen = sample_scalar_bump(g, pipeline_bump(0.03, -0.02));
  set.w[2] = planted_isotropic_field(gen);
  const ExtendedCoefficientSet ext = extend(set);
  const auto dirs = eta_circle(16);
  const BumpProfile gprof = pipeline_g_profile(0.0);
  const double scale = ext.order(2).max_abs() * ext.order(2).support_volume();
  double worst = 0;
  for (const auto& d : dirs) {
    for (int k = 0; k <= 2; ++k) {
      for (double lam : {-1.0, 0.0, 0.5})
        worst = std::max(worst, std::abs(step1_extract(ext, d, k, lam, &gprof)));
    }
  }
  CHECK(worst < 1e-9 * scale);

  // adding another i_delta-range field does not move the data
  CoefficientSet set2 = set;
  GridField gen2 = sample_scalar_bump(g, pipeline_bump(-0.05, 0.04));
  gen2 *= Complex{0.0, 1.3};
  set2.w[2] += planted_isotropic_field(gen2);
  const ExtendedCoefficientSet ext2 = extend(set2);
  double drift = 0;
  for (const auto& d : dirs) {
    drift = std::max(drift, std::abs(step1_extract(ext2, d, 1, 0.5, &gprof) - step1_extract(ext, d, 1, 0.5, &gprof)));
  }
  CHECK(drift < 1e-9 * scale);

  // a trace-bearing (non-isotropic) plant is seen well above the floor
  CoefficientSet set3 = m3_set(g);
  const std::size_t ncomp = SymLayout::get(3, 2)->size();
  CVec coeffs(ncomp, Complex{0, 0});
  coeffs[0] = Complex{1.0, 0.0};   // (1,1)
  coeffs[3] = Complex{-1.0, 0.0};  // (2,2)
  set3.w[2] = sample_tensor_bump(g, 2, pipeline_bump(0.0, 0.0), coeffs);
  const ExtendedCoefficientSet ext3 = extend(set3);
  double best = 0;
  for (const auto& d : dirs) {
    for (int k = 0; k <= 2; ++k) best = std::max(best, std::abs(step1_extract(ext3, d, k, 0.0, &gprof)));
  }
  const double scale3 = ext3.order(2).max_abs() * ext3.order(2).support_volume();
  CHECK(best > 1e-3 * scale3);

  CHECK_THROWS_AS(step1_extract(ext, dirs[0], 3, 0.0, &gprof), std::invalid_argument);
}

TEST_CASE("finite-h limiting integral converges to the step-1 limit form") {
  // With mu2 = e1, mu1 = eta and xi = 0 the rotated frame is the identity
  // and psi_grad = mu1 exactly, so h^{m-1} times the identity's tensor term
  // equals the extracted moment at every h; the deviation is purely the
  // Riemann-Lebesgue cross group and has to shrink with h.
  const GridGeometry g = shipped_half_grid(32);
  const CoefficientSet set = planted_w1_set(g);  // m = 2, only W^1 nonzero
  const ExtendedCoefficientSet ext = extend(set);
  const auto eta = make_direction(RVec{0.0, 0.0, 1.0});
  const RotatedFrame frame = RotatedFrame::from_eta(eta.eta);
  const int k = 1;
  const double lambda = 0.5;
  const BumpProfile gw = pipeline_g_profile(0.0);
  auto [a0, b0bar] = amplitude_family(2, 0, k, lambda, gw, frame);

  // the limit form carries (-i)^{m-1} from the conjugation factors and
  // (2i)^k from (z - zbar)^k = (2i y2)^k
  const Complex scan_val = step1_extract(ext, eta, k, lambda, &gw);
  const Complex want = -kI * std::pow(2.0 * kI, k) * scan_val;
  REQUIRE(std::abs(want) > 1e-12);

  double prev = 1e300;
  for (double h : {0.2, 0.1, 0.05, 0.025}) {
    const PhaseBundle b = build_phases(eta.eta, RVec{1.0, 0.0, 0.0}, RVec{0.0, 0.0, 0.0}, h);
    const LimitTerms t = limiting_integral(ext, b, a0, b0bar, 0);
    const Complex got = h * t.total();
    const double rel = std::abs(got - want) / std::abs(want);
    CHECK(rel < prev);
    prev = rel;
  }
  CHECK(prev < 1e-5);
}

TEST_CASE("lambda_derivative: analytic insertion matches finite differences") {
  const GridGeometry g = shipped_half_grid(20);
  CoefficientSet set = zero_coefficients(2, g);
  const CVec coeffs{Complex{0.9, 0.1}, Complex{0.4, 0.0}, Complex{-0.3, 0.2}};
  set.w[1] = sample_tensor_bump(g, 1, pipeline_bump(0.0, 0.0), coeffs);
  const ExtendedCoefficientSet ext = extend(set);
  const auto dirs = eta_circle(6);
  const BumpProfile gprof = pipeline_g_profile(0.1);

  const MomentScan scan = make_moment_scan(ext.order(1), dirs[1]);
  MomentFamily fam{&scan, 0, &gprof};

  // r = 0 is the family value itself
  CHECK(lambda_derivative(fam, 0) == fam.value(0.0));

  // r = 1 against a central difference of the tilt family
  const double dlam = 1e-3;
  const Complex fd = (fam.value(0.0, dlam) - fam.value(0.0, -dlam)) / (2 * dlam);
  const Complex an = lambda_derivative(fam, 1);
  CHECK(std::abs(an - fd) < 1e-6 * std::max(1.0, std::abs(an)));

  // vanishing family has vanishing derivatives
  const ExtendedCoefficientSet ext0 = extend(zero_coefficients(2, g));
  const MomentScan scan0 = make_moment_scan(ext0.order(1), dirs[1]);
  MomentFamily fam0{&scan0, 0, &gprof};
  for (int r = 0; r <= 2; ++r) CHECK(lambda_derivative(fam0, r) == Complex{0.0, 0.0});
}

TEST_CASE("induction_driver: zero sets pass with the expected stage plan") {
  RecoveryTolerances tol;
  tol.with_h_sweep = false;

  const RecoveryReport r2 = induction_driver(zero_coefficients(2, shipped_half_grid(12)), tol);
  CHECK(r2.equal);
  REQUIRE(r2.stages.size() == 3);
  CHECK(r2.stages[0].label == "W1");
  CHECK(r2.stages[1].label == "Wbar0");
  CHECK(r2.stages[2].label == "W0");
  for (const auto& s : r2.stages) CHECK(s.max_moment <= 1e-10);
  CHECK(r2.kappa1 == 4.0);

  const RecoveryReport r3 = induction_driver(zero_coefficients(3, shipped_half_grid(12)), tol);
  CHECK(r3.equal);
  REQUIRE(r3.stages.size() == 5);
  CHECK(r3.stages[0].label == "W2");
  CHECK(r3.stages[1].label == "Wbar1");
  CHECK(r3.stages[2].label == "W1");
  CHECK(r3.stages[3].label == "V(2,1)");
  CHECK(r3.stages[4].label == "W0");
}

TEST_CASE("induction_driver: planted defects are flagged at the right stage") {
  const GridGeometry g = shipped_half_grid(20);
  RecoveryTolerances tol;
  tol.with_h_sweep = false;

  const RecoveryReport rw1 = induction_driver(planted_w1_set(g), tol);
  CHECK(!rw1.equal);
  REQUIRE(rw1.stages.size() == 3);
  CHECK(!rw1.stages[0].passed);  // (1,0): order m-1 data
  CHECK(rw1.stages[0].bad_k >= 0);
  CHECK(rw1.stages[1].passed);
  CHECK(rw1.stages[2].passed);

  const RecoveryReport rwb = induction_driver(planted_wbar_set(g), tol);
  CHECK(!rwb.equal);
  CHECK(rwb.stages[0].passed);
  CHECK(!rwb.stages[1].passed);  // (1,1): the a0 = (z-zbar) stage
  CHECK(rwb.stages[2].passed);

  // detection monotonicity: scaling the defect scales the stage moment
  CoefficientSet big = planted_w1_set(g);
  big.w[1] *= Complex{3.0, 0.0};
  const RecoveryReport rbig = induction_driver(big, tol);
  CHECK(std::abs(rbig.stages[0].max_moment - 3.0 * rw1.stages[0].max_moment) <=
        1e-10 * std::max(1.0, rbig.stages[0].max_moment));
}

TEST_CASE("induction_driver: witness chain carries a hidden defect to depth") {
  // m = 3 with W^2 = i_delta(v), v a nonzero scalar bump: Step 1 moments
  // vanish (null contraction) and record v as the witness; the descent must
  // then flag v itself at the a0 = (z-zbar) depth of the next round.
  const GridGeometry g = shipped_half_grid(20);
  CoefficientSet set = zero_coefficients(3, g);
  SeparableBump vb = pipeline_bump(0.02, -0.03);
  vb.amplitude = Complex{0.8, 0.1};
  set.w[2] = planted_isotropic_field(sample_scalar_bump(g, vb));

  RecoveryTolerances tol;
  tol.with_h_sweep = false;
  const RecoveryReport rep = induction_driver(set, tol);
  CHECK(!rep.equal);
  REQUIRE(rep.stages.size() == 5);
  CHECK(rep.stages[0].label == "W2");
  CHECK(rep.stages[0].passed);  // moments vanish, witness recorded
  CHECK(rep.stages[0].has_witness);
  CHECK(rep.stages[0].witness_residual < 1e-9);
  CHECK(rep.stages[1].passed);
  CHECK(rep.stages[2].passed);
  CHECK(rep.stages[3].label == "V(2,1)");
  CHECK(!rep.stages[3].passed);  // the generator itself is nonzero
  CHECK(rep.stages[4].passed);
}

TEST_CASE("recovery report: writers carry verdicts and stage keys") {
  RecoveryTolerances tol;
  tol.with_h_sweep = false;
  const RecoveryReport rep = induction_driver(planted_w1_set(shipped_half_grid(20)), tol);

  std::stringstream text;
  rep.write_text(text);
  CHECK(text.str().find("different") != std::string::npos);
  CHECK(text.str().find("W1") != std::string::npos);

  std::stringstream csv;
  rep.write_stage_csv(csv);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "j,l,field,rank,kappa,max_moment,scale,threshold,passed,bad_k,bad_eta,bad_lambda,bad_g,witness_residual");
}
