#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "spinpair/compat.hpp"
#include "test_util.hpp"

using namespace spinpair;

TEST(Ensembles, TetrahedralGeometry) {
  const Ensemble e = ensemble_tetrahedral();
  ASSERT_EQ(e.states.size(), 4u);
  for (std::size_t a = 0; a < 4; ++a) {
    EXPECT_NEAR(e.states[a].vec().norm(), 1.0, 1e-15);
    EXPECT_GT(e.states[a].x() * e.states[a].y() * e.states[a].z(), 0.0);
    for (std::size_t b = a + 1; b < 4; ++b) EXPECT_NEAR(e.states[a].vec().dot(e.states[b].vec()), -1.0 / 3.0, 1e-15);
  }
}

TEST(Ensembles, OctahedralAndGreatCircle) {
  EXPECT_EQ(ensemble_octahedral().states.size(), 6u);
  const Ensemble gc = ensemble_great_circle(4, Plane::XZ);
  EXPECT_EQ(gc.label, "gc:4,xz");
  const std::vector<Vec3> expected = {Vec3::UnitX(), Vec3::UnitZ(), -Vec3::UnitX(), -Vec3::UnitZ()};
  ASSERT_EQ(gc.states.size(), 4u);
  for (std::size_t q = 0; q < 4; ++q) EXPECT_EQ(gc.states[q].vec(), expected[q]) << q;
  for (const auto& m : ensemble_great_circle(7, Plane::XY).states) {
    EXPECT_EQ(m.z(), 0.0);
    EXPECT_NEAR(m.vec().norm(), 1.0, 1e-15);
  }
  EXPECT_THROW(ensemble_great_circle(2, Plane::XY), std::invalid_argument);
  EXPECT_EQ(parse_plane("yz"), Plane::YZ);
  EXPECT_THROW(parse_plane("xw"), std::invalid_argument);
}

TEST(Configuration, StatesAndNames) {
  const BlochVector m(0.3, -0.2, 0.5);
  EXPECT_EQ(Configuration::single().state_of(m), density_from_bloch(m));
  EXPECT_LE(Configuration::antiparallel().state_of(m).max_abs_diff(kron(density_from_bloch(m), density_from_bloch(m.flipped()))),
            1e-15);
  EXPECT_EQ(Configuration::with_map(map_f_mu(0.5)).name(), "map:" + map_f_mu(0.5).label());
  EXPECT_THROW(Configuration::with_map(map_dual(QubitMap(Mat3::Identity() * 0.5, Vec3(0.5, 0, 0), "amp"))),
               std::invalid_argument);
}

TEST(Reproduction, AntiparallelSharpOnFlippedPairs) {
  const Povm g = build_antiparallel_povm();
  EXPECT_LE(check_reproduction(g, Configuration::antiparallel(), axes_xyz(), 1.0, Ensemble::every_state()), 1e-12);
  // The same measurement fails on parallel pairs.
  EXPECT_GT(check_reproduction(g, Configuration::parallel(), axes_xyz(), 1.0, Ensemble::every_state()), 0.1);
}

TEST(Reproduction, ParallelAtRootThreeOverTwo) {
  const Povm g = build_parallel_povm();
  const double lam = std::sqrt(3.0) / 2.0;
  EXPECT_LE(check_reproduction(g, Configuration::parallel(), axes_xyz(), lam, Ensemble::every_state()), 1e-12);
  EXPECT_GT(check_reproduction(g, Configuration::parallel(), axes_xyz(), lam + 0.01, Ensemble::every_state()), 1e-3);
}

TEST(Reproduction, GptFamilySharpOnParallelPairs) {
  EXPECT_LE(check_reproduction(build_gpt_povm(), Configuration::parallel(), axes_xyz(), 1.0, Ensemble::every_state()),
            1e-12);
}

TEST(Reproduction, TetOnTetrahedralEnsemble) {
  const double err =
      check_reproduction(build_tet_povm(), Configuration::parallel(), axes_xyz(), 1.0, ensemble_tetrahedral());
  EXPECT_LE(err, 1e-4);
  EXPECT_GT(check_reproduction(build_tet_povm(), Configuration::parallel(), axes_xyz(), 1.0, Ensemble::every_state()),
            0.01);
}

TEST(Reproduction, RejectsMismatchedShapes) {
  EXPECT_THROW(check_reproduction(build_parallel_povm(), Configuration::parallel(), {Vec3::UnitX()}, 1.0,
                                  ensemble_octahedral()),
               std::invalid_argument);
  EXPECT_THROW(check_reproduction(build_parallel_povm(), Configuration::single(), axes_xyz(), 1.0,
                                  ensemble_octahedral()),
               std::invalid_argument);
}

TEST(DualTransfer, SpinFlipTurnsAntiparallelIntoGpt) {
  const Povm out = dual_transfer(build_antiparallel_povm(), map_spin_flip());
  const Povm gpt = build_gpt_povm();
  EXPECT_TRUE(out.gpt_mode());
  for (std::size_t e = 0; e < 8; ++e) EXPECT_LE(out[e].effect.max_abs_diff(gpt[e].effect), 1e-12);
}

TEST(DualTransfer, IdentityIsNoOp) {
  const Povm p = build_parallel_povm();
  const Povm out = dual_transfer(p, map_identity());
  EXPECT_FALSE(out.gpt_mode());
  for (std::size_t e = 0; e < 8; ++e) EXPECT_LE(out[e].effect.max_abs_diff(p[e].effect), 1e-15);
}

TEST(DualTransfer, PreservesStatistics) {
  BlochSampler sampler(31);
  const QubitMap lam = map_compose(map_depolarizing(0.7), QubitMap(Mat3::Identity() * 0.5, Vec3(0, 0, 0.4), "amp"));
  const Povm p = build_antiparallel_povm();
  const Povm out = dual_transfer(p, lam);
  const Configuration cfg = Configuration::with_map(lam);
  for (int trial = 0; trial < 100; ++trial) {
    const BlochVector m = sampler.ball();
    for (std::size_t e = 0; e < 8; ++e) {
      EXPECT_NEAR(trace_inner(cfg.state_of(m), p[e].effect).real(),
                  trace_inner(Configuration::parallel().state_of(m), out[e].effect).real(), 1e-14);
    }
  }
}

TEST(DualTransfer, CpBoundaryGivesQuantumPovm) {
  const double mu = 1.0 / 3.0;
  const Povm out = dual_transfer(build_antiparallel_povm(), map_f_mu(mu));
  const auto rep = validate_povm(out, 1e-12);
  EXPECT_TRUE(rep.positive);
  EXPECT_TRUE(rep.complete);
  // The transferred measurement is jointly measurable on parallel pairs at (1 + μ)/2.
  EXPECT_LE(check_reproduction(out, Configuration::parallel(), axes_xyz(), (1.0 + mu) / 2.0, Ensemble::every_state()),
            1e-12);
  EXPECT_FALSE(validate_povm(dual_transfer(build_antiparallel_povm(), map_f_mu(0.5))).positive);
}

TEST(FMu, SharpnessIsLinear) {
  for (int g = 0; g <= 20; ++g) {
    const double mu = g / 20.0;
    const Vec3 s = fmu_marginal_sharpness(mu);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(s(c), 0.5 * (1.0 + mu), 1e-10) << "mu " << mu;
  }
  const Vec3 s = fmu_marginal_sharpness(std::sqrt(3.0) - 1.0);
  EXPECT_NEAR(s(0), std::sqrt(3.0) / 2.0, 1e-10);
}

TEST(HermitianParam, IsometricRoundTrip) {
  std::mt19937_64 rng(41);
  for (int d : {2, 4}) {
    for (int trial = 0; trial < 100; ++trial) {
      const ComplexMatrix a = spinpair::testing::random_hermitian(rng, d);
      const ComplexMatrix b = spinpair::testing::random_hermitian(rng, d);
      const Eigen::VectorXd va = hermitian_to_real(a), vb = hermitian_to_real(b);
      EXPECT_EQ(va.size(), hermitian_param_size(d));
      EXPECT_NEAR(va.dot(vb), (a * b).trace().real(), 1e-12);
      EXPECT_LE((real_to_hermitian(va, d) - a).cwiseAbs().maxCoeff(), 1e-15);
    }
  }
}

TEST(Constraints, RowCounts) {
  const auto par = build_constraints(axes_xyz(), Configuration::parallel(), Ensemble::every_state());
  EXPECT_EQ(par.constraints.size(), 60u + 16u);
  EXPECT_EQ(par.num_variables(), 8 * 16);
  const auto oct = build_constraints(axes_xyz(), Configuration::parallel(), ensemble_octahedral());
  EXPECT_EQ(oct.constraints.size(), 36u + 16u);
  const auto single = build_constraints({Vec3::UnitX(), Vec3::UnitY()}, Configuration::single(), Ensemble::every_state());
  EXPECT_EQ(single.constraints.size(), 2u * 2u * 4u + 4u);
  EXPECT_EQ(single.num_effects, 4);
  EXPECT_THROW(build_constraints({Vec3(1, 1, 0)}, Configuration::single(), Ensemble::every_state()),
               std::invalid_argument);
}

TEST(Constraints, PolynomialMatchesDirectEvaluation) {
  std::mt19937_64 rng(42);
  BlochSampler sampler(43);
  const QubitMap lam = QubitMap(Mat3::Identity() * -0.4, Vec3(0.1, 0.2, 0.0), "aff");
  for (const Configuration& cfg : {Configuration::single(), Configuration::parallel(), Configuration::antiparallel(),
                                   Configuration::with_map(lam)}) {
    const auto terms = detail::state_polynomial(cfg.copies(), cfg.map());
    for (int trial = 0; trial < 50; ++trial) {
      const Operator pi(spinpair::testing::random_hermitian(rng, cfg.dim()));
      const BlochVector m = sampler.ball();
      double poly = 0.0;
      for (const auto& t : terms) {
        double mono = 1.0;
        if (t.linear >= 0) mono = m.vec()(t.linear);
        else if (t.name.size() == 4) mono = m.vec()(t.name[1] - 'x') * m.vec()(t.name[3] - 'x');
        poly += (t.op * pi.matrix()).trace().real() * mono;
      }
      EXPECT_NEAR(poly, trace_inner(cfg.state_of(m), pi).real(), 1e-10) << cfg.name();
    }
  }
}

TEST(Constraints, KnownSolutionsHaveZeroResidual) {
  const auto anti = build_constraints(axes_xyz(), Configuration::antiparallel(), Ensemble::every_state());
  std::vector<Operator> effects;
  for (const auto& o : build_antiparallel_povm().outcomes()) effects.push_back(o.effect);
  EXPECT_LE(constraint_residuals(anti, effects, 1.0).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT(constraint_residuals(anti, effects, 0.9).cwiseAbs().maxCoeff(), 1e-3);

  const auto par = build_constraints(axes_xyz(), Configuration::parallel(), ensemble_octahedral());
  effects.clear();
  for (const auto& o : build_parallel_povm().outcomes()) effects.push_back(o.effect);
  EXPECT_LE(constraint_residuals(par, effects, std::sqrt(3.0) / 2.0).cwiseAbs().maxCoeff(), 1e-12);

  const Povm back = povm_from_effects(par, effects);
  EXPECT_EQ(back[3].label, build_parallel_povm()[3].label);
}

TEST(Constraints, JsonRoundTrip) {
  const auto cs = build_constraints(axes_xyz(), Configuration::with_map(map_f_mu(0.25)), ensemble_tetrahedral());
  const nlohmann::json j = cs;
  const ConstraintSystem back = nlohmann::json::parse(j.dump()).get<ConstraintSystem>();
  EXPECT_EQ(back.num_effects, cs.num_effects);
  EXPECT_EQ(back.effect_dim, cs.effect_dim);
  EXPECT_EQ(back.labels, cs.labels);
  ASSERT_EQ(back.constraints.size(), cs.constraints.size());
  for (std::size_t i = 0; i < cs.constraints.size(); ++i) {
    EXPECT_EQ(back.constraints[i].coeffs, cs.constraints[i].coeffs);
    EXPECT_EQ(back.constraints[i].lambda_coeff, cs.constraints[i].lambda_coeff);
    EXPECT_EQ(back.constraints[i].target, cs.constraints[i].target);
  }
  EXPECT_EQ(back.map.transfer(), cs.map.transfer());
  EXPECT_EQ(back.ensemble.states.size(), 4u);
  EXPECT_EQ(back.configuration, cs.configuration);
}

TEST(EnsembleJson, PlainArrayAccepted) {
  const auto e = nlohmann::json::parse("[[1,0,0],[0,0,-1]]").get<Ensemble>();
  EXPECT_FALSE(e.all);
  ASSERT_EQ(e.states.size(), 2u);
  EXPECT_EQ(e.states[1].z(), -1.0);
  EXPECT_THROW(nlohmann::json::parse("[[1,0]]").get<Ensemble>(), std::invalid_argument);
}
