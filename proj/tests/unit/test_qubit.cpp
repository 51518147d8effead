#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "spinpair/povm.hpp"
#include "spinpair/qubit.hpp"
#include "spinpair/sampling.hpp"
#include "test_util.hpp"

using namespace spinpair;
using spinpair::testing::random_hermitian;

namespace {

QubitMap random_map(std::mt19937_64& rng, bool trace_preserving) {
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  Mat4 t;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) t(r, c) = u(rng);
  if (trace_preserving) t.row(0) << 1, 0, 0, 0;
  return QubitMap::from_transfer(t, "random");
}

/// Choi operator from matrix units: ½ Σ_ab |a⟩⟨b| ⊗ Λ(|a⟩⟨b|).
Operator choi_from_matrix_units(const QubitMap& map) {
  ComplexMatrix out = ComplexMatrix::Zero(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      ComplexMatrix unit = ComplexMatrix::Zero(2, 2);
      unit(a, b) = 1.0;
      out.block(2 * a, 2 * b, 2, 2) = 0.5 * map.apply(Operator(unit)).matrix();
    }
  return Operator(out);
}

/// Max of |t + M m| over a latitude/longitude grid (test oracle).
std::pair<double, Vec3> grid_max_bloch_norm(const QubitMap& map, int steps) {
  double best = -1.0;
  Vec3 arg;
  for (int a = 0; a <= steps; ++a) {
    const double theta = std::numbers::pi * a / steps;
    for (int b = 0; b < 2 * steps; ++b) {
      const double phi = std::numbers::pi * b / steps;
      const Vec3 m(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
      const double v = map.apply_bloch(m).norm();
      if (v > best) {
        best = v;
        arg = m;
      }
    }
  }
  return {best, arg};
}

}  // namespace

TEST(Density, KnownStates) {
  EXPECT_LE(density_from_bloch(BlochVector()).max_abs_diff(0.5 * Operator::identity(2)), 0.0);
  ComplexMatrix up = ComplexMatrix::Zero(2, 2);
  up(0, 0) = 1.0;
  EXPECT_LE(density_from_bloch(BlochVector(0, 0, 1)).max_abs_diff(Operator(up)), 0.0);
  EXPECT_THROW(BlochVector(1.0, 0.1, 0.0), std::invalid_argument);
}

TEST(Density, PurityMatchesExplicitProduct) {
  BlochSampler sampler(17);
  for (int trial = 0; trial < 200; ++trial) {
    const BlochVector m = sampler.ball();
    const Operator rho = density_from_bloch(m);
    const ComplexMatrix sq = rho.matrix() * rho.matrix();
    EXPECT_NEAR(sq.trace().real(), 0.5 * (1.0 + m.vec().squaredNorm()), 1e-14);
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-15);
    EXPECT_GE(min_eigenvalue(rho), -1e-15);
  }
}

TEST(Born, Examples) {
  EXPECT_DOUBLE_EQ(born_probability(BlochVector(0, 0, 1), Vec3::UnitZ(), 1, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(born_probability(BlochVector(0, 0, 1), Vec3::UnitX(), 1, 1.0), 0.5);
  BlochSampler sampler(2);
  for (int i = 0; i < 50; ++i) {
    const BlochVector m = sampler.ball();
    const Vec3 n = sampler.unit();
    EXPECT_DOUBLE_EQ(born_probability(m, n, -1, 0.0), 0.5);
    const double lam = 0.37;
    EXPECT_NEAR(born_probability(m, n, 1, lam),
                trace_inner(density_from_bloch(m), UnsharpObservable(n, lam).effect(1)).real(), 1e-14);
  }
  EXPECT_THROW(born_probability(BlochVector(), Vec3::UnitZ(), 0, 1.0), std::invalid_argument);
}

TEST(UnsharpObservable, EffectsSumAndSpectrum) {
  const UnsharpObservable obs(Vec3(1, 2, 2) / 3.0, 0.6);
  EXPECT_EQ(obs.effect(1) + obs.effect(-1), Operator::identity(2));
  for (int a : {1, -1}) {
    const auto eig = hermitian_eig(obs.effect(a));
    EXPECT_NEAR(eig.values(0), 0.2, 1e-12);
    EXPECT_NEAR(eig.values(1), 0.8, 1e-12);
  }
}

TEST(Maps, SpinFlipActionCompositionAndDual) {
  const QubitMap flip = map_spin_flip();
  const BlochVector m(0.3, -0.4, 0.5);
  EXPECT_LE(flip.apply(density_from_bloch(m)).max_abs_diff(density_from_bloch(m.flipped())), 1e-15);
  EXPECT_LE((map_compose(flip, flip).transfer() - Mat4::Identity()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(map_dual(flip).transfer(), flip.transfer());
  EXPECT_EQ(map_dual(map_identity()).transfer(), Mat4::Identity());
}

TEST(Maps, FMuFamily) {
  EXPECT_EQ(map_f_mu(1.0).transfer(), map_spin_flip().transfer());
  BlochSampler sampler(4);
  for (int i = 0; i < 20; ++i) {
    EXPECT_LE(map_f_mu(0.0).apply(density_from_bloch(sampler.ball())).max_abs_diff(0.5 * Operator::identity(2)),
              1e-16);
  }
  EXPECT_THROW(map_f_mu(1.1), std::invalid_argument);
  EXPECT_THROW(map_depolarizing(-0.1), std::invalid_argument);
}

TEST(Maps, DualityIdentityOnRandomPairs) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const QubitMap map = random_map(rng, trial % 2 == 0);
    const Operator a(random_hermitian(rng, 2)), b(random_hermitian(rng, 2));
    const complex lhs = trace_inner(a, map.apply(b));
    const complex rhs = trace_inner(map_dual(map).apply(a), b);
    EXPECT_LE(std::abs(lhs - rhs), 1e-12);
  }
}

TEST(Maps, DualOfTracePreservingIsUnital) {
  const QubitMap shifted(0.5 * Mat3::Identity(), Vec3(0.1, 0.0, 0.2), "shifted");
  const QubitMap dual = map_dual(shifted);
  EXPECT_LE(dual.apply(Operator::identity(2)).max_abs_diff(Operator::identity(2)), 1e-15);
  EXPECT_FALSE(dual.is_trace_preserving());
}

TEST(Maps, DualIsInvolution) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const QubitMap map = random_map(rng, false);
    const QubitMap back = map_dual(map_dual(map));
    const Operator x(random_hermitian(rng, 2));
    EXPECT_LE(back.apply(x).max_abs_diff(map.apply(x)), 1e-12);
  }
}

TEST(Maps, TracePreservedOnRandomStates) {
  std::mt19937_64 rng(23);
  BlochSampler sampler(23);
  const std::vector<QubitMap> maps = {map_identity(), map_spin_flip(), map_f_mu(0.3), map_depolarizing(0.5),
                                      random_map(rng, true)};
  for (const auto& map : maps)
    for (int i = 0; i < 100; ++i) EXPECT_NEAR(map.apply(density_from_bloch(sampler.ball())).trace().real(), 1.0, 1e-12);
}

TEST(ApplyOnSecond, FlipTakesGptToAntiparallel) {
  for (const auto& l : outcome_labels(3)) {
    const Operator out = map_apply_on_second(map_spin_flip(), gpt_effect(l[0], l[1], l[2]));
    EXPECT_LE(out.max_abs_diff(antiparallel_effect(l[0], l[1], l[2])), 1e-12);
  }
  const Operator p = parallel_effect(1, -1, 1);
  EXPECT_LE(map_apply_on_second(map_identity(), p).max_abs_diff(p), 1e-15);
}

TEST(ApplyOnSecond, FactorwiseOnProducts) {
  BlochSampler sampler(31);
  const QubitMap fmu = map_f_mu(0.6);
  for (int i = 0; i < 50; ++i) {
    const Operator ra = density_from_bloch(sampler.ball());
    const Operator rb = density_from_bloch(sampler.ball());
    EXPECT_LE(map_apply_on_second(fmu, kron(ra, rb)).max_abs_diff(kron(ra, fmu.apply(rb))), 1e-15);
  }
}

TEST(Positivity, Examples) {
  EXPECT_TRUE(map_is_positive(map_f_mu(0.9)).positive);
  EXPECT_TRUE(map_is_positive(map_identity()).positive);

  const QubitMap shifted(Mat3::Identity(), Vec3(0, 0, 0.5), "shifted");
  const auto cert = map_is_positive(shifted);
  EXPECT_FALSE(cert.positive);
  const auto [grid_max, grid_arg] = grid_max_bloch_norm(shifted, 180);
  EXPECT_NEAR(grid_max, 1.5, 1e-9);
  EXPECT_NEAR(cert.max_bloch_norm, 1.5, 1e-9);
  EXPECT_LE((cert.witness - Vec3::UnitZ()).norm(), 1e-5);
  EXPECT_LE((grid_arg - Vec3::UnitZ()).norm(), 1e-9);
}

TEST(Positivity, AgreesWithGridOracleOnRandomAffineMaps) {
  std::mt19937_64 rng(40);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (int trial = 0; trial < 30; ++trial) {
    Mat3 m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = u(rng);
    const Vec3 t(u(rng) / 2, u(rng) / 2, u(rng) / 2);
    const QubitMap map(m, t, "random");
    const auto cert = map_is_positive(map);
    const auto [grid_max, arg] = grid_max_bloch_norm(map, 180);
    EXPECT_GE(cert.max_bloch_norm, grid_max - 1e-12);
    EXPECT_LE(cert.max_bloch_norm, grid_max + 2e-3);  // grid modulus ~1°
  }
}

TEST(Choi, FlipFamilyCompletePositivity) {
  EXPECT_FALSE(map_is_cp(map_spin_flip()));
  EXPECT_TRUE(map_is_cp(map_f_mu(0.25)));
  for (double mu : {0.0, 0.1, 0.2, 1.0 / 3.0}) EXPECT_TRUE(map_is_cp(map_f_mu(mu))) << mu;
  for (double mu : {0.34, 0.5, 1.0}) EXPECT_FALSE(map_is_cp(map_f_mu(mu))) << mu;

  const Operator boundary = choi_from_matrix_units(map_f_mu(1.0 / 3.0));
  EXPECT_NEAR(hermitian_eig(boundary).values(0), 0.0, 1e-10);
  EXPECT_NEAR(min_eigenvalue(map_choi(map_f_mu(1.0 / 3.0))), 0.0, 1e-10);
}

TEST(Choi, MatchesMatrixUnitConstructionAndIdentity) {
  std::mt19937_64 rng(50);
  for (int trial = 0; trial < 50; ++trial) {
    const QubitMap map = random_map(rng, true);
    EXPECT_LE(map_choi(map).max_abs_diff(choi_from_matrix_units(map)), 1e-15);
    EXPECT_NEAR(map_choi(map).trace().real(), 1.0, 1e-15);
  }
  const Operator phi_plus = outer(BellBasis::phi_plus());
  EXPECT_LE(map_choi(map_identity()).max_abs_diff(phi_plus), 1e-15);
  EXPECT_NEAR(min_eigenvalue(map_choi(map_identity())), 0.0, 1e-12);
}

TEST(Choi, CompletePositivityImpliesPositivity) {
  std::mt19937_64 rng(60);
  int cp_count = 0;
  for (int trial = 0; trial < 100; ++trial) {
    QubitMap map = random_map(rng, true);
    // Shrink half of them so CP maps actually occur.
    if (trial % 2) map = QubitMap(0.3 * map.bloch_matrix(), 0.3 * map.shift(), "shrunk");
    if (map_is_cp(map)) {
      ++cp_count;
      EXPECT_TRUE(map_is_positive(map).positive);
    }
  }
  EXPECT_GT(cp_count, 10);
}

TEST(QubitMapJson, RoundTrip) {
  const QubitMap shifted(0.5 * Mat3::Identity(), Vec3(0.1, 0.0, 0.2), "shifted");
  for (const QubitMap& map : {shifted, map_dual(shifted), map_f_mu(0.25)}) {
    const nlohmann::json j = map;
    const QubitMap back = nlohmann::json::parse(j.dump()).get<QubitMap>();
    EXPECT_EQ(back.transfer(), map.transfer());
    EXPECT_EQ(back.label(), map.label());
    EXPECT_EQ(j.contains("trace_row"), !map.is_trace_preserving());
  }
}
