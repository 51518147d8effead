#include <gtest/gtest.h>

#include <random>

#include "spinpair/matcore.hpp"
#include "spinpair/povm.hpp"
#include "spinpair/qubit.hpp"
#include "test_util.hpp"

using namespace spinpair;
using spinpair::testing::characteristic_polynomial;
using spinpair::testing::random_hermitian;
using spinpair::testing::random_unit_vector;

TEST(Kron, IdentityAndZ) {
  const Operator id = Operator::identity(2);
  EXPECT_EQ(kron(id, id), Operator::identity(4));

  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected.diagonal() << 1, 1, -1, -1;
  EXPECT_EQ(kron(pauli_z(), id), Operator(expected));

  EXPECT_EQ(kron(pauli_x(), pauli_y()).trace(), complex(0.0));
}

TEST(Kron, RejectsWrongDimensions) {
  EXPECT_THROW(kron(Operator::identity(4), Operator::identity(2)), std::invalid_argument);
  EXPECT_THROW(Operator(ComplexMatrix::Zero(3, 3)), std::invalid_argument);
}

TEST(HermitianEig, KnownSpectra) {
  const auto id = hermitian_eig(Operator::identity(4));
  for (int k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(id.values(k), 1.0);

  const auto z = hermitian_eig(pauli_z());
  EXPECT_NEAR(z.values(0), -1.0, 1e-15);
  EXPECT_NEAR(z.values(1), 1.0, 1e-15);
}

TEST(HermitianEig, AntiparallelEffectIsRankOneWithTraceHalf) {
  const Operator effect = antiparallel_effect(1, 1, 1);
  // Oracle: characteristic polynomial t^3 (t − 1/2).
  const auto poly = characteristic_polynomial(effect.matrix());
  EXPECT_NEAR(std::abs(poly[0]), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(poly[1]), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(poly[2]), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(poly[3] - complex(-0.5)), 0.0, 1e-14);

  const auto eig = hermitian_eig(effect);
  EXPECT_NEAR(eig.values(0), 0.0, 1e-12);
  EXPECT_NEAR(eig.values(1), 0.0, 1e-12);
  EXPECT_NEAR(eig.values(2), 0.0, 1e-12);
  EXPECT_NEAR(eig.values(3), 0.5, 1e-12);
}

TEST(HermitianEig, RejectsNonHermitian) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(hermitian_eig(Operator(m)), std::invalid_argument);
}

TEST(HermitianEig, RandomReconstructionAndOrthonormality) {
  std::mt19937_64 rng(1234);
  double worst_recon = 0.0, worst_gram = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const ComplexMatrix h = random_hermitian(rng, 4);
    const auto eig = hermitian_eig(h);
    for (int k = 1; k < 4; ++k) ASSERT_LE(eig.values(k - 1), eig.values(k));
    const ComplexMatrix recon = eig.vectors * eig.values.asDiagonal() * eig.vectors.adjoint();
    worst_recon = std::max(worst_recon, (recon - h).cwiseAbs().maxCoeff());
    const ComplexMatrix gram = eig.vectors.adjoint() * eig.vectors;
    worst_gram = std::max(worst_gram, (gram - ComplexMatrix::Identity(4, 4)).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst_recon, 1e-10);
  EXPECT_LE(worst_gram, 1e-10);
}

TEST(HermitianEig, SpectrumMatchesCharacteristicPolynomial) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const ComplexMatrix h = random_hermitian(rng, 4);
    const auto poly = characteristic_polynomial(h);
    const auto eig = hermitian_eig(h);
    for (int k = 0; k < 4; ++k) {
      complex value = 0.0;
      for (int p = 4; p >= 0; --p) value = value * eig.values(k) + poly[static_cast<std::size_t>(p)];
      EXPECT_LE(std::abs(value), 1e-10);
    }
  }
}

TEST(HermitianEig, PositivityAgreesWithSampledExpectations) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    // Shift to straddle zero so both verdicts occur.
    ComplexMatrix h = random_hermitian(rng, 4);
    const double shift = trial % 2 == 0 ? 3.5 : 0.5;
    h += shift * ComplexMatrix::Identity(4, 4);
    const bool psd = hermitian_eig(h).values(0) >= 0.0;
    bool sampled_ok = true;
    for (int s = 0; s < 10000; ++s) {
      const auto v = random_unit_vector(rng, 4);
      if (trace_inner(Operator(h), outer(v)).real() < -1e-10) {
        sampled_ok = false;
        break;
      }
    }
    // Sampling can only miss a negative direction, never invent one.
    if (!sampled_ok) {
      EXPECT_FALSE(psd);
    }
    if (psd) {
      EXPECT_TRUE(sampled_ok);
    }
  }
}

TEST(PauliExpand, DensityMatrixZUp) {
  const auto pc = pauli_expand(density_from_bloch(BlochVector(0, 0, 1)));
  ASSERT_EQ(pc.order, 1);
  EXPECT_NEAR(std::abs(pc[0] - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(pc[1]), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(pc[2]), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(pc[3] - 0.5), 0.0, 1e-15);
}

TEST(PauliExpand, AntiparallelAndGptCoefficients) {
  for (const auto& l : outcome_labels(3)) {
    const int i = l[0], j = l[1], k = l[2];
    const auto anti = pauli_expand(antiparallel_effect(i, j, k));
    EXPECT_NEAR(std::abs(anti.at(1, 0) - complex(i / 16.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(anti.at(0, 1) - complex(-i / 16.0)), 0.0, 1e-15);

    const auto gpt = pauli_expand(gpt_effect(i, j, k));
    EXPECT_NEAR(std::abs(gpt.at(1, 2) - complex(i * j / 16.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(gpt.at(2, 1) - complex(i * j / 16.0)), 0.0, 1e-15);
  }
}

TEST(PauliExpand, RoundTripAndRealness) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = trial % 2 ? 2 : 4;
    const Operator h(random_hermitian(rng, dim));
    const auto pc = pauli_expand(h);
    EXPECT_LE(pc.max_imag(), 1e-12);
    const auto again = pauli_expand(pauli_reconstruct(pc));
    for (std::size_t w = 0; w < pc.coeffs.size(); ++w) EXPECT_LE(std::abs(again[w] - pc[w]), 1e-12);
    EXPECT_LE(pauli_reconstruct(pc).max_abs_diff(h), 1e-12);
  }
}

TEST(PauliExpand, KronFactorizes) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const Operator a(random_hermitian(rng, 2)), b(random_hermitian(rng, 2));
    const auto pa = pauli_expand(a), pb = pauli_expand(b), pab = pauli_expand(kron(a, b));
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q)
        EXPECT_LE(std::abs(pab.at(p, q) - pa[static_cast<std::size_t>(p)] * pb[static_cast<std::size_t>(q)]), 1e-12);
  }
}

TEST(TraceInner, BornRuleValues) {
  const Operator rho_z = density_from_bloch(BlochVector(0, 0, 1));
  EXPECT_NEAR(trace_inner(rho_z, UnsharpObservable(Vec3::UnitZ(), 1.0).effect(1)).real(), 1.0, 1e-15);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.57, 0.57);
  for (int trial = 0; trial < 100; ++trial) {
    const BlochVector m(u(rng), u(rng), u(rng));
    const Operator rho = density_from_bloch(m);
    EXPECT_NEAR(trace_inner(rho, Operator::identity(2)).real(), 1.0, 1e-14);
    const Vec3 n = Vec3(u(rng), u(rng), u(rng) + 1.0).normalized();
    const double lam = (trial % 10) / 9.0;
    for (int a : {1, -1}) {
      const complex v = trace_inner(rho, UnsharpObservable(n, lam).effect(a));
      EXPECT_NEAR(v.real(), 0.5 * (1.0 + lam * a * m.vec().dot(n)), 1e-14);
      EXPECT_LE(std::abs(v.imag()), 1e-12);
    }
  }
  EXPECT_THROW(trace_inner(Operator::identity(2), Operator::identity(4)), std::invalid_argument);
}

TEST(OperatorJson, ExactRoundTrip) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Operator h(random_hermitian(rng, trial % 2 ? 2 : 4) * 1.2345678901234567);
    const nlohmann::json j = h;
    const Operator back = nlohmann::json::parse(j.dump()).get<Operator>();
    EXPECT_EQ(back, h);
  }
}
