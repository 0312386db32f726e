#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "qsg/pauli.hpp"
#include "qsg/rng.hpp"
#include "test_support.hpp"

namespace {

using namespace qsg;

PauliString random_string(std::size_t n, CounterRng& rng) {
  std::vector<std::uint8_t> axes(n);
  for (auto& a : axes) a = static_cast<std::uint8_t>(rng() % 4);
  return PauliString(axes, static_cast<int>(rng() % 4));
}

PauliString random_hermitian(std::size_t n, CounterRng& rng) {
  PauliString p = random_string(n, rng);
  return p.with_phase(2 * (p.phase_exp() / 2));
}

ComplexVector basis(std::size_t dim, std::size_t index) {
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
  v[static_cast<Eigen::Index>(index)] = 1.0;
  return v;
}

const Complex kI(0.0, 1.0);

}  // namespace

TEST(PauliMultiply, XTimesYIsIZ) {
  const PauliString p = PauliString::single(1, 1, 1) * PauliString::single(1, 1, 2);
  EXPECT_EQ(p.phase_exp(), 1);
  EXPECT_EQ(p.axis(1), 3);
}

TEST(PauliMultiply, XSquaredIsIdentity) {
  const PauliString p = PauliString::single(1, 1, 1) * PauliString::single(1, 1, 1);
  EXPECT_EQ(p, PauliString(1));
}

TEST(PauliMultiply, TwoSiteProduct) {
  const PauliString p = PauliString::two_site(2, 1, 1, 2, 2) * PauliString::two_site(2, 1, 1, 2, 3);
  EXPECT_EQ(p.phase_exp(), 1);
  EXPECT_EQ(p.axis(1), 0);
  EXPECT_EQ(p.axis(2), 1);
}

TEST(PauliMultiply, SiteCountMismatchThrows) {
  EXPECT_THROW(PauliString(2) * PauliString(3), DimensionError);
}

TEST(PauliMultiply, CyclicSelfPairResolvesToSingleFactor) {
  const PauliString p = PauliString::two_site(1, 1, 3, 1, 1);
  EXPECT_EQ(p, PauliString::single(1, 1, 2).with_phase(1));
}

TEST(PauliMultiply, AssociativeAndInverse) {
  CounterRng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const PauliString a = random_string(5, rng);
    const PauliString b = random_string(5, rng);
    const PauliString c = random_string(5, rng);
    ASSERT_EQ((a * b) * c, a * (b * c));
    ASSERT_EQ(a * inverse(a), PauliString(5));
  }
}

TEST(PauliMultiply, HermitianStringSquaresToIdentity) {
  CounterRng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const PauliString p = random_hermitian(4, rng);
    ASSERT_EQ(p * p, PauliString(4));
  }
}

TEST(PauliMultiply, DenseHomomorphismExact) {
  CounterRng rng(7);
  for (std::size_t n = 1; n <= 4; ++n) {
    for (int trial = 0; trial < 50; ++trial) {
      const PauliString p = random_string(n, rng);
      const PauliString q = random_string(n, rng);
      ASSERT_EQ(dense(p * q), dense(p) * dense(q)) << p.label() << " " << q.label();
    }
  }
}

TEST(PauliCommutes, AgreesWithDenseCommutator) {
  CounterRng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const PauliString p = random_string(3, rng);
    const PauliString q = random_string(3, rng);
    const bool dense_commutes = (dense(p) * dense(q) - dense(q) * dense(p)).norm() == 0.0;
    ASSERT_EQ(commutes(p, q), dense_commutes);
  }
}

TEST(PauliTrace, Examples) {
  EXPECT_EQ(trace(PauliString(3)), Complex(8.0, 0.0));
  EXPECT_EQ(trace(PauliString::single(3, 1, 1)), Complex(0.0, 0.0));
  for (std::size_t n = 2; n <= 6; ++n) {
    for (int a = 1; a <= 3; ++a) {
      for (int b = 1; b <= 3; ++b) {
        const PauliString p = PauliString::two_site(n, 1, a, 2, b);
        ASSERT_EQ(trace(p * p), Complex(std::ldexp(1.0, static_cast<int>(n)), 0.0));
      }
    }
  }
}

TEST(PauliTrace, MatchesDenseExactly) {
  CounterRng rng(9);
  for (std::size_t n = 1; n <= 4; ++n) {
    for (int trial = 0; trial < 200; ++trial) {
      const PauliString p = random_string(n, rng);
      ASSERT_EQ(trace(p), dense(p).trace()) << p.label();
      const UnitTrace unit = normalized_trace(p);
      ASSERT_EQ(Complex(unit.re, unit.im) * std::ldexp(1.0, static_cast<int>(n)), trace(p));
    }
  }
}

TEST(PauliApply, Examples) {
  EXPECT_EQ(qsg::apply(PauliString::single(2, 1, 1), basis(4, 0)), basis(4, 2));
  CounterRng rng(10);
  const ComplexVector v = test_support::random_state(8, rng);
  EXPECT_EQ(qsg::apply(PauliString(3), v), v);
  EXPECT_EQ(qsg::apply(PauliString::single(2, 1, 3), basis(4, 2)), -basis(4, 2));
  EXPECT_EQ(qsg::apply(PauliString::single(1, 1, 2), basis(2, 0)), kI * basis(2, 1));
}

TEST(PauliApply, LengthMismatchThrows) {
  EXPECT_THROW(qsg::apply(PauliString(2), ComplexVector::Zero(8)), DimensionError);
}

TEST(PauliApply, MatchesDenseProduct) {
  CounterRng rng(11);
  for (std::size_t n : {1u, 3u, 6u, 10u}) {
    for (int trial = 0; trial < 3; ++trial) {
      const PauliString p = random_string(n, rng);
      const ComplexVector v = test_support::random_state(std::size_t{1} << n, rng);
      const ComplexVector expected = dense(p) * v;
      ASSERT_LE((qsg::apply(p, v) - expected).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(PauliApply, ApplyAddAccumulates) {
  CounterRng rng(12);
  const PauliString p = random_string(4, rng);
  const ComplexVector v = test_support::random_state(16, rng);
  ComplexVector out = test_support::random_state(16, rng);
  const ComplexVector start = out;
  apply_add(p, Complex(0.5, -2.0), v, out);
  EXPECT_LE((out - (start + Complex(0.5, -2.0) * qsg::apply(p, v))).norm(), 1e-14);
}

TEST(PauliExpApply, Examples) {
  const ComplexVector e0 = basis(2, 0);
  EXPECT_EQ(exp_apply(0.0, PauliString::single(1, 1, 1), e0), e0);
  const ComplexVector rotated = exp_apply(std::numbers::pi / 2, PauliString::single(1, 1, 1), e0);
  EXPECT_LE((rotated - kI * basis(2, 1)).norm(), 1e-15);
  const double theta = 0.731;
  const ComplexVector phased = exp_apply(theta, PauliString::single(1, 1, 3), e0);
  EXPECT_LE((phased - std::exp(kI * theta) * e0).norm(), 1e-15);
}

TEST(PauliExpApply, NonHermitianThrows) {
  EXPECT_THROW(exp_apply(0.3, PauliString::single(1, 1, 1).with_phase(1), basis(2, 0)), ContractError);
}

TEST(PauliExpApply, MatchesDenseExponential) {
  CounterRng rng(13);
  for (std::size_t n = 1; n <= 6; ++n) {
    const PauliString p = random_hermitian(n, rng);
    if (p.is_identity_up_to_phase()) continue;
    const ComplexMatrix m = dense(p);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(m);
    const double theta = 2.0 * rng.uniform() - 1.0;
    const ComplexVector phases = (kI * theta * eig.eigenvalues().cast<Complex>()).array().exp();
    const ComplexMatrix expm = eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
    const ComplexVector v = test_support::random_state(std::size_t{1} << n, rng);
    const ComplexVector w = exp_apply(theta, p, v);
    ASSERT_LE((w - expm * v).cwiseAbs().maxCoeff(), 1e-12);
    ASSERT_NEAR(w.norm(), v.norm(), 1e-13 * v.norm());
  }
}

TEST(PauliString, LabelRoundTrip) {
  CounterRng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const PauliString p = random_string(5, rng);
    ASSERT_EQ(PauliString::from_label(p.label()), p);
  }
  EXPECT_EQ(PauliString::from_label("-iY").phase_exp(), 3);
  EXPECT_EQ(PauliString::from_label("+X_Z").weight(), 2u);
}

TEST(PauliString, HermitianIffEvenPhase) {
  for (int k = 0; k < 4; ++k) {
    const PauliString p = PauliString::from_label("XYZ").with_phase(k);
    const ComplexMatrix m = dense(p);
    EXPECT_EQ(p.is_hermitian(), (m - m.adjoint()).norm() == 0.0);
  }
}
