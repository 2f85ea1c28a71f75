#include "doctest.h"

#include "nvspin/rng.hpp"
#include "nvspin/spin_model.hpp"

using namespace nvspin;

TEST_CASE("parameter validation") {
  SpinSystemParams p;
  CHECK_NOTHROW(p.validate());

  p.s1 = 1.2;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.s1 = 0.8;

  p.T1e = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.T1e = 5.5;

  // Derived and direct Larmor frequencies must agree when both given.
  p.gamma_C = 0.158 / 148.0;
  CHECK_NOTHROW(p.validate());
  p.gamma_C = 0.0010705;  // 158.434 kHz at 148 G, off by 4e-4 MHz
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("kappa ties to T1e") {
  SpinSystemParams p;
  CHECK(p.kappa() == doctest::Approx(1.0 / 16.5).epsilon(1e-12));
}

TEST_CASE("spin operators") {
  const auto& op = SpinOperatorSet::standard();
  // Sz eigenvalues +1, 0, -1, each twice; Iz +-1/2, three times each.
  CHECK(op.Sz(0, 0).real() == 1.0);
  CHECK(op.Sz(2, 2).real() == 0.0);
  CHECK(op.Sz(4, 4).real() == -1.0);
  CHECK(op.Iz(0, 0).real() == 0.5);
  CHECK(op.Iz(1, 1).real() == -0.5);
  CHECK((op.Sz * op.Iz - op.Iz * op.Sz).norm() == 0.0);
  CHECK((op.Sz - op.Sz.adjoint()).norm() == 0.0);
  CHECK((op.Ix - op.Ix.adjoint()).norm() == 0.0);
}

TEST_CASE("conditional precession frequencies") {
  SpinSystemParams p;
  CHECK(std::abs(nuclear_precession_frequency(p, 0) - 0.158) < 5e-4);
  CHECK(std::abs(nuclear_precession_frequency(p, -1) - 0.110) < 5e-4);
  CHECK(std::abs(nuclear_precession_frequency(p, 1) - 0.329) < 5e-4);
  CHECK_THROWS_AS(nuclear_precession_frequency(p, 2), std::domain_error);
}

TEST_CASE("Hamiltonian blocks") {
  SpinSystemParams p;
  const Mat6 h = build_hamiltonian(p);

  CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

  // m_S = 0 block: -nu_C Iz only.
  CHECK(h(2, 2).real() == doctest::Approx(-0.079).epsilon(1e-12));
  CHECK(h(3, 3).real() == doctest::Approx(0.079).epsilon(1e-12));
  CHECK(std::abs(h(2, 3)) < 1e-15);

  // m_S = -1 block, traceless part: [[-0.003, -0.055], [-0.055, 0.003]].
  const Mat2 block = nuclear_block_hamiltonian(p, -1);
  CHECK(block(0, 0).real() == doctest::Approx(-0.003).epsilon(1e-9));
  CHECK(block(0, 1).real() == doctest::Approx(-0.055).epsilon(1e-9));
  CHECK(block(1, 0).real() == doctest::Approx(-0.055).epsilon(1e-9));
  CHECK(block(1, 1).real() == doctest::Approx(0.003).epsilon(1e-9));

  // Same thing extracted from the full Hamiltonian minus its block mean.
  Mat2 from_full = h.block<2, 2>(4, 4);
  from_full -= 0.5 * from_full.trace() * Mat2::Identity();
  CHECK((from_full - block).cwiseAbs().maxCoeff() < 1e-12);

  // No elements outside the m_S blocks.
  double off = 0.0;
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) {
      if (r / 2 != c / 2) off = std::max(off, std::abs(h(r, c)));
    }
  }
  CHECK(off < 1e-14);
}

TEST_CASE("uncoupled limit") {
  SpinSystemParams p;
  p.A_zx = 0.0;
  p.A_zz = 0.0;
  p.A_N = 0.0;
  const Mat6 h = build_hamiltonian(p);
  const auto& op = SpinOperatorSet::standard();
  const Mat6 expected =
      p.D * op.Sz2 - p.nu_e() * op.Sz - p.nu_C * op.Iz;
  CHECK((h - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("A_zx = 0 makes the Hamiltonian diagonal") {
  SpinSystemParams p;
  p.A_zx = 0.0;
  const Mat6 h = build_hamiltonian(p);
  Mat6 offdiag = h;
  offdiag.diagonal().setZero();
  CHECK(offdiag.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("frequency equals block eigen-gap for random parameters") {
  Rng rng = Rng::substream(4242, 1);
  for (int trial = 0; trial < 300; ++trial) {
    SpinSystemParams p;
    p.nu_C = 0.02 + 0.5 * rng.uniform();
    p.A_zz = -0.5 + 1.0 * rng.uniform();
    p.A_zx = 0.5 * rng.uniform();
    for (int m_s : {-1, 0, 1}) {
      Eigen::SelfAdjointEigenSolver<Mat2> es(
          nuclear_block_hamiltonian(p, m_s), Eigen::EigenvaluesOnly);
      const double gap = es.eigenvalues()(1) - es.eigenvalues()(0);
      const double nu = nuclear_precession_frequency(p, m_s);
      CHECK(std::abs(gap - nu) <= 1e-10 * std::max(nu, 1e-6));
    }
  }
}
