#include "doctest.h"

#include <cmath>

#include "nvspin/circuits.hpp"
#include "nvspin/relaxation.hpp"

using namespace nvspin;

namespace {

DensityMatrix prepared_superposition(const SpinSystemParams& params) {
  const DensityMatrix prep =
      mixed_state({{2, params.s1}, {1, 1.0 - params.s1}});
  return apply_unitary(prep,
                       gate_unitary(Gate::hadamard_nuclear({0}), params));
}

}  // namespace

TEST_CASE("closed-form populations") {
  const double kappa = 1.0 / 16.5;  // 1/(3 * 5.5 ms)

  const PopulationTriple at0 = analytic_populations(0.8, kappa, 0.0);
  CHECK(at0.P0 == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(at0.Pm1 == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(at0.Pp1 == doctest::Approx(0.2).epsilon(1e-14));

  const PopulationTriple late = analytic_populations(0.8, kappa, 2000.0);
  CHECK(late.P0 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(late.Pm1 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(late.Pp1 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // tau = T1e: both exponentials evaluated by hand.
  const PopulationTriple mid = analytic_populations(0.8, kappa, 5.5);
  CHECK(std::abs(mid.P0 - 0.50501) < 1e-5);
  CHECK(std::abs(mid.Pm1 - 0.17584) < 1e-5);
  CHECK(std::abs(mid.Pp1 - 0.31915) < 1e-5);

  CHECK_THROWS_AS(analytic_populations(0.8, kappa, -1.0),
                  std::invalid_argument);
}

TEST_CASE("population sum is conserved") {
  for (double s1 : {0.0, 0.3, 0.8, 1.0}) {
    for (int i = 0; i <= 200; ++i) {
      const double tau = 55.0 * i / 200.0;
      const PopulationTriple p = analytic_populations(s1, 1.0 / 16.5, tau);
      CHECK(std::abs(p.sum() - 1.0) < 1e-12);
      CHECK_NOTHROW(p.validate());
    }
  }
}

TEST_CASE("rate generator spectrum") {
  const double kappa = 0.2;
  const Eigen::Matrix3d g = RateModel::standard(kappa).generator();
  CHECK(g.colwise().sum().cwiseAbs().maxCoeff() < 1e-15);
  Eigen::EigenSolver<Eigen::Matrix3d> es(g);
  std::vector<double> eig;
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(es.eigenvalues()(i).imag()) < 1e-12);
    eig.push_back(es.eigenvalues()(i).real());
  }
  std::sort(eig.begin(), eig.end());
  CHECK(eig[0] == doctest::Approx(-3.0 * kappa).epsilon(1e-10));
  CHECK(eig[1] == doctest::Approx(-kappa).epsilon(1e-10));
  CHECK(std::abs(eig[2]) < 1e-12);
}

TEST_CASE("numeric populations: oracle equivalence") {
  const SpinSystemParams params;
  const double kappa = params.kappa();
  const RateModel model = RateModel::standard(kappa);
  const PopulationTriple init{params.s1, 0.0, 1.0 - params.s1};
  double worst = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double tau = 10.0 * params.T1e * i / 400.0;
    const PopulationTriple a = analytic_populations(params.s1, kappa, tau);
    const PopulationTriple n = numeric_populations(init, model, tau);
    worst = std::max({worst, std::abs(a.P0 - n.P0), std::abs(a.Pm1 - n.Pm1),
                      std::abs(a.Pp1 - n.Pp1)});
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("numeric populations: frozen and short-time limits") {
  const PopulationTriple p0{0.37, 0.4, 0.23};
  const PopulationTriple same =
      numeric_populations(p0, RateModel::standard(0.0), 3.0);
  CHECK(same.P0 == doctest::Approx(p0.P0).epsilon(1e-14));
  CHECK(same.Pm1 == doctest::Approx(p0.Pm1).epsilon(1e-14));

  // First order: from (1,0,0), dP0/dt = -2 kappa P0.
  const double kappa = 0.05, tau = 1e-4;
  const PopulationTriple s =
      numeric_populations({1.0, 0.0, 0.0}, RateModel::standard(kappa), tau);
  CHECK(std::abs(s.P0 - (1.0 - 2.0 * kappa * tau)) < 1e-7);
}

TEST_CASE("Lindblad populations match the rate model") {
  const SpinSystemParams params;
  const LindbladGenerator gen = build_lindblad(params, 0.0);
  const DensityMatrix rho0 = prepared_superposition(params);
  const PopulationTriple init = populations(rho0);
  const RateModel model = RateModel::standard(params.kappa());
  for (double tau : {0.3, 1.7, 5.5, 12.0}) {
    const PopulationTriple evolved =
        populations(evolve_lindblad(rho0, gen, tau));
    const PopulationTriple expected = numeric_populations(init, model, tau);
    CHECK(std::abs(evolved.P0 - expected.P0) < 1e-8);
    CHECK(std::abs(evolved.Pm1 - expected.Pm1) < 1e-8);
    CHECK(std::abs(evolved.Pp1 - expected.Pp1) < 1e-8);
  }
}

TEST_CASE("pure dephasing channel") {
  const SpinSystemParams params;
  const double gamma_phi = 0.04;  // 1/ms
  const LindbladGenerator gen = build_lindblad(params, gamma_phi, 0.0, 0.0);
  const DensityMatrix rho0 = prepared_superposition(params);
  for (double tau : {0.8, 3.0, 9.0}) {
    const DensityMatrix out = evolve_lindblad(rho0, gen, tau);
    // Populations frozen, m_S = 0 coherence damped as e^{-2 gamma t}
    // on top of the free precession phase.
    const PopulationTriple p = populations(out);
    CHECK(p.P0 == doctest::Approx(params.s1).epsilon(1e-9));
    const double expected =
        0.5 * params.s1 * std::exp(-2.0 * gamma_phi * tau);
    CHECK(std::abs(std::abs(out.rho(2, 3)) - expected) < 1e-9);
  }
}

TEST_CASE("zero rates give unitary evolution") {
  const SpinSystemParams params;
  const LindbladGenerator gen = build_lindblad(params, 0.0, 0.0, 0.0);
  CHECK(gen.jumps.empty());
  const DensityMatrix rho0 = prepared_superposition(params);
  const DensityMatrix out = evolve_lindblad(rho0, gen, 4.0);
  Eigen::SelfAdjointEigenSolver<Mat6> e1(rho0.rho, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Mat6> e2(out.rho, Eigen::EigenvaluesOnly);
  CHECK((e1.eigenvalues() - e2.eigenvalues()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("trace and positivity through the full channel") {
  const SpinSystemParams params;
  const LindbladGenerator gen = build_lindblad(params, 0.03);
  const DensityMatrix rho0 = prepared_superposition(params);
  for (double tau : {0.5, 2.0, 8.0, 20.0}) {
    const DensityMatrix out = evolve_lindblad(rho0, gen, tau);
    CHECK(std::abs(out.trace() - 1.0) < 1e-9);
    Eigen::SelfAdjointEigenSolver<Mat6> es(out.rho, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
    CHECK_NOTHROW(out.validate(1e-10, 1e-9, -1e-10));
  }
}

TEST_CASE("hopped coherence carries no phase memory") {
  // Start from coherence in the m_S = 0 block and nuclear-balanced
  // populations elsewhere: hops move population but never coherence, so
  // the m_S = +-1 blocks stay exactly diagonal while the m_S = 0
  // coherence dies at its departure rate.
  const SpinSystemParams params;
  const LindbladGenerator gen = build_lindblad(params, 0.0);
  DensityMatrix rho0 = mixed_state({{0, 0.1}, {1, 0.1}, {2, 0.8}});
  rho0 = apply_unitary(rho0,
                       gate_unitary(Gate::hadamard_nuclear({0}), params));
  for (double tau : {0.5, 3.0, 10.0}) {
    const DensityMatrix out = evolve_lindblad(rho0, gen, tau);
    CHECK(std::abs(out.rho(0, 1)) < 1e-12);
    CHECK(std::abs(out.rho(4, 5)) < 1e-12);
    CHECK(std::abs(std::abs(out.rho(2, 3)) -
                   0.4 * std::exp(-2.0 * params.kappa() * tau)) < 1e-10);
  }
  // With balanced arrivals everywhere the superoperator steady state is
  // the maximally mixed state.
  const DensityMatrix steady = evolve_lindblad(rho0, gen, 50.0 * params.T1e);
  CHECK((steady.rho - Mat6::Identity() / 6.0).cwiseAbs().maxCoeff() < 1e-9);

  // Without the hyperfine tilt the +-1 blocks stay diagonal even from an
  // unbalanced start.
  SpinSystemParams straight = params;
  straight.A_zx = 0.0;
  const LindbladGenerator gen2 = build_lindblad(straight, 0.0);
  const DensityMatrix unbal = prepared_superposition(straight);
  const DensityMatrix out2 = evolve_lindblad(unbal, gen2, 7.0);
  CHECK(std::abs(out2.rho(0, 1)) < 1e-12);
  CHECK(std::abs(out2.rho(4, 5)) < 1e-12);
}

TEST_CASE("RK4 agrees with the exact propagator") {
  const SpinSystemParams params;
  const LindbladGenerator gen = build_lindblad(params, 0.02);
  const DensityMatrix rho0 = prepared_superposition(params);
  const double tau = 0.05;  // ms
  const DensityMatrix exact = evolve_lindblad(rho0, gen, tau);
  const DensityMatrix rk4 = evolve_lindblad_rk4(rho0, gen, tau, 5e-6);
  CHECK((exact.rho - rk4.rho).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("RK4 step halving converges for the hopping channel") {
  const SpinSystemParams params;
  LindbladGenerator gen = build_lindblad(params, 0.0);
  gen.hamiltonian.setZero();  // population dynamics only
  const DensityMatrix rho0 =
      mixed_state({{2, params.s1}, {1, 1.0 - params.s1}});
  const double tau = 2.0 * params.T1e;
  const DensityMatrix coarse = evolve_lindblad_rk4(rho0, gen, tau);
  const double dt_half = 0.5 * 0.01 / (params.kappa() / kMsToUs) / kMsToUs;
  const DensityMatrix fine = evolve_lindblad_rk4(rho0, gen, tau, dt_half);
  CHECK((coarse.rho - fine.rho).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("RK4 refuses oversized steps") {
  const SpinSystemParams params;
  const LindbladGenerator gen = build_lindblad(params, 0.0);
  const DensityMatrix rho0 = prepared_superposition(params);
  CHECK_THROWS_AS(evolve_lindblad_rk4(rho0, gen, 1.0, 0.5),
                  std::domain_error);
}

TEST_CASE("generator validation") {
  const SpinSystemParams params;
  CHECK_THROWS_AS(build_lindblad(params, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(build_lindblad(params, 0.0, -0.5), std::invalid_argument);
  CHECK_THROWS_AS(build_lindblad(params, 0.0, 0.0, -1.0),
                  std::invalid_argument);

  // Trace preservation of the superoperator: columns of L map to
  // traceless increments.
  const LindbladGenerator gen = build_lindblad(params, 0.05);
  const Eigen::MatrixXcd l = gen.superoperator();
  double worst = 0.0;
  for (int c = 0; c < 36; ++c) {
    cplx tr = 0.0;
    for (int d = 0; d < 6; ++d) tr += l(7 * d, c);
    worst = std::max(worst, std::abs(tr));
  }
  CHECK(worst < 1e-12);
}
