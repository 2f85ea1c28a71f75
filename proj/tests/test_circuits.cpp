#include "doctest.h"

#include <cmath>

#include "nvspin/circuits.hpp"
#include "nvspin/protocols.hpp"

using namespace nvspin;

namespace {

const SpinSystemParams kParams;

DensityMatrix prepared(const SpinSystemParams& p) {
  return mixed_state({{2, p.s1}, {1, 1.0 - p.s1}});
}

}  // namespace

TEST_CASE("gate unitaries are unitary and block-structured") {
  for (const Gate& g :
       {Gate::hadamard_nuclear({0}), Gate::pi_x_nuclear({0, -1}),
        Gate::swap_e0m1(), Gate::mw_pulse(90.0, 0.7)}) {
    const UnitaryOperator u = gate_unitary(g, kParams);
    CHECK_NOTHROW(u.validate());
  }

  // Nuclear gates leave unlisted blocks alone.
  const UnitaryOperator h0 = gate_unitary(Gate::hadamard_nuclear({0}),
                                          kParams);
  CHECK((h0.u.block<2, 2>(0, 0) - Mat2::Identity()).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((h0.u.block<2, 2>(4, 4) - Mat2::Identity()).cwiseAbs().maxCoeff() ==
        0.0);

  // The microwave pulse never touches m_S = +1 or the nucleus.
  const UnitaryOperator mw = gate_unitary(Gate::mw_pulse(90.0, 1.2), kParams);
  CHECK((mw.u.block<2, 2>(0, 0) - Mat2::Identity()).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK(std::abs(mw.u(2, 3)) == 0.0);
  CHECK(std::abs(mw.u(2, 5)) == 0.0);

  CHECK_THROWS_AS(gate_unitary(Gate::hadamard_nuclear({}), kParams),
                  std::invalid_argument);
  CHECK_THROWS_AS(gate_unitary(Gate::free_evolution(1.0), kParams),
                  std::invalid_argument);
}

TEST_CASE("SWAP semantics") {
  const UnitaryOperator swap = gate_unitary(Gate::swap_e0m1(), kParams);
  CHECK((swap.u * swap.u - Mat6::Identity()).cwiseAbs().maxCoeff() == 0.0);

  // Basis action: |0,dn> -> |-1,up>.
  Vec6 ket = Vec6::Zero();
  ket(3) = 1.0;
  const Vec6 mapped = swap.u * ket;
  CHECK(std::abs(mapped(4) - 1.0) == 0.0);

  // |0><0| (x) nuclear rho -> rho as electron state (x) |up><up|.
  Mat2 nuc;
  nuc << 0.6, cplx(0.2, 0.1), cplx(0.2, -0.1), 0.4;
  DensityMatrix rho;
  rho.rho.block<2, 2>(2, 2) = nuc;
  const DensityMatrix out = apply_unitary(rho, swap);
  CHECK(out.rho(2, 2) == nuc(0, 0));   // |0,up>
  CHECK(out.rho(4, 4) == nuc(1, 1));   // |-1,up>
  CHECK(out.rho(2, 4) == nuc(0, 1));   // electron coherence, nuclear up
  CHECK(std::abs(out.rho(3, 3)) == 0.0);
  CHECK(std::abs(out.rho(5, 5)) == 0.0);
}

TEST_CASE("ramped readout pulse phase") {
  const Gate g = mw90_phase(-0.5, 1.0 / kMsToUs, 0.0);  // tau = 1 us
  CHECK(g.phase_rad == doctest::Approx(-kPi).epsilon(1e-12));
  const Gate g2 = mw90_phase(0.7, 0.0, 1.23);
  CHECK(g2.phase_rad == doctest::Approx(1.23));

  // Hahn-echo detuning convention keeps both protocols at the same
  // detected frequency.
  const double nu_d_fid = -0.5;
  const double nu_d_hahn = default_nu_d(Protocol::Hahn, kParams);
  CHECK(nu_d_hahn == doctest::Approx(nu_d_fid + kParams.nu_C));
  CHECK(nu_d_hahn == doctest::Approx(-0.342));
}

TEST_CASE("FID circuit at tau = 0") {
  const Circuit fid = make_fid_circuit(-0.5, 0.0);
  EvolutionConfig evo;
  evo.kappa_per_ms = 0.0;
  const DensityMatrix out =
      run_circuit(prepared(kParams), fid, 0.0, kParams, evo);
  CHECK(readout_p0(out) == doctest::Approx(0.40).epsilon(1e-12));

  // With an initial pulse phase the signal picks up +sin(phi0).
  for (double phi0 : {0.4, -1.1, 2.9}) {
    const Circuit c = make_fid_circuit(-0.5, phi0);
    const DensityMatrix o = run_circuit(prepared(kParams), c, 0.0, kParams,
                                        evo);
    CHECK(readout_p0(o) ==
          doctest::Approx(0.5 * kParams.s1 * (1.0 + std::sin(phi0)))
              .epsilon(1e-12));
  }
}

TEST_CASE("noise-free FID oscillates at nu_C + nu_d") {
  EvolutionConfig evo;
  evo.kappa_per_ms = 0.0;
  const double nu_d = -0.5;
  const double nu_s = kParams.nu_C + nu_d;  // -0.342 MHz
  const Circuit fid = make_fid_circuit(nu_d, 0.0);
  for (double tau_us : {0.9, 2.2, 4.7, 8.1}) {
    const double tau_ms = tau_us / kMsToUs;
    const DensityMatrix out =
        run_circuit(prepared(kParams), fid, tau_ms, kParams, evo);
    const double expected =
        0.5 * kParams.s1 * (1.0 + std::sin(kTwoPi * nu_s * tau_us));
    CHECK(readout_p0(out) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("echo refocuses any static nuclear detuning") {
  EvolutionConfig evo;
  evo.kappa_per_ms = 0.0;
  const double nu_d = -0.342;
  const Circuit hahn = make_hahn_circuit(nu_d, 0.0);
  for (double detuning : {0.0, 0.013, -0.04}) {
    evo.extra_detuning_mhz = detuning;
    for (double tau_us : {1.4, 5.0, 11.0}) {
      const double tau_ms = tau_us / kMsToUs;
      const DensityMatrix out =
          run_circuit(prepared(kParams), hahn, tau_ms, kParams, evo);
      const double expected =
          0.5 * kParams.s1 * (1.0 + std::sin(kTwoPi * nu_d * tau_us));
      CHECK(readout_p0(out) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("analytic and lindblad free evolution agree on the readout") {
  const Circuit fid = make_fid_circuit(-0.5, 0.3);
  EvolutionConfig analytic;
  analytic.engine = EvolutionEngine::analytic;
  analytic.gamma_phi_per_ms = 0.02;
  EvolutionConfig lindblad = analytic;
  lindblad.engine = EvolutionEngine::lindblad;
  for (double tau_ms : {0.4, 2.1, 6.3}) {
    const double pa = readout_p0(
        run_circuit(prepared(kParams), fid, tau_ms, kParams, analytic));
    const double pl = readout_p0(
        run_circuit(prepared(kParams), fid, tau_ms, kParams, lindblad));
    CHECK(std::abs(pa - pl) < 1e-9);
  }
}

TEST_CASE("FID amplitude envelope under hopping matches s1 e^{-2 kappa tau}") {
  // The oscillating part of the signal is the surviving m_S = 0 nuclear
  // coherence; hopping destroys it at the block departure rate 2 kappa.
  EvolutionConfig evo;
  evo.engine = EvolutionEngine::lindblad;
  const double kappa = kParams.kappa();
  const Circuit sin_probe = make_fid_circuit(-0.5, 0.0);
  const Circuit cos_probe = make_fid_circuit(-0.5, kPi / 2.0);
  for (double tau_ms : {1.0, 4.0, 9.0}) {
    const double base =
        0.5 * (analytic_populations(kParams.s1, kappa, tau_ms).P0 +
               analytic_populations(kParams.s1, kappa, tau_ms).Pm1);
    const double ps = readout_p0(
        run_circuit(prepared(kParams), sin_probe, tau_ms, kParams, evo));
    const double pc = readout_p0(
        run_circuit(prepared(kParams), cos_probe, tau_ms, kParams, evo));
    const double amplitude = 2.0 * std::hypot(ps - base, pc - base);
    const double expected = kParams.s1 * std::exp(-2.0 * kappa * tau_ms);
    CHECK(std::abs(amplitude - expected) < 1e-6);
  }
}

TEST_CASE("circuit JSON round trip") {
  const Circuit hahn = make_hahn_circuit(-0.342, 0.25);
  const nlohmann::json j = circuit_to_json(hahn);
  const Circuit back = circuit_from_json(j);
  CHECK(back.label == "Hahn");
  REQUIRE(back.gates.size() == hahn.gates.size());
  CHECK(back.gates[1].tau_fraction == doctest::Approx(0.5));
  CHECK(back.gates[2].blocks == std::set<int>{0, -1});
  REQUIRE(back.gates[5].ramp.has_value());
  CHECK(back.gates[5].ramp->nu_d_mhz == doctest::Approx(-0.342));

  CHECK_THROWS_AS(
      circuit_from_json(nlohmann::json{{"label", "x"},
                                       {"gates", {{{"kind", "bogus"}}}}}),
      std::invalid_argument);
}

TEST_CASE("circuit validation") {
  Circuit c;
  c.gates = {Gate::free_evolution(0.5), Gate::free_evolution(0.3)};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.gates = {Gate::free_evolution(0.5), Gate::free_evolution(0.5)};
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("readout examples") {
  CHECK(readout_p0(mixed_state({{2, 0.8}, {1, 0.2}})) ==
        doctest::Approx(0.8));
  CHECK(readout_p0(pure_state(1)) == 0.0);
  DensityMatrix mixed;
  mixed.rho = Mat6::Identity() / 6.0;
  CHECK(readout_p0(mixed) == doctest::Approx(1.0 / 3.0));
}
