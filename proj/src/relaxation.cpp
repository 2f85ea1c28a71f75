#include "nvspin/relaxation.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

namespace nvspin {

int pop_index(int m_s) {
  switch (m_s) {
    case 0: return 0;
    case -1: return 1;
    case 1: return 2;
  }
  throw std::domain_error("pop_index: m_s not in {-1,0,1}");
}

void PopulationTriple::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!((*this)[i] >= -1e-12 && (*this)[i] <= 1.0 + 1e-12)) {
      throw std::invalid_argument("PopulationTriple: entry outside [0,1]");
    }
  }
  if (std::abs(sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("PopulationTriple: sum != 1");
  }
}

RateModel RateModel::standard(double kappa_per_ms) {
  RateModel m;
  m.hops = {{0, 1, kappa_per_ms},
            {1, 0, kappa_per_ms},
            {0, -1, kappa_per_ms},
            {-1, 0, kappa_per_ms}};
  return m;
}

void RateModel::validate() const {
  for (const auto& h : hops) {
    if (h.rate < 0.0 || !std::isfinite(h.rate)) {
      throw std::invalid_argument("RateModel: negative or non-finite rate");
    }
    pop_index(h.from_ms);
    pop_index(h.to_ms);
  }
}

Eigen::Matrix3d RateModel::generator() const {
  validate();
  Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
  for (const auto& h : hops) {
    const int from = pop_index(h.from_ms);
    const int to = pop_index(h.to_ms);
    g(to, from) += h.rate;
    g(from, from) -= h.rate;
  }
  return g;
}

PopulationTriple analytic_populations(double s1, double kappa_per_ms,
                                      double tau_ms) {
  if (tau_ms < 0.0) {
    throw std::invalid_argument("analytic_populations: negative tau");
  }
  const double e3 = std::exp(-3.0 * kappa_per_ms * tau_ms);
  const double e1 = std::exp(-kappa_per_ms * tau_ms);
  const double c3 = 1.0 / 6.0 - s1 / 2.0;
  PopulationTriple p;
  p.P0 = 1.0 / 3.0 - 2.0 * c3 * e3;
  p.Pm1 = 1.0 / 3.0 + c3 * e3 - 0.5 * (1.0 - s1) * e1;
  p.Pp1 = 1.0 / 3.0 + c3 * e3 + 0.5 * (1.0 - s1) * e1;
  return p;
}

PopulationTriple numeric_populations(const PopulationTriple& initial,
                                     const RateModel& model, double tau_ms) {
  if (tau_ms < 0.0) {
    throw std::invalid_argument("numeric_populations: negative tau");
  }
  const Eigen::Matrix3d g = model.generator();
  const Eigen::Matrix3d propagator =
      matrix_exponential(g.cast<cplx>(), tau_ms).real();
  const Eigen::Vector3d p0(initial.P0, initial.Pm1, initial.Pp1);
  const Eigen::Vector3d p = propagator * p0;
  return {p(0), p(1), p(2)};
}

double LindbladGenerator::total_rate() const {
  double r = 0.0;
  for (const auto& j : jumps) r += j.rate;
  return r;
}

void LindbladGenerator::validate() const {
  if (!hamiltonian.allFinite()) {
    throw std::invalid_argument("LindbladGenerator: non-finite Hamiltonian");
  }
  for (const auto& j : jumps) {
    if (j.rate < 0.0 || !std::isfinite(j.rate) || !j.op.allFinite()) {
      throw std::invalid_argument("LindbladGenerator: bad jump operator");
    }
  }
}

Eigen::MatrixXcd LindbladGenerator::superoperator() const {
  validate();
  const Mat6 id = Mat6::Identity();
  // -i 2 pi [H, .] in 1/us: H is in MHz.
  Eigen::MatrixXcd l =
      -kI * kTwoPi *
      (Eigen::kroneckerProduct(id, hamiltonian).eval() -
       Eigen::kroneckerProduct(hamiltonian.transpose(), id).eval());
  for (const auto& j : jumps) {
    const double rate_per_us = j.rate / kMsToUs;
    const Mat6 ldl = j.op.adjoint() * j.op;
    l += rate_per_us *
         (Eigen::kroneckerProduct(j.op.conjugate(), j.op).eval() -
          0.5 * Eigen::kroneckerProduct(id, ldl).eval() -
          0.5 * Eigen::kroneckerProduct(ldl.transpose(), id).eval());
  }
  return l;
}

LindbladGenerator build_lindblad(const SpinSystemParams& params,
                                 double gamma_phi_per_ms, double sigma_qs_mhz,
                                 std::optional<double> kappa_per_ms,
                                 double extra_detuning_mhz) {
  params.validate();
  const double kappa = kappa_per_ms.value_or(params.kappa());
  if (kappa < 0.0 || gamma_phi_per_ms < 0.0 || sigma_qs_mhz < 0.0) {
    throw std::invalid_argument("build_lindblad: negative rate");
  }

  LindbladGenerator gen;
  gen.sigma_qs_mhz = sigma_qs_mhz;
  gen.hamiltonian.setZero();
  for (int m_s : {1, 0, -1}) {
    const int k = block_offset(m_s);
    gen.hamiltonian.block<2, 2>(k, k) =
        nuclear_block_hamiltonian(params, m_s, extra_detuning_mhz);
  }

  if (kappa > 0.0) {
    for (const auto& [from, to] : std::initializer_list<std::pair<int, int>>{
             {0, 1}, {1, 0}, {0, -1}, {-1, 0}}) {
      for (int n = 0; n < 2; ++n) {
        Mat6 op = Mat6::Zero();
        op(block_offset(to) + n, block_offset(from) + n) = 1.0;
        gen.jumps.push_back({op, kappa});
      }
    }
  }
  if (gamma_phi_per_ms > 0.0) {
    gen.jumps.push_back(
        {2.0 * SpinOperatorSet::standard().Iz, gamma_phi_per_ms});
  }
  return gen;
}

namespace {

Eigen::Map<const Eigen::Matrix<cplx, 36, 1>> vec_of(const Mat6& m) {
  return Eigen::Map<const Eigen::Matrix<cplx, 36, 1>>(m.data());
}

Mat6 unvec(const Eigen::Matrix<cplx, 36, 1>& v) {
  return Eigen::Map<const Mat6>(v.data());
}

}  // namespace

DensityMatrix evolve_lindblad(const DensityMatrix& rho,
                              const LindbladGenerator& gen, double t_ms) {
  if (t_ms < 0.0) throw std::invalid_argument("evolve_lindblad: t < 0");
  if (!rho.rho.allFinite()) {
    throw std::invalid_argument("evolve_lindblad: non-finite state");
  }
  const Eigen::MatrixXcd propagator =
      matrix_exponential(gen.superoperator(), t_ms * kMsToUs);
  DensityMatrix out;
  out.rho = unvec(propagator * vec_of(rho.rho));
  // The exponential preserves Hermiticity only up to round-off.
  out.rho = 0.5 * (out.rho + out.rho.adjoint()).eval();
  return out;
}

DensityMatrix evolve_lindblad_rk4(const DensityMatrix& rho,
                                  const LindbladGenerator& gen, double t_ms,
                                  double dt_ms) {
  if (t_ms < 0.0) throw std::invalid_argument("evolve_lindblad_rk4: t < 0");
  if (!rho.rho.allFinite()) {
    throw std::invalid_argument("evolve_lindblad_rk4: non-finite state");
  }
  const double t_us = t_ms * kMsToUs;
  if (t_us == 0.0) return rho;
  const Eigen::MatrixXcd l = gen.superoperator();

  double dt_us = dt_ms * kMsToUs;
  if (dt_us <= 0.0) {
    double nu_max = 0.0;
    for (int m_s : {1, 0, -1}) {
      const int k = block_offset(m_s);
      const Mat2 h = gen.hamiltonian.block<2, 2>(k, k);
      Eigen::SelfAdjointEigenSolver<Mat2> es(h, Eigen::EigenvaluesOnly);
      nu_max = std::max(nu_max,
                        es.eigenvalues()(1) - es.eigenvalues()(0));  // MHz
    }
    double rate_max_per_us = 0.0;
    for (const auto& j : gen.jumps) {
      rate_max_per_us = std::max(rate_max_per_us, j.rate / kMsToUs);
    }
    dt_us = 0.01 / std::max({nu_max, rate_max_per_us, 1e-12});
    dt_us = std::min(dt_us, t_us);
  }

  const double l_norm = l.cwiseAbs().rowwise().sum().maxCoeff();
  if (dt_us * l_norm > 0.1) {
    throw std::domain_error(
        "evolve_lindblad_rk4: step too large (dt*||L|| > 0.1)");
  }

  const long long n_steps =
      std::max<long long>(1, static_cast<long long>(std::ceil(t_us / dt_us)));
  const double h = t_us / static_cast<double>(n_steps);

  using Vec36 = Eigen::Matrix<cplx, 36, 1>;
  Vec36 v = vec_of(rho.rho);
  Vec36 k1, k2, k3, k4;
  for (long long i = 0; i < n_steps; ++i) {
    k1.noalias() = l * v;
    k2.noalias() = l * (v + 0.5 * h * k1);
    k3.noalias() = l * (v + 0.5 * h * k2);
    k4.noalias() = l * (v + h * k3);
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (!v.allFinite()) {
    throw std::runtime_error("evolve_lindblad_rk4: integration diverged");
  }
  DensityMatrix out;
  out.rho = unvec(v);
  out.rho = 0.5 * (out.rho + out.rho.adjoint()).eval();
  return out;
}

PopulationTriple populations(const DensityMatrix& rho) {
  PopulationTriple p;
  p.P0 = ms_block(rho, 0).trace().real();
  p.Pm1 = ms_block(rho, -1).trace().real();
  p.Pp1 = ms_block(rho, 1).trace().real();
  return p;
}

}  // namespace nvspin
