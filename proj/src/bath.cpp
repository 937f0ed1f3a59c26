#include "srswitch/bath.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "srswitch/error.hpp"
#include "srswitch/network.hpp"
#include "srswitch/units.hpp"

namespace srswitch {

void BathSpec::validate() const {
  if (!std::isfinite(temperature_k) || !(temperature_k > 0.0))
    throw ValidationError("bath temperature must be positive");
  if (!std::isfinite(reorganization_cm1) || reorganization_cm1 < 0.0)
    throw ValidationError("bath reorganization energy must be non-negative");
  if (!std::isfinite(cutoff_cm1) || !(cutoff_cm1 > 0.0))
    throw ValidationError("bath cutoff frequency must be positive");
}

double homogeneous_broadening(const BathSpec& bath) {
  bath.validate();
  const double kt = kBoltzmann * bath.temperature_k;
  return 2.0 * kPi * kt * (bath.reorganization_cm1 / bath.cutoff_cm1);
}

double spectral_density(const BathSpec& bath, double energy_cm1) {
  if (!(energy_cm1 > 0.0)) return 0.0;
  const double x = energy_cm1 / bath.cutoff_cm1;
  return (bath.reorganization_cm1 / kHbar) * x * std::exp(-x);
}

double bose_occupation(double energy_cm1, double temperature_k) {
  return 1.0 / std::expm1(energy_cm1 / (kBoltzmann * temperature_k));
}

double bath_rate(const BathSpec& bath, double energy_cm1) {
  if (energy_cm1 == 0.0) {
    return 2.0 * kPi * (bath.reorganization_cm1 / bath.cutoff_cm1) *
           (kBoltzmann * bath.temperature_k) / kHbar;
  }
  const double t = bath.temperature_k;
  // Only one of the two terms survives for a given sign of omega.
  const double emission = spectral_density(bath, energy_cm1) *
                          (energy_cm1 > 0.0 ? 1.0 + bose_occupation(energy_cm1, t) : 0.0);
  const double absorption = spectral_density(bath, -energy_cm1) *
                            (energy_cm1 < 0.0 ? bose_occupation(-energy_cm1, t) : 0.0);
  return 2.0 * kPi * (emission + absorption);
}

Eigen::MatrixXcd LindbladGenerators::site_operator(std::size_t channel, std::size_t site) const {
  const Eigen::MatrixXcd v = eigenvectors.cast<std::complex<double>>();
  return v * channels.at(channel).operators.at(site) * v.adjoint();
}

Eigen::MatrixXcd LindbladGenerators::dissipator() const {
  const auto n = eigenvectors.rows();
  const auto n2 = n * n;
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n2, n2);
  // vec(A X B) = (B^T kron A) vec(X) for column-major vec.
  auto kron = [n](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd k(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) k.block(i * n, j * n, n, n) = a(i, j) * b;
    return k;
  };
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const double rate = channels[c].rate;
    if (rate == 0.0) continue;
    for (std::size_t m = 0; m < channels[c].operators.size(); ++m) {
      const Eigen::MatrixXcd a = site_operator(c, m);
      const Eigen::MatrixXcd ada = a.adjoint() * a;
      d += rate * (kron(a.conjugate(), a) - 0.5 * kron(id, ada) - 0.5 * kron(ada.transpose(), id));
    }
  }
  return d;
}

LindbladGenerators build_generators(const SiteNetwork& net, const BathSpec& bath) {
  bath.validate();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(net.closed_hamiltonian());
  if (es.info() != Eigen::Success)
    throw NumericalError("eigendecomposition of the closed Hamiltonian failed");

  LindbladGenerators gen;
  gen.energies = es.eigenvalues();
  gen.eigenvectors = es.eigenvectors();
  const auto n = static_cast<std::size_t>(gen.energies.size());

  // Transition |E'> -> |E> carries hbar*omega = E' - E.
  struct Transition {
    double energy;
    std::size_t to;
    std::size_t from;
  };
  std::vector<Transition> transitions;
  transitions.reserve(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      transitions.push_back({gen.energies[b] - gen.energies[a], a, b});
  std::stable_sort(transitions.begin(), transitions.end(),
                   [](const Transition& x, const Transition& y) { return x.energy < y.energy; });

  std::vector<std::vector<Transition>> groups;
  for (const auto& t : transitions) {
    if (!groups.empty()) {
      const double anchor = groups.back().front().energy;
      if (std::abs(t.energy - anchor) <= kBohrBinTolerance * std::max(1.0, std::abs(anchor))) {
        groups.back().push_back(t);
        continue;
      }
    }
    groups.push_back({t});
  }

  for (const auto& group : groups) {
    LindbladChannel ch;
    double sum = 0.0;
    bool has_diagonal = false;
    for (const auto& t : group) {
      sum += t.energy;
      has_diagonal = has_diagonal || t.to == t.from;
    }
    // Pure-dephasing transitions sit exactly at zero; keep that exact so the
    // omega = 0 limit of the rate is used.
    ch.energy_cm1 = has_diagonal ? 0.0 : sum / static_cast<double>(group.size());
    ch.rate = bath_rate(bath, ch.energy_cm1);
    ch.operators.reserve(n);
    for (std::size_t m = 0; m < n; ++m) {
      Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
      for (const auto& t : group)
        a(t.to, t.from) = gen.eigenvectors(m, t.to) * gen.eigenvectors(m, t.from);
      ch.operators.push_back(std::move(a));
    }
    gen.channels.push_back(std::move(ch));
  }
  return gen;
}

}  // namespace srswitch
