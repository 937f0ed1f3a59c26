#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace srswitch {

class SiteNetwork;

/// Ohmic phonon bath: temperature (K), reorganization energy E_R (cm^-1)
/// and cutoff omega_c (cm^-1, expressed as the energy hbar*omega_c).
struct BathSpec {
  double temperature_k = 300.0;
  double reorganization_cm1 = 35.0;
  double cutoff_cm1 = 150.0;

  /// Throws ValidationError unless T > 0, E_R >= 0, omega_c > 0, all finite.
  void validate() const;

  bool operator==(const BathSpec&) const = default;
};

// All frequency arguments below are transition energies hbar*omega in cm^-1.
// Returned rates are in ps^-1.

/// Homogeneous line broadening gamma_T = 2 pi k_B T (E_R / omega_c), in cm^-1.
double homogeneous_broadening(const BathSpec& bath);

/// Ohmic spectral density J(omega) = (E_R/hbar)(omega/omega_c) exp(-omega/omega_c)
/// for omega > 0 and zero otherwise.
double spectral_density(const BathSpec& bath, double energy_cm1);

/// Bose-Einstein occupation 1 / (exp(E / k_B T) - 1).
double bose_occupation(double energy_cm1, double temperature_k);

/// Bath-induced transition rate
///   gamma(omega) = 2 pi [J(omega)(1 + n(omega)) + J(-omega) n(-omega)].
/// At omega = 0 the finite limit 2 pi (E_R/omega_c)(k_B T)/hbar is returned.
double bath_rate(const BathSpec& bath, double energy_cm1);

/// One secular channel: a Bohr frequency and its generators A_m(omega), one
/// per site m, written in the energy eigenbasis of the closed Hamiltonian.
/// A channel with energy_cm1 > 0 lowers the system energy by that amount.
struct LindbladChannel {
  double energy_cm1 = 0.0;
  double rate = 0.0;
  std::vector<Eigen::MatrixXcd> operators;
};

struct LindbladGenerators {
  Eigen::VectorXd energies;     // eigenvalues of H0, ascending
  Eigen::MatrixXd eigenvectors; // columns |E>, site basis
  std::vector<LindbladChannel> channels;  // ascending in energy_cm1

  /// Channel operator rotated into the site basis: V A V^T.
  Eigen::MatrixXcd site_operator(std::size_t channel, std::size_t site) const;

  /// Superoperator of the dissipator acting on column-major vec(rho) in the
  /// site basis.
  Eigen::MatrixXcd dissipator() const;
};

/// Relative tolerance for grouping Bohr frequencies into one channel.
inline constexpr double kBohrBinTolerance = 1e-6;

LindbladGenerators build_generators(const SiteNetwork& net, const BathSpec& bath);

}  // namespace srswitch
