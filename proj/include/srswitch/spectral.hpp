#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "srswitch/network.hpp"

namespace srswitch {

/// Right eigenpairs of an effective Hamiltonian, sorted by ascending real
/// energy. Eigenvectors are columns with unit Euclidean norm.
struct SpectralResult {
  Eigen::VectorXcd eigenvalues;   // E_k - i Gamma_k / 2, cm^-1
  Eigen::MatrixXcd eigenvectors;
  Eigen::VectorXd widths;         // Gamma_k = -2 Im(eigenvalue)
  Eigen::VectorXd participation;  // PR per eigenvector
  Eigen::VectorXd overlap_left;   // |<L|psi_k>|^2, NaN without an L sink
  Eigen::VectorXd overlap_right;
  double mean_spacing = 0.0;      // (max Re E - min Re E) / (N - 1)
  double max_residual = 0.0;      // max_k ||H v_k - lambda_k v_k||

  std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }

  /// Index of the state with the largest width (lowest index on ties).
  std::size_t widest() const;
};

/// Eigenpairs failing ||H v - lambda v|| <= kResidualTol * ||H|| raise NumericalError.
inline constexpr double kResidualTol = 1e-10;

SpectralResult eigendecompose(const EffectiveHamiltonian& h,
                              const SiteNetwork* net = nullptr);

/// Convenience: eigendecompose(effective_hamiltonian(net), &net).
SpectralResult eigendecompose(const SiteNetwork& net);

/// 1 / sum_n |psi_n|^4 for the normalized vector. Throws on a zero vector.
double participation_ratio(const Eigen::VectorXcd& vector);

/// Mean of the N-2 smallest widths divided by the mean level spacing.
/// Requires N >= 3.
double subradiant_average_width(const SpectralResult& spec);

/// States localized on a sink (|<s|psi>|^2 > 1/2 for some sink site s).
std::vector<bool> superradiant_mask(const SpectralResult& spec, const SiteNetwork& net);

struct PartialWidths {
  double left = 0.0;
  double right = 0.0;
};

/// Gamma_{L,R} = gamma_{L,R} sum_k |<L,R|psi_k>|^2 over the subradiant states,
/// i.e. every state not flagged by superradiant_mask.
PartialWidths partial_widths(const SpectralResult& spec, const SiteNetwork& net);

/// Analytic switching point kappa_L ~ sqrt(q). Requires q > 0.
double switching_point_estimate(double q);

/// n log-spaced points between lo and hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

struct TransitionReport {
  std::vector<double> kappa_grid;
  std::vector<double> avg_sub_width;  // subradiant_average_width per grid point
  std::vector<std::size_t> maxima;    // indices of interior local maxima
  std::vector<std::size_t> minima;    // indices of interior local minima
  std::optional<double> st_left;      // smaller-kappa of the two largest maxima
  std::optional<double> st_right;
  double kappa_switch_est = 0.0;      // sqrt(q)

  bool two_peaks_found() const { return st_left.has_value() && st_right.has_value(); }
};

/// Indices i (0 < i < n-1) with v[i-1] < v[i] >= v[i+1]; on a plateau the
/// smallest-kappa point is reported.
std::vector<std::size_t> local_maxima(std::span<const double> v);
std::vector<std::size_t> local_minima(std::span<const double> v);

/// Scan kappa_L over the grid at fixed q (kappa_R = kappa_L / q) and locate the
/// superradiance transitions as peaks of the subradiant average width.
/// The grid must be log-spaced with at least 30 points covering [0.1, 10 q].
/// `workers` = 0 uses the OpenMP default.
TransitionReport detect_transitions(const SiteNetwork& net_template, double q,
                                    std::span<const double> kappa_grid,
                                    int workers = 0);

/// Serial reference for detect_transitions.
TransitionReport detect_transitions_serial(const SiteNetwork& net_template, double q,
                                           std::span<const double> kappa_grid);

}  // namespace srswitch
