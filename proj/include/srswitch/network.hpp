#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "srswitch/bath.hpp"

namespace srswitch {

enum class SinkLabel { left, right };

std::string_view to_string(SinkLabel label);
SinkLabel parse_sink_label(std::string_view text);

/// A sink drains probability from one site at rate gamma / hbar.
struct Sink {
  std::size_t site = 0;  // 0-based
  double gamma = 0.0;    // cm^-1
  SinkLabel label = SinkLabel::left;

  bool operator==(const Sink&) const = default;
};

/// Pair of sites (0-based) holding the initial excitation.
using SitePair = std::pair<std::size_t, std::size_t>;

/// Site energies, a symmetric real coupling matrix with zero diagonal and at
/// most one sink per label. Immutable once constructed; the constructor
/// enforces every invariant and throws ValidationError otherwise.
class SiteNetwork {
 public:
  SiteNetwork(std::vector<double> energies, Eigen::MatrixXd couplings,
              std::vector<Sink> sinks,
              std::optional<SitePair> special_pair = std::nullopt,
              std::optional<BathSpec> bath = std::nullopt);

  std::size_t size() const noexcept { return energies_.size(); }
  const std::vector<double>& energies() const noexcept { return energies_; }
  const Eigen::MatrixXd& couplings() const noexcept { return couplings_; }
  const std::vector<Sink>& sinks() const noexcept { return sinks_; }
  const std::optional<SitePair>& special_pair() const noexcept { return special_pair_; }
  const std::optional<BathSpec>& bath() const noexcept { return bath_; }

  /// Sink with the given label, or nullptr.
  const Sink* sink(SinkLabel label) const noexcept;
  double gamma(SinkLabel label) const noexcept;

  /// Closed-system Hamiltonian H0 = diag(energies) + couplings.
  Eigen::MatrixXd closed_hamiltonian() const;

  /// Coupling scale Omega used to express sink strengths as kappa = gamma/(2 Omega):
  /// the largest |coupling| incident on any sink site, or on any site when the
  /// network has no sinks. For the multimer this is the chain coupling.
  double reference_coupling() const;

  /// Copy with new decay strengths on the existing L/R sinks. A label the
  /// network lacks is ignored unless its gamma is nonzero, which throws.
  SiteNetwork with_gammas(double gamma_left, double gamma_right) const;

  /// with_gammas(2 Omega kappa_left, 2 Omega kappa_right), Omega = reference_coupling().
  SiteNetwork with_kappas(double kappa_left, double kappa_right) const;

  SiteNetwork with_bath(std::optional<BathSpec> bath) const;

  bool operator==(const SiteNetwork& other) const;

 private:
  std::vector<double> energies_;
  Eigen::MatrixXd couplings_;
  std::vector<Sink> sinks_;
  std::optional<SitePair> special_pair_;
  std::optional<BathSpec> bath_;
};

/// kappa_{L,R} = gamma_{L,R} / (2 Omega) and q = kappa_L / kappa_R.
struct CouplingRatios {
  double kappa_left = 0.0;
  double kappa_right = 0.0;
  double q = 0.0;  // NaN when kappa_right == 0
};

CouplingRatios coupling_ratios(const SiteNetwork& net);

/// The six-site multimer: open chain 5-3-1-2-4-6 (1-based) with bond 1-2 equal
/// to omega_sp and all other bonds omega, sink L on site 5 and R on site 6,
/// special pair (1, 2). Requires omega > 0, omega_sp > 0, gammas >= 0.
SiteNetwork build_multimer(double omega, double omega_sp, double gamma_left,
                           double gamma_right);

/// Parameter set of the reference multimer: Omega = 100, Omega_sp = 200 cm^-1.
inline constexpr double kDefaultOmega = 100.0;
inline constexpr double kDefaultOmegaSp = 200.0;
inline constexpr double kDefaultQ = 100.0;
inline constexpr double kDefaultHorizonPs = 20.0;

// ---- model files -----------------------------------------------------------

/// Parse the JSON model document. Throws ValidationError with a descriptive
/// message on malformed input or violated invariants.
SiteNetwork parse_network(std::string_view json_text);
SiteNetwork load_network(const std::filesystem::path& path);

/// Serialize with keys in the order sites, couplings, sinks, special_pair, bath.
std::string serialize_network(const SiteNetwork& net);
void save_network(const SiteNetwork& net, const std::filesystem::path& path);

// ---- effective Hamiltonian -------------------------------------------------

/// H_eff = H0 - i sum_s (gamma_s / 2) |s><s|.
struct EffectiveHamiltonian {
  Eigen::MatrixXcd matrix;
};

EffectiveHamiltonian effective_hamiltonian(const SiteNetwork& net);

// ---- density matrices ------------------------------------------------------

/// Hermitian positive semidefinite matrix with trace in [0, 1].
class DensityMatrix {
 public:
  static constexpr double kHermiticityTol = 1e-12;
  static constexpr double kEigenvalueTol = 1e-10;
  static constexpr double kTraceTol = 1e-10;

  /// Throws ValidationError if the matrix is not a valid density matrix.
  explicit DensityMatrix(Eigen::MatrixXcd elements);

  const Eigen::MatrixXcd& matrix() const noexcept { return elements_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(elements_.rows()); }
  double trace() const { return elements_.trace().real(); }

 private:
  Eigen::MatrixXcd elements_;
};

struct InitialState {
  enum class Kind { symmetric_pure, symmetric_mixed, site };
  Kind kind = Kind::symmetric_pure;
  std::size_t site = 0;  // 0-based, used by Kind::site

  /// Accepts "pure", "mixed" or "site:k" with k 1-based.
  static InitialState parse(std::string_view text);
  std::string to_string() const;
};

/// symmetric_pure: (|a>+|b>)(<a|+<b|)/2 on the special pair (a, b);
/// symmetric_mixed: (|a><a| + |b><b|)/2; site: |k><k|.
DensityMatrix initial_state(const SiteNetwork& net, const InitialState& kind);

}  // namespace srswitch
