#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "srswitch/bath.hpp"
#include "srswitch/dynamics.hpp"
#include "srswitch/network.hpp"
#include "srswitch/spectral.hpp"

namespace srswitch {

enum class AxisScale { log, linear };

struct Axis {
  std::string name;
  AxisScale scale = AxisScale::log;
  double min = 1e-2;
  double max = 1e4;
  std::size_t points = 61;

  void validate() const;  // >= 2 points, min < max, log axes need min > 0
  std::vector<double> values() const;
};

struct SweepSpec {
  std::string model = "multimer";  // model file path, or the built-in multimer
  Law law = Law::von_neumann;
  Integrator integrator = Integrator::exact;
  Axis kappa_left{"kappa_L", AxisScale::log, 1e-2, 1e4, 61};
  std::optional<Axis> kappa_right;   // set for 2D sweeps
  double q = kDefaultQ;              // 1D sweeps: kappa_R = kappa_L / q
  double horizon_ps = kDefaultHorizonPs;
  std::optional<BathSpec> bath;      // falls back to the model's bath
  std::optional<double> gamma_d;     // semiclassical rates; default gamma_T of the bath
  InitialState initial;
  int workers = 0;                   // 0: OpenMP default
  std::string output;

  void validate() const;
  std::string to_json() const;       // full spec as a JSON object
};

/// One grid point. Failed points carry NaN fields and a non-empty error.
struct EfficiencyRecord {
  double kappa_left = 0.0;
  double kappa_right = 0.0;
  double eta_left = 0.0;
  double eta_right = 0.0;
  double unbalanced = 0.0;  // eta_left - eta_right
  double final_trace = 0.0;
  std::string error;

  bool ok() const { return error.empty(); }
};

/// Pure per-point kernel. Everything that does not depend on the sink
/// strengths (initial state, dissipator, classical rates) is prepared once in
/// the constructor and shared read-only between workers.
class PointEvaluator {
 public:
  PointEvaluator(SiteNetwork net_template, const SweepSpec& spec);

  EfficiencyRecord operator()(double kappa_left, double kappa_right) const;

  const SiteNetwork& network() const noexcept { return template_; }

 private:
  SiteNetwork template_;
  Law law_;
  EvolutionOptions options_;
  DensityMatrix rho0_;
  std::optional<Eigen::MatrixXcd> dissipator_;
  std::optional<RateMatrix> rates_;
};

using KappaPoint = std::pair<double, double>;

/// Evaluates every point with an OpenMP worksharing loop; output order follows
/// `points` regardless of scheduling. workers <= 0 uses the OpenMP default.
std::vector<EfficiencyRecord> evaluate_points(const PointEvaluator& eval,
                                              std::span<const KappaPoint> points,
                                              int workers = 0);

/// Serial reference for evaluate_points.
std::vector<EfficiencyRecord> evaluate_points_serial(const PointEvaluator& eval,
                                                     std::span<const KappaPoint> points);

struct Crossing {
  double kappa = 0.0;
  bool primary = false;  // the crossing nearest sqrt(q) in log distance
};

/// Sign changes of `unbalanced` along a kappa_L-ordered record list, located by
/// linear interpolation in log kappa_L. Values with |unbalanced| <= dead_band
/// count as zero and never produce a crossing.
std::vector<Crossing> find_crossings(std::span<const EfficiencyRecord> records, double q,
                                     double dead_band = 1e-9);

struct Sweep1DResult {
  std::vector<EfficiencyRecord> records;  // ordered by kappa_L
  std::vector<Crossing> crossings;        // empty when no sign change

  std::optional<double> primary_crossing() const;
};

Sweep1DResult sweep_1d(const SiteNetwork& net_template, const SweepSpec& spec);

/// Full grid, kappa_L outer and kappa_R inner.
std::vector<EfficiencyRecord> sweep_2d(const SiteNetwork& net_template, const SweepSpec& spec);

struct Polyline {
  /// +1: eta_L / eta_R = ratio, -1: eta_R / eta_L = ratio, 0: ratio == 1.
  int family = 0;
  bool closed = false;
  std::vector<KappaPoint> points;  // (kappa_L, kappa_R)
};

/// Iso-ratio curves of eta_L / eta_R on a sweep_2d grid with n_left x n_right
/// points, by marching squares on log(eta_L / eta_R) over log-kappa axes.
/// Returns an empty set when the ratio is not attained. Requires ratio >= 1.
std::vector<Polyline> contour_extract(std::span<const EfficiencyRecord> grid,
                                      std::size_t n_left, std::size_t n_right,
                                      double ratio = 9.0);

struct SpectralScanPoint {
  double kappa_left = 0.0;
  double kappa_right = 0.0;
  Eigen::VectorXd energies;
  Eigen::VectorXd widths;
  Eigen::VectorXd participation;
  Eigen::VectorXd overlap_left;
  Eigen::VectorXd overlap_right;
  std::size_t widest = 0;
  double avg_sub_width = 0.0;  // subradiant_average_width, NaN for N < 3
  PartialWidths partial;
};

/// Eigen-analysis along the kappa_L axis at fixed q (parallel over points).
std::vector<SpectralScanPoint> scan_spectral(const SiteNetwork& net_template,
                                             const SweepSpec& spec);

}  // namespace srswitch
