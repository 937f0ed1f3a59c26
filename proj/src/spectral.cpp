#include "srswitch/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <omp.h>

#include "srswitch/error.hpp"

namespace srswitch {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::size_t SpectralResult::widest() const {
  Eigen::Index k = 0;
  widths.maxCoeff(&k);
  return static_cast<std::size_t>(k);
}

SpectralResult eigendecompose(const EffectiveHamiltonian& h, const SiteNetwork* net) {
  const Eigen::MatrixXcd& m = h.matrix;
  if (m.rows() != m.cols() || m.rows() == 0)
    throw ValidationError("effective Hamiltonian must be square and non-empty");
  if (!m.allFinite()) throw ValidationError("effective Hamiltonian has non-finite entries");
  const auto n = m.rows();

  // Large common site energies (e.g. ~15000 cm^-1) cost accuracy in the widths;
  // shifting by the mean diagonal energy leaves eigenvectors unchanged.
  const double shift = m.diagonal().real().mean();
  const Eigen::MatrixXcd shifted = m - shift * Eigen::MatrixXcd::Identity(n, n);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(shifted, true);
  if (solver.info() != Eigen::Success)
    throw NumericalError("complex eigensolver did not converge",
                         std::numeric_limits<double>::infinity());

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto& raw_vals = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (raw_vals[a].real() != raw_vals[b].real()) return raw_vals[a].real() < raw_vals[b].real();
    return raw_vals[a].imag() > raw_vals[b].imag();
  });

  SpectralResult r;
  r.eigenvalues.resize(n);
  r.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    r.eigenvalues[k] = raw_vals[order[k]] + shift;
    Eigen::VectorXcd v = solver.eigenvectors().col(order[k]);
    const double norm = v.norm();
    if (!(norm > 0.0)) throw NumericalError("eigensolver returned a zero eigenvector");
    r.eigenvectors.col(k) = v / norm;
  }

  const double hnorm = m.cwiseAbs().rowwise().sum().maxCoeff();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double res = (m * r.eigenvectors.col(k) - r.eigenvalues[k] * r.eigenvectors.col(k)).norm();
    r.max_residual = std::max(r.max_residual, res);
  }
  if (r.max_residual > kResidualTol * std::max(hnorm, 1e-300))
    throw NumericalError("eigenpair residual " + std::to_string(r.max_residual) +
                             " exceeds tolerance",
                         r.max_residual);

  r.widths = -2.0 * r.eigenvalues.imag();
  r.participation.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) r.participation[k] = participation_ratio(r.eigenvectors.col(k));

  r.overlap_left = Eigen::VectorXd::Constant(n, kNaN);
  r.overlap_right = Eigen::VectorXd::Constant(n, kNaN);
  if (net) {
    if (static_cast<Eigen::Index>(net->size()) != n)
      throw ValidationError("network size does not match the Hamiltonian");
    if (const Sink* s = net->sink(SinkLabel::left))
      r.overlap_left = r.eigenvectors.row(s->site).cwiseAbs2().transpose();
    if (const Sink* s = net->sink(SinkLabel::right))
      r.overlap_right = r.eigenvectors.row(s->site).cwiseAbs2().transpose();
  }

  const auto re = r.eigenvalues.real();
  r.mean_spacing = n > 1 ? (re.maxCoeff() - re.minCoeff()) / static_cast<double>(n - 1) : kNaN;
  return r;
}

SpectralResult eigendecompose(const SiteNetwork& net) {
  return eigendecompose(effective_hamiltonian(net), &net);
}

double participation_ratio(const Eigen::VectorXcd& vector) {
  const double norm2 = vector.squaredNorm();
  if (!(norm2 > 0.0)) throw ValidationError("participation ratio of a zero vector");
  const double sum4 = vector.cwiseAbs2().cwiseAbs2().sum();
  return norm2 * norm2 / sum4;
}

double subradiant_average_width(const SpectralResult& spec) {
  const auto n = spec.size();
  if (n < 3) throw ValidationError("subradiant average width needs at least 3 states");
  std::vector<double> w(spec.widths.data(), spec.widths.data() + n);
  std::sort(w.begin(), w.end());
  const double mean = std::accumulate(w.begin(), w.end() - 2, 0.0) / static_cast<double>(n - 2);
  if (mean == 0.0) return 0.0;
  return mean / spec.mean_spacing;
}

std::vector<bool> superradiant_mask(const SpectralResult& spec, const SiteNetwork& net) {
  std::vector<bool> mask(spec.size(), false);
  for (const auto& s : net.sinks()) {
    if (s.gamma == 0.0) continue;
    for (std::size_t k = 0; k < spec.size(); ++k)
      if (std::norm(spec.eigenvectors(s.site, k)) > 0.5) mask[k] = true;
  }
  return mask;
}

PartialWidths partial_widths(const SpectralResult& spec, const SiteNetwork& net) {
  const auto sr = superradiant_mask(spec, net);
  PartialWidths pw;
  auto accumulate = [&](SinkLabel label) {
    const Sink* s = net.sink(label);
    if (!s) return 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < spec.size(); ++k)
      if (!sr[k]) sum += std::norm(spec.eigenvectors(s->site, k));
    return s->gamma * sum;
  };
  pw.left = accumulate(SinkLabel::left);
  pw.right = accumulate(SinkLabel::right);
  return pw;
}

double switching_point_estimate(double q) {
  if (!(q > 0.0) || !std::isfinite(q)) throw ValidationError("q must be positive");
  return std::sqrt(q);
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (n < 2) throw ValidationError("grid needs at least 2 points");
  if (!(lo > 0.0) || !(hi > lo)) throw ValidationError("log grid needs 0 < min < max");
  std::vector<double> g(n);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<std::size_t> local_maxima(std::span<const double> v) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i)
    if (v[i - 1] < v[i] && v[i] >= v[i + 1]) out.push_back(i);
  return out;
}

std::vector<std::size_t> local_minima(std::span<const double> v) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i)
    if (v[i - 1] > v[i] && v[i] <= v[i + 1]) out.push_back(i);
  return out;
}

namespace {

void validate_transition_grid(double q, std::span<const double> grid) {
  if (!(q > 0.0) || !std::isfinite(q)) throw ValidationError("q must be positive");
  if (grid.size() < 30)
    throw ValidationError("transition grid needs at least 30 points, got " +
                          std::to_string(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw ValidationError("transition grid values must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw ValidationError("transition grid must be strictly increasing");
  }
  const double step = std::log(grid[1] / grid[0]);
  for (std::size_t i = 2; i < grid.size(); ++i)
    if (std::abs(std::log(grid[i] / grid[i - 1]) - step) > 1e-6 * std::max(1.0, step))
      throw ValidationError("transition grid must be log-spaced");
  constexpr double slack = 1e-9;
  if (grid.front() > 0.1 * (1 + slack) || grid.back() < 10.0 * q * (1 - slack))
    throw ValidationError("transition grid must span at least [0.1, 10 q]");
}

TransitionReport finish_report(std::span<const double> grid, std::vector<double> curve, double q) {
  TransitionReport r;
  r.kappa_grid.assign(grid.begin(), grid.end());
  r.avg_sub_width = std::move(curve);
  r.maxima = local_maxima(r.avg_sub_width);
  r.minima = local_minima(r.avg_sub_width);
  r.kappa_switch_est = switching_point_estimate(q);
  if (r.maxima.size() >= 2) {
    std::vector<std::size_t> by_height = r.maxima;
    std::stable_sort(by_height.begin(), by_height.end(), [&](std::size_t a, std::size_t b) {
      return r.avg_sub_width[a] > r.avg_sub_width[b];
    });
    const auto lo = std::min(by_height[0], by_height[1]);
    const auto hi = std::max(by_height[0], by_height[1]);
    r.st_left = grid[lo];
    r.st_right = grid[hi];
  }
  return r;
}

double width_point(const SiteNetwork& net_template, double kappa, double q) {
  return subradiant_average_width(eigendecompose(net_template.with_kappas(kappa, kappa / q)));
}

}  // namespace

TransitionReport detect_transitions(const SiteNetwork& net_template, double q,
                                    std::span<const double> kappa_grid, int workers) {
  validate_transition_grid(q, kappa_grid);
  const auto n = static_cast<long>(kappa_grid.size());
  std::vector<double> curve(kappa_grid.size());
  std::vector<std::string> errors(kappa_grid.size());
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (long i = 0; i < n; ++i) {
    try {
      curve[i] = width_point(net_template, kappa_grid[i], q);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw NumericalError("transition scan failed: " + e);
  return finish_report(kappa_grid, std::move(curve), q);
}

TransitionReport detect_transitions_serial(const SiteNetwork& net_template, double q,
                                           std::span<const double> kappa_grid) {
  validate_transition_grid(q, kappa_grid);
  std::vector<double> curve(kappa_grid.size());
  for (std::size_t i = 0; i < kappa_grid.size(); ++i)
    curve[i] = width_point(net_template, kappa_grid[i], q);
  return finish_report(kappa_grid, std::move(curve), q);
}

}  // namespace srswitch
