// Acceptance checks A1-A13. Usage: acceptance [A1 ... A13]; no argument runs all.
// Prints one PASS/FAIL line per criterion and exits nonzero if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>
#include <unistd.h>

#include "oracles.hpp"
#include "srswitch/bath.hpp"
#include "srswitch/cli.hpp"
#include "srswitch/csv.hpp"
#include "srswitch/dynamics.hpp"
#include "srswitch/network.hpp"
#include "srswitch/spectral.hpp"
#include "srswitch/sweep.hpp"
#include "srswitch/units.hpp"

using namespace srswitch;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

const SiteNetwork& multimer() {
  static const SiteNetwork net = build_multimer(kDefaultOmega, kDefaultOmegaSp, 0.0, 0.0);
  return net;
}

SweepSpec quantum_spec(Law law = Law::von_neumann) {
  SweepSpec s;
  s.law = law;
  s.q = kDefaultQ;
  s.horizon_ps = kDefaultHorizonPs;
  return s;
}

Outcome a1() {
  const double g = homogeneous_broadening(BathSpec{300.0, 35.0, 150.0});
  const double rel = std::abs(g - 305.7) / 305.7;
  return {rel <= 2e-3, "gamma_T = " + num(g) + " cm^-1, rel. dev " + num(rel)};
}

Outcome a2() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> lg(-2.0, 4.0);
  double worst_rel = 0.0, min_width = INFINITY;
  for (int i = 0; i < 100; ++i) {
    const double gl = 200.0 * std::pow(10.0, lg(rng));
    const double gr = 200.0 * std::pow(10.0, lg(rng));
    const auto s = eigendecompose(multimer().with_gammas(gl, gr));
    worst_rel = std::max(worst_rel, std::abs(s.widths.sum() - (gl + gr)) / (gl + gr));
    min_width = std::min(min_width, s.widths.minCoeff());
  }
  for (int i = 0; i < 20; ++i) {
    const auto net = oracle::random_network(rng, 8);
    const double total = net.gamma(SinkLabel::left) + net.gamma(SinkLabel::right);
    const auto s = eigendecompose(net);
    worst_rel = std::max(worst_rel, std::abs(s.widths.sum() - total) / total);
    min_width = std::min(min_width, s.widths.minCoeff());
  }
  return {worst_rel <= 1e-9 && min_width >= -1e-10,
          "max rel. error " + num(worst_rel) + ", min width " + num(min_width)};
}

Outcome a3() {
  double worst = 0.0;
  for (double kl : {0.1, 1.0, 10.0, 100.0}) {
    const auto net = multimer().with_kappas(kl, kl / kDefaultQ);
    const auto rho0 = initial_state(net, InitialState{});
    for (auto in : {Integrator::exact, Integrator::rk4}) {
      EvolutionOptions o;
      o.horizon_ps = kDefaultHorizonPs;
      o.integrator = in;
      o.record_trajectory = false;
      const auto r = evolve_von_neumann(net, rho0, o);
      worst = std::max(worst, std::abs(r.final_trace + r.final_eta_left() + r.final_eta_right() - 1.0));
    }
  }
  return {worst <= 1e-6, "max |tr rho + eta_L + eta_R - 1| = " + num(worst) + " (exact and rk4)"};
}

Outcome a4() {
  const auto spec = quantum_spec();
  const PointEvaluator eval(multimer(), spec);
  const double u1 = eval(1.0, 1.0 / kDefaultQ).unbalanced;
  const double u100 = eval(100.0, 100.0 / kDefaultQ).unbalanced;
  const auto sweep = sweep_1d(multimer(), spec);
  const auto c = sweep.primary_crossing();
  const bool in_window = c && *c >= 6.0 && *c <= 16.0;
  std::string d = "u(1) = " + num(u1) + ", u(100) = " + num(u100) + ", crossing ";
  d += c ? num(*c) : std::string("absent");
  d += " (window [6, 16])";
  return {u1 >= 0.7 && u100 <= -0.7 && in_window, d};
}

Outcome a5() {
  const auto sweep = sweep_1d(multimer(), quantum_spec(Law::classical));
  double min_u = INFINITY;
  for (const auto& r : sweep.records) min_u = std::min(min_u, r.unbalanced);
  const PointEvaluator eval(multimer(), quantum_spec(Law::classical));
  const auto r = eval(1e3, 1e3 / kDefaultQ);
  const double dev = std::abs(r.eta_left - 0.5) + std::abs(r.eta_right - 0.5);
  return {min_u >= 0.0 && dev <= 0.1, "min unbalanced " + num(min_u) + ", deviation at 1e3 " + num(dev)};
}

Outcome a6() {
  const auto grid = log_grid(1e-2, 1e4, 61);
  const auto r = detect_transitions(multimer(), kDefaultQ, grid);
  if (r.maxima.size() != 2)
    return {false, std::to_string(r.maxima.size()) + " interior maxima"};
  const double k1 = grid[r.maxima[0]], k2 = grid[r.maxima[1]];
  double kmin = NAN;
  for (auto i : r.minima)
    if (i > r.maxima[0] && i < r.maxima[1]) kmin = grid[i];
  const bool ok = k1 >= 1.0 / 3 && k1 <= 3.0 && k2 >= 100.0 / 3 && k2 <= 300.0 && !std::isnan(kmin) &&
                  kmin >= 10.0 / 2 && kmin <= 10.0 * 2;
  return {ok, "maxima at " + num(k1) + ", " + num(k2) + "; minimum at " + num(kmin)};
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome a7() {
  std::vector<double> lk, ll, lr;
  for (double k : log_grid(3.0, 30.0, 21)) {
    const auto net = multimer().with_kappas(k, k / kDefaultQ);
    const auto pw = partial_widths(eigendecompose(net), net);
    lk.push_back(std::log(k));
    ll.push_back(std::log(pw.left));
    lr.push_back(std::log(pw.right));
  }
  const double sl = slope(lk, ll), sr = slope(lk, lr);
  return {std::abs(sl + 1.0) <= 0.15 && std::abs(sr - 1.0) <= 0.15,
          "slope Gamma_L " + num(sl) + ", slope Gamma_R " + num(sr)};
}

Outcome a8() {
  const double k = std::sqrt(kDefaultQ);
  const auto s = eigendecompose(multimer().with_kappas(k, k / kDefaultQ));
  const auto w = s.widest();
  double min_other = INFINITY;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (i != w) min_other = std::min(min_other, s.participation[i]);
  const bool ok = s.participation[w] <= 1.3 && s.overlap_left[w] >= 0.95 && min_other >= 3.0;
  return {ok, "widest PR " + num(s.participation[w]) + ", overlap_L " + num(s.overlap_left[w]) +
                  ", min other PR " + num(min_other)};
}

Outcome a9() {
  const BathSpec bath{300.0, 35.0, 150.0};
  const auto& net = multimer();
  EvolutionOptions o;
  o.horizon_ps = 20.0;
  o.record_trajectory = false;
  const auto r = evolve_lindblad(net, bath, initial_state(net, InitialState{}), o);
  const auto gens = build_generators(net, bath);
  const Eigen::MatrixXcd v = gens.eigenvectors.cast<std::complex<double>>();
  const Eigen::VectorXd pop = (v.adjoint() * r.states.back() * v).diagonal().real();
  Eigen::VectorXd gibbs = (-(gens.energies.array() - gens.energies.minCoeff()) / (kBoltzmann * 300.0)).exp();
  gibbs /= gibbs.sum();
  double worst = 0.0;
  for (Eigen::Index i = 1; i < pop.size(); ++i) {
    const double want = gibbs[i] / gibbs[0];
    worst = std::max(worst, std::abs(pop[i] / pop[0] - want) / want);
  }
  const double trace_err = std::abs(r.final_trace - 1.0);
  return {worst <= 0.01 && trace_err <= 1e-8,
          "max Gibbs ratio rel. error " + num(worst) + ", trace error " + num(trace_err)};
}

Outcome a10() {
  const BathSpec bath{300.0, 35.0, 150.0};
  const double kt = kBoltzmann * bath.temperature_k;
  double worst = 0.0;
  for (double w : log_grid(1.0, 1000.0, 50)) {
    const double want = std::exp(w / kt);
    worst = std::max(worst, std::abs(bath_rate(bath, w) / bath_rate(bath, -w) - want) / want);
  }
  return {worst <= 1e-12, "max rel. error " + num(worst)};
}

Outcome a11() {
  const auto grid = log_grid(1e-2, 1e4, 61);
  const auto tr = detect_transitions(multimer(), kDefaultQ, grid);
  if (!tr.two_peaks_found()) return {false, "width maxima not found"};
  auto on_spec = quantum_spec(Law::lindblad);
  on_spec.bath = BathSpec{300.0, 35.0, 150.0};
  const auto on = sweep_1d(multimer(), on_spec);
  const auto off = sweep_1d(multimer(), quantum_spec());

  std::optional<double> crossing;
  for (const auto& c : on.crossings)
    if (c.kappa > *tr.st_left && c.kappa < *tr.st_right) crossing = c.kappa;
  if (!crossing) return {false, "no sign change between the width maxima"};

  std::size_t peak = 0;
  for (std::size_t i = 0; i < on.records.size(); ++i)
    if (on.records[i].kappa_left > *crossing && on.records[i].unbalanced < on.records[peak].unbalanced) peak = i;
  const double on_mag = std::abs(on.records[peak].unbalanced);
  const double off_mag = std::abs(off.records[peak].unbalanced);
  return {on_mag < off_mag, "crossing " + num(*crossing) + " between " + num(*tr.st_left) + " and " +
                                num(*tr.st_right) + "; right peak at " + num(on.records[peak].kappa_left) +
                                ": bath " + num(on_mag) + " vs none " + num(off_mag)};
}

Outcome a12() {
  double worst = 0.0;
  for (auto in : {Integrator::exact, Integrator::rk4}) {
    const double gamma = 7.5;
    const SiteNetwork one({0.0}, Eigen::MatrixXd::Zero(1, 1), {{0, gamma, SinkLabel::left}});
    Eigen::MatrixXcd r1 = Eigen::MatrixXcd::Ones(1, 1);
    EvolutionOptions o;
    o.horizon_ps = 10.0;
    o.integrator = in;
    if (in == Integrator::rk4) o.dt_ps = default_time_step(one) / 25;
    auto r = evolve_von_neumann(one, DensityMatrix(r1), o);
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      const double p = std::exp(-gamma * r.times[i] / kHbar);
      worst = std::max({worst, std::abs(r.states[i](0, 0).real() - p), std::abs(r.eta_left[i] - (1 - p))});
    }

    const oracle::TwoSite ref{20.0, -15.0, 40.0, 90.0};
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2, 2);
    c(0, 1) = c(1, 0) = ref.v;
    const SiteNetwork two({ref.e0, ref.e1}, c, {{1, ref.gamma, SinkLabel::left}});
    Eigen::MatrixXcd r2 = Eigen::MatrixXcd::Zero(2, 2);
    r2(0, 0) = 1.0;
    if (in == Integrator::rk4) o.dt_ps = default_time_step(two) / 25;
    r = evolve_von_neumann(two, DensityMatrix(r2), o);
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      const auto psi = ref.amplitude(r.times[i]);
      const Eigen::Matrix2cd rho = psi * psi.adjoint();
      worst = std::max({worst, (r.states[i] - rho).cwiseAbs().maxCoeff(),
                        std::abs(r.eta_left[i] - ref.eta(r.times[i]))});
    }
  }
  return {worst <= 1e-8, "max deviation " + num(worst) + " over 10 ps (exact and rk4)"};
}

Outcome a13() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("srswitch_a13_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const int n = std::max(4, omp_get_num_procs());
  std::ostringstream out, err;
  const std::string a = (dir / "w1.csv").string(), b = (dir / "wn.csv").string();
  int rc = run_cli({"sweep2d", "--workers", "1", "--out", a}, out, err);
  rc |= run_cli({"sweep2d", "--workers", std::to_string(n), "--out", b}, out, err);
  auto slurp = [](const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  const std::string sa = slurp(a), sb = slurp(b);
  fs::remove_all(dir);
  const std::size_t rows = std::count(sa.begin(), sa.end(), '\n') - 1;
  const bool ok = rc == 0 && rows == 41 * 41 && sa == sb;
  return {ok, std::to_string(rows) + " rows, 1 vs " + std::to_string(n) + " workers " +
                  (sa == sb ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> all{
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4},   {"A5", a5},   {"A6", a6},  {"A7", a7},
      {"A8", a8}, {"A9", a9}, {"A10", a10}, {"A11", a11}, {"A12", a12}, {"A13", a13}};
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& [id, fn] : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), id) == wanted.end()) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%-4s %s  %s\n", id.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
