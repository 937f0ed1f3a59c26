#include "srswitch/dynamics.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "srswitch/error.hpp"
#include "srswitch/units.hpp"

namespace srswitch {

namespace {

using cd = std::complex<double>;
constexpr cd kMinusIOverHbar{0.0, -1.0 / kHbar};
constexpr double kStepFraction = 0.05;
constexpr double kRk4Stability = 2.5;

double inf_norm(const Eigen::MatrixXcd& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }
double inf_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

std::string format_dt(double dt) {
  std::ostringstream os;
  os.precision(6);
  os << dt;
  return os.str();
}

struct StepPlan {
  std::size_t steps = 1;
  double dt = 0.0;
};

StepPlan plan_steps(const EvolutionOptions& opt, double default_dt, double stability_limit) {
  if (!(opt.horizon_ps >= 0.0) || !std::isfinite(opt.horizon_ps))
    throw ValidationError("horizon must be a non-negative number of ps");
  double dt = opt.dt_ps.value_or(default_dt);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time step must be positive");
  if (opt.integrator == Integrator::rk4 && dt > stability_limit)
    throw ValidationError("time step " + format_dt(dt) +
                          " ps violates the RK4 stability rule; required dt <= " +
                          format_dt(stability_limit) + " ps");
  if (opt.horizon_ps == 0.0) return {0, 0.0};
  if (!opt.record_trajectory && opt.integrator == Integrator::exact) return {1, opt.horizon_ps};
  const double ratio = opt.horizon_ps / dt;
  auto steps = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
  steps = std::max<std::size_t>(steps, 1);
  return {steps, opt.horizon_ps / static_cast<double>(steps)};
}

// Output-grid default for the exact integrator: the RK4 rule, but never more
// than kMaxExactSteps steps over the horizon.
constexpr double kMaxExactSteps = 4000.0;

double exact_default_dt(double rule, double horizon) {
  return std::max(rule, horizon / kMaxExactSteps);
}

struct SinkRow {
  Eigen::Index site = -1;
  double gamma = 0.0;
};

std::array<SinkRow, 2> sink_rows(const SiteNetwork& net) {
  std::array<SinkRow, 2> rows;
  if (const Sink* s = net.sink(SinkLabel::left)) rows[0] = {static_cast<Eigen::Index>(s->site), s->gamma};
  if (const Sink* s = net.sink(SinkLabel::right)) rows[1] = {static_cast<Eigen::Index>(s->site), s->gamma};
  return rows;
}

void record(EvolutionResult& r, double t, const Eigen::MatrixXcd& rho, double el, double er) {
  r.times.push_back(t);
  r.states.push_back(rho);
  r.eta_left.push_back(el);
  r.eta_right.push_back(er);
}

// ---- quantum laws -----------------------------------------------------------

EvolutionResult evolve_quantum(const SiteNetwork& net, const Eigen::MatrixXcd* dissipator,
                               const DensityMatrix& rho0, const EvolutionOptions& opt) {
  const auto n = static_cast<Eigen::Index>(net.size());
  if (rho0.size() != net.size())
    throw ValidationError("initial state dimension does not match the network");
  if (dissipator && (dissipator->rows() != n * n || dissipator->cols() != n * n))
    throw ValidationError("dissipator dimension does not match the network");

  const double rule = default_time_step(net, dissipator);
  const double limit = rk4_stability_limit(net, dissipator);
  const double def = opt.integrator == Integrator::exact ? exact_default_dt(rule, opt.horizon_ps) : rule;
  const StepPlan plan = plan_steps(opt, def, limit);
  const auto sinks = sink_rows(net);

  EvolutionResult r;
  Eigen::MatrixXcd rho = rho0.matrix();
  double eta[2] = {0.0, 0.0};
  record(r, 0.0, rho, 0.0, 0.0);

  if (opt.integrator == Integrator::exact) {
    const Eigen::MatrixXcd gen = quantum_generator(net, dissipator);
    const Eigen::MatrixXcd prop = (gen * plan.dt).exp();
    Eigen::VectorXcd x(n * n + 2);
    x.head(n * n) = Eigen::Map<const Eigen::VectorXcd>(rho.data(), n * n);
    x[n * n] = x[n * n + 1] = 0.0;
    Eigen::VectorXcd next(x.size());
    for (std::size_t s = 1; s <= plan.steps; ++s) {
      next.noalias() = prop * x;
      x.swap(next);
      if (opt.record_trajectory || s == plan.steps) {
        rho = Eigen::Map<const Eigen::MatrixXcd>(x.data(), n, n);
        record(r, plan.dt * static_cast<double>(s), rho, x[n * n].real(), x[n * n + 1].real());
      }
    }
  } else {
    const Eigen::MatrixXcd h = effective_hamiltonian(net).matrix;
    const Eigen::MatrixXcd hadj = h.adjoint();
    Eigen::MatrixXcd k[4], tmp(n, n);
    double ke[4][2];
    for (auto& m : k) m.resize(n, n);

    auto deriv = [&](const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out, double* de) {
      out.noalias() = h * in;
      out.noalias() -= in * hadj;
      out *= kMinusIOverHbar;
      if (dissipator) {
        Eigen::Map<Eigen::VectorXcd> o(out.data(), n * n);
        o.noalias() += *dissipator * Eigen::Map<const Eigen::VectorXcd>(in.data(), n * n);
      }
      for (int s = 0; s < 2; ++s)
        de[s] = sinks[s].site >= 0 ? sinks[s].gamma / kHbar * in(sinks[s].site, sinks[s].site).real() : 0.0;
    };

    const double dt = plan.dt;
    for (std::size_t step = 1; step <= plan.steps; ++step) {
      deriv(rho, k[0], ke[0]);
      tmp = rho + (0.5 * dt) * k[0];
      deriv(tmp, k[1], ke[1]);
      tmp = rho + (0.5 * dt) * k[1];
      deriv(tmp, k[2], ke[2]);
      tmp = rho + dt * k[2];
      deriv(tmp, k[3], ke[3]);
      rho += (dt / 6.0) * (k[0] + 2.0 * k[1] + 2.0 * k[2] + k[3]);
      for (int s = 0; s < 2; ++s)
        eta[s] += dt / 6.0 * (ke[0][s] + 2.0 * ke[1][s] + 2.0 * ke[2][s] + ke[3][s]);
      if (opt.record_trajectory || step == plan.steps)
        record(r, dt * static_cast<double>(step), rho, eta[0], eta[1]);
    }
  }
  r.final_trace = r.states.back().trace().real();
  return r;
}

void validate_rates(const RateMatrix& rates, std::size_t n) {
  const auto& t = rates.rates;
  if (static_cast<std::size_t>(t.rows()) != n || static_cast<std::size_t>(t.cols()) != n)
    throw ValidationError("rate matrix dimension does not match the network");
  for (Eigen::Index i = 0; i < t.rows(); ++i)
    for (Eigen::Index k = 0; k < t.cols(); ++k) {
      if (!std::isfinite(t(i, k))) throw ValidationError("rate matrix has non-finite entries");
      if (i != k && t(i, k) < 0.0)
        throw ValidationError("negative transition rate from site " + std::to_string(k + 1) +
                              " to site " + std::to_string(i + 1));
    }
}

}  // namespace

Law parse_law(std::string_view text) {
  if (text == "vonneumann") return Law::von_neumann;
  if (text == "classical") return Law::classical;
  if (text == "classical-semiclassical") return Law::classical_semiclassical;
  if (text == "lindblad") return Law::lindblad;
  throw ValidationError("unknown law \"" + std::string(text) +
                        "\" (expected vonneumann, classical, classical-semiclassical, lindblad)");
}

std::string_view to_string(Law law) {
  switch (law) {
    case Law::von_neumann: return "vonneumann";
    case Law::classical: return "classical";
    case Law::classical_semiclassical: return "classical-semiclassical";
    case Law::lindblad: return "lindblad";
  }
  return "?";
}

Integrator parse_integrator(std::string_view text) {
  if (text == "exact") return Integrator::exact;
  if (text == "rk4") return Integrator::rk4;
  throw ValidationError("unknown integrator \"" + std::string(text) + "\" (expected exact or rk4)");
}

std::string_view to_string(Integrator integrator) {
  return integrator == Integrator::exact ? "exact" : "rk4";
}

RateMatrix bare_rates(const SiteNetwork& net) {
  Eigen::MatrixXd t = net.couplings().cwiseAbs() / kHbar;
  t.diagonal().setZero();
  return {std::move(t)};
}

RateMatrix semiclassical_rates(const SiteNetwork& net, double gamma_d) {
  if (!(gamma_d > 0.0) || !std::isfinite(gamma_d))
    throw ValidationError("dephasing energy gamma_d must be positive");
  const auto n = static_cast<Eigen::Index>(net.size());
  const auto& c = net.couplings();
  const auto& e = net.energies();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) {
      if (i == k) continue;
      const double de = (e[i] - e[k]) / gamma_d;
      t(i, k) = 2.0 * c(i, k) * c(i, k) / (kHbar * gamma_d) / (1.0 + de * de);
    }
  return {std::move(t)};
}

Eigen::MatrixXcd quantum_generator(const SiteNetwork& net, const Eigen::MatrixXcd* dissipator) {
  const auto n = static_cast<Eigen::Index>(net.size());
  const auto n2 = n * n;
  const Eigen::MatrixXcd h = effective_hamiltonian(net).matrix;
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(n2 + 2, n2 + 2);
  // vec(H rho) = (I kron H) vec(rho); vec(rho H^dagger) = (conj(H) kron I) vec(rho).
  for (Eigen::Index j = 0; j < n; ++j) g.block(j * n, j * n, n, n) += kMinusIOverHbar * h;
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      const cd hb = std::conj(h(a, b));
      if (hb == cd{}) continue;
      for (Eigen::Index i = 0; i < n; ++i) g(a * n + i, b * n + i) -= kMinusIOverHbar * hb;
    }
  if (dissipator) g.topLeftCorner(n2, n2) += *dissipator;
  const auto sinks = sink_rows(net);
  for (int s = 0; s < 2; ++s)
    if (sinks[s].site >= 0) g(n2 + s, sinks[s].site * n + sinks[s].site) = sinks[s].gamma / kHbar;
  return g;
}

Eigen::MatrixXd classical_generator(const SiteNetwork& net, const RateMatrix& rates) {
  const auto n = static_cast<Eigen::Index>(net.size());
  validate_rates(rates, net.size());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n + 2, n + 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k)
      if (i != k) {
        g(i, k) += rates.rates(i, k);
        g(k, k) -= rates.rates(i, k);
      }
  const auto sinks = sink_rows(net);
  for (int s = 0; s < 2; ++s) {
    if (sinks[s].site < 0) continue;
    const double r = sinks[s].gamma / kHbar;
    g(sinks[s].site, sinks[s].site) -= r;
    g(n + s, sinks[s].site) = r;
  }
  return g;
}

double default_time_step(const SiteNetwork& net, const Eigen::MatrixXcd* dissipator) {
  const double hn = inf_norm(effective_hamiltonian(net).matrix);
  double dt = hn > 0.0 ? kStepFraction * kHbar / hn : std::numeric_limits<double>::infinity();
  if (dissipator) {
    const double max_rate = dissipator->cwiseAbs().maxCoeff();
    if (max_rate > 0.0) dt = std::min(dt, kStepFraction / max_rate);
  }
  return std::isfinite(dt) ? dt : 0.01;
}

double default_time_step(const SiteNetwork& net, const RateMatrix& rates) {
  const double max_rate = inf_norm(classical_generator(net, rates));
  return max_rate > 0.0 ? kStepFraction / max_rate : 0.01;
}

double rk4_stability_limit(const SiteNetwork& net, const Eigen::MatrixXcd* dissipator) {
  double bound = 2.0 * inf_norm(effective_hamiltonian(net).matrix) / kHbar;
  if (dissipator) bound += inf_norm(*dissipator);
  return bound > 0.0 ? kRk4Stability / bound : std::numeric_limits<double>::infinity();
}

double rk4_stability_limit(const SiteNetwork& net, const RateMatrix& rates) {
  const double bound = inf_norm(classical_generator(net, rates));
  return bound > 0.0 ? kRk4Stability / bound : std::numeric_limits<double>::infinity();
}

EvolutionResult evolve_von_neumann(const SiteNetwork& net, const DensityMatrix& rho0,
                                   const EvolutionOptions& options) {
  return evolve_quantum(net, nullptr, rho0, options);
}

EvolutionResult evolve_lindblad(const SiteNetwork& net, const BathSpec& bath,
                                const DensityMatrix& rho0, const EvolutionOptions& options) {
  const Eigen::MatrixXcd d = build_generators(net, bath).dissipator();
  return evolve_quantum(net, &d, rho0, options);
}

EvolutionResult evolve_lindblad(const SiteNetwork& net, const Eigen::MatrixXcd& dissipator,
                                const DensityMatrix& rho0, const EvolutionOptions& options) {
  return evolve_quantum(net, &dissipator, rho0, options);
}

EvolutionResult classical_evolve(const SiteNetwork& net, const Eigen::VectorXd& p0,
                                 const RateMatrix& rates, const EvolutionOptions& opt) {
  const auto n = static_cast<Eigen::Index>(net.size());
  if (p0.size() != n) throw ValidationError("initial populations do not match the network");
  if ((p0.array() < 0.0).any() || !p0.allFinite())
    throw ValidationError("initial populations must be non-negative");
  if (std::abs(p0.sum() - 1.0) > 1e-12) throw ValidationError("initial populations must sum to 1");

  const Eigen::MatrixXd gen = classical_generator(net, rates);
  const double rule = default_time_step(net, rates);
  const double def = opt.integrator == Integrator::exact ? exact_default_dt(rule, opt.horizon_ps) : rule;
  const StepPlan plan = plan_steps(opt, def, rk4_stability_limit(net, rates));

  EvolutionResult r;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n + 2);
  x.head(n) = p0;
  auto push = [&](double t) {
    record(r, t, x.head(n).cast<cd>().asDiagonal().toDenseMatrix(), x[n], x[n + 1]);
  };
  push(0.0);

  const double dt = plan.dt;
  if (opt.integrator == Integrator::exact) {
    const Eigen::MatrixXd prop = (gen * dt).exp();
    Eigen::VectorXd next(x.size());
    for (std::size_t s = 1; s <= plan.steps; ++s) {
      next.noalias() = prop * x;
      x.swap(next);
      if (opt.record_trajectory || s == plan.steps) push(dt * static_cast<double>(s));
    }
  } else {
    Eigen::VectorXd k1, k2, k3, k4;
    for (std::size_t s = 1; s <= plan.steps; ++s) {
      k1.noalias() = gen * x;
      k2.noalias() = gen * (x + 0.5 * dt * k1);
      k3.noalias() = gen * (x + 0.5 * dt * k2);
      k4.noalias() = gen * (x + dt * k3);
      x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (opt.record_trajectory || s == plan.steps) push(dt * static_cast<double>(s));
    }
  }
  r.final_trace = x.head(n).sum();
  return r;
}

Efficiencies efficiency(const EvolutionResult& trajectory, const SiteNetwork& net) {
  const auto& t = trajectory.times;
  Efficiencies out;
  if (t.size() < 2) return out;
  auto integrate = [&](const Sink* sink) {
    if (!sink || sink->gamma == 0.0) return 0.0;
    const auto s = static_cast<Eigen::Index>(sink->site);
    auto f = [&](std::size_t i) { return trajectory.states[i](s, s).real(); };
    const std::size_t intervals = t.size() - 1;
    const std::size_t simpson = intervals - intervals % 2;
    double sum = 0.0;
    for (std::size_t i = 0; i < simpson; i += 2)
      sum += (t[i + 2] - t[i]) / 6.0 * (f(i) + 4.0 * f(i + 1) + f(i + 2));
    if (simpson < intervals)
      sum += 0.5 * (t[intervals] - t[intervals - 1]) * (f(intervals - 1) + f(intervals));
    return sink->gamma / kHbar * sum;
  };
  out.left = integrate(net.sink(SinkLabel::left));
  out.right = integrate(net.sink(SinkLabel::right));
  return out;
}

Eigen::VectorXd populations(const Eigen::MatrixXcd& rho) { return rho.diagonal().real(); }

}  // namespace srswitch
