#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "srswitch/bath.hpp"
#include "srswitch/network.hpp"

namespace srswitch {

enum class Law { von_neumann, classical, classical_semiclassical, lindblad };

Law parse_law(std::string_view text);  // vonneumann|classical|classical-semiclassical|lindblad
std::string_view to_string(Law law);
inline bool is_quantum(Law law) { return law == Law::von_neumann || law == Law::lindblad; }

/// exact: step with the matrix exponential of the (time-independent) linear
/// generator, so results do not depend on dt beyond rounding.
/// rk4: classical fixed-step fourth-order Runge-Kutta.
enum class Integrator { exact, rk4 };

Integrator parse_integrator(std::string_view text);
std::string_view to_string(Integrator integrator);

/// Classical hopping rates in ps^-1; rates(i, k) is the rate from site k to i.
struct RateMatrix {
  Eigen::MatrixXd rates;
};

/// |(H0)_ik| / hbar off the diagonal, zero on it.
RateMatrix bare_rates(const SiteNetwork& net);

/// T_ik = 2 Omega_ik^2 / (hbar gamma_d) / (1 + (E_i - E_k)^2 / gamma_d^2).
RateMatrix semiclassical_rates(const SiteNetwork& net, double gamma_d);

struct EvolutionOptions {
  double horizon_ps = kDefaultHorizonPs;
  std::optional<double> dt_ps;  // default: default_time_step()
  Integrator integrator = Integrator::exact;
  bool record_trajectory = true;  // false keeps only t = 0 and t = horizon
};

struct EvolutionResult {
  std::vector<double> times;                // ps
  std::vector<Eigen::MatrixXcd> states;     // rho(t); diag(p) for the classical law
  std::vector<double> eta_left;             // cumulative efficiency per time
  std::vector<double> eta_right;
  double final_trace = 0.0;

  double final_eta_left() const { return eta_left.back(); }
  double final_eta_right() const { return eta_right.back(); }
};

/// Linear generator of d/dt [vec(rho) (column-major), eta_L, eta_R] for the
/// non-Hermitian von Neumann equation plus an optional site-basis dissipator.
Eigen::MatrixXcd quantum_generator(const SiteNetwork& net,
                                   const Eigen::MatrixXcd* dissipator = nullptr);

/// Linear generator of d/dt [p, eta_L, eta_R] for the classical master equation.
Eigen::MatrixXd classical_generator(const SiteNetwork& net, const RateMatrix& rates);

/// Step-size rule for RK4: min(0.05 hbar / ||H_eff||_inf, 0.05 / max rate).
double default_time_step(const SiteNetwork& net, const Eigen::MatrixXcd* dissipator = nullptr);
double default_time_step(const SiteNetwork& net, const RateMatrix& rates);

/// Largest RK4 step inside the stability region (2.5 / generator norm bound).
double rk4_stability_limit(const SiteNetwork& net, const Eigen::MatrixXcd* dissipator = nullptr);
double rk4_stability_limit(const SiteNetwork& net, const RateMatrix& rates);

/// d rho/dt = -(i/hbar)(H rho - rho H^dagger), with efficiencies accumulated.
EvolutionResult evolve_von_neumann(const SiteNetwork& net, const DensityMatrix& rho0,
                                   const EvolutionOptions& options = {});

/// Von Neumann evolution plus the secular Lindblad dissipator of the bath.
EvolutionResult evolve_lindblad(const SiteNetwork& net, const BathSpec& bath,
                                const DensityMatrix& rho0,
                                const EvolutionOptions& options = {});

/// Same, with a dissipator superoperator built once by LindbladGenerators::dissipator().
EvolutionResult evolve_lindblad(const SiteNetwork& net, const Eigen::MatrixXcd& dissipator,
                                const DensityMatrix& rho0,
                                const EvolutionOptions& options = {});

/// Classical hopping with sink absorption; populations stored as diag(p).
EvolutionResult classical_evolve(const SiteNetwork& net, const Eigen::VectorXd& p0,
                                 const RateMatrix& rates,
                                 const EvolutionOptions& options = {});

struct Efficiencies {
  double left = 0.0;
  double right = 0.0;
};

/// eta_s = (gamma_s / hbar) * integral of <s|rho(t)|s> dt, evaluated by
/// composite Simpson quadrature over the stored trajectory (trapezoid on a
/// trailing odd interval). Independent of the stepper's own accumulation.
Efficiencies efficiency(const EvolutionResult& trajectory, const SiteNetwork& net);

/// Diagonal populations of rho.
Eigen::VectorXd populations(const Eigen::MatrixXcd& rho);

}  // namespace srswitch
