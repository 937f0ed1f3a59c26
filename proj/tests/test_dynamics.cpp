#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "srswitch/dynamics.hpp"
#include "srswitch/error.hpp"
#include "srswitch/network.hpp"
#include "srswitch/units.hpp"

using namespace srswitch;

namespace {

SiteNetwork one_site(double gamma) {
  return SiteNetwork({0.0}, Eigen::MatrixXd::Zero(1, 1), {{0, gamma, SinkLabel::left}});
}

SiteNetwork two_site(const oracle::TwoSite& t) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2, 2);
  c(0, 1) = c(1, 0) = t.v;
  return SiteNetwork({t.e0, t.e1}, c, {{1, t.gamma, SinkLabel::left}});
}

DensityMatrix site_state(std::size_t n, std::size_t k) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  m(k, k) = 1.0;
  return DensityMatrix(m);
}

EvolutionOptions opts(double horizon, Integrator in = Integrator::exact, std::optional<double> dt = {}) {
  EvolutionOptions o;
  o.horizon_ps = horizon;
  o.integrator = in;
  o.dt_ps = dt;
  return o;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("law and integrator names") {
  CHECK(parse_law("vonneumann") == Law::von_neumann);
  CHECK(parse_law("classical-semiclassical") == Law::classical_semiclassical);
  CHECK(to_string(Law::lindblad) == "lindblad");
  CHECK_THROWS_AS(parse_law("redfield"), ValidationError);
  CHECK(parse_integrator("rk4") == Integrator::rk4);
  CHECK_THROWS_AS(parse_integrator("euler"), ValidationError);
}

TEST_CASE("single drained site decays exponentially") {
  const double gamma = 3.0;
  const auto net = one_site(gamma);
  for (auto in : {Integrator::exact, Integrator::rk4}) {
    const auto r = evolve_von_neumann(net, site_state(1, 0), opts(10.0, in, 0.01));
    for (std::size_t i = 0; i < r.times.size(); i += 97) {
      const double p = std::exp(-gamma * r.times[i] / kHbar);
      CHECK(r.states[i](0, 0).real() == doctest::Approx(p).epsilon(1e-9).scale(1.0));
      CHECK(r.eta_left[i] == doctest::Approx(1.0 - p).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("two-site closed form") {
  const oracle::TwoSite ref{20.0, -15.0, 40.0, 90.0};
  const auto net = two_site(ref);
  const auto r = evolve_von_neumann(net, site_state(2, 0), opts(10.0));
  for (std::size_t i = 0; i < r.times.size(); i += 50) {
    const auto psi = ref.amplitude(r.times[i]);
    const Eigen::Matrix2cd rho = psi * psi.adjoint();
    CHECK((r.states[i] - rho).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(r.eta_left[i] - ref.eta(r.times[i])) < 1e-10);
  }
}

TEST_CASE("conservation of trace plus efficiencies") {
  const auto net = build_multimer(100, 200, 0, 0).with_kappas(3.0, 0.03);
  const auto rho0 = initial_state(net, InitialState{});
  const BathSpec bath{};
  auto check = [&](const EvolutionResult& r) {
    for (std::size_t i = 0; i < r.times.size(); ++i)
      CHECK(std::abs(r.states[i].trace().real() + r.eta_left[i] + r.eta_right[i] - 1.0) < 1e-10);
  };
  check(evolve_von_neumann(net, rho0, opts(5.0)));
  check(evolve_lindblad(net, bath, rho0, opts(5.0)));
  check(classical_evolve(net, populations(rho0.matrix()), bare_rates(net), opts(5.0)));
  const double fine = rk4_stability_limit(net, nullptr) / 4;
  check(evolve_von_neumann(net, rho0, opts(1.0, Integrator::rk4, fine)));
}

TEST_CASE("RK4 agrees with the exact propagator") {
  const auto net = build_multimer(100, 200, 0, 0).with_kappas(1.0, 0.01);
  const auto rho0 = initial_state(net, InitialState{});
  const auto exact = evolve_von_neumann(net, rho0, opts(5.0));
  const double dt = default_time_step(net) / 25;
  const auto rk = evolve_von_neumann(net, rho0, opts(5.0, Integrator::rk4, dt));
  CHECK((exact.states.back() - rk.states.back()).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(std::abs(exact.final_eta_left() - rk.final_eta_left()) < 1e-8);
}

TEST_CASE("RK4 converges at fourth order") {
  const auto net = build_multimer(100, 200, 0, 0).with_kappas(1.0, 0.01);
  const auto rho0 = initial_state(net, InitialState{});
  const auto exact = evolve_von_neumann(net, rho0, opts(2.0)).states.back();
  const double dt = default_time_step(net);
  const double e1 = (evolve_von_neumann(net, rho0, opts(2.0, Integrator::rk4, dt)).states.back() - exact).norm();
  const double e2 = (evolve_von_neumann(net, rho0, opts(2.0, Integrator::rk4, dt / 2)).states.back() - exact).norm();
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.15));
}

TEST_CASE("halving the default RK4 step leaves the efficiencies unchanged") {
  const auto base = build_multimer(100, 200, 0, 0);
  for (double kl : {1.0, 10.0, 100.0}) {
    const auto net = base.with_kappas(kl, kl / 100);
    const auto rho0 = initial_state(net, InitialState{});
    const double dt = default_time_step(net);
    const auto a = evolve_von_neumann(net, rho0, opts(20.0, Integrator::rk4, dt));
    const auto b = evolve_von_neumann(net, rho0, opts(20.0, Integrator::rk4, dt / 2));
    CHECK(std::abs(a.final_eta_left() - b.final_eta_left()) < 1e-6);
    CHECK(std::abs(a.final_eta_right() - b.final_eta_right()) < 1e-6);
  }
}

TEST_CASE("exact integrator does not depend on the output step") {
  const auto net = build_multimer(100, 200, 0, 0).with_kappas(10.0, 0.1);
  const auto rho0 = initial_state(net, InitialState{});
  const auto a = evolve_von_neumann(net, rho0, opts(20.0, Integrator::exact, 0.01));
  const auto b = evolve_von_neumann(net, rho0, opts(20.0, Integrator::exact, 0.005));
  EvolutionOptions single = opts(20.0);
  single.record_trajectory = false;
  const auto c = evolve_von_neumann(net, rho0, single);
  CHECK(c.times.size() == 2);
  CHECK(std::abs(a.final_eta_left() - b.final_eta_left()) < 1e-10);
  CHECK(std::abs(a.final_eta_left() - c.final_eta_left()) < 1e-10);
  CHECK(std::abs(a.final_eta_right() - c.final_eta_right()) < 1e-10);
}

TEST_CASE("RK4 stability rule") {
  const auto net = build_multimer(100, 200, 0, 0).with_kappas(100.0, 1.0);
  const auto rho0 = initial_state(net, InitialState{});
  const double limit = rk4_stability_limit(net, nullptr);
  CHECK(default_time_step(net) <= limit);
  CHECK_THROWS_AS(evolve_von_neumann(net, rho0, opts(1.0, Integrator::rk4, 2 * limit)), ValidationError);
  CHECK_THROWS_AS(evolve_von_neumann(net, rho0, opts(1.0, Integrator::rk4, -1.0)), ValidationError);
}

TEST_CASE("quadrature of the stored trajectory matches the stepper") {
  const auto net = build_multimer(100, 200, 0, 0).with_kappas(1.0, 0.01);
  const auto r = evolve_von_neumann(net, initial_state(net, InitialState{}), opts(20.0, Integrator::exact, 0.002));
  const auto e = efficiency(r, net);
  CHECK(e.left == doctest::Approx(r.final_eta_left()).epsilon(1e-6));
  CHECK(e.right == doctest::Approx(r.final_eta_right()).epsilon(1e-5));
}

TEST_CASE("mirror symmetry of the efficiencies") {
  const auto base = build_multimer(100, 200, 0, 0);
  for (const char* init : {"pure", "mixed"}) {
    const auto a = base.with_kappas(5.0, 0.05);
    const auto b = base.with_kappas(0.05, 5.0);
    const auto ra = evolve_von_neumann(a, initial_state(a, InitialState::parse(init)), opts(20.0));
    const auto rb = evolve_von_neumann(b, initial_state(b, InitialState::parse(init)), opts(20.0));
    CHECK(ra.final_eta_left() == doctest::Approx(rb.final_eta_right()).epsilon(1e-10));
    CHECK(ra.final_eta_right() == doctest::Approx(rb.final_eta_left()).epsilon(1e-10));
  }
}

TEST_CASE("pure and mixed starts agree on the favoured sink") {
  const auto base = build_multimer(100, 200, 0, 0);
  for (double kl : {1.0, 10.0, 100.0}) {
    const auto net = base.with_kappas(kl, kl / 100);
    const auto p = evolve_von_neumann(net, initial_state(net, InitialState::parse("pure")), opts(20.0));
    const auto m = evolve_von_neumann(net, initial_state(net, InitialState::parse("mixed")), opts(20.0));
    const double up = p.final_eta_left() - p.final_eta_right();
    const double um = m.final_eta_left() - m.final_eta_right();
    CHECK(std::signbit(up) == std::signbit(um));
  }
}

TEST_CASE("states stay positive") {
  const auto net = build_multimer(100, 200, 0, 0).with_kappas(2.0, 0.02);
  const auto r = evolve_lindblad(net, BathSpec{}, initial_state(net, InitialState{}), opts(5.0));
  for (std::size_t i = 0; i < r.states.size(); i += 100) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r.states[i]);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
    CHECK((r.states[i] - r.states[i].adjoint()).norm() < 1e-12);
  }
}

TEST_CASE("Lindblad evolution matches the direct oracle") {
  const auto net = load_network(SRSWITCH_DATA_DIR "/rc8_synthetic.json");
  const auto rho0 = initial_state(net, InitialState{});
  const oracle::DirectLindblad direct(net.closed_hamiltonian(), *net.bath());
  const auto want = oracle::rk4_direct(net, rho0.matrix(), 0.5, 1000, &direct);
  const auto got = evolve_lindblad(net, *net.bath(), rho0, opts(0.5));
  CHECK((got.states.back() - want.rho).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(std::abs(got.final_eta_left() - want.eta_left) < 1e-9);
  CHECK(std::abs(got.final_eta_right() - want.eta_right) < 1e-9);

  const auto d = build_generators(net, *net.bath()).dissipator();
  const auto again = evolve_lindblad(net, d, rho0, opts(0.5));
  CHECK((again.states.back() - got.states.back()).norm() == 0.0);
}

TEST_CASE("energy-basis populations and coherences") {
  // Without sinks the secular dissipator never feeds coherences from populations;
  // a sink breaks that.
  const auto closed = build_multimer(100, 200, 0, 0);
  const auto gens = build_generators(closed, BathSpec{});
  const Eigen::MatrixXcd v = gens.eigenvectors.cast<std::complex<double>>();
  Eigen::VectorXcd p(6);
  p << 0.5, 0.1, 0.1, 0.1, 0.1, 0.1;
  const DensityMatrix rho0(v * p.asDiagonal() * v.adjoint());
  auto max_coherence = [&](const SiteNetwork& net) {
    const auto r = evolve_lindblad(net, BathSpec{}, rho0, opts(2.0));
    double m = 0.0;
    for (const auto& s : r.states) {
      Eigen::MatrixXcd e = v.adjoint() * s * v;
      e.diagonal().setZero();
      m = std::max(m, e.cwiseAbs().maxCoeff());
    }
    return m;
  };
  CHECK(max_coherence(closed) < 1e-12);
  CHECK(max_coherence(closed.with_kappas(1.0, 0.01)) > 1e-3);
}

TEST_CASE("classical rate laws") {
  const auto net = build_multimer(100, 200, 0, 0);
  const auto bare = bare_rates(net);
  CHECK(bare.rates(0, 2) == doctest::Approx(100.0 / kHbar));
  CHECK(bare.rates(0, 2) == doctest::Approx(18.836).epsilon(1e-4));
  CHECK(bare.rates(0, 0) == 0.0);
  const double gd = homogeneous_broadening(BathSpec{});
  const auto semi = semiclassical_rates(net, gd);
  CHECK(semi.rates(2, 0) == doctest::Approx(2 * 100.0 * 100.0 / (kHbar * gd)));
  CHECK(semi.rates(2, 0) == doctest::Approx(12.32).epsilon(1e-3));

  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2, 2);
  c(0, 1) = c(1, 0) = 50.0;
  const SiteNetwork detuned({0.0, gd}, c, {});
  const SiteNetwork tuned({0.0, 0.0}, c, {});
  CHECK(semiclassical_rates(detuned, gd).rates(0, 1) ==
        doctest::Approx(0.5 * semiclassical_rates(tuned, gd).rates(0, 1)));
  CHECK_THROWS_AS(semiclassical_rates(net, 0.0), ValidationError);
}

TEST_CASE("classical evolution") {
  const auto net = build_multimer(100, 200, 0, 0).with_kappas(1.0, 0.01);
  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(6);
  p0[0] = p0[1] = 0.5;
  const auto r = classical_evolve(net, p0, bare_rates(net), opts(20.0));
  for (const auto& s : r.states) CHECK(s.real().diagonal().minCoeff() > -1e-12);
  CHECK(r.final_eta_left() > r.final_eta_right());

  Eigen::VectorXd bad = p0;
  bad[0] = -0.1;
  bad[1] = 1.1;
  CHECK_THROWS_AS(classical_evolve(net, bad, bare_rates(net), opts(1.0)), ValidationError);
  CHECK_THROWS_AS(classical_evolve(net, 0.5 * p0, bare_rates(net), opts(1.0)), ValidationError);
  RateMatrix neg = bare_rates(net);
  neg.rates(1, 0) = -1.0;
  CHECK_THROWS_AS(classical_evolve(net, p0, neg, opts(1.0)), ValidationError);
}

}  // TEST_SUITE
