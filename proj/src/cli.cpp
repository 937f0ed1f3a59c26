#include "srswitch/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <omp.h>
#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "srswitch/csv.hpp"
#include "srswitch/dynamics.hpp"
#include "srswitch/error.hpp"
#include "srswitch/network.hpp"
#include "srswitch/spectral.hpp"
#include "srswitch/sweep.hpp"

#ifndef SRSWITCH_VERSION
#define SRSWITCH_VERSION "0.0.0"
#endif

namespace srswitch {

using Json = nlohmann::ordered_json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("SHA-256 digest failed");
  std::ostringstream ss;
  ss << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) ss << std::setw(2) << static_cast<int>(md[i]);
  return ss.str();
}

namespace {

using Clock = std::chrono::steady_clock;

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw ValidationError("failed writing " + path);
}

BathSpec parse_bath(const std::string& text) {
  std::vector<double> v;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    v.push_back(parse_double(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (v.size() != 3) throw ValidationError("--bath expects \"T_K,ER_cm1,wc_cm1\"");
  BathSpec b{v[0], v[1], v[2]};
  b.validate();
  return b;
}

Json bath_json(const BathSpec& b) {
  return Json{{"temperature_K", b.temperature_k},
              {"reorganization_cm1", b.reorganization_cm1},
              {"cutoff_cm1", b.cutoff_cm1}};
}

// Everything a subcommand run accumulates for its manifest.
struct Run {
  std::string subcommand;
  Json parameters = Json::object();
  Json inputs = Json::array();
  Json outputs = Json::array();
  Clock::time_point start = Clock::now();

  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start).count(); }

  SiteNetwork load_model(const std::string& path) {
    const std::string bytes = read_file(path);
    inputs.push_back(Json{{"path", path}, {"sha256", sha256_hex(bytes)}});
    try {
      return parse_network(bytes);
    } catch (const ValidationError& e) {
      throw ValidationError(path + ": " + e.what());
    }
  }

  // Writes the table to `path` (or `out` if empty) and records it.
  void emit(const CsvTable& table, const std::string& path, std::ostream& out) {
    if (path.empty()) {
      table.write(out);
      return;
    }
    table.save(path);
    outputs.push_back(path);
  }

  void write_manifest(const std::string& primary_output) const {
    if (primary_output.empty()) return;
    Json m;
    m["subcommand"] = subcommand;
    m["version"] = SRSWITCH_VERSION;
    m["parameters"] = parameters;
    m["inputs"] = inputs;
    Json outs = outputs;
    outs.push_back(primary_output + ".manifest.json");
    m["outputs"] = outs;
    m["wall_time_s"] = elapsed();
    write_text(primary_output + ".manifest.json", m.dump(2) + "\n");
  }
};

// Flags shared by commands that act on one network.
struct ModelFlags {
  std::string model;
  double kappa_left = 1.0;
  double q = kDefaultQ;
  CLI::Option* kappa_opt = nullptr;
  CLI::Option* q_opt = nullptr;

  void add(CLI::App* app) {
    app->add_option("--model", model, "Model JSON file (default: built-in multimer)");
    kappa_opt = app->add_option("--kappa-l", kappa_left, "Left sink strength kappa_L = gamma_L / (2 Omega)")
                    ->check(CLI::PositiveNumber);
    q_opt = app->add_option("--q", q, "Asymmetry q = kappa_L / kappa_R")->check(CLI::PositiveNumber);
  }

  // The network template without touching its sinks.
  SiteNetwork base(Run& run) const {
    if (model.empty()) {
      run.parameters["model"] = "multimer";
      return build_multimer(kDefaultOmega, kDefaultOmegaSp, 0.0, 0.0);
    }
    run.parameters["model"] = model;
    return run.load_model(model);
  }

  // Network with sink strengths resolved: flags win, then the model file,
  // then the default kappa_L = 1, q = 100 for the built-in multimer.
  SiteNetwork resolve(Run& run) const {
    SiteNetwork net = base(run);
    const bool set_kappa = kappa_opt->count() > 0 || q_opt->count() > 0 || model.empty();
    if (set_kappa) {
      const auto r = coupling_ratios(net);
      const double kl = kappa_opt->count() > 0 || model.empty() ? kappa_left : r.kappa_left;
      const double qq = q_opt->count() > 0 || model.empty() || !std::isfinite(r.q) ? q : r.q;
      net = net.with_kappas(kl, kl / qq);
    }
    const auto r = coupling_ratios(net);
    run.parameters["kappa_L"] = r.kappa_left;
    run.parameters["kappa_R"] = r.kappa_right;
    run.parameters["gamma_L_cm1"] = net.gamma(SinkLabel::left);
    run.parameters["gamma_R_cm1"] = net.gamma(SinkLabel::right);
    return net;
  }
};

struct AxisFlags {
  double min;
  double max;
  std::size_t points;
  bool linear = false;

  void add(CLI::App* app, const std::string& prefix, const std::string& what) {
    app->add_option("--" + prefix + "-min", min, "Lower end of the " + what + " axis");
    app->add_option("--" + prefix + "-max", max, "Upper end of the " + what + " axis");
    app->add_option("--" + prefix + "-points", points, "Points on the " + what + " axis");
    app->add_flag("--" + prefix + "-linear", linear, "Linear instead of log spacing");
  }

  Axis axis(const std::string& name) const {
    Axis a{name, linear ? AxisScale::linear : AxisScale::log, min, max, points};
    a.validate();
    return a;
  }
};

struct DynamicsFlags {
  std::string law = "vonneumann";
  std::string integrator = "exact";
  double horizon_ps = kDefaultHorizonPs;
  std::string initial = "pure";
  std::string bath;
  double gamma_d = 0.0;
  CLI::Option* gamma_d_opt = nullptr;

  void add(CLI::App* app) {
    app->add_option("--law", law, "vonneumann | classical | classical-semiclassical | lindblad");
    app->add_option("--integrator", integrator, "exact | rk4");
    app->add_option("--horizon-ps", horizon_ps, "Integration horizon T in ps")
        ->check(CLI::PositiveNumber);
    app->add_option("--initial", initial, "pure | mixed | site:k");
    app->add_option("--bath", bath, "Phonon bath \"T_K,ER_cm1,wc_cm1\"");
    gamma_d_opt = app->add_option("--gamma-d", gamma_d, "Dephasing width for semiclassical rates (cm^-1)")
                      ->check(CLI::PositiveNumber);
  }

  // Bath for the chosen law: flag, then the model's own, then the default
  // (300 K, 35 cm^-1, 150 cm^-1) for the Lindblad law.
  std::optional<BathSpec> resolve_bath(Law l, const SiteNetwork& net) const {
    if (!bath.empty()) {
      if (l == Law::von_neumann || l == Law::classical)
        throw ValidationError("--bath has no effect with --law " + std::string(to_string(l)));
      return parse_bath(bath);
    }
    if (l == Law::lindblad) return net.bath() ? *net.bath() : BathSpec{};
    if (l == Law::classical_semiclassical && net.bath()) return *net.bath();
    return std::nullopt;
  }

  void record(Run& run, Law l, const std::optional<BathSpec>& b) const {
    run.parameters["law"] = std::string(to_string(l));
    run.parameters["integrator"] = integrator;
    run.parameters["horizon_ps"] = horizon_ps;
    run.parameters["initial"] = initial;
    run.parameters["bath"] = b ? bath_json(*b) : Json(nullptr);
    if (gamma_d_opt->count()) run.parameters["gamma_d_cm1"] = gamma_d;
  }
};

int resolve_workers(int flag) {
  if (const char* env = std::getenv("SRSWITCH_WORKERS"); env && *env) {
    const int w = static_cast<int>(parse_double(env));
    if (w < 1) throw ValidationError("SRSWITCH_WORKERS must be a positive integer");
    return w;
  }
  if (flag < 0) throw ValidationError("--workers must be >= 0");
  return flag > 0 ? flag : omp_get_max_threads();
}

std::ostream& summary_stream(const std::string& out_path, std::ostream& out, std::ostream& err) {
  return out_path.empty() ? err : out;
}

// ---- subcommands -------------------------------------------------------------

struct MultimerCmd {
  double omega = kDefaultOmega;
  double omega_sp = kDefaultOmegaSp;
  double gamma_l = 200.0;
  double gamma_r = 2.0;
  std::string bath;
  std::string out_path;

  void add(CLI::App* app) {
    app->add_option("--omega", omega, "Chain coupling Omega (cm^-1)");
    app->add_option("--omega-sp", omega_sp, "Special-pair coupling (cm^-1)");
    app->add_option("--gamma-l", gamma_l, "Left sink width (cm^-1)");
    app->add_option("--gamma-r", gamma_r, "Right sink width (cm^-1)");
    app->add_option("--bath", bath, "Attach a bath \"T_K,ER_cm1,wc_cm1\"");
    app->add_option("--out", out_path, "Output model JSON");
  }

  void run(Run& r, std::ostream& out) const {
    SiteNetwork net = build_multimer(omega, omega_sp, gamma_l, gamma_r);
    if (!bath.empty()) net = net.with_bath(parse_bath(bath));
    r.parameters = Json{{"omega_cm1", omega}, {"omega_sp_cm1", omega_sp},
                        {"gamma_L_cm1", gamma_l}, {"gamma_R_cm1", gamma_r}};
    const std::string text = serialize_network(net);
    if (out_path.empty()) {
      out << text;
      return;
    }
    write_text(out_path, text);
    r.outputs.push_back(out_path);
    r.write_manifest(out_path);
  }
};

struct ValidateCmd {
  std::string model;

  void add(CLI::App* app) { app->add_option("model", model, "Model JSON file")->required(); }

  void run(Run& r, std::ostream& out) const {
    const SiteNetwork net = r.load_model(model);
    const auto ratios = coupling_ratios(net);
    out << "ok: " << net.size() << " sites, " << net.sinks().size() << " sinks";
    if (net.sink(SinkLabel::left) && net.sink(SinkLabel::right))
      out << ", kappa_L = " << ratios.kappa_left << ", kappa_R = " << ratios.kappa_right;
    out << '\n';
  }
};

struct SpectrumCmd {
  ModelFlags model;
  std::string out_path;

  void add(CLI::App* app) {
    model.add(app);
    app->add_option("--out", out_path, "Output CSV");
  }

  void run(Run& r, std::ostream& out, std::ostream& err) const {
    const SiteNetwork net = model.resolve(r);
    const SpectralResult s = eigendecompose(net);
    r.emit(spectrum_table(s), out_path, out);
    r.write_manifest(out_path);
    auto& log = summary_stream(out_path, out, err);
    log << "widest state k = " << s.widest() + 1 << ", Gamma = " << format_double(s.widths[s.widest()])
        << " cm^-1, D = " << format_double(s.mean_spacing) << " cm^-1\n";
  }
};

struct TransitionsCmd {
  ModelFlags model;
  AxisFlags axis{1e-2, 1e4, 61};
  int workers = 0;
  std::string out_path;

  void add(CLI::App* app) {
    model.add(app);
    axis.add(app, "kappa", "kappa_L");
    app->add_option("--workers", workers, "Worker threads (0: all cores)");
    app->add_option("--out", out_path, "Output CSV");
  }

  void run(Run& r, std::ostream& out, std::ostream& err) const {
    const SiteNetwork net = model.base(r);
    const auto grid = axis.axis("kappa_L").values();
    r.parameters["q"] = model.q;
    r.parameters["kappa_L_axis"] = Json{{"min", axis.min}, {"max", axis.max}, {"points", axis.points},
                                        {"scale", axis.linear ? "linear" : "log"}};
    const int w = resolve_workers(workers);
    r.parameters["workers"] = w;
    const auto report = detect_transitions(net, model.q, grid, w);
    r.emit(transitions_table(report), out_path, out);
    r.write_manifest(out_path);
    auto& log = summary_stream(out_path, out, err);
    if (report.two_peaks_found())
      log << "ST_L = " << format_double(*report.st_left) << ", ST_R = " << format_double(*report.st_right)
          << ", sqrt(q) = " << format_double(report.kappa_switch_est) << '\n';
    else
      log << "fewer than two width maxima on this grid\n";
  }
};

struct EvolveCmd {
  ModelFlags model;
  DynamicsFlags dyn;
  double dt = 0.0;
  CLI::Option* dt_opt = nullptr;
  std::string out_path;

  void add(CLI::App* app) {
    model.add(app);
    dyn.add(app);
    dt_opt = app->add_option("--dt-ps", dt, "Time step in ps (default from the generator norm)")
                 ->check(CLI::PositiveNumber);
    app->add_option("--out", out_path, "Output trajectory CSV");
  }

  void run(Run& r, std::ostream& out, std::ostream& err) const {
    const Law l = parse_law(dyn.law);
    const SiteNetwork net = model.resolve(r);
    const auto b = dyn.resolve_bath(l, net);
    dyn.record(r, l, b);

    EvolutionOptions opt;
    opt.horizon_ps = dyn.horizon_ps;
    opt.integrator = parse_integrator(dyn.integrator);
    if (dt_opt->count()) opt.dt_ps = dt;
    const DensityMatrix rho0 = initial_state(net, InitialState::parse(dyn.initial));

    EvolutionResult res;
    switch (l) {
      case Law::von_neumann:
        res = evolve_von_neumann(net, rho0, opt);
        break;
      case Law::lindblad:
        res = evolve_lindblad(net, *b, rho0, opt);
        break;
      case Law::classical:
        res = classical_evolve(net, populations(rho0.matrix()), bare_rates(net), opt);
        break;
      case Law::classical_semiclassical: {
        double gd = 0.0;
        if (dyn.gamma_d_opt->count()) gd = dyn.gamma_d;
        else if (b) gd = homogeneous_broadening(*b);
        else throw ValidationError("classical-semiclassical needs --gamma-d or --bath");
        r.parameters["gamma_d_cm1"] = gd;
        res = classical_evolve(net, populations(rho0.matrix()), semiclassical_rates(net, gd), opt);
        break;
      }
    }
    if (res.times.size() > 1) r.parameters["dt_ps"] = res.times[1] - res.times[0];
    r.emit(trajectory_table(res, net), out_path, out);
    r.write_manifest(out_path);
    summary_stream(out_path, out, err)
        << "eta_L = " << format_double(res.final_eta_left())
        << ", eta_R = " << format_double(res.final_eta_right())
        << ", trace = " << format_double(res.final_trace) << '\n';
  }
};

struct SweepCmd {
  bool two_d = false;
  ModelFlags model;
  DynamicsFlags dyn;
  AxisFlags left;
  AxisFlags right{1e-2, 1e2, 41};
  int workers = 0;
  double contour_ratio = 9.0;
  std::string contours_path;
  std::string out_path;

  explicit SweepCmd(bool two) : two_d(two), left(two ? AxisFlags{1e-2, 1e2, 41} : AxisFlags{1e-2, 1e4, 61}) {}

  void add(CLI::App* app) {
    app->add_option("--model", model.model, "Model JSON file (default: built-in multimer)");
    dyn.add(app);
    left.add(app, "kl", "kappa_L");
    if (two_d) {
      right.add(app, "kr", "kappa_R");
      app->add_option("--contours", contours_path, "Write iso-ratio polylines to this CSV");
      app->add_option("--contour-ratio", contour_ratio, "Efficiency ratio of the contours");
    } else {
      app->add_option("--q", model.q, "Asymmetry q = kappa_L / kappa_R")->check(CLI::PositiveNumber);
    }
    app->add_option("--workers", workers, "Worker threads (0: all cores)");
    app->add_option("--out", out_path, "Output CSV");
  }

  void run(Run& r, std::ostream& out, std::ostream& err) const {
    const auto t0 = Clock::now();
    const Law l = parse_law(dyn.law);
    const SiteNetwork net = model.base(r);

    SweepSpec spec;
    spec.model = model.model.empty() ? "multimer" : model.model;
    spec.law = l;
    spec.integrator = parse_integrator(dyn.integrator);
    spec.kappa_left = left.axis("kappa_L");
    if (two_d) spec.kappa_right = right.axis("kappa_R");
    spec.q = model.q;
    spec.horizon_ps = dyn.horizon_ps;
    spec.bath = dyn.resolve_bath(l, net);
    if (dyn.gamma_d_opt->count()) spec.gamma_d = dyn.gamma_d;
    spec.initial = InitialState::parse(dyn.initial);
    spec.workers = resolve_workers(workers);
    spec.output = out_path;
    spec.validate();

    r.parameters["sweep"] = Json::parse(spec.to_json());
    dyn.record(r, l, spec.bath);

    std::vector<EfficiencyRecord> records;
    std::vector<Crossing> crossings;
    if (two_d) {
      records = sweep_2d(net, spec);
    } else {
      auto res = sweep_1d(net, spec);
      records = std::move(res.records);
      crossings = std::move(res.crossings);
    }
    r.emit(efficiency_table(records), out_path, out);

    if (two_d && !contours_path.empty()) {
      const auto lines = contour_extract(records, spec.kappa_left.points, spec.kappa_right->points,
                                         contour_ratio);
      CsvTable t{{"family", "curve", "closed", "kappa_L", "kappa_R"}, {}};
      for (std::size_t c = 0; c < lines.size(); ++c)
        for (const auto& [kl, kr] : lines[c].points)
          t.rows.push_back({static_cast<double>(lines[c].family), static_cast<double>(c),
                            lines[c].closed ? 1.0 : 0.0, kl, kr});
      t.save(contours_path);
      r.outputs.push_back(contours_path);
      r.parameters["contour_ratio"] = contour_ratio;
    }

    Json failed = Json::array();
    for (const auto& rec : records)
      if (!rec.ok())
        failed.push_back(Json{{"kappa_L", rec.kappa_left}, {"kappa_R", rec.kappa_right}, {"error", rec.error}});

    auto& log = summary_stream(out_path, out, err);
    if (!two_d) {
      Json cj = Json::array();
      for (const auto& c : crossings) cj.push_back(Json{{"kappa_L", c.kappa}, {"primary", c.primary}});
      r.parameters["crossings"] = cj;
      bool any = false;
      for (const auto& c : crossings)
        if (c.primary) {
          log << "crossing at kappa_L = " << format_double(c.kappa) << '\n';
          any = true;
        }
      if (!any) log << "no sign change of eta_L - eta_R\n";
    }
    if (!failed.empty()) log << failed.size() << " grid point(s) failed; see the sidecar file\n";

    if (!out_path.empty()) {
      Json side;
      side["spec"] = Json::parse(spec.to_json());
      side["code_version"] = SRSWITCH_VERSION;
      side["wall_time_s"] = std::chrono::duration<double>(Clock::now() - t0).count();
      side["failed_points"] = failed;
      const std::string side_path = out_path + ".meta.json";
      write_text(side_path, side.dump(2) + "\n");
      r.outputs.push_back(side_path);
    }
    r.write_manifest(out_path);
  }
};

struct ScanCmd {
  ModelFlags model;
  AxisFlags axis{1e-2, 1e4, 61};
  int workers = 0;
  std::string out_path;

  void add(CLI::App* app) {
    app->add_option("--model", model.model, "Model JSON file (default: built-in multimer)");
    app->add_option("--q", model.q, "Asymmetry q = kappa_L / kappa_R")->check(CLI::PositiveNumber);
    axis.add(app, "kl", "kappa_L");
    app->add_option("--workers", workers, "Worker threads (0: all cores)");
    app->add_option("--out", out_path, "Output CSV");
  }

  void run(Run& r, std::ostream& out) const {
    const SiteNetwork net = model.base(r);
    SweepSpec spec;
    spec.model = model.model.empty() ? "multimer" : model.model;
    spec.kappa_left = axis.axis("kappa_L");
    spec.q = model.q;
    spec.workers = resolve_workers(workers);
    spec.output = out_path;
    r.parameters["sweep"] = Json::parse(spec.to_json());
    r.emit(scan_table(scan_spectral(net, spec)), out_path, out);
    r.write_manifest(out_path);
  }
};

// CLI11 reports bad option values through its own exception types; the
// library's own errors carry the exit-code distinction.
int classify(const std::exception& e) {
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return kExitValidation;
  if (dynamic_cast<const CLI::Error*>(&e)) return kExitValidation;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return kExitValidation;
  return kExitNumerical;
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sink-asymmetry switching in open site networks"};
  app.set_version_flag("--version", SRSWITCH_VERSION);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  MultimerCmd multimer;
  multimer.add(app.add_subcommand("multimer", "Write the six-site multimer model"));
  ValidateCmd validate;
  validate.add(app.add_subcommand("validate", "Check a model file"));
  SpectrumCmd spectrum;
  spectrum.add(app.add_subcommand("spectrum", "Eigenstates of the effective Hamiltonian"));
  TransitionsCmd transitions;
  transitions.add(app.add_subcommand("transitions", "Subradiant width curve and its maxima"));
  EvolveCmd evolve;
  evolve.add(app.add_subcommand("evolve", "Time evolution with sink efficiencies"));
  SweepCmd sweep1d(false);
  sweep1d.add(app.add_subcommand("sweep1d", "eta_L - eta_R along kappa_L at fixed q"));
  SweepCmd sweep2d(true);
  sweep2d.add(app.add_subcommand("sweep2d", "Efficiencies on a (kappa_L, kappa_R) grid"));
  ScanCmd scan;
  scan.add(app.add_subcommand("scan-spectral", "Widths, PR and sink overlaps along kappa_L"));

  std::vector<const char*> argv;
  argv.push_back("srswitch");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);  // --help, --version
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return kExitValidation;
  }

  CLI::App* sub = app.get_subcommands().front();
  Run run;
  run.subcommand = sub->get_name();
  try {
    const std::string& name = run.subcommand;
    if (name == "multimer") multimer.run(run, out);
    else if (name == "validate") validate.run(run, out);
    else if (name == "spectrum") spectrum.run(run, out, err);
    else if (name == "transitions") transitions.run(run, out, err);
    else if (name == "evolve") evolve.run(run, out, err);
    else if (name == "sweep1d") sweep1d.run(run, out, err);
    else if (name == "sweep2d") sweep2d.run(run, out, err);
    else if (name == "scan-spectral") scan.run(run, out);
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return classify(e);
  }
  return kExitOk;
}

}  // namespace srswitch
