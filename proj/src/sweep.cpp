#include "srswitch/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <omp.h>

#include <json.hpp>

#include "srswitch/error.hpp"

namespace srswitch {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int thread_count(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }

std::optional<BathSpec> resolve_bath(const SiteNetwork& net, const SweepSpec& spec) {
  if (spec.bath) return spec.bath;
  return net.bath();
}

}  // namespace

// ---- spec --------------------------------------------------------------------

void Axis::validate() const {
  if (points < 2) throw ValidationError("axis " + name + " needs at least 2 points");
  if (!std::isfinite(min) || !std::isfinite(max) || !(min < max))
    throw ValidationError("axis " + name + " needs min < max");
  if (scale == AxisScale::log && !(min > 0.0))
    throw ValidationError("log axis " + name + " needs min > 0");
}

std::vector<double> Axis::values() const {
  validate();
  if (scale == AxisScale::log) return log_grid(min, max, points);
  std::vector<double> v(points);
  for (std::size_t i = 0; i < points; ++i)
    v[i] = min + (max - min) * static_cast<double>(i) / static_cast<double>(points - 1);
  return v;
}

void SweepSpec::validate() const {
  kappa_left.validate();
  if (kappa_right) kappa_right->validate();
  if (!kappa_right && (!(q > 0.0) || !std::isfinite(q))) throw ValidationError("q must be positive");
  if (!(horizon_ps > 0.0) || !std::isfinite(horizon_ps))
    throw ValidationError("horizon must be positive");
  if (bath) bath->validate();
  if (gamma_d && !(*gamma_d > 0.0)) throw ValidationError("gamma_d must be positive");
}

std::string SweepSpec::to_json() const {
  using Json = nlohmann::ordered_json;
  auto axis_json = [](const Axis& a) {
    return Json{{"name", a.name},
                {"scale", a.scale == AxisScale::log ? "log" : "linear"},
                {"min", a.min},
                {"max", a.max},
                {"points", a.points}};
  };
  Json j;
  j["model"] = model;
  j["law"] = std::string(to_string(law));
  j["integrator"] = std::string(to_string(integrator));
  j["axes"] = Json::array({axis_json(kappa_left)});
  if (kappa_right) j["axes"].push_back(axis_json(*kappa_right));
  else j["q"] = q;
  j["horizon_ps"] = horizon_ps;
  if (bath)
    j["bath"] = Json{{"temperature_K", bath->temperature_k},
                     {"reorganization_cm1", bath->reorganization_cm1},
                     {"cutoff_cm1", bath->cutoff_cm1}};
  else
    j["bath"] = nullptr;
  j["gamma_d_cm1"] = gamma_d ? Json(*gamma_d) : Json(nullptr);
  j["initial"] = initial.to_string();
  j["workers"] = workers;
  j["output"] = output;
  return j.dump();
}

// ---- point kernel ------------------------------------------------------------

PointEvaluator::PointEvaluator(SiteNetwork net_template, const SweepSpec& spec)
    : template_(std::move(net_template)),
      law_(spec.law),
      rho0_(initial_state(template_, spec.initial)) {
  spec.validate();
  options_.horizon_ps = spec.horizon_ps;
  options_.integrator = spec.integrator;
  options_.record_trajectory = false;
  switch (law_) {
    case Law::von_neumann:
      break;
    case Law::lindblad: {
      const auto bath = resolve_bath(template_, spec);
      if (!bath) throw ValidationError("lindblad law needs a bath (flag or model file)");
      dissipator_ = build_generators(template_, *bath).dissipator();
      break;
    }
    case Law::classical:
      rates_ = bare_rates(template_);
      break;
    case Law::classical_semiclassical: {
      double gd = 0.0;
      if (spec.gamma_d) {
        gd = *spec.gamma_d;
      } else {
        const auto bath = resolve_bath(template_, spec);
        if (!bath)
          throw ValidationError("semiclassical rates need gamma_d or a bath to derive it from");
        gd = homogeneous_broadening(*bath);
      }
      rates_ = semiclassical_rates(template_, gd);
      break;
    }
  }
}

EfficiencyRecord PointEvaluator::operator()(double kappa_left, double kappa_right) const {
  EfficiencyRecord rec;
  rec.kappa_left = kappa_left;
  rec.kappa_right = kappa_right;
  try {
    const SiteNetwork net = template_.with_kappas(kappa_left, kappa_right);
    EvolutionResult r;
    if (law_ == Law::von_neumann) {
      r = evolve_von_neumann(net, rho0_, options_);
    } else if (law_ == Law::lindblad) {
      r = evolve_lindblad(net, *dissipator_, rho0_, options_);
    } else {
      r = classical_evolve(net, populations(rho0_.matrix()), *rates_, options_);
    }
    rec.eta_left = r.final_eta_left();
    rec.eta_right = r.final_eta_right();
    rec.unbalanced = rec.eta_left - rec.eta_right;
    rec.final_trace = r.final_trace;
    if (!std::isfinite(rec.eta_left) || !std::isfinite(rec.eta_right))
      throw NumericalError("non-finite efficiency");
  } catch (const std::exception& e) {
    rec.eta_left = rec.eta_right = rec.unbalanced = rec.final_trace = kNaN;
    rec.error = e.what();
  }
  return rec;
}

std::vector<EfficiencyRecord> evaluate_points(const PointEvaluator& eval,
                                              std::span<const KappaPoint> points, int workers) {
  std::vector<EfficiencyRecord> out(points.size());
  const auto n = static_cast<long>(points.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count(workers))
  for (long i = 0; i < n; ++i) out[i] = eval(points[i].first, points[i].second);
  return out;
}

std::vector<EfficiencyRecord> evaluate_points_serial(const PointEvaluator& eval,
                                                     std::span<const KappaPoint> points) {
  std::vector<EfficiencyRecord> out;
  out.reserve(points.size());
  for (const auto& [kl, kr] : points) out.push_back(eval(kl, kr));
  return out;
}

// ---- 1D / 2D sweeps ----------------------------------------------------------

std::vector<Crossing> find_crossings(std::span<const EfficiencyRecord> records, double q,
                                     double dead_band) {
  std::vector<Crossing> out;
  auto sign = [dead_band](double u) { return u > dead_band ? 1 : (u < -dead_band ? -1 : 0); };
  for (std::size_t i = 0; i + 1 < records.size(); ++i) {
    const double u0 = records[i].unbalanced;
    const double u1 = records[i + 1].unbalanced;
    if (!std::isfinite(u0) || !std::isfinite(u1)) continue;
    if (sign(u0) * sign(u1) >= 0) continue;
    const double x0 = std::log(records[i].kappa_left);
    const double x1 = std::log(records[i + 1].kappa_left);
    out.push_back({std::exp(x0 + (x1 - x0) * u0 / (u0 - u1)), false});
  }
  if (!out.empty()) {
    const double target = 0.5 * std::log(q);
    auto best = std::min_element(out.begin(), out.end(), [&](const Crossing& a, const Crossing& b) {
      return std::abs(std::log(a.kappa) - target) < std::abs(std::log(b.kappa) - target);
    });
    best->primary = true;
  }
  return out;
}

std::optional<double> Sweep1DResult::primary_crossing() const {
  for (const auto& c : crossings)
    if (c.primary) return c.kappa;
  return std::nullopt;
}

Sweep1DResult sweep_1d(const SiteNetwork& net_template, const SweepSpec& spec) {
  spec.validate();
  const PointEvaluator eval(net_template, spec);
  std::vector<KappaPoint> points;
  for (double kl : spec.kappa_left.values()) points.emplace_back(kl, kl / spec.q);
  Sweep1DResult r;
  r.records = evaluate_points(eval, points, spec.workers);
  r.crossings = find_crossings(r.records, spec.q);
  return r;
}

std::vector<EfficiencyRecord> sweep_2d(const SiteNetwork& net_template, const SweepSpec& spec) {
  spec.validate();
  if (!spec.kappa_right) throw ValidationError("2D sweep needs a kappa_R axis");
  const PointEvaluator eval(net_template, spec);
  std::vector<KappaPoint> points;
  const auto right = spec.kappa_right->values();
  for (double kl : spec.kappa_left.values())
    for (double kr : right) points.emplace_back(kl, kr);
  return evaluate_points(eval, points, spec.workers);
}

// ---- contours ----------------------------------------------------------------

namespace {

// Edge key: (orientation, i, j). Horizontal edges join (i,j)-(i+1,j),
// vertical edges join (i,j)-(i,j+1).
using EdgeKey = std::tuple<int, std::size_t, std::size_t>;

struct Segment {
  EdgeKey a, b;
  KappaPoint pa, pb;
};

std::vector<Polyline> join_segments(const std::vector<Segment>& segs, int family) {
  std::map<EdgeKey, std::vector<std::size_t>> touching;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    touching[segs[s].a].push_back(s);
    touching[segs[s].b].push_back(s);
  }
  std::vector<bool> used(segs.size(), false);
  std::vector<Polyline> lines;

  auto walk = [&](std::size_t start, const EdgeKey& from_key) {
    Polyline line;
    line.family = family;
    EdgeKey key = from_key;
    std::size_t s = start;
    const Segment& first = segs[s];
    line.points.push_back(first.a == key ? first.pa : first.pb);
    while (true) {
      used[s] = true;
      const Segment& seg = segs[s];
      const bool forward = seg.a == key;
      key = forward ? seg.b : seg.a;
      line.points.push_back(forward ? seg.pb : seg.pa);
      std::size_t next = segs.size();
      for (std::size_t t : touching[key])
        if (!used[t]) next = t;
      if (next == segs.size()) break;
      s = next;
    }
    line.closed = line.points.size() > 2 && key == from_key;
    return line;
  };

  // Open curves start at edges touched once (grid boundary).
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (used[s]) continue;
    for (const EdgeKey& end : {segs[s].a, segs[s].b}) {
      if (!used[s] && touching[end].size() == 1) lines.push_back(walk(s, end));
    }
  }
  for (std::size_t s = 0; s < segs.size(); ++s)
    if (!used[s]) lines.push_back(walk(s, segs[s].a));
  return lines;
}

}  // namespace

std::vector<Polyline> contour_extract(std::span<const EfficiencyRecord> grid, std::size_t n_left,
                                      std::size_t n_right, double ratio) {
  if (!(ratio >= 1.0) || !std::isfinite(ratio)) throw ValidationError("contour ratio must be >= 1");
  if (n_left < 2 || n_right < 2 || grid.size() != n_left * n_right)
    throw ValidationError("contour grid shape does not match the record count");

  constexpr double tiny = 1e-300;
  auto at = [&](std::size_t i, std::size_t j) -> const EfficiencyRecord& { return grid[i * n_right + j]; };
  auto field = [&](std::size_t i, std::size_t j) {
    const auto& r = at(i, j);
    if (!r.ok() || !(r.eta_left + r.eta_right > 0.0)) return kNaN;
    return std::log(std::max(r.eta_left, tiny) / std::max(r.eta_right, tiny));
  };
  auto coord = [&](std::size_t i, std::size_t j) {
    return KappaPoint{std::log10(at(i, j).kappa_left), std::log10(at(i, j).kappa_right)};
  };

  std::vector<std::pair<double, int>> levels;
  if (ratio == 1.0) levels = {{0.0, 0}};
  else levels = {{std::log(ratio), +1}, {-std::log(ratio), -1}};

  std::vector<Polyline> out;
  for (const auto& [level, family] : levels) {
    std::vector<Segment> segs;
    for (std::size_t i = 0; i + 1 < n_left; ++i) {
      for (std::size_t j = 0; j + 1 < n_right; ++j) {
        // Corners counter-clockwise: (i,j) (i+1,j) (i+1,j+1) (i,j+1).
        const std::size_t ci[4] = {i, i + 1, i + 1, i};
        const std::size_t cj[4] = {j, j, j + 1, j + 1};
        double f[4];
        bool finite = true;
        for (int c = 0; c < 4; ++c) {
          f[c] = field(ci[c], cj[c]);
          finite = finite && std::isfinite(f[c]);
        }
        if (!finite) continue;
        const EdgeKey keys[4] = {{0, i, j}, {1, i + 1, j}, {0, i, j + 1}, {1, i, j}};
        std::vector<int> crossed;
        KappaPoint pts[4];
        for (int e = 0; e < 4; ++e) {
          const int c0 = e;
          const int c1 = (e + 1) % 4;
          const bool above0 = f[c0] > level;
          const bool above1 = f[c1] > level;
          if (above0 == above1) continue;
          const double t = (level - f[c0]) / (f[c1] - f[c0]);
          const auto p0 = coord(ci[c0], cj[c0]);
          const auto p1 = coord(ci[c1], cj[c1]);
          pts[e] = {std::pow(10.0, p0.first + t * (p1.first - p0.first)),
                    std::pow(10.0, p0.second + t * (p1.second - p0.second))};
          crossed.push_back(e);
        }
        if (crossed.size() == 2) {
          segs.push_back({keys[crossed[0]], keys[crossed[1]], pts[crossed[0]], pts[crossed[1]]});
        } else if (crossed.size() == 4) {
          // Saddle: the cell-centre average decides which corners connect.
          const bool centre_above = 0.25 * (f[0] + f[1] + f[2] + f[3]) > level;
          const bool corner0_above = f[0] > level;
          if (centre_above == corner0_above) {
            segs.push_back({keys[0], keys[1], pts[0], pts[1]});
            segs.push_back({keys[2], keys[3], pts[2], pts[3]});
          } else {
            segs.push_back({keys[3], keys[0], pts[3], pts[0]});
            segs.push_back({keys[1], keys[2], pts[1], pts[2]});
          }
        }
      }
    }
    auto lines = join_segments(segs, family);
    out.insert(out.end(), std::make_move_iterator(lines.begin()), std::make_move_iterator(lines.end()));
  }
  return out;
}

// ---- spectral scan -----------------------------------------------------------

std::vector<SpectralScanPoint> scan_spectral(const SiteNetwork& net_template, const SweepSpec& spec) {
  spec.validate();
  const auto kappas = spec.kappa_left.values();
  std::vector<SpectralScanPoint> out(kappas.size());
  std::vector<std::string> errors(kappas.size());
  const auto n = static_cast<long>(kappas.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count(spec.workers))
  for (long i = 0; i < n; ++i) {
    try {
      SpectralScanPoint& p = out[i];
      p.kappa_left = kappas[i];
      p.kappa_right = kappas[i] / spec.q;
      const SiteNetwork net = net_template.with_kappas(p.kappa_left, p.kappa_right);
      const SpectralResult s = eigendecompose(net);
      p.energies = s.eigenvalues.real();
      p.widths = s.widths;
      p.participation = s.participation;
      p.overlap_left = s.overlap_left;
      p.overlap_right = s.overlap_right;
      p.widest = s.widest();
      p.avg_sub_width = s.size() >= 3 ? subradiant_average_width(s) : kNaN;
      p.partial = partial_widths(s, net);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty())
      throw NumericalError("spectral scan failed at kappa_L = " + std::to_string(kappas[i]) + ": " + errors[i]);
  return out;
}

}  // namespace srswitch
