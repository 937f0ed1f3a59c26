#include "srswitch/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "srswitch/error.hpp"

namespace srswitch {

namespace {

using Json = nlohmann::ordered_json;

std::string site_str(std::size_t zero_based) { return std::to_string(zero_based + 1); }

}  // namespace

std::string_view to_string(SinkLabel label) {
  return label == SinkLabel::left ? "L" : "R";
}

SinkLabel parse_sink_label(std::string_view text) {
  if (text == "L") return SinkLabel::left;
  if (text == "R") return SinkLabel::right;
  throw ValidationError("sink label must be \"L\" or \"R\", got \"" + std::string(text) + "\"");
}

// ---- SiteNetwork -----------------------------------------------------------

SiteNetwork::SiteNetwork(std::vector<double> energies, Eigen::MatrixXd couplings,
                         std::vector<Sink> sinks, std::optional<SitePair> special_pair,
                         std::optional<BathSpec> bath)
    : energies_(std::move(energies)),
      couplings_(std::move(couplings)),
      sinks_(std::move(sinks)),
      special_pair_(special_pair),
      bath_(bath) {
  const auto n = energies_.size();
  if (n == 0) throw ValidationError("network must have at least one site");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(energies_[i]))
      throw ValidationError("energy of site " + site_str(i) + " is not finite");
  }
  if (static_cast<std::size_t>(couplings_.rows()) != n ||
      static_cast<std::size_t>(couplings_.cols()) != n)
    throw ValidationError("coupling matrix must be " + std::to_string(n) + "x" +
                          std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (couplings_(i, i) != 0.0)
      throw ValidationError("coupling matrix diagonal must be zero (site " + site_str(i) + ")");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(couplings_(i, j)))
        throw ValidationError("coupling " + site_str(i) + "-" + site_str(j) + " is not finite");
      if (couplings_(i, j) != couplings_(j, i))
        throw ValidationError("coupling matrix is not symmetric at (" + site_str(i) + ", " +
                              site_str(j) + ")");
    }
  }
  bool seen_left = false;
  bool seen_right = false;
  for (const auto& s : sinks_) {
    if (s.site >= n)
      throw ValidationError("sink site " + site_str(s.site) + " out of range 1.." +
                            std::to_string(n));
    if (!std::isfinite(s.gamma) || s.gamma < 0.0)
      throw ValidationError("sink gamma must be finite and non-negative");
    bool& seen = s.label == SinkLabel::left ? seen_left : seen_right;
    if (seen)
      throw ValidationError("more than one sink with label " + std::string(to_string(s.label)));
    seen = true;
  }
  if (special_pair_) {
    const auto [a, b] = *special_pair_;
    if (a >= n || b >= n)
      throw ValidationError("special pair site out of range 1.." + std::to_string(n));
    if (a == b) throw ValidationError("special pair sites must differ");
  }
  if (bath_) bath_->validate();
}

const Sink* SiteNetwork::sink(SinkLabel label) const noexcept {
  for (const auto& s : sinks_)
    if (s.label == label) return &s;
  return nullptr;
}

double SiteNetwork::gamma(SinkLabel label) const noexcept {
  const Sink* s = sink(label);
  return s ? s->gamma : 0.0;
}

Eigen::MatrixXd SiteNetwork::closed_hamiltonian() const {
  Eigen::MatrixXd h = couplings_;
  for (std::size_t i = 0; i < size(); ++i) h(i, i) = energies_[i];
  return h;
}

double SiteNetwork::reference_coupling() const {
  double omega = 0.0;
  if (sinks_.empty()) return couplings_.cwiseAbs().maxCoeff();
  for (const auto& s : sinks_)
    omega = std::max(omega, couplings_.row(s.site).cwiseAbs().maxCoeff());
  return omega;
}

SiteNetwork SiteNetwork::with_gammas(double gamma_left, double gamma_right) const {
  std::vector<Sink> sinks = sinks_;
  auto assign = [&](SinkLabel label, double g) {
    for (auto& s : sinks) {
      if (s.label == label) {
        s.gamma = g;
        return;
      }
    }
    if (g != 0.0)
      throw ValidationError("network has no " + std::string(to_string(label)) + " sink");
  };
  assign(SinkLabel::left, gamma_left);
  assign(SinkLabel::right, gamma_right);
  return SiteNetwork(energies_, couplings_, std::move(sinks), special_pair_, bath_);
}

SiteNetwork SiteNetwork::with_kappas(double kappa_left, double kappa_right) const {
  const double omega = reference_coupling();
  if (!(omega > 0.0))
    throw ValidationError("network has no nonzero coupling to define kappa = gamma/(2 Omega)");
  return with_gammas(2.0 * omega * kappa_left, 2.0 * omega * kappa_right);
}

SiteNetwork SiteNetwork::with_bath(std::optional<BathSpec> bath) const {
  return SiteNetwork(energies_, couplings_, sinks_, special_pair_, bath);
}

bool SiteNetwork::operator==(const SiteNetwork& other) const {
  return energies_ == other.energies_ && couplings_ == other.couplings_ &&
         sinks_ == other.sinks_ && special_pair_ == other.special_pair_ &&
         bath_ == other.bath_;
}

CouplingRatios coupling_ratios(const SiteNetwork& net) {
  const double omega = net.reference_coupling();
  CouplingRatios r;
  r.kappa_left = net.gamma(SinkLabel::left) / (2.0 * omega);
  r.kappa_right = net.gamma(SinkLabel::right) / (2.0 * omega);
  r.q = r.kappa_right > 0.0 ? r.kappa_left / r.kappa_right
                            : std::numeric_limits<double>::quiet_NaN();
  return r;
}

SiteNetwork build_multimer(double omega, double omega_sp, double gamma_left,
                           double gamma_right) {
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw ValidationError("multimer coupling omega must be positive");
  if (!(omega_sp > 0.0) || !std::isfinite(omega_sp))
    throw ValidationError("multimer special-pair coupling omega_sp must be positive");
  if (!(gamma_left >= 0.0) || !(gamma_right >= 0.0))
    throw ValidationError("multimer sink gammas must be non-negative");

  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(6, 6);
  auto bond = [&](int i, int j, double v) { c(i - 1, j - 1) = c(j - 1, i - 1) = v; };
  bond(1, 2, omega_sp);
  bond(1, 3, omega);
  bond(2, 4, omega);
  bond(3, 5, omega);
  bond(4, 6, omega);
  std::vector<Sink> sinks{{4, gamma_left, SinkLabel::left}, {5, gamma_right, SinkLabel::right}};
  return SiteNetwork(std::vector<double>(6, 0.0), std::move(c), std::move(sinks),
                     SitePair{0, 1});
}

// ---- model files -----------------------------------------------------------

namespace {

const Json& require(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(where + ": missing key \"" + key + "\"");
  return *it;
}

double require_number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ValidationError(where + ": expected a number");
  return v.get<double>();
}

std::size_t require_site(const Json& v, std::size_t n, const std::string& where) {
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw ValidationError(where + ": site index must be an integer");
  const auto k = v.get<long long>();
  if (k < 1 || static_cast<std::size_t>(k) > n)
    throw ValidationError(where + ": site index " + std::to_string(k) + " out of range 1.." +
                          std::to_string(n));
  return static_cast<std::size_t>(k - 1);
}

}  // namespace

SiteNetwork parse_network(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text.begin(), json_text.end());
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("model file must be a JSON object");

  const Json& sites = require(doc, "sites", "model");
  if (!sites.is_array() || sites.empty())
    throw ValidationError("model: \"sites\" must be a non-empty array");
  const std::size_t n = sites.size();
  std::vector<double> energies;
  energies.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string where = "sites[" + std::to_string(i) + "]";
    if (!sites[i].is_object()) throw ValidationError(where + ": expected an object");
    energies.push_back(require_number(require(sites[i], "energy_cm1", where), where));
  }

  Eigen::MatrixXd couplings = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXi given = Eigen::MatrixXi::Zero(n, n);
  const Json& cs = require(doc, "couplings", "model");
  if (!cs.is_array()) throw ValidationError("model: \"couplings\" must be an array");
  for (std::size_t k = 0; k < cs.size(); ++k) {
    const std::string where = "couplings[" + std::to_string(k) + "]";
    const Json& e = cs[k];
    if (!e.is_array() || e.size() != 3)
      throw ValidationError(where + ": expected [i, j, value_cm1]");
    const auto i = require_site(e[0], n, where);
    const auto j = require_site(e[1], n, where);
    const double v = require_number(e[2], where);
    if (i == j) throw ValidationError(where + ": self-coupling on site " + site_str(i));
    if (given(i, j)) {
      if (couplings(i, j) != v)
        throw ValidationError(where + ": coupling matrix is not symmetric, (" + site_str(i) +
                              ", " + site_str(j) + ") given twice with different values");
      throw ValidationError(where + ": pair (" + site_str(i) + ", " + site_str(j) +
                            ") given more than once");
    }
    given(i, j) = given(j, i) = 1;
    couplings(i, j) = couplings(j, i) = v;
  }

  std::vector<Sink> sinks;
  if (auto it = doc.find("sinks"); it != doc.end()) {
    if (!it->is_array()) throw ValidationError("model: \"sinks\" must be an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string where = "sinks[" + std::to_string(k) + "]";
      const Json& s = (*it)[k];
      if (!s.is_object()) throw ValidationError(where + ": expected an object");
      Sink sink;
      sink.site = require_site(require(s, "site", where), n, where);
      const Json& label = require(s, "label", where);
      if (!label.is_string()) throw ValidationError(where + ": label must be a string");
      sink.label = parse_sink_label(label.get<std::string>());
      sink.gamma = require_number(require(s, "gamma_cm1", where), where);
      sinks.push_back(sink);
    }
  }

  std::optional<SitePair> special_pair;
  if (auto it = doc.find("special_pair"); it != doc.end()) {
    if (!it->is_array() || it->size() != 2)
      throw ValidationError("special_pair: expected [i, j]");
    special_pair = SitePair{require_site((*it)[0], n, "special_pair"),
                            require_site((*it)[1], n, "special_pair")};
  }

  std::optional<BathSpec> bath;
  if (auto it = doc.find("bath"); it != doc.end()) {
    if (!it->is_object()) throw ValidationError("bath: expected an object");
    BathSpec b;
    b.temperature_k = require_number(require(*it, "temperature_K", "bath"), "bath");
    b.reorganization_cm1 = require_number(require(*it, "reorganization_cm1", "bath"), "bath");
    b.cutoff_cm1 = require_number(require(*it, "cutoff_cm1", "bath"), "bath");
    bath = b;
  }

  return SiteNetwork(std::move(energies), std::move(couplings), std::move(sinks),
                     special_pair, bath);
}

SiteNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_network(buf.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string serialize_network(const SiteNetwork& net) {
  Json doc = Json::object();
  Json sites = Json::array();
  for (double e : net.energies()) sites.push_back(Json{{"energy_cm1", e}});
  doc["sites"] = std::move(sites);

  Json couplings = Json::array();
  const auto& c = net.couplings();
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index j = i + 1; j < c.cols(); ++j)
      if (c(i, j) != 0.0) couplings.push_back(Json::array({i + 1, j + 1, c(i, j)}));
  doc["couplings"] = std::move(couplings);

  Json sinks = Json::array();
  for (const auto& s : net.sinks())
    sinks.push_back(Json{{"site", s.site + 1},
                         {"label", std::string(to_string(s.label))},
                         {"gamma_cm1", s.gamma}});
  doc["sinks"] = std::move(sinks);

  if (net.special_pair())
    doc["special_pair"] = Json::array({net.special_pair()->first + 1, net.special_pair()->second + 1});
  if (net.bath()) {
    const auto& b = *net.bath();
    doc["bath"] = Json{{"temperature_K", b.temperature_k},
                       {"reorganization_cm1", b.reorganization_cm1},
                       {"cutoff_cm1", b.cutoff_cm1}};
  }
  return doc.dump(2) + "\n";
}

void save_network(const SiteNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write model file " + path.string());
  out << serialize_network(net);
}

// ---- effective Hamiltonian -------------------------------------------------

EffectiveHamiltonian effective_hamiltonian(const SiteNetwork& net) {
  Eigen::MatrixXcd h = net.closed_hamiltonian().cast<std::complex<double>>();
  for (const auto& s : net.sinks()) h(s.site, s.site) -= std::complex<double>(0.0, 0.5 * s.gamma);
  return {std::move(h)};
}

// ---- density matrices ------------------------------------------------------

DensityMatrix::DensityMatrix(Eigen::MatrixXcd elements) : elements_(std::move(elements)) {
  if (elements_.rows() != elements_.cols() || elements_.rows() == 0)
    throw ValidationError("density matrix must be square and non-empty");
  if (!elements_.allFinite()) throw ValidationError("density matrix has non-finite entries");
  const double herm = (elements_ - elements_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kHermiticityTol)
    throw ValidationError("density matrix is not Hermitian (deviation " + std::to_string(herm) + ")");
  const Eigen::MatrixXcd sym = 0.5 * (elements_ + elements_.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kEigenvalueTol)
    throw ValidationError("density matrix has a negative eigenvalue");
  const double tr = elements_.trace().real();
  if (tr < -kTraceTol || tr > 1.0 + kTraceTol)
    throw ValidationError("density matrix trace " + std::to_string(tr) + " outside [0, 1]");
}

InitialState InitialState::parse(std::string_view text) {
  if (text == "pure") return {Kind::symmetric_pure, 0};
  if (text == "mixed") return {Kind::symmetric_mixed, 0};
  if (text.starts_with("site:")) {
    const std::string digits(text.substr(5));
    std::size_t used = 0;
    long long k = 0;
    try {
      k = std::stoll(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != digits.size() || digits.empty() || k < 1)
      throw ValidationError("initial state \"" + std::string(text) + "\": expected site:k with k >= 1");
    return {Kind::site, static_cast<std::size_t>(k - 1)};
  }
  throw ValidationError("initial state must be pure, mixed or site:k, got \"" + std::string(text) + "\"");
}

std::string InitialState::to_string() const {
  switch (kind) {
    case Kind::symmetric_pure: return "pure";
    case Kind::symmetric_mixed: return "mixed";
    case Kind::site: return "site:" + std::to_string(site + 1);
  }
  return {};
}

DensityMatrix initial_state(const SiteNetwork& net, const InitialState& kind) {
  const auto n = static_cast<Eigen::Index>(net.size());
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  if (kind.kind == InitialState::Kind::site) {
    if (kind.site >= net.size())
      throw ValidationError("initial site " + std::to_string(kind.site + 1) + " out of range 1.." +
                            std::to_string(net.size()));
    rho(kind.site, kind.site) = 1.0;
    return DensityMatrix(std::move(rho));
  }
  if (!net.special_pair())
    throw ValidationError("symmetric initial state needs a special pair declared in the model");
  const auto [a, b] = *net.special_pair();
  rho(a, a) = rho(b, b) = 0.5;
  if (kind.kind == InitialState::Kind::symmetric_pure) rho(a, b) = rho(b, a) = 0.5;
  return DensityMatrix(std::move(rho));
}

}  // namespace srswitch
