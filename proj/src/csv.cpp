#include "srswitch/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "srswitch/error.hpp"

namespace srswitch {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ValidationError("not a number: '" + std::string(text) + "'");
  return v;
}

std::size_t CsvTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ValidationError("missing CSV column '" + std::string(name) + "'");
}

std::vector<double> CsvTable::column(std::string_view name) const {
  const auto c = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

void CsvTable::write(std::ostream& out) const {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_double(r[i]);
    out << '\n';
  }
}

void CsvTable::save(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + path.string() + " for writing");
  write(f);
  if (!f) throw ValidationError("failed writing " + path.string());
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (t.header.empty()) {
      for (auto c : cells) t.header.emplace_back(c);
      continue;
    }
    if (cells.size() != t.header.size())
      throw ValidationError("CSV line " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(t.header.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto c : cells) row.push_back(parse_double(c));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw ValidationError("empty CSV");
  return t;
}

CsvTable load_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

CsvTable efficiency_table(const std::vector<EfficiencyRecord>& records) {
  CsvTable t;
  for (auto c : split(kEfficiencyHeader)) t.header.emplace_back(c);
  for (const auto& r : records)
    t.rows.push_back({r.kappa_left, r.kappa_right, r.eta_left, r.eta_right, r.unbalanced, r.final_trace});
  return t;
}

std::vector<EfficiencyRecord> efficiency_records(const CsvTable& table) {
  std::string joined;
  for (std::size_t i = 0; i < table.header.size(); ++i) joined += (i ? "," : "") + table.header[i];
  if (joined != kEfficiencyHeader)
    throw ValidationError("unexpected efficiency CSV header: " + joined);
  std::vector<EfficiencyRecord> out;
  out.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    EfficiencyRecord e;
    e.kappa_left = r[0];
    e.kappa_right = r[1];
    e.eta_left = r[2];
    e.eta_right = r[3];
    e.unbalanced = r[4];
    e.final_trace = r[5];
    if (std::isnan(e.eta_left)) e.error = "failed point";
    out.push_back(std::move(e));
  }
  return out;
}

CsvTable spectrum_table(const SpectralResult& s) {
  CsvTable t{{"k", "Re_E_cm1", "Gamma_cm1", "PR", "overlap_L", "overlap_R"}, {}};
  for (std::size_t k = 0; k < s.size(); ++k)
    t.rows.push_back({static_cast<double>(k + 1), s.eigenvalues[k].real(), s.widths[k],
                      s.participation[k], s.overlap_left[k], s.overlap_right[k]});
  return t;
}

CsvTable transitions_table(const TransitionReport& report) {
  CsvTable t{{"kappa_L", "avg_sub_width_over_D"}, {}};
  for (std::size_t i = 0; i < report.kappa_grid.size(); ++i)
    t.rows.push_back({report.kappa_grid[i], report.avg_sub_width[i]});
  return t;
}

CsvTable trajectory_table(const EvolutionResult& result, const SiteNetwork& net) {
  const std::size_t n = net.size();
  CsvTable t;
  t.header.push_back("t_ps");
  for (std::size_t i = 1; i <= n; ++i) t.header.push_back("rho_" + std::to_string(i) + std::to_string(i));
  t.header.insert(t.header.end(), {"abs_rho_12", "eta_L", "eta_R", "trace"});
  std::size_t a = 0;
  std::size_t b = n > 1 ? 1 : 0;
  if (net.special_pair()) std::tie(a, b) = *net.special_pair();
  for (std::size_t s = 0; s < result.times.size(); ++s) {
    const auto& rho = result.states[s];
    std::vector<double> row;
    row.reserve(n + 5);
    row.push_back(result.times[s]);
    for (std::size_t i = 0; i < n; ++i) row.push_back(rho(i, i).real());
    row.push_back(std::abs(rho(a, b)));
    row.push_back(result.eta_left[s]);
    row.push_back(result.eta_right[s]);
    row.push_back(rho.trace().real());
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable scan_table(const std::vector<SpectralScanPoint>& scan) {
  CsvTable t{{"kappa_L", "kappa_R", "k", "Re_E_cm1", "Gamma_cm1", "PR", "overlap_L", "overlap_R",
              "is_widest", "avg_sub_width_over_D", "Gamma_L_partial", "Gamma_R_partial"},
             {}};
  for (const auto& p : scan) {
    for (Eigen::Index k = 0; k < p.energies.size(); ++k) {
      t.rows.push_back({p.kappa_left, p.kappa_right, static_cast<double>(k + 1), p.energies[k],
                        p.widths[k], p.participation[k], p.overlap_left[k], p.overlap_right[k],
                        static_cast<std::size_t>(k) == p.widest ? 1.0 : 0.0, p.avg_sub_width,
                        p.partial.left, p.partial.right});
    }
  }
  return t;
}

}  // namespace srswitch
