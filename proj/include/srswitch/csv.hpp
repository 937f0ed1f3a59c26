#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "srswitch/dynamics.hpp"
#include "srswitch/spectral.hpp"
#include "srswitch/sweep.hpp"

namespace srswitch {

/// 17 significant digits, so every double reads back exactly.
/// NaN renders as "nan", infinities as "inf"/"-inf".
std::string format_double(double value);
double parse_double(std::string_view text);

/// Plain comma-separated table: one header row, numeric cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column_index(std::string_view name) const;  // throws ValidationError
  std::vector<double> column(std::string_view name) const;

  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable load_csv(const std::filesystem::path& path);

inline constexpr std::string_view kEfficiencyHeader =
    "kappa_L,kappa_R,eta_L,eta_R,unbalanced,final_trace";

CsvTable efficiency_table(const std::vector<EfficiencyRecord>& records);
/// Requires the exact efficiency header.
std::vector<EfficiencyRecord> efficiency_records(const CsvTable& table);

/// One row per eigenstate: k (1-based), Re_E_cm1, Gamma_cm1, PR, overlap_L, overlap_R.
CsvTable spectrum_table(const SpectralResult& spectrum);

/// kappa_L, avg_sub_width_over_D.
CsvTable transitions_table(const TransitionReport& report);

/// t_ps, rho_11 .. rho_NN, abs_rho_12, eta_L, eta_R, trace.
/// The coherence column uses the special pair when the network declares one.
CsvTable trajectory_table(const EvolutionResult& result, const SiteNetwork& net);

/// Long format, one row per (kappa point, eigenstate): kappa_L, kappa_R, k,
/// Re_E_cm1, Gamma_cm1, PR, overlap_L, overlap_R, is_widest,
/// avg_sub_width_over_D, Gamma_L_partial, Gamma_R_partial.
CsvTable scan_table(const std::vector<SpectralScanPoint>& scan);

}  // namespace srswitch
