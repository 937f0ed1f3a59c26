#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace srswitch {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

/// Entry point of the srswitch executable. Writes results to files named by
/// flags (or to `out` when no --out is given) and diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace srswitch
