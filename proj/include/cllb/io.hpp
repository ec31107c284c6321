#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace cllb::io {

inline constexpr char kBinaryMagic[4] = {'C', 'L', 'L', 'B'};
inline constexpr std::uint32_t kBinaryVersion = 1;

/// Shortest round-trip text form ("%.17g"), so CSV outputs are reproducible byte for byte.
std::string fmt(double x);

/// Binary dump: magic "CLLB", u32 version, u64 rows, u64 cols, then rows*cols little-endian
/// float64 values in column-major order.
void write_binary(std::ostream& os, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_binary(std::istream& is);

/// Flat "key = value" configuration; '#' starts a comment, blank lines are ignored.
/// Throws ValidationError on malformed lines.
std::vector<std::pair<std::string, std::string>> parse_config(std::istream& is);
std::vector<std::pair<std::string, std::string>> parse_config_file(const std::filesystem::path& p);

}  // namespace cllb::io
