#pragma once

#include "scs/linalg.hpp"

#include <filesystem>
#include <iosfwd>

namespace scs::io {

// SCSM binary matrix format, little-endian throughout:
//   bytes 0..3   magic "SCSM"
//   bytes 4..7   u32 rows
//   bytes 8..11  u32 cols
//   then rows*cols f64 values, row-major.
void write_scsm(std::ostream& out, const Matrix& m);
Matrix read_scsm(std::istream& in);
void write_scsm(const std::filesystem::path& path, const Matrix& m);
Matrix read_scsm(const std::filesystem::path& path);

/// Plain CSV, one matrix row per line, full round-trip precision.
void write_csv(std::ostream& out, const Matrix& m);
void write_csv(const std::filesystem::path& path, const Matrix& m);
/// Reads a headerless numeric CSV. All lines must have the same field count.
Matrix read_csv(const std::filesystem::path& path);

}  // namespace scs::io
