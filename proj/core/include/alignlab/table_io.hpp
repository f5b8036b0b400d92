#pragma once

#include "alignlab/rng.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace alignlab {

/// Reads a numeric CSV: one row per point, comma-separated reals, at most one
/// leading header line starting with '#'. All rows must have equal width.
Matrix read_matrix_csv(std::istream& in, const std::string& source_name = "<stream>");
Matrix read_matrix_csv(const std::filesystem::path& path);

/// Writes rows with 17 significant digits so values round-trip exactly.
void write_matrix_csv(std::ostream& out, const Matrix& m, const std::string& header = {});
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::string& header = {});

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);

}  // namespace alignlab
