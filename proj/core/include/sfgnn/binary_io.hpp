#pragma once

#include "sfgnn/parameters.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sfgnn::io {

/// Appends `values` as little-endian IEEE-754 binary64 regardless of host order.
void write_f64_le(std::ostream& out, std::span<const double> values);
void read_f64_le(std::istream& in, std::span<double> values);

/// Row-major little-endian dump of a matrix.
void write_matrix_le(std::ostream& out, const Matrix& m);
void read_matrix_le(std::istream& in, Matrix& m);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace sfgnn::io
