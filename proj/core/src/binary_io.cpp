#include "sfgnn/binary_io.hpp"

#include "sfgnn/error.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace sfgnn::io {
namespace {

std::array<char, 8> to_le_bytes(double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  return b;
}

double from_le_bytes(const char* b) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  }
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_f64_le(std::ostream& out, std::span<const double> values) {
  std::vector<char> buffer(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto b = to_le_bytes(values[i]);
    std::memcpy(buffer.data() + 8 * i, b.data(), 8);
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  require(out.good(), ErrorCode::kIo, "failed writing binary payload");
}

void read_f64_le(std::istream& in, std::span<double> values) {
  std::vector<char> buffer(values.size() * 8);
  in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  require(in.gcount() == static_cast<std::streamsize>(buffer.size()), ErrorCode::kFormat,
          "truncated binary payload: expected " + std::to_string(values.size()) + " float64 values");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = from_le_bytes(buffer.data() + 8 * i);
}

void write_matrix_le(std::ostream& out, const Matrix& m) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = m;
  write_f64_le(out, std::span<const double>(row_major.data(), static_cast<std::size_t>(row_major.size())));
}

void read_matrix_le(std::istream& in, Matrix& m) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major(m.rows(), m.cols());
  read_f64_le(in, std::span<double>(row_major.data(), static_cast<std::size_t>(row_major.size())));
  m = row_major;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  require(out.good(), ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  require(ec == std::errc{}, ErrorCode::kFormat, "cannot format double");
  return std::string(buf.data(), end);
}

}  // namespace sfgnn::io
