#pragma once

// On-disk formats.
//
// Polynomial batch ("CPLY"), little-endian:
//   char[4] "CPLY" | u32 version = 1 | u32 degree n | u32 precision (0 fp32, 1 fp64)
//   | u64 count | count records of n (re, im) pairs, low-degree-first, monic implied.
//
// Root file ("CRTS"), little-endian:
//   char[4] "CRTS" | u32 version = 1 | u32 degree | u64 count
//   | count * degree (re, im) pairs of f64, in input order.
//
// Text roots: one polynomial per line, roots formatted "re+imi" / "re-imi"
// and separated by tabs. Text batches use the same complex syntax for
// coefficients (low-degree-first, monic implied), separated by whitespace.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rootdensity/eigensolver.hpp"
#include "rootdensity/polynomial.hpp"

namespace rootdensity::io {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::size_t kBatchHeaderBytes = 24;
inline constexpr std::size_t kRootsHeaderBytes = 20;

struct BatchHeader {
  std::uint32_t degree = 0;
  Precision precision = Precision::kFp64;
  std::uint64_t count = 0;
};

/// Streaming reader for CPLY files. Coefficients are widened to double
/// (exact for fp32 files).
class BatchReader {
 public:
  explicit BatchReader(const std::string& path);

  const BatchHeader& header() const noexcept { return header_; }
  std::uint64_t remaining() const noexcept { return header_.count - consumed_; }

  /// Appends up to max_count polynomials to out; returns how many were read.
  std::size_t read(std::size_t max_count, std::vector<Polynomial<double>>& out);

 private:
  std::ifstream in_;
  std::string path_;
  BatchHeader header_;
  std::uint64_t consumed_ = 0;
};

/// Streaming writer for CPLY files; the record count is patched on close().
class BatchWriter {
 public:
  BatchWriter(const std::string& path, std::uint32_t degree, Precision precision);
  ~BatchWriter();
  BatchWriter(const BatchWriter&) = delete;
  BatchWriter& operator=(const BatchWriter&) = delete;

  void write(const Polynomial<double>& p);
  void close();
  std::uint64_t count() const noexcept { return count_; }

 private:
  std::ofstream out_;
  std::string path_;
  BatchHeader header_;
  std::uint64_t count_ = 0;
  bool closed_ = false;
};

std::vector<Polynomial<double>> read_batch(const std::string& path, BatchHeader* header = nullptr);
void write_batch(const std::string& path, std::span<const Polynomial<double>> polys,
                 Precision precision);

struct RootsHeader {
  std::uint32_t degree = 0;
  std::uint64_t count = 0;
};

class RootsReader {
 public:
  explicit RootsReader(const std::string& path);
  const RootsHeader& header() const noexcept { return header_; }
  /// Appends up to max_count root sets (degree values each) to out.
  std::size_t read(std::size_t max_count, std::vector<std::complex<double>>& out);

 private:
  std::ifstream in_;
  std::string path_;
  RootsHeader header_;
  std::uint64_t consumed_ = 0;
};

class RootsWriter {
 public:
  RootsWriter(const std::string& path, std::uint32_t degree);
  ~RootsWriter();
  RootsWriter(const RootsWriter&) = delete;
  RootsWriter& operator=(const RootsWriter&) = delete;

  /// Writes count root sets laid out contiguously.
  void write(std::span<const std::complex<double>> roots);
  void close();
  std::uint64_t count() const noexcept { return count_; }

 private:
  std::ofstream out_;
  std::string path_;
  std::uint32_t degree_;
  std::uint64_t count_ = 0;
  bool closed_ = false;
};

/// "re+imi" with shortest round-trip decimal digits, locale independent.
std::string format_complex(std::complex<double> z);

/// Parses "re+imi", "re-imi", "re", "imi", "i", "-i".
std::optional<std::complex<double>> parse_complex(std::string_view text);

/// One line: roots separated by tabs, no trailing newline.
std::string format_root_line(std::span<const std::complex<double>> roots);

/// Reads a text batch. Throws MixedDegreeBatch when line lengths differ and
/// FormatError on unparsable tokens.
std::vector<Polynomial<double>> read_text_batch(const std::string& path);

}  // namespace rootdensity::io
