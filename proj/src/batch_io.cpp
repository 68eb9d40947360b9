#include "rootdensity/batch_io.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>

#include "rootdensity/errors.hpp"

namespace rootdensity::io {

namespace {

constexpr std::array<char, 4> kBatchMagic{'C', 'P', 'L', 'Y'};
constexpr std::array<char, 4> kRootsMagic{'C', 'R', 'T', 'S'};

template <typename U>
void put_le(std::string& buf, U value) {
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    buf.push_back(static_cast<char>((value >> (8 * b)) & 0xFF));
  }
}

void put_f64(std::string& buf, double v) { put_le(buf, std::bit_cast<std::uint64_t>(v)); }
void put_f32(std::string& buf, float v) { put_le(buf, std::bit_cast<std::uint32_t>(v)); }

template <typename U>
U get_le(const unsigned char* p) {
  U v = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) v |= static_cast<U>(p[b]) << (8 * b);
  return v;
}

void read_exact(std::ifstream& in, unsigned char* dst, std::size_t n, const std::string& path,
                const char* what) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw FormatError(path + ": truncated " + what);
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

void write_bytes(std::ofstream& out, const std::string& buf, const std::string& path) {
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed on " + path);
}

std::size_t batch_scalar_bytes(Precision p) { return p == Precision::kFp32 ? 4 : 8; }

std::string encode_batch_header(const BatchHeader& h) {
  std::string buf(kBatchMagic.begin(), kBatchMagic.end());
  put_le<std::uint32_t>(buf, kFormatVersion);
  put_le<std::uint32_t>(buf, h.degree);
  put_le<std::uint32_t>(buf, h.precision == Precision::kFp32 ? 0u : 1u);
  put_le<std::uint64_t>(buf, h.count);
  return buf;
}

std::string encode_roots_header(std::uint32_t degree, std::uint64_t count) {
  std::string buf(kRootsMagic.begin(), kRootsMagic.end());
  put_le<std::uint32_t>(buf, kFormatVersion);
  put_le<std::uint32_t>(buf, degree);
  put_le<std::uint64_t>(buf, count);
  return buf;
}

}  // namespace

BatchReader::BatchReader(const std::string& path) : in_(open_input(path)), path_(path) {
  std::array<unsigned char, kBatchHeaderBytes> h{};
  read_exact(in_, h.data(), h.size(), path_, "batch header");
  if (std::memcmp(h.data(), kBatchMagic.data(), 4) != 0) {
    throw FormatError(path_ + ": bad magic, expected CPLY");
  }
  const auto version = get_le<std::uint32_t>(h.data() + 4);
  if (version != kFormatVersion) {
    throw FormatError(path_ + ": unsupported batch version " + std::to_string(version));
  }
  header_.degree = get_le<std::uint32_t>(h.data() + 8);
  const auto prec = get_le<std::uint32_t>(h.data() + 12);
  if (prec > 1) throw FormatError(path_ + ": unknown precision flag " + std::to_string(prec));
  header_.precision = prec == 0 ? Precision::kFp32 : Precision::kFp64;
  header_.count = get_le<std::uint64_t>(h.data() + 16);
  if (header_.degree < 1) throw FormatError(path_ + ": degree must be >= 1");
}

std::size_t BatchReader::read(std::size_t max_count, std::vector<Polynomial<double>>& out) {
  const std::size_t n = header_.degree;
  const std::size_t scalar = batch_scalar_bytes(header_.precision);
  const std::size_t record = 2 * n * scalar;
  std::vector<unsigned char> buf(record);
  std::vector<std::complex<double>> coeffs(n);
  std::size_t got = 0;
  while (got < max_count && consumed_ < header_.count) {
    read_exact(in_, buf.data(), record, path_, "polynomial record");
    for (std::size_t k = 0; k < n; ++k) {
      const unsigned char* p = buf.data() + 2 * k * scalar;
      if (header_.precision == Precision::kFp32) {
        coeffs[k] = {std::bit_cast<float>(get_le<std::uint32_t>(p)),
                     std::bit_cast<float>(get_le<std::uint32_t>(p + 4))};
      } else {
        coeffs[k] = {std::bit_cast<double>(get_le<std::uint64_t>(p)),
                     std::bit_cast<double>(get_le<std::uint64_t>(p + 8))};
      }
      if (!is_finite(coeffs[k])) {
        throw FormatError(path_ + ": non-finite coefficient in record " +
                          std::to_string(consumed_));
      }
    }
    out.emplace_back(coeffs);
    ++consumed_;
    ++got;
  }
  return got;
}

BatchWriter::BatchWriter(const std::string& path, std::uint32_t degree, Precision precision)
    : out_(open_output(path)), path_(path) {
  if (degree < 1) throw ConfigError("batch degree must be >= 1");
  header_.degree = degree;
  header_.precision = precision;
  write_bytes(out_, encode_batch_header(header_), path_);
}

BatchWriter::~BatchWriter() {
  try {
    close();
  } catch (...) {
  }
}

void BatchWriter::write(const Polynomial<double>& p) {
  if (p.degree() != header_.degree) {
    throw MixedDegreeBatch("polynomial of degree " + std::to_string(p.degree()) +
                           " written to a degree-" + std::to_string(header_.degree) + " batch");
  }
  std::string buf;
  for (const auto& c : p.coeffs()) {
    if (header_.precision == Precision::kFp32) {
      put_f32(buf, static_cast<float>(c.real()));
      put_f32(buf, static_cast<float>(c.imag()));
    } else {
      put_f64(buf, c.real());
      put_f64(buf, c.imag());
    }
  }
  write_bytes(out_, buf, path_);
  ++count_;
}

void BatchWriter::close() {
  if (closed_) return;
  closed_ = true;
  header_.count = count_;
  out_.seekp(0);
  write_bytes(out_, encode_batch_header(header_), path_);
  out_.close();
  if (!out_) throw IoError("failed to finalize " + path_);
}

std::vector<Polynomial<double>> read_batch(const std::string& path, BatchHeader* header) {
  BatchReader reader(path);
  if (header) *header = reader.header();
  std::vector<Polynomial<double>> out;
  reader.read(static_cast<std::size_t>(reader.header().count), out);
  return out;
}

void write_batch(const std::string& path, std::span<const Polynomial<double>> polys,
                 Precision precision) {
  if (polys.empty()) throw ConfigError("cannot infer degree of an empty batch");
  BatchWriter w(path, static_cast<std::uint32_t>(polys.front().degree()), precision);
  for (const auto& p : polys) w.write(p);
  w.close();
}

RootsReader::RootsReader(const std::string& path) : in_(open_input(path)), path_(path) {
  std::array<unsigned char, kRootsHeaderBytes> h{};
  read_exact(in_, h.data(), h.size(), path_, "roots header");
  if (std::memcmp(h.data(), kRootsMagic.data(), 4) != 0) {
    throw FormatError(path_ + ": bad magic, expected CRTS");
  }
  const auto version = get_le<std::uint32_t>(h.data() + 4);
  if (version != kFormatVersion) {
    throw FormatError(path_ + ": unsupported roots version " + std::to_string(version));
  }
  header_.degree = get_le<std::uint32_t>(h.data() + 8);
  header_.count = get_le<std::uint64_t>(h.data() + 12);
}

std::size_t RootsReader::read(std::size_t max_count, std::vector<std::complex<double>>& out) {
  const std::size_t n = header_.degree;
  std::vector<unsigned char> buf(16 * n);
  std::size_t got = 0;
  while (got < max_count && consumed_ < header_.count) {
    read_exact(in_, buf.data(), buf.size(), path_, "root record");
    for (std::size_t k = 0; k < n; ++k) {
      const unsigned char* p = buf.data() + 16 * k;
      out.emplace_back(std::bit_cast<double>(get_le<std::uint64_t>(p)),
                       std::bit_cast<double>(get_le<std::uint64_t>(p + 8)));
    }
    ++consumed_;
    ++got;
  }
  return got;
}

RootsWriter::RootsWriter(const std::string& path, std::uint32_t degree)
    : out_(open_output(path)), path_(path), degree_(degree) {
  write_bytes(out_, encode_roots_header(degree_, 0), path_);
}

RootsWriter::~RootsWriter() {
  try {
    close();
  } catch (...) {
  }
}

void RootsWriter::write(std::span<const std::complex<double>> roots) {
  if (degree_ == 0 || roots.size() % degree_ != 0) {
    throw DimensionMismatch("root block is not a multiple of the degree");
  }
  std::string buf;
  buf.reserve(roots.size() * 16);
  for (const auto& z : roots) {
    put_f64(buf, z.real());
    put_f64(buf, z.imag());
  }
  write_bytes(out_, buf, path_);
  count_ += roots.size() / degree_;
}

void RootsWriter::close() {
  if (closed_) return;
  closed_ = true;
  out_.seekp(0);
  write_bytes(out_, encode_roots_header(degree_, count_), path_);
  out_.close();
  if (!out_) throw IoError("failed to finalize " + path_);
}

std::string format_complex(std::complex<double> z) {
  std::array<char, 64> buf{};
  std::string s;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), z.real());
  s.append(buf.data(), res.ptr);
  s.push_back(std::signbit(z.imag()) ? '-' : '+');
  res = std::to_chars(buf.data(), buf.data() + buf.size(), std::abs(z.imag()));
  s.append(buf.data(), res.ptr);
  s.push_back('i');
  return s;
}

namespace {

std::optional<double> parse_double(std::string_view t) {
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  double v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_imag_part(std::string_view t) {
  // t excludes the trailing 'i'.
  if (t.empty() || t == "+") return 1.0;
  if (t == "-") return -1.0;
  return parse_double(t);
}

}  // namespace

std::optional<std::complex<double>> parse_complex(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  if (text.back() != 'i') {
    const auto re = parse_double(text);
    if (!re) return std::nullopt;
    return std::complex<double>(*re, 0.0);
  }
  text.remove_suffix(1);
  // Split at the last sign that is not at position 0 and not part of an exponent.
  std::size_t split = std::string_view::npos;
  for (std::size_t k = text.size(); k-- > 1;) {
    if ((text[k] == '+' || text[k] == '-') && text[k - 1] != 'e' && text[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string_view::npos) {
    const auto im = parse_imag_part(text);
    if (!im) return std::nullopt;
    return std::complex<double>(0.0, *im);
  }
  const auto re = parse_double(text.substr(0, split));
  const auto im = parse_imag_part(text.substr(split));
  if (!re || !im) return std::nullopt;
  return std::complex<double>(*re, *im);
}

std::string format_root_line(std::span<const std::complex<double>> roots) {
  std::string line;
  for (std::size_t k = 0; k < roots.size(); ++k) {
    if (k) line.push_back('\t');
    line += format_complex(roots[k]);
  }
  return line;
}

std::vector<Polynomial<double>> read_text_batch(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::vector<Polynomial<double>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::vector<std::complex<double>> coeffs;
    std::string tok;
    while (tokens >> tok) {
      const auto z = parse_complex(tok);
      if (!z || !is_finite(*z)) {
        throw FormatError(path + ":" + std::to_string(lineno) + ": bad coefficient '" + tok + "'");
      }
      coeffs.push_back(*z);
    }
    if (coeffs.empty()) continue;
    if (!out.empty() && coeffs.size() != out.front().degree()) {
      throw MixedDegreeBatch(path + ":" + std::to_string(lineno) + ": degree " +
                             std::to_string(coeffs.size()) + " differs from degree " +
                             std::to_string(out.front().degree()));
    }
    out.emplace_back(std::move(coeffs));
  }
  return out;
}

}  // namespace rootdensity::io
