#include "frdim/io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "frdim/error.hpp"

namespace frdim::io {

namespace {

constexpr std::array<char, 4> kMagic{'P', 'S', 'E', 'Q'};

template <typename U>
void put_le(unsigned char* dst, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) dst[i] = static_cast<unsigned char>(v >> (8 * i));
}

template <typename U>
U get_le(const unsigned char* src) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(src[i]) << (8 * i);
  return v;
}

std::size_t width(Dtype d) { return d == Dtype::kF32 ? 4 : 8; }

std::string describe(const std::vector<Violation>& v) {
  std::string msg = std::to_string(v.size()) + " invalid row(s):";
  for (std::size_t i = 0; i < v.size() && i < 10; ++i) msg += "\n  " + v[i].message();
  if (v.size() > 10) msg += "\n  ...";
  return msg;
}

void check_rows(const StateSequence& seq, double tol) {
  if (const auto v = validate(seq, tol); !v.empty()) throw DataError(describe(v));
}

}  // namespace

double tolerance_for(Dtype dtype) noexcept {
  return dtype == Dtype::kF32 ? kSumToleranceF32 : kSumToleranceF64;
}

void write_pseq(const StateSequence& seq, const std::filesystem::path& path, Dtype dtype) {
  if (seq.dim() == 0 || seq.dim() > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgument("sequence dimension must fit in 1..2^32-1");
  }
  if (const auto v = validate(seq, tolerance_for(dtype)); !v.empty()) {
    throw InvalidArgument(describe(v));
  }
  std::array<unsigned char, kPseqHeaderBytes> header{};
  std::memcpy(header.data(), kMagic.data(), 4);
  put_le<std::uint32_t>(header.data() + 4, 1);
  put_le<std::uint64_t>(header.data() + 8, seq.size());
  put_le<std::uint32_t>(header.data() + 16, static_cast<std::uint32_t>(seq.dim()));
  header[20] = static_cast<unsigned char>(dtype);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(header.data()), header.size());

  const auto flat = seq.flat();
  const std::size_t w = width(dtype);
  std::vector<unsigned char> buf(std::min<std::size_t>(flat.size(), 1 << 16) * w);
  for (std::size_t start = 0; start < flat.size();) {
    const std::size_t count = std::min(flat.size() - start, buf.size() / w);
    for (std::size_t i = 0; i < count; ++i) {
      if (dtype == Dtype::kF32) {
        put_le(buf.data() + i * 4, std::bit_cast<std::uint32_t>(static_cast<float>(flat[start + i])));
      } else {
        put_le(buf.data() + i * 8, std::bit_cast<std::uint64_t>(flat[start + i]));
      }
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(count * w));
    start += count;
  }
  if (!out) throw DataError("write to " + path.string() + " failed");
}

PseqHeader parse_pseq_header(const unsigned char* bytes, std::uint64_t file_size) {
  if (file_size < kPseqHeaderBytes) throw DataError("file shorter than the 32-byte PSEQ header");
  if (std::memcmp(bytes, kMagic.data(), 4) != 0) throw DataError("bad magic: not a PSEQ file");
  PseqHeader h;
  h.version = get_le<std::uint32_t>(bytes + 4);
  if (h.version != 1) throw DataError("unsupported PSEQ version " + std::to_string(h.version));
  h.n_steps = get_le<std::uint64_t>(bytes + 8);
  h.dim = get_le<std::uint32_t>(bytes + 16);
  if (bytes[20] > 1) throw DataError("unknown dtype code " + std::to_string(bytes[20]));
  h.dtype = static_cast<Dtype>(bytes[20]);
  for (std::size_t i = 21; i < kPseqHeaderBytes; ++i) {
    if (bytes[i] != 0) throw DataError("reserved header bytes must be zero");
  }
  if (h.dim == 0) throw DataError("dim must be positive");
  const std::uint64_t payload = file_size - kPseqHeaderBytes;
  const std::uint64_t row_bytes = std::uint64_t{h.dim} * width(h.dtype);
  // Compare without multiplying n_steps, which a corrupt header could make
  // overflow.
  if (payload % row_bytes != 0 || payload / row_bytes != h.n_steps) {
    throw DataError("payload length " + std::to_string(payload) + " does not match header (" +
                    std::to_string(h.n_steps) + " x " + std::to_string(h.dim) + ")");
  }
  return h;
}

PseqHeader read_pseq_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::array<unsigned char, kPseqHeaderBytes> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  const auto size = std::filesystem::file_size(path);
  return parse_pseq_header(bytes.data(), size);
}

StateSequence read_pseq(const std::filesystem::path& path, const ReadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const auto size = std::filesystem::file_size(path);
  std::array<unsigned char, kPseqHeaderBytes> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(std::min<std::uint64_t>(size, bytes.size())));
  const PseqHeader h = parse_pseq_header(bytes.data(), size);

  const std::size_t w = width(h.dtype);
  const std::uint64_t n_values = h.n_steps * h.dim;  // bounded by the file size
  std::vector<double> flat(n_values);
  std::vector<unsigned char> buf(std::min<std::uint64_t>(n_values, 1 << 16) * w);
  for (std::uint64_t start = 0; start < n_values;) {
    const std::size_t count = std::min<std::uint64_t>(n_values - start, buf.size() / w);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count * w));
    if (!in) throw DataError("truncated payload in " + path.string());
    for (std::size_t i = 0; i < count; ++i) {
      flat[start + i] = h.dtype == Dtype::kF32
                            ? std::bit_cast<float>(get_le<std::uint32_t>(buf.data() + i * 4))
                            : std::bit_cast<double>(get_le<std::uint64_t>(buf.data() + i * 8));
    }
    start += count;
  }
  StateSequence seq(h.dim, std::move(flat));
  if (options.validate_rows) check_rows(seq, options.tolerance.value_or(tolerance_for(h.dtype)));
  return seq;
}

StateSequence read_jsonl(const std::filesystem::path& path, const ReadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::optional<StateSequence> seq;
  std::string line;
  std::size_t lineno = 0;
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      row = nlohmann::json::parse(line).get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (row.empty()) throw DataError(path.string() + ":" + std::to_string(lineno) + ": empty row");
    if (!seq) seq.emplace(row.size());
    if (row.size() != seq->dim()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": row length " +
                      std::to_string(row.size()) + ", expected " + std::to_string(seq->dim()));
    }
    seq->push_back(row);
  }
  if (!seq) throw DataError(path.string() + " contains no rows");
  if (options.validate_rows) check_rows(*seq, options.tolerance.value_or(kSumToleranceF64));
  return std::move(*seq);
}

StateSequence read_sequence(const std::filesystem::path& path, const ReadOptions& options) {
  if (path.extension() == ".jsonl") return read_jsonl(path, options);
  return read_pseq(path, options);
}

void write_curve_tsv(const CorrelationCurve& curve, std::ostream& out) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << curve.epsilons[i] << '\t' << curve.c_values[i] << '\n';
  }
  out.precision(old);
}

std::string estimate_json(const EstimateRecord& rec) {
  nlohmann::ordered_json j;
  j["nu_hat"] = rec.estimate.nu_hat;
  j["intercept"] = rec.estimate.intercept;
  j["r_squared"] = rec.estimate.r_squared;
  j["fit_lo"] = rec.estimate.fit_lo;
  j["fit_hi"] = rec.estimate.fit_hi;
  j["n_points"] = rec.n_points;
  j["n_pairs"] = rec.n_pairs;
  j["metric"] = std::string(to_string(rec.metric));
  j["eta"] = rec.eta ? nlohmann::ordered_json(*rec.eta) : nlohmann::ordered_json(nullptr);
  j["m_groups"] =
      rec.m_groups ? nlohmann::ordered_json(*rec.m_groups) : nlohmann::ordered_json(nullptr);
  j["seed"] = rec.seed ? nlohmann::ordered_json(*rec.seed) : nlohmann::ordered_json(nullptr);
  return j.dump(2);
}

}  // namespace frdim::io
