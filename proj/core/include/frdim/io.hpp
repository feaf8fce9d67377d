#pragma once

// File formats: PSEQ binary probability sequences, a JSONL alternative for
// hand-written fixtures, curve TSV and estimate JSON.
//
// PSEQ layout (little-endian): 32-byte header
//   0  magic "PSEQ"
//   4  u32 version (1)
//   8  u64 n_steps
//   16 u32 dim
//   20 u8 dtype (0 = f32, 1 = f64)
//   21 15 reserved zero bytes
// followed by n_steps * dim values, row-major.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "frdim/corrdim.hpp"
#include "frdim/prob.hpp"

namespace frdim::io {

enum class Dtype : std::uint8_t { kF32 = 0, kF64 = 1 };

struct PseqHeader {
  std::uint32_t version = 1;
  std::uint64_t n_steps = 0;
  std::uint32_t dim = 0;
  Dtype dtype = Dtype::kF64;
};

inline constexpr std::size_t kPseqHeaderBytes = 32;

/// Row tolerance matching the storage width.
double tolerance_for(Dtype dtype) noexcept;

/// Throws InvalidArgument on an invalid sequence, DataError if the file
/// cannot be written.
void write_pseq(const StateSequence& seq, const std::filesystem::path& path,
                Dtype dtype = Dtype::kF64);

/// Parses and checks a header; throws DataError on bad magic, version,
/// dtype, reserved bytes or size mismatch with `file_size`.
PseqHeader parse_pseq_header(const unsigned char* bytes, std::uint64_t file_size);

struct ReadOptions {
  /// Row validation tolerance; nullopt picks tolerance_for(dtype).
  std::optional<double> tolerance;
  /// Skip row validation (the `validate` command reports violations itself).
  bool validate_rows = true;
};

/// Reads a PSEQ file. Throws DataError listing the first offending rows when
/// validation fails.
StateSequence read_pseq(const std::filesystem::path& path, const ReadOptions& options = {});
PseqHeader read_pseq_header(const std::filesystem::path& path);

/// One JSON array of numbers per line; blank lines are skipped.
StateSequence read_jsonl(const std::filesystem::path& path, const ReadOptions& options = {});

/// Dispatches on extension: ".jsonl" reads JSONL, anything else PSEQ.
StateSequence read_sequence(const std::filesystem::path& path, const ReadOptions& options = {});

/// `epsilon<TAB>C` per line, 17 significant digits.
void write_curve_tsv(const CorrelationCurve& curve, std::ostream& out);

struct EstimateRecord {
  DimensionEstimate estimate;
  std::uint64_t n_points = 0;
  std::uint64_t n_pairs = 0;
  Metric metric = Metric::kFisherRao;
  std::optional<double> eta;
  std::optional<std::size_t> m_groups;
  std::optional<std::uint64_t> seed;
};

/// Single JSON object with keys nu_hat, intercept, r_squared, fit_lo,
/// fit_hi, n_points, n_pairs, metric, eta, m_groups, seed (absent values
/// are null).
std::string estimate_json(const EstimateRecord& rec);

}  // namespace frdim::io
