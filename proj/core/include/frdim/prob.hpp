#pragma once

// Probability vectors on the simplex, sequences of them, and the filters
// that isolate high-entropy (global) or single-word (local) regions.

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace frdim {

/// Row-sum tolerance for data stored as 32-bit floats (model exports).
inline constexpr double kSumToleranceF32 = 1e-4;
/// Row-sum tolerance for internally generated 64-bit data.
inline constexpr double kSumToleranceF64 = 1e-9;

/// A single point on the probability simplex. Construction validates:
/// every entry is finite and nonnegative and the entries sum to 1 within
/// the given tolerance. Immutable afterwards.
class ProbVector {
 public:
  explicit ProbVector(std::vector<double> values,
                      double tolerance = kSumToleranceF64);
  ProbVector(std::initializer_list<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  operator std::span<const double>() const noexcept { return values_; }

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  std::vector<double> values_;
};

/// Dense row-major N x K matrix whose rows are (meant to be) probability
/// vectors of a common dimension K. Rows are not validated on insertion;
/// use validate() to check them.
class StateSequence {
 public:
  StateSequence() = default;
  explicit StateSequence(std::size_t dim) : dim_(dim) {}
  /// Takes ownership of a flat row-major buffer; flat.size() must be a
  /// multiple of dim.
  StateSequence(std::size_t dim, std::vector<double> flat);

  static StateSequence from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<double> mutable_row(std::size_t i) {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<const double> flat() const noexcept { return data_; }

  void reserve(std::size_t rows) { data_.reserve(rows * dim_); }
  void push_back(std::span<const double> row);

  /// Row i as a validated ProbVector.
  ProbVector at(std::size_t i, double tolerance = kSumToleranceF64) const;

  friend bool operator==(const StateSequence&, const StateSequence&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

struct Violation {
  enum class Kind { kNonFinite, kNegativeEntry, kSumMismatch };

  std::size_t row = 0;
  Kind kind = Kind::kSumMismatch;
  /// Offending entry for kNegativeEntry/kNonFinite, row sum for kSumMismatch.
  double value = 0.0;
  /// Column of the offending entry; unused for kSumMismatch.
  std::size_t column = 0;

  std::string message() const;
};

/// Lists every row that is not a valid probability vector at the given
/// sum tolerance. At most one violation per (row, kind); an empty result
/// means the whole sequence is valid.
std::vector<Violation> validate(const StateSequence& seq, double tolerance);

/// Checks a single raw row; same rules as validate().
bool is_distribution(std::span<const double> p, double tolerance);

/// Divides every row by its sum. Rows with a non-positive sum or negative
/// entries throw DataError.
StateSequence renormalize(const StateSequence& seq);

/// Shannon entropy in bits, with 0 log 0 = 0.
double shannon_entropy(const ProbVector& p);
/// Unchecked variant for rows already known to be valid.
double entropy_bits(std::span<const double> p) noexcept;

/// Selection rule for the global (high-entropy) or local (argmax) region.
struct FilterSpec {
  /// Max-probability threshold. Global mode keeps rows with max < eta;
  /// argmax mode keeps rows with max > eta attained at argmax_word.
  double eta = 0.5;
  std::optional<double> entropy_min;  // bits, inclusive
  std::optional<double> entropy_max;  // bits, inclusive
  std::optional<std::size_t> argmax_word;

  /// Throws InvalidArgument when eta is outside (0, 1] or the entropy band
  /// is inverted or negative.
  void check() const;
};

struct FilterResult {
  StateSequence rows;
  /// Indices into the input sequence, strictly increasing.
  std::vector<std::size_t> retained;

  bool empty() const noexcept { return retained.empty(); }
};

/// Applies spec to every row, preserving order.
FilterResult apply_filter(const StateSequence& seq, const FilterSpec& spec);

/// Single-row predicate used by apply_filter and by streaming pipelines.
bool passes_filter(std::span<const double> p, const FilterSpec& spec);

}  // namespace frdim
