#include "frdim/prob.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "frdim/error.hpp"

namespace frdim {

namespace {

// Returns the first violation of each kind found in p, appending to out.
void check_row(std::span<const double> p, std::size_t row, double tolerance,
               std::vector<Violation>& out) {
  double sum = 0.0;
  bool reported_negative = false;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double v = p[j];
    if (!std::isfinite(v)) {
      out.push_back({row, Violation::Kind::kNonFinite, v, j});
      return;
    }
    if (v < 0.0 && !reported_negative) {
      out.push_back({row, Violation::Kind::kNegativeEntry, v, j});
      reported_negative = true;
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    out.push_back({row, Violation::Kind::kSumMismatch, sum, 0});
  }
}

}  // namespace

ProbVector::ProbVector(std::vector<double> values, double tolerance)
    : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("probability vector is empty");
  std::vector<Violation> v;
  check_row(values_, 0, tolerance, v);
  if (!v.empty()) throw InvalidArgument("invalid probability vector: " + v.front().message());
}

ProbVector::ProbVector(std::initializer_list<double> values)
    : ProbVector(std::vector<double>(values)) {}

StateSequence::StateSequence(std::size_t dim, std::vector<double> flat)
    : dim_(dim), data_(std::move(flat)) {
  if (dim_ == 0 && !data_.empty()) throw InvalidArgument("sequence dimension is zero");
  if (dim_ != 0 && data_.size() % dim_ != 0) {
    throw InvalidArgument("flat buffer size is not a multiple of the dimension");
  }
}

StateSequence StateSequence::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  StateSequence seq(rows.front().size());
  seq.reserve(rows.size());
  for (const auto& r : rows) seq.push_back(r);
  return seq;
}

void StateSequence::push_back(std::span<const double> row) {
  if (row.size() != dim_) {
    std::ostringstream os;
    os << "row has length " << row.size() << ", sequence dimension is " << dim_;
    throw InvalidArgument(os.str());
  }
  data_.insert(data_.end(), row.begin(), row.end());
}

ProbVector StateSequence::at(std::size_t i, double tolerance) const {
  const auto r = row(i);
  return ProbVector(std::vector<double>(r.begin(), r.end()), tolerance);
}

std::string Violation::message() const {
  std::ostringstream os;
  os.precision(17);
  os << "row " << row << ": ";
  switch (kind) {
    case Kind::kNonFinite:
      os << "non-finite entry " << value << " at column " << column;
      break;
    case Kind::kNegativeEntry:
      os << "negative entry " << value << " at column " << column;
      break;
    case Kind::kSumMismatch:
      os << "sums to " << value;
      break;
  }
  return os.str();
}

std::vector<Violation> validate(const StateSequence& seq, double tolerance) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < seq.size(); ++i) check_row(seq.row(i), i, tolerance, out);
  return out;
}

bool is_distribution(std::span<const double> p, double tolerance) {
  std::vector<Violation> v;
  check_row(p, 0, tolerance, v);
  return v.empty() && !p.empty();
}

StateSequence renormalize(const StateSequence& seq) {
  StateSequence out(seq.dim());
  out.reserve(seq.size());
  std::vector<double> buf(seq.dim());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const auto r = seq.row(i);
    double sum = 0.0;
    for (double v : r) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw DataError("cannot renormalize row " + std::to_string(i) +
                        ": negative or non-finite entry");
      }
      sum += v;
    }
    if (!(sum > 0.0)) {
      throw DataError("cannot renormalize row " + std::to_string(i) + ": zero mass");
    }
    std::transform(r.begin(), r.end(), buf.begin(), [sum](double v) { return v / sum; });
    out.push_back(buf);
  }
  return out;
}

double entropy_bits(std::span<const double> p) noexcept {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

double shannon_entropy(const ProbVector& p) { return entropy_bits(p.values()); }

void FilterSpec::check() const {
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("eta must lie in (0, 1]");
  if (entropy_min && !(*entropy_min >= 0.0)) throw InvalidArgument("entropy_min must be >= 0");
  if (entropy_max && !(*entropy_max >= 0.0)) throw InvalidArgument("entropy_max must be >= 0");
  if (entropy_min && entropy_max && *entropy_min > *entropy_max) {
    throw InvalidArgument("entropy_min exceeds entropy_max");
  }
}

bool passes_filter(std::span<const double> p, const FilterSpec& spec) {
  if (p.empty()) return false;
  const auto top = std::max_element(p.begin(), p.end());
  const double max_p = *top;
  if (spec.argmax_word) {
    // Local-fractal selection: the named word dominates with mass above eta.
    // max_element returns the first maximum, so ties go to the lower index.
    const auto arg = static_cast<std::size_t>(top - p.begin());
    if (arg != *spec.argmax_word || !(max_p > spec.eta)) return false;
  } else if (!(max_p < spec.eta)) {
    return false;
  }
  if (spec.entropy_min || spec.entropy_max) {
    const double h = entropy_bits(p);
    if (spec.entropy_min && h < *spec.entropy_min) return false;
    if (spec.entropy_max && h > *spec.entropy_max) return false;
  }
  return true;
}

FilterResult apply_filter(const StateSequence& seq, const FilterSpec& spec) {
  spec.check();
  FilterResult out{StateSequence(seq.dim()), {}};
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const auto r = seq.row(i);
    if (passes_filter(r, spec)) {
      out.rows.push_back(r);
      out.retained.push_back(i);
    }
  }
  return out;
}

}  // namespace frdim
