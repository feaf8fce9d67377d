#include "frdim/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "frdim/error.hpp"

namespace frdim {

ReductionSpec::ReductionSpec(std::size_t m_groups, std::size_t source_dim)
    : m_groups_(m_groups), source_dim_(source_dim) {
  if (m_groups_ < 1 || m_groups_ > source_dim_) {
    throw InvalidArgument("reduction needs 1 <= M <= K (got M=" + std::to_string(m_groups_) +
                          ", K=" + std::to_string(source_dim_) + ")");
  }
}

void project_row(std::span<const double> in, std::span<double> out) {
  const std::size_t m = out.size();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t base = 0; base < in.size(); base += m) {
    const std::size_t len = std::min(m, in.size() - base);
    for (std::size_t j = 0; j < len; ++j) out[j] += in[base + j];
  }
}

ProbVector modulo_project(const ProbVector& p, const ReductionSpec& spec) {
  if (p.size() != spec.source_dim()) {
    throw InvalidArgument("vector length " + std::to_string(p.size()) +
                          " does not match reduction source dimension " +
                          std::to_string(spec.source_dim()));
  }
  std::vector<double> q(spec.m_groups());
  project_row(p.values(), q);
  // Grouping only reorders the additions: the output sum can differ from the
  // input sum by rounding alone.
  double in_sum = 0.0;
  for (double v : p.values()) in_sum += v;
  return ProbVector(std::move(q), std::abs(in_sum - 1.0) + 1e-12);
}

StateSequence project_sequence(const StateSequence& seq, const ReductionSpec& spec) {
  if (!seq.empty() && seq.dim() != spec.source_dim()) {
    throw InvalidArgument("sequence dimension " + std::to_string(seq.dim()) +
                          " does not match reduction source dimension " +
                          std::to_string(spec.source_dim()));
  }
  if (spec.is_identity()) return seq;
  std::vector<double> flat(seq.size() * spec.m_groups());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    project_row(seq.row(i), std::span<double>(flat.data() + i * spec.m_groups(), spec.m_groups()));
  }
  return StateSequence(spec.m_groups(), std::move(flat));
}

}  // namespace frdim
