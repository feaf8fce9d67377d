#pragma once

// Modulo grouping of vocabulary indices: word w (0-based) is merged into
// group w mod M, projecting the K-simplex onto the M-simplex.

#include <cstddef>
#include <span>

#include "frdim/prob.hpp"

namespace frdim {

class ReductionSpec {
 public:
  /// Throws InvalidArgument unless 1 <= m_groups <= source_dim.
  ReductionSpec(std::size_t m_groups, std::size_t source_dim);

  std::size_t m_groups() const noexcept { return m_groups_; }
  std::size_t source_dim() const noexcept { return source_dim_; }
  bool is_identity() const noexcept { return m_groups_ == source_dim_; }

 private:
  std::size_t m_groups_;
  std::size_t source_dim_;
};

ProbVector modulo_project(const ProbVector& p, const ReductionSpec& spec);

StateSequence project_sequence(const StateSequence& seq, const ReductionSpec& spec);

/// Row kernel: out[m] = sum of in[w] over w with w mod M == m. in must
/// have source_dim entries and out m_groups entries.
void project_row(std::span<const double> in, std::span<double> out);

}  // namespace frdim
