#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gritnet/event_model.hpp"

namespace gritnet {

inline constexpr int kDefaultMaxDelta = 30;

/// One timestep of the two-hot input: an action index and a clamped
/// day-gap bucket. The pad token sits outside both alphabets.
struct TokenPair {
  std::int32_t action_index = 0;
  std::int32_t delta_index = 0;

  static constexpr TokenPair pad() { return {-1, -1}; }
  constexpr bool is_pad() const { return action_index < 0; }

  friend bool operator==(const TokenPair&, const TokenPair&) = default;
};

/// Pad tokens, if any, occupy the first total_length() - valid_length slots.
struct EncodedSequence {
  std::vector<TokenPair> tokens;
  std::size_t valid_length = 0;

  std::size_t total_length() const noexcept { return tokens.size(); }
  std::size_t pad_length() const noexcept { return tokens.size() - valid_length; }
  std::span<const TokenPair> valid_tokens() const {
    return std::span<const TokenPair>(tokens).subspan(pad_length());
  }

  friend bool operator==(const EncodedSequence&, const EncodedSequence&) = default;
};

enum class OovPolicy {
  kError,    ///< training: the vocabulary must cover the data
  kUnknown,  ///< inference: map to the reserved index vocab.size()
};

/// delta[0] = 0; delta[t] = min(day[t] - day[t-1], max_delta).
std::vector<std::int32_t> discretize_deltas(std::span<const Event> events, int max_delta = kDefaultMaxDelta);

EncodedSequence encode_sequence(const StudentRecord& record, const Vocabulary& vocab,
                                int max_delta = kDefaultMaxDelta, OovPolicy oov = OovPolicy::kError);

/// Left-pads every sequence to `target_length`. Throws if any sequence is
/// already longer.
std::vector<EncodedSequence> pre_pad_batch(std::span<const EncodedSequence> sequences, std::size_t target_length);

/// Keeps events in the half-open window [enrollment, enrollment + 7 * week).
StudentRecord truncate_to_week(const StudentRecord& record, int week);

/// Re-indexes a record's actions from one vocabulary into another by name.
/// Unknown names raise (kError) or map to to.size() (kUnknown).
StudentRecord remap_actions(const StudentRecord& record, const Vocabulary& from, const Vocabulary& to,
                            OovPolicy oov = OovPolicy::kError);

using BowVector = Eigen::VectorXi;

BowVector bow_featurize(const StudentRecord& record, const Vocabulary& vocab);

/// Stacks BoW rows into an M x N real matrix for the baseline.
Eigen::MatrixXd bow_matrix(std::span<const StudentRecord> records, const Vocabulary& vocab);

/// The explicit concatenated one-hot [1(a); 1(delta)] of length
/// action_count + delta_count. Used for checks, never on the hot path.
Eigen::VectorXd two_hot(const TokenPair& token, std::size_t action_count, std::size_t delta_count);

}  // namespace gritnet
