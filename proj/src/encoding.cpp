#include "gritnet/encoding.hpp"

#include <algorithm>

#include "gritnet/error.hpp"

namespace gritnet {

std::vector<std::int32_t> discretize_deltas(std::span<const Event> events, int max_delta) {
  if (max_delta < 0) throw Error("max_delta must be non-negative");
  std::vector<std::int32_t> out(events.size(), 0);
  for (std::size_t t = 1; t < events.size(); ++t) {
    const std::int64_t gap = std::int64_t{events[t].day} - events[t - 1].day;
    if (gap < 0) throw Error("events are not sorted by day");
    out[t] = static_cast<std::int32_t>(std::min<std::int64_t>(gap, max_delta));
  }
  return out;
}

EncodedSequence encode_sequence(const StudentRecord& record, const Vocabulary& vocab, int max_delta,
                                OovPolicy oov) {
  const auto deltas = discretize_deltas(record.events, max_delta);
  const auto vocab_size = static_cast<std::int32_t>(vocab.size());
  EncodedSequence seq;
  seq.tokens.reserve(record.events.size());
  for (std::size_t t = 0; t < record.events.size(); ++t) {
    std::int32_t a = record.events[t].action_id;
    if (a < 0 || a >= vocab_size) {
      if (oov == OovPolicy::kError) {
        throw Error("student " + record.student_id + ": action id " + std::to_string(a) +
                    " is outside the vocabulary of size " + std::to_string(vocab_size));
      }
      a = vocab_size;
    }
    seq.tokens.push_back({a, deltas[t]});
  }
  seq.valid_length = seq.tokens.size();
  return seq;
}

std::vector<EncodedSequence> pre_pad_batch(std::span<const EncodedSequence> sequences, std::size_t target_length) {
  std::vector<EncodedSequence> out;
  out.reserve(sequences.size());
  for (const auto& s : sequences) {
    if (s.valid_length > target_length) {
      throw Error("pre_pad_batch: sequence with " + std::to_string(s.valid_length) +
                  " valid tokens exceeds target length " + std::to_string(target_length));
    }
    EncodedSequence p;
    p.valid_length = s.valid_length;
    p.tokens.assign(target_length - s.valid_length, TokenPair::pad());
    const auto valid = s.valid_tokens();
    p.tokens.insert(p.tokens.end(), valid.begin(), valid.end());
    out.push_back(std::move(p));
  }
  return out;
}

StudentRecord truncate_to_week(const StudentRecord& record, int week) {
  if (week < 1) throw Error("week must be positive");
  const std::int64_t end = std::int64_t{record.enrollment_day} + 7 * std::int64_t{week};
  StudentRecord out = record;
  std::erase_if(out.events, [&](const Event& e) { return e.day >= end; });
  return out;
}

StudentRecord remap_actions(const StudentRecord& record, const Vocabulary& from, const Vocabulary& to,
                            OovPolicy oov) {
  StudentRecord out = record;
  for (auto& e : out.events) {
    const auto& name = from.name(e.action_id);
    if (auto idx = to.find(name)) {
      e.action_id = *idx;
    } else if (oov == OovPolicy::kUnknown) {
      e.action_id = static_cast<std::int32_t>(to.size());
    } else {
      throw Error("student " + record.student_id + ": action '" + name + "' is not in the vocabulary");
    }
  }
  return out;
}

BowVector bow_featurize(const StudentRecord& record, const Vocabulary& vocab) {
  const auto n = static_cast<Eigen::Index>(vocab.size());
  BowVector counts = BowVector::Zero(n);
  for (const auto& e : record.events) {
    if (e.action_id < 0 || e.action_id >= n) {
      throw Error("student " + record.student_id + ": action id " + std::to_string(e.action_id) +
                  " is outside the vocabulary of size " + std::to_string(n));
    }
    ++counts[e.action_id];
  }
  return counts;
}

Eigen::MatrixXd bow_matrix(std::span<const StudentRecord> records, const Vocabulary& vocab) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(vocab.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = bow_featurize(records[i], vocab).cast<double>().transpose();
  }
  return x;
}

Eigen::VectorXd two_hot(const TokenPair& token, std::size_t action_count, std::size_t delta_count) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(action_count + delta_count));
  if (token.is_pad()) return v;
  if (static_cast<std::size_t>(token.action_index) >= action_count ||
      static_cast<std::size_t>(token.delta_index) >= delta_count) {
    throw Error("token index out of range");
  }
  v[token.action_index] = 1.0;
  v[static_cast<Eigen::Index>(action_count) + token.delta_index] = 1.0;
  return v;
}

}  // namespace gritnet
