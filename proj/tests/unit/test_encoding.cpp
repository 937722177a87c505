#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "gritnet/encoding.hpp"
#include "gritnet/error.hpp"
#include "gritnet/random.hpp"

using namespace gritnet;

namespace {

StudentRecord record_with_days(std::vector<int> days, int enrollment = 0) {
  StudentRecord r;
  r.enrollment_day = enrollment;
  for (std::size_t i = 0; i < days.size(); ++i) r.events.push_back({static_cast<std::int32_t>(i % 3), days[i]});
  return r;
}

StudentRecord random_record(Rng& rng, int vocab_size, int max_events) {
  StudentRecord r;
  r.enrollment_day = 1000;
  const int n = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_events) + 1));
  int day = 1000;
  for (int k = 0; k < n; ++k) {
    day += static_cast<int>(rng.below(5) == 0 ? rng.below(60) : rng.below(3));
    r.events.push_back({static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(vocab_size))), day});
  }
  return r;
}

Vocabulary vocab_of(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("a" + std::to_string(i));
  return Vocabulary(names);
}

}  // namespace

TEST_CASE("discretize_deltas") {
  CHECK(discretize_deltas(record_with_days({10, 10, 12}).events) == std::vector<std::int32_t>{0, 0, 2});
  CHECK(discretize_deltas(record_with_days({7}).events) == std::vector<std::int32_t>{0});
  CHECK(discretize_deltas(record_with_days({0, 100}).events, 30) == std::vector<std::int32_t>{0, 30});
  CHECK(discretize_deltas(record_with_days({}).events).empty());
  CHECK_THROWS_AS(discretize_deltas(record_with_days({5, 4}).events), Error);
}

TEST_CASE("discretize_deltas clamps against a min oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int d_max = 1 + static_cast<int>(rng.below(40));
    const auto r = random_record(rng, 4, 30);
    const auto deltas = discretize_deltas(r.events, d_max);
    REQUIRE(deltas.size() == r.events.size());
    for (std::size_t t = 0; t < deltas.size(); ++t) {
      const int raw = t == 0 ? 0 : r.events[t].day - r.events[t - 1].day;
      CHECK(deltas[t] == std::min(raw, d_max));
      CHECK(deltas[t] <= d_max);
    }
  }
}

TEST_CASE("encode_sequence") {
  const Vocabulary vocab({"v1", "q1"});
  StudentRecord r;
  r.events = {{0, 0}, {1, 0}};
  const auto seq = encode_sequence(r, vocab);
  CHECK(seq.tokens == std::vector<TokenPair>{{0, 0}, {1, 0}});
  CHECK(seq.valid_length == 2);

  const auto empty = encode_sequence(StudentRecord{}, vocab);
  CHECK(empty.tokens.empty());
  CHECK(empty.valid_length == 0);
}

TEST_CASE("encode_sequence: out-of-vocabulary handling") {
  const Vocabulary vocab({"v1", "q1"});
  StudentRecord r;
  r.events = {{0, 0}, {5, 1}};
  CHECK_THROWS_AS(encode_sequence(r, vocab), Error);
  const auto seq = encode_sequence(r, vocab, kDefaultMaxDelta, OovPolicy::kUnknown);
  CHECK(seq.tokens[1].action_index == 2);

  const Vocabulary wide({"v1", "q1", "p9"});
  StudentRecord named;
  named.events = {{2, 0}};
  try {
    remap_actions(named, wide, vocab);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("p9") != std::string::npos);
  }
  CHECK(remap_actions(named, wide, vocab, OovPolicy::kUnknown).events[0].action_id == 2);
}

TEST_CASE("two-hot vector has ones at a and L + delta") {
  const std::size_t actions = 6, deltas = 31;
  for (std::int32_t a = 0; a < 6; ++a) {
    for (std::int32_t d = 0; d < 31; d += 5) {
      const Eigen::VectorXd v = two_hot({a, d}, actions, deltas);
      REQUIRE(v.size() == 37);
      CHECK(v.sum() == 2.0);
      CHECK(v[a] == 1.0);
      CHECK(v[6 + d] == 1.0);
    }
  }
}

TEST_CASE("pre_pad_batch") {
  const Vocabulary vocab = vocab_of(3);
  const auto a = encode_sequence(record_with_days({1, 2}), vocab);
  const auto b = encode_sequence(record_with_days({1, 2, 3, 4, 5}), vocab);
  const std::vector<EncodedSequence> batch{a, b};
  const auto padded = pre_pad_batch(batch, 5);
  CHECK(padded[0].total_length() == 5);
  CHECK(padded[0].valid_length == 2);
  for (int t = 0; t < 3; ++t) CHECK(padded[0].tokens[t].is_pad());
  CHECK(padded[1] == b);
  CHECK_THROWS_AS(pre_pad_batch(batch, 4), Error);
}

TEST_CASE("pre_pad_batch preserves the suffix") {
  Rng rng(11);
  const Vocabulary vocab = vocab_of(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<EncodedSequence> batch;
    std::size_t longest = 0;
    for (int k = 0; k < 4; ++k) {
      batch.push_back(encode_sequence(random_record(rng, 5, 20), vocab));
      longest = std::max(longest, batch.back().valid_length);
    }
    const auto padded = pre_pad_batch(batch, longest + rng.below(5));
    for (std::size_t k = 0; k < batch.size(); ++k) {
      const auto tail = padded[k].valid_tokens();
      CHECK(std::equal(tail.begin(), tail.end(), batch[k].tokens.begin(), batch[k].tokens.end()));
      for (std::size_t t = 0; t < padded[k].pad_length(); ++t) CHECK(padded[k].tokens[t] == TokenPair::pad());
    }
  }
}

TEST_CASE("truncate_to_week") {
  auto r = record_with_days({101, 106, 108}, 100);
  r.label = 1;
  const auto w1 = truncate_to_week(r, 1);
  REQUIRE(w1.events.size() == 2);
  CHECK(w1.events[1].day == 106);
  CHECK(w1.label == 1);
  CHECK(truncate_to_week(r, 50) == r);
}

TEST_CASE("truncate_to_week matches a brute-force filter and is monotone") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = random_record(rng, 4, 40);
    for (int week = 1; week <= 8; ++week) {
      std::vector<Event> expected;
      for (const auto& e : r.events) {
        const int rel = e.day - r.enrollment_day;
        if (rel >= 0 && rel < 7 * week) expected.push_back(e);
      }
      const auto got = truncate_to_week(r, week).events;
      CHECK(got == expected);
      const auto next = truncate_to_week(r, week + 1).events;
      REQUIRE(next.size() >= got.size());
      CHECK(std::equal(got.begin(), got.end(), next.begin()));
    }
  }
}

TEST_CASE("bow_featurize") {
  const Vocabulary vocab({"v1", "q1", "z"});
  StudentRecord r;
  r.events = {{0, 0}, {0, 1}, {1, 2}};
  CHECK(bow_featurize(r, vocab) == Eigen::Vector3i(2, 1, 0));
  CHECK(bow_featurize(StudentRecord{}, vocab) == Eigen::Vector3i::Zero());
  r.events.push_back({7, 3});
  CHECK_THROWS_AS(bow_featurize(r, vocab), Error);
}

TEST_CASE("BoW ignores order while the token sequence does not") {
  Rng rng(8);
  const Vocabulary vocab = vocab_of(6);
  for (int trial = 0; trial < 100; ++trial) {
    auto r = random_record(rng, 6, 15);
    auto permuted = r;
    shuffle(permuted.events, rng);
    std::sort(permuted.events.begin(), permuted.events.end(),
              [](const Event& a, const Event& b) { return a.day < b.day; });
    CHECK(bow_featurize(permuted, vocab) == bow_featurize(r, vocab));

    const Eigen::VectorXi counts = bow_featurize(r, vocab);
    CHECK(counts.sum() == static_cast<int>(r.events.size()));
  }

  // Swapping two distinct same-day actions changes the encoding.
  StudentRecord r;
  r.events = {{0, 5}, {1, 5}};
  StudentRecord swapped;
  swapped.events = {{1, 5}, {0, 5}};
  CHECK(bow_featurize(r, vocab) == bow_featurize(swapped, vocab));
  CHECK(encode_sequence(r, vocab) != encode_sequence(swapped, vocab));
}

TEST_CASE("bow_matrix stacks rows") {
  Rng rng(2);
  const Vocabulary vocab = vocab_of(4);
  std::vector<StudentRecord> rs;
  for (int i = 0; i < 5; ++i) rs.push_back(random_record(rng, 4, 10));
  const Eigen::MatrixXd x = bow_matrix(rs, vocab);
  REQUIRE(x.rows() == 5);
  REQUIRE(x.cols() == 4);
  for (int i = 0; i < 5; ++i) CHECK(x.row(i).transpose() == bow_featurize(rs[i], vocab).cast<double>());
}
