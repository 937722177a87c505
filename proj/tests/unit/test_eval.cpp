#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "gritnet/encoding.hpp"
#include "gritnet/error.hpp"
#include "gritnet/eval.hpp"
#include "gritnet/random.hpp"

using namespace gritnet;

namespace {

// Wins plus half-ties over all positive x negative pairs, as an exact ratio.
double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  long long twice_wins = 0, pairs = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      ++pairs;
      twice_wins += s[i] > s[j] ? 2 : (s[i] == s[j] ? 1 : 0);
    }
  }
  return static_cast<double>(twice_wins) / (2.0 * static_cast<double>(pairs));
}

struct Instance {
  std::vector<double> scores;
  std::vector<int> labels;
};

Instance random_instance(Rng& rng, bool ties) {
  Instance in;
  const auto m = 2 + rng.below(199);
  for (std::uint64_t i = 0; i < m; ++i) {
    in.labels.push_back(rng.bernoulli(0.4) ? 1 : 0);
    in.scores.push_back(ties ? static_cast<double>(rng.below(8)) / 8.0 : rng.uniform());
  }
  in.labels[0] = 1;
  in.labels[1] = 0;
  return in;
}

std::vector<StudentRecord> cohort(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<StudentRecord> rs(n);
  for (std::size_t i = 0; i < n; ++i) {
    rs[i].student_id = "s" + std::to_string(i);
    rs[i].enrollment_day = 100;
    rs[i].label = i % 3 == 0 ? 1 : 0;
    for (int day = 100; day < 100 + 70; day += 1 + static_cast<int>(rng.below(6))) rs[i].events.push_back({0, day});
  }
  return rs;
}

}  // namespace

TEST_CASE("roc_auc: reference values") {
  const std::vector<int> y{1, 0, 1, 0};
  CHECK(roc_auc(std::vector<double>{0.9, 0.1, 0.8, 0.2}, y).auc == 1.0);
  CHECK(roc_auc(std::vector<double>{0.3, 0.3, 0.3, 0.3}, y).auc == 0.5);
  CHECK(roc_auc(std::vector<double>{0.9, 0.8, 0.7, 0.6}, y).auc == 0.75);
  CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), Error);
  CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1}, std::vector<int>{1, 0}), Error);
}

TEST_CASE("roc_auc equals the pairwise statistic") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto in = random_instance(rng, trial % 2 == 0);
    CHECK(roc_auc(in.scores, in.labels).auc == pairwise_auc(in.scores, in.labels));
  }
}

TEST_CASE("roc curve runs from the origin to (1,1) and its area is the auc") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = random_instance(rng, true);
    const auto r = roc_auc(in.scores, in.labels);
    CHECK(r.points.front().fpr == 0.0);
    CHECK(r.points.front().tpr == 0.0);
    CHECK(r.points.back().fpr == 1.0);
    CHECK(r.points.back().tpr == 1.0);
    double area = 0.0;
    for (std::size_t i = 1; i < r.points.size(); ++i) {
      CHECK(r.points[i].fpr >= r.points[i - 1].fpr);
      CHECK(r.points[i].tpr >= r.points[i - 1].tpr);
      area += (r.points[i].fpr - r.points[i - 1].fpr) * (r.points[i].tpr + r.points[i - 1].tpr) / 2.0;
    }
    CHECK(area == doctest::Approx(r.auc).epsilon(1e-12));
    std::vector<double> distinct = in.scores;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    CHECK(r.points.size() == distinct.size() + 1);
  }
}

TEST_CASE("roc_auc: monotone transforms and complement symmetry") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto in = random_instance(rng, trial % 2 == 0);
    const double base = roc_auc(in.scores, in.labels).auc;
    std::vector<double> transformed;
    for (double s : in.scores) transformed.push_back(std::exp(3.0 * s) - 7.0);
    CHECK(roc_auc(transformed, in.labels).auc == base);

    if (trial % 2 == 1) {
      std::vector<int> flipped;
      for (int y : in.labels) flipped.push_back(1 - y);
      CHECK(base + roc_auc(in.scores, flipped).auc == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
}

TEST_CASE("stratified_kfold: reference splits") {
  std::vector<int> y(20);
  for (int i = 0; i < 10; ++i) y[static_cast<std::size_t>(i)] = 1;
  const auto a = stratified_kfold(y, 5, 4);
  std::map<int, std::pair<int, int>> counts;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] ? counts[a.fold_of[i]].first : counts[a.fold_of[i]].second)++;
  for (int f = 0; f < 5; ++f) {
    CHECK(counts[f].first == 2);
    CHECK(counts[f].second == 2);
  }

  std::vector<int> seven(12, 0);
  for (int i = 0; i < 7; ++i) seven[static_cast<std::size_t>(i)] = 1;
  const auto b = stratified_kfold(seven, 5, 9);
  std::vector<int> pos(5, 0);
  for (std::size_t i = 0; i < 7; ++i) ++pos[static_cast<std::size_t>(b.fold_of[i])];
  std::sort(pos.rbegin(), pos.rend());
  CHECK(pos == std::vector<int>{2, 2, 1, 1, 1});

  CHECK(stratified_kfold(y, 5, 4).fold_of == a.fold_of);
  CHECK_THROWS_AS(stratified_kfold(seven, 6, 1), Error);
  CHECK_THROWS_AS(stratified_kfold(y, 1, 1), Error);
}

TEST_CASE("stratified_kfold keeps classes and folds balanced") {
  Rng rng(5);
  for (int k : {2, 5, 10}) {
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<int> y;
      const auto m = static_cast<std::size_t>(2 * k + rng.below(300));
      for (std::size_t i = 0; i < m; ++i) y.push_back(rng.bernoulli(0.3) ? 1 : 0);
      const auto pos = std::count(y.begin(), y.end(), 1);
      if (pos < k || static_cast<long>(m) - pos < k) continue;
      const auto a = stratified_kfold(y, k, rng.next());
      std::vector<int> p(static_cast<std::size_t>(k)), n(static_cast<std::size_t>(k));
      for (std::size_t i = 0; i < m; ++i) ++(y[i] ? p : n)[static_cast<std::size_t>(a.fold_of[i])];
      CHECK(*std::max_element(p.begin(), p.end()) - *std::min_element(p.begin(), p.end()) <= 1);
      CHECK(*std::max_element(n.begin(), n.end()) - *std::min_element(n.begin(), n.end()) <= 1);
    }
  }
}

TEST_CASE("cross_validate_weekly: constant and oracle trainers") {
  const auto rs = cohort(60, 6);
  const std::vector<int> weeks{1, 2, 3};
  const Trainer constant = [](const CvSplit& s) { return std::vector<double>(s.test.size(), 0.5); };
  const auto flat = cross_validate_weekly(rs, constant, weeks, 5, 7);
  CHECK(flat.cells.size() == 15);
  for (const auto& c : flat.cells) CHECK(c.auc == 0.5);

  const Trainer oracle = [](const CvSplit& s) {
    std::vector<double> out;
    for (const auto& r : s.test) out.push_back(r.label);
    return out;
  };
  const auto perfect = cross_validate_weekly(rs, oracle, weeks, 5, 7);
  for (const auto& c : perfect.cells) CHECK(c.auc == 1.0);
  for (const auto& w : perfect.summary) {
    CHECK(w.mean_auc == 1.0);
    CHECK(w.defined_folds == 5);
  }
  CHECK(perfect.undefined_cells == 0);
}

TEST_CASE("cross_validate_weekly: folds partition the students every week") {
  const auto rs = cohort(43, 8);
  const std::vector<int> weeks{1, 4, 8};
  std::vector<std::vector<std::size_t>> first_week_folds;
  const Trainer check = [&](const CvSplit& s) {
    CHECK(s.train.size() + s.test.size() == rs.size());
    CHECK(s.train_labels.size() == s.train.size());
    for (const auto& r : s.train) {
      for (const auto& e : r.events) CHECK(e.day < r.enrollment_day + 7 * s.week);
    }
    return std::vector<double>(s.test.size(), 0.0);
  };
  const auto res = cross_validate_weekly(rs, check, weeks, 4, 9);
  for (int week : weeks) {
    std::vector<int> seen(rs.size(), 0);
    std::vector<std::vector<std::size_t>> folds;
    for (const auto& c : res.cells) {
      if (c.week != week) continue;
      folds.push_back(c.test_indices);
      for (auto i : c.test_indices) ++seen[i];
    }
    for (int n : seen) CHECK(n == 1);
    if (first_week_folds.empty()) first_week_folds = folds;
    CHECK(folds == first_week_folds);
  }
}

TEST_CASE("cross_validate_weekly: seeds differ per cell and repeat per run") {
  const auto rs = cohort(30, 10);
  const std::vector<int> weeks{1, 2};
  std::vector<std::uint64_t> a, b;
  const auto record = [](std::vector<std::uint64_t>& out) {
    return [&out](const CvSplit& s) {
      out.push_back(s.seed);
      return std::vector<double>(s.test.size(), 0.0);
    };
  };
  cross_validate_weekly(rs, record(a), weeks, 3, 11);
  cross_validate_weekly(rs, record(b), weeks, 3, 11);
  CHECK(a == b);
  std::sort(a.begin(), a.end());
  CHECK(std::unique(a.begin(), a.end()) == a.end());
}

TEST_CASE("cross_validate_weekly: wrong score count is an error") {
  const auto rs = cohort(30, 12);
  const std::vector<int> weeks{1};
  const Trainer bad = [](const CvSplit&) { return std::vector<double>{0.5}; };
  CHECK_THROWS_AS(cross_validate_weekly(rs, bad, weeks, 3, 1), Error);
}
