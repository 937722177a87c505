#include "gritnet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gritnet/encoding.hpp"
#include "gritnet/error.hpp"
#include "gritnet/random.hpp"

namespace gritnet {

RocResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error("roc_auc: scores and labels differ in size");
  std::int64_t positives = 0;
  for (int y : labels) positives += y ? 1 : 0;
  const std::int64_t negatives = static_cast<std::int64_t>(labels.size()) - positives;
  if (positives == 0 || negatives == 0) throw Error("roc_auc: AUC is undefined for single-class labels");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocResult r;
  r.points.push_back({0.0, 0.0});
  std::int64_t tp = 0, fp = 0;
  // Twice the area in units of one (positive, negative) pair.
  std::int64_t twice_area = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::int64_t tp_step = 0, fp_step = 0;
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] ? tp_step : fp_step) += 1;
    twice_area += fp_step * (2 * tp + tp_step);
    tp += tp_step;
    fp += fp_step;
    r.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                        static_cast<double>(tp) / static_cast<double>(positives)});
  }
  r.auc = static_cast<double>(twice_area) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
  return r;
}

FoldAssignment stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw Error("stratified_kfold: k must be at least 2");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
  if (pos.size() < static_cast<std::size_t>(k) || neg.size() < static_cast<std::size_t>(k)) {
    throw Error("stratified_kfold: each class needs at least k = " + std::to_string(k) + " members (have " +
                std::to_string(pos.size()) + " positive, " + std::to_string(neg.size()) + " negative)");
  }
  FoldAssignment a;
  a.k = k;
  a.fold_of.assign(labels.size(), -1);
  Rng pos_rng(derive_seed(seed, "positive"));
  Rng neg_rng(derive_seed(seed, "negative"));
  shuffle(pos, pos_rng);
  shuffle(neg, neg_rng);
  std::size_t next = 0;
  for (std::size_t i : pos) a.fold_of[i] = static_cast<int>(next++ % static_cast<std::size_t>(k));
  for (std::size_t i : neg) a.fold_of[i] = static_cast<int>(next++ % static_cast<std::size_t>(k));
  return a;
}

CvResult cross_validate_weekly(std::span<const StudentRecord> records, const Trainer& trainer,
                               std::span<const int> weeks, int k, std::uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(records.size());
  for (const auto& r : records) labels.push_back(r.label);
  const FoldAssignment folds = stratified_kfold(labels, k, derive_seed(seed, "folds"));

  CvResult result;
  for (int week : weeks) {
    std::vector<StudentRecord> truncated;
    truncated.reserve(records.size());
    for (const auto& r : records) truncated.push_back(truncate_to_week(r, week));

    WeekSummary summary{week, 0.0, 0};
    double auc_sum = 0.0;
    for (int fold = 0; fold < k; ++fold) {
      std::vector<StudentRecord> train, test;
      std::vector<int> train_labels, test_labels;
      CvCell cell{week, fold, std::nullopt, {}};
      for (std::size_t i = 0; i < truncated.size(); ++i) {
        if (folds.fold_of[i] == fold) {
          test.push_back(truncated[i]);
          test_labels.push_back(labels[i]);
          cell.test_indices.push_back(i);
        } else {
          train.push_back(truncated[i]);
          train_labels.push_back(labels[i]);
        }
      }
      CvSplit split;
      split.week = week;
      split.fold = fold;
      split.seed = derive_seed(derive_seed(seed, "cell"), static_cast<std::uint64_t>(week) * 1000 + fold);
      split.train = train;
      split.train_labels = train_labels;
      split.test = test;
      const auto scores = trainer(split);
      if (scores.size() != test.size()) throw Error("trainer returned the wrong number of scores");

      const bool has_pos = std::find(test_labels.begin(), test_labels.end(), 1) != test_labels.end();
      const bool has_neg = std::find(test_labels.begin(), test_labels.end(), 0) != test_labels.end();
      if (has_pos && has_neg) {
        cell.auc = roc_auc(scores, test_labels).auc;
        auc_sum += *cell.auc;
        ++summary.defined_folds;
      } else {
        ++result.undefined_cells;
      }
      result.cells.push_back(std::move(cell));
    }
    summary.mean_auc = summary.defined_folds > 0 ? auc_sum / summary.defined_folds
                                                 : std::numeric_limits<double>::quiet_NaN();
    result.summary.push_back(summary);
  }
  return result;
}

}  // namespace gritnet
