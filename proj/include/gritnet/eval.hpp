#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gritnet/event_model.hpp"

namespace gritnet {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  /// From (0,0) to (1,1), one point per distinct score threshold.
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// ROC curve and trapezoidal AUC. Tied scores form one threshold, so the
/// area equals the Mann-Whitney statistic with ties counted as 1/2. The area
/// is accumulated in integers and divided once. Throws if either class is
/// absent.
RocResult roc_auc(std::span<const double> scores, std::span<const int> labels);

struct FoldAssignment {
  int k = 0;
  std::vector<int> fold_of;
};

/// Shuffles each class with a seeded rng and deals it round-robin; the
/// negative class continues from the fold where the positives stopped so
/// fold sizes also stay within one.
FoldAssignment stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed);

/// Everything a trainer sees for one (week, fold) cell.
struct CvSplit {
  int week = 0;
  int fold = 0;
  std::uint64_t seed = 0;
  std::span<const StudentRecord> train;
  std::span<const int> train_labels;
  std::span<const StudentRecord> test;
};

/// Trains on split.train and returns one score per split.test record.
using Trainer = std::function<std::vector<double>(const CvSplit& split)>;

struct CvCell {
  int week = 0;
  int fold = 0;
  /// Empty when the held-out fold is single-class.
  std::optional<double> auc;
  /// Indices into the input dataset.
  std::vector<std::size_t> test_indices;
};

struct WeekSummary {
  int week = 0;
  double mean_auc = 0.0;  ///< NaN when no fold is defined
  int defined_folds = 0;
};

struct CvResult {
  std::vector<CvCell> cells;
  std::vector<WeekSummary> summary;
  int undefined_cells = 0;
};

/// For each week: truncate every record, then for each fold train on the
/// other folds and score the held-out one. Folds are drawn once from `seed`
/// and reused for every week. `records` must already be pre-enrollment
/// filtered.
CvResult cross_validate_weekly(std::span<const StudentRecord> records, const Trainer& trainer,
                               std::span<const int> weeks, int k, std::uint64_t seed);

}  // namespace gritnet
