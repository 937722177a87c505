#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gritnet/baseline.hpp"
#include "gritnet/config.hpp"
#include "gritnet/eval.hpp"
#include "gritnet/event_model.hpp"

namespace gritnet {

inline constexpr const char* kCvResultsFile = "cv_results.csv";
inline constexpr const char* kCvSummaryFile = "cv_summary.csv";
inline constexpr const char* kSummaryTextFile = "summary.txt";
inline constexpr const char* kConfigEchoFile = "config.txt";
inline constexpr const char* kAucByWeekFile = "auc_by_week.csv";

/// Pre-enrollment filtered records plus their vocabulary.
struct Dataset {
  std::vector<StudentRecord> records;
  Vocabulary vocab;
};

/// Reads config.data_path, or generates the synthetic log when it is empty,
/// then parses and filters it.
Dataset load_dataset(const ExperimentConfig& config);

/// Alpha chosen by an inner stratified split of the training rows, then a
/// refit on all of them.
struct BaselineSweep {
  LogRegModel model;
  double chosen_alpha = 0.0;
};

BaselineSweep fit_baseline_with_sweep(const Eigen::MatrixXd& x, std::span<const int> labels,
                                      const BaselineConfig& config, std::uint64_t seed);

Trainer make_baseline_trainer(const Vocabulary& vocab, const BaselineConfig& config);
Trainer make_gritnet_trainer(const Vocabulary& vocab, const GritNetConfig& config);

struct ExperimentResult {
  DatasetStats stats;
  std::map<std::string, CvResult> by_model;
};

using ProgressFn = std::function<void(const std::string& message)>;

/// Runs the weekly cross-validation for every configured model and writes
/// cv_results.csv, cv_summary.csv, summary.txt and config.txt into
/// config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

struct WeekComparison {
  int week = 0;
  double baseline_auc = 0.0;
  double gritnet_auc = 0.0;
  double delta_abs = 0.0;  ///< gritnet - baseline
};

/// Reads cv_summary.csv from `results_dir`, writes auc_by_week.csv beside it
/// and returns the rows. Missing values are NaN.
std::vector<WeekComparison> report(const std::filesystem::path& results_dir);

/// Aligned text table of report() rows.
std::string format_report(const std::vector<WeekComparison>& rows);

}  // namespace gritnet
