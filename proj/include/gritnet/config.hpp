#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gritnet/event_model.hpp"
#include "gritnet/gritnet.hpp"
#include "gritnet/synthetic.hpp"
#include "gritnet/train.hpp"

namespace gritnet {

struct BaselineConfig {
  std::vector<double> alphas{0.001, 0.01, 0.1, 1.0, 10.0};
  int epochs = 2000;
  double learning_rate = 0.0;  ///< 0 = automatic 1/L step
  int chi2_k = 0;              ///< 0 disables chi-square feature selection
  int validation_folds = 4;    ///< one of these inner folds scores each alpha

  friend bool operator==(const BaselineConfig&, const BaselineConfig&) = default;
};

struct GritNetConfig {
  Eigen::Index embedding_dim = 64;
  Eigen::Index hidden_dim = 32;
  int max_delta = kDefaultMaxDelta;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  int epochs = 10;
  double dropout = 0.1;

  friend bool operator==(const GritNetConfig&, const GritNetConfig&) = default;
};

/// Experiment description. On disk it is a flat "section.key = value" file;
/// '#' starts a comment line and list values are comma separated. Every key
/// is optional and defaults to the value below. See README for the key list.
struct ExperimentConfig {
  std::string data_path;  ///< JSONL log; empty means generate from `synthetic`
  Day deadline_day = std::numeric_limits<Day>::max();
  SyntheticSpec synthetic;
  std::vector<int> weeks{1, 2, 3, 4, 5, 6, 7, 8};
  int folds = 5;
  std::vector<std::string> models{"baseline", "gritnet"};
  BaselineConfig baseline;
  GritNetConfig gritnet;
  std::string output_dir = "results";
  std::uint64_t seed = 1;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses the key-value text. A missing synthetic.seed is derived from
/// experiment.seed. Throws ParseError on unknown keys or bad values.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Writes every key, so parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Only the synthetic.* keys are read; everything else is rejected.
SyntheticSpec parse_synthetic_spec(std::string_view text);
std::string serialize_synthetic_spec(const SyntheticSpec& spec);

void validate(const ExperimentConfig& config);

}  // namespace gritnet
