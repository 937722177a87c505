#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gritnet/gritnet.hpp"

namespace gritnet {

struct GradcheckOptions {
  int trials = 20;
  std::uint64_t seed = 7;
  Eigen::Index vocab_size = 5;
  int max_delta = 4;
  Eigen::Index embedding_dim = 4;
  Eigen::Index hidden_dim = 3;
  std::size_t max_length = 6;
  double step = 1e-6;
  double tolerance = 1e-5;
};

struct GradcheckTrial {
  int trial = 0;
  std::size_t valid_length = 0;
  std::size_t pad_length = 0;
  bool training = false;
  std::vector<BlockCheck> blocks;
  double worst = 0.0;
};

struct GradcheckReport {
  std::vector<GradcheckTrial> trials;
  double worst = 0.0;
  bool passed = true;
};

/// Random tiny models and sequences (including pre-padding, an unknown
/// action now and then, and dropout on odd trials) checked block by block
/// against central finite differences.
GradcheckReport run_gradient_suite(const GradcheckOptions& options);

}  // namespace gritnet
