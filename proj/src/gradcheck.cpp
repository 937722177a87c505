#include "gritnet/gradcheck.hpp"

#include <algorithm>

#include "gritnet/random.hpp"

namespace gritnet {

GradcheckReport run_gradient_suite(const GradcheckOptions& options) {
  GradcheckReport report;
  GritNetDims dims{options.vocab_size, options.max_delta, options.embedding_dim, options.hidden_dim};
  for (int trial = 0; trial < options.trials; ++trial) {
    Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(trial)));
    const bool training = trial % 2 == 1;
    auto model = init_gritnet<double>(dims, rng.next(), training ? 0.3 : 0.0);
    // Larger-than-default weights so every block carries a visible gradient.
    model.for_each_block([&](const char*, Eigen::Map<Matrix<double>> m) {
      for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.uniform(-0.8, 0.8);
    });

    const std::size_t valid = 1 + static_cast<std::size_t>(rng.below(options.max_length));
    EncodedSequence seq;
    for (std::size_t t = 0; t < valid; ++t) {
      // the unknown slot (index vocab_size) is drawn now and then
      seq.tokens.push_back({static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(options.vocab_size) + 1)),
                            static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(options.max_delta) + 1))});
    }
    seq.valid_length = valid;
    const std::size_t pad = rng.below(3);
    const auto padded = pre_pad_batch(std::span<const EncodedSequence>(&seq, 1), valid + pad).front();
    const int y = static_cast<int>(rng.below(2));

    GradcheckTrial t;
    t.trial = trial;
    t.valid_length = valid;
    t.pad_length = pad;
    t.training = training;
    t.blocks = gradient_check(model, padded, y, training, rng.next(), options.step);
    for (const auto& b : t.blocks) t.worst = std::max(t.worst, b.relative_error);
    report.worst = std::max(report.worst, t.worst);
    report.passed = report.passed && t.worst <= options.tolerance;
    report.trials.push_back(std::move(t));
  }
  return report;
}

}  // namespace gritnet
