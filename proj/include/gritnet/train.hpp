#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gritnet/encoding.hpp"
#include "gritnet/error.hpp"
#include "gritnet/gritnet.hpp"
#include "gritnet/random.hpp"

namespace gritnet {

struct SgdOptions {
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  int epochs = 10;
  double dropout_rate = 0.1;
  std::uint64_t seed = 0;
};

template <typename Scalar>
struct TrainResult {
  GritNetModel<Scalar> model;
  /// Mean training loss of each epoch, measured during that epoch's passes.
  std::vector<double> loss_history;
};

/// Minibatch SGD with mean-reduced gradients and a constant learning rate.
/// Each epoch reshuffles with a seed derived from (seed, epoch); each batch
/// is pre-padded to its longest member.
template <typename Scalar>
TrainResult<Scalar> sgd_train(GritNetModel<Scalar> model, std::span<const EncodedSequence> sequences,
                              std::span<const int> labels, const SgdOptions& options) {
  if (sequences.empty()) throw Error("sgd_train: empty dataset");
  if (sequences.size() != labels.size()) throw Error("sgd_train: sequences and labels differ in size");
  if (options.batch_size == 0) throw Error("sgd_train: batch_size must be positive");
  if (options.dropout_rate < 0.0 || options.dropout_rate >= 1.0) throw Error("dropout rate must be in [0, 1)");
  model.dropout_rate = options.dropout_rate;

  const std::size_t n = sequences.size();
  const std::uint64_t shuffle_seed = derive_seed(options.seed, "shuffle");
  const std::uint64_t dropout_seed = derive_seed(options.seed, "dropout");
  std::vector<std::size_t> order(n);
  std::vector<EncodedSequence> members;
  auto grads = GritNetGradients<Scalar>::Zero(model.dims());

  TrainResult<Scalar> result;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(shuffle_seed, static_cast<std::uint64_t>(epoch)));
    shuffle(order, rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0, batch = 0; start < n; start += options.batch_size, ++batch) {
      const std::size_t stop = std::min(n, start + options.batch_size);
      members.clear();
      std::size_t longest = 0;
      for (std::size_t k = start; k < stop; ++k) {
        members.push_back(sequences[order[k]]);
        longest = std::max(longest, members.back().valid_length);
      }
      const auto padded = pre_pad_batch(members, longest);

      grads.for_each_block([](const char*, Eigen::Map<Matrix<Scalar>> m) { m.setZero(); });
      const Scalar scale = Scalar(1) / static_cast<Scalar>(stop - start);
      double batch_loss = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        const auto seed = derive_seed(dropout_seed, static_cast<std::uint64_t>(epoch) * n + k);
        const auto cache = forward(model, padded[k - start], true, seed);
        const int y = labels[order[k]];
        batch_loss += static_cast<double>(bce_loss(cache.probability, y));
        backward_accumulate(model, cache, y, grads, scale);
      }
      if (!std::isfinite(batch_loss)) {
        throw DivergenceError("GritNet loss became non-finite at epoch " + std::to_string(epoch + 1) + ", batch " +
                              std::to_string(batch + 1));
      }
      epoch_loss += batch_loss;

      const Scalar lr = static_cast<Scalar>(options.learning_rate);
      GritNetModel<Scalar>::zip_blocks(model, grads, [&](const char*, auto param, auto grad) { param -= lr * grad; });
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(n));
  }
  result.model = std::move(model);
  return result;
}

}  // namespace gritnet
