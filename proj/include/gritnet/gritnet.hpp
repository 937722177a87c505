#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <type_traits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gritnet/baseline.hpp"
#include "gritnet/encoding.hpp"
#include "gritnet/error.hpp"
#include "gritnet/lstm.hpp"
#include "gritnet/random.hpp"
#include "gritnet/text_io.hpp"

namespace gritnet {

/// Event embedding E^o split into its action and delta column blocks, so
/// that E^o * [1(a); 1(delta)] = action_table.col(a) + delta_table.col(delta).
/// Column `vocab size` of the action table is the unknown-action slot.
template <typename Scalar>
struct EmbeddingMatrix {
  Matrix<Scalar> action_table;  // E x (L + 1)
  Matrix<Scalar> delta_table;   // E x (D_max + 1)

  Eigen::Index dim() const { return action_table.rows(); }
  Eigen::Index action_count() const { return action_table.cols(); }
  Eigen::Index delta_count() const { return delta_table.cols(); }

  /// [action_table delta_table], the E x |O| matrix acting on two-hot inputs.
  Matrix<Scalar> concatenated() const {
    Matrix<Scalar> m(dim(), action_count() + delta_count());
    m << action_table, delta_table;
    return m;
  }
};

struct GritNetDims {
  Eigen::Index vocab_size = 0;  ///< L; the model reserves one extra unknown slot
  int max_delta = kDefaultMaxDelta;
  Eigen::Index embedding_dim = 64;
  Eigen::Index hidden_dim = 32;

  friend bool operator==(const GritNetDims&, const GritNetDims&) = default;
};

/// Embedding -> BLSTM -> masked global max pool -> dropout -> dense -> sigmoid.
/// The same struct doubles as the gradient container.
template <typename Scalar>
struct GritNetModel {
  EmbeddingMatrix<Scalar> embedding;
  LstmDirectionParams<Scalar> forward_lstm;
  LstmDirectionParams<Scalar> backward_lstm;
  Vector<Scalar> dense_weights;  // 2H
  Scalar dense_bias = Scalar(0);
  double dropout_rate = 0.0;

  GritNetDims dims() const {
    return {embedding.action_count() - 1, static_cast<int>(embedding.delta_count() - 1), embedding.dim(),
            forward_lstm.hidden_size()};
  }

  static GritNetModel Zero(const GritNetDims& d) {
    GritNetModel m;
    m.embedding.action_table = Matrix<Scalar>::Zero(d.embedding_dim, d.vocab_size + 1);
    m.embedding.delta_table = Matrix<Scalar>::Zero(d.embedding_dim, d.max_delta + 1);
    m.forward_lstm = LstmDirectionParams<Scalar>::Zero(d.embedding_dim, d.hidden_dim);
    m.backward_lstm = LstmDirectionParams<Scalar>::Zero(d.embedding_dim, d.hidden_dim);
    m.dense_weights = Vector<Scalar>::Zero(2 * d.hidden_dim);
    return m;
  }

  /// Visits every parameter block as (name, Eigen::Map) in the fixed
  /// serialization order.
  template <typename F>
  void for_each_block(F&& f) {
    visit_blocks(*this, f);
  }
  template <typename F>
  void for_each_block(F&& f) const {
    visit_blocks(*this, f);
  }

  template <typename F>
  static void zip_blocks(GritNetModel& a, const GritNetModel& b, F&& f);

 private:
  template <typename Self, typename F>
  static void visit_blocks(Self& self, F& f) {
    using M = std::conditional_t<std::is_const_v<Self>, const Matrix<Scalar>, Matrix<Scalar>>;
    using Map = Eigen::Map<M>;
    auto block = [&](const char* name, auto& m) { f(name, Map(m.data(), m.rows(), m.cols())); };
    block("embedding.action", self.embedding.action_table);
    block("embedding.delta", self.embedding.delta_table);
    block("forward.input_weights", self.forward_lstm.input_weights);
    block("forward.recurrent_weights", self.forward_lstm.recurrent_weights);
    block("forward.bias", self.forward_lstm.bias);
    block("backward.input_weights", self.backward_lstm.input_weights);
    block("backward.recurrent_weights", self.backward_lstm.recurrent_weights);
    block("backward.bias", self.backward_lstm.bias);
    block("dense.weights", self.dense_weights);
    f("dense.bias", Map(&self.dense_bias, 1, 1));
  }
};

template <typename Scalar>
using GritNetGradients = GritNetModel<Scalar>;

template <typename Scalar>
template <typename F>
void GritNetModel<Scalar>::zip_blocks(GritNetModel& a, const GritNetModel& b, F&& f) {
  std::vector<Eigen::Map<const Matrix<Scalar>>> others;
  b.for_each_block([&](const char*, Eigen::Map<const Matrix<Scalar>> m) { others.push_back(m); });
  std::size_t k = 0;
  a.for_each_block([&](const char* name, Eigen::Map<Matrix<Scalar>> m) { f(name, m, others.at(k++)); });
}

/// Uniform(-1/sqrt(H), 1/sqrt(H)) for LSTM and dense weights, uniform(-0.05,
/// 0.05) for embeddings, forget-gate bias 1, other biases 0. The unknown
/// action column starts at zero.
template <typename Scalar>
GritNetModel<Scalar> init_gritnet(const GritNetDims& d, std::uint64_t seed, double dropout_rate = 0.0) {
  if (d.vocab_size < 0 || d.max_delta < 0 || d.embedding_dim < 1 || d.hidden_dim < 1) {
    throw Error("invalid GritNet dimensions");
  }
  GritNetModel<Scalar> m = GritNetModel<Scalar>::Zero(d);
  m.dropout_rate = dropout_rate;
  const double k = 1.0 / std::sqrt(static_cast<double>(d.hidden_dim));
  auto fill = [](Eigen::Map<Matrix<Scalar>> block, Rng& rng, double range) {
    for (Eigen::Index j = 0; j < block.size(); ++j) block.data()[j] = static_cast<Scalar>(rng.uniform(-range, range));
  };
  m.for_each_block([&](const char* name, Eigen::Map<Matrix<Scalar>> block) {
    const std::string n(name);
    Rng rng(derive_seed(seed, n));
    if (n.starts_with("embedding.")) {
      fill(block, rng, 0.05);
    } else if (n.ends_with("weights")) {
      fill(block, rng, k);
    }
  });
  m.embedding.action_table.col(d.vocab_size).setZero();
  m.forward_lstm.bias.segment(d.hidden_dim, d.hidden_dim).setConstant(Scalar(1));
  m.backward_lstm.bias.segment(d.hidden_dim, d.hidden_dim).setConstant(Scalar(1));
  return m;
}

/// Row-per-timestep view of the embedded input is the transpose of this:
/// column t holds action_table[a_t] + delta_table[delta_t]; pad columns are 0.
template <typename Scalar>
Matrix<Scalar> embed_tokens(std::span<const TokenPair> tokens, const EmbeddingMatrix<Scalar>& emb) {
  Matrix<Scalar> out = Matrix<Scalar>::Zero(emb.dim(), static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const TokenPair& tok = tokens[t];
    if (tok.is_pad()) continue;
    if (tok.action_index >= emb.action_count() || tok.delta_index < 0 || tok.delta_index >= emb.delta_count()) {
      throw Error("embed_tokens: token (" + std::to_string(tok.action_index) + ", " +
                  std::to_string(tok.delta_index) + ") at position " + std::to_string(t) + " is out of range");
    }
    out.col(static_cast<Eigen::Index>(t)) = emb.action_table.col(tok.action_index) + emb.delta_table.col(tok.delta_index);
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> embed_tokens(const EncodedSequence& seq, const EmbeddingMatrix<Scalar>& emb) {
  return embed_tokens<Scalar>(std::span<const TokenPair>(seq.tokens), emb);
}

template <typename Scalar>
struct BlstmTrace {
  LstmTrace<Scalar> forward;
  LstmTrace<Scalar> backward;  // columns in right-to-left processing order
  Matrix<Scalar> outputs;      // 2H x T over valid steps, [h_fwd(t); h_bwd(t)]
};

namespace detail {

template <typename Scalar>
BlstmTrace<Scalar> blstm_valid(const Matrix<Scalar>& valid_inputs, const LstmDirectionParams<Scalar>& fwd,
                               const LstmDirectionParams<Scalar>& bwd) {
  const Eigen::Index hd = fwd.hidden_size();
  const Eigen::Index steps = valid_inputs.cols();
  BlstmTrace<Scalar> tr;
  tr.forward = lstm_sequence(fwd, valid_inputs);
  const Matrix<Scalar> reversed = valid_inputs.rowwise().reverse();
  tr.backward = lstm_sequence(bwd, reversed);
  tr.outputs.resize(2 * hd, steps);
  tr.outputs.topRows(hd) = tr.forward.hidden;
  tr.outputs.bottomRows(hd) = tr.backward.hidden.rowwise().reverse();
  return tr;
}

}  // namespace detail

/// BLSTM over the last `valid_length` columns of `embedded` (E x T). Both
/// directions start from the zero state at the valid boundary; pad columns
/// of the result are zero.
template <typename Scalar>
Matrix<Scalar> blstm_forward(const Matrix<Scalar>& embedded, std::size_t valid_length,
                             const LstmDirectionParams<Scalar>& fwd, const LstmDirectionParams<Scalar>& bwd) {
  const auto total = static_cast<std::size_t>(embedded.cols());
  if (valid_length > total) throw Error("blstm_forward: valid_length exceeds sequence length");
  const auto valid = static_cast<Eigen::Index>(valid_length);
  Matrix<Scalar> out = Matrix<Scalar>::Zero(2 * fwd.hidden_size(), embedded.cols());
  if (valid == 0) return out;
  const Matrix<Scalar> inputs = embedded.rightCols(valid);
  out.rightCols(valid) = detail::blstm_valid(inputs, fwd, bwd).outputs;
  return out;
}

template <typename Scalar>
struct PoolResult {
  Vector<Scalar> pooled;
  /// Column of the earliest maximum per row; -1 when nothing is valid.
  std::vector<Eigen::Index> argmax;
};

/// Row-wise maximum over the last `valid_length` columns of `outputs`.
template <typename Scalar>
PoolResult<Scalar> global_max_pool(const Matrix<Scalar>& outputs, std::size_t valid_length) {
  if (valid_length > static_cast<std::size_t>(outputs.cols())) {
    throw Error("global_max_pool: valid_length exceeds sequence length");
  }
  PoolResult<Scalar> r;
  r.pooled = Vector<Scalar>::Zero(outputs.rows());
  r.argmax.assign(static_cast<std::size_t>(outputs.rows()), -1);
  if (valid_length == 0) return r;
  const Eigen::Index first = outputs.cols() - static_cast<Eigen::Index>(valid_length);
  for (Eigen::Index j = 0; j < outputs.rows(); ++j) {
    Eigen::Index best = first;
    for (Eigen::Index t = first + 1; t < outputs.cols(); ++t) {
      if (outputs(j, t) > outputs(j, best)) best = t;
    }
    r.pooled[j] = outputs(j, best);
    r.argmax[static_cast<std::size_t>(j)] = best;
  }
  return r;
}

/// Routes each pooled coordinate's gradient to its argmax column; every
/// other entry of the 2H x total_length result is zero.
template <typename Scalar>
Matrix<Scalar> global_max_pool_backward(const std::vector<Eigen::Index>& argmax, const Vector<Scalar>& d_pooled,
                                        Eigen::Index total_length) {
  Matrix<Scalar> d_out = Matrix<Scalar>::Zero(d_pooled.size(), total_length);
  for (Eigen::Index j = 0; j < d_pooled.size(); ++j) {
    const Eigen::Index t = argmax[static_cast<std::size_t>(j)];
    if (t >= 0) d_out(j, t) += d_pooled[j];
  }
  return d_out;
}

template <typename Scalar>
struct ForwardCache {
  std::size_t total_length = 0;
  std::size_t valid_length = 0;
  std::vector<TokenPair> tokens;  // valid tokens only
  Matrix<Scalar> embedded;        // E x valid
  BlstmTrace<Scalar> blstm;
  Vector<Scalar> pooled;
  /// Index into the padded sequence, one per pooled coordinate.
  std::vector<Eigen::Index> argmax;
  /// Per-coordinate multiplier: 0 or 1/(1-rate) in training, else 1.
  Vector<Scalar> dropout_scale;
  Scalar logit = Scalar(0);
  Scalar probability = Scalar(0.5);
};

/// Inference when `training` is false. In training, inverted dropout with
/// the model's rate is applied to the pooled vector, drawn from `seed`.
template <typename Scalar>
ForwardCache<Scalar> forward(const GritNetModel<Scalar>& model, const EncodedSequence& seq, bool training,
                             std::uint64_t seed = 0) {
  ForwardCache<Scalar> c;
  c.total_length = seq.total_length();
  c.valid_length = seq.valid_length;
  const auto valid = seq.valid_tokens();
  c.tokens.assign(valid.begin(), valid.end());
  c.embedded = embed_tokens<Scalar>(std::span<const TokenPair>(c.tokens), model.embedding);
  c.blstm = detail::blstm_valid(c.embedded, model.forward_lstm, model.backward_lstm);

  auto pool = global_max_pool<Scalar>(c.blstm.outputs, c.valid_length);
  c.pooled = std::move(pool.pooled);
  const auto offset = static_cast<Eigen::Index>(seq.pad_length());
  c.argmax = std::move(pool.argmax);
  for (auto& a : c.argmax) {
    if (a >= 0) a += offset;
  }

  const Eigen::Index width = c.pooled.size();
  c.dropout_scale = Vector<Scalar>::Ones(width);
  if (training && model.dropout_rate > 0.0) {
    if (model.dropout_rate >= 1.0) throw Error("dropout rate must be in [0, 1)");
    Rng rng(seed);
    const Scalar keep_scale = static_cast<Scalar>(1.0 / (1.0 - model.dropout_rate));
    for (Eigen::Index j = 0; j < width; ++j) {
      c.dropout_scale[j] = rng.uniform() < model.dropout_rate ? Scalar(0) : keep_scale;
    }
  }
  c.logit = model.dense_weights.dot(c.pooled.cwiseProduct(c.dropout_scale)) + model.dense_bias;
  c.probability = sigmoid(c.logit);
  return c;
}

inline constexpr double kProbabilityEpsilon = 1e-12;

/// Binary cross-entropy with p clamped to [1e-12, 1 - 1e-12].
template <typename Scalar>
Scalar bce_loss(Scalar p, int y) {
  using std::log;
  const Scalar eps = static_cast<Scalar>(kProbabilityEpsilon);
  const Scalar q = std::clamp(p, eps, Scalar(1) - eps);
  return y ? -log(q) : -log(Scalar(1) - q);
}

/// Adds scale * dL/dparams for one example into `grads`. Only argmax steps
/// receive pooled-path gradient; pad steps receive nothing.
template <typename Scalar>
void backward_accumulate(const GritNetModel<Scalar>& model, const ForwardCache<Scalar>& c, int y,
                         GritNetGradients<Scalar>& grads, Scalar scale = Scalar(1)) {
  const Scalar d_logit = scale * (c.probability - Scalar(y ? 1 : 0));
  const Vector<Scalar> dropped = c.pooled.cwiseProduct(c.dropout_scale);
  grads.dense_weights += d_logit * dropped;
  grads.dense_bias += d_logit;
  if (c.valid_length == 0) return;

  const Eigen::Index hd = model.forward_lstm.hidden_size();
  const auto steps = static_cast<Eigen::Index>(c.valid_length);
  const Vector<Scalar> d_pooled = d_logit * model.dense_weights.cwiseProduct(c.dropout_scale);

  const Matrix<Scalar> d_out =
      global_max_pool_backward<Scalar>(c.argmax, d_pooled, static_cast<Eigen::Index>(c.total_length))
          .rightCols(steps);
  const Matrix<Scalar> d_fwd = d_out.topRows(hd);
  const Matrix<Scalar> d_bwd = d_out.bottomRows(hd).rowwise().reverse();  // processing order

  Matrix<Scalar> d_inputs =
      lstm_sequence_backward(model.forward_lstm, c.embedded, c.blstm.forward, d_fwd, grads.forward_lstm);
  const Matrix<Scalar> reversed = c.embedded.rowwise().reverse();
  d_inputs += lstm_sequence_backward(model.backward_lstm, reversed, c.blstm.backward, d_bwd, grads.backward_lstm)
                  .rowwise()
                  .reverse();

  for (Eigen::Index t = 0; t < steps; ++t) {
    const TokenPair& tok = c.tokens[static_cast<std::size_t>(t)];
    grads.embedding.action_table.col(tok.action_index) += d_inputs.col(t);
    grads.embedding.delta_table.col(tok.delta_index) += d_inputs.col(t);
  }
}

/// Exact gradient of bce_loss(forward(...).probability, y).
template <typename Scalar>
GritNetGradients<Scalar> backward(const GritNetModel<Scalar>& model, const ForwardCache<Scalar>& cache, int y) {
  auto grads = GritNetGradients<Scalar>::Zero(model.dims());
  backward_accumulate(model, cache, y, grads);
  return grads;
}

/// Graduation probability for a raw record. Actions outside `vocab` use the
/// unknown slot.
template <typename Scalar>
Scalar predict(const GritNetModel<Scalar>& model, const StudentRecord& record, const Vocabulary& vocab,
               int max_delta) {
  const GritNetDims d = model.dims();
  if (static_cast<Eigen::Index>(vocab.size()) != d.vocab_size || max_delta != d.max_delta) {
    throw Error("predict: vocabulary or max_delta does not match the model");
  }
  return forward(model, encode_sequence(record, vocab, max_delta, OovPolicy::kUnknown), false).probability;
}

/// Sum of per-outcome log-likelihoods log p(y_i | v); one term for the
/// single graduation outcome.
template <typename Scalar>
Scalar outcome_log_likelihood(std::span<const Scalar> probabilities, std::span<const int> outcomes) {
  if (probabilities.size() != outcomes.size()) throw Error("outcome_log_likelihood: size mismatch");
  Scalar sum = Scalar(0);
  for (std::size_t i = 0; i < outcomes.size(); ++i) sum -= bce_loss(probabilities[i], outcomes[i]);
  return sum;
}

struct BlockCheck {
  std::string name;
  double relative_error = 0.0;
};

/// Central finite differences of the loss against backward() for every
/// block; relative error is |analytic - numeric| / max(|analytic|, |numeric|)
/// in the Euclidean norm, 0 when both vanish.
template <typename Scalar>
std::vector<BlockCheck> gradient_check(const GritNetModel<Scalar>& model, const EncodedSequence& seq, int y,
                                       bool training, std::uint64_t seed, double step = 1e-6) {
  const auto analytic = backward(model, forward(model, seq, training, seed), y);
  GritNetModel<Scalar> probe = model;
  GritNetGradients<Scalar> numeric = GritNetGradients<Scalar>::Zero(model.dims());
  auto loss = [&] { return static_cast<double>(bce_loss(forward(probe, seq, training, seed).probability, y)); };

  std::vector<Eigen::Map<Matrix<Scalar>>> numeric_blocks;
  numeric.for_each_block([&](const char*, Eigen::Map<Matrix<Scalar>> m) { numeric_blocks.push_back(m); });
  std::size_t b = 0;
  probe.for_each_block([&](const char*, Eigen::Map<Matrix<Scalar>> block) {
    for (Eigen::Index k = 0; k < block.size(); ++k) {
      const Scalar saved = block.data()[k];
      block.data()[k] = saved + static_cast<Scalar>(step);
      const double up = loss();
      block.data()[k] = saved - static_cast<Scalar>(step);
      const double down = loss();
      block.data()[k] = saved;
      numeric_blocks[b].data()[k] = static_cast<Scalar>((up - down) / (2.0 * step));
    }
    ++b;
  });

  std::vector<BlockCheck> out;
  GritNetModel<Scalar> a = analytic;
  GritNetModel<Scalar>::zip_blocks(a, numeric, [&](const char* name, auto lhs, auto rhs) {
    const double diff = static_cast<double>((lhs - rhs).norm());
    const double scale = static_cast<double>(std::max(lhs.norm(), rhs.norm()));
    out.push_back({name, scale > 0.0 ? diff / scale : 0.0});
  });
  return out;
}

inline constexpr const char* kModelFormatTag = "gritnet-model 1";

/// Text form: tag line, "L D_max E H", dropout rate, then each block as
/// "<name> <rows> <cols>" followed by its column-major values one per line.
/// Values use shortest round-trip decimals, so load(save(m)) == m bitwise
/// for double.
template <typename Scalar>
void save_gritnet(std::ostream& out, const GritNetModel<Scalar>& model) {
  const GritNetDims d = model.dims();
  out << kModelFormatTag << '\n'
      << d.vocab_size << ' ' << d.max_delta << ' ' << d.embedding_dim << ' ' << d.hidden_dim << '\n'
      << format_double(model.dropout_rate) << '\n';
  model.for_each_block([&](const char* name, Eigen::Map<const Matrix<Scalar>> m) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index k = 0; k < m.size(); ++k) out << format_double(static_cast<double>(m.data()[k])) << '\n';
  });
}

template <typename Scalar>
GritNetModel<Scalar> load_gritnet(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kModelFormatTag) throw Error("not a GritNet model file");
  GritNetDims d;
  if (!(in >> d.vocab_size >> d.max_delta >> d.embedding_dim >> d.hidden_dim)) throw Error("bad model dimensions");
  std::getline(in, line);
  auto model = GritNetModel<Scalar>::Zero(d);
  model.dropout_rate = read_number_line<double>(in, "dropout rate");
  model.for_each_block([&](const char* name, Eigen::Map<Matrix<Scalar>> m) {
    std::string header;
    if (!std::getline(in, header)) throw Error(std::string("missing block ") + name);
    const std::string expect = std::string(name) + ' ' + std::to_string(m.rows()) + ' ' + std::to_string(m.cols());
    if (header != expect) throw Error("expected block header '" + expect + "', got '" + header + "'");
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<Scalar>(read_number_line<double>(in, name));
  });
  return model;
}

}  // namespace gritnet
