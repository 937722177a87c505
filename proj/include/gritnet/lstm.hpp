#pragma once

#include <cmath>

#include <Eigen/Core>

#include "gritnet/baseline.hpp"
#include "gritnet/error.hpp"

namespace gritnet {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// One LSTM direction. Rows of the weight blocks are stacked by gate in the
/// order input, forget, candidate, output (H rows each).
template <typename Scalar>
struct LstmDirectionParams {
  Matrix<Scalar> input_weights;      // 4H x E
  Matrix<Scalar> recurrent_weights;  // 4H x H
  Vector<Scalar> bias;               // 4H

  Eigen::Index hidden_size() const { return recurrent_weights.cols(); }
  Eigen::Index input_size() const { return input_weights.cols(); }

  static LstmDirectionParams Zero(Eigen::Index input_size, Eigen::Index hidden_size) {
    return {Matrix<Scalar>::Zero(4 * hidden_size, input_size), Matrix<Scalar>::Zero(4 * hidden_size, hidden_size),
            Vector<Scalar>::Zero(4 * hidden_size)};
  }
};

template <typename Scalar>
struct LstmState {
  Vector<Scalar> h;
  Vector<Scalar> c;
};

namespace detail {

template <typename Scalar>
struct SigmoidOp {
  Scalar operator()(Scalar z) const { return sigmoid(z); }
};

template <typename Scalar>
struct TanhOp {
  Scalar operator()(Scalar z) const { return std::tanh(z); }
};

// In-place activation of a 4H pre-activation vector.
template <typename Derived>
void activate_gates(Eigen::MatrixBase<Derived>& a, Eigen::Index hidden) {
  using Scalar = typename Derived::Scalar;
  a.segment(0, 2 * hidden) = a.segment(0, 2 * hidden).unaryExpr(SigmoidOp<Scalar>{});
  a.segment(2 * hidden, hidden) = a.segment(2 * hidden, hidden).unaryExpr(TanhOp<Scalar>{});
  a.segment(3 * hidden, hidden) = a.segment(3 * hidden, hidden).unaryExpr(SigmoidOp<Scalar>{});
}

}  // namespace detail

/// Standard forget-gate LSTM cell without peepholes:
///   i, f, o = sigmoid(W x + U h + b), g = tanh(...),
///   c = f * c_prev + i * g,  h = o * tanh(c).
template <typename Scalar>
LstmState<Scalar> lstm_step(const Eigen::Ref<const Vector<Scalar>>& x, const Eigen::Ref<const Vector<Scalar>>& h_prev,
                            const Eigen::Ref<const Vector<Scalar>>& c_prev, const LstmDirectionParams<Scalar>& p) {
  const Eigen::Index hd = p.hidden_size();
  if (x.size() != p.input_size() || h_prev.size() != hd || c_prev.size() != hd) {
    throw Error("lstm_step: shape mismatch");
  }
  Vector<Scalar> a = p.input_weights * x + p.recurrent_weights * h_prev + p.bias;
  detail::activate_gates(a, hd);
  LstmState<Scalar> s;
  s.c = a.segment(hd, hd).cwiseProduct(c_prev) + a.segment(0, hd).cwiseProduct(a.segment(2 * hd, hd));
  s.h = a.segment(3 * hd, hd).cwiseProduct(s.c.unaryExpr(detail::TanhOp<Scalar>{}));
  return s;
}

/// Everything a direction's backward pass needs, columns in processing order.
template <typename Scalar>
struct LstmTrace {
  Matrix<Scalar> gates;   // 4H x T, post-activation
  Matrix<Scalar> cells;   // H x T
  Matrix<Scalar> hidden;  // H x T
};

/// Runs one direction from the zero state over the columns of `inputs`.
template <typename Scalar>
LstmTrace<Scalar> lstm_sequence(const LstmDirectionParams<Scalar>& p, const Matrix<Scalar>& inputs) {
  const Eigen::Index hd = p.hidden_size();
  const Eigen::Index steps = inputs.cols();
  LstmTrace<Scalar> tr;
  tr.gates.resize(4 * hd, steps);
  tr.cells.resize(hd, steps);
  tr.hidden.resize(hd, steps);
  if (steps == 0) return tr;

  tr.gates.noalias() = p.input_weights * inputs;
  tr.gates.colwise() += p.bias;
  Vector<Scalar> a(4 * hd);
  for (Eigen::Index t = 0; t < steps; ++t) {
    a = tr.gates.col(t);
    if (t > 0) a.noalias() += p.recurrent_weights * tr.hidden.col(t - 1);
    detail::activate_gates(a, hd);
    tr.gates.col(t) = a;
    if (t > 0) {
      tr.cells.col(t) = a.segment(hd, hd).cwiseProduct(tr.cells.col(t - 1)) +
                        a.segment(0, hd).cwiseProduct(a.segment(2 * hd, hd));
    } else {
      tr.cells.col(t) = a.segment(0, hd).cwiseProduct(a.segment(2 * hd, hd));
    }
    tr.hidden.col(t) = a.segment(3 * hd, hd).cwiseProduct(tr.cells.col(t).unaryExpr(detail::TanhOp<Scalar>{}));
  }
  return tr;
}

/// Backpropagation through time for one direction. `d_hidden` holds dL/dh
/// from above for every step; parameter gradients are added into `grads`
/// and dL/d(inputs) is returned.
template <typename Scalar>
Matrix<Scalar> lstm_sequence_backward(const LstmDirectionParams<Scalar>& p, const Matrix<Scalar>& inputs,
                                      const LstmTrace<Scalar>& tr, const Matrix<Scalar>& d_hidden,
                                      LstmDirectionParams<Scalar>& grads) {
  const Eigen::Index hd = p.hidden_size();
  const Eigen::Index steps = inputs.cols();
  if (steps == 0) return Matrix<Scalar>::Zero(p.input_size(), 0);

  Matrix<Scalar> d_pre(4 * hd, steps);
  Vector<Scalar> dh_next = Vector<Scalar>::Zero(hd);
  Vector<Scalar> dc_next = Vector<Scalar>::Zero(hd);
  Vector<Scalar> dh(hd), dc(hd), tanh_c(hd);
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const auto i = tr.gates.col(t).segment(0, hd).array();
    const auto f = tr.gates.col(t).segment(hd, hd).array();
    const auto g = tr.gates.col(t).segment(2 * hd, hd).array();
    const auto o = tr.gates.col(t).segment(3 * hd, hd).array();
    tanh_c = tr.cells.col(t).unaryExpr(detail::TanhOp<Scalar>{});

    dh = d_hidden.col(t) + dh_next;
    dc = dc_next.array() + dh.array() * o * (Scalar(1) - tanh_c.array().square());

    auto col = d_pre.col(t);
    if (t > 0) {
      col.segment(hd, hd) = (dc.array() * tr.cells.col(t - 1).array() * f * (Scalar(1) - f)).matrix();
    } else {
      col.segment(hd, hd).setZero();
    }
    col.segment(0, hd) = (dc.array() * g * i * (Scalar(1) - i)).matrix();
    col.segment(2 * hd, hd) = (dc.array() * i * (Scalar(1) - g.square())).matrix();
    col.segment(3 * hd, hd) = (dh.array() * tanh_c.array() * o * (Scalar(1) - o)).matrix();

    dc_next = (dc.array() * f).matrix();
    dh_next.noalias() = p.recurrent_weights.transpose() * col;
  }

  grads.input_weights.noalias() += d_pre * inputs.transpose();
  if (steps > 1) {
    grads.recurrent_weights.noalias() +=
        d_pre.rightCols(steps - 1) * tr.hidden.leftCols(steps - 1).transpose();
  }
  grads.bias += d_pre.rowwise().sum();
  return p.input_weights.transpose() * d_pre;
}

}  // namespace gritnet
