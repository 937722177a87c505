#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace gritnet {

/// Logistic link, branching on the sign of z so neither branch overflows.
template <typename Scalar>
Scalar sigmoid(Scalar z) {
  using std::exp;
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
  const Scalar e = exp(z);
  return e / (Scalar(1) + e);
}

/// log(1 + exp(z)) without overflow.
template <typename Scalar>
Scalar softplus(Scalar z) {
  using std::exp;
  using std::log1p;
  return (z > Scalar(0) ? z : Scalar(0)) + log1p(exp(-(z > Scalar(0) ? z : -z)));
}

/// L2-regularised logistic regression over BoW counts. When
/// `selected_features` is non-empty, inputs have `input_dim` columns and
/// only the selected ones feed `theta`.
struct LogRegModel {
  Eigen::VectorXd theta;
  double bias = 0.0;
  double alpha = 0.0;
  std::vector<int> selected_features;
  Eigen::Index input_dim = 0;
};

struct LogRegOptions {
  double alpha = 0.0;
  /// <= 0 picks 1/L, L the Lipschitz constant of the objective's gradient.
  double learning_rate = 0.0;
  int epochs = 2000;
  /// Stop once the gradient's infinity norm drops below this.
  double gradient_tolerance = 1e-10;
  std::uint64_t seed = 0;
};

struct LogRegFit {
  LogRegModel model;
  std::vector<double> loss_history;
};

/// Objective minimised by training:
///   mean_i BCE(sigmoid(theta . x_i + bias), y_i) + (alpha / M) * |theta|^2.
/// The bias is not penalised.
double logreg_objective(const Eigen::MatrixXd& x, std::span<const int> labels, const Eigen::VectorXd& theta,
                        double bias, double alpha);

/// Gradient of logreg_objective; the last entry is d/d bias.
Eigen::VectorXd logreg_gradient(const Eigen::MatrixXd& x, std::span<const int> labels, const Eigen::VectorXd& theta,
                                double bias, double alpha);

/// Full-batch gradient descent from a tiny seeded theta and the training
/// log-odds as bias. Throws DivergenceError on a non-finite or
/// increasing loss.
LogRegFit logreg_train(const Eigen::MatrixXd& x, std::span<const int> labels, const LogRegOptions& options);

double logreg_predict(const LogRegModel& model, const Eigen::Ref<const Eigen::VectorXd>& features);
Eigen::VectorXd logreg_predict_rows(const LogRegModel& model, const Eigen::MatrixXd& x);

/// Pearson chi-square of each column's (count > 0) indicator against the label.
/// Columns with an empty margin score 0.
Eigen::VectorXd chi_square_scores(const Eigen::MatrixXd& x, std::span<const int> labels);

/// Indices of the k highest scores, ties to the lower index, returned in
/// rank order.
std::vector<int> chi_square_select(const Eigen::MatrixXd& x, std::span<const int> labels, int k);

/// Keeps the listed columns of x, in order.
Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, std::span<const int> columns);

/// Text form: N, alpha, bias, then N theta values, one per line, shortest
/// round-trip decimal. A trailing "selected <input_dim>" line followed by N
/// column indices is present only when feature selection was used.
void save_logreg(std::ostream& out, const LogRegModel& model);
LogRegModel load_logreg(std::istream& in);

}  // namespace gritnet
