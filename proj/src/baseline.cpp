#include "gritnet/baseline.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>

#include "gritnet/error.hpp"
#include "gritnet/random.hpp"
#include "gritnet/text_io.hpp"

namespace gritnet {

namespace {

void check_shapes(const Eigen::MatrixXd& x, std::span<const int> labels) {
  if (x.rows() == 0) throw Error("logistic regression needs at least one example");
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw Error("feature rows (" + std::to_string(x.rows()) + ") and labels (" + std::to_string(labels.size()) +
                ") differ");
  }
}

Eigen::VectorXd label_vector(std::span<const int> labels) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) y[static_cast<Eigen::Index>(i)] = labels[i] ? 1.0 : 0.0;
  return y;
}

double objective(const Eigen::VectorXd& logits, const Eigen::VectorXd& y, const Eigen::VectorXd& theta,
                 double alpha) {
  const double m = static_cast<double>(logits.size());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) sum += softplus(logits[i]) - y[i] * logits[i];
  return sum / m + alpha / m * theta.squaredNorm();
}

// Largest eigenvalue of [X 1]^T [X 1] / M, for the gradient's Lipschitz bound.
double gram_spectral_radius(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z(x.rows(), x.cols() + 1);
  z << x, Eigen::VectorXd::Ones(x.rows());
  const Eigen::MatrixXd gram = (z.transpose() * z) / static_cast<double>(x.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

}  // namespace

double logreg_objective(const Eigen::MatrixXd& x, std::span<const int> labels, const Eigen::VectorXd& theta,
                        double bias, double alpha) {
  check_shapes(x, labels);
  const Eigen::VectorXd logits = (x * theta).array() + bias;
  return objective(logits, label_vector(labels), theta, alpha);
}

Eigen::VectorXd logreg_gradient(const Eigen::MatrixXd& x, std::span<const int> labels, const Eigen::VectorXd& theta,
                                double bias, double alpha) {
  check_shapes(x, labels);
  const double m = static_cast<double>(x.rows());
  const Eigen::VectorXd logits = (x * theta).array() + bias;
  const Eigen::VectorXd residual = logits.unaryExpr([](double z) { return sigmoid(z); }) - label_vector(labels);
  Eigen::VectorXd grad(theta.size() + 1);
  grad.head(theta.size()) = x.transpose() * residual / m + (2.0 * alpha / m) * theta;
  grad[theta.size()] = residual.sum() / m;
  return grad;
}

LogRegFit logreg_train(const Eigen::MatrixXd& x, std::span<const int> labels, const LogRegOptions& options) {
  check_shapes(x, labels);
  if (options.alpha < 0.0) throw Error("alpha must be non-negative");
  const double m = static_cast<double>(x.rows());
  const Eigen::VectorXd y = label_vector(labels);

  double lr = options.learning_rate;
  if (lr <= 0.0) lr = 1.0 / (0.25 * gram_spectral_radius(x) + 2.0 * options.alpha / m);

  LogRegFit fit;
  LogRegModel& model = fit.model;
  model.alpha = options.alpha;
  model.input_dim = x.cols();
  Rng rng(options.seed);
  model.theta = Eigen::VectorXd::NullaryExpr(x.cols(), [&] { return rng.uniform(-1e-3, 1e-3); });
  const double base_rate = y.mean();
  model.bias = base_rate > 0.0 && base_rate < 1.0 ? std::log(base_rate / (1.0 - base_rate)) : 0.0;

  Eigen::VectorXd logits = (x * model.theta).array() + model.bias;
  double loss = objective(logits, y, model.theta, options.alpha);
  fit.loss_history.push_back(loss);
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const Eigen::VectorXd residual = logits.unaryExpr([](double z) { return sigmoid(z); }) - y;
    const Eigen::VectorXd g_theta = x.transpose() * residual / m + (2.0 * options.alpha / m) * model.theta;
    const double g_bias = residual.sum() / m;
    if (std::max(g_theta.cwiseAbs().maxCoeff(), std::abs(g_bias)) < options.gradient_tolerance) break;

    model.theta -= lr * g_theta;
    model.bias -= lr * g_bias;
    logits = (x * model.theta).array() + model.bias;
    const double next = objective(logits, y, model.theta, options.alpha);
    if (!std::isfinite(next)) {
      throw DivergenceError("logistic regression loss became non-finite at epoch " + std::to_string(epoch));
    }
    if (next > loss + 1e-12 * std::abs(loss) + 1e-15) {
      throw DivergenceError("logistic regression loss increased at epoch " + std::to_string(epoch) +
                            "; use a smaller learning rate");
    }
    loss = next;
    fit.loss_history.push_back(loss);
  }
  return fit;
}

double logreg_predict(const LogRegModel& model, const Eigen::Ref<const Eigen::VectorXd>& features) {
  if (features.size() != model.input_dim) {
    throw Error("feature dimension " + std::to_string(features.size()) + " does not match model dimension " +
                std::to_string(model.input_dim));
  }
  double z = model.bias;
  if (model.selected_features.empty()) {
    z += model.theta.dot(features);
  } else {
    for (std::size_t j = 0; j < model.selected_features.size(); ++j) {
      z += model.theta[static_cast<Eigen::Index>(j)] * features[model.selected_features[j]];
    }
  }
  return sigmoid(z);
}

Eigen::VectorXd logreg_predict_rows(const LogRegModel& model, const Eigen::MatrixXd& x) {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = logreg_predict(model, x.row(i).transpose());
  return out;
}

Eigen::VectorXd chi_square_scores(const Eigen::MatrixXd& x, std::span<const int> labels) {
  check_shapes(x, labels);
  const double n = static_cast<double>(x.rows());
  Eigen::VectorXd scores(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    // a: present & positive, b: present & negative, c: absent & positive, d: absent & negative
    double a = 0, b = 0, c = 0, d = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const bool present = x(i, j) > 0.0;
      const bool pos = labels[static_cast<std::size_t>(i)] != 0;
      (present ? (pos ? a : b) : (pos ? c : d)) += 1.0;
    }
    const double denom = (a + b) * (c + d) * (a + c) * (b + d);
    const double cross = a * d - b * c;
    scores[j] = denom > 0.0 ? n * cross * cross / denom : 0.0;
  }
  return scores;
}

std::vector<int> chi_square_select(const Eigen::MatrixXd& x, std::span<const int> labels, int k) {
  if (k < 1 || k > x.cols()) throw Error("chi_square_select: k must be in [1, " + std::to_string(x.cols()) + "]");
  const Eigen::VectorXd scores = chi_square_scores(x, labels);
  std::vector<int> idx(static_cast<std::size_t>(x.cols()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return scores[a] > scores[b]; });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, std::span<const int> columns) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = x.col(columns[j]);
  return out;
}

void save_logreg(std::ostream& out, const LogRegModel& model) {
  out << model.theta.size() << '\n' << format_double(model.alpha) << '\n' << format_double(model.bias) << '\n';
  for (Eigen::Index j = 0; j < model.theta.size(); ++j) out << format_double(model.theta[j]) << '\n';
  if (!model.selected_features.empty()) {
    out << "selected " << model.input_dim << '\n';
    for (int f : model.selected_features) out << f << '\n';
  }
}

LogRegModel load_logreg(std::istream& in) {
  LogRegModel model;
  const auto n = read_number_line<Eigen::Index>(in, "theta size");
  if (n < 0) throw Error("negative theta size");
  model.alpha = read_number_line<double>(in, "alpha");
  model.bias = read_number_line<double>(in, "bias");
  model.theta.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) model.theta[j] = read_number_line<double>(in, "theta");
  model.input_dim = n;

  std::string line;
  if (std::getline(in, line) && line.rfind("selected ", 0) == 0) {
    model.input_dim = parse_number<Eigen::Index>(std::string_view(line).substr(9), "input dimension");
    for (Eigen::Index j = 0; j < n; ++j) {
      const int f = read_number_line<int>(in, "selected feature");
      if (f < 0 || f >= model.input_dim) throw Error("selected feature index out of range");
      model.selected_features.push_back(f);
    }
  }
  return model;
}

}  // namespace gritnet
