#include "gritnet/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "gritnet/encoding.hpp"
#include "gritnet/error.hpp"
#include "gritnet/gritnet.hpp"
#include "gritnet/random.hpp"
#include "gritnet/synthetic.hpp"
#include "gritnet/text_io.hpp"
#include "gritnet/train.hpp"

namespace gritnet {

namespace fs = std::filesystem;

Dataset load_dataset(const ExperimentConfig& config) {
  ParseOptions options;
  options.deadline_day = config.deadline_day;
  EventLog log;
  if (config.data_path.empty()) {
    log = parse_event_log(generate_synthetic(config.synthetic), options);
  } else {
    std::ifstream in(config.data_path);
    if (!in) throw Error("cannot read event log " + config.data_path);
    log = parse_event_log(in, options);
  }
  Dataset d;
  d.vocab = std::move(log.vocab);
  d.records.reserve(log.records.size());
  for (auto& r : log.records) d.records.push_back(filter_pre_enrollment(std::move(r)));
  return d;
}

namespace {

LogRegModel fit_one(const Eigen::MatrixXd& x, std::span<const int> labels, double alpha, const BaselineConfig& config,
                    std::uint64_t seed) {
  LogRegOptions opt;
  opt.alpha = alpha;
  opt.learning_rate = config.learning_rate;
  opt.epochs = config.epochs;
  opt.seed = seed;
  if (config.chi2_k <= 0) return logreg_train(x, labels, opt).model;

  const int k = std::min<int>(config.chi2_k, static_cast<int>(x.cols()));
  auto selected = chi_square_select(x, labels, k);
  LogRegModel model = logreg_train(select_columns(x, selected), labels, opt).model;
  model.selected_features = std::move(selected);
  model.input_dim = x.cols();
  return model;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

}  // namespace

BaselineSweep fit_baseline_with_sweep(const Eigen::MatrixXd& x, std::span<const int> labels,
                                      const BaselineConfig& config, std::uint64_t seed) {
  BaselineSweep out;
  out.chosen_alpha = config.alphas.front();
  if (config.alphas.size() > 1) {
    FoldAssignment inner;
    bool can_split = true;
    try {
      inner = stratified_kfold(labels, config.validation_folds, derive_seed(seed, "inner"));
    } catch (const Error&) {
      can_split = false;  // too few of one class: keep the first alpha
    }
    if (can_split) {
      std::vector<Eigen::Index> fit_rows, val_rows;
      std::vector<int> fit_labels, val_labels;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (inner.fold_of[i] == 0) {
          val_rows.push_back(static_cast<Eigen::Index>(i));
          val_labels.push_back(labels[i]);
        } else {
          fit_rows.push_back(static_cast<Eigen::Index>(i));
          fit_labels.push_back(labels[i]);
        }
      }
      const Eigen::MatrixXd x_fit = take_rows(x, fit_rows);
      const Eigen::MatrixXd x_val = take_rows(x, val_rows);
      double best = -1.0;
      for (double alpha : config.alphas) {
        const auto model = fit_one(x_fit, fit_labels, alpha, config, derive_seed(seed, "sweep"));
        const Eigen::VectorXd scores = logreg_predict_rows(model, x_val);
        const double auc = roc_auc(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
                                   val_labels)
                               .auc;
        if (auc > best) {
          best = auc;
          out.chosen_alpha = alpha;
        }
      }
    }
  }
  out.model = fit_one(x, labels, out.chosen_alpha, config, derive_seed(seed, "refit"));
  return out;
}

Trainer make_baseline_trainer(const Vocabulary& vocab, const BaselineConfig& config) {
  return [&vocab, config](const CvSplit& split) {
    const Eigen::MatrixXd x_train = bow_matrix(split.train, vocab);
    const auto fit = fit_baseline_with_sweep(x_train, split.train_labels, config, split.seed);
    const Eigen::VectorXd scores = logreg_predict_rows(fit.model, bow_matrix(split.test, vocab));
    return std::vector<double>(scores.data(), scores.data() + scores.size());
  };
}

Trainer make_gritnet_trainer(const Vocabulary& vocab, const GritNetConfig& config) {
  return [&vocab, config](const CvSplit& split) {
    std::vector<EncodedSequence> train;
    train.reserve(split.train.size());
    for (const auto& r : split.train) train.push_back(encode_sequence(r, vocab, config.max_delta, OovPolicy::kError));

    GritNetDims dims;
    dims.vocab_size = static_cast<Eigen::Index>(vocab.size());
    dims.max_delta = config.max_delta;
    dims.embedding_dim = config.embedding_dim;
    dims.hidden_dim = config.hidden_dim;
    SgdOptions opt;
    opt.batch_size = config.batch_size;
    opt.learning_rate = config.learning_rate;
    opt.epochs = config.epochs;
    opt.dropout_rate = config.dropout;
    opt.seed = derive_seed(split.seed, "sgd");

    auto init = init_gritnet<double>(dims, derive_seed(split.seed, "init"), config.dropout);
    const auto trained = sgd_train(std::move(init), std::span<const EncodedSequence>(train), split.train_labels, opt);

    std::vector<double> scores;
    scores.reserve(split.test.size());
    for (const auto& r : split.test) {
      scores.push_back(
          forward(trained.model, encode_sequence(r, vocab, config.max_delta, OovPolicy::kUnknown), false).probability);
    }
    return scores;
  };
}

namespace {

std::string auc_text(std::optional<double> auc) { return auc ? format_double(*auc) : "undefined"; }

std::string mean_text(double v) { return std::isnan(v) ? "undefined" : format_double(v); }

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("error writing " + path.string());
}

std::string summary_text(const ExperimentConfig& config, const ExperimentResult& result) {
  std::ostringstream out;
  const auto& s = result.stats;
  out << "students            " << s.student_count << '\n'
      << "graduates           " << s.graduate_count << " (" << format_fixed(100.0 * s.graduation_rate, 1) << "%)\n"
      << "events per student  min " << s.min_length << ", mean " << format_fixed(s.mean_length, 1) << ", max "
      << s.max_length << '\n'
      << "unique actions      " << s.unique_actions << '\n'
      << "folds               " << config.folds << "\n\n";

  out << "mean AUC by week\n" << std::left << std::setw(6) << "week";
  for (const auto& m : config.models) out << std::right << std::setw(10) << m;
  const bool both = result.by_model.count("baseline") && result.by_model.count("gritnet");
  if (both) out << std::setw(10) << "delta";
  out << '\n';
  for (std::size_t w = 0; w < config.weeks.size(); ++w) {
    out << std::left << std::setw(6) << config.weeks[w] << std::right;
    for (const auto& m : config.models) {
      const double v = result.by_model.at(m).summary[w].mean_auc;
      out << std::setw(10) << (std::isnan(v) ? std::string("n/a") : format_fixed(v, 4));
    }
    if (both) {
      const double d = result.by_model.at("gritnet").summary[w].mean_auc -
                       result.by_model.at("baseline").summary[w].mean_auc;
      out << std::setw(10) << (std::isnan(d) ? std::string("n/a") : format_fixed(d, 4));
    }
    out << '\n';
  }
  for (const auto& m : config.models) {
    const int undefined = result.by_model.at(m).undefined_cells;
    if (undefined > 0) out << "warning: " << m << " has " << undefined << " undefined (single-class) fold cells\n";
  }
  return out.str();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  validate(config);
  const Dataset data = load_dataset(config);
  ExperimentResult result;
  result.stats = dataset_stats(data.records);
  if (progress) {
    progress("loaded " + std::to_string(data.records.size()) + " students, " + std::to_string(data.vocab.size()) +
             " actions");
  }

  const std::uint64_t cv_seed = derive_seed(config.seed, "cv");
  for (const auto& name : config.models) {
    Trainer inner = name == "baseline" ? make_baseline_trainer(data.vocab, config.baseline)
                                       : make_gritnet_trainer(data.vocab, config.gritnet);
    Trainer trainer = [&](const CvSplit& split) {
      const auto start = std::chrono::steady_clock::now();
      std::vector<double> scores;
      try {
        scores = inner(split);
      } catch (const DivergenceError& e) {
        throw DivergenceError(name + " diverged at week " + std::to_string(split.week) + ", fold " +
                              std::to_string(split.fold) + ": " + e.what());
      }
      if (progress) {
        const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
        progress(name + " week " + std::to_string(split.week) + " fold " + std::to_string(split.fold) + " done in " +
                 format_fixed(took.count(), 1) + "s");
      }
      return scores;
    };
    result.by_model.emplace(name, cross_validate_weekly(data.records, trainer, config.weeks, config.folds, cv_seed));
  }

  const fs::path dir(config.output_dir);
  fs::create_directories(dir);

  std::ostringstream cells;
  cells << "week,fold,model,auc\n";
  std::ostringstream summary;
  summary << "week,model,mean_auc,defined_folds\n";
  for (std::size_t w = 0; w < config.weeks.size(); ++w) {
    for (int fold = 0; fold < config.folds; ++fold) {
      for (const auto& m : config.models) {
        const auto& cell = result.by_model.at(m).cells[w * static_cast<std::size_t>(config.folds) +
                                                       static_cast<std::size_t>(fold)];
        cells << cell.week << ',' << cell.fold << ',' << m << ',' << auc_text(cell.auc) << '\n';
      }
    }
    for (const auto& m : config.models) {
      const auto& s = result.by_model.at(m).summary[w];
      summary << s.week << ',' << m << ',' << mean_text(s.mean_auc) << ',' << s.defined_folds << '\n';
    }
  }
  write_file(dir / kCvResultsFile, cells.str());
  write_file(dir / kCvSummaryFile, summary.str());
  write_file(dir / kSummaryTextFile, summary_text(config, result));
  write_file(dir / kConfigEchoFile, serialize_config(config));
  return result;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<WeekComparison> report(const fs::path& results_dir) {
  const fs::path summary_path = results_dir / kCvSummaryFile;
  const fs::path cells_path = results_dir / kCvResultsFile;
  if (!fs::exists(summary_path) || !fs::exists(cells_path)) {
    throw Error("missing result files; expected " + cells_path.string() + " and " + summary_path.string());
  }
  std::ifstream in(summary_path);
  std::string line;
  if (!std::getline(in, line) || line != "week,model,mean_auc,defined_folds") {
    throw Error(summary_path.string() + " has an unexpected header");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::map<int, WeekComparison> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw ParseError(line_no, "expected 4 fields in " + summary_path.string());
    const int week = parse_number<int>(f[0], "week");
    const double auc = f[2] == "undefined" ? nan : parse_number<double>(f[2], "mean_auc");
    auto [it, inserted] = rows.try_emplace(week, WeekComparison{week, nan, nan, nan});
    if (f[1] == "baseline") {
      it->second.baseline_auc = auc;
    } else if (f[1] == "gritnet") {
      it->second.gritnet_auc = auc;
    } else {
      throw ParseError(line_no, "unknown model '" + f[1] + "'");
    }
  }

  std::vector<WeekComparison> out;
  std::ostringstream csv;
  csv << "week,baseline_auc,gritnet_auc,delta_abs\n";
  for (auto& [week, row] : rows) {
    row.delta_abs = row.gritnet_auc - row.baseline_auc;
    csv << week << ',' << format_double(row.baseline_auc) << ',' << format_double(row.gritnet_auc) << ','
        << format_double(row.delta_abs) << '\n';
    out.push_back(row);
  }
  write_file(results_dir / kAucByWeekFile, csv.str());
  return out;
}

std::string format_report(const std::vector<WeekComparison>& rows) {
  auto cell = [](double v) { return std::isnan(v) ? std::string("n/a") : format_fixed(v, 4); };
  std::ostringstream out;
  out << std::left << std::setw(6) << "week" << std::right << std::setw(11) << "baseline" << std::setw(11)
      << "gritnet" << std::setw(11) << "delta" << '\n';
  for (const auto& r : rows) {
    out << std::left << std::setw(6) << r.week << std::right << std::setw(11) << cell(r.baseline_auc)
        << std::setw(11) << cell(r.gritnet_auc) << std::setw(11) << cell(r.delta_abs) << '\n';
  }
  return out.str();
}

}  // namespace gritnet
