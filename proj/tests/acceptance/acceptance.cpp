// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.
//
//   acceptance <work-dir> [criterion numbers...]
//
// Criteria 4 and 7 run the gritnet CLI on the default synthetic config
// (2000 students, weeks 1-8, 5 folds); on one core that takes a while.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "gritnet/config.hpp"
#include "gritnet/eval.hpp"
#include "gritnet/experiment.hpp"
#include "gritnet/gradcheck.hpp"
#include "gritnet/gritnet.hpp"
#include "gritnet/random.hpp"
#include "gritnet/text_io.hpp"

namespace fs = std::filesystem;
using namespace gritnet;

namespace {

// Pinned tolerances.
constexpr int kGradTrials = 20;
constexpr double kGradTolerance = 1e-5;
constexpr double kGradSeconds = 60.0;
constexpr int kAucInstances = 200;
constexpr int kAucMaxSize = 200;
constexpr int kRandomScoreSamples = 10000;
constexpr double kRandomScoreTolerance = 0.02;
constexpr int kPaddingTrials = 100;
constexpr int kMaxPadding = 50;
constexpr double kEarlyGap = 0.03;
constexpr double kLateGap = 0.03;
constexpr double kSeparationSeconds = 30.0 * 60.0;
constexpr double kBaselineFloor = 0.90;
constexpr int kLabelVectors = 50;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(GRITNET_CLI_PATH) + " " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return status == 0 ? 0 : (status == -1 ? -1 : WEXITSTATUS(status));
}

// week -> model -> mean AUC
std::map<int, std::map<std::string, double>> read_summary(const fs::path& dir) {
  std::map<int, std::map<std::string, double>> out;
  std::istringstream in(slurp(dir / kCvSummaryFile));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 4) continue;
    out[std::stoi(f[0])][f[1]] = f[2] == "undefined" ? std::nan("") : parse_number<double>(f[2], "mean_auc");
  }
  return out;
}

Outcome gradient_correctness() {
  GradcheckOptions o;
  o.trials = kGradTrials;
  o.embedding_dim = 4;
  o.hidden_dim = 3;
  o.max_length = 6;
  o.tolerance = kGradTolerance;
  const auto t0 = Clock::now();
  const auto report = run_gradient_suite(o);
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << report.trials.size() << " trials, worst relative error " << report.worst << " (<= " << kGradTolerance
    << "), " << format_fixed(secs, 2) << "s (< " << kGradSeconds << "s)";
  return {report.passed && static_cast<int>(report.trials.size()) >= kGradTrials && secs < kGradSeconds, d.str()};
}

Outcome auc_oracle() {
  Rng rng(derive_seed(2024, "auc"));
  int mismatches = 0;
  for (int trial = 0; trial < kAucInstances; ++trial) {
    const auto m = 2 + rng.below(kAucMaxSize - 1);
    std::vector<double> s;
    std::vector<int> y;
    for (std::uint64_t i = 0; i < m; ++i) {
      y.push_back(rng.bernoulli(0.5) ? 1 : 0);
      s.push_back(static_cast<double>(rng.below(trial % 3 == 0 ? 1000 : 10)) / 10.0);  // ties
    }
    y[0] = 1;
    y[1] = 0;
    long long twice_wins = 0, pairs = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      for (std::size_t j = 0; j < y.size(); ++j) {
        if (y[i] != 1 || y[j] != 0) continue;
        ++pairs;
        twice_wins += s[i] > s[j] ? 2 : (s[i] == s[j] ? 1 : 0);
      }
    }
    const double expected = static_cast<double>(twice_wins) / (2.0 * static_cast<double>(pairs));
    if (roc_auc(s, y).auc != expected) ++mismatches;
  }

  std::vector<double> s;
  std::vector<int> y;
  for (int i = 0; i < kRandomScoreSamples; ++i) {
    s.push_back(rng.uniform());
    y.push_back(rng.bernoulli(0.5) ? 1 : 0);
  }
  const double random_auc = roc_auc(s, y).auc;
  std::ostringstream d;
  d << mismatches << "/" << kAucInstances << " instances differ from the pairwise statistic; random scores AUC "
    << format_fixed(random_auc, 4) << " (0.5 +/- " << kRandomScoreTolerance << ")";
  return {mismatches == 0 && std::abs(random_auc - 0.5) <= kRandomScoreTolerance, d.str()};
}

Outcome padding_invariance() {
  Rng rng(derive_seed(2024, "padding"));
  int changed = 0;
  double worst = 0.0;
  for (int trial = 0; trial < kPaddingTrials; ++trial) {
    const GritNetDims dims{static_cast<Eigen::Index>(2 + rng.below(20)), static_cast<int>(1 + rng.below(30)),
                           static_cast<Eigen::Index>(1 + rng.below(16)), static_cast<Eigen::Index>(1 + rng.below(12))};
    const auto model = init_gritnet<double>(dims, rng.next(), 0.1);
    EncodedSequence seq;
    const auto len = rng.below(40);
    for (std::uint64_t t = 0; t < len; ++t) {
      seq.tokens.push_back({static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(dims.vocab_size + 1))),
                            static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(dims.max_delta + 1)))});
    }
    seq.valid_length = seq.tokens.size();
    const std::size_t pad = 1 + rng.below(kMaxPadding);
    const auto padded = pre_pad_batch(std::span<const EncodedSequence>(&seq, 1), seq.valid_length + pad)[0];
    const double a = forward(model, seq, false).probability;
    const double b = forward(model, padded, false).probability;
    if (a != b) ++changed;
    worst = std::max(worst, std::abs(a - b));
  }
  std::ostringstream d;
  d << changed << "/" << kPaddingTrials << " outputs changed, max |difference| " << worst << " (must be 0)";
  return {changed == 0, d.str()};
}

fs::path default_config(const fs::path& work) {
  const fs::path cfg = work / "default.cfg";
  std::ofstream(cfg) << "eval.weeks = 1, 2, 3, 4, 5, 6, 7, 8\neval.folds = 5\n";
  return cfg;
}

Outcome separation(const fs::path& work) {
  const fs::path out = work / "default_run_a";
  fs::remove_all(out);
  const auto t0 = Clock::now();
  const int rc = run_cli("run --quiet --config \"" + default_config(work).string() + "\" --out \"" + out.string() + "\"",
                         work / "default_run_a.log");
  const double secs = seconds_since(t0);
  if (rc != 0) return {false, "gritnet run exited with " + std::to_string(rc)};

  const auto summary = read_summary(out);
  bool pass = secs < kSeparationSeconds;
  std::ostringstream d;
  for (int week : {1, 2, 3}) {
    const double gap = summary.at(week).at("gritnet") - summary.at(week).at("baseline");
    pass = pass && gap >= kEarlyGap;
    d << "week " << week << " gap " << format_fixed(gap, 4) << ", ";
  }
  const int last = summary.rbegin()->first;
  const double late = summary.at(last).at("gritnet") - summary.at(last).at("baseline");
  pass = pass && std::abs(late) <= kLateGap;
  d << "week " << last << " gap " << format_fixed(late, 4) << " (early >= " << kEarlyGap << ", late within "
    << kLateGap << "), " << format_fixed(secs / 60.0, 1) << " min";
  return {pass, d.str()};
}

Outcome baseline_sanity(const fs::path& work) {
  ExperimentConfig c;
  c.synthetic.order_signal_strength = 0.0;
  c.models = {"baseline"};
  c.output_dir = (work / "count_only").string();
  const auto result = run_experiment(c);
  double worst = 1.0;
  for (const auto& w : result.by_model.at("baseline").summary) worst = std::min(worst, w.mean_auc);
  std::ostringstream d;
  d << "lowest weekly mean AUC " << format_fixed(worst, 4) << " over weeks 1-8 (>= " << kBaselineFloor << ")";
  return {worst >= kBaselineFloor, d.str()};
}

Outcome stratification() {
  Rng rng(derive_seed(2024, "folds"));
  int checked = 0, violations = 0;
  for (int k : {2, 5, 10}) {
    for (int v = 0; v < kLabelVectors; ++v) {
      std::vector<int> y;
      const double rate = rng.uniform(0.1, 0.9);
      const auto m = static_cast<std::size_t>(2 * k + 10 + rng.below(500));
      for (std::size_t i = 0; i < m; ++i) y.push_back(rng.bernoulli(rate) ? 1 : 0);
      // Top up either class to at least k members.
      for (std::size_t i = 0; std::count(y.begin(), y.end(), 1) < k; ++i) y[i] = 1;
      for (std::size_t i = m - 1; std::count(y.begin(), y.end(), 0) < k; --i) y[i] = 0;
      const auto a = stratified_kfold(y, k, rng.next());
      std::vector<int> pos(static_cast<std::size_t>(k)), neg(static_cast<std::size_t>(k));
      for (std::size_t i = 0; i < m; ++i) ++(y[i] ? pos : neg)[static_cast<std::size_t>(a.fold_of[i])];
      const auto spread = [](const std::vector<int>& c) {
        return *std::max_element(c.begin(), c.end()) - *std::min_element(c.begin(), c.end());
      };
      if (spread(pos) > 1 || spread(neg) > 1) ++violations;
      ++checked;
    }
  }
  std::ostringstream d;
  d << violations << "/" << checked << " label vectors with a per-fold class count spread above 1";
  return {violations == 0, d.str()};
}

Outcome determinism(const fs::path& work) {
  const fs::path a = work / "default_run_a";
  const fs::path b = work / "default_run_b";
  if (!fs::exists(a / kCvResultsFile)) {
    const int rc = run_cli("run --quiet --config \"" + default_config(work).string() + "\" --out \"" + a.string() + "\"",
                           work / "default_run_a.log");
    if (rc != 0) return {false, "first gritnet run exited with " + std::to_string(rc)};
  }
  fs::remove_all(b);
  const int rc = run_cli("run --quiet --config \"" + default_config(work).string() + "\" --out \"" + b.string() + "\"",
                         work / "default_run_b.log");
  if (rc != 0) return {false, "second gritnet run exited with " + std::to_string(rc)};
  bool same = true;
  std::ostringstream d;
  for (const char* f : {kCvResultsFile, kCvSummaryFile}) {
    const bool eq = slurp(a / f) == slurp(b / f) && !slurp(a / f).empty();
    same = same && eq;
    d << f << (eq ? " identical" : " DIFFERS") << "; ";
  }
  d << "two separate CLI runs";
  return {same, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "gritnet_acceptance";
  fs::create_directories(work);
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::atoi(argv[i]));

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"AUC oracle equivalence", auc_oracle},
      {"padding invariance", padding_invariance},
      {"order-sensitivity separation", [&] { return separation(work); }},
      {"baseline sanity on count-only data", [&] { return baseline_sanity(work); }},
      {"stratification balance", stratification},
      {"end-to-end determinism", [&] { return determinism(work); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(number)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << number << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
