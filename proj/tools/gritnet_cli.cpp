// gritnet: synthetic data generation, weekly cross-validated experiments,
// result reports and the gradient-check suite.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gritnet/config.hpp"
#include "gritnet/error.hpp"
#include "gritnet/experiment.hpp"
#include "gritnet/gradcheck.hpp"
#include "gritnet/synthetic.hpp"
#include "gritnet/text_io.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gritnet::Error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cmd_generate(const std::string& spec_path, const std::string& out_path, bool print_spec) {
  gritnet::SyntheticSpec spec;
  if (!spec_path.empty()) spec = gritnet::parse_synthetic_spec(read_file(spec_path));
  if (print_spec) {
    std::cout << gritnet::serialize_synthetic_spec(spec);
    return 0;
  }
  const std::string bytes = gritnet::generate_synthetic(spec);
  if (out_path.empty() || out_path == "-") {
    std::cout << bytes;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw gritnet::Error("cannot write " + out_path);
    out << bytes;
  }
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, bool quiet, bool print_config) {
  gritnet::ExperimentConfig config =
      config_path.empty() ? gritnet::parse_config("") : gritnet::load_config(config_path);
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (print_config) {
    std::cout << gritnet::serialize_config(config);
    return 0;
  }
  gritnet::ProgressFn progress;
  if (!quiet) progress = [](const std::string& msg) { std::cerr << msg << '\n'; };
  gritnet::run_experiment(config, progress);
  std::cout << read_file((std::filesystem::path(config.output_dir) / gritnet::kSummaryTextFile).string());
  return 0;
}

int cmd_report(const std::string& results_dir) {
  const auto rows = gritnet::report(results_dir);
  std::cout << gritnet::format_report(rows);
  return 0;
}

int cmd_gradcheck(const gritnet::GradcheckOptions& options, bool verbose) {
  const auto report = gritnet::run_gradient_suite(options);
  for (const auto& t : report.trials) {
    std::cout << "trial " << t.trial << " T=" << t.valid_length << " pad=" << t.pad_length
              << (t.training ? " dropout" : " inference") << " worst relative error " << t.worst << '\n';
    if (verbose) {
      for (const auto& b : t.blocks) std::cout << "  " << b.name << ' ' << b.relative_error << '\n';
    }
  }
  std::cout << (report.passed ? "PASS" : "FAIL") << ": worst relative error " << report.worst << " (tolerance "
            << options.tolerance << ")\n";
  return report.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GritNet student graduation prediction: data generation, experiments and checks"};
  app.require_subcommand(1);

  std::string spec_path, gen_out;
  bool print_spec = false;
  auto* gen = app.add_subcommand("generate", "Write a synthetic JSONL event log");
  gen->add_option("--spec", spec_path, "Key-value file with synthetic.* keys (defaults if omitted)");
  gen->add_option("--out", gen_out, "Output JSONL path ('-' or omitted for stdout)");
  gen->add_flag("--print-spec", print_spec, "Print the effective spec and exit");

  std::string config_path, run_out;
  bool quiet = false, print_config = false;
  auto* run = app.add_subcommand("run", "Weekly stratified cross-validation of the baseline and GritNet");
  run->add_option("--config", config_path, "Experiment config file (defaults if omitted)");
  run->add_option("--out", run_out, "Results directory (overrides output.dir)");
  run->add_flag("--quiet", quiet, "Suppress progress messages");
  run->add_flag("--print-config", print_config, "Print the effective config and exit");

  std::string results_dir;
  auto* rep = app.add_subcommand("report", "Compare mean AUC by week and write auc_by_week.csv");
  rep->add_option("--results", results_dir, "Results directory written by 'run'")->required();

  gritnet::GradcheckOptions gc;
  bool gc_verbose = false;
  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of every GritNet gradient block");
  grad->add_option("--trials", gc.trials, "Number of random models")->capture_default_str();
  grad->add_option("--seed", gc.seed, "Seed")->capture_default_str();
  grad->add_option("--embedding-dim", gc.embedding_dim, "Embedding dimension")->capture_default_str();
  grad->add_option("--hidden-dim", gc.hidden_dim, "LSTM cells per direction")->capture_default_str();
  grad->add_option("--max-length", gc.max_length, "Longest random sequence")->capture_default_str();
  grad->add_option("--step", gc.step, "Finite-difference step")->capture_default_str();
  grad->add_option("--tolerance", gc.tolerance, "Maximum relative error")->capture_default_str();
  grad->add_flag("--verbose", gc_verbose, "Print every block");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_generate(spec_path, gen_out, print_spec);
    if (*run) return cmd_run(config_path, run_out, quiet, print_config);
    if (*rep) return cmd_report(results_dir);
    if (*grad) return cmd_gradcheck(gc, gc_verbose);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
