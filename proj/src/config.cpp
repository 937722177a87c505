#include "gritnet/config.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "gritnet/error.hpp"
#include "gritnet/text_io.hpp"

namespace gritnet {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.emplace_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values, const std::function<std::string(const T&)>& fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += fmt(values[i]);
  }
  return out;
}

struct Field {
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view)> set;
};

template <typename T>
Field number_field(const char* key, T ExperimentConfig::*member) {
  return {key,
          [member](const ExperimentConfig& c) {
            if constexpr (std::is_floating_point_v<T>) return format_double(c.*member);
            else return std::to_string(c.*member);
          },
          [member, key](ExperimentConfig& c, std::string_view v) { c.*member = parse_number<T>(v, key); }};
}

template <typename Outer, typename T>
Field nested_number(const char* key, Outer ExperimentConfig::*outer, T Outer::*member) {
  return {key,
          [outer, member](const ExperimentConfig& c) {
            if constexpr (std::is_floating_point_v<T>) return format_double(c.*outer.*member);
            else return std::to_string(c.*outer.*member);
          },
          [outer, member, key](ExperimentConfig& c, std::string_view v) {
            c.*outer.*member = parse_number<T>(v, key);
          }};
}

std::vector<Field> synthetic_fields() {
  using E = ExperimentConfig;
  return {
      nested_number("synthetic.student_count", &E::synthetic, &SyntheticSpec::student_count),
      nested_number("synthetic.graduation_rate", &E::synthetic, &SyntheticSpec::graduation_rate_target),
      nested_number("synthetic.order_signal_strength", &E::synthetic, &SyntheticSpec::order_signal_strength),
      nested_number("synthetic.horizon_weeks", &E::synthetic, &SyntheticSpec::horizon_weeks),
      nested_number("synthetic.seed", &E::synthetic, &SyntheticSpec::seed),
      {"synthetic.curriculum",
       [](const E& c) { return join<std::string>(c.synthetic.curriculum, [](const std::string& s) { return s; }); },
       [](E& c, std::string_view v) { c.synthetic.curriculum = split_list(v); }},
  };
}

std::vector<Field> all_fields() {
  using E = ExperimentConfig;
  std::vector<Field> f = {
      {"data.path", [](const E& c) { return c.data_path; }, [](E& c, std::string_view v) { c.data_path = v; }},
      number_field("data.deadline_day", &E::deadline_day),
  };
  for (auto& s : synthetic_fields()) f.push_back(std::move(s));
  std::vector<Field> rest = {
      {"eval.weeks", [](const E& c) { return join<int>(c.weeks, [](const int& w) { return std::to_string(w); }); },
       [](E& c, std::string_view v) {
         c.weeks.clear();
         for (const auto& w : split_list(v)) c.weeks.push_back(parse_number<int>(w, "eval.weeks"));
       }},
      number_field("eval.folds", &E::folds),
      {"eval.models", [](const E& c) { return join<std::string>(c.models, [](const std::string& s) { return s; }); },
       [](E& c, std::string_view v) { c.models = split_list(v); }},
      {"baseline.alphas",
       [](const E& c) { return join<double>(c.baseline.alphas, [](const double& a) { return format_double(a); }); },
       [](E& c, std::string_view v) {
         c.baseline.alphas.clear();
         for (const auto& a : split_list(v)) c.baseline.alphas.push_back(parse_number<double>(a, "baseline.alphas"));
       }},
      nested_number("baseline.epochs", &E::baseline, &BaselineConfig::epochs),
      nested_number("baseline.learning_rate", &E::baseline, &BaselineConfig::learning_rate),
      nested_number("baseline.chi2_k", &E::baseline, &BaselineConfig::chi2_k),
      nested_number("baseline.validation_folds", &E::baseline, &BaselineConfig::validation_folds),
      nested_number("gritnet.embedding_dim", &E::gritnet, &GritNetConfig::embedding_dim),
      nested_number("gritnet.hidden_dim", &E::gritnet, &GritNetConfig::hidden_dim),
      nested_number("gritnet.max_delta", &E::gritnet, &GritNetConfig::max_delta),
      nested_number("gritnet.batch_size", &E::gritnet, &GritNetConfig::batch_size),
      nested_number("gritnet.learning_rate", &E::gritnet, &GritNetConfig::learning_rate),
      nested_number("gritnet.epochs", &E::gritnet, &GritNetConfig::epochs),
      nested_number("gritnet.dropout", &E::gritnet, &GritNetConfig::dropout),
      {"output.dir", [](const E& c) { return c.output_dir; }, [](E& c, std::string_view v) { c.output_dir = v; }},
      number_field("experiment.seed", &E::seed),
  };
  for (auto& s : rest) f.push_back(std::move(s));
  return f;
}

struct Entry {
  std::string value;
  std::size_t line;
};

std::map<std::string, Entry> read_entries(std::string_view text) {
  std::map<std::string, Entry> entries;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ParseError(line_no, "empty key");
    if (!entries.emplace(key, Entry{std::string(trim(line.substr(eq + 1))), line_no}).second) {
      throw ParseError(line_no, "duplicate key '" + key + "'");
    }
  }
  return entries;
}

void apply(std::map<std::string, Entry>& entries, const std::vector<Field>& fields, ExperimentConfig& c) {
  for (const auto& f : fields) {
    auto it = entries.find(f.key);
    if (it == entries.end()) continue;
    try {
      f.set(c, it->second.value);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(it->second.line, e.what());
    }
    entries.erase(it);
  }
  if (!entries.empty()) {
    const auto& [key, entry] = *entries.begin();
    throw ParseError(entry.line, "unknown key '" + key + "'");
  }
}

std::string serialize(const ExperimentConfig& c, const std::vector<Field>& fields) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields) {
    const std::string key(f.key);
    const std::string sec = key.substr(0, key.find('.'));
    if (sec != section) {
      if (!section.empty()) out << '\n';
      out << "# " << sec << '\n';
      section = sec;
    }
    out << key << " = " << f.get(c) << '\n';
  }
  return out.str();
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  auto entries = read_entries(text);
  const bool has_synthetic_seed = entries.count("synthetic.seed") > 0;
  ExperimentConfig c;
  apply(entries, all_fields(), c);
  if (!has_synthetic_seed) c.synthetic.seed = derive_seed(c.seed, "synthetic");
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& config) { return serialize(config, all_fields()); }

SyntheticSpec parse_synthetic_spec(std::string_view text) {
  auto entries = read_entries(text);
  ExperimentConfig c;
  apply(entries, synthetic_fields(), c);
  validate(c.synthetic);
  return c.synthetic;
}

std::string serialize_synthetic_spec(const SyntheticSpec& spec) {
  ExperimentConfig c;
  c.synthetic = spec;
  return serialize(c, synthetic_fields());
}

void validate(const ExperimentConfig& c) {
  if (c.data_path.empty()) validate(c.synthetic);
  if (c.weeks.empty()) throw Error("eval.weeks must not be empty");
  for (std::size_t i = 0; i < c.weeks.size(); ++i) {
    if (c.weeks[i] < 1) throw Error("eval.weeks must be positive");
    if (i > 0 && c.weeks[i] <= c.weeks[i - 1]) throw Error("eval.weeks must be strictly increasing");
  }
  if (c.folds < 2) throw Error("eval.folds must be at least 2");
  if (c.models.empty()) throw Error("eval.models must not be empty");
  std::set<std::string> seen;
  for (const auto& m : c.models) {
    if (m != "baseline" && m != "gritnet") throw Error("unknown model '" + m + "'");
    if (!seen.insert(m).second) throw Error("model listed twice: " + m);
  }
  if (c.baseline.alphas.empty()) throw Error("baseline.alphas must not be empty");
  for (double a : c.baseline.alphas) {
    if (!(a >= 0.0)) throw Error("baseline.alphas must be non-negative");
  }
  if (c.baseline.epochs < 1) throw Error("baseline.epochs must be positive");
  if (c.baseline.chi2_k < 0) throw Error("baseline.chi2_k must be non-negative");
  if (c.baseline.validation_folds < 2) throw Error("baseline.validation_folds must be at least 2");
  if (c.gritnet.embedding_dim < 1 || c.gritnet.hidden_dim < 1) throw Error("gritnet dimensions must be positive");
  if (c.gritnet.max_delta < 0) throw Error("gritnet.max_delta must be non-negative");
  if (c.gritnet.batch_size < 1) throw Error("gritnet.batch_size must be positive");
  if (c.gritnet.epochs < 0) throw Error("gritnet.epochs must be non-negative");
  if (!(c.gritnet.dropout >= 0.0 && c.gritnet.dropout < 1.0)) throw Error("gritnet.dropout must be in [0, 1)");
  if (c.output_dir.empty()) throw Error("output.dir must not be empty");
}

}  // namespace gritnet
