// poolplan: design planner for Dorfman pooled screening under
// group-size-dependent test accuracy.
//
// Subcommands: optimize, table1, validate, screen, nstar, casestudy.
// Exit codes: 0 success, 1 usage error, 2 check mismatch, 3 no convergence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "poolplan/model.hpp"
#include "poolplan/optimizer.hpp"
#include "poolplan/screening.hpp"
#include "poolplan/validation.hpp"

using nlohmann::json;
using namespace poolplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCheckMismatch = 2;
constexpr int kExitNoConvergence = 3;

const char kDefaultGolden[] =
#include "table1_golden.inc"
    ;

struct CheckMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// small shared plumbing

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  out << text;
}

json load_config_object(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json data;
  try {
    data = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed config JSON: ") + e.what());
  }
  if (!data.is_object()) throw std::invalid_argument("config must be a JSON object");
  return data;
}

// Validates the config against the known keys for this command; flags given
// on the command line keep priority over config values.
class ConfigMerge {
 public:
  ConfigMerge(CLI::App* cmd, const std::string& config_path) : cmd_(cmd) {
    if (config_path.empty()) return;
    data_ = load_config_object(config_path);
    loaded_ = true;
  }

  template <typename T>
  void field(const char* flag, const char* key, T& var) {
    keys_.push_back(key);
    if (!loaded_ || cmd_->count(flag) > 0) return;
    if (!data_.contains(key)) return;
    try {
      var = data_[key].get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument(std::string("config field \"") + key + "\" has the wrong type");
    }
  }

  // Model fields may be given as embedded objects or as JSON strings.
  void model_field(const char* flag, const char* key, std::string& var) {
    keys_.push_back(key);
    if (!loaded_ || cmd_->count(flag) > 0) return;
    if (!data_.contains(key)) return;
    const json& value = data_[key];
    var = value.is_string() ? value.get<std::string>() : value.dump();
  }

  template <typename T>
  void optional_field(const char* flag, const char* key, std::optional<T>& var) {
    keys_.push_back(key);
    if (!loaded_ || cmd_->count(flag) > 0) return;
    if (!data_.contains(key)) return;
    var = data_[key].get<T>();
  }

  // Call after all fields are declared; rejects anything unrecognized.
  void finish(const std::string& command) const {
    if (!loaded_) return;
    for (const auto& item : data_.items()) {
      if (item.key() == "command") {
        if (!item.value().is_string() || item.value().get<std::string>() != command)
          throw std::invalid_argument("config \"command\" does not match " + command);
        continue;
      }
      if (std::find(keys_.begin(), keys_.end(), item.key()) == keys_.end())
        throw std::invalid_argument("unknown config field \"" + item.key() + "\" for " + command);
    }
  }

 private:
  CLI::App* cmd_;
  json data_;
  bool loaded_ = false;
  std::vector<std::string> keys_;
};

MisclassModel parse_model(const std::string& se_json, const std::string& sp_json) {
  return MisclassModel{family_from_json(se_json), family_from_json(sp_json)};
}

json model_as_json(const MisclassModel& model) {
  json out;
  out["se"] = json::parse(family_to_json(model.se));
  out["sp"] = json::parse(family_to_json(model.sp));
  return out;
}

json optional_count(const std::optional<std::int64_t>& value) {
  return value ? json(*value) : json(nullptr);
}

// ---------------------------------------------------------------------------
// optimize

struct OptimizeArgs {
  double p = 0.0;
  int k_max = 25;
  std::string model = R"({"family":"perfect"})";
  std::string sp_model = R"({"family":"perfect"})";
  std::optional<double> delta_se;
  std::optional<double> delta_sp;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out;
  std::string config;
};

int run_optimize(CLI::App* cmd, OptimizeArgs& args) {
  ConfigMerge merge(cmd, args.config);
  merge.field("--p", "p", args.p);
  merge.field("--k-max", "k_max", args.k_max);
  merge.model_field("--model", "model", args.model);
  merge.model_field("--sp-model", "sp_model", args.sp_model);
  merge.optional_field("--delta-se", "delta_se", args.delta_se);
  merge.optional_field("--delta-sp", "delta_sp", args.delta_sp);
  merge.field("--seed", "seed", args.seed);
  merge.field("--format", "format", args.format);
  merge.field("--out", "out", args.out);
  merge.finish("optimize");

  if (args.p == 0.0) throw std::invalid_argument("missing --p");
  const Prevalence p(args.p);
  const MisclassModel model = parse_model(args.model, args.sp_model);

  OptResult result;
  if (args.delta_se || args.delta_sp) {
    const Constraints constraints{args.delta_se.value_or(0.0), args.delta_sp.value_or(0.0)};
    result = optimize_constrained(p, model, GroupSize(args.k_max), constraints);
  } else {
    result = optimize_unconstrained(p, model, GroupSize(args.k_max));
  }

  if (args.format == "csv") {
    std::ostringstream text;
    text << "# seed=" << args.seed << "\n"
         << "k_opt,expected_tests,se_at_k,sp_at_k,feasible_set_size,mode\n"
         << result.k_opt << ',' << result.expected_tests << ',' << result.se_at_k << ','
         << result.sp_at_k << ',' << result.feasible_set_size << ',' << to_string(result.mode)
         << "\n";
    write_output(args.out, text.str());
    return kExitOk;
  }
  if (args.format != "json") throw std::invalid_argument("--format must be json or csv");

  json out;
  out["command"] = "optimize";
  out["seed"] = args.seed;
  out["p"] = args.p;
  out["k_max"] = args.k_max;
  out["model"] = model_as_json(model);
  if (args.delta_se) out["delta_se"] = *args.delta_se;
  if (args.delta_sp) out["delta_sp"] = *args.delta_sp;
  out["mode"] = to_string(result.mode);
  out["k_opt"] = result.k_opt;
  out["expected_tests"] = result.expected_tests;
  out["se_at_k"] = result.se_at_k;
  out["sp_at_k"] = result.sp_at_k;
  out["feasible_set_size"] = result.feasible_set_size;
  write_output(args.out, out.dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// table1

struct Table1Args {
  std::vector<double> p_list{0.01, 0.05, 0.1};
  std::vector<double> d_list{0.0, 0.01, 0.05, 0.1, 0.3};
  double d_true = 0.075;
  int k_max = 25;
  double delta = 0.95;
  bool check = false;
  std::string golden;
  std::uint64_t seed = 0;
  std::string out;
  std::string config;
};

struct ParsedCsv {
  std::vector<std::vector<std::string>> rows;  // header excluded
  std::string header;
};

ParsedCsv parse_csv(const std::string& text) {
  ParsedCsv parsed;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream fields_in(line);
    while (std::getline(fields_in, field, ',')) fields.push_back(field);
    if (parsed.header.empty()) {
      parsed.header = line;
      continue;
    }
    parsed.rows.push_back(std::move(fields));
  }
  return parsed;
}

void diff_against_golden(const std::string& generated, const std::string& golden) {
  const ParsedCsv ours = parse_csv(generated);
  const ParsedCsv theirs = parse_csv(golden);
  std::vector<std::string> problems;
  if (ours.header != theirs.header)
    problems.push_back("header differs: " + ours.header + " vs " + theirs.header);
  if (ours.rows.size() != theirs.rows.size())
    problems.push_back("row count differs: " + std::to_string(ours.rows.size()) + " vs " +
                       std::to_string(theirs.rows.size()));
  const std::size_t rows = std::min(ours.rows.size(), theirs.rows.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& a = ours.rows[r];
    const auto& b = theirs.rows[r];
    if (a.size() != 11 || b.size() != 11) {
      problems.push_back("row " + std::to_string(r + 1) + ": wrong field count");
      continue;
    }
    for (std::size_t c = 0; c < 11; ++c) {
      bool ok;
      if (c == 10) {
        ok = a[c] == b[c];  // mode
      } else if (c == 2 || c == 3) {
        ok = std::stol(a[c]) == std::stol(b[c]);  // group sizes
      } else {
        // 3-decimal quantities (and the p, d labels): last-digit rounding only
        ok = std::abs(std::stod(a[c]) - std::stod(b[c])) <= 0.0005 + 1e-12;
      }
      if (!ok)
        problems.push_back("row " + std::to_string(r + 1) + " column " + std::to_string(c + 1) +
                           ": " + a[c] + " vs " + b[c]);
    }
  }
  if (!problems.empty()) {
    for (const auto& problem : problems) std::cerr << "mismatch: " << problem << "\n";
    throw CheckMismatchError("generated table deviates from the reference beyond rounding");
  }
}

int run_table1(CLI::App* cmd, Table1Args& args) {
  ConfigMerge merge(cmd, args.config);
  merge.field("--p-list", "p_list", args.p_list);
  merge.field("--d-list", "d_list", args.d_list);
  merge.field("--d-true", "d_true", args.d_true);
  merge.field("--k-max", "k_max", args.k_max);
  merge.field("--delta", "delta", args.delta);
  merge.field("--seed", "seed", args.seed);
  merge.field("--out", "out", args.out);
  merge.finish("table1");

  const auto rows = misspec_grid(args.p_list, args.d_list, args.d_true, GroupSize(args.k_max),
                                 args.delta);
  std::ostringstream body;
  write_misspec_csv(body, rows);
  const std::string csv = "# seed=" + std::to_string(args.seed) + "\n" + body.str();

  if (args.check) {
    std::string golden = kDefaultGolden;
    if (!args.golden.empty()) {
      std::ifstream in(args.golden);
      if (!in) throw std::invalid_argument("cannot open golden file: " + args.golden);
      std::ostringstream slurp;
      slurp << in.rdbuf();
      golden = slurp.str();
    }
    diff_against_golden(csv, golden);
    std::cout << "table check passed: " << rows.size() << " rows within rounding\n";
    return kExitOk;
  }
  write_output(args.out, csv);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateArgs {
  double p = 0.0;
  std::string model = R"({"family":"perfect"})";
  std::string sp_model = R"({"family":"perfect"})";
  int k_max = 10;
  double delta = 0.95;
  double epsilon = 0.95;
  double phi_tol = 0.01;
  int replicates = 50000;
  int n_initial = 10000;
  int max_steps = 60;
  std::uint64_t seed = 0;
  int threads = 0;
  bool quiet = false;
  std::string trace_csv;
  std::string out;
  std::string config;
};

json outcome_to_json(const ValidationOutcome& outcome) {
  json trace = json::array();
  for (const auto& [n, phi] : outcome.bisection_trace) trace.push_back({n, phi});
  json out;
  out["n_required"] = outcome.n_required;
  out["t_v"] = outcome.t_v;
  out["n_star"] = optional_count(outcome.n_star);
  out["phi_hat"] = outcome.phi_hat;
  out["mean_expected_tests"] = outcome.mean_expected_tests;
  out["bisection_trace"] = trace;
  return out;
}

int run_validate(CLI::App* cmd, ValidateArgs& args) {
  ConfigMerge merge(cmd, args.config);
  merge.field("--p", "p", args.p);
  merge.model_field("--model", "model", args.model);
  merge.model_field("--sp-model", "sp_model", args.sp_model);
  merge.field("--k-max", "k_max", args.k_max);
  merge.field("--delta", "delta", args.delta);
  merge.field("--epsilon", "epsilon", args.epsilon);
  merge.field("--phi-tol", "phi_tolerance", args.phi_tol);
  merge.field("--replicates", "replicates", args.replicates);
  merge.field("--n-initial", "n_initial", args.n_initial);
  merge.field("--max-steps", "max_steps", args.max_steps);
  merge.field("--seed", "seed", args.seed);
  merge.field("--threads", "threads", args.threads);
  merge.field("--out", "out", args.out);
  merge.finish("validate");

  if (args.p == 0.0) throw std::invalid_argument("missing --p");

  ValidationConfig cfg{Prevalence(args.p), parse_model(args.model, args.sp_model)};
  cfg.k_max = args.k_max;
  cfg.delta = args.delta;
  cfg.epsilon = args.epsilon;
  cfg.phi_tolerance = args.phi_tol;
  cfg.replicates = args.replicates;
  cfg.seed = args.seed;
  cfg.n_initial = args.n_initial;
  cfg.max_steps = args.max_steps;
  cfg.threads = args.threads;
  if (!args.quiet)
    cfg.on_step = [](int step, int n, double phi) {
      std::cerr << "step=" << step << " n=" << n << " phi_hat=" << phi << "\n";
    };

  const ValidationOutcome outcome = find_min_validation_n(cfg);

  if (!args.trace_csv.empty()) {
    std::ostringstream trace;
    trace << "step,n,phi_hat\n";
    for (std::size_t i = 0; i < outcome.bisection_trace.size(); ++i)
      trace << i << ',' << outcome.bisection_trace[i].first << ','
            << outcome.bisection_trace[i].second << "\n";
    write_output(args.trace_csv, trace.str());
  }

  json out;
  out["command"] = "validate";
  out["seed"] = args.seed;
  out["config"] = {{"p", args.p},
                   {"model", model_as_json(cfg.true_model)},
                   {"k_max", cfg.k_max},
                   {"delta", cfg.delta},
                   {"epsilon", cfg.epsilon},
                   {"phi_tolerance", cfg.phi_tolerance},
                   {"replicates", cfg.replicates},
                   {"n_initial", cfg.n_initial},
                   {"max_steps", cfg.max_steps}};
  out.update(outcome_to_json(outcome));
  write_output(args.out, out.dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// screen

struct ScreenArgs {
  std::int64_t population = 0;
  double p = 0.0;
  int k = 0;
  int k_from = 0;
  int k_to = 0;
  std::string model = R"({"family":"perfect"})";
  std::string sp_model = R"({"family":"perfect"})";
  std::uint64_t seed = 0;
  int threads = 0;
  std::string format;
  std::string out;
  std::string config;
};

json report_to_json(const ScreenReport& r) {
  return json{{"population", r.population},
              {"k", r.k},
              {"groups", r.groups},
              {"positive_pools", r.positive_pools},
              {"total_tests", r.total_tests},
              {"tests_per_person", r.tests_per_person},
              {"positives", r.positives},
              {"negatives", r.negatives},
              {"false_negatives", r.false_negatives},
              {"false_positives", r.false_positives},
              {"overall_se", r.empirical_overall_se},
              {"overall_sp", r.empirical_overall_sp}};
}

int run_screen(CLI::App* cmd, ScreenArgs& args) {
  ConfigMerge merge(cmd, args.config);
  merge.field("--population", "population", args.population);
  merge.field("--p", "p", args.p);
  merge.field("--k", "k", args.k);
  merge.field("--k-from", "k_from", args.k_from);
  merge.field("--k-to", "k_to", args.k_to);
  merge.model_field("--model", "model", args.model);
  merge.model_field("--sp-model", "sp_model", args.sp_model);
  merge.field("--seed", "seed", args.seed);
  merge.field("--threads", "threads", args.threads);
  merge.field("--format", "format", args.format);
  merge.field("--out", "out", args.out);
  merge.finish("screen");

  if (args.population <= 0) throw std::invalid_argument("missing --population");
  if (args.p == 0.0) throw std::invalid_argument("missing --p");
  const bool sweeping = args.k_from > 0 || args.k_to > 0;
  if (sweeping == (args.k > 0))
    throw std::invalid_argument("give either --k or a --k-from/--k-to range");

  const Prevalence p(args.p);
  const MisclassModel model = parse_model(args.model, args.sp_model);

  if (sweeping) {
    if (!args.format.empty() && args.format != "csv")
      throw std::invalid_argument("sweep output is csv");
    const auto reports =
        sweep(args.population, p, model, args.k_from, args.k_to, args.seed, args.threads);
    std::ostringstream body;
    write_sweep_csv(body, reports);
    write_output(args.out, "# seed=" + std::to_string(args.seed) + "\n" + body.str());
    return kExitOk;
  }

  const ScreenReport report =
      simulate_screen(args.population, p, GroupSize(args.k), model, args.seed, args.threads);
  json out;
  out["command"] = "screen";
  out["seed"] = args.seed;
  out["p"] = args.p;
  out["model"] = model_as_json(model);
  out.update(report_to_json(report));
  write_output(args.out, out.dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// nstar

struct NstarArgs {
  std::int64_t n = -1;
  std::int64_t tv = -1;
  std::optional<double> expected_tests;
  double p = 0.0;
  std::string model = R"({"family":"perfect"})";
  int k_max = 10;
  double delta = 0.95;
  std::uint64_t seed = 0;
  std::string out;
  std::string config;
};

int run_nstar(CLI::App* cmd, NstarArgs& args) {
  ConfigMerge merge(cmd, args.config);
  merge.field("--n", "n", args.n);
  merge.field("--tv", "tv", args.tv);
  merge.optional_field("--expected-tests", "expected_tests", args.expected_tests);
  merge.field("--p", "p", args.p);
  merge.model_field("--model", "model", args.model);
  merge.field("--k-max", "k_max", args.k_max);
  merge.field("--delta", "delta", args.delta);
  merge.field("--seed", "seed", args.seed);
  merge.field("--out", "out", args.out);
  merge.finish("nstar");

  if (args.n < 0) throw std::invalid_argument("missing --n");

  json out;
  out["command"] = "nstar";
  out["seed"] = args.seed;
  out["n"] = args.n;

  double expected;
  if (args.expected_tests) {
    expected = *args.expected_tests;
  } else {
    // derive the closed-form E(T) at the true constrained optimum
    if (args.p == 0.0)
      throw std::invalid_argument("give --expected-tests or --p with a --model");
    const MisclassModel model{family_from_json(args.model)};
    const OptResult opt = optimize_constrained(Prevalence(args.p), model, GroupSize(args.k_max),
                                               Constraints{args.delta, 0.0});
    expected = opt.expected_tests;
    out["p"] = args.p;
    out["model"] = json::parse(family_to_json(model.se));
    out["k_opt"] = opt.k_opt;
    out["delta"] = args.delta;
  }
  out["expected_tests"] = expected;

  std::int64_t tv = args.tv;
  if (tv < 0) tv = args.n == 0 ? 0 : total_validation_tests(static_cast<int>(args.n), args.k_max);
  out["t_v"] = tv;

  if (expected < 1.0) {
    out["n_star"] = min_population_for_benefit(args.n, tv, expected);
    out["no_break_even"] = false;
  } else {
    out["n_star"] = nullptr;
    out["no_break_even"] = true;
  }
  write_output(args.out, out.dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// casestudy

struct CaseArgs {
  std::string name;
  int replicates = 0;  // 0 = closed-form arithmetic only
  int k_max = 10;
  double delta = 0.95;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
  std::string config;
};

struct CasePreset {
  const char* name;
  double p;
  std::int64_t n_linear;
  std::int64_t n_hwang;
};

constexpr CasePreset kPresets[] = {
    {"covid5", 0.05, 31679, 13710},  {"covid10", 0.10, 17500, 8906},
    {"covid25", 0.25, 1640, 10781},  {"hiv", 0.09, 18750, 9375},
    {"hpv", 0.05, 31679, 13710},     {"mgus", 0.03, 51250, 21093},
};

json casestudy_entry(const char* label, const MisclassModel& model, double p, std::int64_t n,
                     const CaseArgs& args) {
  json entry;
  entry["family"] = label;
  entry["model"] = json::parse(family_to_json(model.se));
  entry["n"] = n;
  const std::int64_t tv =
      n == 0 ? 0 : total_validation_tests(static_cast<int>(n), args.k_max);
  entry["t_v"] = tv;

  const OptResult opt = optimize_constrained(Prevalence(p), model, GroupSize(args.k_max),
                                             Constraints{args.delta, 0.0});
  entry["k_opt_true"] = opt.k_opt;
  entry["se_at_k_opt"] = opt.se_at_k;
  entry["expected_tests"] = opt.expected_tests;
  if (opt.expected_tests < 1.0) {
    entry["n_star"] = min_population_for_benefit(n, tv, opt.expected_tests);
    entry["no_break_even_at_true_optimum"] = false;
  } else {
    // Pooling is infeasible at the bound under this curve, so the validation
    // study can never pay for itself through the constrained design.
    entry["n_star"] = nullptr;
    entry["no_break_even_at_true_optimum"] = true;
  }

  if (args.replicates > 0) {
    ValidationConfig cfg{Prevalence(p), model};
    cfg.k_max = args.k_max;
    cfg.delta = args.delta;
    cfg.replicates = args.replicates;
    cfg.seed = args.seed;
    cfg.threads = args.threads;
    const ValidationOutcome outcome = find_min_validation_n(cfg);
    entry["simulated"] = outcome_to_json(outcome);
  }
  return entry;
}

int run_casestudy(CLI::App* cmd, CaseArgs& args) {
  ConfigMerge merge(cmd, args.config);
  merge.field("--replicates", "replicates", args.replicates);
  merge.field("--k-max", "k_max", args.k_max);
  merge.field("--delta", "delta", args.delta);
  merge.field("--seed", "seed", args.seed);
  merge.field("--threads", "threads", args.threads);
  merge.field("--out", "out", args.out);
  merge.finish("casestudy");

  json out;
  out["command"] = "casestudy";
  out["name"] = args.name;
  out["seed"] = args.seed;
  json entries = json::array();

  if (args.name == "novalidation") {
    // No validation study at all: any population benefits immediately.
    out["p"] = 0.05;
    entries.push_back(
        casestudy_entry("linear", MisclassModel{FamilySpec::linear()}, 0.05, 0, args));
  } else {
    const CasePreset* preset = nullptr;
    for (const auto& candidate : kPresets)
      if (args.name == candidate.name) preset = &candidate;
    if (preset == nullptr)
      throw std::invalid_argument(
          "unknown case study \"" + args.name +
          "\" (expected covid5, covid10, covid25, hiv, hpv, mgus, or novalidation)");
    out["p"] = preset->p;
    entries.push_back(casestudy_entry("linear", MisclassModel{FamilySpec::linear()}, preset->p,
                                      preset->n_linear, args));
    entries.push_back(casestudy_entry("hwang", MisclassModel{FamilySpec::hwang(0.1)}, preset->p,
                                      preset->n_hwang, args));
  }
  out["entries"] = entries;
  write_output(args.out, out.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design planner for Dorfman pooled screening with size-dependent test accuracy"};
  app.require_subcommand(1);

  OptimizeArgs optimize_args;
  CLI::App* optimize = app.add_subcommand("optimize", "Choose the pool size minimizing tests per person");
  optimize->add_option("--p", optimize_args.p, "Prevalence in (0,1)");
  optimize->add_option("--k-max", optimize_args.k_max, "Largest feasible pool size");
  optimize->add_option("--model", optimize_args.model, "Sensitivity curve JSON");
  optimize->add_option("--sp-model", optimize_args.sp_model, "Specificity curve JSON");
  optimize->add_option("--delta-se", optimize_args.delta_se, "Lower bound on Se(k)");
  optimize->add_option("--delta-sp", optimize_args.delta_sp, "Lower bound on Sp(k)");
  optimize->add_option("--seed", optimize_args.seed, "Seed echoed into the output");
  optimize->add_option("--format", optimize_args.format, "json or csv");
  optimize->add_option("--out", optimize_args.out, "Output path (default stdout)");
  optimize->add_option("--config", optimize_args.config, "JSON config file; flags win");

  Table1Args table1_args;
  CLI::App* table1 = app.add_subcommand("table1", "Misspecified-dilution comparison grid as CSV");
  table1->add_option("--p-list", table1_args.p_list, "Prevalences")->delimiter(',');
  table1->add_option("--d-list", table1_args.d_list, "Assumed dilution indices")->delimiter(',');
  table1->add_option("--d-true", table1_args.d_true, "True dilution index");
  table1->add_option("--k-max", table1_args.k_max, "Largest feasible pool size");
  table1->add_option("--delta", table1_args.delta, "Sensitivity bound for the constrained block");
  table1->add_flag("--check", table1_args.check, "Diff against the reference grid; exit 2 on mismatch");
  table1->add_option("--golden", table1_args.golden, "Reference CSV (default: built in)");
  table1->add_option("--seed", table1_args.seed, "Seed echoed into the output");
  table1->add_option("--out", table1_args.out, "Output path (default stdout)");
  table1->add_option("--config", table1_args.config, "JSON config file; flags win");

  ValidateArgs validate_args;
  CLI::App* validate = app.add_subcommand("validate", "Size a validation study by simulation");
  validate->add_option("--p", validate_args.p, "Prevalence in (0,1)");
  validate->add_option("--model", validate_args.model, "True sensitivity curve JSON");
  validate->add_option("--sp-model", validate_args.sp_model, "True specificity curve JSON");
  validate->add_option("--k-max", validate_args.k_max, "Largest pool size under study");
  validate->add_option("--delta", validate_args.delta, "Sensitivity bound the design must meet");
  validate->add_option("--epsilon", validate_args.epsilon, "Required probability of meeting it");
  validate->add_option("--phi-tol", validate_args.phi_tol, "Termination band around epsilon");
  validate->add_option("--replicates", validate_args.replicates, "Simulated studies per step");
  validate->add_option("--n-initial", validate_args.n_initial, "Starting sample size");
  validate->add_option("--max-steps", validate_args.max_steps, "Search step limit");
  validate->add_option("--seed", validate_args.seed, "Master seed");
  validate->add_option("--threads", validate_args.threads, "Worker threads (0 = all)")
      ->envname("POOLPLAN_THREADS");
  validate->add_flag("--quiet", validate_args.quiet, "Suppress per-step progress on stderr");
  validate->add_option("--trace-csv", validate_args.trace_csv, "Write the search trace as CSV");
  validate->add_option("--out", validate_args.out, "Output path (default stdout)");
  validate->add_option("--config", validate_args.config, "JSON config file; flags win");

  ScreenArgs screen_args;
  CLI::App* screen = app.add_subcommand("screen", "Simulate a full screening program");
  screen->add_option("--population", screen_args.population, "People to screen");
  screen->add_option("--p", screen_args.p, "Prevalence in (0,1)");
  screen->add_option("--k", screen_args.k, "Pool size for a single run");
  screen->add_option("--k-from", screen_args.k_from, "Sweep start size");
  screen->add_option("--k-to", screen_args.k_to, "Sweep end size");
  screen->add_option("--model", screen_args.model, "Sensitivity curve JSON");
  screen->add_option("--sp-model", screen_args.sp_model, "Specificity curve JSON");
  screen->add_option("--seed", screen_args.seed, "Master seed");
  screen->add_option("--threads", screen_args.threads, "Worker threads (0 = all)")
      ->envname("POOLPLAN_THREADS");
  screen->add_option("--format", screen_args.format, "json (single run) or csv (sweep)");
  screen->add_option("--out", screen_args.out, "Output path (default stdout)");
  screen->add_option("--config", screen_args.config, "JSON config file; flags win");

  NstarArgs nstar_args;
  CLI::App* nstar = app.add_subcommand("nstar", "Break-even population for a validation study");
  nstar->add_option("--n", nstar_args.n, "Validation sample size");
  nstar->add_option("--tv", nstar_args.tv, "Total validation tests (default: derived from --n)");
  nstar->add_option("--expected-tests", nstar_args.expected_tests,
                    "Tests per person of the screening design");
  nstar->add_option("--p", nstar_args.p, "Prevalence for the closed-form route");
  nstar->add_option("--model", nstar_args.model, "Sensitivity curve JSON for the closed-form route");
  nstar->add_option("--k-max", nstar_args.k_max, "Largest feasible pool size");
  nstar->add_option("--delta", nstar_args.delta, "Sensitivity bound");
  nstar->add_option("--seed", nstar_args.seed, "Seed echoed into the output");
  nstar->add_option("--out", nstar_args.out, "Output path (default stdout)");
  nstar->add_option("--config", nstar_args.config, "JSON config file; flags win");

  CaseArgs case_args;
  CLI::App* casestudy = app.add_subcommand("casestudy", "Bundled screening scenarios");
  casestudy->add_option("name", case_args.name, "covid5|covid10|covid25|hiv|hpv|mgus|novalidation")
      ->required();
  casestudy->add_option("--replicates", case_args.replicates,
                        "Also size the study by simulation with this many replicates");
  casestudy->add_option("--k-max", case_args.k_max, "Largest pool size under study");
  casestudy->add_option("--delta", case_args.delta, "Sensitivity bound");
  casestudy->add_option("--seed", case_args.seed, "Master seed");
  casestudy->add_option("--threads", case_args.threads, "Worker threads (0 = all)")
      ->envname("POOLPLAN_THREADS");
  casestudy->add_option("--out", case_args.out, "Output path (default stdout)");
  casestudy->add_option("--config", case_args.config, "JSON config file; flags win");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand(optimize)) return run_optimize(optimize, optimize_args);
    if (app.got_subcommand(table1)) return run_table1(table1, table1_args);
    if (app.got_subcommand(validate)) return run_validate(validate, validate_args);
    if (app.got_subcommand(screen)) return run_screen(screen, screen_args);
    if (app.got_subcommand(nstar)) return run_nstar(nstar, nstar_args);
    if (app.got_subcommand(casestudy)) return run_casestudy(casestudy, case_args);
  } catch (const CheckMismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckMismatch;
  } catch (const NoConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
