#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "vartsp/error.hpp"
#include "vartsp/harness.hpp"
#include "vartsp/optimizer.hpp"
#include "vartsp/tsp.hpp"

namespace vartsp::cli {

namespace {

enum class Kind { kString, kNumber, kBool };

struct FlagInfo {
  const char* key;
  Kind kind;
  const char* help;
};

constexpr FlagInfo kSettingsFlags[] = {
    {"model", Kind::kString, "vqa, ml, monte_carlo or greedy"},
    {"codec", Kind::kString, "original (non_factorial) or factorial"},
    {"gray", Kind::kBool, "Gray-code the bit strings"},
    {"gray-scope", Kind::kString, "chunk or word (non-factorial codec)"},
    {"iterations", Kind::kNumber, "optimizer iterations / training epochs"},
    {"slice", Kind::kNumber, "fraction of lowest-distance shots averaged"},
    {"warm-start", Kind::kBool, "start from the greedy tour"},
    {"cache", Kind::kBool, "memoize bit string distances"},
    {"circuit", Kind::kNumber, "VQA circuit 1-5"},
    {"circuit3", Kind::kString, "circuit 3 variant: rz-rzz or rz-only"},
    {"gradient", Kind::kString, "VQA gradient: spsa or param_shift"},
    {"shots", Kind::kNumber, "VQA shots per evaluation"},
    {"init-angle", Kind::kNumber, "cold-start angle for every parameter"},
    {"spsa-A", Kind::kNumber, "SPSA stability constant A"},
    {"spsa-c", Kind::kNumber, "SPSA perturbation scale c"},
    {"spsa-alpha", Kind::kNumber, "SPSA step decay alpha"},
    {"spsa-gamma", Kind::kNumber, "SPSA perturbation decay gamma"},
    {"spsa-eta", Kind::kNumber, "SPSA target first step eta"},
    {"g0-floor", Kind::kNumber, "G0 stand-in when the first gradient is zero"},
    {"shift-s", Kind::kNumber, "parameter-shift scale s"},
    {"shift-eta", Kind::kNumber, "parameter-shift learning rate"},
    {"layers", Kind::kNumber, "ML layers"},
    {"input-vectors", Kind::kNumber, "ML input vectors per epoch"},
    {"input", Kind::kString, "ML input: zeros or halves"},
    {"sigma", Kind::kNumber, "ML warm-start weight noise"},
    {"optimizer", Kind::kString, "ML optimizer: sgd or adam"},
    {"lr", Kind::kNumber, "ML learning rate"},
    {"momentum", Kind::kNumber, "ML momentum (Adam beta1)"},
    {"weight-decay", Kind::kNumber, "ML L2 weight decay"},
    {"beta2", Kind::kNumber, "Adam beta2"},
    {"eps", Kind::kNumber, "Adam epsilon"},
    {"budget", Kind::kNumber, "Monte Carlo bit strings"},
};

// Settings flags of one subcommand; only flags given on the command line
// make it into the overlay.
class SettingsFlags {
 public:
  void attach(CLI::App* app) {
    for (const FlagInfo& f : kSettingsFlags) {
      const std::string name = std::string("--") + f.key;
      CLI::Option* opt = nullptr;
      if (f.kind == Kind::kBool) {
        opt = app->add_flag(name + ",!--no-" + f.key, bools_[f.key], f.help);
      } else {
        opt = app->add_option(name, strings_[f.key], f.help);
      }
      options_.push_back({&f, opt});
    }
    app->add_option("--config", config_path_,
                    "JSON file of settings; flags given here take precedence");
  }

  Json overlay() const {
    Json j = Json::object();
    for (const auto& [info, opt] : options_) {
      if (opt->count() == 0) continue;
      const std::string key = info->key;
      switch (info->kind) {
        case Kind::kBool:
          j[key] = bools_.at(key);
          break;
        case Kind::kString:
          j[key] = strings_.at(key);
          break;
        case Kind::kNumber:
          j[key] = parse_number(key, strings_.at(key));
          break;
      }
    }
    return j;
  }

  // Config file settings, then flags. "seed" in the file is returned
  // separately.
  RunSettings resolve(std::optional<std::uint64_t>* file_seed = nullptr) const {
    RunSettings s;
    if (!config_path_.empty()) {
      Json cfg = read_json(config_path_);
      if (!cfg.is_object()) throw ConfigError(config_path_ + ": expected an object");
      if (const auto it = cfg.find("seed"); it != cfg.end()) {
        if (!it->is_number_unsigned()) {
          throw ConfigError(config_path_ + ": \"seed\" must be a non-negative integer");
        }
        if (file_seed) *file_seed = it->get<std::uint64_t>();
        cfg.erase(it);
      }
      s = settings_from_json(cfg);
    }
    return apply_settings(s, overlay());
  }

  static Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    try {
      return Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }

 private:
  static Json parse_number(const std::string& key, const std::string& text) {
    Json v;
    try {
      v = Json::parse(text);
    } catch (const Json::parse_error&) {
      throw ConfigError("--" + key + " expects a number, got \"" + text + "\"");
    }
    if (!v.is_number()) {
      throw ConfigError("--" + key + " expects a number, got \"" + text + "\"");
    }
    return v;
  }

  std::map<std::string, std::string> strings_;
  std::map<std::string, bool> bools_;
  std::vector<std::pair<const FlagInfo*, CLI::Option*>> options_;
  std::string config_path_;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("failed writing " + path);
}

struct SolveArgs {
  std::string instance;
  std::uint64_t seed = 1;
  std::optional<double> optimum;
  bool no_reference = false;
  std::string output;
  std::string trace;
  bool record_timing = false;
  bool verbose = false;
  SettingsFlags flags;
};

CLI::App* add_solve(CLI::App& app, SolveArgs& a) {
  CLI::App* sub = app.add_subcommand("solve", "Run one model on one instance");
  sub->add_option("instance", a.instance, "Instance CSV (x,y per line)")->required();
  sub->add_option("--seed", a.seed, "Random seed");
  sub->add_option("--optimum", a.optimum, "Known optimum distance for quality");
  sub->add_flag("--no-reference", a.no_reference,
                "Skip the brute-force reference");
  sub->add_option("--output", a.output, "Write the run record as JSON");
  sub->add_option("--trace", a.trace, "Write the per-iteration trace as CSV");
  sub->add_flag("--record-timing", a.record_timing,
                "Include wall time in written files");
  sub->add_flag("--verbose", a.verbose, "Log one line per iteration");
  a.flags.attach(sub);
  return sub;
}

int do_solve(const SolveArgs& a, CLI::App* sub, std::ostream& out,
             std::ostream& err) {
  std::optional<std::uint64_t> file_seed;
  const RunSettings settings = a.flags.resolve(&file_seed);
  const std::uint64_t seed =
      sub->get_option("--seed")->count() == 0 && file_seed ? *file_seed : a.seed;
  const TspInstance inst = load_instance(a.instance);
  IterationObserver observer;
  if (a.verbose) {
    observer = [&err](const IterationTrace& t) {
      err << "iter " << t.t << " sliced_avg " << fmt(t.sliced_average)
          << " best " << fmt(t.best) << '\n';
    };
  }
  RunRecord rec = run_model(inst, settings, seed, observer);
  std::optional<double> ref = a.optimum;
  if (!ref && !a.no_reference) ref = reference_optimum(inst, std::nullopt);
  if (ref) attach_reference(rec, *ref);

  out << "model        " << rec.model << '\n'
      << "locations    " << inst.size() << '\n'
      << "best cycle   " << rec.best_cycle.to_string() << '\n'
      << "distance     " << fmt(rec.best_distance) << '\n';
  if (rec.reference) {
    out << "reference    " << fmt(*rec.reference) << '\n'
        << "quality      " << fmt(*rec.quality) << '\n';
  }
  out << "bit strings  " << rec.bitstrings_sampled << '\n'
      << "coverage     " << fmt(rec.coverage) << '\n'
      << "elapsed      " << fmt(rec.wall_seconds) << " s\n";

  if (!a.output.empty()) {
    Json j;
    j["instance"] = a.instance;
    j["seed"] = seed;
    j["settings"] = to_json(settings);
    j["record"] = record_to_json(rec, a.record_timing);
    write_file(a.output, j.dump(2) + "\n");
  }
  if (!a.trace.empty()) {
    std::ostringstream csv;
    write_trace_csv(csv, rec);
    write_file(a.trace, csv.str());
  }
  return kOk;
}

int do_oracle(const std::string& path, std::ostream& out) {
  const TspInstance inst = load_instance(path);
  const Tour t = brute_force_optimum(inst);
  out << "best cycle   " << t.cycle.to_string() << '\n'
      << "distance     " << fmt(t.length) << '\n';
  return kOk;
}

struct EstimateArgs {
  std::string iterations = "250";
  std::string shots = "1024";
  std::string t_shot = "2e-6";
};

double parse_double_arg(const std::string& name, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw ConfigError("--" + name + " expects a number, got \"" + text + "\"");
  }
  return v;
}

int do_estimate(const EstimateArgs& a, std::ostream& out) {
  const double i = parse_double_arg("iterations", a.iterations);
  const double n = parse_double_arg("shots", a.shots);
  const double t = parse_double_arg("t-shot", a.t_shot);
  const double secs = estimate_runtime(i, n, t);
  out << "iterations   " << a.iterations << '\n'
      << "shots        " << a.shots << '\n'
      << "t-shot       " << a.t_shot << " s\n"
      << "T = 4 * iterations * shots * t-shot = " << fmt(secs) << " s\n";
  return kOk;
}

struct PlanOutput {
  std::string output;
  bool record_timing = false;
};

void emit_results(const PlanResult& result, const PlanOutput& o,
                  std::ostream& out, std::ostream& err) {
  std::ostringstream csv;
  write_results_csv(csv, result.rows, o.record_timing);
  if (o.output.empty()) {
    out << csv.str();
  } else {
    write_file(o.output, csv.str());
  }
  for (const CellFailure& f : result.failures) {
    err << "cell " << f.cell << " on " << f.instance << " seed " << f.seed
        << " failed: " << f.message << '\n';
  }
}

struct BenchmarkArgs {
  std::vector<std::string> instances;
  std::vector<std::size_t> sizes;
  std::size_t count = 5;
  std::uint64_t instance_seed = 1;
  std::size_t runs = 5;
  std::uint64_t seed = 1;
  bool monte_carlo = false;
  bool greedy = false;
  bool verbose = false;
  PlanOutput plan_output;
  SettingsFlags flags;
};

int do_benchmark(const BenchmarkArgs& a, std::ostream& out, std::ostream& err) {
  if (a.instances.empty() && a.sizes.empty()) {
    throw ConfigError("benchmark needs instance files or --sizes");
  }
  Json j;
  j["runs"] = a.runs;
  j["seed_base"] = a.seed;
  j["monte_carlo"] = a.monte_carlo;
  j["greedy"] = a.greedy;
  Json list = Json::array();
  for (const std::string& p : a.instances) list.push_back({{"path", p}});
  if (!a.sizes.empty()) {
    list.push_back({{"generate",
                     {{"sizes", a.sizes}, {"count", a.count}, {"seed", a.instance_seed}}}});
  }
  j["instances"] = list;
  ExperimentPlan plan = parse_plan(j);
  plan.cells = {a.flags.resolve()};
  ProgressFn progress;
  if (a.verbose) progress = [&err](const std::string& s) { err << s << '\n'; };
  emit_results(run_plan(plan, 1, progress), a.plan_output, out, err);
  return kOk;
}

struct SweepArgs {
  std::string plan;
  std::size_t jobs = 1;
  bool verbose = false;
  PlanOutput plan_output;
};

int do_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  if (a.jobs == 0) throw ConfigError("--jobs must be positive");
  const ExperimentPlan plan = load_plan(a.plan);
  ProgressFn progress;
  if (a.verbose) progress = [&err](const std::string& s) { err << s << '\n'; };
  emit_results(run_plan(plan, a.jobs, progress), a.plan_output, out, err);
  return kOk;
}

struct GenerateArgs {
  std::size_t n = 0;
  std::uint64_t seed = 1;
  double extent = 100.0;
  std::string output;
};

int do_generate(const GenerateArgs& a, std::ostream& out) {
  const std::string csv = format_instance_csv(random_instance(a.n, a.seed, a.extent));
  if (a.output.empty()) {
    out << csv;
  } else {
    write_file(a.output, csv);
  }
  return kOk;
}

std::vector<std::string> reversed(std::vector<std::string> args) {
  std::reverse(args.begin(), args.end());
  return args;
}

}  // namespace

RunSettings solve_settings(const std::vector<std::string>& args) {
  CLI::App app{"vartsp"};
  SolveArgs a;
  CLI::App* sub = add_solve(app, a);
  sub->get_option("instance")->required(false);
  std::vector<std::string> full{"solve"};
  full.insert(full.end(), args.begin(), args.end());
  try {
    app.parse(reversed(full));
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }
  return a.flags.resolve();
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Penalty-free variational TSP solvers and benchmarks", "vartsp"};
  app.require_subcommand(1);

  SolveArgs solve;
  CLI::App* solve_cmd = add_solve(app, solve);

  std::string oracle_path;
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle", "Exact optimum by exhaustive search");
  oracle_cmd->add_option("instance", oracle_path, "Instance CSV")->required();

  EstimateArgs estimate;
  CLI::App* estimate_cmd =
      app.add_subcommand("estimate", "Projected hardware run time");
  estimate_cmd->add_option("--iterations", estimate.iterations, "Iterations I");
  estimate_cmd->add_option("--shots", estimate.shots, "Shots per evaluation");
  estimate_cmd->add_option("--t-shot", estimate.t_shot, "Seconds per shot");

  BenchmarkArgs bench;
  CLI::App* bench_cmd = app.add_subcommand(
      "benchmark", "One configuration over an instance set, with baselines");
  bench_cmd->add_option("instances", bench.instances, "Instance CSV files");
  bench_cmd->add_option("--sizes", bench.sizes, "Generate instances of these sizes");
  bench_cmd->add_option("--count", bench.count, "Generated instances per size");
  bench_cmd->add_option("--instance-seed", bench.instance_seed,
                        "Seed for generated instances");
  bench_cmd->add_option("--runs", bench.runs, "Runs per instance");
  bench_cmd->add_option("--seed", bench.seed, "First run seed");
  bench_cmd->add_flag("--monte-carlo", bench.monte_carlo,
                      "Add a budget-matched Monte Carlo row");
  bench_cmd->add_flag("--greedy", bench.greedy, "Add a greedy row");
  bench_cmd->add_flag("--verbose", bench.verbose, "Log each finished run");
  bench_cmd->add_option("--output", bench.plan_output.output, "Results CSV path");
  bench_cmd->add_flag("--record-timing", bench.plan_output.record_timing,
                      "Fill the seconds column");
  bench.flags.attach(bench_cmd);

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run an experiment plan");
  sweep_cmd->add_option("plan", sweep.plan, "Plan JSON")->required();
  sweep_cmd->add_option("--jobs", sweep.jobs, "Parallel runs");
  sweep_cmd->add_flag("--verbose", sweep.verbose, "Log each finished run");
  sweep_cmd->add_option("--output", sweep.plan_output.output, "Results CSV path");
  sweep_cmd->add_flag("--record-timing", sweep.plan_output.record_timing,
                      "Fill the seconds column");

  GenerateArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("generate", "Write a random instance");
  gen_cmd->add_option("--n", gen.n, "Locations")->required();
  gen_cmd->add_option("--seed", gen.seed, "Seed");
  gen_cmd->add_option("--extent", gen.extent, "Square side");
  gen_cmd->add_option("--output", gen.output, "Output path (stdout if absent)");

  try {
    app.parse(reversed(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*solve_cmd) return do_solve(solve, solve_cmd, out, err);
    if (*oracle_cmd) return do_oracle(oracle_path, out);
    if (*estimate_cmd) return do_estimate(estimate, out);
    if (*bench_cmd) return do_benchmark(bench, out, err);
    if (*sweep_cmd) return do_sweep(sweep, out, err);
    if (*gen_cmd) return do_generate(gen, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ResourceError& e) {
    err << "error: " << e.what() << '\n';
    return kResourceLimit;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kConfigError;
}

}  // namespace vartsp::cli
