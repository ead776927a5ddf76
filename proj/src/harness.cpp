#include "vartsp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "vartsp/cost.hpp"
#include "vartsp/error.hpp"
#include "vartsp/ml.hpp"

namespace vartsp {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

const Json& require(const Json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError(where + ": missing \"" + key + "\"");
  }
  return *it;
}

std::uint64_t as_u64(const Json& v, const std::string& what) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw ConfigError(what + " must be a non-negative integer, got " + v.dump());
}

std::vector<PlanInstance> parse_instances(const Json& list,
                                          const std::filesystem::path& root) {
  if (!list.is_array() || list.empty()) {
    throw ConfigError("plan \"instances\" must be a non-empty array");
  }
  std::vector<PlanInstance> out;
  for (const Json& entry : list) {
    if (!entry.is_object()) throw ConfigError("instance entries must be objects");
    std::optional<double> optimum;
    if (const auto it = entry.find("optimum"); it != entry.end()) {
      if (!it->is_number()) throw ConfigError("\"optimum\" must be a number");
      optimum = it->get<double>();
    }
    if (const auto it = entry.find("path"); it != entry.end()) {
      if (!it->is_string()) throw ConfigError("\"path\" must be a string");
      std::filesystem::path p = it->get<std::string>();
      if (p.is_relative() && !root.empty()) p = root / p;
      TspInstance inst = load_instance(p);
      out.push_back({inst, optimum, p.filename().string()});
      continue;
    }
    const Json& gen = require(entry, "generate", "instance entry");
    const std::uint64_t seed = as_u64(require(gen, "seed", "generate"), "seed");
    if (gen.contains("sizes")) {
      const Json& sizes = gen["sizes"];
      if (!sizes.is_array()) throw ConfigError("\"sizes\" must be an array");
      const std::uint64_t count =
          gen.contains("count") ? as_u64(gen["count"], "count") : 1;
      for (const Json& s : sizes) {
        const auto n = static_cast<std::size_t>(as_u64(s, "size"));
        for (std::uint64_t k = 0; k < count; ++k) {
          const std::uint64_t instance_seed = seed + 1000 * n + k;
          out.push_back({random_instance(n, instance_seed), std::nullopt,
                         "n" + std::to_string(n) + "-s" +
                             std::to_string(instance_seed)});
        }
      }
    } else {
      const auto n = static_cast<std::size_t>(as_u64(require(gen, "n", "generate"), "n"));
      out.push_back({random_instance(n, seed), optimum,
                     "n" + std::to_string(n) + "-s" + std::to_string(seed)});
    }
  }
  return out;
}

void expand_grid(const RunSettings& base, const Json& grid,
                 std::vector<RunSettings>& cells) {
  std::vector<std::pair<std::string, std::vector<Json>>> axes;
  for (const auto& [key, values] : grid.items()) {
    if (!values.is_array() || values.empty()) {
      throw ConfigError("grid \"" + key + "\" must be a non-empty array");
    }
    axes.push_back({key, std::vector<Json>(values.begin(), values.end())});
  }
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    Json overlay = Json::object();
    for (std::size_t a = 0; a < axes.size(); ++a) {
      overlay[axes[a].first] = axes[a].second[idx[a]];
    }
    cells.push_back(apply_settings(base, overlay));
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++idx[a] < axes[a].second.size()) break;
      idx[a] = 0;
      if (a == 0) return;
    }
    if (axes.empty()) return;
  }
}

struct Task {
  std::size_t cell;
  std::size_t instance;
  std::uint64_t seed;
  RunSettings settings;
};

struct Outcome {
  std::optional<RunRecord> record;
  std::string error;
};

void run_tasks(const std::vector<Task>& tasks,
               const std::vector<PlanInstance>& instances,
               std::vector<Outcome>& outcomes, std::size_t jobs,
               const ProgressFn& progress) {
  outcomes.assign(tasks.size(), {});
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& t = tasks[i];
      try {
        outcomes[i].record =
            run_model(instances[t.instance].instance, t.settings, t.seed);
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
      if (progress) {
        std::lock_guard lock(log_mutex);
        progress(to_string(t.settings.model) + " cell " +
                 std::to_string(t.cell) + " " + instances[t.instance].label +
                 " seed " + std::to_string(t.seed) +
                 (outcomes[i].error.empty() ? "" : " failed: " + outcomes[i].error));
      }
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(tasks.size(), 1));
  if (jobs == 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
}

ResultRow make_row(const RunSettings& s, std::size_t cell, std::size_t n) {
  ResultRow row;
  row.n = n;
  row.model = to_string(s.model);
  row.codec = to_string(s.codec);
  row.gray = s.gray;
  row.slice = s.model == ModelKind::kVqa || s.model == ModelKind::kMl ? s.slice() : 1.0;
  row.circuit_or_layers = s.circuit_or_layers();
  row.optimizer = s.optimizer();
  row.digest = settings_digest(s);
  row.cell = cell;
  return row;
}

// Folds records (in task order) into the row.
void aggregate(ResultRow& row, const std::vector<const RunRecord*>& records) {
  row.r = records.size();
  if (records.empty()) return;
  std::vector<double> qualities;
  bool all_quality = true;
  for (const RunRecord* rec : records) {
    row.bitstrings += static_cast<double>(rec->bitstrings_sampled);
    row.coverage += rec->coverage;
    row.seconds += rec->wall_seconds;
    if (rec->quality) {
      qualities.push_back(*rec->quality);
    } else {
      all_quality = false;
    }
  }
  const double r = static_cast<double>(records.size());
  row.bitstrings /= r;
  row.coverage /= r;
  row.seconds /= r;
  if (all_quality) {
    double total = 0.0;
    for (const double q : qualities) total += q;
    row.mean_quality = total / r;
    row.sem = standard_error(qualities);
  }
}

}  // namespace

RunRecord monte_carlo(const TspInstance& inst, const CodecSpec& codec,
                      std::uint64_t budget, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  if (budget == 0) throw ConfigError("Monte Carlo budget must be at least 1");
  CostEvaluator evaluator(inst, codec, true);
  const std::size_t q = evaluator.bit_length();
  std::mt19937_64 rng(seed);
  RunRecord record;
  record.model = "monte_carlo";
  double best = std::numeric_limits<double>::infinity();
  BitString bits(q);
  for (std::uint64_t k = 0; k < budget; ++k) {
    // Whole 64-bit words per string so draws are independent of the budget.
    for (std::size_t w = 0; w < q; w += 64) {
      const std::uint64_t word = rng();
      const std::size_t count = std::min<std::size_t>(64, q - w);
      for (std::size_t b = 0; b < count; ++b) {
        bits.set(w + b, (word >> (63 - b)) & 1u);
      }
    }
    const double d = evaluator.evaluate(bits);
    if (d < best) {
      best = d;
      record.best_bits = bits;
    }
  }
  record.best_distance = best;
  record.best_cycle = decode(codec, record.best_bits);
  record.trace.push_back({0, best, best});
  record.cache_hits = evaluator.cache().hits();
  record.cache_misses = evaluator.cache().misses();
  record.bitstrings_sampled = evaluator.cache().queries();
  record.coverage = coverage(record.bitstrings_sampled, inst.size()).coverage;
  record.wall_seconds = seconds_since(start);
  return record;
}

RunRecord greedy_record(const TspInstance& inst) {
  const auto start = std::chrono::steady_clock::now();
  const Tour t = greedy_nearest_neighbour(inst);
  RunRecord record;
  record.model = "greedy";
  record.best_cycle = t.cycle;
  record.best_distance = t.length;
  record.trace.push_back({0, t.length, t.length});
  record.wall_seconds = seconds_since(start);
  return record;
}

RunRecord run_model(const TspInstance& inst, const RunSettings& settings,
                    std::uint64_t seed, const IterationObserver& observer) {
  const CodecSpec codec = settings.codec_for(inst.size());
  switch (settings.model) {
    case ModelKind::kVqa: return run_vqa(inst, codec, settings.vqa, seed, observer);
    case ModelKind::kMl: return run_ml(inst, codec, settings.ml, seed, observer);
    case ModelKind::kMonteCarlo:
      return monte_carlo(inst, codec, settings.budget, seed);
    case ModelKind::kGreedy: return greedy_record(inst);
  }
  throw ConfigError("unknown model");
}

ExperimentPlan parse_plan(const Json& j, const std::filesystem::path& root) {
  if (!j.is_object()) throw ConfigError("plan must be a JSON object");
  static const char* kKeys[] = {"name",  "runs",   "seed_base", "monte_carlo",
                                "greedy", "instances", "base",   "grid",
                                "cells"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw ConfigError("unknown plan key \"" + key + "\"");
    }
  }
  ExperimentPlan plan;
  plan.name = j.value("name", std::string("plan"));
  if (j.contains("runs")) {
    plan.runs = static_cast<std::size_t>(as_u64(j["runs"], "runs"));
    if (plan.runs == 0) throw ConfigError("\"runs\" must be positive");
  }
  if (j.contains("seed_base")) plan.seed_base = as_u64(j["seed_base"], "seed_base");
  if (j.contains("monte_carlo")) {
    if (!j["monte_carlo"].is_boolean()) throw ConfigError("\"monte_carlo\" must be boolean");
    plan.monte_carlo = j["monte_carlo"].get<bool>();
  }
  if (j.contains("greedy")) {
    if (!j["greedy"].is_boolean()) throw ConfigError("\"greedy\" must be boolean");
    plan.greedy = j["greedy"].get<bool>();
  }
  plan.instances = parse_instances(require(j, "instances", "plan"), root);
  const RunSettings base =
      j.contains("base") ? settings_from_json(j["base"]) : RunSettings{};
  if (j.contains("grid")) {
    if (!j["grid"].is_object()) throw ConfigError("\"grid\" must be an object");
    expand_grid(base, j["grid"], plan.cells);
  }
  if (j.contains("cells")) {
    if (!j["cells"].is_array()) throw ConfigError("\"cells\" must be an array");
    for (const Json& c : j["cells"]) plan.cells.push_back(apply_settings(base, c));
  }
  if (!j.contains("grid") && !j.contains("cells")) plan.cells.push_back(base);
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open plan " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return parse_plan(j, path.parent_path());
}

std::optional<double> reference_optimum(const TspInstance& inst,
                                        std::optional<double> given) {
  if (given) return given;
  if (inst.size() <= kBruteForceMaxLocations) {
    return brute_force_optimum(inst).length;
  }
  return std::nullopt;
}

PlanResult run_plan(const ExperimentPlan& plan, std::size_t jobs,
                    const ProgressFn& progress) {
  const auto& instances = plan.instances;
  std::vector<std::optional<double>> refs;
  for (const PlanInstance& pi : instances) {
    refs.push_back(reference_optimum(pi.instance, pi.optimum));
  }

  std::vector<Task> tasks;
  for (std::size_t c = 0; c < plan.cells.size(); ++c) {
    for (std::size_t i = 0; i < instances.size(); ++i) {
      for (std::size_t k = 0; k < plan.runs; ++k) {
        tasks.push_back({c, i, plan.seed_base + k, plan.cells[c]});
      }
    }
  }
  std::vector<Outcome> outcomes;
  run_tasks(tasks, instances, outcomes, jobs, progress);

  // Matched Monte Carlo: budget = max H + M over the cell's runs per instance.
  std::vector<Task> mc_tasks;
  if (plan.monte_carlo) {
    std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> budgets;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const ModelKind m = tasks[t].settings.model;
      if (m != ModelKind::kVqa && m != ModelKind::kMl) continue;
      if (!outcomes[t].record) continue;
      auto& b = budgets[{tasks[t].cell, tasks[t].instance}];
      b = std::max(b, outcomes[t].record->bitstrings_sampled);
    }
    for (const auto& [key, budget] : budgets) {
      RunSettings s = plan.cells[key.first];
      s.model = ModelKind::kMonteCarlo;
      s.budget = budget;
      for (std::size_t k = 0; k < plan.runs; ++k) {
        mc_tasks.push_back({key.first, key.second, plan.seed_base + k, s});
      }
    }
  }
  std::vector<Outcome> mc_outcomes;
  run_tasks(mc_tasks, instances, mc_outcomes, jobs, progress);

  PlanResult result;
  auto collect = [&](const std::vector<Task>& ts, std::vector<Outcome>& os) {
    for (std::size_t t = 0; t < ts.size(); ++t) {
      if (os[t].record) {
        if (const auto& ref = refs[ts[t].instance]) {
          attach_reference(*os[t].record, *ref);
        }
      } else {
        result.failures.push_back({ts[t].cell, instances[ts[t].instance].label,
                                   ts[t].seed, os[t].error});
      }
    }
  };
  collect(tasks, outcomes);
  collect(mc_tasks, mc_outcomes);

  std::vector<std::size_t> sizes;
  for (const PlanInstance& pi : instances) sizes.push_back(pi.instance.size());
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

  auto rows_for = [&](const std::vector<Task>& ts, const std::vector<Outcome>& os,
                      std::size_t cell, std::size_t n) {
    std::vector<const RunRecord*> records;
    const RunSettings* settings = nullptr;
    for (std::size_t t = 0; t < ts.size(); ++t) {
      if (ts[t].cell != cell || instances[ts[t].instance].instance.size() != n) {
        continue;
      }
      settings = &ts[t].settings;
      if (os[t].record) records.push_back(&*os[t].record);
    }
    if (!settings) return;
    ResultRow row = make_row(*settings, cell, n);
    aggregate(row, records);
    result.rows.push_back(row);
  };
  for (std::size_t c = 0; c < plan.cells.size(); ++c) {
    for (const std::size_t n : sizes) rows_for(tasks, outcomes, c, n);
    for (const std::size_t n : sizes) rows_for(mc_tasks, mc_outcomes, c, n);
  }

  if (plan.greedy) {
    for (const std::size_t n : sizes) {
      std::vector<RunRecord> records;
      for (std::size_t i = 0; i < instances.size(); ++i) {
        if (instances[i].instance.size() != n) continue;
        records.push_back(greedy_record(instances[i].instance));
        if (refs[i]) attach_reference(records.back(), *refs[i]);
      }
      RunSettings s;
      s.model = ModelKind::kGreedy;
      ResultRow row = make_row(s, plan.cells.size(), n);
      row.codec = "-";
      std::vector<const RunRecord*> ptrs;
      for (const RunRecord& r : records) ptrs.push_back(&r);
      aggregate(row, ptrs);
      result.rows.push_back(row);
    }
  }
  return result;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows,
                       bool timing) {
  out << "n,model,codec,gray,slice,circuit_or_layers,optimizer,r,mean_quality,"
         "sem,bitstrings,coverage,seconds\n";
  for (const ResultRow& row : rows) {
    out << row.n << ',' << row.model << ',' << row.codec << ','
        << (row.gray ? "true" : "false") << ',' << number(row.slice) << ','
        << row.circuit_or_layers << ',' << row.optimizer << ',' << row.r << ','
        << (row.mean_quality ? number(*row.mean_quality) : "") << ','
        << (row.sem ? number(*row.sem) : "") << ',' << number(row.bitstrings)
        << ',' << number(row.coverage) << ','
        << (timing ? number(row.seconds) : "") << '\n';
  }
}

Json record_to_json(const RunRecord& record, bool timing) {
  Json j;
  j["model"] = record.model;
  j["best_cycle"] = record.best_cycle.order();
  j["best_distance"] = record.best_distance;
  j["best_bits"] = record.best_bits.to_string();
  if (record.reference) j["reference"] = *record.reference;
  if (record.quality) j["quality"] = *record.quality;
  j["bitstrings_sampled"] = record.bitstrings_sampled;
  j["cache_hits"] = record.cache_hits;
  j["cache_misses"] = record.cache_misses;
  j["coverage"] = record.coverage;
  j["gradient_evaluations"] = record.gradient_evaluations;
  j["tracking_evaluations"] = record.tracking_evaluations;
  if (record.g0) j["g0"] = *record.g0;
  if (record.g0_floored) j["g0_floored"] = true;
  if (timing) j["wall_seconds"] = record.wall_seconds;
  Json trace = Json::array();
  for (const IterationTrace& t : record.trace) {
    trace.push_back({{"t", t.t}, {"sliced_avg", t.sliced_average}, {"best", t.best}});
  }
  j["trace"] = std::move(trace);
  return j;
}

void write_trace_csv(std::ostream& out, const RunRecord& record) {
  out << "t,sliced_avg,best\n";
  for (const IterationTrace& t : record.trace) {
    out << t.t << ',' << number(t.sliced_average) << ',' << number(t.best) << '\n';
  }
}

}  // namespace vartsp
