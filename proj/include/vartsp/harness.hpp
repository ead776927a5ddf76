#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vartsp/codec.hpp"
#include "vartsp/json.hpp"
#include "vartsp/optimizer.hpp"
#include "vartsp/settings.hpp"
#include "vartsp/tsp.hpp"

namespace vartsp {

// Best of `budget` uniform random bit strings of codec length. Draws come from
// one stream, so a larger budget extends a smaller one's draws. Throws
// ConfigError for budget 0.
RunRecord monte_carlo(const TspInstance& inst, const CodecSpec& codec,
                      std::uint64_t budget, std::uint64_t seed);

// Nearest-neighbour tour from location 0 as a one-shot RunRecord.
RunRecord greedy_record(const TspInstance& inst);

// Dispatch on settings.model. Monte Carlo needs settings.budget > 0.
RunRecord run_model(const TspInstance& inst, const RunSettings& settings,
                    std::uint64_t seed, const IterationObserver& observer = {});

struct PlanInstance {
  TspInstance instance;
  std::optional<double> optimum;  // given, or brute force for small n
  std::string label;
};

struct ExperimentPlan {
  std::string name;
  std::vector<PlanInstance> instances;
  std::vector<RunSettings> cells;
  std::size_t runs = 5;
  std::uint64_t seed_base = 1;
  bool monte_carlo = false;  // add a budget-matched Monte Carlo row per cell
  bool greedy = false;       // add one greedy row per instance size
};

// Plan JSON:
//   {"name": ..., "runs": 5, "seed_base": 1, "monte_carlo": false,
//    "greedy": false,
//    "instances": [{"path": "a.csv", "optimum": 4.0},
//                  {"generate": {"n": 6, "seed": 3}},
//                  {"generate": {"sizes": [4, 5], "count": 5, "seed": 100}}],
//    "base": {settings}, "grid": {"key": [values, ...], ...},
//    "cells": [{settings}, ...]}
// Cells are the grid's cartesian product over base (first key slowest),
// followed by explicit cells applied over base. Relative instance paths
// resolve against `root`. Throws ConfigError or DataError.
ExperimentPlan parse_plan(const Json& j, const std::filesystem::path& root = {});
ExperimentPlan load_plan(const std::filesystem::path& path);

// Reference optimum for quality: the given value, else brute force when
// n <= kBruteForceMaxLocations.
std::optional<double> reference_optimum(const TspInstance& inst,
                                        std::optional<double> given);

struct ResultRow {
  std::size_t n = 0;
  std::string model;
  std::string codec;
  bool gray = false;
  double slice = 1.0;
  std::size_t circuit_or_layers = 0;
  std::string optimizer;
  std::size_t r = 0;
  std::optional<double> mean_quality;  // absent without a reference
  std::optional<double> sem;           // present iff r >= 2
  double bitstrings = 0.0;             // mean H + M per run
  double coverage = 0.0;               // mean per run
  double seconds = 0.0;                // mean wall time per run
  std::string digest;
  std::size_t cell = 0;  // index into the plan's cells
};

struct CellFailure {
  std::size_t cell = 0;
  std::string instance;
  std::uint64_t seed = 0;
  std::string message;
};

struct PlanResult {
  std::vector<ResultRow> rows;
  std::vector<CellFailure> failures;
};

using ProgressFn = std::function<void(const std::string&)>;

// Runs every cell on every instance `runs` times with seeds seed_base + k,
// in at most `jobs` threads. Rows are one per (cell, n) in cell order, then
// n ascending; Monte Carlo rows follow their matched cell and draw exactly the
// maximum H + M over that cell's runs on the same instance. Failures are
// collected, not thrown.
PlanResult run_plan(const ExperimentPlan& plan, std::size_t jobs = 1,
                    const ProgressFn& progress = {});

// Fixed header: n,model,codec,gray,slice,circuit_or_layers,optimizer,r,
// mean_quality,sem,bitstrings,coverage,seconds. Seconds is left empty unless
// `timing` is set.
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows,
                       bool timing);

// RunRecord as JSON; wall time only with `timing`.
Json record_to_json(const RunRecord& record, bool timing);
// Per-iteration trace: t,sliced_avg,best.
void write_trace_csv(std::ostream& out, const RunRecord& record);

}  // namespace vartsp
