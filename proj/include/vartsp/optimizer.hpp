#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vartsp/bitstring.hpp"
#include "vartsp/codec.hpp"
#include "vartsp/qsim.hpp"
#include "vartsp/tsp.hpp"

namespace vartsp {

// Scalar objective over a parameter vector, e.g. a sliced average of fresh
// samples.
using CostFunction = std::function<double(std::span<const double>)>;

struct SpsaConfig {
  double A = 25.0;
  double c = std::numbers::pi / 10;
  double alpha = 0.602;
  double gamma = 0.101;
  double eta = 0.1;
  // Stand-in for G0 when the initial gradient estimate is exactly zero.
  double g0_floor = 1e6;
};

struct ParamShiftConfig {
  double s = 0.5;  // shift magnitude pi / (4 s)
  double eta = 0.1;
};

struct SpsaSchedule {
  double a_t = 0.0;
  double c_t = 0.0;
  bool floored = false;  // G0 was zero and g0_floor was used
};

// c_t = c / (t+1)^gamma, a_t = a / (t+1+A)^alpha, a = eta (A+1)^alpha / G0.
SpsaSchedule spsa_schedules(const SpsaConfig& cfg, std::size_t t, double g0);

// Two evaluations at theta +- c_t Delta, Delta_i uniform on {-1, +1}.
std::vector<double> spsa_gradient(const CostFunction& cost,
                                  std::span<const double> theta, double c_t,
                                  std::mt19937_64& rng);

// s [H(theta + e_i pi/(4s)) - H(theta - e_i pi/(4s))] per component;
// 2 * dim evaluations.
std::vector<double> param_shift_gradient(const CostFunction& cost,
                                         std::span<const double> theta,
                                         double s);

struct SpsaOutcome {
  double g0 = 0.0;
  bool floored = false;
};

// Runs `iterations` SPSA updates on `theta` in place. The first gradient
// estimate sets G0 and is reused as the t = 0 step, so the loop costs exactly
// 2 * iterations evaluations. `before_step(t)` runs ahead of each update.
using StepHook = std::function<void(std::size_t)>;
SpsaOutcome spsa_minimize(const CostFunction& cost, std::vector<double>& theta,
                          const SpsaConfig& cfg, std::size_t iterations,
                          std::mt19937_64& rng, const StepHook& before_step = {});

// Plain gradient descent with parameter-shift gradients, step eta.
void param_shift_minimize(const CostFunction& cost, std::vector<double>& theta,
                          const ParamShiftConfig& cfg, std::size_t iterations,
                          const StepHook& before_step = {});

// 4 I n_shot t_shot: two gradient evaluations plus the sliced and simple
// averages per iteration. Throws DomainError on negative inputs.
double estimate_runtime(double iterations, double n_shot, double t_shot);

enum class GradientMethod { kSpsa, kParameterShift };
std::string to_string(GradientMethod method);
GradientMethod parse_gradient_method(const std::string& text);

struct VqaConfig {
  int circuit = 2;
  Circuit3Variant circuit3 = Circuit3Variant::kRzAndRzz;
  GradientMethod gradient = GradientMethod::kSpsa;
  SpsaConfig spsa;
  ParamShiftConfig param_shift;
  std::size_t iterations = 250;
  std::uint64_t shots = 1024;
  double slice = 0.8;
  bool warm_start = false;
  double init_angle = 0.0;  // cold-start constant for every angle
  bool caching = true;
};

struct IterationTrace {
  std::size_t t = 0;
  double sliced_average = 0.0;
  double best = 0.0;
};

struct RunRecord {
  std::string model;
  std::vector<IterationTrace> trace;
  Cycle best_cycle;
  BitString best_bits;
  double best_distance = 0.0;
  std::uint64_t bitstrings_sampled = 0;  // cache queries H + M
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  double coverage = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t gradient_evaluations = 0;  // cost evaluations spent on gradients
  std::uint64_t tracking_evaluations = 0;
  std::optional<double> g0;
  bool g0_floored = false;
  std::optional<double> reference;  // D_best, when known
  std::optional<double> quality;    // D_best / D_sim
};

using IterationObserver = std::function<void(const IterationTrace&)>;

// Variational loop: sample, decode, average, record best, gradient step.
// The circuit width is the codec bit length. SPSA spends two evaluations per
// iteration plus one tracking evaluation at the current parameters; G0 comes
// from the first gradient estimate. With zero iterations a single tracking
// sample is taken.
RunRecord run_vqa(const TspInstance& inst, const CodecSpec& codec,
                  const VqaConfig& cfg, std::uint64_t seed,
                  const IterationObserver& observer = {});

// Fills reference/quality from a known optimum.
void attach_reference(RunRecord& record, double d_best);

}  // namespace vartsp
