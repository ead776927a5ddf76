#include "vartsp/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "vartsp/cost.hpp"
#include "vartsp/error.hpp"

namespace vartsp {

namespace {

// Best-so-far over every sampled string; first strict improvement wins.
struct BestTracker {
  double distance = std::numeric_limits<double>::infinity();
  BitString bits;

  void offer(const BatchCost& bc) {
    if (bc.best_distance < distance) {
      distance = bc.best_distance;
      bits = bc.best;
    }
  }
};

}  // namespace

SpsaSchedule spsa_schedules(const SpsaConfig& cfg, std::size_t t, double g0) {
  SpsaSchedule s;
  if (g0 == 0.0) {
    g0 = cfg.g0_floor;
    s.floored = true;
  }
  if (!(g0 > 0.0)) throw DomainError("G0 must be positive");
  const double tt = static_cast<double>(t);
  const double a = cfg.eta * std::pow(cfg.A + 1.0, cfg.alpha) / g0;
  s.a_t = a / std::pow(tt + 1.0 + cfg.A, cfg.alpha);
  s.c_t = cfg.c / std::pow(tt + 1.0, cfg.gamma);
  return s;
}

std::vector<double> spsa_gradient(const CostFunction& cost,
                                  std::span<const double> theta, double c_t,
                                  std::mt19937_64& rng) {
  const std::size_t dim = theta.size();
  std::vector<double> delta(dim);
  std::bernoulli_distribution coin(0.5);
  for (auto& d : delta) d = coin(rng) ? 1.0 : -1.0;
  std::vector<double> plus(theta.begin(), theta.end());
  std::vector<double> minus(theta.begin(), theta.end());
  for (std::size_t i = 0; i < dim; ++i) {
    plus[i] += c_t * delta[i];
    minus[i] -= c_t * delta[i];
  }
  const double diff = cost(plus) - cost(minus);
  std::vector<double> grad(dim);
  for (std::size_t i = 0; i < dim; ++i) grad[i] = diff / (2.0 * c_t * delta[i]);
  return grad;
}

std::vector<double> param_shift_gradient(const CostFunction& cost,
                                         std::span<const double> theta,
                                         double s) {
  if (!(s > 0.0)) throw DomainError("parameter-shift scale must be positive");
  const double shift = std::numbers::pi / (4.0 * s);
  std::vector<double> grad(theta.size());
  std::vector<double> probe(theta.begin(), theta.end());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + shift;
    const double up = cost(probe);
    probe[i] = theta[i] - shift;
    const double down = cost(probe);
    probe[i] = theta[i];
    grad[i] = s * (up - down);
  }
  return grad;
}

SpsaOutcome spsa_minimize(const CostFunction& cost, std::vector<double>& theta,
                          const SpsaConfig& cfg, std::size_t iterations,
                          std::mt19937_64& rng, const StepHook& before_step) {
  SpsaOutcome out;
  if (iterations == 0) return out;
  const double c0 = spsa_schedules(cfg, 0, 1.0).c_t;
  std::vector<double> grad = spsa_gradient(cost, theta, c0, rng);
  for (const double g : grad) out.g0 += std::abs(g);
  out.g0 /= static_cast<double>(grad.size());
  for (std::size_t t = 0; t < iterations; ++t) {
    if (before_step) before_step(t);
    const SpsaSchedule sched = spsa_schedules(cfg, t, out.g0);
    out.floored = sched.floored;
    if (t > 0) grad = spsa_gradient(cost, theta, sched.c_t, rng);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      theta[i] -= sched.a_t * grad[i];
    }
  }
  return out;
}

void param_shift_minimize(const CostFunction& cost, std::vector<double>& theta,
                          const ParamShiftConfig& cfg, std::size_t iterations,
                          const StepHook& before_step) {
  for (std::size_t t = 0; t < iterations; ++t) {
    if (before_step) before_step(t);
    const auto grad = param_shift_gradient(cost, theta, cfg.s);
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= cfg.eta * grad[i];
  }
}

double estimate_runtime(double iterations, double n_shot, double t_shot) {
  if (iterations < 0 || n_shot < 0 || t_shot < 0) {
    throw DomainError("runtime estimate needs non-negative inputs");
  }
  return 4.0 * iterations * n_shot * t_shot;
}

std::string to_string(GradientMethod method) {
  return method == GradientMethod::kSpsa ? "spsa" : "param_shift";
}

GradientMethod parse_gradient_method(const std::string& text) {
  if (text == "spsa") return GradientMethod::kSpsa;
  if (text == "param_shift" || text == "parameter_shift" ||
      text == "param-shift") {
    return GradientMethod::kParameterShift;
  }
  throw ConfigError("unknown gradient method \"" + text +
                    "\" (expected spsa or param_shift)");
}

RunRecord run_vqa(const TspInstance& inst, const CodecSpec& codec,
                  const VqaConfig& cfg, std::uint64_t seed,
                  const IterationObserver& observer) {
  const auto start = std::chrono::steady_clock::now();
  if (!(cfg.slice > 0.0) || cfg.slice > 1.0) {
    throw ConfigError("slice must lie in (0, 1]");
  }
  if (cfg.shots == 0) throw ConfigError("shots must be positive");
  CostEvaluator evaluator(inst, codec, cfg.caching);
  const std::size_t q = evaluator.bit_length();
  Sampler sampler(build_circuit(cfg.circuit, q, cfg.circuit3));
  const CircuitSpec& spec = sampler.spec();

  std::mt19937_64 rng(seed);
  ParameterVector theta(spec.param_count, cfg.init_angle);
  if (cfg.warm_start) {
    const Tour greedy = greedy_nearest_neighbour(inst);
    theta = load_warm_start(spec, encode_cycle(greedy.cycle, codec));
  }

  RunRecord record;
  record.model = "vqa";
  BestTracker best;
  const SliceConfig slice{cfg.slice};

  auto measure = [&](std::span<const double> at) {
    const SampleBatch batch = sampler.sample(at, cfg.shots, rng());
    BatchCost bc = batch_average(batch, slice, evaluator);
    best.offer(bc);
    return bc;
  };
  const CostFunction cost = [&](std::span<const double> at) {
    ++record.gradient_evaluations;
    return measure(at).sliced_average;
  };
  auto track = [&](std::size_t t) {
    ++record.tracking_evaluations;
    const BatchCost bc = measure(theta);
    record.trace.push_back({t, bc.sliced_average, best.distance});
    if (observer) observer(record.trace.back());
  };

  if (cfg.iterations == 0) {
    track(0);
  } else if (cfg.gradient == GradientMethod::kSpsa) {
    const SpsaOutcome out =
        spsa_minimize(cost, theta, cfg.spsa, cfg.iterations, rng, track);
    record.g0 = out.g0;
    record.g0_floored = out.floored;
  } else {
    param_shift_minimize(cost, theta, cfg.param_shift, cfg.iterations, track);
  }

  record.best_bits = best.bits;
  record.best_cycle = decode(codec, best.bits);
  record.best_distance = best.distance;
  record.cache_hits = evaluator.cache().hits();
  record.cache_misses = evaluator.cache().misses();
  record.bitstrings_sampled = evaluator.cache().queries();
  record.coverage = coverage(record.bitstrings_sampled, inst.size()).coverage;
  record.wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return record;
}

void attach_reference(RunRecord& record, double d_best) {
  record.reference = d_best;
  record.quality = quality(record.best_distance, d_best).q_sol;
}

}  // namespace vartsp
