#include "vartsp/ml.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "vartsp/error.hpp"

namespace vartsp {

std::string to_string(InputMode mode) {
  switch (mode) {
    case InputMode::kZeros: return "zeros";
    case InputMode::kHalves: return "halves";
    case InputMode::kWarm: return "warm";
  }
  return "?";
}

InputMode parse_input_mode(const std::string& text) {
  if (text == "zeros") return InputMode::kZeros;
  if (text == "halves" || text == "0.5") return InputMode::kHalves;
  if (text == "warm") return InputMode::kWarm;
  throw ConfigError("unknown ML input mode \"" + text +
                    "\" (expected zeros, halves or warm)");
}

std::string to_string(OptimKind kind) {
  return kind == OptimKind::kSgd ? "sgd" : "adam";
}

OptimKind parse_optim_kind(const std::string& text) {
  if (text == "sgd") return OptimKind::kSgd;
  if (text == "adam") return OptimKind::kAdam;
  throw ConfigError("unknown ML optimizer \"" + text +
                    "\" (expected sgd or adam)");
}

OptimConfig OptimConfig::sgd() { return OptimConfig{}; }

OptimConfig OptimConfig::adam() {
  OptimConfig cfg;
  cfg.kind = OptimKind::kAdam;
  cfg.lr = 0.001;
  cfg.momentum = 0.9;
  cfg.weight_decay = 0.0032;
  return cfg;
}

MlModel::MlModel(std::size_t q, std::size_t layers) : q_(q) {
  if (q == 0) throw ConfigError("ML model needs at least one binary variable");
  if (layers == 0) throw ConfigError("ML model needs at least one layer");
  weights_.assign(layers, Matrix::Zero(q, q));
  biases_.assign(layers, Vector::Zero(q));
}

MlModel MlModel::uniform(std::size_t q, std::size_t layers,
                         std::mt19937_64& rng) {
  MlModel m(q, layers);
  const double bound = 1.0 / std::sqrt(static_cast<double>(q));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (std::size_t l = 0; l < layers; ++l) {
    for (Eigen::Index i = 0; i < m.weights_[l].rows(); ++i) {
      for (Eigen::Index j = 0; j < m.weights_[l].cols(); ++j) {
        m.weights_[l](i, j) = dist(rng);
      }
    }
    for (Eigen::Index i = 0; i < m.biases_[l].size(); ++i) {
      m.biases_[l](i) = dist(rng);
    }
  }
  return m;
}

MlModel MlModel::warm(std::size_t q, std::size_t layers, double sigma,
                      std::mt19937_64& rng) {
  if (sigma < 0) throw ConfigError("warm-start sigma must be non-negative");
  MlModel m(q, layers);
  std::normal_distribution<double> noise(0.0, sigma);
  for (std::size_t l = 0; l < layers; ++l) {
    m.weights_[l].setIdentity();
    if (sigma == 0) continue;
    for (Eigen::Index i = 0; i < m.weights_[l].rows(); ++i) {
      for (Eigen::Index j = 0; j < m.weights_[l].cols(); ++j) {
        m.weights_[l](i, j) += noise(rng);
      }
    }
  }
  return m;
}

MlModel::Pass MlModel::forward(const Matrix& input,
                               std::span<const Matrix> uniforms) const {
  if (static_cast<std::size_t>(input.cols()) != q_) {
    throw DomainError("input has " + std::to_string(input.cols()) +
                      " columns, model has " + std::to_string(q_));
  }
  if (uniforms.size() != layers()) {
    throw DomainError("need one uniform matrix per layer");
  }
  Pass pass;
  Matrix a = input;
  for (std::size_t l = 0; l < layers(); ++l) {
    const Matrix& u = uniforms[l];
    if (u.rows() != input.rows() || u.cols() != input.cols()) {
      throw DomainError("uniform draws must match the input shape");
    }
    pass.inputs.push_back(a);
    Matrix z = a * weights_[l].transpose();
    z.rowwise() += biases_[l].transpose();
    a = (z.array().sin() > u.array()).cast<double>().matrix();
    pass.pre.push_back(std::move(z));
  }
  pass.output = a;
  pass.bits.reserve(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    BitString b(q_);
    for (std::size_t j = 0; j < q_; ++j) {
      b.set(j, a(r, static_cast<Eigen::Index>(j)) != 0.0);
    }
    pass.bits.push_back(std::move(b));
  }
  return pass;
}

MlModel::Pass MlModel::forward(const Matrix& input,
                               std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<Matrix> draws(layers(), Matrix(input.rows(), input.cols()));
  for (Matrix& u : draws) {
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      for (Eigen::Index c = 0; c < u.cols(); ++c) u(r, c) = dist(rng);
    }
  }
  return forward(input, draws);
}

MlModel::Gradients MlModel::backward(const Pass& pass,
                                     const Matrix& grad_bits) const {
  if (grad_bits.rows() != pass.output.rows() ||
      grad_bits.cols() != pass.output.cols()) {
    throw DomainError("bit gradient must match the output shape");
  }
  Gradients g;
  g.weights.resize(layers());
  g.biases.resize(layers());
  Matrix upstream = grad_bits;
  for (std::size_t l = layers(); l-- > 0;) {
    const Matrix gz =
        (upstream.array() * pass.pre[l].array().cos()).matrix();
    g.weights[l] = gz.transpose() * pass.inputs[l];
    g.biases[l] = gz.colwise().sum().transpose();
    if (l > 0) upstream = gz * weights_[l];
  }
  return g;
}

void MlOptimizer::step(MlModel& model, const MlModel::Gradients& grads) {
  const std::size_t L = model.layers();
  if (m_w_.empty()) {
    for (std::size_t l = 0; l < L; ++l) {
      m_w_.push_back(Matrix::Zero(model.q(), model.q()));
      v_w_.push_back(Matrix::Zero(model.q(), model.q()));
      m_b_.push_back(Vector::Zero(model.q()));
      v_b_.push_back(Vector::Zero(model.q()));
    }
  }
  ++t_;
  const double lambda = cfg_.weight_decay;
  auto update = [&](auto& w, const auto& grad, auto& m, auto& v) {
    const auto g = (grad + lambda * w).eval();
    if (cfg_.kind == OptimKind::kSgd) {
      if (t_ == 1) {
        m = g;
      } else {
        m = cfg_.momentum * m + g;
      }
      w -= cfg_.lr * m;
      return;
    }
    const double b1 = cfg_.momentum;
    const double b2 = cfg_.beta2;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g.cwiseProduct(g);
    const double c1 = 1 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1 - std::pow(b2, static_cast<double>(t_));
    w.array() -= cfg_.lr * (m.array() / c1) /
                 ((v.array() / c2).sqrt() + cfg_.eps);
  };
  for (std::size_t l = 0; l < L; ++l) {
    update(model.weight(l), grads.weights[l], m_w_[l], v_w_[l]);
    update(model.bias(l), grads.biases[l], m_b_[l], v_b_[l]);
  }
}

BitFlipProbe probe_bit_flips(const BitString& x, double h_x,
                             CostEvaluator& evaluator) {
  BitFlipProbe out;
  out.gradient.resize(x.size());
  out.flipped.resize(x.size());
  BitString probe = x;
  for (std::size_t j = 0; j < x.size(); ++j) {
    probe.flip(j);
    const double h_flip = evaluator.evaluate(probe);
    probe.flip(j);
    out.flipped[j] = h_flip;
    out.gradient[j] = x[j] ? h_x - h_flip : h_flip - h_x;
  }
  return out;
}

std::vector<double> cost_gradient(const BitString& x, double h_x,
                                  CostEvaluator& evaluator) {
  return probe_bit_flips(x, h_x, evaluator).gradient;
}

std::vector<double> cost_gradient(const BitString& x,
                                  CostEvaluator& evaluator) {
  return cost_gradient(x, evaluator.evaluate(x), evaluator);
}

Matrix input_matrix(InputMode mode, std::size_t rows, std::size_t q,
                    const BitString& warm_bits) {
  const auto r = static_cast<Eigen::Index>(rows);
  const auto c = static_cast<Eigen::Index>(q);
  switch (mode) {
    case InputMode::kZeros:
      return Matrix::Zero(r, c);
    case InputMode::kHalves:
      return Matrix::Constant(r, c, 0.5);
    case InputMode::kWarm: {
      if (warm_bits.size() != q) {
        throw ConfigError("warm-start string has " +
                          std::to_string(warm_bits.size()) + " bits, model has " +
                          std::to_string(q));
      }
      Matrix m(r, c);
      for (Eigen::Index j = 0; j < c; ++j) {
        m.col(j).setConstant(warm_bits[static_cast<std::size_t>(j)] ? 1.0 : 0.0);
      }
      return m;
    }
  }
  return Matrix::Zero(r, c);
}

RunRecord run_ml(const TspInstance& inst, const CodecSpec& codec,
                 const MlConfig& cfg, std::uint64_t seed,
                 const IterationObserver& observer) {
  const auto start = std::chrono::steady_clock::now();
  if (!(cfg.slice > 0.0) || cfg.slice > 1.0) {
    throw ConfigError("slice must lie in (0, 1]");
  }
  if (cfg.input_vectors == 0) throw ConfigError("input vectors must be positive");
  CostEvaluator evaluator(inst, codec, cfg.caching);
  const std::size_t q = evaluator.bit_length();
  std::mt19937_64 rng(seed);

  const bool warm = cfg.input == InputMode::kWarm;
  BitString warm_bits;
  if (warm) warm_bits = encode_cycle(greedy_nearest_neighbour(inst).cycle, codec);
  MlModel model = warm ? MlModel::warm(q, cfg.layers, cfg.sigma, rng)
                       : MlModel::uniform(q, cfg.layers, rng);
  const Matrix input = input_matrix(cfg.input, cfg.input_vectors, q, warm_bits);
  MlOptimizer optimizer(cfg.optim);

  RunRecord record;
  record.model = "ml";
  double best = std::numeric_limits<double>::infinity();
  BitString best_bits;
  // Every decoded string counts, bit-flip neighbours included.
  auto offer = [&](double d, const BitString& x, std::optional<std::size_t> flip) {
    if (!(d < best)) return;
    best = d;
    best_bits = x;
    if (flip) best_bits.flip(*flip);
  };
  const std::size_t rows = cfg.input_vectors;
  const std::size_t keep = slice_count(cfg.slice, rows);

  for (std::size_t epoch = 0; epoch <= cfg.epochs; ++epoch) {
    const MlModel::Pass pass = model.forward(input, rng);
    std::vector<double> cost(rows);
    Matrix grad_bits = Matrix::Zero(static_cast<Eigen::Index>(rows),
                                    static_cast<Eigen::Index>(q));
    for (std::size_t r = 0; r < rows; ++r) {
      const BitString& x = pass.bits[r];
      cost[r] = evaluator.evaluate(x);
      offer(cost[r], x, std::nullopt);
      const BitFlipProbe probe = probe_bit_flips(x, cost[r], evaluator);
      for (std::size_t j = 0; j < q; ++j) {
        offer(probe.flipped[j], x, j);
        grad_bits(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
            probe.gradient[j];
      }
    }
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return cost[a] < cost[b];
    });
    double total = 0.0;
    std::vector<char> selected(rows, 0);
    for (std::size_t i = 0; i < keep; ++i) {
      total += cost[order[i]];
      selected[order[i]] = 1;
    }
    record.trace.push_back({epoch, total / static_cast<double>(keep), best});
    ++record.tracking_evaluations;
    if (observer) observer(record.trace.back());
    if (epoch == cfg.epochs) break;

    for (std::size_t r = 0; r < rows; ++r) {
      const auto row = static_cast<Eigen::Index>(r);
      if (selected[r]) {
        grad_bits.row(row) /= static_cast<double>(keep);
      } else {
        grad_bits.row(row).setZero();
      }
    }
    optimizer.step(model, model.backward(pass, grad_bits));
    ++record.gradient_evaluations;
  }

  record.best_bits = best_bits;
  record.best_cycle = decode(codec, best_bits);
  record.best_distance = best;
  record.cache_hits = evaluator.cache().hits();
  record.cache_misses = evaluator.cache().misses();
  record.bitstrings_sampled = evaluator.cache().queries();
  record.coverage = coverage(record.bitstrings_sampled, inst.size()).coverage;
  record.wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return record;
}

}  // namespace vartsp
