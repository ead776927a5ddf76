#include "vartsp/ml.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vartsp/error.hpp"

namespace vartsp {
namespace {

std::vector<Matrix> uniform_draws(std::size_t layers, Eigen::Index rows, Eigen::Index cols,
                                  std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Matrix> out(layers, Matrix(rows, cols));
  for (Matrix& m : out)
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  return out;
}

MlModel random_model(std::size_t q, std::size_t layers, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 0.7);
  MlModel m(q, layers);
  for (std::size_t l = 0; l < layers; ++l) {
    for (Eigen::Index i = 0; i < m.weight(l).size(); ++i) m.weight(l).data()[i] = n(rng);
    for (Eigen::Index i = 0; i < m.bias(l).size(); ++i) m.bias(l)(i) = n(rng);
  }
  return m;
}

// Straight-through surrogate with the binarization offsets frozen:
// a_{l+1} = sin(a_l W_l^T + b_l) + d_l, loss = sum(G .* a_L).
double surrogate_loss(const MlModel& m, const Matrix& input,
                      const std::vector<Matrix>& offsets, const Matrix& g) {
  Matrix a = input;
  for (std::size_t l = 0; l < m.layers(); ++l) {
    Matrix z = a * m.weight(l).transpose();
    z.rowwise() += m.bias(l).transpose();
    a = z.array().sin().matrix() + offsets[l];
  }
  return (g.array() * a.array()).sum();
}

TEST(MlForwardTest, BinarizesAgainstUniforms) {
  MlModel m(2, 1);
  m.bias(0) << std::asin(0.3), std::asin(0.7);
  Matrix u(1, 2);
  u << 0.5, 0.5;
  const std::vector<Matrix> draws{u};
  const auto pass = m.forward(Matrix::Zero(1, 2), draws);
  EXPECT_EQ(pass.bits[0].to_string(), "01");
  EXPECT_EQ(pass.output(0, 1), 1.0);
}

TEST(MlForwardTest, ZeroModelEmitsZerosAndShiftedBiasEmitsOnes) {
  std::mt19937_64 rng(1);
  MlModel m(5, 3);
  auto pass = m.forward(Matrix::Constant(4, 5, 1.0), rng);
  for (const BitString& b : pass.bits) EXPECT_EQ(b.to_string(), "00000");
  for (std::size_t l = 0; l < 3; ++l) m.bias(l).setConstant(std::numbers::pi / 2);
  pass = m.forward(Matrix::Zero(4, 5), rng);
  for (const BitString& b : pass.bits) EXPECT_EQ(b.to_string(), "11111");
}

TEST(MlForwardTest, ShapeErrors) {
  std::mt19937_64 rng(1);
  const MlModel m(3, 2);
  EXPECT_THROW(m.forward(Matrix::Zero(2, 4), rng), DomainError);
  const std::vector<Matrix> one{Matrix::Zero(2, 3)};
  EXPECT_THROW(m.forward(Matrix::Zero(2, 3), one), DomainError);
}

TEST(MlInitTest, UniformBounds) {
  std::mt19937_64 rng(2);
  const MlModel m = MlModel::uniform(16, 4, rng);
  for (std::size_t l = 0; l < 4; ++l) {
    EXPECT_LE(m.weight(l).cwiseAbs().maxCoeff(), 0.25);
    EXPECT_LE(m.bias(l).cwiseAbs().maxCoeff(), 0.25);
    EXPECT_GT(m.weight(l).cwiseAbs().maxCoeff(), 0.2);
  }
}

TEST(MlInitTest, WarmWithoutNoiseIsIdentity) {
  std::mt19937_64 rng(3);
  const MlModel m = MlModel::warm(6, 3, 0.0, rng);
  for (std::size_t l = 0; l < 3; ++l) {
    EXPECT_EQ(m.weight(l), Matrix::Identity(6, 6));
    EXPECT_EQ(m.bias(l), Vector::Zero(6));
  }
}

TEST(MlInitTest, WarmNoiseScale) {
  std::mt19937_64 rng(4);
  const MlModel m = MlModel::warm(40, 1, 0.05, rng);
  const Matrix noise = m.weight(0) - Matrix::Identity(40, 40);
  const double var = noise.array().square().mean();
  EXPECT_NEAR(std::sqrt(var), 0.05, 0.005);
}

TEST(MlInputTest, Modes) {
  EXPECT_EQ(input_matrix(InputMode::kZeros, 2, 3, {}), Matrix::Zero(2, 3));
  EXPECT_EQ(input_matrix(InputMode::kHalves, 2, 3, {}), Matrix::Constant(2, 3, 0.5));
  const Matrix w = input_matrix(InputMode::kWarm, 2, 3, BitString::from_string("101"));
  EXPECT_EQ(w(1, 0), 1.0);
  EXPECT_EQ(w(1, 1), 0.0);
  EXPECT_THROW(input_matrix(InputMode::kWarm, 2, 3, BitString::from_string("10")),
               ConfigError);
  EXPECT_EQ(parse_input_mode("0.5"), InputMode::kHalves);
  EXPECT_THROW(parse_input_mode("ones"), ConfigError);
}

TEST(BitFlipGradientTest, MatchesHandDifferences) {
  const TspInstance inst({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
  const CodecSpec spec{CodecKind::kNonFactorial, false, 4};
  CostEvaluator ev(inst, spec);
  const auto h = [&](const char* s) { return ev.compute(BitString::from_string(s)); };
  const auto g = cost_gradient(BitString::from_string("010"), ev);
  EXPECT_DOUBLE_EQ(g[0], h("110") - h("010"));
  EXPECT_DOUBLE_EQ(g[1], h("010") - h("000"));
  EXPECT_DOUBLE_EQ(g[2], h("011") - h("010"));
  EXPECT_EQ(ev.cache().queries(), 4u);
  // "010" is the crossing tour; clearing bit 1 gives the square.
  EXPECT_GT(g[1], 0.0);
}

TEST(MlBackwardTest, SineLayerMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  const MlModel m = random_model(3, 1, rng);
  Matrix input(4, 3);
  input.setRandom();
  Matrix g(4, 3);
  g.setRandom();
  const auto draws = uniform_draws(1, 4, 3, rng);
  const auto pass = m.forward(input, draws);
  const std::vector<Matrix> zero{Matrix::Zero(4, 3)};
  const auto grads = m.backward(pass, g);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < 9; ++i) {
    MlModel up = m, down = m;
    up.weight(0).data()[i] += h;
    down.weight(0).data()[i] -= h;
    const double fd = (surrogate_loss(up, input, zero, g) -
                       surrogate_loss(down, input, zero, g)) / (2 * h);
    EXPECT_NEAR(grads.weights[0].data()[i], fd, 1e-7);
  }
}

TEST(MlBackwardTest, FullModelMatchesFrozenNoiseFiniteDifferences) {
  std::mt19937_64 rng(6);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const MlModel m = random_model(3, 4, rng);
    Matrix input(5, 3);
    input.setRandom();
    Matrix g(5, 3);
    g.setRandom();
    const auto draws = uniform_draws(4, 5, 3, rng);
    const auto pass = m.forward(input, draws);
    std::vector<Matrix> offsets;
    for (std::size_t l = 0; l < 4; ++l) {
      const Matrix next = l + 1 < 4 ? pass.inputs[l + 1] : pass.output;
      offsets.push_back(next - pass.pre[l].array().sin().matrix());
    }
    const auto grads = m.backward(pass, g);
    const double h = 1e-6;
    for (std::size_t l = 0; l < 4; ++l) {
      for (Eigen::Index i = 0; i < 9 + 3; ++i) {
        MlModel up = m, down = m;
        double analytic = 0.0;
        if (i < 9) {
          up.weight(l).data()[i] += h;
          down.weight(l).data()[i] -= h;
          analytic = grads.weights[l].data()[i];
        } else {
          up.bias(l)(i - 9) += h;
          down.bias(l)(i - 9) -= h;
          analytic = grads.biases[l](i - 9);
        }
        const double fd = (surrogate_loss(up, input, offsets, g) -
                           surrogate_loss(down, input, offsets, g)) / (2 * h);
        worst = std::max(worst, std::abs(analytic - fd) / std::max(1.0, std::abs(fd)));
      }
    }
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(MlOptimizerTest, SgdMatchesHandRecurrence) {
  MlModel m(1, 1);
  m.weight(0)(0, 0) = 1.0;
  m.bias(0)(0) = 0.0;
  OptimConfig cfg = OptimConfig::sgd();
  cfg.lr = 0.1;
  cfg.momentum = 0.5;
  cfg.weight_decay = 0.0;
  MlOptimizer opt(cfg);
  MlModel::Gradients g{{Matrix::Constant(1, 1, 2.0)}, {Vector::Constant(1, 0.0)}};
  opt.step(m, g);  // buf = 2, w = 1 - 0.2
  EXPECT_DOUBLE_EQ(m.weight(0)(0, 0), 0.8);
  opt.step(m, g);  // buf = 0.5 * 2 + 2 = 3, w = 0.8 - 0.3
  EXPECT_DOUBLE_EQ(m.weight(0)(0, 0), 0.5);
}

TEST(MlOptimizerTest, AdamMatchesHandRecurrence) {
  MlModel m(1, 1);
  m.weight(0)(0, 0) = 1.0;
  OptimConfig cfg = OptimConfig::adam();
  cfg.weight_decay = 0.0;
  MlOptimizer opt(cfg);
  MlModel::Gradients g{{Matrix::Constant(1, 1, 4.0)}, {Vector::Constant(1, 0.0)}};
  opt.step(m, g);
  // First bias-corrected step is lr * g / (|g| + eps).
  const double w1 = 1.0 - 1e-3 * 4.0 / (4.0 + 1e-8);
  EXPECT_NEAR(m.weight(0)(0, 0), w1, 1e-15);
  g.weights[0](0, 0) = -2.0;
  opt.step(m, g);
  const double m2 = 0.9 * 0.1 * 4.0 + 0.1 * -2.0;
  const double v2 = 0.999 * 0.001 * 16.0 + 0.001 * 4.0;
  const double mh = m2 / (1 - 0.81), vh = v2 / (1 - 0.999 * 0.999);
  EXPECT_NEAR(m.weight(0)(0, 0), w1 - 1e-3 * mh / (std::sqrt(vh) + 1e-8), 1e-15);
}

TEST(MlOptimizerTest, DecayOnlyShrinks) {
  for (OptimConfig cfg : {OptimConfig::sgd(), OptimConfig::adam()}) {
    cfg.weight_decay = 0.1;
    cfg.lr = 0.01;
    std::mt19937_64 rng(7);
    MlModel m = random_model(4, 2, rng);
    const MlModel before = m;
    MlOptimizer opt(cfg);
    MlModel::Gradients zero{{Matrix::Zero(4, 4), Matrix::Zero(4, 4)},
                            {Vector::Zero(4), Vector::Zero(4)}};
    opt.step(m, zero);
    for (std::size_t l = 0; l < 2; ++l) {
      for (Eigen::Index i = 0; i < 16; ++i) {
        const double b = before.weight(l).data()[i];
        const double a = m.weight(l).data()[i];
        EXPECT_LT(std::abs(a), std::abs(b));
        EXPECT_GE(a * b, 0.0);
      }
    }
  }
}

TEST(MlOptimizerTest, ZeroGradientZeroDecayUnchanged) {
  for (OptimConfig cfg : {OptimConfig::sgd(), OptimConfig::adam()}) {
    cfg.weight_decay = 0.0;
    std::mt19937_64 rng(8);
    MlModel m = random_model(3, 2, rng);
    const MlModel before = m;
    MlOptimizer opt(cfg);
    MlModel::Gradients zero{{Matrix::Zero(3, 3), Matrix::Zero(3, 3)},
                            {Vector::Zero(3), Vector::Zero(3)}};
    for (int k = 0; k < 3; ++k) opt.step(m, zero);
    for (std::size_t l = 0; l < 2; ++l) {
      EXPECT_EQ(m.weight(l), before.weight(l));
      EXPECT_EQ(m.bias(l), before.bias(l));
    }
  }
}

TEST(MlOptimizerTest, Defaults) {
  const OptimConfig s = OptimConfig::sgd();
  EXPECT_EQ(s.lr, 2e-5);
  EXPECT_EQ(s.momentum, 0.8);
  EXPECT_EQ(s.weight_decay, 0.0006);
  const OptimConfig a = OptimConfig::adam();
  EXPECT_EQ(a.lr, 1e-3);
  EXPECT_EQ(a.momentum, 0.9);
  EXPECT_EQ(a.weight_decay, 0.0032);
  EXPECT_EQ(a.beta2, 0.999);
  EXPECT_EQ(a.eps, 1e-8);
}

TEST(RunMlTest, QueryAccounting) {
  const TspInstance inst = random_instance(6, 9);
  const CodecSpec spec{CodecKind::kNonFactorial, false, 6};
  MlConfig cfg;
  cfg.epochs = 0;
  const RunRecord zero = run_ml(inst, spec, cfg, 1);
  EXPECT_EQ(zero.trace.size(), 1u);
  EXPECT_EQ(zero.gradient_evaluations, 0u);
  EXPECT_EQ(zero.bitstrings_sampled, 64u * 9u);
  cfg.epochs = 10;
  const RunRecord ten = run_ml(inst, spec, cfg, 1);
  EXPECT_EQ(ten.bitstrings_sampled, 11u * 64u * 9u);
  EXPECT_EQ(ten.gradient_evaluations, 10u);
  cfg.input_vectors = 128;
  EXPECT_EQ(run_ml(inst, spec, cfg, 1).bitstrings_sampled, 2u * ten.bitstrings_sampled);
}

TEST(RunMlTest, CacheCallsAtFourLocations) {
  const TspInstance inst = random_instance(4, 9);
  MlConfig cfg;
  cfg.input_vectors = 1024;
  const RunRecord r = run_ml(inst, CodecSpec{CodecKind::kNonFactorial, false, 4}, cfg, 1);
  EXPECT_EQ(r.bitstrings_sampled, 1028096u);
}

TEST(RunMlTest, SixLocationsQuality) {
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const TspInstance inst = random_instance(6, 200 + seed);
    RunRecord r = run_ml(inst, CodecSpec{CodecKind::kNonFactorial, false, 6}, MlConfig{}, seed);
    attach_reference(r, brute_force_optimum(inst).length);
    if (*r.quality >= 0.99) ++good;
  }
  EXPECT_GE(good, 4);
}

TEST(RunMlTest, ReproducibleAndWarmNoWorseThanGreedy) {
  const TspInstance inst = random_instance(7, 12);
  const CodecSpec spec{CodecKind::kNonFactorial, false, 7};
  MlConfig cfg;
  cfg.epochs = 20;
  const RunRecord a = run_ml(inst, spec, cfg, 3);
  const RunRecord b = run_ml(inst, spec, cfg, 3);
  EXPECT_EQ(a.best_bits, b.best_bits);
  EXPECT_EQ(a.trace.back().sliced_average, b.trace.back().sliced_average);
  cfg.input = InputMode::kWarm;
  cfg.sigma = 0.0;
  const RunRecord w = run_ml(inst, spec, cfg, 3);
  EXPECT_LE(w.best_distance, greedy_nearest_neighbour(inst).length + 1e-9);
}

TEST(RunMlTest, BadConfig) {
  const TspInstance inst = random_instance(5, 1);
  const CodecSpec spec{CodecKind::kNonFactorial, false, 5};
  MlConfig cfg;
  cfg.input_vectors = 0;
  EXPECT_THROW(run_ml(inst, spec, cfg, 1), ConfigError);
  cfg = MlConfig{};
  cfg.slice = 1.5;
  EXPECT_THROW(run_ml(inst, spec, cfg, 1), ConfigError);
}

}  // namespace
}  // namespace vartsp
