#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vartsp/bitstring.hpp"
#include "vartsp/codec.hpp"
#include "vartsp/cost.hpp"
#include "vartsp/optimizer.hpp"
#include "vartsp/tsp.hpp"

namespace vartsp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class InputMode { kZeros, kHalves, kWarm };
std::string to_string(InputMode mode);
InputMode parse_input_mode(const std::string& text);

enum class OptimKind { kSgd, kAdam };
std::string to_string(OptimKind kind);
OptimKind parse_optim_kind(const std::string& text);

struct OptimConfig {
  OptimKind kind = OptimKind::kSgd;
  double lr = 2e-5;
  double momentum = 0.8;  // beta1 for Adam
  double weight_decay = 0.0006;
  double beta2 = 0.999;
  double eps = 1e-8;

  static OptimConfig sgd();
  static OptimConfig adam();
};

// L square layers, each an affine map followed by sine.
class MlModel {
 public:
  MlModel(std::size_t q, std::size_t layers);

  // Weights and biases U(-1/sqrt(q), 1/sqrt(q)).
  static MlModel uniform(std::size_t q, std::size_t layers, std::mt19937_64& rng);
  // Identity weights plus N(0, sigma) noise on every entry, zero biases.
  static MlModel warm(std::size_t q, std::size_t layers, double sigma,
                      std::mt19937_64& rng);

  std::size_t q() const { return q_; }
  std::size_t layers() const { return weights_.size(); }
  Matrix& weight(std::size_t l) { return weights_[l]; }
  const Matrix& weight(std::size_t l) const { return weights_[l]; }
  Vector& bias(std::size_t l) { return biases_[l]; }
  const Vector& bias(std::size_t l) const { return biases_[l]; }

  struct Pass {
    std::vector<Matrix> inputs;  // layer inputs, rows = samples
    std::vector<Matrix> pre;     // affine outputs before sine
    Matrix output;               // binary output of the last layer
    std::vector<BitString> bits;
  };

  // Every layer is affine, sine, then binarize: entry (r, j) of layer l is 1
  // iff sin(z) > uniforms[l](r, j).
  Pass forward(const Matrix& input, std::span<const Matrix> uniforms) const;
  Pass forward(const Matrix& input, std::mt19937_64& rng) const;

  struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
  };

  // Straight-through: each binarization passes its upstream gradient
  // unchanged to the sine output.
  Gradients backward(const Pass& pass, const Matrix& grad_bits) const;

 private:
  std::size_t q_;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
};

// SGD with momentum or Adam, both with L2 weight decay folded into the
// gradient.
class MlOptimizer {
 public:
  explicit MlOptimizer(OptimConfig cfg) : cfg_(cfg) {}
  void step(MlModel& model, const MlModel::Gradients& grads);
  const OptimConfig& config() const { return cfg_; }

 private:
  OptimConfig cfg_;
  std::size_t t_ = 0;
  std::vector<Matrix> m_w_, v_w_;
  std::vector<Vector> m_b_, v_b_;
};

// Component j = (h(x) - h(x ^ e_j)) / (2 x_j - 1), i.e. h(x|j=1) - h(x|j=0).
// Queries the evaluator q + 1 times.
std::vector<double> cost_gradient(const BitString& x, CostEvaluator& evaluator);
// Same, with h(x) already known; q queries.
std::vector<double> cost_gradient(const BitString& x, double h_x,
                                  CostEvaluator& evaluator);

struct BitFlipProbe {
  std::vector<double> gradient;
  std::vector<double> flipped;  // h(x ^ e_j)
};
BitFlipProbe probe_bit_flips(const BitString& x, double h_x,
                             CostEvaluator& evaluator);

struct MlConfig {
  std::size_t layers = 4;
  std::size_t input_vectors = 64;
  InputMode input = InputMode::kZeros;
  double sigma = 0.05;
  OptimConfig optim;
  std::size_t epochs = 250;
  double slice = 1.0;
  bool caching = true;
};

// Rows of the input matrix for a mode; `warm_bits` is used for kWarm.
Matrix input_matrix(InputMode mode, std::size_t rows, std::size_t q,
                    const BitString& warm_bits);

// epochs + 1 forward passes. Each pass decodes every row, averages the
// lowest `slice` fraction, and queries the bit-flip gradient of every row;
// the first `epochs` passes are followed by a backward pass and an update.
// The best distance covers every decoded string, flip neighbours included.
RunRecord run_ml(const TspInstance& inst, const CodecSpec& codec,
                 const MlConfig& cfg, std::uint64_t seed,
                 const IterationObserver& observer = {});

}  // namespace vartsp
