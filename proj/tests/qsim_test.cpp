#include "vartsp/qsim.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <unsupported/Eigen/KroneckerProduct>

#include "vartsp/error.hpp"

namespace vartsp {
namespace {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using std::numbers::pi;
const Amplitude kI{0.0, 1.0};

// Independent operator oracle: exp(-i t P / 2) = cos(t/2) I - i sin(t/2) P
// for involutory P, embedded with qubit 0 as the leftmost Kronecker factor.

Mat pauli(char p) {
  Mat m(2, 2);
  switch (p) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -kI, kI, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m = Mat::Identity(2, 2);
  }
  return m;
}

Mat rotation(const Mat& p, double t) {
  return std::cos(t / 2) * Mat::Identity(p.rows(), p.cols()) - kI * std::sin(t / 2) * p;
}

Mat local_matrix(const GateOp& g, double t) {
  switch (g.kind) {
    case GateKind::kH: {
      Mat h(2, 2);
      h << 1, 1, 1, -1;
      return h / std::sqrt(2.0);
    }
    case GateKind::kRX: return rotation(pauli('X'), t);
    case GateKind::kRY: return rotation(pauli('Y'), t);
    case GateKind::kRZ: return rotation(pauli('Z'), t);
    case GateKind::kRXX:
      return rotation(Eigen::kroneckerProduct(pauli('X'), pauli('X')).eval(), t);
    case GateKind::kRZZ:
      return rotation(Eigen::kroneckerProduct(pauli('Z'), pauli('Z')).eval(), t);
    case GateKind::kCX: {
      Mat cx = Mat::Zero(4, 4);
      cx(0, 0) = cx(1, 1) = cx(2, 3) = cx(3, 2) = 1;
      return cx;
    }
  }
  return {};
}

Mat embed(const Mat& local, std::size_t first, std::size_t q) {
  const std::size_t span = local.rows() == 2 ? 1 : 2;
  const Mat left = Mat::Identity(1 << first, 1 << first);
  const std::size_t rest = q - first - span;
  const Mat right = Mat::Identity(1 << rest, 1 << rest);
  return Eigen::kroneckerProduct(Eigen::kroneckerProduct(left, local).eval(), right).eval();
}

Vec oracle_state(const CircuitSpec& spec, std::span<const double> theta) {
  Vec psi = Vec::Zero(1 << spec.q);
  psi(0) = 1;
  for (const GateOp& g : spec.gates) {
    psi = embed(local_matrix(g, g.angle(theta)), g.targets[0], spec.q) * psi;
  }
  return psi;
}

std::vector<double> random_theta(std::size_t count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2 * pi, 2 * pi);
  std::vector<double> t(count);
  for (double& x : t) x = u(rng);
  return t;
}

TEST(BuildCircuitTest, GateAndParameterCounts) {
  const CircuitSpec c4 = build_circuit(4, 3);
  EXPECT_EQ(c4.gates.size(), 3u);
  EXPECT_EQ(c4.param_count, 3u);
  const CircuitSpec c2 = build_circuit(2, 3);
  EXPECT_EQ(c2.gates.size(), 5u);
  EXPECT_EQ(c2.param_count, 5u);
  EXPECT_EQ(build_circuit(1, 29).param_count, 58u);
  EXPECT_EQ(build_circuit(3, 4).param_count, 7u);
  EXPECT_EQ(build_circuit(3, 4, Circuit3Variant::kRzOnly).param_count, 4u);
  EXPECT_EQ(build_circuit(5, 6).param_count, 12u);
}

TEST(BuildCircuitTest, SlotsFollowGateOrder) {
  for (int id = 1; id <= 5; ++id) {
    const CircuitSpec spec = build_circuit(id, 5);
    std::size_t next = 0;
    for (const GateOp& g : spec.gates) {
      if (g.param_slot) EXPECT_EQ(*g.param_slot, next++);
    }
    EXPECT_EQ(next, spec.param_count);
  }
}

TEST(BuildCircuitTest, Errors) {
  EXPECT_THROW(build_circuit(6, 3), ConfigError);
  EXPECT_THROW(build_circuit(0, 3), ConfigError);
  EXPECT_THROW(build_circuit(2, 0), ConfigError);
}

TEST(GateMatrixTest, Unitary) {
  for (GateKind k : {GateKind::kH, GateKind::kRX, GateKind::kRY, GateKind::kRZ,
                     GateKind::kCX, GateKind::kRXX, GateKind::kRZZ}) {
    const auto m = gate_matrix(k, 0.731);
    const int d = m.size() == 4 ? 2 : 4;
    Mat u(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) u(r, c) = m[static_cast<std::size_t>(r * d + c)];
    EXPECT_LT((u.adjoint() * u - Mat::Identity(d, d)).norm(), 1e-12) << to_string(k);
  }
}

TEST(GateMatrixTest, MatchesOracle) {
  for (GateKind k : {GateKind::kH, GateKind::kRX, GateKind::kRY, GateKind::kRZ,
                     GateKind::kCX, GateKind::kRXX, GateKind::kRZZ}) {
    GateOp g;
    g.kind = k;
    const Mat expected = local_matrix(g, 1.3);
    const auto m = gate_matrix(k, 1.3);
    const auto d = static_cast<int>(expected.rows());
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c)
        EXPECT_LT(std::abs(m[static_cast<std::size_t>(r * d + c)] - expected(r, c)), 1e-14);
  }
}

TEST(SimulateTest, SingleQubitExamples) {
  const CircuitSpec c = build_circuit(4, 1);
  const double zero[] = {0.0};
  StateVector s = simulate(c, zero);
  EXPECT_NEAR(std::abs(s.amplitudes()[0] - Amplitude(1, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s.amplitudes()[1]), 0.0, 1e-15);
  const double flip[] = {pi};
  s = simulate(c, flip);
  EXPECT_NEAR(std::abs(s.amplitudes()[0]), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s.amplitudes()[1] - Amplitude(0, -1)), 0.0, 1e-15);
}

TEST(SimulateTest, CircuitTwoOnTwoQubitsMatchesHandProduct) {
  // |psi> = RXX(pi/2) (RX(pi/2) x RX(pi/2)) |00>, written out by hand.
  const double c = std::cos(pi / 4), s = std::sin(pi / 4);
  Mat rx(2, 2);
  rx << c, -kI * s, -kI * s, c;
  Mat xx = Mat::Zero(4, 4);
  xx(0, 3) = xx(1, 2) = xx(2, 1) = xx(3, 0) = 1;
  const Mat rxx = c * Mat::Identity(4, 4) - kI * s * xx;
  Mat rx2(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int cc = 0; cc < 2; ++cc)
        for (int d = 0; d < 2; ++d) rx2(2 * a + cc, 2 * b + d) = rx(a, b) * rx(cc, d);
  const Vec psi = rxx * rx2.col(0);

  const double theta[] = {pi / 2, pi / 2, pi / 2};
  const auto probs = simulate(build_circuit(2, 2), theta).probabilities();
  ASSERT_EQ(probs.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(probs[i], std::norm(psi(i)), 1e-12);
}

class CircuitOracle : public ::testing::TestWithParam<int> {};

TEST_P(CircuitOracle, AllPathsMatchKroneckerOracle) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  for (std::size_t q = 1; q <= 7; ++q) {
    for (Circuit3Variant v : {Circuit3Variant::kRzAndRzz, Circuit3Variant::kRzOnly}) {
      const CircuitSpec spec = build_circuit(GetParam(), q, v);
      const auto theta = random_theta(spec.param_count, rng);
      const Vec expected = oracle_state(spec, theta);
      const StateVector fast = simulate(spec, theta);
      const StateVector slow = simulate_gate_by_gate(spec, theta);
      const auto pf = fast.probabilities();
      const auto ps = slow.probabilities();
      for (std::size_t i = 0; i < pf.size(); ++i) {
        EXPECT_NEAR(pf[i], std::norm(expected(static_cast<long>(i))), 1e-12);
        EXPECT_NEAR(ps[i], std::norm(expected(static_cast<long>(i))), 1e-12);
        EXPECT_LT(std::abs(slow.amplitudes()[i] - expected(static_cast<long>(i))), 1e-12);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Circuits, CircuitOracle, ::testing::Values(1, 2, 3, 4, 5));

TEST(SimulateTest, NormPreservedAfterEveryGate) {
  std::mt19937_64 rng(21);
  for (int id = 1; id <= 5; ++id) {
    for (std::size_t q = 1; q <= 10; ++q) {
      const CircuitSpec spec = build_circuit(id, q);
      const auto theta = random_theta(spec.param_count, rng);
      StateVector s(q);
      for (const GateOp& g : spec.gates) {
        s.apply(g, theta);
        ASSERT_NEAR(s.norm_squared(), 1.0, 1e-10);
      }
    }
  }
}

TEST(SimulateTest, ProductAgreesWithDense) {
  std::mt19937_64 rng(22);
  for (int id : {4, 5}) {
    for (std::size_t q = 1; q <= 10; ++q) {
      const CircuitSpec spec = build_circuit(id, q);
      const auto theta = random_theta(spec.param_count, rng);
      const auto dense = simulate_gate_by_gate(spec, theta).probabilities();
      const auto prod = simulate_product(spec, theta).to_dense().probabilities();
      for (std::size_t i = 0; i < dense.size(); ++i) EXPECT_NEAR(dense[i], prod[i], 1e-12);
    }
  }
}

TEST(SimulateTest, ProductRejectsEntanglers) {
  const CircuitSpec spec = build_circuit(2, 3);
  const std::vector<double> theta(spec.param_count, 0.1);
  EXPECT_THROW(simulate_product(spec, theta), ConfigError);
}

TEST(SimulateTest, FourPiPeriodicity) {
  std::mt19937_64 rng(23);
  for (int id = 1; id <= 5; ++id) {
    const CircuitSpec spec = build_circuit(id, 5);
    const auto theta = random_theta(spec.param_count, rng);
    const auto base = simulate(spec, theta).probabilities();
    for (std::size_t k = 0; k < spec.param_count; ++k) {
      auto shifted = theta;
      shifted[k] += 4 * pi;
      const auto p = simulate(spec, shifted).probabilities();
      for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], base[i], 1e-10);
    }
  }
}

TEST(SimulateTest, ParameterCountMismatch) {
  const std::vector<double> theta(2, 0.0);
  EXPECT_THROW(simulate(build_circuit(2, 3), theta), ConfigError);
}

TEST(SimulateTest, DenseGuardAboveTwentyFive) {
  const CircuitSpec spec = build_circuit(2, 29);
  const std::vector<double> theta(spec.param_count, 0.0);
  try {
    simulate(spec, theta);
    FAIL() << "expected ResourceError";
  } catch (const ResourceError& e) {
    EXPECT_NE(std::string(e.what()).find("25"), std::string::npos) << e.what();
  }
  EXPECT_THROW(Sampler{spec}, ResourceError);
  EXPECT_NO_THROW(Sampler{build_circuit(4, 29)});
  EXPECT_NO_THROW(Sampler{build_circuit(5, 29)});
}

TEST(SimulationPathTest, Classification) {
  EXPECT_EQ(simulation_path(build_circuit(4, 3)), SimulationPath::kProduct);
  EXPECT_EQ(simulation_path(build_circuit(5, 3)), SimulationPath::kProduct);
  EXPECT_EQ(simulation_path(build_circuit(1, 3)), SimulationPath::kProductThenCx);
  EXPECT_EQ(simulation_path(build_circuit(2, 3)), SimulationPath::kPhaseTransform);
  EXPECT_EQ(simulation_path(build_circuit(3, 3)), SimulationPath::kPhaseTransform);
}

TEST(SampleTest, DeterministicFlip) {
  const double theta[] = {pi};
  const SampleBatch b = sample(build_circuit(4, 1), theta, 1024, 7);
  ASSERT_EQ(b.counts.size(), 1u);
  EXPECT_EQ(b.counts.begin()->first.to_string(), "1");
  EXPECT_EQ(b.counts.begin()->second, 1024u);
}

TEST(SampleTest, HalfProbabilityBand) {
  const double theta[] = {pi / 2};
  const SampleBatch b = sample(build_circuit(4, 1), theta, 1000000, 11);
  const double f = static_cast<double>(b.counts.at(BitString::from_string("1"))) / 1e6;
  EXPECT_GE(f, 0.497);
  EXPECT_LE(f, 0.503);
}

TEST(SampleTest, CountsSumToShotsAndRepeat) {
  std::mt19937_64 rng(24);
  for (int id = 1; id <= 5; ++id) {
    const CircuitSpec spec = build_circuit(id, 6);
    const auto theta = random_theta(spec.param_count, rng);
    const SampleBatch a = sample(spec, theta, 777, 3);
    const SampleBatch b = sample(spec, theta, 777, 3);
    std::uint64_t total = 0;
    for (const auto& [bits, k] : a.counts) {
      EXPECT_EQ(bits.size(), 6u);
      total += k;
    }
    EXPECT_EQ(total, 777u);
    EXPECT_EQ(a.shots, 777u);
    EXPECT_EQ(a.counts, b.counts);
  }
}

TEST(SampleTest, TotalVariationBound) {
  std::mt19937_64 rng(25);
  const std::uint64_t shots = 100000;
  for (int id = 1; id <= 5; ++id) {
    for (std::size_t q = 1; q <= 4; ++q) {
      const CircuitSpec spec = build_circuit(id, q);
      const auto theta = random_theta(spec.param_count, rng);
      const Vec psi = oracle_state(spec, theta);
      double tv_sum = 0.0;
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const SampleBatch b = sample(spec, theta, shots, seed);
        double tv = 0.0;
        for (std::uint64_t i = 0; i < (1u << q); ++i) {
          const auto it = b.counts.find(BitString::from_index(i, q));
          const double f =
              it == b.counts.end() ? 0.0 : static_cast<double>(it->second) / shots;
          tv += std::abs(f - std::norm(psi(static_cast<long>(i))));
        }
        tv_sum += tv / 2;
      }
      EXPECT_LE(tv_sum / 10, 5.0 / std::sqrt(static_cast<double>(shots)))
          << "circuit " << id << " q=" << q;
    }
  }
}

TEST(SampleTest, LargeEntangledMatchesReferenceDistribution) {
  // Circuits 2 and 3 take the split sampler and circuit 1 the classical CX
  // network; compare their frequencies to the gate-by-gate probabilities.
  // Sampling noise alone gives a TV of about 0.009 here.
  std::mt19937_64 rng(26);
  for (int id : {1, 2, 3}) {
    const CircuitSpec spec = build_circuit(id, 10);
    std::vector<double> theta = random_theta(spec.param_count, rng);
    for (double& t : theta) t *= 0.15;
    const auto probs = simulate_gate_by_gate(spec, theta).probabilities();
    const std::uint64_t shots = 2000000;
    const SampleBatch b = sample(spec, theta, shots, 5);
    double tv = 0.0;
    for (std::uint64_t i = 0; i < probs.size(); ++i) {
      const auto it = b.counts.find(BitString::from_index(i, 10));
      const double f = it == b.counts.end() ? 0.0 : static_cast<double>(it->second) / shots;
      tv += std::abs(f - probs[i]);
    }
    EXPECT_LE(tv / 2, 0.015) << "circuit " << id;
  }
}

TEST(WarmStartTest, DirectRule) {
  const CircuitSpec spec = build_circuit(2, 3);
  const ParameterVector zeros = load_warm_start(spec, BitString::from_string("000"));
  EXPECT_EQ(zeros, ParameterVector(5, 0.0));
  const ParameterVector p = load_warm_start(spec, BitString::from_string("101"));
  EXPECT_EQ(p, (ParameterVector{pi, 0.0, pi, 0.0, 0.0}));
}

TEST(WarmStartTest, SamplesTheLoadedString) {
  const CircuitSpec spec = build_circuit(2, 8);
  const BitString b = BitString::from_string("10110010");
  const ParameterVector p = load_warm_start(spec, b);
  const SampleBatch batch = sample(spec, p, 1024, 1);
  ASSERT_EQ(batch.counts.size(), 1u);
  EXPECT_EQ(batch.counts.begin()->first, b);
  EXPECT_NEAR(simulate(spec, p).probabilities()[0b10110010], 1.0, 1e-12);
}

TEST(WarmStartTest, Errors) {
  EXPECT_THROW(load_warm_start(build_circuit(4, 3), BitString::from_string("101")),
               ConfigError);
  EXPECT_THROW(load_warm_start(build_circuit(2, 3), BitString::from_string("10")),
               ConfigError);
}

TEST(NetlistTest, OneGatePerLine) {
  const std::string text = format_netlist(build_circuit(2, 3));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  EXPECT_EQ(text.rfind("RX 0", 0), 0u) << text;
  EXPECT_NE(text.find("RXX 1,2 4"), std::string::npos) << text;
}

}  // namespace
}  // namespace vartsp
