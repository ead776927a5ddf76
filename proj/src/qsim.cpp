#include "vartsp/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "vartsp/error.hpp"

namespace vartsp {

namespace {

using std::numbers::pi;
constexpr Amplitude kI{0.0, 1.0};

void check_theta(const CircuitSpec& spec, std::span<const double> theta) {
  if (theta.size() != spec.param_count) {
    throw ConfigError("circuit " + std::to_string(spec.id) + " expects " +
                      std::to_string(spec.param_count) + " parameters, got " +
                      std::to_string(theta.size()));
  }
}

void check_dense(const CircuitSpec& spec) {
  if (spec.q > kDenseQubitLimit) {
    throw ResourceError("circuit " + std::to_string(spec.id) + " on " +
                        std::to_string(spec.q) +
                        " qubits exceeds the dense statevector limit of " +
                        std::to_string(kDenseQubitLimit) + " qubits");
  }
}

std::size_t index_bit(std::size_t q, std::size_t qubit) {
  return std::size_t{1} << (q - 1 - qubit);
}

GateOp one(GateKind kind, std::size_t t, std::optional<std::size_t> slot) {
  GateOp g;
  g.kind = kind;
  g.targets = {t, t};
  g.param_slot = slot;
  return g;
}

GateOp two(GateKind kind, std::size_t a, std::size_t b,
           std::optional<std::size_t> slot, double fixed = 0.0) {
  GateOp g;
  g.kind = kind;
  g.targets = {a, b};
  g.param_slot = slot;
  g.fixed_angle = fixed;
  return g;
}

// Accumulated exponent of a diagonal unitary exp(-i phi(z)) with
// phi(z) = sum_i a_i s_i / 2 + sum_{j<i} b_ji s_j s_i / 2, s = (-1)^z.
struct PhaseChain {
  std::vector<double> single;
  struct Pair {
    std::size_t lo, hi;
    double angle;
  };
  std::vector<Pair> pairs;
};

bool all_of_kinds(std::span<const GateOp> gates,
                  std::initializer_list<GateKind> kinds) {
  return std::all_of(gates.begin(), gates.end(), [&](const GateOp& g) {
    return std::find(kinds.begin(), kinds.end(), g.kind) != kinds.end();
  });
}

bool is_hadamard_layer(std::span<const GateOp> gates, std::size_t q) {
  if (gates.size() != q) return false;
  std::vector<char> seen(q, 0);
  for (const GateOp& g : gates) {
    if (g.kind != GateKind::kH || seen[g.targets[0]]) return false;
    seen[g.targets[0]] = 1;
  }
  return true;
}

// The span of gates whose phases define the chain, if the circuit has the
// form  R_X-type*  or  H-layer  R_Z-type*  H-layer.
std::optional<std::span<const GateOp>> phase_gates(const CircuitSpec& spec) {
  const std::span<const GateOp> gates(spec.gates);
  if (all_of_kinds(gates, {GateKind::kRX, GateKind::kRXX})) return gates;
  const std::size_t q = spec.q;
  if (gates.size() >= 2 * q && is_hadamard_layer(gates.first(q), q) &&
      is_hadamard_layer(gates.last(q), q)) {
    const auto middle = gates.subspan(q, gates.size() - 2 * q);
    if (all_of_kinds(middle, {GateKind::kRZ, GateKind::kRZZ})) return middle;
  }
  return std::nullopt;
}

PhaseChain build_chain(std::size_t q, std::span<const GateOp> gates,
                       std::span<const double> theta) {
  PhaseChain chain;
  chain.single.assign(q, 0.0);
  for (const GateOp& g : gates) {
    const double a = g.angle(theta);
    if (g.arity() == 1) {
      chain.single[g.targets[0]] += a;
    } else {
      const auto [lo, hi] = std::minmax(g.targets[0], g.targets[1]);
      chain.pairs.push_back({lo, hi, a});
    }
  }
  return chain;
}

// Writes exp(-i phi(z)) for all z, qubit 0 most significant.
void fill_phases(const PhaseChain& chain, std::size_t q,
                 std::vector<Amplitude>& v) {
  v.resize(std::size_t{1} << q);
  v[0] = 1.0;
  std::size_t size = 1;
  for (std::size_t i = 0; i < q; ++i) {
    const double a = chain.single[i];
    const Amplitude up = std::polar(1.0, -a / 2);   // s_i = +1
    const Amplitude down = std::polar(1.0, a / 2);  // s_i = -1
    std::vector<std::pair<std::size_t, std::array<Amplitude, 2>>> couplings;
    for (const auto& p : chain.pairs) {
      if (p.hi != i) continue;
      // Factor exp(-i b s_lo s_i / 2): equal signs vs opposite signs.
      couplings.push_back({i - 1 - p.lo,
                           {std::polar(1.0, -p.angle / 2),
                            std::polar(1.0, p.angle / 2)}});
    }
    // Expand in place from the top so prefixes are read before overwrite.
    for (std::size_t prefix = size; prefix-- > 0;) {
      const Amplitude base = v[prefix];
      Amplitude f0 = base * up;
      Amplitude f1 = base * down;
      for (const auto& [shift, factor] : couplings) {
        const bool lo_bit = (prefix >> shift) & 1u;
        // bit 0 for qubit i: same sign iff lo_bit == 0.
        f0 *= factor[lo_bit ? 1 : 0];
        f1 *= factor[lo_bit ? 0 : 1];
      }
      v[2 * prefix] = f0;
      v[2 * prefix + 1] = f1;
    }
    size <<= 1;
  }
}

// Unnormalized in-place Walsh-Hadamard transform.
void walsh_hadamard(std::span<Amplitude> v) {
  const std::size_t n = v.size();
  const std::size_t block = std::min<std::size_t>(n, std::size_t{1} << 13);
  for (std::size_t base = 0; base < n; base += block) {
    Amplitude* p = v.data() + base;
    for (std::size_t h = 1; h < block; h <<= 1) {
      for (std::size_t i = 0; i < block; i += 2 * h) {
        for (std::size_t j = i; j < i + h; ++j) {
          const Amplitude a = p[j];
          const Amplitude b = p[j + h];
          p[j] = a + b;
          p[j + h] = a - b;
        }
      }
    }
  }
  std::size_t h = block;
  for (; 4 * h <= n; h <<= 2) {
    for (std::size_t i = 0; i < n; i += 4 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const Amplitude a0 = v[j], a1 = v[j + h], a2 = v[j + 2 * h],
                        a3 = v[j + 3 * h];
        const Amplitude b0 = a0 + a1, b1 = a0 - a1, b2 = a2 + a3,
                        b3 = a2 - a3;
        v[j] = b0 + b2;
        v[j + h] = b1 + b3;
        v[j + 2 * h] = b0 - b2;
        v[j + 3 * h] = b1 - b3;
      }
    }
  }
  if (h < n) {
    for (std::size_t j = 0; j < h; ++j) {
      const Amplitude a = v[j];
      const Amplitude b = v[j + h];
      v[j] = a + b;
      v[j + h] = a - b;
    }
  }
}

// exp(-i phi) cut between qubits k-1 and k. Only the high-side qubits that
// pair with a low-side qubit ("links") couple the halves, so the transformed
// vector is sum_c high[c] (x) low[c] over the link assignments c.
struct SplitTransform {
  std::size_t q = 0;
  std::size_t k = 0;
  std::vector<std::vector<Amplitude>> high;
  std::vector<std::vector<Amplitude>> low;

  std::size_t rows() const { return std::size_t{1} << k; }
  std::size_t cols() const { return std::size_t{1} << (q - k); }

  // Unnormalized; the amplitude is 2^-q times this.
  Amplitude at(std::size_t row, std::size_t col) const {
    double re = 0.0, im = 0.0;
    for (std::size_t c = 0; c < high.size(); ++c) {
      const Amplitude a = high[c][row];
      const Amplitude b = low[c][col];
      re += a.real() * b.real() - a.imag() * b.imag();
      im += a.real() * b.imag() + a.imag() * b.real();
    }
    return {re, im};
  }

  // |at(row, col)|^2 for every col of one row.
  void row_norms(std::size_t row, std::span<double> out) const {
    const std::size_t m = cols();
    std::vector<double> re(m, 0.0), im(m, 0.0);
    for (std::size_t c = 0; c < high.size(); ++c) {
      const double ar = high[c][row].real(), ai = high[c][row].imag();
      const Amplitude* b = low[c].data();
      for (std::size_t j = 0; j < m; ++j) {
        re[j] += ar * b[j].real() - ai * b[j].imag();
        im[j] += ar * b[j].imag() + ai * b[j].real();
      }
    }
    for (std::size_t j = 0; j < m; ++j) out[j] = re[j] * re[j] + im[j] * im[j];
  }
};

constexpr std::size_t kMaxLinks = 6;

std::optional<SplitTransform> split_transform(const PhaseChain& chain,
                                              std::size_t q) {
  if (q < 2) return std::nullopt;
  SplitTransform st;
  st.q = q;
  st.k = q / 2;
  const std::size_t k = st.k;

  PhaseChain high_chain, low_base;
  high_chain.single.assign(chain.single.begin(), chain.single.begin() + k);
  low_base.single.assign(chain.single.begin() + k, chain.single.end());
  std::vector<PhaseChain::Pair> crossing;
  std::vector<std::size_t> links;
  for (const auto& p : chain.pairs) {
    if (p.hi < k) {
      high_chain.pairs.push_back(p);
    } else if (p.lo >= k) {
      low_base.pairs.push_back({p.lo - k, p.hi - k, p.angle});
    } else {
      crossing.push_back(p);
      if (std::find(links.begin(), links.end(), p.lo) == links.end()) {
        links.push_back(p.lo);
      }
    }
  }
  if (links.size() > kMaxLinks) return std::nullopt;
  const std::size_t rank = std::size_t{1} << links.size();

  std::vector<Amplitude> a;
  fill_phases(high_chain, k, a);
  st.high.assign(rank, std::vector<Amplitude>(a.size(), 0.0));
  for (std::size_t z = 0; z < a.size(); ++z) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < links.size(); ++j) {
      c |= ((z >> (k - 1 - links[j])) & 1u) << j;
    }
    st.high[c][z] = a[z];
  }
  st.low.resize(rank);
  for (std::size_t c = 0; c < rank; ++c) {
    walsh_hadamard(st.high[c]);
    PhaseChain low = low_base;
    for (const auto& p : crossing) {
      const std::size_t j = static_cast<std::size_t>(
          std::find(links.begin(), links.end(), p.lo) - links.begin());
      const double s_lo = ((c >> j) & 1u) ? -1.0 : 1.0;
      low.single[p.hi - k] += s_lo * p.angle;
    }
    fill_phases(low, q - k, st.low[c]);
    walsh_hadamard(st.low[c]);
  }
  return st;
}

BitString bits_from_index(std::size_t index, std::size_t q) {
  return BitString::from_index(index, q);
}

// Inverse-CDF sampling: walks probabilities in index order against sorted
// uniforms, so one pass serves every shot.
class CdfWalker {
 public:
  CdfWalker(std::span<const double> u, std::size_t q, SampleBatch& batch)
      : u_(u), q_(q), batch_(batch) {}

  bool done() const { return next_ == u_.size(); }
  // No uniform falls inside the next `mass` of probability.
  bool skippable(double mass) const {
    return done() || u_[next_] >= cumulative_ + mass;
  }
  void skip(double mass) { cumulative_ += mass; }

  void feed(std::span<const double> p, std::size_t offset) {
    for (std::size_t i = 0; i < p.size() && !done(); ++i) {
      if (p[i] <= 0.0) continue;
      cumulative_ += p[i];
      std::uint64_t hits = 0;
      while (!done() && u_[next_] < cumulative_) {
        ++hits;
        ++next_;
      }
      if (hits) batch_.counts[bits_from_index(offset + i, q_)] += hits;
    }
  }

  // Rounding can leave the total a hair under one; leftovers go to `index`.
  void finish(std::size_t index) {
    if (done()) return;
    batch_.counts[bits_from_index(index, q_)] += u_.size() - next_;
    next_ = u_.size();
  }

 private:
  std::span<const double> u_;
  std::size_t q_;
  SampleBatch& batch_;
  std::size_t next_ = 0;
  double cumulative_ = 0.0;
};

std::size_t last_positive(std::span<const double> p) {
  for (std::size_t i = p.size(); i-- > 0;) {
    if (p[i] > 0.0) return i;
  }
  return 0;
}

void inverse_cdf(std::span<const double> p, std::span<const double> u,
                 std::size_t q, SampleBatch& batch) {
  CdfWalker walker(u, q, batch);
  walker.feed(p, 0);
  if (!walker.done()) walker.finish(last_positive(p));
}

// Row masses come from the Gram matrix of the low factors, so only rows that
// receive a shot are expanded.
void sample_split(const SplitTransform& st, std::span<const double> u,
                  SampleBatch& batch) {
  const std::size_t rank = st.high.size();
  const std::size_t m = st.cols();
  std::vector<Amplitude> gram(rank * rank, 0.0);
  for (std::size_t a = 0; a < rank; ++a) {
    for (std::size_t b = 0; b < rank; ++b) {
      Amplitude acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        acc += st.low[a][j] * std::conj(st.low[b][j]);
      }
      gram[a * rank + b] = acc;
    }
  }
  const double scale = std::ldexp(1.0, -2 * static_cast<int>(st.q));
  CdfWalker walker(u, st.q, batch);
  std::vector<double> p(m);
  std::size_t last_row = 0;
  for (std::size_t r = 0; r < st.rows() && !walker.done(); ++r) {
    double mass = 0.0;
    for (std::size_t a = 0; a < rank; ++a) {
      for (std::size_t b = 0; b < rank; ++b) {
        mass += (st.high[a][r] * std::conj(st.high[b][r]) * gram[a * rank + b])
                    .real();
      }
    }
    mass *= scale;
    if (mass > 0.0) last_row = r;
    if (walker.skippable(mass)) {
      walker.skip(mass);
      continue;
    }
    st.row_norms(r, p);
    for (double& x : p) x *= scale;
    walker.feed(p, r * m);
  }
  if (!walker.done()) {
    st.row_norms(last_row, p);
    walker.finish(last_row * m + last_positive(p));
  }
}

void apply_one(std::span<Amplitude> amps, std::size_t q, std::size_t qubit,
               const std::vector<Amplitude>& m) {
  const std::size_t stride = index_bit(q, qubit);
  for (std::size_t base = 0; base < amps.size(); base += 2 * stride) {
    for (std::size_t j = base; j < base + stride; ++j) {
      const Amplitude a0 = amps[j];
      const Amplitude a1 = amps[j + stride];
      amps[j] = m[0] * a0 + m[1] * a1;
      amps[j + stride] = m[2] * a0 + m[3] * a1;
    }
  }
}

void apply_two(std::span<Amplitude> amps, std::size_t q, std::size_t t0,
               std::size_t t1, const std::vector<Amplitude>& m) {
  const std::size_t s0 = index_bit(q, t0);
  const std::size_t s1 = index_bit(q, t1);
  for (std::size_t idx = 0; idx < amps.size(); ++idx) {
    if ((idx & s0) || (idx & s1)) continue;
    const std::array<std::size_t, 4> at{idx, idx | s1, idx | s0,
                                        idx | s0 | s1};
    std::array<Amplitude, 4> in;
    for (int k = 0; k < 4; ++k) in[k] = amps[at[k]];
    for (int r = 0; r < 4; ++r) {
      Amplitude acc = 0.0;
      for (int c = 0; c < 4; ++c) acc += m[4 * r + c] * in[c];
      amps[at[r]] = acc;
    }
  }
}

std::array<Amplitude, 2> apply_local(const std::vector<Amplitude>& m,
                                     const std::array<Amplitude, 2>& s) {
  return {m[0] * s[0] + m[1] * s[1], m[2] * s[0] + m[3] * s[1]};
}

bool cx_tail_form(const CircuitSpec& spec) {
  bool seen_cx = false;
  bool any_cx = false;
  for (const GateOp& g : spec.gates) {
    if (g.kind == GateKind::kCX) {
      seen_cx = any_cx = true;
    } else if (g.arity() == 2 || seen_cx) {
      return false;
    }
  }
  return any_cx;
}

}  // namespace

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::kH: return "H";
    case GateKind::kRX: return "RX";
    case GateKind::kRY: return "RY";
    case GateKind::kRZ: return "RZ";
    case GateKind::kCX: return "CX";
    case GateKind::kRXX: return "RXX";
    case GateKind::kRZZ: return "RZZ";
  }
  return "?";
}

bool is_two_qubit(GateKind kind) {
  return kind == GateKind::kCX || kind == GateKind::kRXX ||
         kind == GateKind::kRZZ;
}

bool is_parametrizable(GateKind kind) {
  return kind != GateKind::kH && kind != GateKind::kCX;
}

bool CircuitSpec::entangling() const {
  return std::any_of(gates.begin(), gates.end(),
                     [](const GateOp& g) { return g.arity() == 2; });
}

CircuitSpec build_circuit(int id, std::size_t q, Circuit3Variant variant) {
  if (q == 0) throw ConfigError("circuit needs at least one qubit");
  CircuitSpec spec;
  spec.id = id;
  spec.q = q;
  std::size_t slot = 0;
  auto& g = spec.gates;
  switch (id) {
    case 1:
      for (std::size_t i = 0; i < q; ++i) {
        g.push_back(one(GateKind::kH, i, std::nullopt));
        g.push_back(one(GateKind::kRY, i, slot++));
        g.push_back(one(GateKind::kRX, i, slot++));
      }
      for (std::size_t i = 0; i + 1 < q; ++i) {
        g.push_back(two(GateKind::kCX, i, i + 1, std::nullopt));
      }
      break;
    case 2:
      for (std::size_t i = 0; i < q; ++i) {
        g.push_back(one(GateKind::kRX, i, slot++));
      }
      for (std::size_t i = 0; i + 1 < q; ++i) {
        g.push_back(two(GateKind::kRXX, i, i + 1, slot++));
      }
      break;
    case 3:
      for (std::size_t i = 0; i < q; ++i) {
        g.push_back(one(GateKind::kH, i, std::nullopt));
      }
      for (std::size_t i = 0; i < q; ++i) {
        g.push_back(one(GateKind::kRZ, i, slot++));
      }
      for (std::size_t i = 0; i + 1 < q; ++i) {
        if (variant == Circuit3Variant::kRzAndRzz) {
          g.push_back(two(GateKind::kRZZ, i, i + 1, slot++));
        } else {
          g.push_back(two(GateKind::kRZZ, i, i + 1, std::nullopt, pi / 2));
        }
      }
      for (std::size_t i = 0; i < q; ++i) {
        g.push_back(one(GateKind::kH, i, std::nullopt));
      }
      break;
    case 4:
      for (std::size_t i = 0; i < q; ++i) {
        g.push_back(one(GateKind::kRX, i, slot++));
      }
      break;
    case 5:
      for (std::size_t i = 0; i < q; ++i) {
        g.push_back(one(GateKind::kH, i, std::nullopt));
        g.push_back(one(GateKind::kRY, i, slot++));
        g.push_back(one(GateKind::kRX, i, slot++));
      }
      break;
    default:
      throw ConfigError("unknown circuit id " + std::to_string(id) +
                        " (expected 1-5)");
  }
  spec.param_count = slot;
  return spec;
}

std::string format_netlist(const CircuitSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  for (const GateOp& g : spec.gates) {
    out << to_string(g.kind) << ' ' << g.targets[0];
    if (g.arity() == 2) out << ',' << g.targets[1];
    if (g.param_slot) {
      out << ' ' << *g.param_slot;
    } else if (is_parametrizable(g.kind)) {
      out << " fixed=" << g.fixed_angle;
    }
    out << '\n';
  }
  return out.str();
}

std::vector<Amplitude> gate_matrix(GateKind kind, double angle) {
  const double c = std::cos(angle / 2);
  const double s = std::sin(angle / 2);
  const Amplitude e_minus = std::polar(1.0, -angle / 2);
  const Amplitude e_plus = std::polar(1.0, angle / 2);
  switch (kind) {
    case GateKind::kH: {
      const double r = std::numbers::sqrt2 / 2;
      return {r, r, r, -r};
    }
    case GateKind::kRX:
      return {c, -kI * s, -kI * s, c};
    case GateKind::kRY:
      return {c, -s, s, c};
    case GateKind::kRZ:
      return {e_minus, 0.0, 0.0, e_plus};
    case GateKind::kCX:
      return {1, 0, 0, 0,  //
              0, 1, 0, 0,  //
              0, 0, 0, 1,  //
              0, 0, 1, 0};
    case GateKind::kRXX:
      return {c, 0, 0, -kI * s,  //
              0, c, -kI * s, 0,  //
              0, -kI * s, c, 0,  //
              -kI * s, 0, 0, c};
    case GateKind::kRZZ:
      return {e_minus, 0, 0, 0,  //
              0, e_plus, 0, 0,   //
              0, 0, e_plus, 0,   //
              0, 0, 0, e_minus};
  }
  return {};
}

StateVector::StateVector(std::size_t q) : q_(q), amps_(std::size_t{1} << q) {
  amps_[0] = 1.0;
}

std::vector<double> StateVector::probabilities() const {
  std::vector<double> p(amps_.size());
  for (std::size_t i = 0; i < amps_.size(); ++i) p[i] = std::norm(amps_[i]);
  return p;
}

double StateVector::norm_squared() const {
  double total = 0.0;
  for (const Amplitude& a : amps_) total += std::norm(a);
  return total;
}

void StateVector::apply(const GateOp& gate, std::span<const double> theta) {
  const auto m = gate_matrix(gate.kind, gate.angle(theta));
  if (gate.arity() == 1) {
    apply_one(amps_, q_, gate.targets[0], m);
  } else {
    apply_two(amps_, q_, gate.targets[0], gate.targets[1], m);
  }
}

StateVector ProductState::to_dense() const {
  const std::size_t q = qubits.size();
  StateVector state(q);
  auto amps = state.amplitudes();
  for (std::size_t idx = 0; idx < amps.size(); ++idx) {
    Amplitude a = 1.0;
    for (std::size_t i = 0; i < q; ++i) {
      a *= qubits[i][(idx & index_bit(q, i)) ? 1 : 0];
    }
    amps[idx] = a;
  }
  return state;
}

StateVector simulate_gate_by_gate(const CircuitSpec& spec,
                                  std::span<const double> theta) {
  check_theta(spec, theta);
  check_dense(spec);
  StateVector state(spec.q);
  for (const GateOp& g : spec.gates) state.apply(g, theta);
  return state;
}

ProductState simulate_product(const CircuitSpec& spec,
                              std::span<const double> theta) {
  check_theta(spec, theta);
  if (spec.entangling()) {
    throw ConfigError("circuit " + std::to_string(spec.id) +
                      " has two-qubit gates; no product-state form");
  }
  ProductState state;
  state.qubits.assign(spec.q, {Amplitude{1.0}, Amplitude{0.0}});
  for (const GateOp& g : spec.gates) {
    auto& s = state.qubits[g.targets[0]];
    s = apply_local(gate_matrix(g.kind, g.angle(theta)), s);
  }
  return state;
}

StateVector simulate(const CircuitSpec& spec, std::span<const double> theta) {
  check_theta(spec, theta);
  check_dense(spec);
  if (!spec.entangling()) return simulate_product(spec, theta).to_dense();
  if (const auto gates = phase_gates(spec)) {
    const PhaseChain chain = build_chain(spec.q, *gates, theta);
    StateVector state(spec.q);
    auto amps = state.amplitudes();
    const double scale = std::ldexp(1.0, -static_cast<int>(spec.q));
    if (const auto st = split_transform(chain, spec.q)) {
      for (std::size_t r = 0; r < st->rows(); ++r) {
        for (std::size_t c = 0; c < st->cols(); ++c) {
          amps[r * st->cols() + c] = st->at(r, c) * scale;
        }
      }
    } else {
      std::vector<Amplitude> v;
      fill_phases(chain, spec.q, v);
      walsh_hadamard(v);
      for (std::size_t i = 0; i < v.size(); ++i) amps[i] = v[i] * scale;
    }
    return state;
  }
  return simulate_gate_by_gate(spec, theta);
}

SimulationPath simulation_path(const CircuitSpec& spec) {
  if (!spec.entangling()) return SimulationPath::kProduct;
  if (cx_tail_form(spec)) return SimulationPath::kProductThenCx;
  if (phase_gates(spec)) return SimulationPath::kPhaseTransform;
  return SimulationPath::kGateByGate;
}

Sampler::Sampler(CircuitSpec spec)
    : spec_(std::move(spec)), path_(simulation_path(spec_)) {
  if (path_ == SimulationPath::kPhaseTransform ||
      path_ == SimulationPath::kGateByGate) {
    check_dense(spec_);
  }
}

SampleBatch Sampler::sample(std::span<const double> theta, std::uint64_t shots,
                            std::uint64_t seed) {
  check_theta(spec_, theta);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  SampleBatch batch;
  batch.shots = shots;
  const std::size_t q = spec_.q;

  if (path_ == SimulationPath::kProduct ||
      path_ == SimulationPath::kProductThenCx) {
    CircuitSpec local = spec_;
    std::vector<GateOp> tail;
    if (path_ == SimulationPath::kProductThenCx) {
      const auto first_cx =
          std::find_if(local.gates.begin(), local.gates.end(),
                       [](const GateOp& g) { return g.kind == GateKind::kCX; });
      tail.assign(first_cx, local.gates.end());
      local.gates.erase(first_cx, local.gates.end());
    }
    const ProductState state = simulate_product(local, theta);
    std::vector<double> p1(q);
    for (std::size_t i = 0; i < q; ++i) p1[i] = state.probability_one(i);
    for (std::uint64_t s = 0; s < shots; ++s) {
      BitString bits(q);
      for (std::size_t i = 0; i < q; ++i) bits.set(i, uniform(rng) < p1[i]);
      for (const GateOp& cx : tail) {
        if (bits[cx.targets[0]]) bits.flip(cx.targets[1]);
      }
      ++batch.counts[bits];
    }
    return batch;
  }

  std::vector<double> u(shots);
  for (auto& x : u) x = uniform(rng);
  std::sort(u.begin(), u.end());

  if (path_ == SimulationPath::kPhaseTransform) {
    const PhaseChain chain = build_chain(q, *phase_gates(spec_), theta);
    if (const auto st = split_transform(chain, q)) {
      sample_split(*st, u, batch);
      return batch;
    }
    fill_phases(chain, q, buffer_);
    walsh_hadamard(buffer_);
    const double scale = std::ldexp(1.0, -static_cast<int>(q));
    for (auto& a : buffer_) a *= scale;
  } else {
    StateVector state = simulate_gate_by_gate(spec_, theta);
    buffer_.assign(state.amplitudes().begin(), state.amplitudes().end());
  }
  std::vector<double> p(buffer_.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(buffer_[i]);
  inverse_cdf(p, u, q, batch);
  return batch;
}

SampleBatch sample(const CircuitSpec& spec, std::span<const double> theta,
                   std::uint64_t shots, std::uint64_t seed) {
  Sampler sampler(spec);
  return sampler.sample(theta, shots, seed);
}

ParameterVector load_warm_start(const CircuitSpec& spec, const BitString& b) {
  if (spec.id != 2) {
    throw ConfigError("warm start loading is defined for circuit 2 only, got " +
                      std::to_string(spec.id));
  }
  if (b.size() != spec.q) {
    throw ConfigError("warm-start string has " + std::to_string(b.size()) +
                      " bits, circuit has " + std::to_string(spec.q) +
                      " qubits");
  }
  ParameterVector theta(spec.param_count, 0.0);
  for (std::size_t i = 0; i < spec.q; ++i) theta[i] = b[i] ? pi : 0.0;
  return theta;
}

}  // namespace vartsp
