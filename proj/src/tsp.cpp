#include "vartsp/tsp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "vartsp/error.hpp"

namespace vartsp {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

void check_cycle(const TspInstance& inst, const Cycle& c) {
  if (c.size() != inst.size()) {
    throw DomainError("cycle visits " + std::to_string(c.size()) +
                      " locations, instance has " +
                      std::to_string(inst.size()));
  }
}

struct BranchAndBound {
  const TspInstance& inst;
  std::size_t n;
  std::vector<int> current;
  std::vector<char> used;
  std::vector<int> best;
  double best_length = std::numeric_limits<double>::infinity();

  void search(std::size_t depth, double partial) {
    if (partial >= best_length) return;
    if (depth == n) {
      if (current[1] > current[n - 1]) return;  // mirror image
      const double total =
          partial + inst.distance(static_cast<std::size_t>(current[n - 1]), 0);
      if (total < best_length) {
        best_length = total;
        best = current;
      }
      return;
    }
    const auto prev = static_cast<std::size_t>(current[depth - 1]);
    for (std::size_t v = 1; v < n; ++v) {
      if (used[v]) continue;
      // The last slot must exceed order[1]; anything else is a mirror.
      if (depth == n - 1 && static_cast<int>(v) < current[1]) continue;
      used[v] = 1;
      current[depth] = static_cast<int>(v);
      search(depth + 1, partial + inst.distance(prev, v));
      used[v] = 0;
    }
  }
};

}  // namespace

TspInstance::TspInstance(std::vector<Point> coords, std::string name)
    : name_(std::move(name)), coords_(std::move(coords)) {
  const std::size_t n = coords_.size();
  if (n < 3) {
    throw DomainError("instance too small: need at least 3 locations, got " +
                      std::to_string(n));
  }
  dist_.assign(n * n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double d = std::hypot(coords_[u].x - coords_[v].x,
                                  coords_[u].y - coords_[v].y);
      dist_[u * n + v] = d;
      dist_[v * n + u] = d;
    }
  }
}

Cycle::Cycle(std::vector<int> order) : order_(std::move(order)) {
  const std::size_t n = order_.size();
  if (n == 0) throw DomainError("empty cycle");
  if (order_[0] != 0) throw DomainError("cycle must start at location 0");
  std::vector<char> seen(n, 0);
  for (const int v : order_) {
    if (v < 0 || static_cast<std::size_t>(v) >= n || seen[v]) {
      throw DomainError("invalid cycle " + to_string());
    }
    seen[v] = 1;
  }
}

Cycle Cycle::reversed() const {
  std::vector<int> r(order_.size());
  r[0] = order_[0];
  std::reverse_copy(order_.begin() + 1, order_.end(), r.begin() + 1);
  return Cycle(std::move(r));
}

std::string Cycle::to_string() const {
  std::string out = "(";
  for (std::size_t i = 0; i < order_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(order_[i]);
  }
  return out + ")";
}

TspInstance parse_instance(const std::string& text, std::string name) {
  std::vector<Point> points;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const std::string_view head =
        comma == std::string_view::npos ? line : line.substr(0, comma);
    const bool header = first_content && !parse_double(head).has_value();
    first_content = false;
    if (header) continue;
    if (comma == std::string_view::npos) {
      throw DataError("line " + std::to_string(line_no) +
                      ": expected \"x,y\", got \"" + std::string(line) + "\"");
    }
    const auto x = parse_double(line.substr(0, comma));
    const auto y = parse_double(line.substr(comma + 1));
    if (!x || !y) {
      throw DataError("line " + std::to_string(line_no) +
                      ": expected \"x,y\", got \"" + std::string(line) + "\"");
    }
    points.push_back({*x, *y});
  }
  return TspInstance(std::move(points), std::move(name));
}

TspInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open instance file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str(), path.stem().string());
}

TspInstance random_instance(std::size_t n, std::uint64_t seed, double extent) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, extent);
  std::vector<Point> points(n);
  for (auto& p : points) {
    p.x = coord(rng);
    p.y = coord(rng);
  }
  return TspInstance(std::move(points),
                     "rand" + std::to_string(n) + "_s" + std::to_string(seed));
}

std::string format_instance_csv(const TspInstance& inst) {
  std::ostringstream out;
  out.precision(17);
  out << "x,y\n";
  for (const Point& p : inst.coords()) out << p.x << ',' << p.y << '\n';
  return out.str();
}

std::map<std::string, double> load_reference_optima(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open reference file " + path.string());
  std::map<std::string, double> optima;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw DataError(path.string() + " line " + std::to_string(line_no) +
                      ": expected \"name,optimum\"");
    }
    const auto value = parse_double(line.substr(comma + 1));
    if (!value) {
      if (line_no == 1) continue;  // header
      throw DataError(path.string() + " line " + std::to_string(line_no) +
                      ": bad optimum value");
    }
    optima[std::string(trim(line.substr(0, comma)))] = *value;
  }
  return optima;
}

double tour_length(const TspInstance& inst, const Cycle& c) {
  check_cycle(inst, c);
  const std::size_t n = c.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += inst.distance(static_cast<std::size_t>(c[i]),
                           static_cast<std::size_t>(c[(i + 1) % n]));
  }
  return total;
}

Tour brute_force_optimum(const TspInstance& inst) {
  const std::size_t n = inst.size();
  if (n > kBruteForceMaxLocations) {
    throw ResourceError("brute force is limited to " +
                        std::to_string(kBruteForceMaxLocations) +
                        " locations; instance has " + std::to_string(n));
  }
  BranchAndBound bb{inst, n, std::vector<int>(n, 0), std::vector<char>(n, 0),
                    {}, std::numeric_limits<double>::infinity()};
  bb.used[0] = 1;
  bb.search(1, 0.0);
  Cycle best(std::move(bb.best));
  // Recompute in canonical summation order so the value is bit-identical to
  // tour_length on the same cycle.
  const double length = tour_length(inst, best);
  return {std::move(best), length};
}

Tour greedy_nearest_neighbour(const TspInstance& inst) {
  const std::size_t n = inst.size();
  std::vector<char> visited(n, 0);
  std::vector<int> order;
  order.reserve(n);
  order.push_back(0);
  visited[0] = 1;
  std::size_t at = 0;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t next = n;
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < n; ++v) {
      if (visited[v]) continue;
      if (inst.distance(at, v) < nearest) {
        nearest = inst.distance(at, v);
        next = v;
      }
    }
    visited[next] = 1;
    order.push_back(static_cast<int>(next));
    at = next;
  }
  Cycle c(std::move(order));
  const double length = tour_length(inst, c);
  return {std::move(c), length};
}

std::optional<double> standard_error(std::span<const double> values) {
  const std::size_t r = values.size();
  if (r < 2) return std::nullopt;
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(r);
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  const double sigma = std::sqrt(ss / static_cast<double>(r));
  return sigma / std::sqrt(static_cast<double>(r - 1));
}

QualityReport quality(double d_sim, double d_best,
                      std::span<const double> per_run_values) {
  if (!(d_sim > 0.0) || !(d_best > 0.0)) {
    throw DomainError("distances must be positive");
  }
  QualityReport report;
  report.d_sim = d_sim;
  report.d_best = d_best;
  report.q_sol = d_best / d_sim;
  report.e_sol = 1.0 - report.q_sol;
  report.sem = standard_error(per_run_values);
  return report;
}

}  // namespace vartsp
