#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace vartsp {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Symmetric Euclidean TSP instance. Immutable after construction.
class TspInstance {
 public:
  // Throws DomainError when fewer than three points are given.
  explicit TspInstance(std::vector<Point> coords, std::string name = {});

  std::size_t size() const { return coords_.size(); }
  const std::string& name() const { return name_; }
  const std::vector<Point>& coords() const { return coords_; }
  double distance(std::size_t u, std::size_t v) const {
    return dist_[u * coords_.size() + v];
  }

 private:
  std::string name_;
  std::vector<Point> coords_;
  std::vector<double> dist_;  // row-major n*n
};

// A tour as a permutation of 0..n-1 beginning at location 0. The return edge
// to the start is implicit.
class Cycle {
 public:
  Cycle() = default;
  // Throws DomainError unless `order` is a permutation of 0..n-1 with
  // order[0] == 0.
  explicit Cycle(std::vector<int> order);

  std::size_t size() const { return order_.size(); }
  int operator[](std::size_t i) const { return order_[i]; }
  const std::vector<int>& order() const { return order_; }
  Cycle reversed() const;
  std::string to_string() const;

  friend bool operator==(const Cycle&, const Cycle&) = default;
  friend auto operator<=>(const Cycle&, const Cycle&) = default;

 private:
  std::vector<int> order_;
};

struct Tour {
  Cycle cycle;
  double length = 0.0;
};

// Largest instance the exhaustive search accepts; (n-1)!/2 tours.
inline constexpr std::size_t kBruteForceMaxLocations = 13;

// Reads one "x,y" pair per line. A first line starting with a non-numeric
// token is treated as a header. Throws DataError on malformed lines and
// DomainError on fewer than three points.
TspInstance load_instance(const std::filesystem::path& path);
TspInstance parse_instance(const std::string& text, std::string name = {});

// n points drawn uniformly from [0, extent)^2.
TspInstance random_instance(std::size_t n, std::uint64_t seed,
                            double extent = 100.0);

std::string format_instance_csv(const TspInstance& inst);

// Optional "name,optimum" sidecar for published instances.
std::map<std::string, double> load_reference_optima(
    const std::filesystem::path& path);

double tour_length(const TspInstance& inst, const Cycle& c);

// Exact optimum by depth-first enumeration with location 0 fixed and mirror
// images skipped (order[1] < order[n-1]). Returns the lexicographically first
// optimal cycle. Throws ResourceError above kBruteForceMaxLocations.
Tour brute_force_optimum(const TspInstance& inst);

// Nearest unvisited neighbour from location 0; ties go to the lowest index.
Tour greedy_nearest_neighbour(const TspInstance& inst);

struct QualityReport {
  double d_sim = 0.0;
  double d_best = 0.0;
  double q_sol = 0.0;
  double e_sol = 0.0;
  std::optional<double> sem;  // absent for a single run
};

// Standard error of the mean sigma / sqrt(r - 1), sigma the population
// standard deviation. Empty for fewer than two values.
std::optional<double> standard_error(std::span<const double> values);

// q_sol = d_best / d_sim; sem computed from the per-run values (typically
// per-run qualities). Throws DomainError on non-positive distances.
QualityReport quality(double d_sim, double d_best,
                      std::span<const double> per_run_values = {});

}  // namespace vartsp
