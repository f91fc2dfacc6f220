#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "padiclab/pointset.hpp"

namespace padiclab {

// Knobs shared by every suite. Runtime-only fields (threads) are excluded
// from the report's config echo so reruns stay byte-identical.
struct RunConfig {
  std::string suite;
  std::int64_t p = 5;
  int depth = 2;
  int precision = 12;
  double alpha = 0.5;
  double eps = 0.1;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string mode = "verify";  // verify | diagnose
  // suite-specific knobs
  int lambda_exp = 1;
  int m_step = 0;          // 0 = derive from alpha
  double c2 = 0.0;         // 0 = measure
  int n_min = 0, n_max = 0;
  std::optional<std::int64_t> coeff_a, coeff_b, coeff_c;
  int trials = 100;
  int min_points = 1000, max_points = 10000;
  std::string set_kind = "random";  // random | w12-axis | w21-axis | line
};

struct RunReport {
  bool passed = false;
  int exit_code = 0;     // 0 pass, 1 violation found, 2 invalid config
  std::string text;      // serialized JSON report
  std::string csv;       // per-case table (optional output format)
};

// Runs the named suite and returns the serialized report (deterministic
// for a fixed config+seed, independent of thread count).
RunReport run_suite(const RunConfig& cfg);

// Writes text to path atomically (temp file + rename).
void write_atomically(const std::string& path, const std::string& text);

// Names accepted by run_suite.
const std::vector<std::string>& suite_names();

// Deterministic generators shared by the suites and the test harness.
PointSet random_regular_set(std::uint64_t seed, std::int64_t p, int depth,
                            double target_alpha, std::size_t min_points,
                            std::size_t max_points, int top_scale = 0);
PointSet axis_set(std::int64_t p, int depth, int axis_coord, int from_scale);
PointSet random_ball_set(std::uint64_t seed, std::int64_t p, int depth,
                         std::size_t count, int from_scale);

}  // namespace padiclab
