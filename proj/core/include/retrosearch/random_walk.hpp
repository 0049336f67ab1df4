#pragma once

#include <cstdint>
#include <vector>

namespace retro {

/// Asymmetric +-1 walk from 0: step +1 with probability 1-epsilon, -1 with
/// probability epsilon, stopped on first arrival at `target`.
struct WalkConfig {
  double epsilon = 0.0;
  int target = 1;
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
};

struct SimulationResult {
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  int target = 0;
  std::uint64_t trials = 0;
  std::uint64_t cap_hits = 0;  // trials cut off by the per-trial step cap
  std::vector<int> alphas;     // the tail grid
  std::vector<double> tail_freq;  // empirical P[T >= alpha * target]
};

/// Closed form N/(1-2*epsilon). Throws std::invalid_argument("divergent...")
/// for epsilon >= 0.5, where the expectation does not exist.
double expected_hitting_time(double epsilon, int target);

/// Hitting times cannot exceed this many steps per trial; for epsilon < 0.5
/// at the sizes used here the cap fires with negligible probability, and any
/// hit is counted in cap_hits (the censored value still enters the mean).
inline constexpr std::uint64_t kWalkStepCap = 1'000'000;

/// Monte-Carlo hitting times with per-trial derived seeds; trial order and
/// jobs count do not affect any reported statistic (compensated summation
/// over the trial-indexed results). Tail grid: alpha in {2, 4, 6, 8}.
SimulationResult simulate_hitting_time(const WalkConfig& cfg, int jobs = 1);

/// Least-squares slope of log tail frequency against alpha, plus the
/// theoretical curve exp(-alpha + 1/(1-2*epsilon)) for comparison. Excluded
/// from the fit: zero frequencies, and alphas at or below E[T]/N where the
/// (asymptotic) bound exceeds 1 and constrains nothing. Slope is NaN when
/// fewer than two points survive.
///
/// The bound itself only holds where its derivation converges: the per-step
/// tail decay rate is theta = -log(2*sqrt(eps*(1-eps))), and bounding
/// P[T >= alpha*N] by exp(-alpha + E[T]/N) takes the MGF at 1/N, which
/// exists only for N*theta > 1. `bound_valid` records that; outside it the
/// theorem makes no tail claim and the slope is informational.
struct TailFit {
  double slope = 0.0;
  std::size_t points_used = 0;
  bool bound_valid = true;
  std::vector<double> bound;  // one value per result alpha
};

TailFit tail_check(const SimulationResult& result, double epsilon);

}  // namespace retro
