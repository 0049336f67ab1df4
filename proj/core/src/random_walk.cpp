#include "retrosearch/random_walk.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "retrosearch/parallel.hpp"
#include "retrosearch/rng.hpp"

namespace retro {

double expected_hitting_time(double epsilon, int target) {
  if (epsilon < 0.0 || epsilon >= 0.5) {
    throw std::invalid_argument("expected_hitting_time: divergent, needs epsilon in [0, 0.5)");
  }
  if (target < 1) throw std::invalid_argument("expected_hitting_time: target must be >= 1");
  return static_cast<double>(target) / (1.0 - 2.0 * epsilon);
}

namespace {

double kahan_sum(const std::vector<std::uint32_t>& values, double shift = 0.0) {
  double sum = 0.0, comp = 0.0;
  for (std::uint32_t v : values) {
    const double term = (static_cast<double>(v) - shift) - comp;
    const double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
  }
  return sum;
}

double kahan_sum_squares(const std::vector<std::uint32_t>& values, double shift) {
  double sum = 0.0, comp = 0.0;
  for (std::uint32_t v : values) {
    const double d = static_cast<double>(v) - shift;
    const double term = d * d - comp;
    const double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
  }
  return sum;
}

}  // namespace

SimulationResult simulate_hitting_time(const WalkConfig& cfg, int jobs) {
  expected_hitting_time(cfg.epsilon, cfg.target);  // validates the parameters
  if (cfg.trials < 1) throw std::invalid_argument("simulate_hitting_time: trials must be >= 1");

  std::vector<std::uint32_t> times(cfg.trials, 0);
  std::vector<std::uint8_t> capped(cfg.trials, 0);
  parallel_for(jobs, cfg.trials, [&](std::size_t i) {
    Rng rng(derive_seed(cfg.seed, 0x77616c6bULL, i));
    int pos = 0;
    std::uint64_t steps = 0;
    while (pos != cfg.target && steps < kWalkStepCap) {
      pos += rng.uniform01() < cfg.epsilon ? -1 : 1;
      ++steps;
    }
    times[i] = static_cast<std::uint32_t>(steps);
    capped[i] = pos != cfg.target;
  });

  SimulationResult result;
  result.trials = cfg.trials;
  result.target = cfg.target;
  for (std::uint8_t c : capped) result.cap_hits += c;
  result.mean = kahan_sum(times) / static_cast<double>(cfg.trials);
  result.variance =
      cfg.trials < 2
          ? 0.0
          : kahan_sum_squares(times, result.mean) / static_cast<double>(cfg.trials - 1);
  result.alphas = {2, 4, 6, 8};
  for (int alpha : result.alphas) {
    const std::uint64_t threshold = static_cast<std::uint64_t>(alpha) *
                                    static_cast<std::uint64_t>(cfg.target);
    std::uint64_t count = 0;
    for (std::uint32_t t : times) count += t >= threshold;
    result.tail_freq.push_back(static_cast<double>(count) / static_cast<double>(cfg.trials));
  }
  return result;
}

TailFit tail_check(const SimulationResult& result, double epsilon) {
  TailFit fit;
  if (epsilon > 0.0) {
    const double theta = -std::log(2.0 * std::sqrt(epsilon * (1.0 - epsilon)));
    fit.bound_valid = static_cast<double>(result.target) * theta > 1.0;
  }
  const double e_over_n = 1.0 / (1.0 - 2.0 * epsilon);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < result.alphas.size(); ++i) {
    fit.bound.push_back(std::exp(-static_cast<double>(result.alphas[i]) + e_over_n));
    if (result.tail_freq[i] <= 0.0) continue;
    // The bound is asymptotic: below alpha = E[T]/N it exceeds 1 and claims
    // nothing, and the empirical curve there is still pre-exponential mass
    // near the mean. Those points stay out of the fit.
    if (static_cast<double>(result.alphas[i]) <= e_over_n) continue;
    const double x = static_cast<double>(result.alphas[i]);
    const double y = std::log(result.tail_freq[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++fit.points_used;
  }
  if (fit.points_used < 2) {
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const double n = static_cast<double>(fit.points_used);
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return fit;
}

}  // namespace retro
