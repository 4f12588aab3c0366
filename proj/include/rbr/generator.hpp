#pragma once

#include "rbr/model.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace rbr {

enum class PeriodDistribution { LogUniform, Uniform };

struct GenSpec {
    int n = 5;
    TimeValue utilization = TimeValue::from_ratio(1, 2);
    TimeValue period_min = 10;
    TimeValue period_max = 1000;
    std::uint64_t seed = 1;
    double critical_fraction = 1.0;
    PeriodDistribution period_distribution = PeriodDistribution::LogUniform;
    /// Sampled periods are snapped to multiples of 1/period_resolution.
    std::int64_t period_resolution = 100;
    /// When non-empty, periods are drawn uniformly from this list instead.
    std::vector<TimeValue> period_choices;
    /// Round C_i to a whole number in [1, T_i]; the utilization is then approximate.
    bool integer_wcet = false;
    TimeValue restart_cost;
    int max_attempts = 1000;

    void validate() const;
};

/// Uniform-simplex utilizations (UUniFast with discard of u_i > 1) summing
/// exactly to U, rate-monotonic priorities, D = T, phi = 0. The top
/// ceil(critical_fraction * n) tasks are critical. Deterministic in the seed.
TaskSet generate_taskset(const GenSpec& spec);

/// Raw per-task utilizations before quantization, exposed for distribution tests.
std::vector<double> uunifast(int n, double total, std::mt19937_64& rng);

/// splitmix64 mix of a master seed and coordinates.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

/// Uniform double in [0, 1) with 53 random bits.
double unit_uniform(std::mt19937_64& rng);

/// Writes `count` task sets as set_NNNN.json plus manifest.json into dir.
/// Set k uses derive_seed(spec.seed, k).
void generate_batch(const GenSpec& spec, int count, const std::string& dir);

} // namespace rbr
