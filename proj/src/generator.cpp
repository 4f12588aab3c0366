#include "rbr/generator.hpp"
#include "rbr/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace rbr {

namespace {

constexpr std::int64_t kWeightGrid = 1'000'000'000;

// Integer weights on kWeightGrid summing exactly to the grid, each at least 1.
std::vector<std::int64_t> quantize(const std::vector<double>& u, double total)
{
    const std::size_t n = u.size();
    std::vector<std::int64_t> k(n);
    std::vector<std::pair<double, std::size_t>> rest;
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double exact = u[i] / total * static_cast<double>(kWeightGrid);
        k[i] = static_cast<std::int64_t>(std::floor(exact));
        sum += k[i];
        rest.emplace_back(exact - static_cast<double>(k[i]), i);
    }
    std::stable_sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; sum < kWeightGrid; r = (r + 1) % n, ++sum)
        ++k[rest[r].second];
    for (std::size_t r = 0; sum > kWeightGrid; r = (r + 1) % n)
        if (k[rest[n - 1 - r].second] > 1) {
            --k[rest[n - 1 - r].second];
            --sum;
        }
    for (std::size_t i = 0; i < n; ++i) {
        if (k[i] >= 1)
            continue;
        auto largest = std::max_element(k.begin(), k.end());
        *largest -= 1 - k[i];
        k[i] = 1;
    }
    return k;
}

TimeValue draw_period(const GenSpec& spec, std::mt19937_64& rng)
{
    if (!spec.period_choices.empty()) {
        auto idx = static_cast<std::size_t>(rng() % spec.period_choices.size());
        return spec.period_choices[idx];
    }
    double lo = spec.period_min.to_double();
    double hi = spec.period_max.to_double();
    double x = unit_uniform(rng);
    double p = spec.period_distribution == PeriodDistribution::LogUniform
                   ? std::exp(std::log(lo) + x * (std::log(hi) - std::log(lo)))
                   : lo + x * (hi - lo);
    TimeValue t = TimeValue::from_double(p, spec.period_resolution);
    return max(spec.period_min, min(spec.period_max, t));
}

} // namespace

void GenSpec::validate() const
{
    if (n < 1)
        throw std::invalid_argument("task count must be at least 1");
    if (utilization <= TimeValue(0))
        throw std::invalid_argument("utilization must be positive");
    if (utilization > TimeValue(n))
        throw std::invalid_argument("utilization " + utilization.to_string() + " exceeds n = " +
                                    std::to_string(n) + " tasks at utilization at most 1 each");
    if (period_choices.empty() && (period_min <= TimeValue(0) || period_min > period_max))
        throw std::invalid_argument("period range must satisfy 0 < P_min <= P_max");
    if (period_choices.empty() && n > 1 && period_min == period_max)
        throw std::invalid_argument("P_min = P_max leaves no distinct periods for " + std::to_string(n) + " tasks");
    if (period_resolution < 1)
        throw std::invalid_argument("period resolution must be at least 1");
    if (critical_fraction <= 0 || critical_fraction > 1)
        throw std::invalid_argument("critical fraction must lie in (0, 1]");
    if (restart_cost.is_negative())
        throw std::invalid_argument("restart cost must be non-negative");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b)
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(master) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

double unit_uniform(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<double> uunifast(int n, double total, std::mt19937_64& rng)
{
    std::vector<double> u(static_cast<std::size_t>(n));
    double sum = total;
    for (int i = 1; i < n; ++i) {
        double next = sum * std::pow(unit_uniform(rng), 1.0 / (n - i));
        u[static_cast<std::size_t>(i - 1)] = sum - next;
        sum = next;
    }
    u[static_cast<std::size_t>(n - 1)] = sum;
    return u;
}

TaskSet generate_taskset(const GenSpec& spec)
{
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    const auto n = static_cast<std::size_t>(spec.n);
    const double total = spec.utilization.to_double();

    std::vector<TimeValue> util;
    for (int attempt = 0;; ++attempt) {
        if (attempt == spec.max_attempts)
            throw std::runtime_error("no utilization vector with every u_i <= 1 after " +
                                     std::to_string(spec.max_attempts) + " attempts");
        std::vector<std::int64_t> k = quantize(uunifast(spec.n, total, rng), total);
        util.clear();
        bool ok = true;
        for (std::int64_t w : k) {
            util.push_back(spec.utilization * TimeValue::from_ratio(w, kWeightGrid));
            ok = ok && util.back() <= TimeValue(1);
        }
        if (ok)
            break;
    }

    std::vector<TimeValue> periods(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int attempt = 0;; ++attempt) {
            if (attempt == spec.max_attempts)
                throw std::runtime_error("cannot draw " + std::to_string(n) +
                                         " distinct periods for rate-monotonic priorities");
            TimeValue p = draw_period(spec, rng);
            if (std::find(periods.begin(), periods.begin() + static_cast<std::ptrdiff_t>(i), p) ==
                periods.begin() + static_cast<std::ptrdiff_t>(i)) {
                periods[i] = p;
                break;
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return periods[a] < periods[b]; });
    const auto critical = static_cast<std::size_t>(std::ceil(spec.critical_fraction * static_cast<double>(n) - 1e-9));

    std::vector<Task> tasks;
    for (std::size_t rank = 0; rank < n; ++rank) {
        std::size_t i = order[rank];
        TimeValue c = util[i] * periods[i];
        if (spec.integer_wcet) {
            std::int64_t whole = std::llround(c.to_double());
            c = TimeValue(std::clamp<std::int64_t>(whole, 1, periods[i].floor_div(TimeValue(1))));
        }
        Task t = Task::make("tau" + std::to_string(rank + 1), c, periods[i], static_cast<int>(n - rank),
                            rank < critical);
        tasks.push_back(std::move(t));
    }
    return TaskSet(std::move(tasks), RestartModel{spec.restart_cost, std::nullopt});
}

void generate_batch(const GenSpec& spec, int count, const std::string& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json files = nlohmann::json::array();
    for (int k = 0; k < count; ++k) {
        GenSpec s = spec;
        s.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(k));
        char name[32];
        std::snprintf(name, sizeof name, "set_%04d.json", k);
        save_taskset(generate_taskset(s), (fs::path(dir) / name).string());
        files.push_back({{"file", name}, {"seed", s.seed}});
    }
    nlohmann::json periods = nlohmann::json::array();
    for (const TimeValue& p : spec.period_choices)
        periods.push_back(p.to_string());
    nlohmann::json manifest = {
        {"n", spec.n},
        {"U", spec.utilization.to_string()},
        {"P_min", spec.period_min.to_string()},
        {"P_max", spec.period_max.to_string()},
        {"period_distribution", spec.period_distribution == PeriodDistribution::LogUniform ? "log-uniform" : "uniform"},
        {"period_resolution", spec.period_resolution},
        {"period_choices", periods},
        {"integer_wcet", spec.integer_wcet},
        {"critical_fraction", spec.critical_fraction},
        {"Cr", spec.restart_cost.to_string()},
        {"master_seed", spec.seed},
        {"sets", files},
    };
    std::ofstream out(fs::path(dir) / "manifest.json");
    out << manifest.dump(2) << '\n';
}

} // namespace rbr
