#include "rbr/generator.hpp"
#include "rbr/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace rbr;

TEST_CASE("utilization is exact and periods stay in range")
{
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        GenSpec spec;
        spec.n = 1 + static_cast<int>(seed % 20);
        spec.utilization = TimeValue::from_ratio(static_cast<std::int64_t>(5 + seed % 90), 100);
        spec.seed = seed;
        TaskSet ts = generate_taskset(spec);
        REQUIRE(ts.size() == static_cast<std::size_t>(spec.n));
        CHECK(utilization(ts) == spec.utilization);
        CHECK(validate_taskset(ts, {}).empty());
        std::set<TimeValue> periods;
        for (const Task& t : ts.tasks()) {
            CHECK(t.period >= spec.period_min);
            CHECK(t.period <= spec.period_max);
            CHECK((t.period * TimeValue(100)).is_integer());
            CHECK(t.deadline == t.period);
            CHECK(t.wcet > TimeValue(0));
            CHECK(t.wcet <= t.period);
            periods.insert(t.period);
        }
        CHECK(periods.size() == ts.size());
        // rate-monotonic order
        for (std::size_t i = 0; i + 1 < ts.size(); ++i)
            CHECK(ts[i].period < ts[i + 1].period);
    }
}

TEST_CASE("generation is deterministic in the seed")
{
    GenSpec spec;
    spec.n = 8;
    spec.seed = 99;
    CHECK(taskset_to_json(generate_taskset(spec)) == taskset_to_json(generate_taskset(spec)));
    GenSpec other = spec;
    other.seed = 100;
    CHECK(taskset_to_json(generate_taskset(spec)) != taskset_to_json(generate_taskset(other)));
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
}

TEST_CASE("invalid generator parameters")
{
    GenSpec spec;
    spec.n = 3;
    spec.period_min = 50;
    spec.period_max = 50;
    CHECK_THROWS_AS(generate_taskset(spec), std::invalid_argument);

    GenSpec inverted;
    inverted.period_min = 100;
    inverted.period_max = 10;
    CHECK_THROWS_AS(generate_taskset(inverted), std::invalid_argument);

    GenSpec over;
    over.n = 2;
    over.utilization = 3;
    CHECK_THROWS_AS(generate_taskset(over), std::invalid_argument);

    GenSpec zero;
    zero.n = 0;
    CHECK_THROWS_AS(generate_taskset(zero), std::invalid_argument);
}

TEST_CASE("first uniform-simplex share follows Beta(1, n-1)")
{
    // chi-square over 10 equiprobable bins, 0.1% critical value for 9 degrees of freedom
    for (int n : {2, 4, 8}) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(n) * 7919);
        const int samples = 5000;
        std::vector<int> bins(10, 0);
        for (int k = 0; k < samples; ++k) {
            std::vector<double> u = uunifast(n, 0.8, rng);
            double x = u[0] / 0.8;
            double cdf = 1.0 - std::pow(1.0 - x, n - 1);
            ++bins[std::min(9, static_cast<int>(cdf * 10))];
        }
        double chi = 0;
        const double expected = samples / 10.0;
        for (int b : bins)
            chi += (b - expected) * (b - expected) / expected;
        CHECK(chi < 27.88);
    }
}

TEST_CASE("critical fraction marks the highest-priority tasks")
{
    GenSpec spec;
    spec.n = 10;
    spec.critical_fraction = 0.3;
    TaskSet ts = generate_taskset(spec);
    int critical = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        critical += ts[i].critical ? 1 : 0;
        CHECK(ts[i].critical == (i < 3));
    }
    CHECK(critical == 3);
    CHECK(validate_taskset(ts, {}).empty());
}

TEST_CASE("integer mode")
{
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        GenSpec spec;
        spec.n = 5;
        spec.seed = seed;
        spec.utilization = TimeValue::from_ratio(3, 5);
        spec.period_choices = {4, 5, 6, 8, 10, 12, 15, 20, 24, 30, 40, 60};
        spec.integer_wcet = true;
        TaskSet ts = generate_taskset(spec);
        for (const Task& t : ts.tasks()) {
            CHECK(t.wcet.is_integer());
            CHECK(t.period.is_integer());
            CHECK(t.wcet >= TimeValue(1));
            CHECK(t.wcet <= t.period);
        }
        CHECK(hyperperiod(ts, false) <= TimeValue(120));
    }
}

TEST_CASE("batch output")
{
    auto dir = std::filesystem::temp_directory_path() / "rbr_gen_batch_test";
    std::filesystem::remove_all(dir);
    GenSpec spec;
    spec.n = 4;
    spec.seed = 5;
    generate_batch(spec, 3, dir.string());
    CHECK(std::filesystem::exists(dir / "manifest.json"));
    for (const char* name : {"set_0000.json", "set_0001.json", "set_0002.json"}) {
        TaskSet ts = load_taskset((dir / name).string());
        CHECK(ts.size() == 4);
        CHECK(utilization(ts) == spec.utilization);
    }
    std::filesystem::remove_all(dir);
}
