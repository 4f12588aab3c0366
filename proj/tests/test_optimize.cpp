#include "rbr/generator.hpp"
#include "rbr/optimize.hpp"

#include <doctest.h>

#include <random>

using namespace rbr;

namespace {

TaskSet fig_set(TimeValue cr = 0)
{
    return TaskSet({Task::make("tau1", 1, 3, 3), Task::make("tau2", 2, 8, 2), Task::make("tau3", 4, 22, 1)},
                   {cr, std::nullopt});
}

TaskSet random_integer_set(std::mt19937_64& rng, int n)
{
    GenSpec spec;
    spec.n = n;
    spec.utilization = TimeValue::from_ratio(static_cast<std::int64_t>(20 + rng() % 60), 100);
    spec.period_choices = {4, 5, 6, 8, 10, 12, 15, 20, 24, 30, 40, 60};
    spec.integer_wcet = true;
    spec.seed = rng();
    spec.restart_cost = TimeValue(static_cast<std::int64_t>(rng() % 3));
    return generate_taskset(spec);
}

bool schedulable_at(const TaskSet& ts, std::size_t i, const TimeValue& b)
{
    return analyze_task(ts, Discipline::NonPreemptiveEnding, i, b).schedulable;
}

// Every lambda vector with lambda_i in [pi_i, max].
void enumerate_thresholds(const TaskSet& ts, std::size_t i, std::vector<int>& cur, std::vector<std::vector<int>>& out)
{
    if (i == ts.size()) {
        out.push_back(cur);
        return;
    }
    for (int l = ts[i].priority; l <= ts.max_priority(); ++l) {
        cur.push_back(l);
        enumerate_thresholds(ts, i + 1, cur, out);
        cur.pop_back();
    }
}

} // namespace

TEST_CASE("blocking tolerance of the highest-priority task")
{
    TaskSet ts = fig_set();
    ts[0].q_end = ts[0].wcet;
    BlockingTolerance b = blocking_tolerance(ts, 0);
    CHECK(b.resolvable);
    CHECK(b.task_id == "tau1");
    CHECK(b.beta == TimeValue(1));
}

TEST_CASE("unresolvable task stops the synthesis")
{
    QAssignment qa = optimal_q_assignment(fig_set());
    CHECK_FALSE(qa.found);
    CHECK(qa.failed_task == "tau3");
    REQUIRE(qa.tolerances.size() == 3);
    CHECK(qa.tolerances[0].beta == TimeValue(1));
    CHECK_FALSE(qa.tolerances[2].resolvable);

    TaskSet heavy({Task::make("a", 5, 6, 2), Task::make("b", 2, 6, 1)}, {TimeValue(1), std::nullopt});
    QAssignment h = optimal_q_assignment(heavy);
    CHECK_FALSE(h.found);
    CHECK(h.failed_task == "a");
}

TEST_CASE("second task's Q is bounded by the first task's tolerance")
{
    TaskSet ts({Task::make("tau1", 1, 3, 3), Task::make("tau2", 2, 8, 2), Task::make("tau3", 2, 24, 1)}, {});
    QAssignment qa = optimal_q_assignment(ts);
    REQUIRE(qa.found);
    CHECK(qa.q[0] == TimeValue(1));
    CHECK(qa.q[1] == TimeValue(1));
    CHECK(qa.q[2] == min(TimeValue(2), min(qa.tolerances[0].beta, qa.tolerances[1].beta)));
}

TEST_CASE("tolerance agrees with a quarter-grid sweep")
{
    std::mt19937_64 rng(17);
    int checked = 0;
    for (int k = 0; k < 120; ++k) {
        TaskSet ts = random_integer_set(rng, 1 + static_cast<int>(rng() % 4));
        for (Task& t : ts.mutable_tasks())
            t.q_end = TimeValue(1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(t.wcet.floor_div(1))));
        std::size_t i = rng() % ts.size();
        BlockingTolerance b = blocking_tolerance(ts, i);
        // largest feasible grid point by linear scan
        const TimeValue step = TimeValue::from_ratio(1, 4);
        std::optional<TimeValue> best;
        for (TimeValue g(0); g <= ts[i].period; g += step) {
            if (!schedulable_at(ts, i, g))
                break;
            best = g;
        }
        if (!best) {
            CHECK_FALSE(b.resolvable);
            continue;
        }
        REQUIRE(b.resolvable);
        ++checked;
        CHECK(b.beta >= *best);
        CHECK(b.beta < *best + step);
        CHECK(schedulable_at(ts, i, b.beta));
        if (b.beta < ts[i].period)
            CHECK_FALSE(schedulable_at(ts, i, b.beta + ts[i].period / TimeValue(std::int64_t(1) << 29)));
    }
    CHECK(checked > 50);
}

TEST_CASE("synthesized Q values make the set feasible")
{
    std::mt19937_64 rng(23);
    int found = 0;
    for (int k = 0; k < 150; ++k) {
        TaskSet ts = random_integer_set(rng, 2 + static_cast<int>(rng() % 4));
        QAssignment qa = optimal_q_assignment(ts);
        if (!qa.found)
            continue;
        ++found;
        TaskSet assigned = with_q(ts, qa.q);
        CHECK(rbr_feasible(assigned, {Discipline::NonPreemptiveEnding}).feasible);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            CHECK(qa.q[i] <= ts[i].wcet);
            CHECK(qa.q[i] >= TimeValue(0));
        }
        CHECK(qa.q[0] == ts[0].wcet);
    }
    CHECK(found > 30);
}

TEST_CASE("threshold search on a set no assignment can fix")
{
    TaskSet ts = fig_set();
    std::vector<std::vector<int>> all;
    std::vector<int> cur;
    enumerate_thresholds(ts, 0, cur, all);
    CHECK(all.size() == 6);
    for (const auto& l : all)
        CHECK_FALSE(rbr_feasible(with_thresholds(ts, l), {Discipline::PreemptionThreshold}).feasible);
    ThresholdAssignment ga = ga_threshold_assignment(ts, GaParams{});
    CHECK_FALSE(ga.feasible);
    CHECK(ga.feasible_tasks < 3);
    CHECK(ga.generations_run <= GaParams{}.generations);
    GaParams full;
    full.stall_generations = 0;
    CHECK(ga_threshold_assignment(ts, full).generations_run == full.generations);
}

TEST_CASE("threshold search basics")
{
    TaskSet single({Task::make("a", 2, 10, 1)}, {TimeValue(1), std::nullopt});
    ThresholdAssignment one = ga_threshold_assignment(single, GaParams{});
    CHECK(one.feasible);
    CHECK(one.thresholds == std::vector<int>{1});
    CHECK(one.generations_run == 0);

    // lambda = pi is feasible here, so the seeded population already contains a solution
    TaskSet easy({Task::make("a", 1, 10, 2), Task::make("b", 1, 20, 1)}, {});
    ThresholdAssignment e = ga_threshold_assignment(easy, GaParams{});
    CHECK(e.feasible);
    CHECK(e.generations_run == 0);

    GaParams bad;
    bad.population = 1;
    CHECK_THROWS_AS(ga_threshold_assignment(easy, bad), std::invalid_argument);
}

TEST_CASE("threshold search is deterministic and respects lambda >= pi")
{
    std::mt19937_64 rng(31);
    for (int k = 0; k < 20; ++k) {
        TaskSet ts = random_integer_set(rng, 3 + static_cast<int>(rng() % 4));
        GaParams p;
        p.generations = 15;
        p.seed = 7 + static_cast<std::uint64_t>(k);
        ThresholdAssignment a = ga_threshold_assignment(ts, p);
        ThresholdAssignment b = ga_threshold_assignment(ts, p);
        CHECK(a.thresholds == b.thresholds);
        CHECK(a.feasible == b.feasible);
        CHECK(a.normalized_slack == b.normalized_slack);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            CHECK(a.thresholds[i] >= ts[i].priority);
            CHECK(a.thresholds[i] <= ts.max_priority());
        }
        CHECK(a.feasible == rbr_feasible(with_thresholds(ts, a.thresholds), {Discipline::PreemptionThreshold}).feasible);
    }
}

TEST_CASE("threshold search finds a solution whenever one exists on small sets")
{
    std::mt19937_64 rng(41);
    int solvable = 0;
    for (int k = 0; k < 60; ++k) {
        TaskSet ts = random_integer_set(rng, 2 + static_cast<int>(rng() % 3));
        std::vector<std::vector<int>> all;
        std::vector<int> cur;
        enumerate_thresholds(ts, 0, cur, all);
        bool any = false;
        for (const auto& l : all)
            any = any || rbr_feasible(with_thresholds(ts, l), {Discipline::PreemptionThreshold}).feasible;
        ThresholdAssignment ga = ga_threshold_assignment(ts, GaParams{});
        CHECK(ga.feasible == any);
        solvable += any ? 1 : 0;
    }
    CHECK(solvable > 10);
}
