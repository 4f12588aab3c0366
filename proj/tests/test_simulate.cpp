#include "rbr/generator.hpp"
#include "rbr/simulate.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace rbr;

namespace {

TaskSet fig_set(TimeValue cr = 0)
{
    return TaskSet({Task::make("tau1", 1, 3, 3), Task::make("tau2", 2, 8, 2), Task::make("tau3", 4, 22, 1)},
                   {cr, std::nullopt});
}

RestartSchedule before(std::int64_t t)
{
    return {{{TimeValue(t), Side::Before}}};
}

bool missed(const SimResult& r, const std::string& task, const TimeValue& deadline)
{
    return std::any_of(r.misses.begin(), r.misses.end(),
                       [&](const MissRecord& m) { return m.task == task && m.deadline == deadline; });
}

std::vector<SimEvent> of_kind(const SimResult& r, EventKind k)
{
    std::vector<SimEvent> out;
    std::copy_if(r.trace.begin(), r.trace.end(), std::back_inserter(out), [&](const SimEvent& e) { return e.kind == k; });
    return out;
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

} // namespace

TEST_CASE("post-restart ready set")
{
    TaskSet ts({Task::make("a", 1, 4, 1)}, {});
    NvmState nvm(1);
    auto none = post_restart_ready_set(ts, nvm, TimeValue(10));
    REQUIRE(none.size() == 1);
    CHECK(none[0].release == TimeValue(8));

    nvm.record(0, TimeValue::from_ratio(19, 2), TimeValue(8));
    CHECK(post_restart_ready_set(ts, nvm, TimeValue(10)).empty());

    NvmState old(1);
    old.record(0, TimeValue(7), TimeValue(4));
    auto again = post_restart_ready_set(ts, old, TimeValue(10));
    REQUIRE(again.size() == 1);
    CHECK(again[0].release == TimeValue(8));

    // finished exactly at the next release: that next job is still pending
    NvmState tie(1);
    tie.record(0, TimeValue(8), TimeValue(4));
    CHECK(post_restart_ready_set(ts, tie, TimeValue(10)).size() == 1);

    // a release at t itself is hidden in exclusive mode
    auto at = post_restart_ready_set(ts, NvmState(1), TimeValue(8), true);
    REQUIRE(at.size() == 1);
    CHECK(at[0].release == TimeValue(4));
    CHECK(post_restart_ready_set(ts, NvmState(1), TimeValue(8))[0].release == TimeValue(8));

    TaskSet phased({Task::make("a", 1, 4, 1)}, {});
    phased[0].phase = TimeValue(20);
    CHECK(post_restart_ready_set(phased, NvmState(1), TimeValue(10)).empty());
}

TEST_CASE("watchdog checkpoints")
{
    TaskSet ts = fig_set();
    std::vector<TimeValue> ideal{1, 3, 12};
    auto c0 = watchdog_next_checkpoint(ts, ideal, TimeValue(0));
    REQUIRE(c0);
    CHECK(c0->task_id == "tau1");
    CHECK(c0->time == TimeValue(1));
    CHECK(c0->release == TimeValue(0));

    auto c1 = watchdog_next_checkpoint(ts, ideal, TimeValue(1));
    REQUIRE(c1);
    CHECK(c1->task_id == "tau2");
    CHECK(c1->time == TimeValue(3));

    auto c3 = watchdog_next_checkpoint(ts, ideal, TimeValue(3));
    REQUIRE(c3);
    CHECK(c3->task_id == "tau1");
    CHECK(c3->time == TimeValue(4));
    CHECK(c3->release == TimeValue(3));

    TaskSet nc = fig_set();
    nc[2].critical = false;
    for (std::int64_t t = 0; t < 60; ++t) {
        auto c = watchdog_next_checkpoint(nc, ideal, TimeValue(t));
        REQUIRE(c);
        CHECK(c->task_id != "tau3");
        CHECK(c->time > TimeValue(t));
    }
}

TEST_CASE("restart scenarios on the three-task set")
{
    SimResult fp = simulate(fig_set(), {Discipline::FullyPreemptive}, before(10), TimeValue(44));
    CHECK(fp.critical_miss);
    CHECK(missed(fp, "tau3", TimeValue(22)));
    CHECK(fp.restarts == 1);

    SimResult clean = simulate(fig_set(), {Discipline::FullyPreemptive}, {}, TimeValue(44));
    CHECK(clean.misses.empty());

    SimResult np = simulate(fig_set(), {Discipline::FullyNonPreemptive}, before(5), TimeValue(44));
    CHECK(np.critical_miss);
    CHECK(missed(np, "tau1", TimeValue(9)));

    TaskSet npe = fig_set();
    for (Task& t : npe.mutable_tasks())
        t.q_end = TimeValue(1);
    for (std::int64_t t : {7, 9})
        CHECK_FALSE(simulate(npe, {Discipline::NonPreemptiveEnding}, before(t), TimeValue(44)).critical_miss);
    // the restart that loses tau3's preempted work
    CHECK(simulate(npe, {Discipline::NonPreemptiveEnding}, before(10), TimeValue(44)).critical_miss);

    TaskSet pt = fig_set();
    pt[0].threshold = 3;
    pt[1].threshold = 3;
    pt[2].threshold = 2;
    CHECK_FALSE(simulate(pt, {Discipline::PreemptionThreshold}, before(7), TimeValue(44)).critical_miss);
    CHECK_FALSE(simulate(pt, {Discipline::PreemptionThreshold}, before(9), TimeValue(44)).critical_miss);
    SimOptions retained;
    retained.pt_reexecution = PtReexecution::Retained;
    CHECK(simulate(pt, {Discipline::PreemptionThreshold}, before(9), TimeValue(44), retained).critical_miss);
    AdversarialResult adv = adversarial_restart_search(pt, {Discipline::PreemptionThreshold});
    CHECK(adv.miss_found);
}

TEST_CASE("restart eps before a completion")
{
    TaskSet ts = fig_set();
    RestartPoint p = restart_before_completion(ts, {Discipline::FullyPreemptive}, 1);
    CHECK(p.instant == TimeValue(1));
    CHECK(p.side == Side::Before);
    SimResult r = simulate(ts, {Discipline::FullyPreemptive}, {{p}}, TimeValue(24));
    // tau1's first job is lost and re-executed
    auto completes = of_kind(r, EventKind::Complete);
    REQUIRE(!completes.empty());
    CHECK(completes[0].task == "tau1");
    CHECK(completes[0].time == TimeValue(2));
}

TEST_CASE("restart cost idles the processor")
{
    TaskSet ts({Task::make("a", 2, 10, 1)}, {TimeValue(3), std::nullopt});
    SimResult r = simulate(ts, {Discipline::FullyPreemptive}, before(1), TimeValue(10));
    auto begin = of_kind(r, EventKind::RestartBegin);
    auto end = of_kind(r, EventKind::RestartEnd);
    REQUIRE(begin.size() == 1);
    REQUIRE(end.size() == 1);
    CHECK(end[0].time - begin[0].time == TimeValue(3));
    auto completes = of_kind(r, EventKind::Complete);
    REQUIRE(completes.size() == 1);
    CHECK(completes[0].time == TimeValue(6));
    for (const Segment& s : r.segments)
        CHECK((s.end <= TimeValue(1) || s.begin >= TimeValue(4)));
}

TEST_CASE("watchdog recovery")
{
    TaskSet ts = fig_set();
    SimResult r = simulate_with_watchdog(ts, {Discipline::FullyPreemptive}, {{TimeValue::from_ratio(1, 5), "tau1"}},
                                         TimeValue(30));
    auto begins = of_kind(r, EventKind::RestartBegin);
    REQUIRE(!begins.empty());
    CHECK(begins[0].time == TimeValue(1));
    CHECK(begins[0].side == Side::After);
    CHECK(of_kind(r, EventKind::SilentComplete).size() == 1);
    CHECK(of_kind(r, EventKind::WdExpire).size() == 1);

    SimResult plain = simulate(ts, {Discipline::FullyPreemptive}, {}, TimeValue(30));
    SimResult quiet = simulate_with_watchdog(ts, {Discipline::FullyPreemptive}, {}, TimeValue(30));
    CHECK(quiet.restarts == 0);
    CHECK(of_kind(quiet, EventKind::WdExpire).empty());
    REQUIRE(quiet.segments.size() == plain.segments.size());
    for (std::size_t k = 0; k < plain.segments.size(); ++k) {
        CHECK(quiet.segments[k].begin == plain.segments[k].begin);
        CHECK(quiet.segments[k].end == plain.segments[k].end);
    }

    TaskSet nc = fig_set();
    nc[2].critical = false;
    SimResult silent = simulate_with_watchdog(nc, {Discipline::FullyPreemptive}, {{TimeValue(1), "tau3"}}, TimeValue(30));
    CHECK(silent.restarts == 0);
}

TEST_CASE("adversarial search")
{
    AdversarialResult fp = adversarial_restart_search(fig_set(), {Discipline::FullyPreemptive});
    CHECK(fp.miss_found);
    REQUIRE(fp.restart);
    REQUIRE(fp.miss);
    CHECK(fp.candidates > 0);
    CHECK(simulate(fig_set(), {Discipline::FullyPreemptive}, {{*fp.restart}}).critical_miss);

    TaskSet single({Task::make("a", 1, 3, 1)}, {TimeValue::from_ratio(1, 2), std::nullopt});
    AdversarialResult none = adversarial_restart_search(single, {Discipline::FullyPreemptive});
    CHECK_FALSE(none.miss_found);
    CHECK_FALSE(none.restart_free_miss);
}

TEST_CASE("A9 spacing of restarts")
{
    TaskSet ts = fig_set();
    RestartSchedule two{{{TimeValue(5), Side::Before}, {TimeValue(100), Side::Before}}};
    CHECK_THROWS_AS(simulate(ts, {Discipline::FullyPreemptive}, two, TimeValue(400)), std::invalid_argument);
    RestartSchedule far{{{TimeValue(5), Side::Before}, {TimeValue(300), Side::Before}}};
    CHECK_NOTHROW(simulate(ts, {Discipline::FullyPreemptive}, far, TimeValue(400)));
    SimOptions loose;
    loose.enforce_a9 = false;
    CHECK_NOTHROW(simulate(ts, {Discipline::FullyPreemptive}, two, TimeValue(400), loose));
}

TEST_CASE("traces are well formed")
{
    std::mt19937_64 rng(3);
    for (int k = 0; k < 60; ++k) {
        TaskSet ts = random_integer_set(rng, 2 + static_cast<int>(rng() % 4));
        for (Task& t : ts.mutable_tasks()) {
            t.q_end = TimeValue(1);
            t.threshold = ts.max_priority();
        }
        TimeValue h = default_horizon(ts);
        RestartSchedule rs{{{TimeValue(1 + static_cast<std::int64_t>(rng() % 20)), Side::Before}}};
        for (Discipline d : {Discipline::FullyPreemptive, Discipline::FullyNonPreemptive, Discipline::NonPreemptiveEnding,
                             Discipline::PreemptionThreshold}) {
            SimResult r = simulate(ts, {d}, rs, h);
            for (std::size_t s = 0; s + 1 < r.segments.size(); ++s)
                CHECK(r.segments[s].end <= r.segments[s + 1].begin);
            for (const Segment& s : r.segments)
                CHECK(s.begin < s.end);
            for (std::size_t e = 0; e + 1 < r.trace.size(); ++e)
                CHECK(r.trace[e].time <= r.trace[e + 1].time);
            if (d == Discipline::FullyNonPreemptive)
                CHECK(of_kind(r, EventKind::Preempt).empty());
            SimResult again = simulate(ts, {d}, rs, h);
            CHECK(trace_to_text(again) == trace_to_text(r));
        }
    }
}

TEST_CASE("text rendering")
{
    CHECK(format_instant(TimeValue(10), Side::Before) == "10-eps");
    CHECK(format_instant(TimeValue(1), Side::After) == "1+eps");
    CHECK(format_instant(TimeValue::from_ratio(5, 2), Side::At) == "2.5");
    SimResult r = simulate(fig_set(), {Discipline::FullyPreemptive}, before(10), TimeValue(44));
    std::string text = trace_to_text(r);
    CHECK(text.find("10-eps") != std::string::npos);
    std::string diagram = render_diagram(fig_set(), r, TimeValue(30));
    CHECK(diagram.find("tau3") != std::string::npos);
    CHECK(diagram.find('!') != std::string::npos);
}
