#include "rbr/experiments.hpp"
#include "rbr/io.hpp"

#include <doctest.h>

#include <sstream>

using namespace rbr;

namespace {

SweepConfig small_config()
{
    SweepConfig cfg;
    cfg.utilizations = {TimeValue::from_ratio(3, 10), TimeValue::from_ratio(7, 10)};
    cfg.task_counts = {3, 5};
    cfg.trials = 8;
    cfg.schemes = {SweepScheme::FP, SweepScheme::NP, SweepScheme::NPE, SweepScheme::PT, SweepScheme::NPE_QC,
                   SweepScheme::PT_MAX};
    cfg.restart_cost = TimeValue(1);
    cfg.ga.generations = 10;
    cfg.seed = 4;
    cfg.threads = 1;
    return cfg;
}

const SweepRow& row(const std::vector<SweepRow>& rows, std::size_t u, std::size_t n, SweepScheme s,
                    const SweepConfig& cfg)
{
    for (const SweepRow& r : rows)
        if (r.utilization == cfg.utilizations[u] && r.n == cfg.task_counts[n] && r.scheme == s)
            return r;
    throw std::logic_error("row missing");
}

} // namespace

TEST_CASE("scheme names round-trip")
{
    for (SweepScheme s : {SweepScheme::FP, SweepScheme::NP, SweepScheme::NPE, SweepScheme::PT, SweepScheme::NPE_QC,
                          SweepScheme::PT_MAX})
        CHECK(parse_sweep_scheme(to_string(s)) == s);
    CHECK_THROWS(parse_sweep_scheme("edf"));
    CHECK(discipline_of(SweepScheme::NPE_QC) == Discipline::NonPreemptiveEnding);
    CHECK(discipline_of(SweepScheme::PT_MAX) == Discipline::PreemptionThreshold);
}

TEST_CASE("sweep rows are complete and deterministic")
{
    SweepConfig cfg = small_config();
    std::vector<SweepRow> a = run_sweep(cfg);
    CHECK(a.size() == cfg.utilizations.size() * cfg.task_counts.size() * cfg.schemes.size());
    for (const SweepRow& r : a) {
        CHECK(r.trials == cfg.trials);
        CHECK(r.feasible >= 0);
        CHECK(r.feasible <= r.trials);
    }
    cfg.threads = 3;
    std::vector<SweepRow> b = run_sweep(cfg);
    CHECK(sweep_csv(a) == sweep_csv(b));

    for (std::size_t u = 0; u < cfg.utilizations.size(); ++u)
        for (std::size_t n = 0; n < cfg.task_counts.size(); ++n) {
            CHECK(row(a, u, n, SweepScheme::NPE_QC, cfg).feasible == row(a, u, n, SweepScheme::NP, cfg).feasible);
            CHECK(row(a, u, n, SweepScheme::PT_MAX, cfg).feasible == row(a, u, n, SweepScheme::NP, cfg).feasible);
        }
}

TEST_CASE("overloaded grid points are never feasible")
{
    SweepConfig cfg = small_config();
    cfg.utilizations = {TimeValue::from_ratio(105, 100)};
    cfg.trials = 4;
    for (const SweepRow& r : run_sweep(cfg))
        CHECK(r.ratio() == 0.0);
}

TEST_CASE("verdicts are invariant under uniform time scaling")
{
    SweepConfig cfg = small_config();
    for (int trial = 0; trial < 8; ++trial) {
        TaskSet ts = sweep_taskset(cfg, 1, 0, trial);
        TaskSet scaled = ts;
        for (Task& t : scaled.mutable_tasks()) {
            t.wcet *= TimeValue(3);
            t.period *= TimeValue(3);
            t.deadline *= TimeValue(3);
        }
        scaled.set_restart({ts.restart().cost * TimeValue(3), std::nullopt});
        for (SweepScheme s : {SweepScheme::FP, SweepScheme::NP, SweepScheme::NPE_QC})
            CHECK(scheme_feasible(ts, s, cfg.ga) == scheme_feasible(scaled, s, cfg.ga));
    }
}

TEST_CASE("preemptive feasibility is non-increasing when C is scaled up")
{
    SweepConfig cfg = small_config();
    cfg.restart_cost = 0;
    for (int trial = 0; trial < 8; ++trial)
        for (std::size_t n = 0; n < cfg.task_counts.size(); ++n) {
            TaskSet base = sweep_taskset(cfg, 0, n, trial);
            base.set_restart({TimeValue(0), std::nullopt});
            bool prev = true;
            for (std::int64_t k = 1; k <= 30; ++k) {
                TaskSet scaled = base;
                bool valid = true;
                for (Task& t : scaled.mutable_tasks()) {
                    t.wcet *= TimeValue::from_ratio(k, 10);
                    valid = valid && t.wcet <= t.deadline;
                }
                if (!valid)
                    break;
                bool now = scheme_feasible(scaled, SweepScheme::FP, cfg.ga);
                CHECK((prev || !now));
                prev = now;
            }
        }
}

TEST_CASE("trial seeds and corpora")
{
    SweepConfig cfg = small_config();
    CHECK(trial_seed(cfg, 0, 0, 0) != trial_seed(cfg, 0, 0, 1));
    CHECK(trial_seed(cfg, 0, 0, 0) != trial_seed(cfg, 1, 0, 0));
    TaskSet a = sweep_taskset(cfg, 0, 1, 2);
    TaskSet b = sweep_taskset(cfg, 0, 1, 2);
    CHECK(taskset_to_json(a) == taskset_to_json(b));
    CHECK(a.size() == 5);
    CHECK(utilization(a) == cfg.utilizations[0]);
}

TEST_CASE("config parsing")
{
    nlohmann::json doc = nlohmann::json::parse(R"({
        "utilizations": ["0.25", 0.5], "task_counts": [4], "trials": 3, "periods": [20, 200],
        "Cr": "0.5", "schemes": ["fp", "npe-qc"], "seed": 9, "ga": {"population": 8, "generations": 4}
    })");
    SweepConfig cfg = SweepConfig::from_json(doc);
    CHECK(cfg.utilizations == std::vector<TimeValue>{TimeValue::from_ratio(1, 4), TimeValue::from_ratio(1, 2)});
    CHECK(cfg.task_counts == std::vector<int>{4});
    CHECK(cfg.trials == 3);
    CHECK(cfg.period_min == TimeValue(20));
    CHECK(cfg.period_max == TimeValue(200));
    CHECK(cfg.restart_cost == TimeValue::from_ratio(1, 2));
    CHECK(cfg.schemes == std::vector<SweepScheme>{SweepScheme::FP, SweepScheme::NPE_QC});
    CHECK(cfg.ga.population == 8);
    CHECK(cfg.ga.generations == 4);
    SweepConfig back = SweepConfig::from_json(cfg.to_json());
    CHECK(back.to_json() == cfg.to_json());

    CHECK_THROWS(SweepConfig::from_json(nlohmann::json::parse(R"({"utilizations": [], "task_counts": [3]})")));
    CHECK_THROWS(SweepConfig::from_json(nlohmann::json::parse(R"({"utilizations": [0.5], "task_counts": [0]})")));
}

TEST_CASE("csv layout")
{
    std::vector<SweepRow> rows{{TimeValue::from_ratio(1, 2), 5, SweepScheme::NPE, 10, 7}};
    std::istringstream in(sweep_csv(rows));
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    CHECK(header == "U,n,scheme,trials,feasible,ratio");
    CHECK(line.rfind("0.5,5,npe,10,7,0.7", 0) == 0);
}

TEST_CASE("small soundness campaign finds no disagreement")
{
    SweepConfig cfg;
    cfg.utilizations = {TimeValue::from_ratio(4, 10), TimeValue::from_ratio(6, 10)};
    cfg.task_counts = {3, 4};
    cfg.trials = 30;
    cfg.schemes = {SweepScheme::FP, SweepScheme::NP, SweepScheme::NPE, SweepScheme::PT};
    cfg.threads = 1;
    auto report = soundness_campaign(cfg);
    REQUIRE(report.size() == 4);
    for (const SchemeSoundness& s : report) {
        CHECK(s.sets == 30);
        CHECK(s.analysis_feasible + s.analysis_infeasible == 30);
        CHECK(s.disagreements.empty());
        CHECK(s.oracle_confirmed <= s.analysis_infeasible);
    }
    nlohmann::json doc = soundness_to_json(report);
    CHECK_FALSE(doc.is_null());
}

TEST_CASE("figure replays")
{
    CHECK(figure_names().size() == 5);
    for (const char* name : {"fig2", "fig3", "fig4", "fig5"}) {
        FigureReplay r = replay_figure(name);
        CHECK_MESSAGE(r.passed, name << ": " << r.outcome);
        CHECK(!r.trace.empty());
        CHECK(!r.diagram.empty());
    }
    FigureReplay six = replay_figure("fig6");
    CHECK(!six.outcome.empty());
    SimOptions retained;
    retained.pt_reexecution = PtReexecution::Retained;
    CHECK(replay_figure("fig6", retained).passed);
    CHECK_THROWS(replay_figure("fig9"));
}
