#include "rbr/experiments.hpp"
#include "rbr/io.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace rbr {

using nlohmann::json;

std::string_view to_string(SweepScheme s)
{
    switch (s) {
    case SweepScheme::FP: return "fp";
    case SweepScheme::NP: return "np";
    case SweepScheme::NPE: return "npe";
    case SweepScheme::PT: return "pt";
    case SweepScheme::NPE_QC: return "npe-qc";
    case SweepScheme::PT_MAX: return "pt-max";
    }
    return "?";
}

SweepScheme parse_sweep_scheme(std::string_view name)
{
    for (SweepScheme s : {SweepScheme::FP, SweepScheme::NP, SweepScheme::NPE, SweepScheme::PT, SweepScheme::NPE_QC,
                          SweepScheme::PT_MAX})
        if (to_string(s) == name)
            return s;
    throw std::invalid_argument("unknown scheme '" + std::string(name) + "' (fp, np, npe, pt, npe-qc, pt-max)");
}

Discipline discipline_of(SweepScheme s)
{
    switch (s) {
    case SweepScheme::FP: return Discipline::FullyPreemptive;
    case SweepScheme::NP: return Discipline::FullyNonPreemptive;
    case SweepScheme::NPE:
    case SweepScheme::NPE_QC: return Discipline::NonPreemptiveEnding;
    case SweepScheme::PT:
    case SweepScheme::PT_MAX: return Discipline::PreemptionThreshold;
    }
    return Discipline::FullyPreemptive;
}

void SweepConfig::validate() const
{
    if (trials < 1)
        throw std::invalid_argument("trials must be at least 1");
    if (utilizations.empty() || task_counts.empty() || schemes.empty())
        throw std::invalid_argument("utilization grid, task-count grid and scheme list must be non-empty");
    for (int n : task_counts)
        if (n < 1)
            throw std::invalid_argument("task counts must be positive");
    for (const TimeValue& u : utilizations)
        if (u <= TimeValue(0))
            throw std::invalid_argument("utilizations must be positive");
    if (period_choices.empty() && (period_min <= TimeValue(0) || period_min > period_max))
        throw std::invalid_argument("period range must satisfy 0 < P_min <= P_max");
    if (restart_cost_choices.empty())
        throw std::invalid_argument("restart cost choices must be non-empty");
    ga.validate();
}

SweepConfig SweepConfig::from_json(const json& doc)
{
    SweepConfig cfg;
    if (doc.contains("utilizations")) {
        cfg.utilizations.clear();
        for (const json& u : doc["utilizations"])
            cfg.utilizations.push_back(parse_time(u));
    }
    if (doc.contains("task_counts"))
        cfg.task_counts = doc["task_counts"].get<std::vector<int>>();
    cfg.trials = doc.value("trials", cfg.trials);
    if (doc.contains("periods")) {
        const json& p = doc["periods"];
        if (!p.is_array() || p.size() != 2)
            throw std::invalid_argument("'periods' must be [P_min, P_max]");
        cfg.period_min = parse_time(p[0]);
        cfg.period_max = parse_time(p[1]);
    }
    cfg.period_resolution = doc.value("period_resolution", cfg.period_resolution);
    if (doc.contains("period_choices"))
        for (const json& p : doc["period_choices"])
            cfg.period_choices.push_back(parse_time(p));
    cfg.integer_wcet = doc.value("integer_wcet", cfg.integer_wcet);
    cfg.critical_fraction = doc.value("critical_fraction", cfg.critical_fraction);
    if (doc.contains("Cr"))
        cfg.restart_cost = parse_time(doc["Cr"]);
    if (doc.contains("schemes")) {
        cfg.schemes.clear();
        for (const json& s : doc["schemes"])
            cfg.schemes.push_back(parse_sweep_scheme(s.get<std::string>()));
    }
    cfg.seed = doc.value("seed", cfg.seed);
    if (doc.contains("ga")) {
        const json& g = doc["ga"];
        cfg.ga.population = g.value("population", cfg.ga.population);
        cfg.ga.generations = g.value("generations", cfg.ga.generations);
        cfg.ga.mutation_rate = g.value("mutation", cfg.ga.mutation_rate);
        cfg.ga.crossover_rate = g.value("crossover", cfg.ga.crossover_rate);
        cfg.ga.elitism = g.value("elitism", cfg.ga.elitism);
        cfg.ga.stall_generations = g.value("stall", cfg.ga.stall_generations);
    }
    cfg.threads = doc.value("threads", cfg.threads);
    if (doc.contains("Cr_choices")) {
        cfg.restart_cost_choices.clear();
        for (const json& c : doc["Cr_choices"])
            cfg.restart_cost_choices.push_back(parse_time(c));
    }
    cfg.random_phases = doc.value("random_phases", cfg.random_phases);
    cfg.record_pessimism = doc.value("record_pessimism", cfg.record_pessimism);
    cfg.validate();
    return cfg;
}

json SweepConfig::to_json() const
{
    auto times = [](const std::vector<TimeValue>& v) {
        json a = json::array();
        for (const TimeValue& t : v)
            a.push_back(t.to_string());
        return a;
    };
    json schemes_json = json::array();
    for (SweepScheme s : schemes)
        schemes_json.push_back(std::string(to_string(s)));
    return {{"utilizations", times(utilizations)},
            {"task_counts", task_counts},
            {"trials", trials},
            {"periods", {period_min.to_string(), period_max.to_string()}},
            {"period_resolution", period_resolution},
            {"period_choices", times(period_choices)},
            {"integer_wcet", integer_wcet},
            {"critical_fraction", critical_fraction},
            {"Cr", restart_cost.to_string()},
            {"schemes", schemes_json},
            {"seed", seed},
            {"ga",
             {{"population", ga.population},
              {"generations", ga.generations},
              {"mutation", ga.mutation_rate},
              {"crossover", ga.crossover_rate},
              {"elitism", ga.elitism},
              {"stall", ga.stall_generations}}},
            {"threads", threads},
            {"Cr_choices", times(restart_cost_choices)},
            {"random_phases", random_phases},
            {"record_pessimism", record_pessimism}};
}

SweepConfig load_sweep_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config " + path);
    return SweepConfig::from_json(json::parse(in));
}

int worker_count(int requested)
{
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("RBR_THREADS")) {
        int v = std::atoi(env);
        if (v > 0)
            return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

// Runs body(k) for k in [0, count) on `workers` threads; the first exception is rethrown.
template <class F>
void parallel_for(int count, int workers, F body)
{
    workers = std::max(1, std::min(workers, count));
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&]() {
        for (int k = next++; k < count; k = next++) {
            try {
                body(k);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next = count;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);
}

GenSpec base_spec(const SweepConfig& cfg)
{
    GenSpec spec;
    spec.period_min = cfg.period_min;
    spec.period_max = cfg.period_max;
    spec.period_resolution = cfg.period_resolution;
    spec.period_choices = cfg.period_choices;
    spec.integer_wcet = cfg.integer_wcet;
    spec.critical_fraction = cfg.critical_fraction;
    spec.restart_cost = cfg.restart_cost;
    return spec;
}

const std::vector<TimeValue>& default_integer_periods()
{
    static const std::vector<TimeValue> periods{4, 5, 6, 8, 10, 12, 15, 20, 24, 30, 40, 60};
    return periods;
}

} // namespace

std::uint64_t trial_seed(const SweepConfig& cfg, std::size_t ui, std::size_t ni, int trial)
{
    std::uint64_t point = ui * cfg.task_counts.size() + ni;
    return derive_seed(cfg.seed, point, static_cast<std::uint64_t>(trial));
}

TaskSet sweep_taskset(const SweepConfig& cfg, std::size_t ui, std::size_t ni, int trial)
{
    GenSpec spec = base_spec(cfg);
    spec.n = cfg.task_counts[ni];
    spec.utilization = cfg.utilizations[ui];
    spec.seed = trial_seed(cfg, ui, ni, trial);
    return generate_taskset(spec);
}

bool scheme_feasible(const TaskSet& ts, SweepScheme scheme, const GaParams& ga)
{
    switch (scheme) {
    case SweepScheme::FP:
    case SweepScheme::NP:
        return rbr_feasible(ts, {discipline_of(scheme)}).feasible;
    case SweepScheme::NPE: {
        QAssignment qa = optimal_q_assignment(ts);
        return qa.found && rbr_feasible(with_q(ts, qa.q), {Discipline::NonPreemptiveEnding}).feasible;
    }
    case SweepScheme::NPE_QC: {
        std::vector<TimeValue> q;
        for (const Task& t : ts.tasks())
            q.push_back(t.wcet);
        return rbr_feasible(with_q(ts, q), {Discipline::NonPreemptiveEnding}).feasible;
    }
    case SweepScheme::PT:
        return ga_threshold_assignment(ts, ga).feasible;
    case SweepScheme::PT_MAX: {
        std::vector<int> lambda(ts.size(), ts.max_priority());
        return rbr_feasible(with_thresholds(ts, lambda), {Discipline::PreemptionThreshold}).feasible;
    }
    }
    return false;
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg)
{
    cfg.validate();
    const std::size_t nu = cfg.utilizations.size();
    const std::size_t nn = cfg.task_counts.size();
    const std::size_t ns = cfg.schemes.size();
    const int trials = cfg.trials;
    // verdict[((point * trials) + trial) * ns + scheme]
    std::vector<char> verdict(nu * nn * static_cast<std::size_t>(trials) * ns, 0);

    const int total = static_cast<int>(nu * nn) * trials;
    parallel_for(total, worker_count(cfg.threads), [&](int job) {
        const std::size_t point = static_cast<std::size_t>(job / trials);
        const int trial = job % trials;
        const std::size_t ui = point / nn;
        const std::size_t ni = point % nn;
        try {
            TaskSet ts = sweep_taskset(cfg, ui, ni, trial);
            GaParams ga = cfg.ga;
            ga.seed = derive_seed(trial_seed(cfg, ui, ni, trial), 0x6761);
            for (std::size_t s = 0; s < ns; ++s)
                verdict[static_cast<std::size_t>(job) * ns + s] = scheme_feasible(ts, cfg.schemes[s], ga) ? 1 : 0;
        } catch (const std::exception& e) {
            throw std::runtime_error("trial failed (U=" + cfg.utilizations[ui].to_string() +
                                     ", n=" + std::to_string(cfg.task_counts[ni]) +
                                     ", seed=" + std::to_string(trial_seed(cfg, ui, ni, trial)) + "): " + e.what());
        }
    });

    std::vector<SweepRow> rows;
    for (std::size_t ui = 0; ui < nu; ++ui)
        for (std::size_t ni = 0; ni < nn; ++ni)
            for (std::size_t s = 0; s < ns; ++s) {
                SweepRow row{cfg.utilizations[ui], cfg.task_counts[ni], cfg.schemes[s], trials, 0};
                std::size_t point = ui * nn + ni;
                for (int t = 0; t < trials; ++t)
                    row.feasible += verdict[(point * static_cast<std::size_t>(trials) + static_cast<std::size_t>(t)) * ns + s];
                rows.push_back(row);
            }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows)
{
    std::ostringstream out;
    out << "U,n,scheme,trials,feasible,ratio\n";
    for (const SweepRow& r : rows) {
        char ratio[32];
        std::snprintf(ratio, sizeof ratio, "%.4f", r.ratio());
        out << r.utilization.to_string() << ',' << r.n << ',' << to_string(r.scheme) << ',' << r.trials << ','
            << r.feasible << ',' << ratio << '\n';
    }
    return out.str();
}

json sweep_manifest(const SweepConfig& cfg)
{
    json points = json::array();
    for (std::size_t ui = 0; ui < cfg.utilizations.size(); ++ui)
        for (std::size_t ni = 0; ni < cfg.task_counts.size(); ++ni)
            points.push_back({{"U", cfg.utilizations[ui].to_string()},
                              {"n", cfg.task_counts[ni]},
                              {"first_seed", trial_seed(cfg, ui, ni, 0)}});
    return {{"config", cfg.to_json()},
            {"seed_rule", "splitmix64(master, point, trial)"},
            {"threads", worker_count(cfg.threads)},
            {"points", points}};
}

TaskSet soundness_taskset(const SweepConfig& cfg, SweepScheme scheme, int trial)
{
    const std::uint64_t seed = derive_seed(cfg.seed, 0x50 + static_cast<std::uint64_t>(scheme),
                                           static_cast<std::uint64_t>(trial));
    std::mt19937_64 rng(seed);
    GenSpec spec = base_spec(cfg);
    spec.period_choices = cfg.period_choices.empty() ? default_integer_periods() : cfg.period_choices;
    spec.integer_wcet = true;
    spec.n = cfg.task_counts[static_cast<std::size_t>(trial) % cfg.task_counts.size()];
    spec.utilization = cfg.utilizations[(static_cast<std::size_t>(trial) / cfg.task_counts.size()) %
                                        cfg.utilizations.size()];
    spec.restart_cost = cfg.restart_cost_choices[rng() % cfg.restart_cost_choices.size()];
    spec.seed = rng();
    TaskSet ts = generate_taskset(spec);

    for (Task& t : ts.mutable_tasks()) {
        if (cfg.random_phases && trial % 2 == 1)
            t.phase = TimeValue(static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(t.period.floor_div(1))));
        std::int64_t c = t.wcet.floor_div(1);
        if (discipline_of(scheme) == Discipline::NonPreemptiveEnding)
            t.q_end = scheme == SweepScheme::NPE_QC ? t.wcet
                                                    : TimeValue(1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(c)));
        if (discipline_of(scheme) == Discipline::PreemptionThreshold) {
            int top = ts.max_priority();
            t.threshold = scheme == SweepScheme::PT_MAX
                              ? top
                              : t.priority + static_cast<int>(rng() % static_cast<std::uint64_t>(top - t.priority + 1));
        }
    }
    return ts;
}

std::vector<SchemeSoundness> soundness_campaign(const SweepConfig& cfg, const SimOptions& sim)
{
    cfg.validate();
    std::vector<SchemeSoundness> report;
    std::mutex mutex;
    for (SweepScheme scheme : cfg.schemes) {
        SchemeSoundness s;
        s.scheme = scheme;
        s.sets = cfg.trials;
        parallel_for(cfg.trials, worker_count(cfg.threads), [&](int trial) {
            TaskSet ts = soundness_taskset(cfg, scheme, trial);
            const SchemeConfig sc{discipline_of(scheme)};
            bool feasible = rbr_feasible(ts, sc).feasible;
            if (!feasible && !cfg.record_pessimism) {
                std::lock_guard lock(mutex);
                ++s.analysis_infeasible;
                return;
            }
            AdversarialResult oracle = adversarial_restart_search(ts, sc, std::nullopt, sim);
            bool broken = oracle.miss_found || oracle.restart_free_miss;
            std::lock_guard lock(mutex);
            if (feasible) {
                ++s.analysis_feasible;
                if (broken) {
                    Disagreement d;
                    d.seed = static_cast<std::uint64_t>(trial);
                    d.scheme = scheme;
                    d.restart = oracle.restart_free_miss ? std::nullopt : oracle.restart;
                    d.miss = oracle.miss;
                    d.taskset = taskset_to_json(ts);
                    s.disagreements.push_back(std::move(d));
                }
            } else {
                ++s.analysis_infeasible;
                if (broken)
                    ++s.oracle_confirmed;
            }
        });
        std::sort(s.disagreements.begin(), s.disagreements.end(),
                  [](const Disagreement& a, const Disagreement& b) { return a.seed < b.seed; });
        report.push_back(std::move(s));
    }
    return report;
}

json soundness_to_json(const std::vector<SchemeSoundness>& report)
{
    json out = json::array();
    for (const SchemeSoundness& s : report) {
        json dis = json::array();
        for (const Disagreement& d : s.disagreements) {
            json row = {{"trial", d.seed}, {"taskset", d.taskset}};
            row["restart"] = d.restart ? json(format_instant(d.restart->instant, d.restart->side)) : json(nullptr);
            if (d.miss)
                row["miss"] = {{"task", d.miss->task}, {"job", d.miss->job}, {"deadline", d.miss->deadline.to_string()}};
            dis.push_back(std::move(row));
        }
        out.push_back({{"scheme", std::string(to_string(s.scheme))},
                       {"sets", s.sets},
                       {"analysis_feasible", s.analysis_feasible},
                       {"analysis_infeasible", s.analysis_infeasible},
                       {"oracle_confirmed", s.oracle_confirmed},
                       {"pessimism_ratio", s.pessimism_ratio()},
                       {"disagreements", dis}});
    }
    return out;
}

TaskSet figure_taskset()
{
    return TaskSet({Task::make("tau1", 1, 3, 3), Task::make("tau2", 2, 8, 2), Task::make("tau3", 4, 22, 1)},
                   RestartModel{TimeValue(0), std::nullopt});
}

const std::vector<std::string>& figure_names()
{
    static const std::vector<std::string> names{"fig2", "fig3", "fig4", "fig5", "fig6"};
    return names;
}

FigureReplay replay_figure(const std::string& name, const SimOptions& opts)
{
    TaskSet ts = figure_taskset();
    SchemeConfig scheme;
    TimeValue restart_at;
    std::optional<TimeValue> miss_at; // expected first critical miss, if any
    bool expect_miss = false;

    if (name == "fig2") {
        scheme.discipline = Discipline::FullyPreemptive;
        restart_at = 10;
        expect_miss = true;
        miss_at = TimeValue(22);
    } else if (name == "fig3") {
        scheme.discipline = Discipline::FullyNonPreemptive;
        restart_at = 5;
        expect_miss = true;
        miss_at = TimeValue(9);
    } else if (name == "fig4" || name == "fig5") {
        scheme.discipline = Discipline::NonPreemptiveEnding;
        ts = with_q(ts, {TimeValue(1), TimeValue(1), TimeValue(1)});
        restart_at = name == "fig4" ? 7 : 9;
    } else if (name == "fig6") {
        scheme.discipline = Discipline::PreemptionThreshold;
        ts = with_thresholds(ts, {3, 3, 2});
        restart_at = 9;
        expect_miss = true;
    } else {
        throw std::invalid_argument("unknown figure '" + name + "' (fig2..fig6)");
    }

    SimOptions o = opts;
    o.record_trace = true;
    o.stop_on_critical_miss = false;
    SimResult r = simulate(ts, scheme, {{RestartPoint{restart_at, Side::Before}}}, TimeValue(44), o);

    FigureReplay out;
    out.name = name;
    out.trace = trace_to_text(r);
    out.diagram = render_diagram(ts, r, TimeValue(30));
    out.expectation = std::string(to_string(scheme.discipline)) + ", restart at " +
                      format_instant(restart_at, Side::Before) + ": " +
                      (expect_miss ? (miss_at ? "deadline miss at t = " + miss_at->to_string() : "a deadline miss")
                                   : "no deadline miss");
    std::optional<MissRecord> first;
    for (const MissRecord& m : r.misses)
        if (m.critical && (!first || m.deadline < first->deadline))
            first = m;
    if (first)
        out.outcome = "first miss: " + first->task + " job " + std::to_string(first->job) + " at t = " +
                      first->deadline.to_string();
    else
        out.outcome = "no deadline miss";
    out.passed = expect_miss ? (first && (!miss_at || first->deadline == *miss_at)) : !first;
    return out;
}

} // namespace rbr
