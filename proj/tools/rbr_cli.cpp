#include "rbr/experiments.hpp"
#include "rbr/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace rbr;

namespace {

TaskSet load_with_cr(const std::string& path, const std::string& cr)
{
    TaskSet ts = load_taskset(path);
    if (!cr.empty()) {
        RestartModel r = ts.restart();
        r.cost = TimeValue::parse(cr);
        ts.set_restart(r);
    }
    return ts;
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << text;
}

void print_violations(const std::vector<Violation>& vs)
{
    for (const Violation& v : vs)
        std::cerr << "invalid: " << (v.task_id.empty() ? "" : v.task_id + ": ") << v.message << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Restart-based recovery schedulability analysis and simulation"};
    app.require_subcommand(1);

    std::string file, scheme_name = "fp", cr, out_path, config_path;

    auto* analyze = app.add_subcommand("analyze", "Response-time analysis and RBR-feasibility verdict");
    analyze->add_option("taskset", file, "Task-set file")->required()->check(CLI::ExistingFile);
    analyze->add_option("--scheme", scheme_name, "fp, np, npe or pt");
    analyze->add_option("--cr", cr, "Override the restart cost");
    bool finish_only = false;
    analyze->add_flag("--pt-finish-only", finish_only, "Charge threshold overhead after start in the finish recurrence");

    auto* optq = app.add_subcommand("optimize-q", "Optimal non-preemptive ending lengths");
    optq->add_option("taskset", file, "Task-set file")->required()->check(CLI::ExistingFile);
    optq->add_option("--cr", cr, "Override the restart cost");
    optq->add_option("--out", out_path, "Write the task set with Q values here");

    GaParams ga;
    auto* gat = app.add_subcommand("ga-thresholds", "Genetic preemption-threshold assignment");
    gat->add_option("taskset", file, "Task-set file")->required()->check(CLI::ExistingFile);
    gat->add_option("--cr", cr, "Override the restart cost");
    gat->add_option("--seed", ga.seed);
    gat->add_option("--population", ga.population);
    gat->add_option("--generations", ga.generations);
    gat->add_option("--mutation", ga.mutation_rate);
    gat->add_option("--crossover", ga.crossover_rate);
    gat->add_option("--elitism", ga.elitism);
    gat->add_option("--stall", ga.stall_generations, "stop after this many generations without improvement (0 disables)");
    gat->add_option("--out", out_path, "Write the task set with thresholds here");

    std::string restart_at, restart_before, horizon;
    int before_event = 0;
    bool diagram = false, no_a9 = false, retained = false;
    std::vector<std::string> failures;
    auto* sim = app.add_subcommand("simulate", "Discrete-event simulation with an optional restart");
    sim->add_option("taskset", file, "Task-set file")->required()->check(CLI::ExistingFile);
    sim->add_option("--scheme", scheme_name, "fp, np, npe or pt");
    sim->add_option("--cr", cr, "Override the restart cost");
    auto* o_at = sim->add_option("--restart-at", restart_at, "Restart exactly at T");
    auto* o_before = sim->add_option("--restart-before", restart_before, "Restart eps before T");
    auto* o_event = sim->add_option("--restart-before-event", before_event,
                                    "Restart eps before the K-th completion of the restart-free run");
    o_at->excludes(o_before)->excludes(o_event);
    o_before->excludes(o_event);
    sim->add_option("--horizon", horizon, "Simulated time (default phi_max + 2 hyperperiods)");
    sim->add_option("--fail", failures, "Silent failure TASK@TIME under the watchdog (repeatable)");
    sim->add_flag("--diagram", diagram, "Print a schedule diagram instead of the trace");
    sim->add_flag("--no-a9", no_a9, "Do not enforce restart separation");
    sim->add_flag("--pt-retained", retained, "Re-executed threshold jobs keep their raised priority");

    auto* adv = app.add_subcommand("adversarial", "Search for a single restart that causes a critical miss");
    adv->add_option("taskset", file, "Task-set file")->required()->check(CLI::ExistingFile);
    adv->add_option("--scheme", scheme_name, "fp, np, npe or pt");
    adv->add_option("--cr", cr, "Override the restart cost");

    std::string manifest_path;
    auto* sweep = app.add_subcommand("sweep", "Feasibility-ratio sweep");
    sweep->add_option("--config", config_path, "Sweep configuration")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", out_path, "CSV output (default stdout)");
    sweep->add_option("--manifest", manifest_path, "Manifest output (default <out>.manifest.json)");

    auto* sound = app.add_subcommand("soundness", "Analysis-versus-oracle campaign");
    sound->add_option("--config", config_path, "Campaign configuration")->required()->check(CLI::ExistingFile);
    sound->add_option("--out", out_path, "JSON report output (default stdout)");
    sound->add_flag("--pt-retained", retained, "Re-executed threshold jobs keep their raised priority");

    std::string figure = "all";
    auto* replay = app.add_subcommand("replay-figure", "Replay the worked example scenarios");
    replay->add_option("name", figure, "fig2..fig6 or all");
    replay->add_flag("--diagram", diagram, "Print the schedule diagram");

    GenSpec gen;
    std::string gen_u = "0.5", gen_pmin = "10", gen_pmax = "1000", gen_cr = "0";
    int gen_count = 1;
    bool gen_uniform = false;
    auto* generate = app.add_subcommand("generate", "Random task sets");
    generate->add_option("--n", gen.n);
    generate->add_option("--U", gen_u);
    generate->add_option("--pmin", gen_pmin);
    generate->add_option("--pmax", gen_pmax);
    generate->add_option("--seed", gen.seed);
    generate->add_option("--critical-fraction", gen.critical_fraction);
    generate->add_option("--resolution", gen.period_resolution, "Period grid 1/resolution");
    generate->add_option("--cr", gen_cr);
    generate->add_flag("--uniform-periods", gen_uniform);
    generate->add_flag("--integer-wcet", gen.integer_wcet);
    generate->add_option("--count", gen_count, "Batch size; >1 writes files to --dir");
    std::string gen_dir = "tasksets";
    generate->add_option("--dir", gen_dir);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) {
            TaskSet ts = load_with_cr(file, cr);
            SchemeConfig sc{parse_discipline(scheme_name)};
            AnalysisOptions opts;
            if (finish_only)
                opts.pt_after_start = PtAfterStartCharge::FinishOnly;
            auto violations = validate_taskset(ts, sc);
            if (!violations.empty()) {
                print_violations(violations);
                return 2;
            }
            AnalysisReport report = rbr_feasible(ts, sc, opts);
            std::cout << report_to_json(report).dump(2) << '\n';
            return report.feasible ? 0 : 1;
        }
        if (*optq) {
            TaskSet ts = load_with_cr(file, cr);
            QAssignment qa = optimal_q_assignment(ts);
            nlohmann::json out = {{"found", qa.found}};
            nlohmann::json betas = nlohmann::json::array();
            for (const BlockingTolerance& b : qa.tolerances)
                betas.push_back({{"id", b.task_id}, {"beta", b.beta.to_string()}, {"resolvable", b.resolvable}});
            out["tolerances"] = betas;
            if (qa.found) {
                TaskSet with = with_q(ts, qa.q);
                nlohmann::json q = nlohmann::json::array();
                for (const Task& t : with.tasks())
                    q.push_back({{"id", t.id}, {"Q", t.q_end->to_string()}});
                out["Q"] = q;
                out["feasible"] = rbr_feasible(with, {Discipline::NonPreemptiveEnding}).feasible;
                if (!out_path.empty())
                    save_taskset(with, out_path);
            } else {
                out["failed_task"] = *qa.failed_task;
            }
            std::cout << out.dump(2) << '\n';
            return qa.found ? 0 : 1;
        }
        if (*gat) {
            TaskSet ts = load_with_cr(file, cr);
            ThresholdAssignment ta = ga_threshold_assignment(ts, ga);
            nlohmann::json lam = nlohmann::json::array();
            for (std::size_t i = 0; i < ts.size(); ++i)
                lam.push_back({{"id", ts[i].id}, {"priority", ts[i].priority}, {"lambda", ta.thresholds[i]}});
            std::cout << nlohmann::json{{"feasible", ta.feasible},
                                        {"feasible_tasks", ta.feasible_tasks},
                                        {"normalized_slack", ta.normalized_slack},
                                        {"generations", ta.generations_run},
                                        {"thresholds", lam}}
                             .dump(2)
                      << '\n';
            if (!out_path.empty())
                save_taskset(with_thresholds(ts, ta.thresholds), out_path);
            return ta.feasible ? 0 : 1;
        }
        if (*sim) {
            TaskSet ts = load_with_cr(file, cr);
            SchemeConfig sc{parse_discipline(scheme_name)};
            SimOptions opts;
            opts.enforce_a9 = !no_a9;
            if (retained)
                opts.pt_reexecution = PtReexecution::Retained;
            std::optional<TimeValue> h;
            if (!horizon.empty())
                h = TimeValue::parse(horizon);
            SimResult r;
            if (!failures.empty()) {
                std::vector<SilentFailure> fs;
                for (const std::string& f : failures) {
                    auto at = f.find('@');
                    if (at == std::string::npos)
                        throw std::invalid_argument("--fail expects TASK@TIME, got " + f);
                    fs.push_back({TimeValue::parse(f.substr(at + 1)), f.substr(0, at)});
                }
                r = simulate_with_watchdog(ts, sc, fs, h, opts);
            } else {
                RestartSchedule schedule;
                if (!restart_at.empty())
                    schedule.points.push_back({TimeValue::parse(restart_at), Side::At});
                if (!restart_before.empty())
                    schedule.points.push_back({TimeValue::parse(restart_before), Side::Before});
                if (before_event > 0)
                    schedule.points.push_back(restart_before_completion(ts, sc, before_event, h, opts));
                r = simulate(ts, sc, schedule, h, opts);
            }
            std::cout << (diagram ? render_diagram(ts, r) : trace_to_text(r));
            for (const MissRecord& m : r.misses)
                std::cout << "# miss " << m.task << " job " << m.job << " deadline " << m.deadline.to_string()
                          << (m.critical ? "" : " (non-critical)") << '\n';
            return r.critical_miss ? 1 : 0;
        }
        if (*adv) {
            TaskSet ts = load_with_cr(file, cr);
            SchemeConfig sc{parse_discipline(scheme_name)};
            AdversarialResult a = adversarial_restart_search(ts, sc);
            nlohmann::json out = {{"miss_found", a.miss_found},
                                  {"restart_free_miss", a.restart_free_miss},
                                  {"candidates", a.candidates}};
            if (a.restart)
                out["restart"] = format_instant(a.restart->instant, a.restart->side);
            if (a.miss)
                out["miss"] = {{"task", a.miss->task}, {"job", a.miss->job}, {"deadline", a.miss->deadline.to_string()}};
            std::cout << out.dump(2) << '\n';
            return a.miss_found || a.restart_free_miss ? 1 : 0;
        }
        if (*sweep) {
            SweepConfig cfg = load_sweep_config(config_path);
            std::string csv = sweep_csv(run_sweep(cfg));
            std::string manifest = sweep_manifest(cfg).dump(2) + "\n";
            if (out_path.empty()) {
                std::cout << csv;
            } else {
                write_text(out_path, csv);
                write_text(manifest_path.empty() ? out_path + ".manifest.json" : manifest_path, manifest);
            }
            return 0;
        }
        if (*sound) {
            SweepConfig cfg = load_sweep_config(config_path);
            SimOptions opts;
            if (retained)
                opts.pt_reexecution = PtReexecution::Retained;
            auto report = soundness_campaign(cfg, opts);
            std::string text = soundness_to_json(report).dump(2) + "\n";
            if (out_path.empty())
                std::cout << text;
            else
                write_text(out_path, text);
            int disagreements = 0;
            for (const auto& s : report)
                disagreements += static_cast<int>(s.disagreements.size());
            return disagreements == 0 ? 0 : 1;
        }
        if (*replay) {
            std::vector<std::string> names = figure == "all" ? figure_names() : std::vector<std::string>{figure};
            bool all_ok = true;
            for (const std::string& n : names) {
                FigureReplay r = replay_figure(n);
                std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": expected " << r.expectation << "; got "
                          << r.outcome << '\n';
                if (diagram)
                    std::cout << r.diagram << '\n';
                all_ok = all_ok && r.passed;
            }
            return all_ok ? 0 : 1;
        }
        if (*generate) {
            gen.utilization = TimeValue::parse(gen_u);
            gen.period_min = TimeValue::parse(gen_pmin);
            gen.period_max = TimeValue::parse(gen_pmax);
            gen.restart_cost = TimeValue::parse(gen_cr);
            if (gen_uniform)
                gen.period_distribution = PeriodDistribution::Uniform;
            if (gen_count > 1) {
                generate_batch(gen, gen_count, gen_dir);
                std::cout << "wrote " << gen_count << " task sets to " << gen_dir << '\n';
            } else {
                std::cout << taskset_to_json(generate_taskset(gen)).dump(2) << '\n';
            }
            return 0;
        }
    } catch (const InvalidTaskSetError& e) {
        print_violations(e.violations());
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
