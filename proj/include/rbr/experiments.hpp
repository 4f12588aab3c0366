#pragma once

#include "rbr/generator.hpp"
#include "rbr/optimize.hpp"
#include "rbr/simulate.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rbr {

/// Scheme evaluated by the sweep. The degenerate variants fix Q = C or
/// lambda = max priority instead of synthesizing parameters.
enum class SweepScheme { FP, NP, NPE, PT, NPE_QC, PT_MAX };

std::string_view to_string(SweepScheme s);
SweepScheme parse_sweep_scheme(std::string_view name);
Discipline discipline_of(SweepScheme s);

struct SweepConfig {
    std::vector<TimeValue> utilizations;
    std::vector<int> task_counts;
    int trials = 100;
    TimeValue period_min = 10;
    TimeValue period_max = 1000;
    std::int64_t period_resolution = 100;
    std::vector<TimeValue> period_choices;
    bool integer_wcet = false;
    double critical_fraction = 1.0;
    TimeValue restart_cost;
    std::vector<SweepScheme> schemes{SweepScheme::FP, SweepScheme::NP, SweepScheme::NPE, SweepScheme::PT};
    std::uint64_t seed = 1;
    GaParams ga{32, 50, 0.1, 0.8, 1, 2};
    /// Worker threads; 0 reads RBR_THREADS, then the hardware concurrency.
    int threads = 0;

    // soundness campaign only
    std::vector<TimeValue> restart_cost_choices{TimeValue(0), TimeValue(1), TimeValue(2)};
    bool random_phases = true;
    bool record_pessimism = true;

    void validate() const;
    static SweepConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

SweepConfig load_sweep_config(const std::string& path);

int worker_count(int requested);

struct SweepRow {
    TimeValue utilization;
    int n = 0;
    SweepScheme scheme = SweepScheme::FP;
    int trials = 0;
    int feasible = 0;

    double ratio() const { return trials == 0 ? 0.0 : static_cast<double>(feasible) / trials; }
};

/// One corpus per (U, n, trial) shared by all schemes; NPE gets optimal Q
/// values, PT gets GA thresholds (a GA miss counts as infeasible). Rows follow
/// utilization, then task count, then scheme order.
std::vector<SweepRow> run_sweep(const SweepConfig& cfg);

/// Seed of trial `trial` at grid point (ui, ni).
std::uint64_t trial_seed(const SweepConfig& cfg, std::size_t ui, std::size_t ni, int trial);

/// Task set used for a sweep trial.
TaskSet sweep_taskset(const SweepConfig& cfg, std::size_t ui, std::size_t ni, int trial);

/// Evaluates one scheme on one task set with its parameter synthesis.
bool scheme_feasible(const TaskSet& ts, SweepScheme scheme, const GaParams& ga);

std::string sweep_csv(const std::vector<SweepRow>& rows);
nlohmann::json sweep_manifest(const SweepConfig& cfg);

struct Disagreement {
    std::uint64_t seed = 0;
    SweepScheme scheme = SweepScheme::FP;
    std::optional<RestartPoint> restart; // empty: miss without restart
    std::optional<MissRecord> miss;
    nlohmann::json taskset;
};

struct SchemeSoundness {
    SweepScheme scheme = SweepScheme::FP;
    int sets = 0;
    int analysis_feasible = 0;
    int analysis_infeasible = 0;
    int oracle_confirmed = 0; // infeasible sets where the oracle also finds a miss
    std::vector<Disagreement> disagreements;

    /// Share of analysis-infeasible sets the oracle could not break.
    double pessimism_ratio() const
    {
        return analysis_infeasible == 0 ? 0.0
                                        : static_cast<double>(analysis_infeasible - oracle_confirmed) /
                                              analysis_infeasible;
    }
};

/// Task set of soundness trial `trial` for a scheme: integer parameters, a
/// random restart cost from the choices, random phases on odd trials when
/// enabled, random integer Q in [1, C_i] or random lambda in [pi_i, max].
TaskSet soundness_taskset(const SweepConfig& cfg, SweepScheme scheme, int trial);

/// Runs the adversarial restart search on every set of the corpus. Any miss
/// on an analysis-feasible set is a disagreement.
std::vector<SchemeSoundness> soundness_campaign(const SweepConfig& cfg, const SimOptions& sim = {});

nlohmann::json soundness_to_json(const std::vector<SchemeSoundness>& report);

struct FigureReplay {
    std::string name;
    std::string expectation;
    std::string outcome;
    bool passed = false;
    std::string trace;
    std::string diagram;
};

/// The three-task example {(1,3), (2,8), (4,22)} with C_r = 0.
TaskSet figure_taskset();

/// fig2..fig6: runs the scenario and checks the expected outcome.
FigureReplay replay_figure(const std::string& name, const SimOptions& opts = {});

const std::vector<std::string>& figure_names();

} // namespace rbr
