#pragma once

#include "rbr/rta.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rbr {

struct BlockingTolerance {
    std::string task_id;
    TimeValue beta;
    bool resolvable = false; // false: the task misses even with zero blocking
};

struct BlockingSearchOptions {
    /// Termination width of the bisection; default T_i * 2^-30.
    std::optional<TimeValue> epsilon;
    AnalysisOptions analysis;
};

/// Largest blocking the task at index i tolerates under non-preemptive endings,
/// by bisection on [0, T_i]. Needs Q on tasks 0..i; lower-priority Q is ignored.
/// The returned beta is the last probe proven feasible, snapped up to
/// lo + (D_i - R_i(lo)) when that point is also feasible (then it is exact).
BlockingTolerance blocking_tolerance(const TaskSet& ts, std::size_t i, const BlockingSearchOptions& opts = {});

struct QAssignment {
    bool found = false;
    std::vector<TimeValue> q;                 // priority order; empty when !found
    std::vector<BlockingTolerance> tolerances;
    std::optional<std::string> failed_task;
};

/// Q_1 = C_1, then Q_i = min(min_{j in hp(i)} beta_j, C_i) in decreasing priority,
/// each beta_j computed once with the already-fixed Q_1..Q_j.
QAssignment optimal_q_assignment(const TaskSet& ts, const BlockingSearchOptions& opts = {});

/// Copy of ts with the given Q values (priority order).
TaskSet with_q(const TaskSet& ts, const std::vector<TimeValue>& q);

struct GaParams {
    int population = 32;
    int generations = 100;
    double mutation_rate = 0.1;
    double crossover_rate = 0.8;
    std::uint64_t seed = 1;
    int elitism = 2;
    /// Stop after this many generations without a better best genome; 0 disables.
    int stall_generations = 10;

    void validate() const;
};

struct ThresholdAssignment {
    std::vector<int> thresholds; // priority values, priority order
    bool feasible = false;
    int feasible_tasks = 0;
    double normalized_slack = 0.0;
    int generations_run = 0;
};

/// Genetic search over lambda_i in [pi_i, max priority]. The initial
/// population holds lambda = pi and lambda = max; stops early once a fully
/// RBR-feasible genome appears. Deterministic for a given seed.
ThresholdAssignment ga_threshold_assignment(const TaskSet& ts, const GaParams& params,
                                            const AnalysisOptions& opts = {});

/// Copy of ts with the given thresholds (priority values, priority order).
TaskSet with_thresholds(const TaskSet& ts, const std::vector<int>& thresholds);

} // namespace rbr
