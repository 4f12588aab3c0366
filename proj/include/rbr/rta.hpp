#pragma once

#include "rbr/model.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rbr {

class InvalidTaskSetError : public std::invalid_argument {
public:
    explicit InvalidTaskSetError(const std::vector<Violation>& violations);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Where the restart overhead of a threshold-scheduled job that has already
/// started is charged.
enum class PtAfterStartCharge {
    /// The re-executed job is queued again at nominal priority, so the wasted
    /// work and C_r delay its start and every higher-priority release in that
    /// window interferes. Collapses to the non-preemptive test at lambda = max.
    Requeue,
    /// Overhead added to the finish-time recurrence, higher-priority jobs
    /// that cannot preempt the started job are not re-admitted.
    FinishOnly,
};

struct AnalysisOptions {
    /// Upper bound on the level-i active period; default is the hyperperiod
    /// plus the largest period (utilization bound when the hyperperiod overflows).
    std::optional<TimeValue> active_period_bound;
    /// Count the analyzed task's own later jobs in the active period.
    bool active_period_self_interference = true;
    /// Active periods holding more jobs of the task are reported as not
    /// converged (so the task counts as unschedulable).
    std::int64_t max_active_period_jobs = 100000;
    PtAfterStartCharge pt_after_start = PtAfterStartCharge::Requeue;
};

struct JobTiming {
    int k = 1;            // 1-based index inside the active period
    TimeValue start;      // S_{i,k}
    TimeValue finish;     // F_{i,k}
    TimeValue response;   // F_{i,k} - (k-1) T_i
};

/// Restart overhead terms of one task; fields not used by the scheme stay empty.
struct OverheadBreakdown {
    TimeValue overhead;                   // O^p, O^np, O^npe or max(O^{pt,s}, O^{pt,f})
    std::optional<TimeValue> pt_start;    // O^{pt,s}
    std::optional<TimeValue> pt_finish;   // O^{pt,f}
    std::optional<TimeValue> wcwe;
};

struct TaskAnalysis {
    std::string id;
    TimeValue response;          // R_i with restart overhead
    TimeValue ideal_response;    // R̂_i, all overheads forced to zero
    TimeValue blocking;          // B_i
    OverheadBreakdown breakdown;
    int jobs = 1;                // K_i
    bool converged = true;       // fixed points reached inside their bounds
    bool ideal_converged = true;
    bool schedulable = true;     // converged && R_i <= D_i
    bool ideal_schedulable = true;
    std::vector<JobTiming> job_timings;

    const TimeValue& overhead() const { return breakdown.overhead; }
};

struct AnalysisReport {
    Discipline discipline = Discipline::FullyPreemptive;
    std::vector<TaskAnalysis> tasks;
    bool feasible = true;
    std::optional<std::string> first_violation;
};

struct ActivePeriod {
    TimeValue length;
    int jobs = 1;
    bool converged = true;
};

AnalysisReport rta_preemptive(const TaskSet& ts, const AnalysisOptions& opts = {});
AnalysisReport rta_nonpreemptive(const TaskSet& ts, const AnalysisOptions& opts = {});
AnalysisReport rta_npe(const TaskSet& ts, const AnalysisOptions& opts = {});
AnalysisReport rta_pt(const TaskSet& ts, const AnalysisOptions& opts = {});

/// Dispatches on the scheme; feasible iff every R_i <= D_i and every R̂_i <= D_i.
AnalysisReport rbr_feasible(const TaskSet& ts, const SchemeConfig& scheme, const AnalysisOptions& opts = {});

/// R̂ per task (restart cost and overheads zero, blocking kept).
std::vector<TimeValue> ideal_response_times(const TaskSet& ts, const SchemeConfig& scheme,
                                            const AnalysisOptions& opts = {});

/// Least fixed point of the level-i active period for task index i (0-based, priority order).
ActivePeriod level_i_active_period(const TaskSet& ts, std::size_t i, const TimeValue& overhead,
                                   const TimeValue& blocking, const AnalysisOptions& opts = {});

/// Wasted-execution bounds; indices are 0-based in priority order.
TimeValue wcwe_npe(const TaskSet& ts, std::size_t upto);
TimeValue wcwe_pt(const TaskSet& ts, std::size_t i);

/// Single-task analysis used by parameter synthesis. `blocking_override`
/// replaces the computed B_i; lower-priority parameters are then ignored.
TaskAnalysis analyze_task(const TaskSet& ts, Discipline discipline, std::size_t i,
                          std::optional<TimeValue> blocking_override = std::nullopt,
                          const AnalysisOptions& opts = {});

} // namespace rbr
