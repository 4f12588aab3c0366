#pragma once

#include "rbr/model.hpp"
#include "rbr/rta.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rbr {

/// Infinitesimal offset of an instant: t - eps, t, t + eps.
enum class Side { Before = -1, At = 0, After = 1 };

enum class EventKind {
    Release,
    Dispatch,
    Preempt,
    Complete,
    SilentComplete, // job finished under a silent failure: no output, no NVM write
    RestartBegin,
    RestartEnd,
    DeadlineMiss,
    WdCheckpoint,
    WdExpire,
};

std::string_view to_string(EventKind kind);

struct SimEvent {
    TimeValue time;
    Side side = Side::At;
    EventKind kind = EventKind::Release;
    std::string task; // empty for system events
    int job = 0;      // 1-based per task, 0 for system events
};

/// One uninterrupted execution interval of a job.
struct Segment {
    std::size_t task = 0;
    int job = 0;
    TimeValue begin;
    TimeValue end;
};

struct MissRecord {
    std::string task;
    int job = 0;
    TimeValue deadline;
    bool critical = true;
};

struct SimResult {
    std::vector<SimEvent> trace;
    std::vector<Segment> segments;
    std::vector<MissRecord> misses;
    bool critical_miss = false;
    bool noncritical_miss = false;
    int restarts = 0;
    TimeValue horizon;
};

struct NvmEntry {
    TimeValue completed; // t^comp
    TimeValue release;   // release of the job that wrote it, breaks t^comp == release ties
};

/// Last completion timestamp per task (priority order), "never" when empty.
struct NvmState {
    std::vector<std::optional<NvmEntry>> entries;

    explicit NvmState(std::size_t n = 0) : entries(n) {}

    void record(std::size_t task, const TimeValue& completed, const TimeValue& release);
    /// True when the job released at `release` is known complete.
    bool covers(std::size_t task, const TimeValue& release) const;
};

struct RestartPoint {
    TimeValue instant;
    Side side = Side::Before;
};

struct RestartSchedule {
    std::vector<RestartPoint> points;
};

/// Priority a threshold-scheduled job holds when it is re-executed after a restart.
enum class PtReexecution {
    Nominal,  // queued again at pi_i until it is dispatched
    Retained, // keeps lambda_i if it had started before the restart
};

struct SimOptions {
    bool enforce_a9 = true;
    PtReexecution pt_reexecution = PtReexecution::Nominal;
    bool record_trace = true;
    bool stop_on_critical_miss = false;
};

/// phi_max + 2 * hyperperiod of all tasks.
TimeValue default_horizon(const TaskSet& ts);

SimResult simulate(const TaskSet& ts, const SchemeConfig& scheme, const RestartSchedule& restarts,
                   std::optional<TimeValue> horizon = std::nullopt, const SimOptions& opts = {});

/// Restart point eps before the k-th (1-based) Complete event of the restart-free run.
RestartPoint restart_before_completion(const TaskSet& ts, const SchemeConfig& scheme, int k,
                                       std::optional<TimeValue> horizon = std::nullopt,
                                       const SimOptions& opts = {});

struct ReadyEntry {
    std::size_t task = 0;
    TimeValue release;
};

/// Jobs to re-execute after a restart ending at t: the latest release of each
/// task not covered by the NVM timestamp. With `exclusive`, releases at t are
/// not yet visible.
std::vector<ReadyEntry> post_restart_ready_set(const TaskSet& ts, const NvmState& nvm, const TimeValue& t,
                                               bool exclusive = false);

struct Checkpoint {
    TimeValue time;
    std::size_t task = 0;
    std::string task_id;
    TimeValue release; // release whose completion is checked
};

/// Earliest critical-task checkpoint strictly after t: latest release + R̂_i,
/// moved one period on when it is not in the future. Lowest index wins ties.
std::optional<Checkpoint> watchdog_next_checkpoint(const TaskSet& ts, const std::vector<TimeValue>& ideal,
                                                   const TimeValue& t);

struct SilentFailure {
    TimeValue time;
    std::string task_id;
};

/// Simulation with the watchdog monitor. Each failure silences the target
/// task's completions from its time until the next restart. The monitor is
/// zero-cost and, after a restart, only checks jobs released at or after the
/// restart end.
SimResult simulate_with_watchdog(const TaskSet& ts, const SchemeConfig& scheme,
                                 const std::vector<SilentFailure>& failures,
                                 std::optional<TimeValue> horizon = std::nullopt, const SimOptions& opts = {},
                                 const AnalysisOptions& analysis = {});

struct AdversarialResult {
    bool miss_found = false;
    std::optional<RestartPoint> restart;
    std::optional<MissRecord> miss;
    bool restart_free_miss = false; // any task, no restart
    int candidates = 0;
};

/// Single-restart search over the event instants of the restart-free run in
/// [0, window] (default phi_max + hyperperiod): eps before and at each
/// instant, at midpoints, and C_r before each instant. Stops at the first
/// critical miss.
AdversarialResult adversarial_restart_search(const TaskSet& ts, const SchemeConfig& scheme,
                                             std::optional<TimeValue> window = std::nullopt,
                                             const SimOptions& opts = {});

/// "timestamp kind task job" per line; timestamps carry a -eps/+eps suffix.
std::string trace_to_text(const SimResult& result);

/// One row per task over [0, horizon]: '#' executing, '-' released and waiting,
/// '!' at a deadline miss, plus a restart row.
std::string render_diagram(const TaskSet& ts, const SimResult& result, std::optional<TimeValue> until = std::nullopt);

std::string format_instant(const TimeValue& t, Side side);

} // namespace rbr
