#pragma once

#include "rbr/time_value.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rbr {

/// One periodic task. Larger priority value means higher priority.
struct Task {
    std::string id;
    TimeValue wcet;
    TimeValue period;
    TimeValue deadline;
    TimeValue phase;
    int priority = 0;
    bool critical = true;
    std::optional<TimeValue> q_end;   // non-preemptive ending length
    std::optional<int> threshold;     // preemption threshold, as a priority value

    static Task make(std::string id, TimeValue wcet, TimeValue period, int priority, bool critical = true)
    {
        return Task{std::move(id), wcet, period, period, TimeValue(0), priority, critical, std::nullopt, std::nullopt};
    }
};

struct RestartModel {
    TimeValue cost;                              // C_r
    std::optional<TimeValue> min_interarrival;   // T_r, nullopt = unbounded
};

enum class Discipline {
    FullyPreemptive,
    FullyNonPreemptive,
    NonPreemptiveEnding,
    PreemptionThreshold,
};

struct SchemeConfig {
    Discipline discipline = Discipline::FullyPreemptive;
};

/// Short CLI name: fp, np, npe, pt.
std::string_view to_string(Discipline d);
Discipline parse_discipline(std::string_view name);

/// Priority-ordered task collection. The constructor sorts by decreasing
/// priority (stable), so index 0 is the highest-priority task.
class TaskSet {
public:
    TaskSet() = default;
    TaskSet(std::vector<Task> tasks, RestartModel restart);

    const std::vector<Task>& tasks() const { return tasks_; }
    std::vector<Task>& mutable_tasks() { return tasks_; }
    const Task& operator[](std::size_t i) const { return tasks_[i]; }
    Task& operator[](std::size_t i) { return tasks_[i]; }
    std::size_t size() const { return tasks_.size(); }
    bool empty() const { return tasks_.empty(); }

    const RestartModel& restart() const { return restart_; }
    void set_restart(RestartModel r) { restart_ = r; }

    /// n_c: number of critical tasks.
    std::size_t critical_count() const;

    /// Highest priority value in the set (0 for an empty set).
    int max_priority() const;

    /// Index of the task holding `priority`, if any.
    std::optional<std::size_t> index_of_priority(int priority) const;

private:
    std::vector<Task> tasks_;
    RestartModel restart_;
};

struct Violation {
    std::string task_id; // empty for set-level violations
    std::string message;
};

/// Every violated model invariant; empty means valid.
std::vector<Violation> validate_taskset(const TaskSet& ts, const SchemeConfig& scheme);

/// Sum of C_i / T_i, exact.
TimeValue utilization(const TaskSet& ts);

/// Exact LCM of the selected periods. Throws ArithmeticCapacityError on overflow.
TimeValue hyperperiod(const TaskSet& ts, bool critical_only);

} // namespace rbr
