#include "rbr/model.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace rbr {

std::string_view to_string(Discipline d)
{
    switch (d) {
    case Discipline::FullyPreemptive:
        return "fp";
    case Discipline::FullyNonPreemptive:
        return "np";
    case Discipline::NonPreemptiveEnding:
        return "npe";
    case Discipline::PreemptionThreshold:
        return "pt";
    }
    return "?";
}

Discipline parse_discipline(std::string_view name)
{
    if (name == "fp")
        return Discipline::FullyPreemptive;
    if (name == "np")
        return Discipline::FullyNonPreemptive;
    if (name == "npe")
        return Discipline::NonPreemptiveEnding;
    if (name == "pt")
        return Discipline::PreemptionThreshold;
    throw std::invalid_argument("unknown scheme '" + std::string(name) + "' (expected fp, np, npe or pt)");
}

TaskSet::TaskSet(std::vector<Task> tasks, RestartModel restart)
    : tasks_(std::move(tasks)), restart_(restart)
{
    std::stable_sort(tasks_.begin(), tasks_.end(),
                     [](const Task& a, const Task& b) { return a.priority > b.priority; });
}

std::size_t TaskSet::critical_count() const
{
    return static_cast<std::size_t>(std::count_if(tasks_.begin(), tasks_.end(), [](const Task& t) { return t.critical; }));
}

int TaskSet::max_priority() const
{
    return tasks_.empty() ? 0 : tasks_.front().priority;
}

std::optional<std::size_t> TaskSet::index_of_priority(int priority) const
{
    for (std::size_t i = 0; i < tasks_.size(); ++i)
        if (tasks_[i].priority == priority)
            return i;
    return std::nullopt;
}

std::vector<Violation> validate_taskset(const TaskSet& ts, const SchemeConfig& scheme)
{
    std::vector<Violation> out;
    auto flag = [&](const std::string& id, std::string msg) { out.push_back({id, std::move(msg)}); };

    std::set<std::string> ids;
    std::set<int> priorities;
    bool seen_noncritical = false;
    for (const Task& t : ts.tasks()) {
        if (!ids.insert(t.id).second)
            flag(t.id, "duplicate task id");
        if (!priorities.insert(t.priority).second)
            flag(t.id, "priority " + std::to_string(t.priority) + " is not unique");
        if (!(t.wcet > 0 && t.wcet <= t.deadline && t.deadline <= t.period))
            flag(t.id, "C <= D <= T with C > 0 violated");
        if (t.phase < 0)
            flag(t.id, "negative phase");
        if (t.q_end && (*t.q_end < 0 || *t.q_end > t.wcet))
            flag(t.id, "Q must satisfy 0 <= Q <= C");
        if (t.threshold && *t.threshold < t.priority)
            flag(t.id, "threshold below nominal priority");
        if (t.critical && seen_noncritical)
            flag(t.id, "critical task has lower priority than a non-critical task");
        if (!t.critical)
            seen_noncritical = true;

        if (scheme.discipline == Discipline::NonPreemptiveEnding && !t.q_end)
            flag(t.id, "non-preemptive ending length Q required");
        if (scheme.discipline == Discipline::PreemptionThreshold && !t.threshold)
            flag(t.id, "threshold required");
    }

    const RestartModel& r = ts.restart();
    if (r.cost < 0)
        flag("", "negative restart cost");
    if (r.min_interarrival && ts.critical_count() > 0) {
        try {
            TimeValue h = hyperperiod(ts, true);
            if (!(*r.min_interarrival > h))
                flag("", "restart inter-arrival T_r must exceed the critical hyperperiod " + h.to_string());
        } catch (const ArithmeticCapacityError&) {
            flag("", "critical hyperperiod exceeds arithmetic capacity, cannot be below finite T_r");
        }
    }
    return out;
}

TimeValue utilization(const TaskSet& ts)
{
    TimeValue u(0);
    for (const Task& t : ts.tasks())
        u += t.wcet / t.period;
    return u;
}

TimeValue hyperperiod(const TaskSet& ts, bool critical_only)
{
    std::optional<TimeValue> h;
    for (const Task& t : ts.tasks()) {
        if (critical_only && !t.critical)
            continue;
        h = h ? lcm(*h, t.period) : t.period;
    }
    return h.value_or(TimeValue(0));
}

} // namespace rbr
