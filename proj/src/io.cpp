#include "rbr/io.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rbr {

using nlohmann::json;

TimeValue parse_time(const json& value)
{
    if (value.is_string())
        return TimeValue::parse(value.get<std::string>());
    if (value.is_number_integer())
        return TimeValue(value.get<std::int64_t>());
    if (value.is_number_float())
        return TimeValue::parse(value.dump()); // shortest round-trip text
    throw std::invalid_argument("expected a number, got " + value.dump());
}

TaskSet parse_taskset(const json& doc)
{
    if (!doc.is_object() || !doc.contains("tasks") || !doc["tasks"].is_array())
        throw std::invalid_argument("task-set document needs a 'tasks' array");

    const json& rows = doc["tasks"];
    std::vector<Task> tasks;
    std::vector<std::optional<int>> levels;
    std::size_t with_priority = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const json& row = rows[k];
        if (!row.contains("C") || !row.contains("T"))
            throw std::invalid_argument("task " + std::to_string(k + 1) + " needs C and T");
        Task t;
        t.id = row.value("id", "tau" + std::to_string(k + 1));
        t.wcet = parse_time(row["C"]);
        t.period = parse_time(row["T"]);
        t.deadline = row.contains("D") ? parse_time(row["D"]) : t.period;
        t.phase = row.contains("phi") ? parse_time(row["phi"]) : TimeValue(0);
        t.critical = row.value("critical", true);
        if (row.contains("Q"))
            t.q_end = parse_time(row["Q"]);
        if (row.contains("lambda"))
            t.threshold = row["lambda"].get<int>();
        levels.push_back(row.contains("lambda_level") ? std::optional<int>(row["lambda_level"].get<int>())
                                                      : std::nullopt);
        if (row.contains("priority")) {
            t.priority = row["priority"].get<int>();
            ++with_priority;
        }
        tasks.push_back(std::move(t));
    }

    if (with_priority != 0 && with_priority != tasks.size())
        throw std::invalid_argument("either every task or no task may carry an explicit priority");
    if (with_priority == 0) {
        std::vector<std::size_t> order(tasks.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return tasks[a].period < tasks[b].period; });
        for (std::size_t r = 0; r + 1 < order.size(); ++r)
            if (tasks[order[r]].period == tasks[order[r + 1]].period)
                throw std::invalid_argument("tasks " + tasks[order[r]].id + " and " + tasks[order[r + 1]].id +
                                            " share a period; give explicit priorities");
        for (std::size_t r = 0; r < order.size(); ++r)
            tasks[order[r]].priority = static_cast<int>(order.size() - r);
    }

    // Levels refer to the priority order, so resolve them against the sorted tasks.
    std::vector<int> sorted_priorities;
    for (const Task& t : tasks)
        sorted_priorities.push_back(t.priority);
    std::sort(sorted_priorities.begin(), sorted_priorities.end(), std::greater<>());
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        if (!levels[k])
            continue;
        int level = *levels[k];
        if (level < 1 || level > static_cast<int>(sorted_priorities.size()))
            throw std::invalid_argument("lambda_level out of range for task " + tasks[k].id);
        tasks[k].threshold = sorted_priorities[static_cast<std::size_t>(level - 1)];
    }

    RestartModel restart;
    if (doc.contains("restart")) {
        const json& r = doc["restart"];
        if (r.contains("Cr"))
            restart.cost = parse_time(r["Cr"]);
        if (r.contains("Tr") && !r["Tr"].is_null())
            restart.min_interarrival = parse_time(r["Tr"]);
    }
    return TaskSet(std::move(tasks), restart);
}

TaskSet parse_taskset_text(const std::string& text)
{
    return parse_taskset(json::parse(text));
}

TaskSet load_taskset(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open task-set file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_taskset_text(buf.str());
}

json taskset_to_json(const TaskSet& ts)
{
    json rows = json::array();
    for (const Task& t : ts.tasks()) {
        json row = {{"id", t.id},
                    {"C", t.wcet.to_string()},
                    {"T", t.period.to_string()},
                    {"D", t.deadline.to_string()},
                    {"phi", t.phase.to_string()},
                    {"priority", t.priority},
                    {"critical", t.critical}};
        if (t.q_end)
            row["Q"] = t.q_end->to_string();
        if (t.threshold)
            row["lambda"] = *t.threshold;
        rows.push_back(std::move(row));
    }
    json restart = {{"Cr", ts.restart().cost.to_string()}};
    if (ts.restart().min_interarrival)
        restart["Tr"] = ts.restart().min_interarrival->to_string();
    return {{"tasks", rows}, {"restart", restart}};
}

void save_taskset(const TaskSet& ts, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << taskset_to_json(ts).dump(2) << '\n';
}

json report_to_json(const AnalysisReport& report)
{
    json rows = json::array();
    for (const TaskAnalysis& ta : report.tasks) {
        json row = {{"id", ta.id},
                    {"R", ta.response.to_string()},
                    {"R_hat", ta.ideal_response.to_string()},
                    {"O", ta.overhead().to_string()},
                    {"B", ta.blocking.to_string()},
                    {"K", ta.jobs},
                    {"converged", ta.converged},
                    {"verdict", ta.schedulable && ta.ideal_schedulable ? "ok" : "miss"}};
        if (ta.breakdown.wcwe)
            row["wcwe"] = ta.breakdown.wcwe->to_string();
        if (ta.breakdown.pt_start)
            row["O_pt_start"] = ta.breakdown.pt_start->to_string();
        if (ta.breakdown.pt_finish)
            row["O_pt_finish"] = ta.breakdown.pt_finish->to_string();
        json jobs = json::array();
        for (const JobTiming& j : ta.job_timings)
            jobs.push_back({{"k", j.k}, {"S", j.start.to_string()}, {"F", j.finish.to_string()},
                            {"response", j.response.to_string()}});
        if (!jobs.empty())
            row["jobs"] = std::move(jobs);
        rows.push_back(std::move(row));
    }
    json out = {{"scheme", std::string(to_string(report.discipline))},
                {"feasible", report.feasible},
                {"tasks", rows}};
    out["first_violation"] = report.first_violation ? json(*report.first_violation) : json(nullptr);
    return out;
}

} // namespace rbr
