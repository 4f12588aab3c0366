#include "rbr/simulate.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rbr {

std::string_view to_string(EventKind kind)
{
    switch (kind) {
    case EventKind::Release: return "Release";
    case EventKind::Dispatch: return "Dispatch";
    case EventKind::Preempt: return "Preempt";
    case EventKind::Complete: return "Complete";
    case EventKind::SilentComplete: return "SilentComplete";
    case EventKind::RestartBegin: return "RestartBegin";
    case EventKind::RestartEnd: return "RestartEnd";
    case EventKind::DeadlineMiss: return "DeadlineMiss";
    case EventKind::WdCheckpoint: return "WdCheckpoint";
    case EventKind::WdExpire: return "WdExpire";
    }
    return "?";
}

void NvmState::record(std::size_t task, const TimeValue& completed, const TimeValue& release)
{
    entries.at(task) = NvmEntry{completed, release};
}

bool NvmState::covers(std::size_t task, const TimeValue& release) const
{
    const auto& e = entries.at(task);
    if (!e)
        return false;
    if (e->completed != release)
        return e->completed > release;
    return e->release >= release;
}

TimeValue default_horizon(const TaskSet& ts)
{
    TimeValue phi_max(0);
    for (const Task& t : ts.tasks())
        phi_max = max(phi_max, t.phase);
    return phi_max + TimeValue(2) * hyperperiod(ts, false);
}

namespace {

// Latest release at or before t (strictly before with `exclusive`), if any.
std::optional<TimeValue> latest_release(const Task& task, const TimeValue& t, bool exclusive)
{
    if (t < task.phase || (exclusive && t == task.phase))
        return std::nullopt;
    TimeValue r = task.phase + TimeValue((t - task.phase).floor_div(task.period)) * task.period;
    if (exclusive && r == t)
        r -= task.period;
    return r;
}

TimeValue first_release_from(const Task& task, const TimeValue& from)
{
    if (from <= task.phase)
        return task.phase;
    return task.phase + TimeValue((from - task.phase).ceil_div(task.period)) * task.period;
}

int job_index(const Task& task, const TimeValue& release)
{
    return static_cast<int>((release - task.phase).floor_div(task.period)) + 1;
}

Checkpoint checkpoint_after(const TaskSet& ts, const std::vector<TimeValue>& ideal, std::size_t i, const TimeValue& t,
                            const TimeValue& min_release)
{
    const Task& task = ts[i];
    TimeValue r = latest_release(task, t, false).value_or(task.phase);
    if (r < min_release)
        r = first_release_from(task, min_release);
    while (r + ideal[i] <= t)
        r += task.period;
    return Checkpoint{r + ideal[i], i, task.id, r};
}

struct Job {
    std::size_t task = 0;
    int k = 1;
    TimeValue release;
    TimeValue deadline;
    TimeValue executed;
    bool started = false;
    bool missed = false;
};

class Engine {
public:
    Engine(const TaskSet& ts, Discipline discipline, TimeValue horizon, const SimOptions& opts)
        : ts_(ts), discipline_(discipline), horizon_(horizon), opts_(opts), nvm_(ts.size()),
          next_release_(ts.size()), suppressed_(ts.size(), false)
    {
        for (std::size_t i = 0; i < ts.size(); ++i)
            next_release_[i] = ts[i].phase;
        result_.horizon = horizon;
    }

    void set_restarts(std::vector<RestartPoint> points)
    {
        std::stable_sort(points.begin(), points.end(), [](const RestartPoint& a, const RestartPoint& b) {
            if (a.instant != b.instant)
                return a.instant < b.instant;
            return static_cast<int>(a.side) < static_cast<int>(b.side);
        });
        restarts_ = std::move(points);
    }

    void enable_watchdog(std::vector<TimeValue> ideal, std::vector<SilentFailure> failures)
    {
        watchdog_ = true;
        ideal_ = std::move(ideal);
        std::stable_sort(failures.begin(), failures.end(),
                         [](const SilentFailure& a, const SilentFailure& b) { return a.time < b.time; });
        for (const SilentFailure& f : failures) {
            auto it = std::find_if(ts_.tasks().begin(), ts_.tasks().end(),
                                   [&](const Task& t) { return t.id == f.task_id; });
            if (it == ts_.tasks().end())
                throw std::invalid_argument("silent failure targets unknown task " + f.task_id);
            failures_.push_back({f.time, static_cast<std::size_t>(it - ts_.tasks().begin())});
        }
        rearm_watchdog(TimeValue(0), TimeValue(0));
    }

    SimResult run()
    {
        process_instant(TimeValue(0));
        while (!stop_) {
            std::optional<TimeValue> t = next_instant();
            if (!t || *t > horizon_)
                break;
            advance(*t);
            process_instant(*t);
        }
        if (!stop_ && now_ < horizon_)
            advance(horizon_);
        if (cur_)
            close_segment(now_);
        return std::move(result_);
    }

private:
    struct Failure {
        TimeValue time;
        std::size_t task;
    };

    const TaskSet& ts_;
    Discipline discipline_;
    TimeValue horizon_;
    SimOptions opts_;
    NvmState nvm_;
    SimResult result_;

    TimeValue now_;
    std::vector<Job> jobs_;
    std::vector<std::size_t> pending_;
    std::optional<std::size_t> cur_;
    TimeValue seg_begin_;
    std::vector<TimeValue> next_release_;

    std::vector<RestartPoint> restarts_;
    std::size_t next_restart_ = 0;
    bool in_restart_ = false;
    TimeValue restart_end_;
    Side restart_side_ = Side::At;

    bool watchdog_ = false;
    std::vector<TimeValue> ideal_;
    std::vector<std::optional<Checkpoint>> checkpoints_;
    std::vector<Failure> failures_;
    std::size_t next_failure_ = 0;
    std::vector<bool> suppressed_;

    bool stop_ = false;

    void emit(const TimeValue& t, Side side, EventKind kind, std::size_t task, int job)
    {
        if (opts_.record_trace)
            result_.trace.push_back({t, side, kind, ts_[task].id, job});
    }

    void emit_system(const TimeValue& t, Side side, EventKind kind)
    {
        if (opts_.record_trace)
            result_.trace.push_back({t, side, kind, "", 0});
    }

    const Task& task_of(std::size_t j) const { return ts_[jobs_[j].task]; }

    void advance(const TimeValue& t)
    {
        if (cur_ && !in_restart_)
            jobs_[*cur_].executed += t - now_;
        now_ = t;
    }

    std::optional<TimeValue> next_instant() const
    {
        std::optional<TimeValue> best;
        auto offer = [&](const TimeValue& t) {
            if (t > now_ && (!best || t < *best))
                best = t;
        };
        for (const TimeValue& r : next_release_)
            offer(r);
        if (cur_ && !in_restart_)
            offer(now_ + task_of(*cur_).wcet - jobs_[*cur_].executed);
        if (in_restart_)
            offer(restart_end_);
        if (next_restart_ < restarts_.size())
            offer(restarts_[next_restart_].instant);
        for (std::size_t j : pending_)
            if (!jobs_[j].missed)
                offer(jobs_[j].deadline);
        if (watchdog_ && !in_restart_)
            for (const auto& cp : checkpoints_)
                if (cp)
                    offer(cp->time);
        if (next_failure_ < failures_.size())
            offer(failures_[next_failure_].time);
        return best;
    }

    void process_instant(const TimeValue& t)
    {
        // eps before t
        while (next_failure_ < failures_.size() && failures_[next_failure_].time == t)
            suppressed_[failures_[next_failure_++].task] = true;
        if (in_restart_ && restart_end_ == t && restart_side_ == Side::Before)
            finish_restart(t);
        while (next_restart_ < restarts_.size() && restarts_[next_restart_].instant == t &&
               restarts_[next_restart_].side == Side::Before) {
            ++next_restart_;
            begin_restart(t, Side::Before);
            if (restart_end_ == t)
                finish_restart(t);
        }

        // at t
        if (cur_ && !in_restart_ && jobs_[*cur_].executed == task_of(*cur_).wcet)
            complete(*cur_, t);
        for (std::size_t i = 0; i < ts_.size(); ++i)
            if (next_release_[i] == t)
                release(i, t);
        for (std::size_t j : pending_)
            if (!jobs_[j].missed && jobs_[j].deadline == t)
                miss(j, t);
        if (stop_)
            return;

        // eps after t
        if (in_restart_ && restart_end_ == t && restart_side_ != Side::Before)
            finish_restart(t);
        while (next_restart_ < restarts_.size() && restarts_[next_restart_].instant == t) {
            Side side = restarts_[next_restart_++].side;
            begin_restart(t, side);
            if (restart_end_ == t)
                finish_restart(t);
        }
        if (watchdog_ && !in_restart_)
            check_watchdog(t);

        if (!in_restart_)
            dispatch(t, Side::At);
    }

    void release(std::size_t i, const TimeValue& t)
    {
        const Task& task = ts_[i];
        Job job;
        job.task = i;
        job.k = job_index(task, t);
        job.release = t;
        job.deadline = t + task.deadline;
        jobs_.push_back(job);
        pending_.push_back(jobs_.size() - 1);
        emit(t, Side::At, EventKind::Release, i, job.k);
        next_release_[i] = t + task.period;
    }

    void miss(std::size_t j, const TimeValue& t)
    {
        Job& job = jobs_[j];
        job.missed = true;
        const Task& task = task_of(j);
        result_.misses.push_back({task.id, job.k, job.deadline, task.critical});
        emit(t, Side::At, EventKind::DeadlineMiss, job.task, job.k);
        if (task.critical) {
            result_.critical_miss = true;
            if (opts_.stop_on_critical_miss)
                stop_ = true;
        } else {
            result_.noncritical_miss = true;
        }
    }

    void remove_pending(std::size_t j) { pending_.erase(std::find(pending_.begin(), pending_.end(), j)); }

    void close_segment(const TimeValue& t)
    {
        const Job& job = jobs_[*cur_];
        if (opts_.record_trace && seg_begin_ < t)
            result_.segments.push_back({job.task, job.k, seg_begin_, t});
    }

    void complete(std::size_t j, const TimeValue& t)
    {
        Job& job = jobs_[j];
        close_segment(t);
        if (suppressed_[job.task]) {
            emit(t, Side::At, EventKind::SilentComplete, job.task, job.k);
        } else {
            emit(t, Side::At, EventKind::Complete, job.task, job.k);
            nvm_.record(job.task, t, job.release);
        }
        remove_pending(j);
        cur_.reset();
    }

    void begin_restart(const TimeValue& t, Side side)
    {
        emit_system(t, side, EventKind::RestartBegin);
        ++result_.restarts;
        if (cur_ && !in_restart_)
            close_segment(t);
        cur_.reset();
        bool keep_started = discipline_ == Discipline::PreemptionThreshold &&
                            opts_.pt_reexecution == PtReexecution::Retained;
        for (std::size_t j : pending_) {
            jobs_[j].executed = TimeValue(0);
            if (!keep_started)
                jobs_[j].started = false;
        }
        std::fill(suppressed_.begin(), suppressed_.end(), false);
        in_restart_ = true;
        restart_end_ = t + ts_.restart().cost;
        restart_side_ = side;
    }

    void finish_restart(const TimeValue& t)
    {
        emit_system(t, restart_side_, EventKind::RestartEnd);
        in_restart_ = false;
        bool exclusive = restart_side_ == Side::Before;
        std::vector<ReadyEntry> ready = post_restart_ready_set(ts_, nvm_, t, exclusive);
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < ts_.size(); ++i) {
            auto entry = std::find_if(ready.begin(), ready.end(), [&](const ReadyEntry& e) { return e.task == i; });
            std::optional<std::size_t> kept;
            for (std::size_t j : pending_)
                if (jobs_[j].task == i && entry != ready.end() && jobs_[j].release == entry->release)
                    kept = j;
            if (entry != ready.end() && !kept) {
                const Task& task = ts_[i];
                Job job;
                job.task = i;
                job.k = job_index(task, entry->release);
                job.release = entry->release;
                job.deadline = entry->release + task.deadline;
                jobs_.push_back(job);
                kept = jobs_.size() - 1;
                if (job.deadline < t)
                    miss(*kept, t);
            }
            if (kept)
                keep.push_back(*kept);
        }
        // queue order is irrelevant, selection is by key
        pending_ = std::move(keep);
        if (watchdog_)
            rearm_watchdog(t, t);
        if (exclusive)
            dispatch(t, Side::Before);
    }

    void rearm_watchdog(const TimeValue& t, const TimeValue& min_release)
    {
        checkpoints_.assign(ts_.size(), std::nullopt);
        for (std::size_t i = 0; i < ts_.size(); ++i)
            if (ts_[i].critical)
                checkpoints_[i] = checkpoint_after(ts_, ideal_, i, t, min_release);
        monitor_from_ = min_release;
    }

    TimeValue monitor_from_;

    void check_watchdog(const TimeValue& t)
    {
        std::optional<std::size_t> failed;
        for (std::size_t i = 0; i < ts_.size(); ++i) {
            auto& cp = checkpoints_[i];
            if (!cp || cp->time != t)
                continue;
            emit(t, Side::At, EventKind::WdCheckpoint, i, job_index(ts_[i], cp->release));
            if (!nvm_.covers(i, cp->release) && !failed)
                failed = i;
            cp = checkpoint_after(ts_, ideal_, i, t, monitor_from_);
        }
        if (failed) {
            emit(t, Side::At, EventKind::WdExpire, *failed, 0);
            begin_restart(t, Side::After);
            if (restart_end_ == t)
                finish_restart(t);
        }
    }

    int effective_priority(const Job& job) const
    {
        const Task& task = ts_[job.task];
        if (discipline_ == Discipline::PreemptionThreshold && job.started && task.threshold)
            return *task.threshold;
        return task.priority;
    }

    // true when a should run before b
    bool better(std::size_t a, std::size_t b) const
    {
        const Job& ja = jobs_[a];
        const Job& jb = jobs_[b];
        int ea = effective_priority(ja);
        int eb = effective_priority(jb);
        if (ea != eb)
            return ea > eb;
        if (ja.started != jb.started)
            return ja.started;
        int pa = ts_[ja.task].priority;
        int pb = ts_[jb.task].priority;
        if (pa != pb)
            return pa > pb;
        return ja.release < jb.release;
    }

    bool may_preempt(std::size_t running, std::size_t candidate) const
    {
        const Job& r = jobs_[running];
        const Task& rt = ts_[r.task];
        int cp = ts_[jobs_[candidate].task].priority;
        switch (discipline_) {
        case Discipline::FullyPreemptive:
            return cp > rt.priority;
        case Discipline::FullyNonPreemptive:
            return false;
        case Discipline::NonPreemptiveEnding: {
            TimeValue q = rt.q_end.value_or(rt.wcet);
            bool locked = q == rt.wcet || r.executed > rt.wcet - q;
            return !locked && cp > rt.priority;
        }
        case Discipline::PreemptionThreshold:
            return cp > rt.threshold.value_or(rt.priority);
        }
        return false;
    }

    void start(std::size_t j, const TimeValue& t, Side side)
    {
        cur_ = j;
        jobs_[j].started = true;
        seg_begin_ = t;
        emit(t, side, EventKind::Dispatch, jobs_[j].task, jobs_[j].k);
    }

    void dispatch(const TimeValue& t, Side side)
    {
        std::optional<std::size_t> best;
        for (std::size_t j : pending_)
            if (j != cur_ && (!best || better(j, *best)))
                best = j;
        if (!best)
            return;
        if (cur_) {
            if (!may_preempt(*cur_, *best))
                return;
            close_segment(t);
            emit(t, side, EventKind::Preempt, jobs_[*cur_].task, jobs_[*cur_].k);
            cur_.reset();
        }
        start(*best, t, side);
    }
};

void check_a9(const TaskSet& ts, const RestartSchedule& restarts)
{
    std::vector<TimeValue> instants;
    for (const RestartPoint& p : restarts.points) {
        if (p.instant.is_negative())
            throw std::invalid_argument("restart instant before time 0");
        instants.push_back(p.instant);
    }
    if (instants.size() < 2)
        return;
    std::sort(instants.begin(), instants.end());
    TimeValue hc;
    try {
        hc = hyperperiod(ts, true);
    } catch (const ArithmeticCapacityError&) {
        throw std::invalid_argument("restarts must be separated by more than the critical hyperperiod, "
                                    "which exceeds the arithmetic range");
    }
    for (std::size_t k = 1; k < instants.size(); ++k)
        if (instants[k] - instants[k - 1] <= hc)
            throw std::invalid_argument("restarts at " + instants[k - 1].to_string() + " and " +
                                        instants[k].to_string() +
                                        " are not separated by more than the critical hyperperiod " +
                                        hc.to_string());
}

void require_valid(const TaskSet& ts, const SchemeConfig& scheme)
{
    auto violations = validate_taskset(ts, scheme);
    if (!violations.empty())
        throw InvalidTaskSetError(violations);
}

SimResult run_engine(const TaskSet& ts, const SchemeConfig& scheme, const RestartSchedule& restarts,
                     const TimeValue& horizon, const SimOptions& opts)
{
    Engine engine(ts, scheme.discipline, horizon, opts);
    engine.set_restarts(restarts.points);
    return engine.run();
}

} // namespace

SimResult simulate(const TaskSet& ts, const SchemeConfig& scheme, const RestartSchedule& restarts,
                   std::optional<TimeValue> horizon, const SimOptions& opts)
{
    require_valid(ts, scheme);
    if (opts.enforce_a9)
        check_a9(ts, restarts);
    return run_engine(ts, scheme, restarts, horizon ? *horizon : default_horizon(ts), opts);
}

RestartPoint restart_before_completion(const TaskSet& ts, const SchemeConfig& scheme, int k,
                                       std::optional<TimeValue> horizon, const SimOptions& opts)
{
    SimOptions o = opts;
    o.record_trace = true;
    SimResult base = simulate(ts, scheme, {}, horizon, o);
    int seen = 0;
    for (const SimEvent& e : base.trace)
        if (e.kind == EventKind::Complete && ++seen == k)
            return RestartPoint{e.time, Side::Before};
    throw std::out_of_range("restart-free run has fewer than " + std::to_string(k) + " completions");
}

std::vector<ReadyEntry> post_restart_ready_set(const TaskSet& ts, const NvmState& nvm, const TimeValue& t,
                                               bool exclusive)
{
    std::vector<ReadyEntry> out;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        std::optional<TimeValue> r = latest_release(ts[i], t, exclusive);
        if (r && !nvm.covers(i, *r))
            out.push_back({i, *r});
    }
    return out;
}

std::optional<Checkpoint> watchdog_next_checkpoint(const TaskSet& ts, const std::vector<TimeValue>& ideal,
                                                   const TimeValue& t)
{
    std::optional<Checkpoint> best;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!ts[i].critical)
            continue;
        Checkpoint cp = checkpoint_after(ts, ideal, i, t, ts[i].phase);
        if (!best || cp.time < best->time)
            best = cp;
    }
    return best;
}

SimResult simulate_with_watchdog(const TaskSet& ts, const SchemeConfig& scheme,
                                 const std::vector<SilentFailure>& failures, std::optional<TimeValue> horizon,
                                 const SimOptions& opts, const AnalysisOptions& analysis)
{
    require_valid(ts, scheme);
    std::vector<TimeValue> ideal = ideal_response_times(ts, scheme, analysis);
    Engine engine(ts, scheme.discipline, horizon ? *horizon : default_horizon(ts), opts);
    engine.enable_watchdog(std::move(ideal), failures);
    return engine.run();
}

AdversarialResult adversarial_restart_search(const TaskSet& ts, const SchemeConfig& scheme,
                                             std::optional<TimeValue> window, const SimOptions& opts)
{
    require_valid(ts, scheme);
    TimeValue h = hyperperiod(ts, false);
    TimeValue phi_max(0);
    TimeValue d_max(0);
    for (const Task& t : ts.tasks()) {
        phi_max = max(phi_max, t.phase);
        d_max = max(d_max, t.deadline);
    }
    TimeValue w = window ? *window : phi_max + h;
    TimeValue cr = ts.restart().cost;
    TimeValue sim_horizon = w + h + cr + d_max;

    AdversarialResult out;
    SimOptions base_opts = opts;
    base_opts.record_trace = true;
    base_opts.stop_on_critical_miss = false;
    SimResult base = run_engine(ts, scheme, {}, sim_horizon, base_opts);
    out.restart_free_miss = !base.misses.empty();

    std::set<TimeValue> instants{TimeValue(0)};
    for (const SimEvent& e : base.trace) {
        bool relevant = e.kind == EventKind::Release || e.kind == EventKind::Dispatch ||
                        e.kind == EventKind::Preempt || e.kind == EventKind::Complete;
        if (relevant && e.time <= w)
            instants.insert(e.time);
    }

    std::set<std::pair<TimeValue, int>> candidates;
    auto add = [&](const TimeValue& t, Side side) {
        if (t.is_negative() || t > w || (side == Side::Before && t.is_zero()))
            return;
        candidates.insert({t, static_cast<int>(side)});
    };
    std::optional<TimeValue> prev;
    for (const TimeValue& t : instants) {
        add(t, Side::Before);
        add(t, Side::At);
        if (!cr.is_zero()) {
            add(t - cr, Side::Before);
            add(t - cr, Side::At);
        }
        if (prev)
            add((*prev + t) / TimeValue(2), Side::At);
        prev = t;
    }

    SimOptions run_opts = opts;
    run_opts.record_trace = false;
    run_opts.stop_on_critical_miss = true;
    for (const auto& [t, side] : candidates) {
        ++out.candidates;
        RestartSchedule schedule{{RestartPoint{t, static_cast<Side>(side)}}};
        SimResult r = run_engine(ts, scheme, schedule, sim_horizon, run_opts);
        if (r.critical_miss) {
            out.miss_found = true;
            out.restart = schedule.points.front();
            for (const MissRecord& m : r.misses)
                if (m.critical) {
                    out.miss = m;
                    break;
                }
            return out;
        }
    }
    return out;
}

std::string format_instant(const TimeValue& t, Side side)
{
    std::string s = t.to_string();
    if (side == Side::Before)
        s += "-eps";
    else if (side == Side::After)
        s += "+eps";
    return s;
}

std::string trace_to_text(const SimResult& result)
{
    std::ostringstream out;
    for (const SimEvent& e : result.trace)
        out << format_instant(e.time, e.side) << ' ' << to_string(e.kind) << ' ' << (e.task.empty() ? "-" : e.task)
            << ' ' << e.job << '\n';
    return out.str();
}

std::string render_diagram(const TaskSet& ts, const SimResult& result, std::optional<TimeValue> until)
{
    TimeValue end = until ? *until : result.horizon;
    // cells per time unit: lcm of the denominators in play, capped
    TimeValue::Int scale = 1;
    auto widen = [&](const TimeValue& t) {
        TimeValue::Int d = t.denominator();
        if (d > 8)
            return;
        TimeValue::Int l = scale / std::gcd(static_cast<long long>(scale), static_cast<long long>(d)) * d;
        if (l <= 8)
            scale = l;
    };
    for (const Segment& s : result.segments) {
        widen(s.begin);
        widen(s.end);
    }
    for (const SimEvent& e : result.trace)
        widen(e.time);
    const TimeValue cell(TimeValue::Int(1), scale);
    const std::int64_t cells = end.ceil_div(cell);

    std::size_t label = 7;
    for (const Task& t : ts.tasks())
        label = std::max(label, t.id.size());
    auto row_start = [&](const std::string& name) {
        std::string s = name;
        s.resize(label, ' ');
        return s + " |";
    };

    std::ostringstream out;
    std::string ruler(static_cast<std::size_t>(cells), ' ');
    for (std::int64_t c = 0; c < cells; c += 5 * static_cast<std::int64_t>(scale)) {
        std::string num = std::to_string(c / static_cast<std::int64_t>(scale));
        for (std::size_t k = 0; k < num.size() && c + static_cast<std::int64_t>(k) < cells; ++k)
            ruler[static_cast<std::size_t>(c) + k] = num[k];
    }
    out << row_start("t") << ruler << '\n';

    auto cell_of = [&](const TimeValue& t) { return t.floor_div(cell); };
    for (std::size_t i = 0; i < ts.size(); ++i) {
        std::string row(static_cast<std::size_t>(cells), '.');
        for (const Segment& s : result.segments) {
            if (s.task != i)
                continue;
            for (std::int64_t c = cell_of(s.begin); c < s.end.ceil_div(cell) && c < cells; ++c)
                row[static_cast<std::size_t>(c)] = '#';
        }
        for (const MissRecord& m : result.misses) {
            if (m.task != ts[i].id)
                continue;
            std::int64_t c = m.deadline.ceil_div(cell) - 1;
            if (c >= 0 && c < cells)
                row[static_cast<std::size_t>(c)] = '!';
        }
        out << row_start(ts[i].id) << row << '\n';
    }

    std::string restart(static_cast<std::size_t>(cells), ' ');
    std::optional<TimeValue> begin;
    for (const SimEvent& e : result.trace) {
        if (e.kind == EventKind::RestartBegin) {
            begin = e.time;
        } else if (e.kind == EventKind::RestartEnd && begin) {
            std::int64_t first = cell_of(*begin);
            std::int64_t last = std::max(first + 1, e.time.ceil_div(cell));
            char mark = *begin == e.time ? '|' : 'X';
            for (std::int64_t c = first; c < last && c < cells; ++c)
                if (c >= 0)
                    restart[static_cast<std::size_t>(c)] = mark;
            begin.reset();
        }
    }
    out << row_start("restart") << restart << '\n';
    return out.str();
}

} // namespace rbr
