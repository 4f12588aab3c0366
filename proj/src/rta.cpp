#include "rbr/rta.hpp"

#include <cassert>

namespace rbr {

namespace {

std::string describe(const std::vector<Violation>& violations)
{
    std::string out = "invalid task set:";
    for (const Violation& v : violations)
        out += " [" + (v.task_id.empty() ? std::string("set") : v.task_id) + ": " + v.message + "]";
    return out;
}

void require_valid(const TaskSet& ts, Discipline d)
{
    auto violations = validate_taskset(ts, SchemeConfig{d});
    if (!violations.empty())
        throw InvalidTaskSetError(violations);
}

struct FixedPoint {
    TimeValue value;
    bool converged = true;
};

// Iterates x <- next(x) from seed until a fixed point or until the iterate exceeds bound.
template <typename Next>
FixedPoint iterate(TimeValue seed, const TimeValue& bound, Next next)
{
    if (seed > bound)
        return {seed, false};
    TimeValue x = seed;
    for (;;) {
        TimeValue nx = next(x);
        assert(nx >= x);
        if (nx == x)
            return {x, true};
        if (nx > bound)
            return {nx, false};
        x = std::move(nx);
    }
}

TimeValue sum_wcet(const TaskSet& ts, std::size_t first, std::size_t last_exclusive)
{
    TimeValue s(0);
    for (std::size_t j = first; j < last_exclusive; ++j)
        s += ts[j].wcet;
    return s;
}

const TimeValue& q_of(const TaskSet& ts, std::size_t j)
{
    const Task& t = ts[j];
    if (!t.q_end)
        throw std::invalid_argument("task " + t.id + " has no non-preemptive ending length");
    return *t.q_end;
}

int threshold_of(const TaskSet& ts, std::size_t j)
{
    const Task& t = ts[j];
    if (!t.threshold)
        throw std::invalid_argument("task " + t.id + " has no preemption threshold");
    return *t.threshold;
}

TimeValue default_active_period_bound(const TaskSet& ts, std::size_t i, const TimeValue& seed)
{
    TimeValue u(0);
    TimeValue max_period(0);
    for (std::size_t j = 0; j <= i; ++j) {
        u += ts[j].wcet / ts[j].period;
        max_period = max(max_period, ts[j].period);
    }
    std::optional<TimeValue> bound;
    try {
        TimeValue h = ts[0].period;
        for (std::size_t j = 1; j <= i; ++j)
            h = lcm(h, ts[j].period);
        bound = h + max_period;
    } catch (const ArithmeticCapacityError&) {
    }
    // Below full utilization the least fixed point lies under seed / (1 - U).
    if (u < 1) {
        TimeValue analytic = seed / (TimeValue(1) - u);
        bound = bound ? max(*bound, analytic) : analytic;
    }
    return bound.value_or(seed);
}

// S = base + overhead + sum_{j<i} (floor(S/T_j) + 1) C_j
FixedPoint start_time(const TaskSet& ts, std::size_t i, const TimeValue& base, const TimeValue& overhead,
                      const TimeValue& bound)
{
    TimeValue fixed = base + overhead;
    TimeValue seed = fixed + sum_wcet(ts, 0, i);
    return iterate(seed, bound, [&](const TimeValue& s) {
        TimeValue next = fixed;
        for (std::size_t j = 0; j < i; ++j)
            next += ts[j].wcet * TimeValue(s.floor_div(ts[j].period) + 1);
        return next;
    });
}

// F = S + C_i + sum_{pi_j > lambda_i} (ceil(F/T_j) - (1 + floor(S/T_j))) C_j + overhead
FixedPoint finish_time_pt(const TaskSet& ts, std::size_t i, const TimeValue& start, const TimeValue& overhead,
                          const TimeValue& bound)
{
    const int lambda = threshold_of(ts, i);
    TimeValue fixed = start + ts[i].wcet + overhead;
    return iterate(fixed, bound, [&](const TimeValue& f) {
        TimeValue next = fixed;
        for (std::size_t j = 0; j < i; ++j) {
            if (ts[j].priority <= lambda)
                continue;
            std::int64_t released = f.ceil_div(ts[j].period) - (1 + start.floor_div(ts[j].period));
            next += ts[j].wcet * TimeValue(released);
        }
        return next;
    });
}

std::vector<TimeValue> wcwe_pt_all(const TaskSet& ts, std::size_t upto)
{
    std::vector<TimeValue> w(upto + 1);
    for (std::size_t i = 0; i <= upto; ++i) {
        TimeValue chain(0);
        if (i > 0) {
            const int lambda = threshold_of(ts, i);
            for (std::size_t j = 0; j < i; ++j)
                if (ts[j].priority > lambda)
                    chain = max(chain, w[j]);
        }
        w[i] = ts[i].wcet + chain;
    }
    return w;
}

struct SchemeTerms {
    TimeValue blocking;
    OverheadBreakdown breakdown;
};

SchemeTerms scheme_terms(const TaskSet& ts, Discipline d, std::size_t i, bool with_overhead,
                         const std::optional<TimeValue>& blocking_override)
{
    SchemeTerms terms;
    const bool charged = with_overhead && ts[i].critical;
    const TimeValue& cr = ts.restart().cost;
    switch (d) {
    case Discipline::FullyPreemptive:
        terms.breakdown.wcwe = sum_wcet(ts, 0, i + 1);
        if (charged)
            terms.breakdown.overhead = cr + *terms.breakdown.wcwe;
        break;
    case Discipline::FullyNonPreemptive: {
        TimeValue largest = ts[i].wcet;
        for (std::size_t j = 0; j < i; ++j)
            largest = max(largest, ts[j].wcet);
        for (std::size_t j = i + 1; j < ts.size(); ++j)
            terms.blocking = max(terms.blocking, ts[j].wcet);
        terms.breakdown.wcwe = largest;
        if (charged)
            terms.breakdown.overhead = cr + largest;
        break;
    }
    case Discipline::NonPreemptiveEnding: {
        if (!blocking_override)
            for (std::size_t j = i + 1; j < ts.size(); ++j)
                terms.blocking = max(terms.blocking, q_of(ts, j));
        terms.breakdown.wcwe = wcwe_npe(ts, i);
        if (charged)
            terms.breakdown.overhead = cr + *terms.breakdown.wcwe;
        break;
    }
    case Discipline::PreemptionThreshold: {
        if (!blocking_override)
            for (std::size_t j = i + 1; j < ts.size(); ++j)
                if (threshold_of(ts, j) >= ts[i].priority)
                    terms.blocking = max(terms.blocking, ts[j].wcet);
        auto w = wcwe_pt_all(ts, i);
        TimeValue before_start(0);
        for (std::size_t j = 0; j < i; ++j)
            before_start = max(before_start, w[j]);
        terms.breakdown.wcwe = w[i];
        terms.breakdown.pt_start = charged ? cr + before_start : TimeValue(0);
        terms.breakdown.pt_finish = charged ? cr + w[i] : TimeValue(0);
        terms.breakdown.overhead = max(*terms.breakdown.pt_start, *terms.breakdown.pt_finish);
        break;
    }
    }
    if (blocking_override)
        terms.blocking = *blocking_override;
    return terms;
}

struct Outcome {
    TimeValue response;
    int jobs = 1;
    bool converged = true;
    std::vector<JobTiming> timings;
};

Outcome response_preemptive(const TaskSet& ts, std::size_t i, const SchemeTerms& terms)
{
    const Task& t = ts[i];
    TimeValue fixed = t.wcet + terms.breakdown.overhead;
    FixedPoint r = iterate(fixed, t.deadline, [&](const TimeValue& x) {
        TimeValue next = fixed;
        for (std::size_t j = 0; j < i; ++j)
            next += ts[j].wcet * TimeValue(x.ceil_div(ts[j].period));
        return next;
    });
    return {r.value, 1, r.converged, {}};
}

Outcome response_multi_job(const TaskSet& ts, Discipline d, std::size_t i, const SchemeTerms& terms,
                           const AnalysisOptions& opts)
{
    const Task& t = ts[i];
    ActivePeriod ap = level_i_active_period(ts, i, terms.breakdown.overhead, terms.blocking, opts);
    if (!ap.converged)
        return {ap.length, ap.jobs, false, {}};

    Outcome out;
    out.jobs = ap.jobs;
    bool first = true;
    for (int k = 1; k <= ap.jobs; ++k) {
        const TimeValue arrival = t.period * TimeValue(k - 1);
        const TimeValue bound = arrival + t.deadline;
        const TimeValue prior = t.wcet * TimeValue(k - 1);
        JobTiming job;
        job.k = k;
        bool ok = true;

        if (d == Discipline::PreemptionThreshold) {
            // Restart before the start charges O^{pt,s}; after the start, O^{pt,f}.
            const TimeValue& o_start = *terms.breakdown.pt_start;
            const TimeValue& o_finish = *terms.breakdown.pt_finish;
            std::optional<JobTiming> worst;
            auto scenario = [&](const TimeValue& start_overhead, const TimeValue& finish_overhead) {
                FixedPoint s = start_time(ts, i, terms.blocking + prior, start_overhead, bound);
                if (!s.converged) {
                    ok = false;
                    worst = JobTiming{k, s.value, s.value, s.value - arrival};
                    return;
                }
                FixedPoint f = finish_time_pt(ts, i, s.value, finish_overhead, bound);
                JobTiming jt{k, s.value, f.value, f.value - arrival};
                if (!f.converged)
                    ok = false;
                if (!worst || jt.finish > worst->finish)
                    worst = jt;
            };
            if (opts.pt_after_start == PtAfterStartCharge::Requeue) {
                scenario(o_start, TimeValue(0));
                if (ok)
                    scenario(o_finish, TimeValue(0));
            } else {
                scenario(o_start, TimeValue(0));
                if (ok)
                    scenario(TimeValue(0), o_finish);
            }
            job = *worst;
        } else {
            const TimeValue q = d == Discipline::NonPreemptiveEnding ? q_of(ts, i) : t.wcet;
            FixedPoint s = start_time(ts, i, terms.blocking + prior + (t.wcet - q), terms.breakdown.overhead, bound);
            job.start = s.value;
            job.finish = s.value + q;
            job.response = job.finish - arrival;
            ok = s.converged && job.response <= t.deadline;
        }

        out.timings.push_back(job);
        if (first || job.response > out.response)
            out.response = job.response;
        first = false;
        if (!ok) {
            out.converged = false;
            break;
        }
    }
    return out;
}

Outcome response(const TaskSet& ts, Discipline d, std::size_t i, const SchemeTerms& terms,
                 const AnalysisOptions& opts)
{
    if (d == Discipline::FullyPreemptive)
        return response_preemptive(ts, i, terms);
    return response_multi_job(ts, d, i, terms, opts);
}

AnalysisReport analyze(const TaskSet& ts, Discipline d, const AnalysisOptions& opts)
{
    require_valid(ts, d);
    AnalysisReport report;
    report.discipline = d;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        report.tasks.push_back(analyze_task(ts, d, i, std::nullopt, opts));
        const TaskAnalysis& ta = report.tasks.back();
        if (!(ta.schedulable && ta.ideal_schedulable)) {
            report.feasible = false;
            if (!report.first_violation)
                report.first_violation = ta.id;
        }
    }
    return report;
}

} // namespace

InvalidTaskSetError::InvalidTaskSetError(const std::vector<Violation>& violations)
    : std::invalid_argument(describe(violations)), violations_(violations)
{
}

ActivePeriod level_i_active_period(const TaskSet& ts, std::size_t i, const TimeValue& overhead,
                                   const TimeValue& blocking, const AnalysisOptions& opts)
{
    const Task& t = ts[i];
    TimeValue fixed = blocking + overhead;
    TimeValue seed = fixed + sum_wcet(ts, 0, i + 1);
    // sum ceil(L/T_j) C_j >= U L, so no fixed point exists once U > 1, or U = 1 with extra demand
    TimeValue u(0);
    for (std::size_t j = 0; j < i; ++j)
        u += ts[j].wcet / ts[j].period;
    TimeValue extra = fixed;
    if (opts.active_period_self_interference)
        u += t.wcet / t.period;
    else
        extra += t.wcet;
    auto finish = [&](const TimeValue& length, bool converged) {
        ActivePeriod out;
        out.length = length;
        out.converged = converged;
        TimeValue jobs(std::max<std::int64_t>(1, length.ceil_div(t.period)));
        if (jobs > TimeValue(opts.max_active_period_jobs)) {
            out.converged = false;
            jobs = TimeValue(opts.max_active_period_jobs);
        }
        out.jobs = static_cast<int>(jobs.numerator());
        return out;
    };
    auto demand = [&](const TimeValue& x) {
        TimeValue next = fixed;
        for (std::size_t j = 0; j < i; ++j)
            next += ts[j].wcet * TimeValue(x.ceil_div(ts[j].period));
        next += opts.active_period_self_interference ? t.wcet * TimeValue(x.ceil_div(t.period)) : t.wcet;
        return next;
    };
    // report the first iterate past the deadline
    auto diverged = [&] { return finish(iterate(seed, max(seed, t.deadline), demand).value, false); };
    if (u > TimeValue(1) || (u == TimeValue(1) && extra > TimeValue(0)))
        return diverged();
    // At U = 1 the demand meets t only at common multiples of the periods.
    if (u == TimeValue(1) && opts.active_period_self_interference && !opts.active_period_bound) {
        try {
            TimeValue h = ts[0].period;
            for (std::size_t j = 1; j <= i; ++j)
                h = lcm(h, ts[j].period);
            if (h / t.period > TimeValue(opts.max_active_period_jobs))
                return finish(h, false);
            return finish(h, true);
        } catch (const ArithmeticCapacityError&) {
            return diverged();
        }
    }
    TimeValue bound = opts.active_period_bound ? *opts.active_period_bound
                                               : default_active_period_bound(ts, i, seed);
    if (bound / t.period > TimeValue(opts.max_active_period_jobs))
        bound = t.period * TimeValue(opts.max_active_period_jobs);
    FixedPoint l = iterate(seed, bound, demand);
    return finish(l.value, l.converged);
}

TimeValue wcwe_npe(const TaskSet& ts, std::size_t upto)
{
    TimeValue w = ts[0].wcet;
    for (std::size_t i = 1; i <= upto; ++i)
        w = ts[i].wcet + max(TimeValue(0), w - q_of(ts, i));
    return w;
}

TimeValue wcwe_pt(const TaskSet& ts, std::size_t i)
{
    return wcwe_pt_all(ts, i)[i];
}

TaskAnalysis analyze_task(const TaskSet& ts, Discipline d, std::size_t i, std::optional<TimeValue> blocking_override,
                          const AnalysisOptions& opts)
{
    const Task& t = ts[i];
    TaskAnalysis ta;
    ta.id = t.id;

    SchemeTerms terms = scheme_terms(ts, d, i, true, blocking_override);
    Outcome real = response(ts, d, i, terms, opts);
    ta.blocking = terms.blocking;
    ta.breakdown = terms.breakdown;
    ta.response = real.response;
    ta.jobs = real.jobs;
    ta.converged = real.converged;
    ta.job_timings = std::move(real.timings);
    ta.schedulable = real.converged && real.response <= t.deadline;

    if (terms.breakdown.overhead.is_zero()) {
        ta.ideal_response = ta.response;
        ta.ideal_converged = ta.converged;
    } else {
        SchemeTerms ideal_terms = scheme_terms(ts, d, i, false, blocking_override);
        Outcome ideal = response(ts, d, i, ideal_terms, opts);
        ta.ideal_response = ideal.response;
        ta.ideal_converged = ideal.converged;
    }
    ta.ideal_schedulable = ta.ideal_converged && ta.ideal_response <= t.deadline;
    return ta;
}

AnalysisReport rta_preemptive(const TaskSet& ts, const AnalysisOptions& opts)
{
    return analyze(ts, Discipline::FullyPreemptive, opts);
}

AnalysisReport rta_nonpreemptive(const TaskSet& ts, const AnalysisOptions& opts)
{
    return analyze(ts, Discipline::FullyNonPreemptive, opts);
}

AnalysisReport rta_npe(const TaskSet& ts, const AnalysisOptions& opts)
{
    return analyze(ts, Discipline::NonPreemptiveEnding, opts);
}

AnalysisReport rta_pt(const TaskSet& ts, const AnalysisOptions& opts)
{
    return analyze(ts, Discipline::PreemptionThreshold, opts);
}

AnalysisReport rbr_feasible(const TaskSet& ts, const SchemeConfig& scheme, const AnalysisOptions& opts)
{
    return analyze(ts, scheme.discipline, opts);
}

std::vector<TimeValue> ideal_response_times(const TaskSet& ts, const SchemeConfig& scheme, const AnalysisOptions& opts)
{
    AnalysisReport report = analyze(ts, scheme.discipline, opts);
    std::vector<TimeValue> out;
    out.reserve(report.tasks.size());
    for (const TaskAnalysis& ta : report.tasks)
        out.push_back(ta.ideal_response);
    return out;
}

} // namespace rbr
