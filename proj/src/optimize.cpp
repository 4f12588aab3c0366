#include "rbr/optimize.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <stdexcept>
#include <utility>

namespace rbr {

namespace {

bool feasible_with_blocking(const TaskSet& ts, std::size_t i, const TimeValue& blocking, const AnalysisOptions& opts)
{
    return analyze_task(ts, Discipline::NonPreemptiveEnding, i, blocking, opts).schedulable;
}

std::optional<TimeValue> parameter_grid(const TaskSet& ts, std::size_t i)
{
    const TimeValue::Int cap = TimeValue::Int(1) << 60;
    TimeValue::Int den = 1;
    bool ok = true;
    auto add = [&](const TimeValue& v) {
        TimeValue::Int a = den, b = v.denominator();
        while (b != 0)
            a = std::exchange(b, a % b);
        if (v.denominator() / a > cap / den)
            ok = false;
        else
            den = den / a * v.denominator();
    };
    add(ts.restart().cost);
    for (std::size_t j = 0; j < ts.size(); ++j) {
        add(ts[j].wcet);
        add(ts[j].period);
        add(ts[j].deadline);
        if (j <= i && ts[j].q_end)
            add(*ts[j].q_end);
    }
    if (!ok)
        return std::nullopt;
    return TimeValue(TimeValue::Int(1), den);
}

struct Fitness {
    int feasible_tasks = 0;
    double slack = 0.0;

    bool operator<(const Fitness& o) const
    {
        if (feasible_tasks != o.feasible_tasks)
            return feasible_tasks < o.feasible_tasks;
        return slack < o.slack;
    }
};

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // [0, n)
    int below(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

} // namespace

BlockingTolerance blocking_tolerance(const TaskSet& ts, std::size_t i, const BlockingSearchOptions& opts)
{
    const Task& t = ts[i];
    BlockingTolerance out{t.id, TimeValue(0), false};
    TimeValue lo(0);
    TimeValue hi = t.period;
    if (!feasible_with_blocking(ts, i, lo, opts.analysis))
        return out;
    const TimeValue eps = opts.epsilon ? *opts.epsilon : t.period / TimeValue(std::int64_t(1) << 30);
    const TimeValue two(2);
    while (hi - lo > eps) {
        TimeValue mid = (lo + hi) / two;
        if (feasible_with_blocking(ts, i, mid, opts.analysis))
            lo = mid;
        else
            hi = mid;
    }
    // R grows at least as fast as B, so lo + (D - R(lo)) bounds beta from above.
    TaskAnalysis at_lo = analyze_task(ts, Discipline::NonPreemptiveEnding, i, lo, opts.analysis);
    TimeValue snap = lo + (t.deadline - at_lo.response);
    if (snap > lo && snap < hi && feasible_with_blocking(ts, i, snap, opts.analysis))
        lo = snap;
    // Feasibility only changes on the grid of the parameter denominators.
    if (std::optional<TimeValue> unit = parameter_grid(ts, i)) {
        try {
            TimeValue scaled = hi / *unit;
            TimeValue g = TimeValue(scaled.numerator() / scaled.denominator(), TimeValue::Int(1)) * *unit;
            if (g == hi)
                g -= *unit;
            if (g > lo && g < hi && feasible_with_blocking(ts, i, g, opts.analysis))
                lo = g;
        } catch (const ArithmeticCapacityError&) {
        }
    }
    out.beta = lo;
    out.resolvable = true;
    return out;
}

TaskSet with_q(const TaskSet& ts, const std::vector<TimeValue>& q)
{
    TaskSet out = ts;
    for (std::size_t i = 0; i < out.size() && i < q.size(); ++i)
        out[i].q_end = q[i];
    return out;
}

QAssignment optimal_q_assignment(const TaskSet& ts, const BlockingSearchOptions& opts)
{
    QAssignment out;
    if (ts.empty()) {
        out.found = true;
        return out;
    }
    TaskSet work = ts;
    for (Task& t : work.mutable_tasks())
        t.q_end.reset();

    std::vector<TimeValue> q;
    std::optional<TimeValue> min_beta;
    for (std::size_t i = 0; i < work.size(); ++i) {
        TimeValue qi = work[i].wcet;
        if (min_beta)
            qi = min(*min_beta, qi);
        q.push_back(qi);
        work[i].q_end = qi;

        BlockingTolerance beta = blocking_tolerance(work, i, opts);
        out.tolerances.push_back(beta);
        if (!beta.resolvable) {
            out.failed_task = beta.task_id;
            return out;
        }
        min_beta = min_beta ? min(*min_beta, beta.beta) : beta.beta;
    }
    out.found = true;
    out.q = std::move(q);
    return out;
}

void GaParams::validate() const
{
    if (population < 2)
        throw std::invalid_argument("GA population must be at least 2");
    if (generations < 0)
        throw std::invalid_argument("GA generations must be non-negative");
    if (mutation_rate < 0 || mutation_rate > 1 || crossover_rate < 0 || crossover_rate > 1)
        throw std::invalid_argument("GA rates must lie in [0, 1]");
    if (elitism < 0 || elitism > population)
        throw std::invalid_argument("GA elitism must lie in [0, population]");
    if (stall_generations < 0)
        throw std::invalid_argument("GA stall generations must be non-negative");
}

TaskSet with_thresholds(const TaskSet& ts, const std::vector<int>& thresholds)
{
    TaskSet out = ts;
    for (std::size_t i = 0; i < out.size() && i < thresholds.size(); ++i)
        out[i].threshold = thresholds[i];
    return out;
}

ThresholdAssignment ga_threshold_assignment(const TaskSet& ts, const GaParams& params, const AnalysisOptions& opts)
{
    params.validate();
    const std::size_t n = ts.size();
    ThresholdAssignment result;
    if (n == 0) {
        result.feasible = true;
        return result;
    }

    // Gene i holds the index of the task whose priority becomes lambda_i, in [0, i].
    using Genome = std::vector<int>;
    auto decode = [&](const Genome& g) {
        std::vector<int> lambda(n);
        for (std::size_t i = 0; i < n; ++i)
            lambda[i] = ts[static_cast<std::size_t>(g[i])].priority;
        return lambda;
    };

    std::map<Genome, Fitness> cache;
    auto fitness = [&](const Genome& g) -> Fitness {
        if (auto it = cache.find(g); it != cache.end())
            return it->second;
        TaskSet candidate = with_thresholds(ts, decode(g));
        Fitness f;
        for (std::size_t i = 0; i < n; ++i) {
            TaskAnalysis ta = analyze_task(candidate, Discipline::PreemptionThreshold, i, std::nullopt, opts);
            if (ta.schedulable && ta.ideal_schedulable) {
                ++f.feasible_tasks;
                f.slack += ((candidate[i].deadline - ta.response) / candidate[i].deadline).to_double();
            }
        }
        cache.emplace(g, f);
        return f;
    };

    Rng rng(params.seed);
    std::vector<Genome> population;
    Genome own(n), top(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        own[i] = static_cast<int>(i);
    population.push_back(own);
    population.push_back(top);
    while (static_cast<int>(population.size()) < params.population) {
        Genome g(n);
        for (std::size_t i = 0; i < n; ++i)
            g[i] = rng.below(static_cast<int>(i) + 1);
        population.push_back(std::move(g));
    }

    auto rank = [&](std::vector<Genome>& pop) {
        std::vector<std::pair<Fitness, std::size_t>> scored;
        for (std::size_t k = 0; k < pop.size(); ++k)
            scored.emplace_back(fitness(pop[k]), k);
        // best first; ties keep population order
        std::stable_sort(scored.begin(), scored.end(),
                         [](const auto& a, const auto& b) { return b.first < a.first; });
        std::vector<Genome> sorted;
        for (const auto& s : scored)
            sorted.push_back(pop[s.second]);
        pop = std::move(sorted);
    };

    rank(population);
    int generation = 0;
    int stalled = 0;
    auto done = [&]() { return fitness(population.front()).feasible_tasks == static_cast<int>(n); };
    while (!done() && generation < params.generations &&
           (params.stall_generations == 0 || stalled < params.stall_generations)) {
        const Fitness before = fitness(population.front());
        auto tournament = [&]() -> const Genome& {
            const Genome& a = population[static_cast<std::size_t>(rng.below(params.population))];
            const Genome& b = population[static_cast<std::size_t>(rng.below(params.population))];
            return fitness(b) < fitness(a) ? a : b;
        };
        std::vector<Genome> next(population.begin(), population.begin() + params.elitism);
        while (static_cast<int>(next.size()) < params.population) {
            Genome child = tournament();
            const Genome& other = tournament();
            if (n > 1 && rng.unit() < params.crossover_rate) {
                std::size_t cut = 1 + static_cast<std::size_t>(rng.below(static_cast<int>(n) - 1));
                std::copy(other.begin() + static_cast<std::ptrdiff_t>(cut), other.end(),
                          child.begin() + static_cast<std::ptrdiff_t>(cut));
            }
            for (std::size_t i = 0; i < n; ++i)
                if (rng.unit() < params.mutation_rate)
                    child[i] = rng.below(static_cast<int>(i) + 1);
            next.push_back(std::move(child));
        }
        population = std::move(next);
        rank(population);
        ++generation;
        stalled = before < fitness(population.front()) ? 0 : stalled + 1;
    }

    const Genome& best = population.front();
    Fitness f = fitness(best);
    result.thresholds = decode(best);
    result.feasible_tasks = f.feasible_tasks;
    result.normalized_slack = f.slack;
    result.feasible = f.feasible_tasks == static_cast<int>(n);
    result.generations_run = generation;
    return result;
}

} // namespace rbr
