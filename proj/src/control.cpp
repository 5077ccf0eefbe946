// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "rmv/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rmv/error.hpp"
#include "rmv/measures.hpp"
#include "rmv/parallel.hpp"
#include "rmv/stats.hpp"

namespace rmv
{
namespace
{
ParticleEnsemble start(ControlProblem const& prob, InitialLaw const& law, double s,
                       SimParams const& params)
{
    auto ens = make_ensemble(law, params.n, s, params.seed, params.stream);
    for (std::size_t i = 0; i < ens.size(); ++i)
        require(prob.domain().in_closure(ens.position(i)), ErrorCode::out_of_domain,
                "initial law has support outside the domain");
    return ens;
}

// Per-particle running cost over [ens.t, t_end]; leaves the final ensemble in ens.
std::vector<double> run_costs(ControlProblem const& prob, FeedbackPolicy const& pol,
                              ParticleEnsemble& ens, double dt, double t_end)
{
    std::size_t n = ens.size(), m = prob.control_dim();
    std::vector<double> acc(n, 0.0);
    StepObserver obs = [&](ParticleEnsemble const& before, StepInfo const& info,
                           ParticleEnsemble const&) {
        auto const& alpha = *info.alpha;
        parallel_for(n, [&](std::size_t i) {
            std::span<const double> a(alpha.data() + i * m, m);
            acc[i] += prob.running_cost(info.t, before.position(i), *info.law, a) * info.dt;
        });
    };
    auto tr = simulate_from(std::move(ens), prob, pol, dt, t_end, {}, obs);
    ens = std::move(tr.snapshots.back());
    return acc;
}

CostEstimate summarize(std::vector<double> const& running, std::vector<double> const& terminal)
{
    std::vector<double> total(running.size());
    for (std::size_t i = 0; i < running.size(); ++i)
        total[i] = running[i] + (terminal.empty() ? 0.0 : terminal[i]);
    auto ms = mean_stderr(total);
    CostEstimate c;
    c.value = ms.mean;
    c.std_error = ms.std_error;
    c.running = mean_stderr(running).mean;
    c.terminal = terminal.empty() ? 0.0 : mean_stderr(terminal).mean;
    c.n = running.size();
    return c;
}

double quad(double a, double b) { return std::sqrt(a * a + b * b); }
}  // namespace

CostEstimate evaluate_cost(ControlProblem const& prob, FeedbackPolicy const& pol,
                           ParticleEnsemble ens, double dt)
{
    require(ens.t <= prob.horizon(), ErrorCode::invalid_argument,
            "cost evaluation needs s <= T");
    // At s = T only the terminal cost remains.
    auto running = ens.t < prob.horizon() ? run_costs(prob, pol, ens, dt, prob.horizon())
                                          : std::vector<double>(ens.size(), 0.0);
    auto law = LawStats::compute(ens.dim, ens.x, {}, {});
    std::vector<double> terminal(ens.size());
    parallel_for(ens.size(), [&](std::size_t i) {
        terminal[i] = prob.terminal_cost(ens.position(i), law);
    });
    return summarize(running, terminal);
}

CostEstimate evaluate_cost(ControlProblem const& prob, FeedbackPolicy const& pol, double s,
                           InitialLaw const& law, SimParams const& params)
{
    return evaluate_cost(prob, pol, start(prob, law, s, params), params.dt);
}

SegmentRun run_segment(ControlProblem const& prob, FeedbackPolicy const& pol,
                       ParticleEnsemble ens, double dt, double t_end)
{
    auto running = run_costs(prob, pol, ens, dt, t_end);
    return {summarize(running, {}), std::move(ens)};
}

//---------------------------------------------------------------------------//
PolicyCatalog::PolicyCatalog(std::vector<FeedbackPolicy> members)
    : members_(std::move(members)), base_(members_.size())
{
    require(!members_.empty(), ErrorCode::invalid_argument, "catalog must not be empty");
    for (std::size_t i = 0; i < base_; ++i)
    {
        head_.push_back(i);
        tail_.push_back(i);
    }
}

PolicyCatalog PolicyCatalog::closed(std::vector<FeedbackPolicy> base, double breakpoint)
{
    PolicyCatalog cat(std::move(base));
    std::size_t b = cat.base_;
    for (std::size_t p = 0; p < b; ++p)
        for (std::size_t q = 0; q < b; ++q)
        {
            if (p == q)
                continue;
            auto const& P = cat.members_[p];
            auto const& Q = cat.members_[q];
            std::string name = P.name() + "|" + Q.name();
            cat.members_.push_back(FeedbackPolicy::switched({breakpoint}, {P, Q}, name));
            cat.head_.push_back(p);
            cat.tail_.push_back(q);
        }
    cat.closed_ = true;
    cat.breakpoint_ = breakpoint;
    return cat;
}

ValueEstimate value_estimate(ControlProblem const& prob, PolicyCatalog const& catalog, double s,
                             InitialLaw const& law, SimParams const& params)
{
    auto ens = start(prob, law, s, params);
    ValueEstimate v;
    v.s = s;
    v.params = params;
    v.value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < catalog.size(); ++i)
    {
        v.costs.push_back(evaluate_cost(prob, catalog.member(i), ens, params.dt));
        if (v.costs.back().value < v.value)
        {
            v.value = v.costs.back().value;
            v.std_error = v.costs.back().std_error;
            v.best = i;
        }
    }
    v.policy = catalog.member(v.best).name();
    return v;
}

//---------------------------------------------------------------------------//
bool DppReport::within(double z) const
{
    return std::abs(residual) <= z * std_error;
}

DppReport dpp_check(ControlProblem const& prob, PolicyCatalog const& catalog, double s, double t,
                    InitialLaw const& law, DppParams const& params)
{
    require(catalog.is_closed(), ErrorCode::invalid_argument,
            "DPP check needs a catalog closed under switching");
    require(std::abs(catalog.breakpoint() - t) <= 1e-9, ErrorCode::invalid_argument,
            "catalog breakpoint must equal the intermediate time");
    require(s < t && t < prob.horizon(), ErrorCode::invalid_argument, "need s < t < T");

    DppReport rep;
    rep.s = s;
    rep.t = t;
    rep.lhs = value_estimate(prob, catalog, s, law, params.outer);

    // Restricted to [t, T] every member acts as one of the base policies.
    std::vector<FeedbackPolicy> base(catalog.members().begin(),
                                     catalog.members().begin() + catalog.base_size());
    PolicyCatalog tails(base);
    auto ens0 = start(prob, law, s, params.outer);
    rep.rhs = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < base.size(); ++p)
    {
        auto seg = run_segment(prob, base[p], ens0, params.outer.dt, t);
        DppHead h;
        h.policy = base[p].name();
        h.running = seg.cost;
        SimParams inner{params.inner_n, params.outer.dt, params.outer.seed,
                        params.outer.stream + 1 + p};
        h.inner = value_estimate(prob, tails, t, InitialLaw::empirical(seg.end.measure()), inner);
        h.total = h.running.value + h.inner.value;
        h.std_error = quad(h.running.std_error, h.inner.std_error);
        if (h.total < rep.rhs)
        {
            rep.rhs = h.total;
            rep.best_head = p;
        }
        rep.heads.push_back(std::move(h));
    }
    auto const& best = rep.heads[rep.best_head];
    rep.residual = rep.lhs.value - rep.rhs;
    rep.std_error = quad(rep.lhs.std_error, best.std_error);
    rep.le_gap = rep.residual;
    auto const& own = rep.heads[catalog.head(rep.lhs.best)];
    rep.ge_gap = rep.lhs.value - own.total;
    rep.ge_std_error = quad(rep.lhs.std_error, own.std_error);
    return rep;
}

//---------------------------------------------------------------------------//
RegularityReport regularity_check(ControlProblem const& prob, PolicyCatalog const& catalog,
                                  std::vector<ValuePoint> const& points,
                                  std::vector<std::pair<std::size_t, std::size_t>> const& pairs,
                                  SimParams const& params)
{
    require(pairs.size() >= 20, ErrorCode::invalid_argument,
            "regularity check needs at least 20 pairs");
    RegularityReport rep;
    for (auto const& pt : points)
        rep.values.push_back(value_estimate(prob, catalog, pt.s, pt.law, params));

    std::size_t d = prob.dim();
    std::size_t w2n = d == 1 ? params.n : std::min(params.n, kExactSupportLimit);
    auto sample = [&](std::size_t i) {
        std::vector<double> x(w2n * d);
        points.at(i).law.sample(w2n, params.seed, params.stream, x);
        return EmpiricalMeasure::uniform(d, x);
    };

    std::vector<double> ts, dvs;
    for (auto [a, b] : pairs)
    {
        RegularityPair rp;
        rp.a = a;
        rp.b = b;
        rp.ds = std::abs(points.at(a).s - points.at(b).s);
        rp.w2 = wasserstein(sample(a), sample(b), 2);
        rp.dv = std::abs(rep.values[a].value - rep.values[b].value);
        rp.ratio = rp.dv / (std::sqrt(rp.ds) + rp.w2 + rep.eps0);
        rp.time_only = rp.w2 == 0 && rp.ds > 0;
        rep.c_hat = std::max(rep.c_hat, rp.ratio);
        if (rp.time_only)
        {
            rep.time_only_max_ratio = std::max(rep.time_only_max_ratio, rp.dv / std::sqrt(rp.ds));
            if (rp.dv > 0)
            {
                ts.push_back(rp.ds);
                dvs.push_back(rp.dv);
            }
        }
        rep.pairs.push_back(rp);
    }
    bool spread = ts.size() >= 2 && *std::max_element(ts.begin(), ts.end()) >
                                        *std::min_element(ts.begin(), ts.end());
    rep.time_only_slope =
        spread ? loglog_slope(ts, dvs) : std::numeric_limits<double>::quiet_NaN();
    return rep;
}
}  // namespace rmv
