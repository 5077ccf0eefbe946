// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "rmv/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rmv/comparison.hpp"
#include "rmv/control.hpp"
#include "rmv/error.hpp"
#include "rmv/fokkerplanck.hpp"
#include "rmv/hjb.hpp"
#include "rmv/measures.hpp"
#include "rmv/polyfam.hpp"
#include "rmv/stats.hpp"
#include "battery.hpp"

namespace rmv
{
void Table::add(std::vector<double> row)
{
    require(row.size() == columns.size(), ErrorCode::dimension_mismatch,
            "table row does not match the column layout");
    rows.push_back(std::move(row));
}

namespace
{
// Per-experiment overrides of the scheme; 0 keeps the scheme value.
struct Scale
{
    std::size_t n = 0;
    double dt = 0;

    SimParams params(SchemeConfig const& s, std::uint64_t seed_offset = 0) const
    {
        return {n ? n : s.n, dt > 0 ? dt : s.dt, s.seed + seed_offset, 0};
    }
};

Scale read_scale(Fields& f)
{
    Scale s;
    s.n = f.count("n", 0);
    if (f.has("dt"))
        s.dt = f.positive("dt");
    return s;
}

std::vector<double> sorted_times(Fields& f, std::string const& key, std::vector<double> fallback,
                                 double lo, double hi, bool strict_lo)
{
    auto ts = f.numbers(key, std::move(fallback));
    for (double t : ts)
        if (t > hi || t < lo || (strict_lo && t == lo))
            config_fail(f.at(key), "time outside the admissible range");
    if (!std::is_sorted(ts.begin(), ts.end()) ||
        std::adjacent_find(ts.begin(), ts.end()) != ts.end())
        config_fail(f.at(key), "times must be strictly increasing");
    return ts;
}

std::vector<FeedbackPolicy> constant_policies(std::vector<double> const& values, std::size_t m)
{
    std::vector<FeedbackPolicy> out;
    for (double v : values)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "a=%g", v);
        out.push_back(FeedbackPolicy::constant(Point(m, v), buf));
    }
    return out;
}

std::vector<double> control_values(Fields& f, ControlProblem const& prob)
{
    auto u = prob.controls();
    double mid = 0.5 * (u.lo[0] + u.hi[0]), half = 0.5 * (u.hi[0] - u.lo[0]);
    auto v = f.numbers("controls", {mid - 0.5 * half, mid, mid + 0.5 * half});
    for (double a : v)
        for (std::size_t k = 0; k < prob.control_dim(); ++k)
            if (a < u.lo[k] || a > u.hi[k])
                config_fail(f.at("controls"), "control value outside U");
    return v;
}

Functional test_functional(Domain const& dom)
{
    std::vector<int> modes(dom.dim(), 0);
    modes[0] = 1;
    if (dom.kind() == Domain::Kind::ball)
        return Functional::moment(BasisFunction::monomial(modes));
    return Functional::moment(BasisFunction::cosine(dom, modes));
}

}  // namespace

// Deterministic cloud filling [c - w/2, c + w/2] per axis (fractions of the box), projected
// onto the closure.
EmpiricalMeasure window_cloud(Domain const& dom, double center_frac, double width_frac,
                              std::size_t n)
{
    std::size_t d = dom.dim();
    std::vector<double> pts(n * d);
    for (std::size_t i = 0; i < n; ++i)
    {
        std::span<double> x(pts.data() + i * d, d);
        for (std::size_t k = 0; k < d; ++k)
        {
            // Golden-ratio offsets on the later axes keep the cloud space filling.
            double u = k == 0 ? (i + 0.5) / n
                              : std::fmod((i + 0.5) * (std::numbers::phi - 1) * (k + 1), 1.0);
            double lo = dom.lower()[k], w = dom.upper()[k] - lo;
            x[k] = lo + (center_frac - width_frac / 2 + u * width_frac) * w;
        }
        Point p = dom.project(x);
        std::copy(p.begin(), p.end(), x.begin());
    }
    return EmpiricalMeasure::uniform(d, pts);
}

namespace
{
//---------------------------------------------------------------------------//
struct SimulateOpts
{
    Scale scale;
    std::size_t checkpoints = 10;
};

SimulateOpts simulate_opts(Json const& j, ControlProblem const&)
{
    SimulateOpts o;
    Fields f(j, "experiments.simulate");
    o.scale = read_scale(f);
    o.checkpoints = f.count("checkpoints", o.checkpoints);
    if (o.checkpoints == 0)
        config_fail(f.at("checkpoints"), "must be positive");
    f.finish();
    return o;
}

std::vector<double> checkpoints(double s, double t, std::size_t k)
{
    std::vector<double> out;
    for (std::size_t i = 1; i <= k; ++i)
        out.push_back(s + (t - s) * static_cast<double>(i) / static_cast<double>(k));
    return out;
}

Report run_simulate(RunConfig const& cfg)
{
    auto o = simulate_opts(cfg.experiment("simulate"), cfg.problem);
    auto const& prob = cfg.problem;
    auto p = o.scale.params(cfg.scheme);
    auto traj = simulate(prob, cfg.policy, cfg.law, 0, p, checkpoints(0, prob.horizon(), o.checkpoints));
    std::size_t d = prob.dim();

    Report r;
    Table tab{"moments", {"t"}, {}};
    for (std::size_t k = 0; k < d; ++k)
        tab.columns.push_back("mean_" + std::to_string(k));
    tab.columns.insert(tab.columns.end(), {"variance", "mean_local_time", "boundary_fraction"});
    Plot plot{"mean", "Ensemble mean", "t", "mean", false, false, {}};
    plot.series.resize(d);
    for (std::size_t k = 0; k < d; ++k)
        plot.series[k].label = "x_" + std::to_string(k);
    for (std::size_t s = 0; s < traj.snapshots.size(); ++s)
    {
        auto const& e = traj.snapshots[s];
        std::vector<double> row{traj.times[s]}, mean(d, 0);
        double n = static_cast<double>(e.size());
        for (std::size_t i = 0; i < e.size(); ++i)
            for (std::size_t k = 0; k < d; ++k)
                mean[k] += e.x[i * d + k] / n;
        double var = 0, lt = 0, bnd = 0;
        for (std::size_t i = 0; i < e.size(); ++i)
        {
            for (std::size_t k = 0; k < d; ++k)
                var += (e.x[i * d + k] - mean[k]) * (e.x[i * d + k] - mean[k]) / n;
            lt += e.k[i] / n;
            bnd += (prob.domain().distance_to_boundary(e.position(i)) <= kBoundaryTol) / n;
        }
        row.insert(row.end(), mean.begin(), mean.end());
        row.insert(row.end(), {var, lt, bnd});
        tab.add(row);
        for (std::size_t k = 0; k < d; ++k)
        {
            plot.series[k].x.push_back(traj.times[s]);
            plot.series[k].y.push_back(mean[k]);
        }
    }
    r.summary = {{"n", p.n}, {"dt", p.dt}, {"seed", p.seed}, {"law", cfg.law.describe()},
                 {"policy", cfg.policy.name()}, {"final", tab.rows.back()}};
    r.tables.push_back(std::move(tab));
    r.plots.push_back(std::move(plot));
    return r;
}

//---------------------------------------------------------------------------//
struct CouplingOpts
{
    Scale scale;
    std::optional<InitialLaw> law_a, law_b;
    std::size_t seeds = 1;
    std::size_t checkpoints = 10;
    double slack = 0.05;
    double w2_tolerance = 1e-9;
};

CouplingOpts coupling_opts(Json const& j, ControlProblem const& prob)
{
    CouplingOpts o;
    Fields f(j, "experiments.coupling");
    o.scale = read_scale(f);
    if (auto const* a = f.get("law_a"))
        o.law_a = parse_law(*a, f.at("law_a"), prob.dim());
    if (auto const* b = f.get("law_b"))
        o.law_b = parse_law(*b, f.at("law_b"), prob.dim());
    o.seeds = f.count("seeds", o.seeds);
    o.checkpoints = f.count("checkpoints", o.checkpoints);
    if (o.seeds == 0 || o.checkpoints == 0)
        config_fail(f.path(), "seeds and checkpoints must be positive");
    o.slack = f.number("slack", o.slack);
    o.w2_tolerance = f.number("w2_tolerance", o.w2_tolerance);
    f.finish();
    return o;
}

}  // namespace

// Shared with the suite.
Report coupling_report(ControlProblem const& prob, FeedbackPolicy const& pol, InitialLaw const& a,
                       InitialLaw const& b, SimParams base, std::size_t seeds,
                       std::size_t checkpoints_count, double slack, double w2_tolerance)
{
    double k = closed_loop_k1(prob, pol);
    auto times = checkpoints(0, prob.horizon(), checkpoints_count);
    Report r;
    r.has_verdict = true;
    Table tab{"coupling", {"seed", "t", "lhs", "rhs", "w2sq"}, {}};
    double worst_ratio = 0, worst_w2 = -1e300, min_margin = 1e300;
    Plot plot{"coupling", "Synchronous coupling", "t", "E|X - X~|^2", false, true, {}};
    for (std::size_t s = 0; s < seeds; ++s)
    {
        SimParams p = base;
        p.seed = base.seed + s;
        auto pair = synchronous_pair_simulate(prob, pol, a, b, 0, p, times);
        auto rep = coupling_bound_check(pair, k);
        Series sl{"lhs seed " + std::to_string(p.seed), {}, {}},
            sr{"rhs seed " + std::to_string(p.seed), {}, {}};
        for (double t : times)
        {
            std::size_t j = pair.a.index_of(t);
            tab.add({static_cast<double>(p.seed), t, rep.lhs[j], rep.rhs[j], rep.w2sq[j]});
            double bound = rep.rhs[j] * (1 + slack);
            worst_ratio = std::max(worst_ratio, rep.rhs[j] > 0 ? rep.lhs[j] / rep.rhs[j] : 0.0);
            worst_w2 = std::max(worst_w2, rep.w2sq[j] - rep.lhs[j]);
            min_margin = std::min(min_margin, bound - rep.lhs[j]);
            min_margin = std::min(min_margin, rep.lhs[j] + w2_tolerance - rep.w2sq[j]);
            sl.x.push_back(t);
            sl.y.push_back(rep.lhs[j]);
            sr.x.push_back(t);
            sr.y.push_back(rep.rhs[j]);
        }
        if (s == 0)
        {
            plot.series.push_back(std::move(sl));
            plot.series.push_back(std::move(sr));
        }
    }
    r.passed = min_margin >= 0;
    r.summary = {{"k_effective", k},         {"seeds", seeds},          {"n", base.n},
                 {"dt", base.dt},            {"slack", slack},          {"max_ratio", worst_ratio},
                 {"max_w2_excess", worst_w2}, {"min_margin", min_margin}, {"passed", r.passed}};
    r.tables.push_back(std::move(tab));
    r.plots.push_back(std::move(plot));
    return r;
}

namespace
{
Report run_coupling(RunConfig const& cfg)
{
    auto o = coupling_opts(cfg.experiment("coupling"), cfg.problem);
    auto const& dom = cfg.problem.domain();
    Point lo = dom.lower(), hi = dom.upper(), la(lo), ha(hi), lb(lo), hb(hi);
    for (std::size_t k = 0; k < lo.size(); ++k)
    {
        ha[k] = lo[k] + 0.6 * (hi[k] - lo[k]);
        lb[k] = lo[k] + 0.4 * (hi[k] - lo[k]);
    }
    InitialLaw a = o.law_a ? *o.law_a : InitialLaw::uniform_box(la, ha);
    InitialLaw b = o.law_b ? *o.law_b : InitialLaw::uniform_box(lb, hb);
    return coupling_report(cfg.problem, cfg.policy, a, b, o.scale.params(cfg.scheme), o.seeds,
                           o.checkpoints, o.slack, o.w2_tolerance);
}

//---------------------------------------------------------------------------//
struct DppOpts
{
    Scale scale;
    std::size_t inner_n = 1000;
    std::vector<double> controls;
    double s = 0;
    double breakpoint = 0.5;
    double z = 3;
};

DppOpts dpp_opts(Json const& j, ControlProblem const& prob)
{
    DppOpts o;
    Fields f(j, "experiments.dpp");
    o.scale = read_scale(f);
    o.inner_n = f.count("inner_n", o.inner_n);
    o.controls = control_values(f, prob);
    o.s = f.number("s", 0);
    o.breakpoint = f.number("breakpoint", 0.5 * prob.horizon());
    if (!(o.s >= 0 && o.s < o.breakpoint && o.breakpoint < prob.horizon()))
        config_fail(f.at("breakpoint"), "need 0 <= s < breakpoint < T");
    o.z = f.positive("z", 3.0);
    f.finish();
    return o;
}

Json dpp_json(DppReport const& d)
{
    return {{"s", d.s},
            {"t", d.t},
            {"lhs", d.lhs.value},
            {"lhs_policy", d.lhs.policy},
            {"rhs", d.rhs},
            {"residual", d.residual},
            {"std_error", d.std_error},
            {"best_head", d.best_head},
            {"ge_gap", d.ge_gap},
            {"ge_std_error", d.ge_std_error},
            {"le_gap", d.le_gap}};
}

Table dpp_heads(DppReport const& d, std::string name)
{
    Table t{std::move(name), {"head", "running", "inner_value", "total", "std_error"}, {}};
    for (std::size_t h = 0; h < d.heads.size(); ++h)
        t.add({static_cast<double>(h), d.heads[h].running.value, d.heads[h].inner.value,
               d.heads[h].total, d.heads[h].std_error});
    return t;
}

Report run_dpp(RunConfig const& cfg)
{
    auto o = dpp_opts(cfg.experiment("dpp"), cfg.problem);
    DppParams dp;
    dp.outer = o.scale.params(cfg.scheme);
    dp.inner_n = o.inner_n;
    std::size_t m = cfg.problem.control_dim();
    auto cat = PolicyCatalog::closed(constant_policies(o.controls, m), o.breakpoint);
    auto one = PolicyCatalog::closed(constant_policies({o.controls[0]}, m), o.breakpoint);
    auto full = dpp_check(cfg.problem, cat, o.s, o.breakpoint, cfg.law, dp);
    auto single = dpp_check(cfg.problem, one, o.s, o.breakpoint, cfg.law, dp);
    Report r;
    r.has_verdict = true;
    r.passed = full.within(o.z) && single.within(o.z);
    r.summary = {{"catalog_size", cat.size()}, {"catalog", dpp_json(full)},
                 {"singleton", dpp_json(single)}, {"z", o.z}, {"passed", r.passed}};
    r.tables.push_back(dpp_heads(full, "heads"));
    return r;
}

//---------------------------------------------------------------------------//
struct RegularityOpts
{
    Scale scale{2000, 1e-2};
    std::vector<double> controls;
    std::vector<double> times;
    std::vector<InitialLaw> laws;
    std::size_t pairs = 50;
    bool doubling = true;
    double stability = 0.2;
};

RegularityOpts regularity_opts(Json const& j, ControlProblem const& prob)
{
    RegularityOpts o;
    Fields f(j, "experiments.regularity");
    auto sc = read_scale(f);
    if (sc.n)
        o.scale.n = sc.n;
    if (sc.dt > 0)
        o.scale.dt = sc.dt;
    o.controls = control_values(f, prob);
    double T = prob.horizon();
    o.times = sorted_times(f, "times", {0, T / 16, T / 8, T / 4, T / 2}, 0, T, false);
    if (auto const* lj = f.get("laws"))
    {
        if (!lj->is_array() || lj->empty())
            config_fail(f.at("laws"), "expected a nonempty array of laws");
        for (std::size_t i = 0; i < lj->size(); ++i)
            o.laws.push_back(parse_law((*lj)[i], f.at("laws") + "[" + std::to_string(i) + "]",
                                       prob.dim()));
    }
    else
    {
        auto const& dom = prob.domain();
        for (double c : {0.3, 0.5, 0.7})
        {
            Point lo = dom.lower(), hi = dom.upper();
            for (std::size_t k = 0; k < lo.size(); ++k)
            {
                double w = hi[k] - lo[k];
                hi[k] = lo[k] + (c + 0.2) * w;
                lo[k] = lo[k] + (c - 0.2) * w;
            }
            o.laws.push_back(InitialLaw::uniform_box(lo, hi));
        }
    }
    o.pairs = f.count("pairs", o.pairs);
    o.doubling = f.flag("doubling", o.doubling);
    o.stability = f.positive("stability", o.stability);
    f.finish();
    return o;
}

}  // namespace

Report regularity_report(ControlProblem const& prob, std::vector<double> const& controls,
                         std::vector<double> const& times, std::vector<InitialLaw> const& laws,
                         std::size_t max_pairs, SimParams p, bool doubling, double stability)
{
    std::vector<ValuePoint> pts;
    for (double s : times)
        for (auto const& l : laws)
            pts.push_back({s, l});
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < pts.size() && pairs.size() < max_pairs; ++a)
        for (std::size_t b = a + 1; b < pts.size() && pairs.size() < max_pairs; ++b)
            pairs.emplace_back(a, b);
    auto cat = PolicyCatalog(constant_policies(controls, prob.control_dim()));
    auto rep = regularity_check(prob, cat, pts, pairs, p);

    Report r;
    Table tab{"pairs", {"a", "b", "ds", "w2", "dv", "ratio", "time_only"}, {}};
    for (auto const& q : rep.pairs)
        tab.add({static_cast<double>(q.a), static_cast<double>(q.b), q.ds, q.w2, q.dv, q.ratio,
                 q.time_only ? 1.0 : 0.0});
    r.summary = {{"pairs", rep.pairs.size()},
                 {"c_hat", rep.c_hat},
                 {"eps0", rep.eps0},
                 {"n", p.n},
                 {"dt", p.dt},
                 {"time_only_max_ratio", rep.time_only_max_ratio},
                 {"time_only_slope", rep.time_only_slope}};
    bool finite = std::isfinite(rep.c_hat) && rep.c_hat > 0;
    // A sqrt envelope for the time increments: the log-log slope of |dV| is at least 1/2.
    bool envelope = std::isfinite(rep.time_only_slope) && rep.time_only_slope >= 0.5 - 0.05;
    r.has_verdict = true;
    r.passed = finite && envelope;
    if (doubling)
    {
        SimParams p2 = p;
        p2.n *= 2;
        auto rep2 = regularity_check(prob, cat, pts, pairs, p2);
        double change = std::abs(rep2.c_hat - rep.c_hat) / rep.c_hat;
        r.summary["c_hat_doubled"] = rep2.c_hat;
        r.summary["relative_change"] = change;
        r.summary["stability"] = stability;
        r.passed = r.passed && change <= stability;
    }
    r.summary["passed"] = r.passed;
    r.tables.push_back(std::move(tab));
    return r;
}

namespace
{
Report run_regularity(RunConfig const& cfg)
{
    auto o = regularity_opts(cfg.experiment("regularity"), cfg.problem);
    return regularity_report(cfg.problem, o.controls, o.times, o.laws, o.pairs,
                             o.scale.params(cfg.scheme), o.doubling, o.stability);
}

//---------------------------------------------------------------------------//
struct ChainOpts
{
    Scale scale;
    std::string functional = "cosine";
    std::vector<int> exps;
    double s = 0, t1 = 0, t2 = 0;
    std::size_t seeds = 1;
    bool refine = false;
};

ChainOpts chain_opts(Json const& j, ControlProblem const& prob)
{
    ChainOpts o;
    Fields f(j, "experiments.chainrule");
    o.scale = read_scale(f);
    o.functional = f.text("functional", o.functional);
    if (o.functional != "cosine" && o.functional != "polynomial")
        config_fail(f.at("functional"), "expected 'cosine' or 'polynomial'");
    std::vector<double> def(prob.dim(), 0.0);
    def[0] = 1;
    for (double e : f.numbers("exponents", def, prob.dim()))
    {
        if (e < 0 || e != std::floor(e))
            config_fail(f.at("exponents"), "exponents must be nonnegative integers");
        o.exps.push_back(static_cast<int>(e));
    }
    if (o.functional == "cosine" && prob.domain().kind() == Domain::Kind::ball)
        config_fail(f.at("functional"), "cosine functionals need an interval or a box");
    o.s = f.number("s", 0);
    o.t1 = f.number("t1", o.s);
    o.t2 = f.number("t2", prob.horizon());
    if (!(o.s <= o.t1 && o.t1 < o.t2 && o.t2 <= prob.horizon()))
        config_fail(f.at("t2"), "need s <= t1 < t2 <= T");
    o.seeds = f.count("seeds", o.seeds);
    o.refine = f.flag("refine", o.refine);
    f.finish();
    return o;
}

Report run_chainrule(RunConfig const& cfg)
{
    auto o = chain_opts(cfg.experiment("chainrule"), cfg.problem);
    auto const& dom = cfg.problem.domain();
    Functional u = o.functional == "cosine"
                       ? Functional::moment(BasisFunction::cosine(dom, o.exps))
                       : Functional::moment(BasisFunction::monomial(o.exps));
    Report r;
    Table tab{"runs",
              {"level", "seed", "n", "dt", "lhs", "rhs", "residual", "boundary", "martingale",
               "std_error", "contract_residual"},
              {}};
    std::vector<double> rms;
    for (int level = 0; level <= (o.refine ? 1 : 0); ++level)
    {
        double ss = 0;
        for (std::size_t k = 0; k < o.seeds; ++k)
        {
            auto p = o.scale.params(cfg.scheme, k);
            p.n <<= 2 * level;
            p.dt /= (1 << level);
            auto c = chainrule_check(cfg.problem, cfg.policy, u, cfg.law, o.s, o.t1, o.t2, p);
            tab.add({static_cast<double>(level), static_cast<double>(p.seed),
                     static_cast<double>(p.n), p.dt, c.lhs, c.rhs, c.residual, c.boundary,
                     c.martingale, c.std_error, c.contract_residual()});
            ss += c.contract_residual() * c.contract_residual();
        }
        rms.push_back(std::sqrt(ss / o.seeds));
    }
    r.summary = {{"functional", u.describe()},
                 {"boundary_compatible", u.boundary_compatible(dom, cfg.problem.diffusion())},
                 {"rms_contract_residual", rms}};
    if (rms.size() == 2)
        r.summary["refinement_ratio"] = rms[1] / rms[0];
    r.tables.push_back(std::move(tab));
    return r;
}

//---------------------------------------------------------------------------//
struct HamOpts
{
    Scale scale{2000, 1e-2};
    double t = 0.5;
    std::vector<std::size_t> sizes{100, 1000, 10000};
    std::size_t replicates = 8;
    std::size_t alphas = 21;
    std::vector<double> controls;
    std::vector<double> family_times;
    std::size_t family_laws = 5;
};

HamOpts ham_opts(Json const& j, ControlProblem const& prob)
{
    HamOpts o;
    Fields f(j, "experiments.hamiltonian");
    auto sc = read_scale(f);
    if (sc.n)
        o.scale.n = sc.n;
    if (sc.dt > 0)
        o.scale.dt = sc.dt;
    double T = prob.horizon();
    o.t = f.number("t", 0.5 * T);
    std::vector<double> sz;
    for (double v : f.numbers("sizes", {100, 1000, 10000}))
    {
        if (v < 1 || v != std::floor(v))
            config_fail(f.at("sizes"), "sizes must be positive integers");
        o.sizes.clear();
        sz.push_back(v);
    }
    o.sizes.assign(sz.begin(), sz.end());
    o.replicates = f.count("replicates", o.replicates);
    o.alphas = f.count("alphas", o.alphas);
    if (o.alphas < 2)
        config_fail(f.at("alphas"), "need at least two grid values");
    o.controls = control_values(f, prob);
    o.family_times =
        sorted_times(f, "family_times", {0.2 * T, 0.4 * T, 0.6 * T, 0.8 * T, T}, 0, T, true);
    o.family_laws = f.count("family_laws", o.family_laws);
    if (o.family_laws == 0)
        config_fail(f.at("family_laws"), "must be positive");
    f.finish();
    return o;
}

Json viscosity_json(ViscosityReport const& v, std::vector<FamilyPoint> const& fam)
{
    return {{"type", v.type == Extremum::maximum ? "subsolution" : "supersolution"},
            {"index", v.index},
            {"t", fam[v.index].t},
            {"residual", v.residual},
            {"satisfied", v.satisfied},
            {"margin", v.margin},
            {"identified", v.identified}};
}

Report run_hamiltonian(RunConfig const& cfg)
{
    auto o = ham_opts(cfg.experiment("hamiltonian"), cfg.problem);
    auto const& prob = cfg.problem;
    auto const& dom = prob.domain();
    std::size_t d = prob.dim(), m = prob.control_dim();
    Functional u = test_functional(dom);

    auto big = std::max<std::size_t>(*std::max_element(o.sizes.begin(), o.sizes.end()), 1);
    auto ens = make_ensemble(cfg.law, big, o.t, cfg.scheme.seed);
    auto mu = ens.measure();
    auto inf = hamiltonian_infimum(prob, o.t, mu, u);

    std::vector<Point> alphas;
    auto const& U = prob.controls();
    for (std::size_t k = 0; k < o.alphas; ++k)
    {
        Point a(m);
        for (std::size_t c = 0; c < m; ++c)
            a[c] = U.lo[c] + (U.hi[c] - U.lo[c]) * k / (o.alphas - 1.0);
        alphas.push_back(a);
    }
    auto cont = hamiltonian_continuity(prob, o.t, mu, u, o.sizes, alphas, cfg.scheme.seed + 1,
                                       o.replicates);

    Report r;
    Table ct{"continuity", {"n", "w1", "max_diff"}, {}};
    Plot cp{"continuity", "Hamiltonian under subsampling", "W1", "max |dH|", true, true, {}};
    cp.series.push_back({"max_diff", {}, {}});
    for (auto const& c : cont)
    {
        ct.add({static_cast<double>(c.n), c.w1, c.max_diff});
        cp.series[0].x.push_back(c.w1);
        cp.series[0].y.push_back(c.max_diff);
    }

    // Viscosity inequalities on a finite (t, mu) family against a quadratic test function.
    std::vector<FamilyPoint> fam;
    std::vector<double> values;
    double se = 0;
    auto cat = PolicyCatalog(constant_policies(o.controls, m));
    for (double t : o.family_times)
        for (std::size_t k = 0; k < o.family_laws; ++k)
        {
            double c = 0.3 + 0.4 * (o.family_laws == 1 ? 0.5 : k / (o.family_laws - 1.0));
            auto cloud = window_cloud(dom, c, 0.4, 200);
            auto v = value_estimate(prob, cat, t, InitialLaw::empirical(cloud),
                                    o.scale.params(cfg.scheme, 100 + k));
            fam.push_back({t, cloud});
            values.push_back(v.value);
            se = std::max(se, v.std_error);
        }
    std::vector<BasisFunction::Term> terms;
    Point mid(d);
    for (std::size_t k = 0; k < d; ++k)
    {
        mid[k] = 0.5 * (dom.lower()[k] + dom.upper()[k]);
        MultiIndex e2(d, 0), e1(d, 0);
        e2[k] = 2;
        e1[k] = 1;
        terms.push_back({1.0, e2});
        terms.push_back({-2 * mid[k], e1});
        terms.push_back({mid[k] * mid[k], MultiIndex(d, 0)});
    }
    auto quad = Functional::moment(BasisFunction::polynomial(d, terms));
    double T = prob.horizon();
    auto psi = Functional::time_augmented(TimeFactor{{0.0}, 0},
                                          {{TimeFactor{{1.0 + T, -1.0}, 0}, quad}});
    auto sub = viscosity_test(prob, fam, values, psi, Extremum::maximum, std::nullopt, 0, se);
    auto sup = viscosity_test(prob, fam, values, psi, Extremum::minimum, std::nullopt, 0, se);
    Table vt{"family", {"t", "value", "gap"}, {}};
    for (std::size_t i = 0; i < fam.size(); ++i)
        vt.add({fam[i].t, values[i], sub.gaps[i]});

    r.summary = {{"t", o.t},
                 {"functional", u.describe()},
                 {"infimum", inf.value},
                 {"argmin", inf.alpha},
                 {"grid_infimum", inf.grid_value},
                 {"grid_argmin", inf.grid_alpha},
                 {"grid_tolerance", inf.grid_tolerance},
                 {"closed_vs_grid", std::abs(inf.value - inf.grid_value)},
                 {"test_function", psi.describe()},
                 {"value_std_error", se},
                 {"subsolution", viscosity_json(sub, fam)},
                 {"supersolution", viscosity_json(sup, fam)}};
    r.tables.push_back(std::move(ct));
    r.tables.push_back(std::move(vt));
    r.plots.push_back(std::move(cp));
    return r;
}

//---------------------------------------------------------------------------//
struct WassOpts
{
    std::size_t trials = 20;
    std::size_t n = 64;
    std::size_t dim = 1;
    double epsilon = 1e-3;
};

WassOpts wass_opts(Json const& j, ControlProblem const& prob)
{
    WassOpts o;
    Fields f(j, "experiments.wasserstein");
    o.trials = f.count("trials", o.trials);
    o.n = f.count("n", o.n);
    if (o.n == 0 || o.n > 512)
        config_fail(f.at("n"), "support size must be in [1, 512]");
    o.dim = f.count("dim", prob.dim());
    if (o.dim == 0)
        config_fail(f.at("dim"), "must be positive");
    o.epsilon = f.positive("epsilon", o.epsilon);
    f.finish();
    return o;
}

Report run_wasserstein(RunConfig const& cfg)
{
    auto o = wass_opts(cfg.experiment("wasserstein"), cfg.problem);
    std::mt19937_64 gen(cfg.scheme.seed);
    std::uniform_real_distribution<double> unif(0, 1);
    auto cloud = [&](std::size_t n) {
        std::vector<double> x(n * o.dim);
        for (auto& v : x)
            v = unif(gen);
        return EmpiricalMeasure::uniform(o.dim, x);
    };
    Report r;
    Table tab{"solvers", {"trial", "order", "exact", "quantile", "sinkhorn", "dual_gap"}, {}};
    double worst_q = 0, worst_s = 0, worst_dual = -1e300;
    for (std::size_t t = 0; t < o.trials; ++t)
    {
        auto a = cloud(o.n), b = cloud(o.n);
        for (int p : {1, 2})
        {
            double ex = wasserstein_exact(a, b, p).value;
            double q = o.dim == 1 ? wasserstein_1d_quantile(a, b, p) : NAN;
            double diam2 = static_cast<double>(o.dim);
            auto sk = wasserstein_sinkhorn(a, b, p, o.epsilon * (p == 2 ? diam2 : std::sqrt(diam2)));
            // The identity map scaled to unit Lipschitz constant is a dual candidate for W1.
            double gap = NAN;
            if (p == 1)
            {
                ScalarFunction h = [d = o.dim](std::span<const double> x) {
                    double s = 0;
                    for (double v : x)
                        s += v;
                    return s / std::sqrt(static_cast<double>(d));
                };
                gap = w1_dual_gap(a, b, h);
                worst_dual = std::max(worst_dual, gap - ex);
            }
            tab.add({static_cast<double>(t), static_cast<double>(p), ex, q, sk.value, gap});
            if (o.dim == 1)
                worst_q = std::max(worst_q, std::abs(ex - q));
            worst_s = std::max(worst_s, std::abs(ex - sk.value));
        }
    }
    r.summary = {{"trials", o.trials},
                 {"n", o.n},
                 {"dim", o.dim},
                 {"max_exact_vs_quantile", o.dim == 1 ? Json(worst_q) : Json(nullptr)},
                 {"max_exact_vs_sinkhorn", worst_s},
                 {"max_dual_excess", worst_dual}};
    r.tables.push_back(std::move(tab));
    return r;
}

//---------------------------------------------------------------------------//
struct SfuncOpts
{
    std::size_t measures = 1000;
    std::size_t max_support = 9;
    int truncation = 0;
};

SfuncOpts sfunc_opts(Json const& j, ControlProblem const&)
{
    SfuncOpts o;
    Fields f(j, "experiments.sfunc");
    o.measures = f.count("measures", o.measures);
    o.max_support = f.count("max_support", o.max_support);
    if (o.max_support == 0)
        config_fail(f.at("max_support"), "must be positive");
    o.truncation = static_cast<int>(f.count("truncation", 0));
    f.finish();
    return o;
}

}  // namespace

EmpiricalMeasure random_measure(std::mt19937_64& gen, std::size_t n, Domain const& dom)
{
    std::uniform_real_distribution<double> u(0, 1);
    std::size_t d = dom.dim();
    std::vector<double> pts(n * d), w(n);
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        std::span<double> x(pts.data() + i * d, d);
        for (std::size_t k = 0; k < d; ++k)
            x[k] = dom.lower()[k] + u(gen) * (dom.upper()[k] - dom.lower()[k]);
        Point p = dom.project(x);
        std::copy(p.begin(), p.end(), x.begin());
        s += (w[i] = u(gen) + 0.05);
    }
    for (auto& x : w)
        x /= s;
    return EmpiricalMeasure(d, pts, w);
}

namespace
{
Report run_sfunc(RunConfig const& cfg)
{
    auto o = sfunc_opts(cfg.experiment("sfunc"), cfg.problem);
    int k = o.truncation > 0 ? o.truncation : cfg.scheme.truncation;
    auto const& dom = cfg.problem.domain();
    PolyFamily fam(dom, k);
    std::size_t d = fam.dim();

    Report r;
    Table ft{"family", {"k", "level"}, {}};
    for (std::size_t a = 0; a < d; ++a)
        ft.columns.push_back("n_" + std::to_string(a));
    ft.columns.insert(ft.columns.end(), {"s_coefficient", "c_coefficient"});
    for (std::size_t j = 0; j < fam.indices().size(); ++j)
    {
        auto const& n = fam.indices()[j];
        std::vector<double> row{static_cast<double>(j), static_cast<double>(level(n))};
        for (int v : n)
            row.push_back(v);
        row.push_back(fam.s_coefficient(n));
        row.push_back(fam.c_cached(j));
        ft.add(row);
    }
    Table et{"enumeration", {"j", "degree", "derivative_index"}, {}};
    for (std::size_t j = 1; j <= fam.enumeration_size(); ++j)
        et.add({static_cast<double>(j), static_cast<double>(fam.f(j).degree()),
                static_cast<double>(fam.derivative_index(j))});

    std::mt19937_64 gen(cfg.scheme.seed);
    double max_s = 0, max_st = 0, max_grad = 0;
    std::size_t violations = 0;
    double tail = std::ldexp(1.0, -k);
    for (std::size_t t = 0; t < o.measures; ++t)
    {
        auto mu = random_measure(gen, 1 + t % o.max_support, dom);
        auto s = fam.S(mu);
        max_s = std::max(max_s, s.value);
        max_st = std::max(max_st, s.value + s.tail_bound);
        max_grad = std::max(max_grad, fam.gradient_sum(mu));
        violations += s.value > 1 || s.value + s.tail_bound > 1 + tail;
    }
    auto coef = coefficient_inequality_suite(dom, fam, cfg.scheme.seed);
    r.has_verdict = true;
    r.passed = violations == 0;
    r.summary = {{"truncation", k},
                 {"depth", fam.depth()},
                 {"indices", fam.indices().size()},
                 {"measures", o.measures},
                 {"max_S", max_s},
                 {"max_S_plus_tail", max_st},
                 {"max_gradient_sum", max_grad},
                 {"violations", violations},
                 {"coefficients",
                  {{"min_ratio", coef.min_coefficient_ratio},
                   {"max_gradient_sum", coef.max_gradient_sum},
                   {"gradient_bound", coef.gradient_bound},
                   {"max_difference_s", coef.max_difference_s},
                   {"difference_bound", coef.difference_bound}}},
                 {"passed", r.passed}};
    r.tables.push_back(std::move(ft));
    r.tables.push_back(std::move(et));
    return r;
}

//---------------------------------------------------------------------------//
struct FpOpts
{
    Scale scale;
    std::size_t cells = 64;
    double grid_dt = 0;
    double t_end = 0;
};

FpOpts fp_opts(Json const& j, ControlProblem const& prob)
{
    FpOpts o;
    Fields f(j, "experiments.fp");
    o.scale = read_scale(f);
    o.cells = f.count("cells", o.cells);
    if (o.cells < 4)
        config_fail(f.at("cells"), "need at least 4 cells per axis");
    o.grid_dt = f.number("grid_dt", 0);
    o.t_end = f.number("t_end", prob.horizon());
    if (!(o.t_end > 0 && o.t_end <= prob.horizon()))
        config_fail(f.at("t_end"), "must lie in (0, T]");
    f.finish();
    return o;
}

Report run_fp(RunConfig const& cfg)
{
    auto o = fp_opts(cfg.experiment("fp"), cfg.problem);
    auto const& prob = cfg.problem;
    Grid g = Grid::on(prob.domain(), o.cells);
    auto const& dom = prob.domain();
    auto r0 = density_from(g, [&](std::span<const double> x) {
        double v = 1;
        for (std::size_t k = 0; k < x.size(); ++k)
            v *= 1 + 0.8 * std::cos(std::numbers::pi * (x[k] - dom.lower()[k]) /
                                    (dom.upper()[k] - dom.lower()[k]));
        return v;
    });
    double bmax = 0;
    // Crude sup of the drift over the closure (moments are bounded by the box).
    auto const& ds = prob.drift_spec();
    for (std::size_t i = 0; i < prob.dim(); ++i)
    {
        double b = std::abs(ds.b0[i]);
        for (auto const& t : ds.moments)
        {
            double mom = 1;
            for (std::size_t k = 0; k < t.exponents.size(); ++k)
                mom *= std::pow(std::max(std::abs(dom.lower()[k]), std::abs(dom.upper()[k])),
                                t.exponents[k]);
            b += std::abs(t.beta[i]) * mom;
        }
        for (std::size_t k = 0; k < prob.control_dim() && !ds.balpha.empty(); ++k)
            b += std::abs(ds.balpha[i * prob.control_dim() + k]) *
                 std::max(std::abs(prob.controls().lo[k]), std::abs(prob.controls().hi[k]));
        for (std::size_t k = 0; k < prob.dim() && !ds.bx.empty(); ++k)
            b += std::abs(ds.bx[i * prob.dim() + k]) *
                 std::max(std::abs(dom.lower()[k]), std::abs(dom.upper()[k]));
        bmax = std::max(bmax, b);
    }
    double dt = o.grid_dt > 0 ? o.grid_dt : 0.9 * fp_stable_step(g, prob.diffusion(), bmax);
    std::size_t steps = static_cast<std::size_t>(std::ceil(o.t_end / dt));
    dt = o.t_end / steps;
    FpOptions fo;
    fo.store_every = std::max<std::size_t>(1, steps / 100);
    auto tr = fp_solve(prob, cfg.policy, r0, dt, o.t_end, fo);
    auto cont = continuity_residual(tr, prob, cfg.policy);

    Report r;
    r.summary = {{"cells", o.cells},
                 {"grid_dt", dt},
                 {"steps", tr.steps},
                 {"max_mass_error", tr.max_mass_error},
                 {"min_value", tr.min_value},
                 {"continuity_residual", cont.residual}};
    if (prob.dim() == 1)
    {
        auto law = InitialLaw::density_1d(dom.lower()[0], dom.upper()[0], r0.rho);
        auto p = o.scale.params(cfg.scheme);
        auto ps = simulate_from(make_ensemble(law, p.n, 0, p.seed), prob, cfg.policy, p.dt, o.t_end);
        auto hist = histogram(g, ps.snapshots.back().measure());
        r.summary["particle_l1"] = l1_distance(hist, tr.densities.back());
        r.summary["particles"] = p.n;
        Table dt_tab{"density", {"x", "grid", "particles"}, {}};
        Plot plot{"density", "Density at the final time", "x", "density", false, false, {}};
        plot.series = {{"grid", {}, {}}, {"particles", {}, {}}};
        auto centers = g.centers();
        for (std::size_t c = 0; c < g.cells(); ++c)
        {
            dt_tab.add({centers[c], tr.densities.back().rho[c], hist.rho[c]});
            plot.series[0].x.push_back(centers[c]);
            plot.series[0].y.push_back(tr.densities.back().rho[c]);
            plot.series[1].x.push_back(centers[c]);
            plot.series[1].y.push_back(hist.rho[c]);
        }
        r.tables.push_back(std::move(dt_tab));
        r.plots.push_back(std::move(plot));
    }
    Table ct{"continuity", {"test", "residual"}, {}};
    for (std::size_t k = 0; k < cont.per_test.size(); ++k)
        ct.add({static_cast<double>(k), cont.per_test[k]});
    r.tables.push_back(std::move(ct));
    return r;
}

//---------------------------------------------------------------------------//
struct HeatOpts
{
    double sigma = 0;
    std::vector<double> times{0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
    std::vector<double> short_times;
};

HeatOpts heat_opts(Json const& j, ControlProblem const& prob)
{
    HeatOpts o;
    Fields f(j, "experiments.heatfit");
    if (prob.dim() != 1)
        config_fail("experiments.heatfit", "the reflected kernel fit is one-dimensional");
    o.sigma = f.positive("sigma", prob.sigma()[0] == 0 ? 1.0 : std::abs(prob.sigma()[0]));
    o.times = sorted_times(f, "times", o.times, 0, 1e9, true);
    std::vector<double> st;
    for (double t = 1e-4; t <= 1e-2 * (1 + 1e-12); t *= 1.5)
        st.push_back(t);
    o.short_times = sorted_times(f, "short_times", st, 0, 1e9, true);
    f.finish();
    return o;
}

}  // namespace

HeatFit heat_sandwich(double sigma, double a, double b, std::vector<double> const& times,
                      std::vector<HeatSample>& samples)
{
    // Time is rescaled by sigma^2 so the bounds are stated for unit diffusion.
    for (double t : times)
        for (int i = 0; i <= 10; ++i)
            for (int jj = 0; jj <= 10; ++jj)
            {
                double x = a + (b - a) * i / 10.0, y = a + (b - a) * jj / 10.0;
                samples.push_back({x, y, sigma * sigma * t,
                                   reflected_bm_density_1d(t, x, y, sigma, a, b)});
            }
    return heat_bound_fit(samples, 1);
}

double heat_short_slope(double sigma, double a, double b, std::vector<double> const& ts)
{
    std::vector<double> ps;
    double mid = 0.5 * (a + b);
    for (double t : ts)
        ps.push_back(reflected_bm_density_1d(t, mid, mid, sigma, a, b));
    return loglog_slope(ts, ps);
}

namespace
{
Report run_heatfit(RunConfig const& cfg)
{
    auto o = heat_opts(cfg.experiment("heatfit"), cfg.problem);
    double a = cfg.problem.domain().lower()[0], b = cfg.problem.domain().upper()[0];
    std::vector<HeatSample> samples;
    auto fit = heat_sandwich(o.sigma, a, b, o.times, samples);
    double slope = heat_short_slope(o.sigma, a, b, o.short_times);
    Report r;
    Table tab{"samples", {"x", "y", "t", "p"}, {}};
    for (auto const& s : samples)
        tab.add({s.x, s.y, s.t, s.p});
    r.summary = {{"sigma", o.sigma},
                 {"feasible", fit.feasible},
                 {"kappa1", fit.kappa1},
                 {"kappa2", fit.kappa2},
                 {"short_time_slope", slope},
                 {"slope_error", std::abs(slope + 0.5)}};
    r.tables.push_back(std::move(tab));
    return r;
}

//---------------------------------------------------------------------------//
struct DoublingOpts
{
    Scale scale{2000, 1e-2};
    double beta = 0.1, lambda = 0.01;
    std::vector<double> deltas{1e-1, 1e-2, 1e-3, 1e-4};
    std::vector<double> times;
    std::size_t family_size = 5;
    std::size_t cloud = 200;
    std::vector<double> controls;
    int truncation = 0;
};

DoublingOpts doubling_opts(Json const& j, ControlProblem const& prob)
{
    DoublingOpts o;
    Fields f(j, "experiments.doubling");
    auto sc = read_scale(f);
    if (sc.n)
        o.scale.n = sc.n;
    if (sc.dt > 0)
        o.scale.dt = sc.dt;
    o.beta = f.positive("beta", o.beta);
    o.lambda = f.positive("lambda", o.lambda);
    o.deltas = f.numbers("deltas", o.deltas);
    for (std::size_t k = 0; k < o.deltas.size(); ++k)
        if (!(o.deltas[k] > 0 && o.deltas[k] < 1) || (k && o.deltas[k] >= o.deltas[k - 1]))
            config_fail(f.at("deltas"), "deltas must be strictly decreasing in (0, 1)");
    if (o.beta >= 1 || o.lambda >= 1)
        config_fail(f.path(), "beta and lambda must lie in (0, 1)");
    double T = prob.horizon();
    o.times = sorted_times(f, "times", {0.25 * T, 0.5 * T, 0.75 * T, T}, 0, T, true);
    o.family_size = f.count("family_size", o.family_size);
    o.cloud = f.count("cloud", o.cloud);
    if (o.family_size == 0 || o.cloud == 0)
        config_fail(f.path(), "family_size and cloud must be positive");
    o.controls = control_values(f, prob);
    o.truncation = static_cast<int>(f.count("truncation", 0));
    f.finish();
    return o;
}

}  // namespace

// Restricted value surface on times x family, by the constant-control catalog.
ValueSurface restricted_value(ControlProblem const& prob, std::vector<double> const& controls,
                              std::vector<double> const& times,
                              std::vector<EmpiricalMeasure> const& family, SimParams p,
                              double* max_std_error)
{
    auto cat = PolicyCatalog(constant_policies(controls, prob.control_dim()));
    ValueSurface v{times, family.size(), {}};
    double se = 0;
    for (double t : times)
        for (std::size_t k = 0; k < family.size(); ++k)
        {
            SimParams q = p;
            q.seed = p.seed + k;
            auto e = value_estimate(prob, cat, t, InitialLaw::empirical(family[k]), q);
            v.values.push_back(e.value);
            se = std::max(se, e.std_error);
        }
    if (max_std_error)
        *max_std_error = se;
    return v;
}

std::vector<EmpiricalMeasure> shifted_family(Domain const& dom, std::size_t count, std::size_t cloud)
{
    std::vector<EmpiricalMeasure> fam;
    for (std::size_t k = 0; k < count; ++k)
    {
        double c = 0.3 + 0.4 * (count == 1 ? 0.5 : k / (count - 1.0));
        fam.push_back(window_cloud(dom, c, 0.4, cloud));
    }
    return fam;
}

Json doubling_json(DoublingResult const& d)
{
    return {{"delta", d.delta},
            {"t0", d.t0},
            {"s0", d.s0},
            {"mu0", d.mi},
            {"nu0", d.ni},
            {"phi", d.at.value},
            {"separation", d.at.separation},
            {"quantity", d.quantity},
            {"value_difference", d.value_difference},
            {"at_horizon", d.at_horizon}};
}

namespace
{
Report run_doubling(RunConfig const& cfg)
{
    auto o = doubling_opts(cfg.experiment("doubling"), cfg.problem);
    auto const& prob = cfg.problem;
    int k = o.truncation > 0 ? o.truncation : cfg.scheme.truncation;
    auto fam = shifted_family(prob.domain(), o.family_size, o.cloud);
    double se = 0;
    auto v = restricted_value(prob, o.controls, o.times, fam, o.scale.params(cfg.scheme), &se);

    DoublingConfig dc;
    dc.beta = o.beta;
    dc.lambda = o.lambda;
    dc.delta = o.deltas[0];
    dc.truncation = k;
    dc.horizon = prob.horizon();
    dc.times = o.times;
    dc.family = fam;
    auto poly = std::make_shared<PolyFamily const>(prob.domain(), k);
    SeparationTable table(poly, fam, k);

    auto zero = ValueSurface::constant(o.times, fam.size(), 0.0);
    auto analytic = doubling_maximize(zero, zero, dc, table);
    auto sweep = delta_sweep(v, v, dc, table, o.deltas);

    std::vector<Point> alphas;
    auto const& U = prob.controls();
    for (int a = 0; a <= 20; ++a)
    {
        Point al(prob.control_dim());
        for (std::size_t c = 0; c < al.size(); ++c)
            al[c] = U.lo[c] + (U.hi[c] - U.lo[c]) * a / 20.0;
        alphas.push_back(al);
    }
    dc.delta = sweep.results.back().delta;
    auto hd = hamiltonian_difference(prob, sweep.results.back(), dc, table, alphas);

    Report r;
    Table st{"sweep", {"delta", "t0", "s0", "mu0", "nu0", "phi", "separation", "quantity"}, {}};
    Plot plot{"sweep", "Doubling diagnostics", "delta", "separation / delta", true, false, {}};
    plot.series.push_back({"quantity", {}, {}});
    for (auto const& d : sweep.results)
    {
        st.add({d.delta, d.t0, d.s0, static_cast<double>(d.mi), static_cast<double>(d.ni),
                d.at.value, d.at.separation, d.quantity});
        plot.series[0].x.push_back(d.delta);
        plot.series[0].y.push_back(d.quantity);
    }
    Table vt{"values", {"t", "member", "value"}, {}};
    for (std::size_t ti = 0; ti < o.times.size(); ++ti)
        for (std::size_t m = 0; m < fam.size(); ++m)
            vt.add({o.times[ti], static_cast<double>(m), v.at(ti, m)});
    Json results = Json::array();
    for (auto const& d : sweep.results)
        results.push_back(doubling_json(d));
    r.summary = {{"truncation", k},
                 {"beta", o.beta},
                 {"lambda", o.lambda},
                 {"value_std_error", se},
                 {"analytic", {{"phi", analytic.at.value}, {"expected", -2 * o.lambda / prob.horizon()}}},
                 {"sweep", results},
                 {"quantity_monotone", sweep.quantity_monotone},
                 {"separation_monotone", sweep.separation_monotone},
                 {"final_quantity", sweep.final_quantity},
                 {"resolution", sweep.resolution},
                 {"hamiltonian_difference",
                  {{"term_i", hd.term_i},
                   {"term_ii", hd.term_ii},
                   {"term_iii", hd.term_iii},
                   {"inf_total", hd.inf_total},
                   {"time_gap", hd.time_gap},
                   {"consistent", hd.consistent}}}};
    r.tables.push_back(std::move(st));
    r.tables.push_back(std::move(vt));
    r.plots.push_back(std::move(plot));
    return r;
}
}  // namespace

//---------------------------------------------------------------------------//
std::vector<std::string> const& command_names()
{
    static std::vector<std::string> const names{
        "simulate", "coupling", "dpp", "regularity", "chainrule", "hamiltonian", "wasserstein",
        "sfunc",    "fp",       "heatfit", "doubling", "suite"};
    return names;
}

void validate_experiment(std::string const& command, Json const& block, ControlProblem const& prob)
{
    if (command == "simulate")
        simulate_opts(block, prob);
    else if (command == "coupling")
        coupling_opts(block, prob);
    else if (command == "dpp")
        dpp_opts(block, prob);
    else if (command == "regularity")
        regularity_opts(block, prob);
    else if (command == "chainrule")
        chain_opts(block, prob);
    else if (command == "hamiltonian")
        ham_opts(block, prob);
    else if (command == "wasserstein")
        wass_opts(block, prob);
    else if (command == "sfunc")
        sfunc_opts(block, prob);
    else if (command == "fp")
        fp_opts(block, prob);
    else if (command == "heatfit")
        heat_opts(block, prob);
    else if (command == "doubling")
        doubling_opts(block, prob);
    else if (command == "suite")
        Fields(block, "experiments.suite").finish();
    else
        config_fail("experiments." + command, "unknown subcommand");
}

Report run_command(std::string const& command, RunConfig const& cfg,
                   CriterionCallback const& on_criterion)
{
    Report r;
    if (command == "simulate")
        r = run_simulate(cfg);
    else if (command == "coupling")
        r = run_coupling(cfg);
    else if (command == "dpp")
        r = run_dpp(cfg);
    else if (command == "regularity")
        r = run_regularity(cfg);
    else if (command == "chainrule")
        r = run_chainrule(cfg);
    else if (command == "hamiltonian")
        r = run_hamiltonian(cfg);
    else if (command == "wasserstein")
        r = run_wasserstein(cfg);
    else if (command == "sfunc")
        r = run_sfunc(cfg);
    else if (command == "fp")
        r = run_fp(cfg);
    else if (command == "heatfit")
        r = run_heatfit(cfg);
    else if (command == "doubling")
        r = run_doubling(cfg);
    else if (command == "suite")
        r = run_suite(cfg.scheme.seed, on_criterion);
    else
        fail(ErrorCode::invalid_argument, "unknown subcommand '" + command + "'");
    r.command = command;
    return r;
}
}  // namespace rmv
