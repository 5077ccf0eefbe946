// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "rmv/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rmv/error.hpp"
#include "rmv/hjb.hpp"
#include "rmv/parallel.hpp"
#include "rmv/random.hpp"

namespace rmv
{
namespace
{
bool in_open_unit(double x) { return x > 0 && x < 1; }

void require_surface(ValueSurface const& w, DoublingConfig const& cfg, char const* name)
{
    std::ostringstream os;
    os << name << " surface does not match the time grid and family";
    require(w.times == cfg.times && w.family_size == cfg.family.size() &&
                w.values.size() == w.times.size() * w.family_size,
            ErrorCode::dimension_mismatch, os.str());
}

// Random probability measure in the closure: projected uniform points, random weights.
EmpiricalMeasure random_measure(Domain const& dom, CounterRng const& rng, std::uint64_t id,
                                std::size_t n)
{
    std::size_t d = dom.dim();
    std::vector<double> pts(n * d), w(n), y(d);
    double total = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t k = 0; k < d; ++k)
            y[k] = dom.lower()[k] + rng.uniform(id, i, k) * (dom.upper()[k] - dom.lower()[k]);
        dom.project(y, std::span(pts).subspan(i * d, d));
        total += (w[i] = rng.uniform(id, i, d) + 0.05);
    }
    for (auto& x : w)
        x /= total;
    return EmpiricalMeasure(d, std::move(pts), std::move(w));
}
}  // namespace

void DoublingConfig::validate() const
{
    require(in_open_unit(beta), ErrorCode::invalid_argument, "beta must lie in (0, 1)");
    require(in_open_unit(lambda), ErrorCode::invalid_argument, "lambda must lie in (0, 1)");
    require(in_open_unit(delta), ErrorCode::invalid_argument, "delta must lie in (0, 1)");
    require(truncation >= 1, ErrorCode::invalid_argument, "truncation must be positive");
    require(horizon > 0, ErrorCode::invalid_argument, "horizon must be positive");
    require(!times.empty(), ErrorCode::invalid_argument, "times must not be empty");
    for (double t : times)
        require(t > 0 && t <= horizon, ErrorCode::invalid_argument, "times must lie in (0, T]");
    require(!family.empty(), ErrorCode::invalid_argument, "family must not be empty");
}

ValueSurface ValueSurface::constant(std::vector<double> times, std::size_t family_size, double c)
{
    ValueSurface v;
    v.values.assign(times.size() * family_size, c);
    v.times = std::move(times);
    v.family_size = family_size;
    return v;
}

SeparationTable::SeparationTable(std::shared_ptr<PolyFamily const> fam,
                                 std::vector<EmpiricalMeasure> const& family, int kmax)
    : fam_(std::move(fam)), family_(family), kmax_(kmax), n_(family.size())
{
    require(fam_ != nullptr, ErrorCode::invalid_argument, "separation table needs a family");
    s_.assign(n_ * n_, 0.0);
    tail_.assign(n_ * n_, 0.0);
    parallel_for(n_ * n_, [&](std::size_t k) {
        std::size_t i = k / n_, j = k % n_;
        if (j <= i)
            return;
        auto v = fam_->S(SignedCombo::difference(family_[i], family_[j]), kmax_);
        s_[i * n_ + j] = s_[j * n_ + i] = v.value;
        tail_[i * n_ + j] = tail_[j * n_ + i] = v.tail_bound;
    });
}

PhiTerms phi_eval(ValueSurface const& w, ValueSurface const& v, std::size_t ti, std::size_t si,
                  std::size_t mi, std::size_t ni, DoublingConfig const& cfg,
                  SeparationTable const& table)
{
    require(ti < cfg.times.size() && si < cfg.times.size() && mi < table.size() &&
                ni < table.size(),
            ErrorCode::invalid_argument, "family index out of range");
    double t = cfg.times[ti], s = cfg.times[si];
    PhiTerms p;
    p.gap = w.at(ti, mi) - v.at(si, ni);
    p.separation = (t - s) * (t - s) + table.s(mi, ni);
    p.s_tail = table.tail(mi, ni);
    // Written symmetrically in (t, s) so swapping the arguments is bit-identical.
    p.penalty = p.separation / (2 * cfg.delta) + cfg.beta * (2 * cfg.horizon - (t + s)) +
                (cfg.lambda / t + cfg.lambda / s);
    p.value = p.gap - p.penalty;
    return p;
}

DoublingResult doubling_maximize(ValueSurface const& w, ValueSurface const& v,
                                 DoublingConfig const& cfg, SeparationTable const& table)
{
    cfg.validate();
    require_surface(w, cfg, "W");
    require_surface(v, cfg, "V");
    require(table.size() == cfg.family.size(), ErrorCode::dimension_mismatch,
            "separation table does not match the family");
    std::size_t nt = cfg.times.size(), nf = table.size();

    // One candidate per ti, each scanned in lexicographic order; strict > keeps ties early.
    struct Best
    {
        double value = -std::numeric_limits<double>::infinity();
        std::size_t si = 0, mi = 0, ni = 0;
    };
    std::vector<Best> best(nt);
    parallel_for(nt, [&](std::size_t ti) {
        Best b;
        for (std::size_t si = 0; si < nt; ++si)
            for (std::size_t mi = 0; mi < nf; ++mi)
                for (std::size_t ni = 0; ni < nf; ++ni)
                {
                    double val = phi_eval(w, v, ti, si, mi, ni, cfg, table).value;
                    if (val > b.value)
                        b = {val, si, mi, ni};
                }
        best[ti] = b;
    });
    std::size_t ti = 0;
    for (std::size_t k = 1; k < nt; ++k)
        if (best[k].value > best[ti].value)
            ti = k;

    DoublingResult r;
    r.delta = cfg.delta;
    r.ti = ti;
    r.si = best[ti].si;
    r.mi = best[ti].mi;
    r.ni = best[ti].ni;
    r.t0 = cfg.times[r.ti];
    r.s0 = cfg.times[r.si];
    r.at = phi_eval(w, v, r.ti, r.si, r.mi, r.ni, cfg, table);
    r.quantity = r.at.separation / cfg.delta;
    r.value_difference =
        w.at(r.ti, r.mi) - w.at(r.si, r.ni) + v.at(r.ti, r.mi) - v.at(r.si, r.ni);
    r.at_horizon = r.t0 == cfg.horizon || r.s0 == cfg.horizon;
    return r;
}

DeltaSweep delta_sweep(ValueSurface const& w, ValueSurface const& v, DoublingConfig cfg,
                       SeparationTable const& table, std::vector<double> const& deltas)
{
    require(!deltas.empty(), ErrorCode::invalid_argument, "delta sweep needs at least one delta");
    for (std::size_t k = 1; k < deltas.size(); ++k)
        require(deltas[k] < deltas[k - 1], ErrorCode::invalid_argument,
                "deltas must be strictly decreasing");
    DeltaSweep sweep;
    sweep.quantity_monotone = sweep.separation_monotone = true;
    for (double d : deltas)
    {
        cfg.delta = d;
        sweep.results.push_back(doubling_maximize(w, v, cfg, table));
        if (sweep.results.size() > 1)
        {
            auto const& prev = sweep.results[sweep.results.size() - 2];
            auto const& cur = sweep.results.back();
            sweep.quantity_monotone &= cur.quantity <= prev.quantity + 1e-12;
            sweep.separation_monotone &= cur.at.separation <= prev.at.separation + 1e-12;
        }
    }
    sweep.final_quantity = sweep.results.back().quantity;

    double res = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < cfg.times.size(); ++a)
        for (std::size_t b = 0; b < cfg.times.size(); ++b)
            if (a != b)
                res = std::min(res, std::pow(cfg.times[a] - cfg.times[b], 2));
    for (std::size_t i = 0; i < table.size(); ++i)
        for (std::size_t j = 0; j < table.size(); ++j)
            if (table.s(i, j) > 0)
                res = std::min(res, table.s(i, j));
    sweep.resolution = std::isfinite(res) ? res : 0.0;
    return sweep;
}

HamiltonianDifference hamiltonian_difference(ControlProblem const& prob, DoublingResult const& r,
                                             DoublingConfig const& cfg,
                                             SeparationTable const& table,
                                             std::vector<Point> const& alphas)
{
    require(!alphas.empty(), ErrorCode::invalid_argument, "need at least one control value");
    auto const& mu0 = table.family().at(r.mi);
    auto const& nu0 = table.family().at(r.ni);
    TimeFactor none{{0.0}, 0};
    double half = 1 / (2 * r.delta);
    // psi(., mu) carries S(mu - nu0) / (2 delta); psi~(., nu) carries -S(nu - mu0) / (2 delta).
    // Both have D^L = D^L S(mu0 - nu0) / (2 delta) at the maximizer.
    auto psi = Functional::time_augmented(
        none, {{TimeFactor{{half}, 0}, Functional::s_based(table.poly_family(), nu0, table.kmax())}});
    auto psi_tilde = Functional::time_augmented(
        none, {{TimeFactor{{-half}, 0}, Functional::s_based(table.poly_family(), mu0, table.kmax())}});

    HamiltonianDifference h;
    h.inf_total = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < alphas.size(); ++k)
    {
        auto pm = hamiltonian_parts(prob, r.t0, mu0, psi, alphas[k]);
        auto pn = hamiltonian_parts(prob, r.s0, nu0, psi_tilde, alphas[k]);
        double i = pn.drift - pm.drift, ii = pn.diffusion - pm.diffusion,
               iii = pn.running - pm.running;
        h.totals.push_back(i + ii + iii);
        if (h.totals.back() < h.inf_total)
        {
            h.inf_total = h.totals.back();
            h.best = k;
            h.term_i = i;
            h.term_ii = ii;
            h.term_iii = iii;
        }
    }
    h.time_gap = -2 * cfg.beta - cfg.lambda / (r.t0 * r.t0) - cfg.lambda / (r.s0 * r.s0);
    h.consistent = h.time_gap >= h.inf_total;
    return h;
}

CoefficientReport coefficient_inequality_suite(Domain const& domain, PolyFamily const& fam,
                                               std::uint64_t seed, std::size_t random_measures)
{
    require(domain.dim() == fam.dim(), ErrorCode::dimension_mismatch,
            "domain and family dimensions differ");
    std::size_t d = fam.dim();
    int k = fam.truncation();
    CoefficientReport rep;
    rep.truncation = k;
    rep.indices = fam.indices().size();
    rep.min_coefficient_ratio = std::numeric_limits<double>::infinity();
    auto name = [](MultiIndex const& n) {
        std::ostringstream os;
        os << "(";
        for (std::size_t i = 0; i < n.size(); ++i)
            os << (i ? "," : "") << n[i];
        os << ")";
        return os.str();
    };
    for (auto const& n : fam.indices())
    {
        double cn = fam.c_coefficient(n);
        for (auto const& l : fam.index_set(n))
        {
            double cl = fam.c_coefficient(l);
            ++rep.pairs_checked;
            rep.min_coefficient_ratio = std::min(rep.min_coefficient_ratio, cl / cn);
            if (cl < cn)
                fail(ErrorCode::check_failed,
                     "c_l < c_n for n = " + name(n) + ", l = " + name(l));
        }
    }

    rep.gradient_bound = d + d * std::ldexp(1.0, -k);
    rep.difference_bound = 4 + 4 * std::ldexp(1.0, -k);
    CounterRng rng(seed, 0);
    auto check_gradient = [&](EmpiricalMeasure const& nu, std::string const& what) {
        double g = fam.gradient_sum(nu);
        rep.max_gradient_sum = std::max(rep.max_gradient_sum, g);
        ++rep.measures_checked;
        if (g > rep.gradient_bound)
            fail(ErrorCode::check_failed, "gradient sum bound violated by " + what);
    };
    for (std::size_t m = 0; m < random_measures; ++m)
    {
        check_gradient(random_measure(domain, rng, 2 * m, 1 + m % 16), "random measure " + std::to_string(m));
        auto mu = random_measure(domain, rng, 2 * m, 1 + m % 16);
        auto nu = random_measure(domain, rng, 2 * m + 1, 1 + (m * 7) % 16);
        double s = fam.S(SignedCombo::difference(mu, nu)).value;
        rep.max_difference_s = std::max(rep.max_difference_s, s);
        if (s > rep.difference_bound)
            fail(ErrorCode::check_failed, "S(mu - nu) bound violated by pair " + std::to_string(m));
    }
    // Point masses at the corners of the bounding box, projected into the closure.
    for (std::size_t c = 0; c < (std::size_t{1} << d); ++c)
    {
        Point y(d);
        for (std::size_t i = 0; i < d; ++i)
            y[i] = (c >> i) & 1 ? domain.upper()[i] : domain.lower()[i];
        auto corner = domain.project(y);
        check_gradient(EmpiricalMeasure::dirac(corner), "corner point mass " + std::to_string(c));
    }
    return rep;
}
}  // namespace rmv
