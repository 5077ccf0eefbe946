// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <memory>

#include "doctest.h"
#include "rmv/comparison.hpp"
#include "rmv/error.hpp"
#include "rmv/hjb.hpp"

using namespace rmv;

namespace
{
struct Setup
{
    DoublingConfig cfg;
    std::shared_ptr<PolyFamily const> fam;
    std::unique_ptr<SeparationTable> table;
};

Setup make_setup(int k = 6)
{
    Setup s;
    s.cfg.beta = 0.1;
    s.cfg.lambda = 0.01;
    s.cfg.delta = 0.1;
    s.cfg.truncation = k;
    s.cfg.horizon = 1;
    s.cfg.times = {0.25, 0.5, 0.75, 1.0};
    for (double c : {0.3, 0.4, 0.5, 0.6})
        s.cfg.family.push_back(EmpiricalMeasure::uniform(1, {c - 0.1, c, c + 0.1}));
    s.fam = std::make_shared<PolyFamily const>(Domain::interval(0, 1), k);
    s.table = std::make_unique<SeparationTable>(s.fam, s.cfg.family, k);
    return s;
}

// W(t, mu) = <mu, x> + t / 2 on the grid.
ValueSurface smooth(DoublingConfig const& cfg, double shift = 0)
{
    ValueSurface v = ValueSurface::constant(cfg.times, cfg.family.size(), 0);
    for (std::size_t ti = 0; ti < cfg.times.size(); ++ti)
        for (std::size_t mi = 0; mi < cfg.family.size(); ++mi)
        {
            auto const& mu = cfg.family[mi];
            double m = mu.integrate([](std::span<const double> x) { return x[0]; });
            v.values[ti * cfg.family.size() + mi] = m + cfg.times[ti] / 2 + shift;
        }
    return v;
}
}  // namespace

TEST_CASE("phi examples")
{
    auto s = make_setup();
    auto const& cfg = s.cfg;
    auto zero = ValueSurface::constant(cfg.times, cfg.family.size(), 0);
    auto p = phi_eval(zero, zero, 3, 3, 2, 2, cfg, *s.table);
    CHECK(p.value == -2 * cfg.lambda / cfg.horizon);
    CHECK(p.separation == 0.0);

    auto w = smooth(cfg, 0.3), v = smooth(cfg);
    auto q = phi_eval(w, v, 1, 1, 2, 2, cfg, *s.table);
    double t = cfg.times[1];
    CHECK(q.value == doctest::Approx(w.at(1, 2) - v.at(1, 2) - cfg.beta * (2 - 2 * t) -
                                     2 * cfg.lambda / t)
                         .epsilon(1e-15));

    auto tighter = cfg;
    tighter.delta = 0.01;
    CHECK(phi_eval(w, v, 1, 2, 0, 3, tighter, *s.table).value <
          phi_eval(w, v, 1, 2, 0, 3, cfg, *s.table).value);
    CHECK(s.table->s(0, 3) > 0);
    CHECK(s.table->tail(0, 3) == 4 * std::ldexp(1.0, -6));
}

TEST_CASE("phi is antisymmetric up to the penalties")
{
    auto s = make_setup();
    auto w = smooth(s.cfg, 0.2);
    auto v = ValueSurface::constant(s.cfg.times, s.cfg.family.size(), 0.1);
    for (std::size_t ti = 0; ti < 4; ++ti)
        for (std::size_t si = 0; si < 4; ++si)
            for (std::size_t mi = 0; mi < 4; ++mi)
                for (std::size_t ni = 0; ni < 4; ++ni)
                {
                    auto a = phi_eval(w, v, ti, si, mi, ni, s.cfg, *s.table);
                    auto b = phi_eval(v, w, si, ti, ni, mi, s.cfg, *s.table);
                    CHECK(a.gap + b.gap == 0.0);
                    CHECK(a.penalty == b.penalty);
                    CHECK(a.value + b.value == doctest::Approx(-2 * a.penalty).epsilon(1e-15));
                }
}

TEST_CASE("exhaustive maximization")
{
    auto s = make_setup();
    auto const& cfg = s.cfg;
    auto zero = ValueSurface::constant(cfg.times, cfg.family.size(), 0);
    auto r = doubling_maximize(zero, zero, cfg, *s.table);
    CHECK(r.t0 == cfg.horizon);
    CHECK(r.s0 == cfg.horizon);
    CHECK(r.mi == 0);
    CHECK(r.ni == 0);
    CHECK(r.at.value == -2 * cfg.lambda / cfg.horizon);
    CHECK(r.at_horizon);
    CHECK(r.quantity == 0.0);

    auto one = ValueSurface::constant(cfg.times, cfg.family.size(), 1);
    auto g = doubling_maximize(one, zero, cfg, *s.table);
    CHECK(g.at.value == doctest::Approx(1 - 2 * cfg.lambda / cfg.horizon).epsilon(1e-15));
    CHECK(g.t0 == g.s0);

    // Brute force with the same ordering.
    auto w = smooth(cfg, 0.5), v = smooth(cfg);
    auto m = doubling_maximize(w, v, cfg, *s.table);
    double best = -1e300;
    for (std::size_t ti = 0; ti < 4; ++ti)
        for (std::size_t si = 0; si < 4; ++si)
            for (std::size_t mi = 0; mi < 4; ++mi)
                for (std::size_t ni = 0; ni < 4; ++ni)
                    best = std::max(best, phi_eval(w, v, ti, si, mi, ni, cfg, *s.table).value);
    CHECK(m.at.value == best);
    CHECK(m.quantity <= m.value_difference + 1e-12);

    auto bad = cfg;
    bad.times.push_back(0.0);
    CHECK_THROWS_AS(doubling_maximize(zero, zero, bad, *s.table), Error);
    bad = cfg;
    bad.delta = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    auto wrong = ValueSurface::constant({0.5}, cfg.family.size(), 0);
    CHECK_THROWS_AS(doubling_maximize(wrong, zero, cfg, *s.table), Error);
}

TEST_CASE("delta sweep")
{
    auto s = make_setup();
    auto w = smooth(s.cfg);
    auto sweep = delta_sweep(w, w, s.cfg, *s.table, {0.5, 0.1, 1e-2, 1e-3, 1e-4});
    CHECK(sweep.results.size() == 5);
    // Exchange argument: the separation can only shrink as 1/delta grows.
    CHECK(sweep.separation_monotone);
    // The quotient can not: just before the maximizer leaves a neighbouring pair it
    // reaches about the value oscillation (0.2 here, at delta = 1e-2).
    CHECK_FALSE(sweep.quantity_monotone);
    CHECK(sweep.results[2].quantity == doctest::Approx(0.2038).epsilon(1e-3));
    CHECK(sweep.final_quantity == 0.0);
    CHECK(sweep.resolution > 0);
    for (auto const& r : sweep.results)
        CHECK(r.quantity <= r.value_difference + 1e-12);
    CHECK_THROWS_AS(delta_sweep(w, w, s.cfg, *s.table, {0.1, 0.2}), Error);
}

TEST_CASE("hamiltonian difference terms")
{
    auto s = make_setup();
    DriftSpec drift;
    drift.b0 = {0.25};
    drift.balpha = {1.0};
    drift.moments = {{{1}, {-0.5}}};
    RunningCost run;
    run.alpha_weight = 0.1;
    run.state_weight = 1;
    run.x_ref = {0.5};
    ControlProblem prob(Domain::interval(0, 1), {0.5}, 1.0, ControlSet{{-1}, {1}}, drift, run, {});
    std::vector<Point> alphas;
    for (int k = 0; k <= 8; ++k)
        alphas.push_back({-1 + 0.25 * k});

    DoublingResult r;
    r.delta = 0.05;
    r.ti = 1;
    r.si = 2;
    r.mi = 0;
    r.ni = 3;
    r.t0 = s.cfg.times[1];
    r.s0 = s.cfg.times[2];
    auto h = hamiltonian_difference(prob, r, s.cfg, *s.table, alphas);
    REQUIRE(h.totals.size() == alphas.size());

    // Direct route: the shared field D = D^L S(mu0 - nu0) / (2 delta).
    auto const& mu0 = s.cfg.family[0];
    auto const& nu0 = s.cfg.family[3];
    auto phi = s.fam->dl_S(SignedCombo::difference(mu0, nu0));
    auto side = [&](EmpiricalMeasure const& m, double t, Point const& a) {
        auto law = LawStats::compute(m, prob.drift_exponents());
        double sum = 0;
        std::vector<double> b(1), g(1), hh(1);
        for (std::size_t i = 0; i < m.size(); ++i)
        {
            prob.drift(t, m.point(i), law, a, b);
            phi.gradient(m.point(i), g);
            phi.hessian(m.point(i), hh);
            double dl = g[0] / (2 * r.delta), ddl = hh[0] / (2 * r.delta);
            sum += m.weight(i) * (b[0] * dl + 0.5 * 0.25 * ddl + prob.running_cost(t, m.point(i), law, a));
        }
        return sum;
    };
    for (std::size_t k = 0; k < alphas.size(); ++k)
        CHECK(h.totals[k] == doctest::Approx(side(nu0, r.s0, alphas[k]) - side(mu0, r.t0, alphas[k]))
                                 .epsilon(1e-12));
    CHECK(h.inf_total == doctest::Approx(h.term_i + h.term_ii + h.term_iii).epsilon(1e-14));
    CHECK(h.time_gap == doctest::Approx(-0.2 - 0.01 / 0.25 - 0.01 / 0.5625));

    // Coincident points: the field vanishes, only the running cost difference remains.
    r.ni = 0;
    r.s0 = r.t0;
    auto z = hamiltonian_difference(prob, r, s.cfg, *s.table, alphas);
    CHECK(std::abs(z.inf_total) <= 1e-15);
    CHECK(std::abs(z.term_i) <= 1e-15);
    CHECK(std::abs(z.term_ii) <= 1e-15);
}

TEST_CASE("coefficient inequalities")
{
    for (auto const& [dom, k] : {std::pair{Domain::interval(0, 1), 4},
                                 std::pair{Domain::interval(-1, 2), 8},
                                 std::pair{Domain::box({0, 0}, {1, 1}), 5},
                                 std::pair{Domain::ball({0, 0}, 1), 4}})
    {
        PolyFamily fam(dom, k);
        auto rep = coefficient_inequality_suite(dom, fam, 11);
        CHECK(rep.min_coefficient_ratio >= 1.0);
        CHECK(rep.pairs_checked > 0);
        CHECK(rep.max_gradient_sum <= rep.gradient_bound);
        CHECK(rep.max_difference_s <= rep.difference_bound);
        CHECK(rep.measures_checked == 100 + (std::size_t{1} << dom.dim()));
        CHECK(rep.gradient_bound == dom.dim() * (1 + std::ldexp(1.0, -k)));
    }
    PolyFamily unit(Domain::interval(0, 1), 4);
    CHECK(unit.c_coefficient({2}) == doctest::Approx(1.0 / 8));
    CHECK(unit.c_coefficient({1}) == doctest::Approx(1.0 / 24));
}
