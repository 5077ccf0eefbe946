// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "rmv/control.hpp"
#include "rmv/error.hpp"

using namespace rmv;

namespace
{
ControlProblem mr1()
{
    DriftSpec drift;
    drift.b0 = {0.25};
    drift.balpha = {1.0};
    drift.moments = {{{1}, {-0.5}}};
    RunningCost run;
    run.alpha_weight = 0.1;
    run.state_weight = 1;
    run.x_ref = {0.5};
    TerminalCost term;
    term.state_weight = 1;
    term.x_ref = {0.5};
    term.mean_weight = 1;
    term.m_ref = {0.5};
    return ControlProblem(Domain::interval(0, 1), {0.5}, 1.0, ControlSet{{-1}, {1}}, drift, run,
                          term, 1.0);
}

ControlProblem costs_only(double sigma, RunningCost run, TerminalCost term, double hi = 1)
{
    DriftSpec drift;
    drift.b0 = {0};
    drift.balpha = {1.0};
    return ControlProblem(Domain::interval(0, hi), {sigma}, 1.0, ControlSet{{-1}, {1}}, drift,
                          run, term);
}

std::vector<FeedbackPolicy> constants(std::vector<double> values)
{
    std::vector<FeedbackPolicy> out;
    for (double v : values)
        out.push_back(FeedbackPolicy::constant({v}, "a=" + std::to_string(v).substr(0, 5)));
    return out;
}

auto const uniform = InitialLaw::uniform_box({0.1}, {0.9});
}  // namespace

TEST_CASE("cost evaluation examples")
{
    TerminalCost one;
    one.constant = 1;
    auto p1 = costs_only(0.5, {}, one);
    auto j1 = evaluate_cost(p1, FeedbackPolicy::constant({0.3}), 0, uniform, {500, 1e-3, 1});
    CHECK(j1.value == 1.0);
    CHECK(j1.std_error == 0.0);

    RunningCost c;
    c.constant = 0.7;
    auto p2 = costs_only(0.5, c, {});
    auto j2 = evaluate_cost(p2, FeedbackPolicy::constant({0.0}), 0.25, uniform, {500, 1e-3, 1});
    CHECK(std::abs(j2.value - 0.7 * 0.75) <= 0.7 * 1e-3);

    // Deterministic flow: x_t = t from the origin, cost x_T.
    TerminalCost lin;
    lin.linear = {1.0};
    DriftSpec drift;
    drift.b0 = {1.0};
    ControlProblem ode(Domain::interval(0, 3), {0.0}, 1.0, ControlSet{{0}, {0}}, drift, {}, lin);
    auto j3 = evaluate_cost(ode, FeedbackPolicy::constant({0.0}), 0, InitialLaw::dirac({0.0}),
                            {64, 1.0 / 1024, 0});
    CHECK(j3.value == 1.0);
    // At s = T nothing runs: the terminal cost of the starting law.
    auto j4 = evaluate_cost(ode, FeedbackPolicy::constant({0.0}), 1.0, InitialLaw::dirac({2.0}),
                            {64, 1.0 / 1024, 0});
    CHECK(j4.value == 2.0);
    CHECK(j4.running == 0.0);
    CHECK_THROWS_AS(evaluate_cost(ode, FeedbackPolicy::constant({0.0}), 1.5,
                                  InitialLaw::dirac({0.0}), {64, 1.0 / 1024, 0}),
                    Error);
}

TEST_CASE("running cost sees the control and the law")
{
    RunningCost run;
    run.alpha_weight = 2;
    run.mean_weight = 1;
    run.m_ref = {0.0};
    DriftSpec drift;
    drift.b0 = {0};
    drift.balpha = {0.0};
    ControlProblem still(Domain::interval(0, 1), {0.0}, 1.0, ControlSet{{-1}, {1}}, drift, run, {});
    auto j = evaluate_cost(still, FeedbackPolicy::constant({0.5}), 0, InitialLaw::dirac({0.25}),
                           {10, 1.0 / 256, 0});
    CHECK(j.value == doctest::Approx(2 * 0.25 + 0.0625).epsilon(1e-14));
}

TEST_CASE("catalog closure")
{
    auto cat = PolicyCatalog::closed(constants({-0.5, 0.0, 0.5}), 0.5);
    CHECK(cat.is_closed());
    CHECK(cat.size() == 9);
    CHECK(cat.base_size() == 3);
    for (std::size_t i = 3; i < cat.size(); ++i)
    {
        CHECK(cat.head(i) != cat.tail(i));
        CHECK(cat.member(i).kind() == FeedbackPolicy::Kind::switched);
    }
    CHECK(PolicyCatalog::closed(constants({0.2}), 0.5).size() == 1);
    CHECK_FALSE(PolicyCatalog(constants({0.1, 0.2})).is_closed());
    CHECK_THROWS_AS(PolicyCatalog({}), Error);
}

TEST_CASE("value estimates")
{
    auto prob = mr1();
    SimParams sp{1000, 1e-2, 5};
    auto pol = FeedbackPolicy::constant({0.2});
    auto single = value_estimate(prob, PolicyCatalog({pol}), 0, uniform, sp);
    auto direct = evaluate_cost(prob, pol, 0, uniform, sp);
    CHECK(single.value == direct.value);
    CHECK(single.std_error == direct.std_error);

    RunningCost effort;
    effort.alpha_weight = 1;
    auto lazy = costs_only(0.5, effort, {});
    auto pick = value_estimate(lazy, PolicyCatalog(constants({1.0, 0.0})), 0, uniform, sp);
    CHECK(pick.best == 1);
    CHECK(pick.value == 0.0);

    auto small = value_estimate(prob, PolicyCatalog(constants({-0.5, 0.0, 0.5})), 0, uniform, sp);
    for (auto const& c : small.costs)
        CHECK(small.value <= c.value);
    auto big = value_estimate(prob, PolicyCatalog::closed(constants({-0.5, 0.0, 0.5}), 0.5), 0,
                              uniform, sp);
    CHECK(big.value <= small.value);
    CHECK(big.value >= 0);
    CHECK(big.value <= prob.running_cost_bound() * prob.horizon() + prob.terminal_cost_bound());
}

TEST_CASE("dynamic programming identity")
{
    auto prob = mr1();
    DppParams dp;
    dp.outer = {2000, 1e-2, 3};
    dp.inner_n = 500;

    auto one = PolicyCatalog::closed(constants({0.3}), 0.5);
    auto r1 = dpp_check(prob, one, 0, 0.5, uniform, dp);
    CHECK(r1.heads.size() == 1);
    CHECK(r1.within(3));

    auto cat = PolicyCatalog::closed(constants({-0.5, 0.0, 0.5}), 0.5);
    auto r = dpp_check(prob, cat, 0, 0.5, uniform, dp);
    CHECK(r.heads.size() == 3);
    CHECK(r.within(3));
    CHECK(r.ge_gap >= -3 * r.ge_std_error);
    CHECK(r.le_gap <= 3 * r.std_error);

    // sigma = 0, law-only terminal cost: both sides run the same deterministic flow.
    TerminalCost law_only;
    law_only.mean_weight = 1;
    law_only.m_ref = {0.5};
    DriftSpec drift;
    drift.b0 = {0};
    drift.balpha = {1.0};
    ControlProblem flow(Domain::interval(0, 1), {0.0}, 1.0, ControlSet{{-1}, {1}}, drift, {},
                        law_only);
    DppParams det;
    det.outer = {64, 1.0 / 256, 0};
    det.inner_n = 64;
    auto rd = dpp_check(flow, PolicyCatalog::closed(constants({-0.25, 0.25}), 0.5), 0, 0.5,
                        InitialLaw::dirac({0.2}), det);
    CHECK(rd.residual == 0.0);
    CHECK(rd.lhs.value == doctest::Approx(0.0025).epsilon(1e-9));

    CHECK_THROWS_AS(dpp_check(prob, PolicyCatalog(constants({0.1, 0.2})), 0, 0.5, uniform, dp),
                    Error);
    CHECK_THROWS_AS(dpp_check(prob, cat, 0, 0.25, uniform, dp), Error);
}

TEST_CASE("value regularity")
{
    RunningCost c;
    c.constant = 0.8;
    auto prob = costs_only(0.5, c, {});
    auto cat = PolicyCatalog(constants({0.0}));
    std::vector<ValuePoint> pts;
    for (double s : {0.0, 0.03125, 0.125, 0.5})
        pts.push_back({s, uniform});
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (int k = 0; k < 5; ++k)
        for (std::size_t b = 1; b < pts.size(); ++b)
            pairs.emplace_back(0, b);
    for (int k = 0; k < 5; ++k)
        pairs.emplace_back(1, 1);
    auto rep = regularity_check(prob, cat, pts, pairs, {200, 1.0 / 256, 0});
    for (auto const& p : rep.pairs)
    {
        if (p.a == p.b)
            CHECK(p.ratio == 0.0);
        else
        {
            CHECK(p.time_only);
            CHECK(p.dv == doctest::Approx(0.8 * p.ds).epsilon(1e-12));
        }
    }
    CHECK(rep.c_hat <= 0.8);
    CHECK(rep.c_hat == doctest::Approx(0.8 * std::sqrt(0.5)).epsilon(1e-5));
    CHECK(rep.time_only_slope == doctest::Approx(1.0).epsilon(1e-9));

    std::vector<std::pair<std::size_t, std::size_t>> few(pairs.begin(), pairs.begin() + 5);
    CHECK_THROWS_AS(regularity_check(prob, cat, pts, few, {200, 1.0 / 256, 0}), Error);

    // States differing in law.
    auto mr = mr1();
    std::vector<ValuePoint> laws{{0.0, InitialLaw::uniform_box({0.1}, {0.5})},
                                 {0.0, InitialLaw::uniform_box({0.3}, {0.7})},
                                 {0.0, InitialLaw::dirac({0.5})}};
    std::vector<std::pair<std::size_t, std::size_t>> lp;
    for (int k = 0; k < 7; ++k)
    {
        lp.emplace_back(0, 1);
        lp.emplace_back(1, 2);
        lp.emplace_back(0, 2);
    }
    auto lrep = regularity_check(mr, PolicyCatalog(constants({0.0, 0.25})), laws, lp,
                                 {1000, 1e-2, 2});
    CHECK(std::isfinite(lrep.c_hat));
    CHECK(lrep.c_hat > 0);
    CHECK(lrep.pairs[0].w2 == doctest::Approx(0.2).epsilon(1e-3));
    CHECK(std::isnan(lrep.time_only_slope));
}
