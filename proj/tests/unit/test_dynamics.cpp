// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "rmv/dynamics.hpp"
#include "rmv/error.hpp"

using namespace rmv;

namespace
{
ControlProblem simple_1d(double a, double b, double sigma, double b0, double horizon = 1)
{
    DriftSpec drift;
    drift.b0 = {b0};
    drift.balpha = {1.0};
    return ControlProblem(Domain::interval(a, b), {sigma}, horizon, ControlSet{{-1}, {1}},
                          drift, RunningCost{}, TerminalCost{});
}

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

auto zero = FeedbackPolicy::constant({0.0});
}  // namespace

TEST_CASE("single step examples")
{
    auto still = simple_1d(0, 1, 0, 0);
    auto ens = make_ensemble(InitialLaw::uniform_box({0.2}, {0.8}), 50, 0, 3);
    auto x0 = ens.x;
    reflected_euler_step(ens, still, zero, 0.01);
    CHECK(ens.x == x0);
    CHECK(ens.k == std::vector<double>(50, 0.0));

    auto noisy = simple_1d(0, 1, 1, 0);
    auto one = make_ensemble(InitialLaw::dirac({0.9}), 1, 0, 0);
    std::vector<double> xi{0.3};
    reflected_euler_step(one, noisy, zero, 1.0, xi);
    CHECK(one.x[0] == 1.0);
    CHECK(one.k[0] == doctest::Approx(0.2));

    auto inward = simple_1d(0, 1, 0, -1);
    auto top = make_ensemble(InitialLaw::dirac({1.0}), 1, 0, 0);
    reflected_euler_step(top, inward, zero, 0.01);
    CHECK(top.k[0] == 0);
    CHECK(top.x[0] == doctest::Approx(0.99));
}

TEST_CASE("reflected ODE oracles")
{
    double dt = 1.0 / 1024;
    auto free = simple_1d(0, 3, 0, 1);
    auto tr = simulate(free, zero, InitialLaw::dirac({0.0}), 0, {1, dt, 0});
    CHECK(tr.snapshots.back().x[0] == 1.0);
    auto capped = simple_1d(0, 0.5, 0, 1);
    tr = simulate(capped, zero, InitialLaw::dirac({0.0}), 0, {1, dt, 0});
    CHECK(tr.snapshots.back().x[0] == 0.5);
    CHECK(tr.snapshots.back().k[0] == 0.5);
}

TEST_CASE("ensemble invariants")
{
    auto prob = mr1();
    auto pol = FeedbackPolicy::constant({0.7});
    StepObserver obs = [&](ParticleEnsemble const& before, StepInfo const& info,
                           ParticleEnsemble const& after) {
        for (std::size_t i = 0; i < after.size(); ++i)
        {
            CHECK(prob.domain().in_closure(after.position(i)));
            CHECK(after.k[i] >= before.k[i]);
            if ((*info.delta)[i] > 0)
                CHECK(std::abs(std::abs((*info.normal)[i]) - 1) < 1e-12);
        }
    };
    simulate(prob, pol, InitialLaw::uniform_box({0.3}, {0.7}), 0, {200, 0.01, 5}, {}, obs);
}

TEST_CASE("local time vanishes when the ensemble stays interior")
{
    auto prob = simple_1d(0, 1, 0.01, 0);
    auto tr = simulate(prob, zero, InitialLaw::uniform_box({0.4}, {0.6}), 0, {100, 0.01, 9});
    for (double k : tr.snapshots.back().k)
        CHECK(k == 0);
}

TEST_CASE("seed determinism and thread independence")
{
    auto prob = mr1();
    auto pol = FeedbackPolicy::affine({0.1}, {{1}}, {{-0.5}}, {0.2});
    SimParams p{500, 0.01, 42};
    setenv("MFC_THREADS", "1", 1);
    auto a = simulate(prob, pol, InitialLaw::uniform_box({0}, {1}), 0, p);
    setenv("MFC_THREADS", "4", 1);
    auto b = simulate(prob, pol, InitialLaw::uniform_box({0}, {1}), 0, p);
    unsetenv("MFC_THREADS");
    CHECK(a.snapshots.back().x == b.snapshots.back().x);
    CHECK(a.snapshots.back().k == b.snapshots.back().k);
    p.seed = 43;
    auto c = simulate(prob, pol, InitialLaw::uniform_box({0}, {1}), 0, p);
    CHECK(a.snapshots.back().x != c.snapshots.back().x);
}

TEST_CASE("snapshots")
{
    auto prob = mr1();
    auto tr = simulate(prob, zero, InitialLaw::dirac({0.5}), 0, {10, 0.01, 1}, {0.25, 0.5});
    REQUIRE(tr.times.size() == 4);
    CHECK(tr.times[tr.index_of(0.5)] == doctest::Approx(0.5));
    CHECK_THROWS_AS(simulate(prob, zero, InitialLaw::dirac({0.5}), 0, {10, 0.3, 1}), Error);
}

TEST_CASE("policies")
{
    ControlSet u{{-1}, {1}};
    LawStats law = LawStats::compute(1, std::vector<double>{0.2, 0.4}, {}, {{1}});
    std::vector<double> out(1), x{0.5};
    auto aff = FeedbackPolicy::affine({0.5}, {{1}}, {{2.0}}, {1.0});
    aff.evaluate(0, x, law, u, out);
    CHECK(out[0] == 1.0);  // 0.5 + 0.6 + 0.5 clipped
    auto sw = FeedbackPolicy::switched({0.5}, {FeedbackPolicy::constant({-0.3}),
                                               FeedbackPolicy::constant({0.8})});
    sw.evaluate(0.49, x, law, u, out);
    CHECK(out[0] == -0.3);
    sw.evaluate(0.5, x, law, u, out);
    CHECK(out[0] == 0.8);
    auto tab = FeedbackPolicy::tabulated({0, 0.5, 1}, {1}, {0, 0.5, 1}, {1, 2, 3, 4}, 1);
    tab.evaluate(0.7, x, law, ControlSet{{-10}, {10}}, out);
    CHECK(out[0] == 3);
    CHECK_FALSE(tab.admissible());
    CHECK(std::isinf(tab.lipschitz(Domain::interval(0, 1))));
    CHECK(aff.lipschitz(Domain::interval(0, 1)) == doctest::Approx(3));
}

TEST_CASE("problem validation")
{
    DriftSpec drift;
    drift.b0 = {0, 0};
    ControlProblem p(Domain::box({0, 0}, {1, 1}), {2, 0, 0, 0.5}, 1, ControlSet{{0}, {1}}, drift,
                     {}, {});
    CHECK(p.ellipticity() == doctest::Approx(4));
    CHECK_FALSE(p.degenerate());
    CHECK_THROWS_AS(ControlProblem(Domain::interval(0, 1), {1, 0}, 1, ControlSet{{0}, {1}},
                                   DriftSpec{}, {}, {}),
                    Error);
    CHECK_THROWS_AS(ControlProblem(Domain::interval(0, 1), {1}, 1, ControlSet{{1}, {0}},
                                   DriftSpec{}, {}, {}),
                    Error);
    auto m = mr1();
    CHECK(m.lipschitz_probe(3) <= m.k1() + 1e-12);
    CHECK(m.running_cost_bound() == doctest::Approx(0.1 + 0.25));
    CHECK(m.terminal_cost_bound() == doctest::Approx(0.5));
}

TEST_CASE("synchronous coupling")
{
    auto prob = mr1();
    SimParams p{400, 0.01, 7};
    auto same = synchronous_pair_simulate(prob, zero, InitialLaw::uniform_box({0}, {1}),
                                          InitialLaw::uniform_box({0}, {1}), 0, p, {0.5});
    auto rep = coupling_bound_check(same, 1.0);
    for (double l : rep.lhs)
        CHECK(l == 0);

    // Drift independent of state and law: differences persist until a wall is hit.
    auto flat = simple_1d(0, 1, 0.05, 0);
    auto pair = synchronous_pair_simulate(flat, zero, InitialLaw::uniform_box({0.45}, {0.5}),
                                          InitialLaw::uniform_box({0.5}, {0.55}), 0, {50, 0.01, 3},
                                          {0.1});
    auto const& a = pair.a.snapshots[1];
    auto const& b = pair.b.snapshots[1];
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.k[i] == 0 && b.k[i] == 0)
            CHECK(b.x[i] - a.x[i] == doctest::Approx(0.05).epsilon(1e-9));

    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        auto pr = synchronous_pair_simulate(prob, zero, InitialLaw::uniform_box({0}, {0.6}),
                                            InitialLaw::uniform_box({0.4}, {1}), 0,
                                            {300, 0.01, seed}, {0.5});
        auto r = coupling_bound_check(pr, 1.0);
        std::size_t k = pr.a.index_of(0.5);
        CHECK(r.rhs[k] == doctest::Approx(r.initial_gap * std::exp(2.0)));
        CHECK(r.lhs[k] <= r.rhs[k]);
        for (std::size_t j = 0; j < r.times.size(); ++j)
            CHECK(r.w2sq[j] <= r.lhs[j] + 1e-9);
    }
}
