// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rmv/error.hpp"
#include "rmv/fokkerplanck.hpp"

using namespace rmv;

namespace
{
ControlProblem heat(double sigma, double b0 = 0)
{
    DriftSpec drift;
    drift.b0 = {b0};
    drift.balpha = {0.0};
    return ControlProblem(Domain::interval(0, 1), {sigma}, 1.0, ControlSet{{0}, {0}}, drift, {},
                          {});
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

// Heat flow started from the reflected kernel at t0.
double heat_residual(std::size_t n)
{
    double const sigma = 1, t0 = 0.02, t1 = 0.1, x0 = 0.3;
    auto prob = heat(sigma);
    Grid g = Grid::on(prob.domain(), n);
    auto r0 = density_from(
        g, [&](auto x) { return reflected_bm_density_1d(t0, x0, x[0], sigma, 0, 1); });
    r0.t = t0;
    double dtmax = fp_stable_step(g, prob.diffusion(), 0);
    auto steps = static_cast<int>(std::ceil((t1 - t0) / dtmax / 0.9));
    FpOptions o;
    o.store_every = 1;
    auto tr = fp_solve(prob, zero, r0, (t1 - t0) / steps, t1, o);
    return continuity_residual(tr, prob, zero).residual;
}
}  // namespace

TEST_CASE("grid basics")
{
    Grid g = Grid::on(Domain::box({0, -1}, {2, 1}), 4);
    CHECK(g.cells() == 16);
    CHECK(g.h(0) == 0.5);
    CHECK(g.cell_volume() == 0.25);
    std::vector<double> c(2);
    g.center(5, c);
    CHECK(c[0] == 0.75);
    CHECK(c[1] == -0.25);
    std::vector<double> x{1.9, -0.99};
    CHECK(g.locate(x) == 3);
    CHECK_THROWS_AS(Grid::on(Domain::ball({0, 0}, 1), 8), Error);
}

TEST_CASE("uniform stays uniform without drift")
{
    auto prob = heat(0.7);
    Grid g = Grid::on(prob.domain(), 32);
    auto tr = fp_solve(prob, zero, uniform_density(g), 1e-3, 0.5);
    for (double r : tr.densities.back().rho)
        CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tr.max_mass_error < 1e-12);
}

TEST_CASE("diffusion relaxes to uniform and conserves mass")
{
    auto prob = heat(1.0);
    Grid g = Grid::on(prob.domain(), 32);
    auto r0 = density_from(g, [](auto x) { return std::exp(-50 * (x[0] - 0.2) * (x[0] - 0.2)); });
    CHECK(r0.mass() == doctest::Approx(1.0).epsilon(1e-13));
    FpOptions o;
    double dt = 1.0 / 2048;
    CHECK(dt <= fp_stable_step(g, prob.diffusion(), 0));
    o.snapshot_times = {0.0625, 2.0};
    auto tr = fp_solve(prob, zero, r0, dt, 2.0, o);
    auto flat = uniform_density(g);
    double early = l1_distance(tr.densities[tr.index_of(0.0625)], flat);
    double late = l1_distance(tr.densities.back(), flat);
    CHECK(late < early);
    // Slowest mode decays like exp(-pi^2 t / 2).
    CHECK(late < 1e-3);
    CHECK(tr.max_mass_error < 1e-12);
    CHECK(tr.min_value > 0);
}

TEST_CASE("stability conditions are enforced")
{
    auto prob = heat(1.0);
    Grid g = Grid::on(prob.domain(), 32);
    double dt = fp_stable_step(g, prob.diffusion(), 0);
    CHECK(dt == doctest::Approx(1.0 / (32.0 * 32.0)));
    CHECK_THROWS_AS(fp_solve(prob, zero, uniform_density(g), 1.5 * dt, 0.1), Error);
    // Drift dominating diffusion at the cell scale.
    auto peclet = heat(0.1, 5.0);
    CHECK_THROWS_AS(fp_solve(peclet, zero, uniform_density(g), 1e-5, 0.01), Error);
}

TEST_CASE("velocity field examples")
{
    auto prob = heat(1.0, 0.4);
    Grid g = Grid::on(prob.domain(), 16);
    auto v = velocity_field(uniform_density(g), prob, zero, 0);
    CHECK(v.masked == 0);
    for (double vi : v.v)
        CHECK(vi == doctest::Approx(0.4));

    auto bump = density_from(g, [](auto x) { return std::exp(-20 * (x[0] - 0.5) * (x[0] - 0.5)); });
    auto vb = velocity_field(bump, heat(1.0), zero, 0);
    CHECK(vb.v[2] < 0);
    CHECK(vb.v[13] > 0);

    GridDensity hole = uniform_density(g);
    hole.rho[3] = 0;
    CHECK(velocity_field(hole, prob, zero, 0).masked == 1);
}

TEST_CASE("continuity residual")
{
    auto prob = heat(0.7);
    Grid g = Grid::on(prob.domain(), 32);
    FpOptions o;
    o.store_every = 1;
    auto tr = fp_solve(prob, zero, uniform_density(g), 1e-3, 0.3, o);
    auto rep = continuity_residual(tr, prob, zero);
    CHECK(rep.per_test.size() == 10);
    CHECK(rep.residual <= 1e-10);

    double r64 = heat_residual(64), r128 = heat_residual(128);
    CHECK(r128 <= 1e-3);
    CHECK(r128 / r64 <= 0.25 + 1e-6);
}

TEST_CASE("continuity residual for a frozen control in the reference problem")
{
    auto prob = mr1();
    auto pol = FeedbackPolicy::constant({0.6});
    Grid g = Grid::on(prob.domain(), 128);
    auto r0 = density_from(g, [](auto x) { return 1 + 0.8 * std::cos(std::numbers::pi * x[0]); });
    FpOptions o;
    o.store_every = 10;
    auto tr = fp_solve(prob, pol, r0, 1e-5, 1.0, o);
    CHECK(continuity_residual(tr, prob, pol).residual <= 5e-3);
    CHECK(tr.max_mass_error < 1e-12);
}

TEST_CASE("reflected heat kernel")
{
    for (double t : {0.001, 0.05, 0.7})
    {
        // Midpoint rule in y.
        int n = 20000;
        double integral = 0;
        for (int i = 0; i < n; ++i)
            integral += reflected_bm_density_1d(t, 0.3, (i + 0.5) / n, 0.8, 0, 1) / n;
        CHECK(integral == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(reflected_bm_density_1d(t, 0.3, 0.8, 0.8, 0, 1) ==
              doctest::Approx(reflected_bm_density_1d(t, 0.8, 0.3, 0.8, 0, 1)).epsilon(1e-12));
    }
    CHECK(reflected_bm_density_1d(20, 0.1, 0.9, 1, 0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(reflected_bm_density_1d(20, 1.0, 3.0, 1, 1, 3) == doctest::Approx(0.5).epsilon(1e-9));
    // Image sum and eigen-expansion agree where both are accurate (switch at sigma^2 t = 1).
    for (double y : {0.0, 0.25, 0.6, 1.0})
    {
        double below = reflected_bm_density_1d(0.99999, 0.3, y, 1, 0, 1);
        double above = reflected_bm_density_1d(1.00001, 0.3, y, 1, 0, 1);
        CHECK(below == doctest::Approx(above).epsilon(1e-4));
    }
}

TEST_CASE("heat bound fit")
{
    // Free Gaussian kernel with unit diffusion: for kappa2 = 1/2 the upper bound
    // holds with kappa1 = 1 and the lower bound is tight at r = 0.
    std::vector<HeatSample> free;
    for (double t : {0.01, 0.1, 1.0})
        for (double r : {0.0, 0.1, 0.5, 1.0, 2.0})
            free.push_back({0, r, t, std::exp(-r * r / (2 * t)) / std::sqrt(2 * std::numbers::pi * t)});
    double const root = std::sqrt(2 * std::numbers::pi);
    CHECK(heat_bound_kappa1(free, 1, 0.5) == doctest::Approx(root).epsilon(1e-12));
    auto fit = heat_bound_fit(free, 1, {0.5, 1.0, 2.0, 4.0});
    CHECK(fit.feasible);
    CHECK(fit.kappa2 == 0.5);
    CHECK(fit.kappa1 == doctest::Approx(root).epsilon(1e-12));

    std::vector<HeatSample> bad = free;
    bad.push_back({0, 0.5, 0.1, 0.0});
    CHECK_FALSE(heat_bound_fit(bad, 1).feasible);

    std::vector<HeatSample> refl;
    for (double t : {1e-3, 1e-2, 0.1, 0.5})
        for (double x : {0.05, 0.5, 0.95})
            for (double y : {0.0, 0.3, 0.6, 1.0})
                refl.push_back({x, y, t, reflected_bm_density_1d(t, x, y, 1, 0, 1)});
    auto rf = heat_bound_fit(refl, 1);
    CHECK(rf.feasible);
    CHECK(rf.kappa1 >= 1);

    std::vector<double> ts, ps;
    for (double t = 1e-4; t <= 1e-2; t *= 1.5)
    {
        ts.push_back(t);
        ps.push_back(reflected_bm_density_1d(t, 0.5, 0.5, 1, 0, 1));
    }
    CHECK(loglog_slope(ts, ps) == doctest::Approx(-0.5).epsilon(0.1));
}

TEST_CASE("reflected Brownian motion histogram against the image series")
{
    auto bm = heat(1.0);
    Grid g = Grid::on(bm.domain(), 64);
    auto exact = density_from(
        g, [](auto x) { return reflected_bm_density_1d(1.0, 0.3, x[0], 1, 0, 1); });
    auto sim = simulate(bm, zero, InitialLaw::dirac({0.3}), 0, {100000, 1e-3, 7});
    auto const& x = sim.snapshots.back().x;
    // Projection leaves about 2 sqrt(dt) E[xi+] of the mass exactly on the boundary.
    double on_boundary = 0;
    for (double xi : x)
        on_boundary += (xi == 0.0 || xi == 1.0) ? 1.0 / x.size() : 0.0;
    double predicted = 2 * std::sqrt(1e-3) / std::sqrt(2 * std::numbers::pi);
    CHECK(on_boundary == doctest::Approx(predicted).epsilon(0.2));
    double coarse = l1_distance(histogram(g, sim.snapshots.back().measure()), exact);
    CHECK(coarse <= 0.05);
}

TEST_CASE("particle histogram agrees with the grid solution")
{
    Grid g = Grid::on(Domain::interval(0, 1), 64);
    auto prob = mr1();
    auto pol = FeedbackPolicy::constant({0.6});
    auto r0 = density_from(g, [](auto x) { return 1 + 0.8 * std::cos(std::numbers::pi * x[0]); });
    auto tr = fp_solve(prob, pol, r0, 1e-4, 1.0);
    auto law = InitialLaw::density_1d(0, 1, r0.rho);
    auto ps = simulate(prob, pol, law, 0, {100000, 1e-3, 1});
    CHECK(l1_distance(histogram(g, ps.snapshots.back().measure()), tr.densities.back()) <= 0.1);
}
