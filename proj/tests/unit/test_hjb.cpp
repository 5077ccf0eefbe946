// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "rmv/control.hpp"
#include "rmv/error.hpp"
#include "rmv/hjb.hpp"

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

// b = b0 + ba alpha on [0, hi], running cost c + q alpha^2, no terminal cost.
ControlProblem simple(double b0, double ba, double sigma, double q = 0, double c = 0,
                      double hi = 1)
{
    DriftSpec drift;
    drift.b0 = {b0};
    drift.balpha = {ba};
    RunningCost run;
    run.alpha_weight = q;
    run.constant = c;
    return ControlProblem(Domain::interval(0, hi), {sigma}, 1.0, ControlSet{{-1}, {1}}, drift,
                          run, {});
}

EmpiricalMeasure random_measure(std::mt19937_64& gen, std::size_t n, Domain const& dom)
{
    std::uniform_real_distribution<double> u(0, 1);
    std::size_t d = dom.dim();
    std::vector<double> pts(n * d), w(n);
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t k = 0; k < d; ++k)
            pts[i * d + k] = dom.lower()[k] + u(gen) * (dom.upper()[k] - dom.lower()[k]);
        s += (w[i] = u(gen) + 0.05);
    }
    for (auto& x : w)
        x /= s;
    return EmpiricalMeasure(d, pts, w);
}

BasisFunction x1() { return BasisFunction::monomial({1}); }
}  // namespace

TEST_CASE("intrinsic derivative examples")
{
    auto mu = EmpiricalMeasure::uniform(1, {0.2, 0.5, 0.8});
    std::vector<double> q{0.1, 0.7};
    auto lin = dl_eval(Functional::moment(x1()), 0, mu, q);
    CHECK(lin.values == std::vector<double>{1.0, 1.0});
    CHECK(lin.gradients == std::vector<double>{0.0, 0.0});
    CHECK(lin.tail == 0.0);

    auto sq = dl_eval(Functional::squared_moment(x1()), 0, mu, q);
    CHECK(sq.values[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(sq.values[1] == doctest::Approx(1.0).epsilon(1e-15));

    auto dom = Domain::interval(0, 1);
    auto fam = std::make_shared<PolyFamily const>(dom, 5);
    auto anchor = EmpiricalMeasure::uniform(1, {0.3, 0.6});
    auto s = Functional::s_based(fam, anchor);
    auto field = dl_eval(s, 0, mu, q);
    auto phi = fam->dl_S(SignedCombo::difference(mu, anchor));
    std::vector<double> g(1), h(1);
    for (std::size_t i = 0; i < q.size(); ++i)
    {
        phi.gradient(std::span(q).subspan(i, 1), g);
        phi.hessian(std::span(q).subspan(i, 1), h);
        CHECK(field.values[i] == g[0]);
        CHECK(field.gradients[i] == h[0]);
    }
    CHECK(field.tail == fam->S(SignedCombo::difference(mu, anchor)).tail_bound);
    CHECK(field.tail > 0);

    CHECK_THROWS_AS(dl_eval(Functional::moment(x1()), 0, EmpiricalMeasure::dirac({0.1, 0.2}), q),
                    Error);
    CHECK_THROWS_AS(Functional::time_augmented({}, {{{}, Functional::time_augmented({}, {})}}),
                    Error);
}

TEST_CASE("basis functions by finite differences")
{
    auto box = Domain::box({0, -1}, {2, 1});
    std::vector<BasisFunction> fs{
        BasisFunction::cosine(box, {2, 1}),
        BasisFunction::polynomial(2, {{1.5, {2, 1}}, {-0.5, {0, 3}}, {2.0, {1, 0}}}),
    };
    std::vector<double> x{0.7, 0.3}, g(2), h(4), gp(2), gm(2);
    double e = 1e-6;
    for (auto const& f : fs)
    {
        f.gradient(x, g);
        f.hessian(x, h);
        for (std::size_t a = 0; a < 2; ++a)
        {
            auto xp = x, xm = x;
            xp[a] += e;
            xm[a] -= e;
            CHECK(g[a] == doctest::Approx((f.value(xp) - f.value(xm)) / (2 * e)).epsilon(1e-7));
            f.gradient(xp, gp);
            f.gradient(xm, gm);
            for (std::size_t b = 0; b < 2; ++b)
                CHECK(h[b * 2 + a] == doctest::Approx((gp[b] - gm[b]) / (2 * e)).epsilon(1e-7));
        }
    }
    CHECK(fs[0].value(std::vector<double>{0, -1}) == 1.0);
    CHECK(fs[0].value(std::vector<double>{0.5, 0}) == doctest::Approx(0.0));
}

TEST_CASE("pushforward consistency over random measures")
{
    std::mt19937_64 gen(41);
    for (auto const& dom : {Domain::interval(0, 1), Domain::box({0, 0}, {1, 2})})
    {
        std::size_t d = dom.dim();
        auto fam = std::make_shared<PolyFamily const>(dom, d == 1 ? 6 : 4);
        auto anchor = random_measure(gen, 7, dom);
        std::vector<BasisFunction::Term> terms{{1.0, MultiIndex(d, 2)}, {0.5, MultiIndex(d, 1)}};
        terms[1].exponents[0] = 3;
        std::vector<int> modes(d, 1);
        modes[0] = 2;
        std::vector<Functional> us{
            Functional::moment(BasisFunction::polynomial(d, terms)),
            Functional::squared_moment(BasisFunction::cosine(dom, modes)),
            Functional::s_based(fam, anchor),
            Functional::time_augmented({{0.3, 1.0}, 0.5},
                                       {{{{0.0, 2.0}}, Functional::squared_moment(
                                                           BasisFunction::polynomial(d, terms))},
                                        {{{1.0}, -1.0}, Functional::s_based(fam, anchor)}}),
        };
        VectorField v = [d](std::span<const double> x, std::span<double> out) {
            double bump = 1;
            for (std::size_t i = 0; i < d; ++i)
                bump *= std::sin(M_PI * x[i] / (i + 1.0));
            for (std::size_t i = 0; i < d; ++i)
                out[i] = bump * bump * (i + 1.0) * (1 + x[0]);
        };
        double eps = 1e-4, t = 0.4, worst = 0, worst_grad = 0;
        for (int trial = 0; trial < 50; ++trial)
        {
            auto mu = random_measure(gen, 10, dom);
            for (auto const& u : us)
            {
                double fd = (u.value(t, pushforward(mu, v, eps, dom)) -
                             u.value(t, pushforward(mu, v, -eps, dom))) /
                            (2 * eps);
                auto field = dl_eval(u, t, mu, std::vector<double>(mu.points().begin(),
                                                                   mu.points().end()));
                std::vector<double> vel(d);
                double ip = 0;
                for (std::size_t i = 0; i < mu.size(); ++i)
                {
                    v(mu.point(i), vel);
                    for (std::size_t a = 0; a < d; ++a)
                        ip += mu.weight(i) * field.values[i * d + a] * vel[a];
                }
                worst = std::max(worst, std::abs(fd - ip) / std::max(std::abs(ip), 1e-3));

                // x-gradient of D^L u against central differences of the field.
                std::vector<double> x(mu.point(0).begin(), mu.point(0).end());
                auto bound = u.bind(t, mu);
                std::vector<double> dl(d), jac(d * d), dp(d), dm(d);
                bound.eval(x, dl, jac);
                for (std::size_t a = 0; a < d; ++a)
                {
                    auto xp = x, xm = x;
                    xp[a] += eps;
                    xm[a] -= eps;
                    bound.eval(xp, dp);
                    bound.eval(xm, dm);
                    for (std::size_t b = 0; b < d; ++b)
                    {
                        double num = (dp[b] - dm[b]) / (2 * eps);
                        worst_grad = std::max(worst_grad, std::abs(jac[b * d + a] - num) /
                                                              std::max(std::abs(num), 1e-3));
                    }
                }
            }
        }
        CHECK(worst <= 1e-3);
        CHECK(worst_grad <= 1e-3);
    }
}

TEST_CASE("time factors and time derivatives")
{
    TimeFactor a{{1.0, -2.0, 3.0}, 0.5};
    CHECK(a.value(2.0) == doctest::Approx(1 - 4 + 12 + 0.25));
    CHECK(a.derivative(2.0) == doctest::Approx(-2 + 12 - 0.125));
    auto mu = EmpiricalMeasure::uniform(1, {0.25, 0.75});
    auto u = Functional::time_augmented({{0.0, 1.0}}, {{{{0.0, 0.0, 1.0}}, Functional::moment(x1())}});
    CHECK(u.value(3.0, mu) == doctest::Approx(3 + 9 * 0.5));
    CHECK(u.time_derivative(3.0, mu) == doctest::Approx(1 + 6 * 0.5));
    CHECK(u.dim() == 1);
    CHECK(Functional::time_augmented({{2.0}}, {}).dim() == 0);
}

TEST_CASE("hamiltonian examples")
{
    auto mu = EmpiricalMeasure::uniform(1, {0.1, 0.4, 0.9});
    std::vector<double> alpha{0.0};
    CHECK(hamiltonian(simple(0.7, 0, 0.5), 0, mu, Functional::moment(x1()), alpha) ==
          doctest::Approx(0.7).epsilon(1e-15));
    auto x2 = Functional::moment(BasisFunction::monomial({2}));
    CHECK(hamiltonian(simple(0, 0, 0.5), 0, mu, x2, alpha) == doctest::Approx(0.25).epsilon(1e-15));

    // Direct summation on MR1 with u = <mu, x>^2 at alpha = 0.3.
    std::mt19937_64 gen(5);
    auto prob = mr1();
    auto m = random_measure(gen, 500, prob.domain());
    double mean = 0;
    for (std::size_t i = 0; i < m.size(); ++i)
        mean += m.weight(i) * m.point(i)[0];
    long double ref = 0;
    for (std::size_t i = 0; i < m.size(); ++i)
    {
        double x = m.point(i)[0];
        double b = 0.25 + 0.3 - 0.5 * mean;
        ref += m.weight(i) * (b * 2 * mean + 0.1 * 0.09 + (x - 0.5) * (x - 0.5));
    }
    double h = hamiltonian(prob, 0, m, Functional::squared_moment(x1()), std::vector<double>{0.3});
    CHECK(std::abs(h - static_cast<double>(ref)) <= 1e-12 * std::abs(static_cast<double>(ref)));
    double h0 = hamiltonian(prob, 0, m, Functional::squared_moment(x1()), std::vector<double>{0.3},
                            false);
    double running = 0;
    for (std::size_t i = 0; i < m.size(); ++i)
        running += m.weight(i) * (0.009 + std::pow(m.point(i)[0] - 0.5, 2));
    CHECK(h - h0 == doctest::Approx(running).epsilon(1e-12));
    CHECK_THROWS_AS(hamiltonian(prob, 0, m, Functional::moment(x1()), std::vector<double>{0.1, 0.2}),
                    Error);
}

TEST_CASE("hamiltonian infimum")
{
    auto mu = EmpiricalMeasure::uniform(1, {0.2, 0.6});
    auto u = Functional::moment(x1());

    auto flat = hamiltonian_infimum(simple(0.3, 0, 0.5), 0, mu, u);
    CHECK(flat.value == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(flat.grid_value == doctest::Approx(0.3).epsilon(1e-15));

    auto quad = hamiltonian_infimum(simple(0, 1, 0.5, 1), 0, mu, u);
    CHECK(quad.alpha[0] == -0.5);
    CHECK(quad.value == doctest::Approx(-0.25).epsilon(1e-15));
    CHECK(quad.grid_alpha[0] == doctest::Approx(-0.5).epsilon(1e-12));

    // Interior minimizer off every grid point: the grid error respects its bound.
    auto off = hamiltonian_infimum(simple(0, 1, 0.5, 1.7), 0, mu, u);
    CHECK(off.alpha[0] == doctest::Approx(-1 / 3.4));
    CHECK(off.grid_value >= off.value - 1e-15);
    CHECK(off.grid_value - off.value <= off.grid_tolerance + 1e-15);
    CHECK(off.grid_value - off.value > 0);

    // MR1: closed form against the grid for several functionals and laws.
    auto prob = mr1();
    auto dom = prob.domain();
    auto fam = std::make_shared<PolyFamily const>(dom, 6);
    std::mt19937_64 gen(9);
    auto anchor = random_measure(gen, 5, dom);
    std::vector<Functional> us{
        Functional::squared_moment(x1()),
        Functional::moment(BasisFunction::cosine(dom, {1})),
        Functional::moment(BasisFunction::polynomial(1, {{0.05, {2}}, {-0.02, {1}}})),
        Functional::s_based(fam, anchor),
    };
    double worst = 0;
    for (int k = 0; k < 5; ++k)
    {
        auto m = random_measure(gen, 40, dom);
        for (double t : {0.0, 0.5})
            for (auto const& f : us)
            {
                auto r = hamiltonian_infimum(prob, t, m, f);
                worst = std::max(worst, std::abs(r.value - r.grid_value));
                CHECK(r.grid_value >= r.value - 1e-14);
                for (double a : {-1.0, -0.3, 0.0, 0.4, 1.0})
                    CHECK(hamiltonian(prob, t, m, f, std::vector<double>{a}) >= r.value - 1e-14);
            }
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("hjb residual examples")
{
    auto mu = EmpiricalMeasure::uniform(1, {0.2, 0.6});
    auto konst = Functional::time_augmented({{1.7}}, {});
    CHECK(hjb_residual(simple(0.4, 1, 0.5), konst, 0.3, mu) == 0.0);

    double c = 0.8;
    auto prob = simple(0.4, 1, 0.5, 0, c);
    auto psi = Functional::time_augmented({{c * prob.horizon(), -c}}, {});
    for (double t : {0.0, 0.25, 0.9})
        CHECK(hjb_residual(prob, psi, t, mu) == doctest::Approx(0.0).scale(1));
    CHECK(psi.value(prob.horizon(), mu) == 0.0);
}

TEST_CASE("viscosity inequality on finite families")
{
    double c = 0.8;
    auto prob = simple(0.4, 1, 0.5, 0, c);
    auto psi = Functional::time_augmented({{c, -c}}, {});
    std::vector<FamilyPoint> fam;
    std::vector<double> exact, bumped;
    for (double t : {0.0, 0.2, 0.4, 0.6, 0.8})
    {
        auto mu = EmpiricalMeasure::uniform(1, {0.1 + t, 0.5});
        exact.push_back(psi.value(t, mu));
        bumped.push_back(exact.back() + 0.1 * std::sin(7 * t));
        fam.push_back({t, std::move(mu)});
    }
    for (auto type : {Extremum::maximum, Extremum::minimum})
    {
        auto rep = viscosity_test(prob, fam, exact, psi, type);
        CHECK(rep.residual == doctest::Approx(0.0).scale(1));
        CHECK(rep.satisfied);
        CHECK(rep.gaps == std::vector<double>(5, 0.0));
    }

    auto lowered = Functional::time_augmented({{c - 3, -c}}, {});
    for (auto type : {Extremum::maximum, Extremum::minimum})
    {
        auto a = viscosity_test(prob, fam, bumped, psi, type);
        auto b = viscosity_test(prob, fam, bumped, lowered, type);
        CHECK(a.index == b.index);
        CHECK(a.residual == b.residual);
        CHECK(a.satisfied == b.satisfied);
        CHECK(a.identified);
    }
    auto mx = viscosity_test(prob, fam, bumped, psi, Extremum::maximum);
    CHECK(mx.index == 1);
    CHECK(viscosity_test(prob, fam, bumped, psi, Extremum::maximum, 1).index == 1);
    CHECK_THROWS_AS(viscosity_test(prob, fam, bumped, psi, Extremum::maximum, 0), Error);
    CHECK_FALSE(viscosity_test(prob, fam, bumped, psi, Extremum::maximum, 1, 0, 1.0).identified);

    // u = <mu, x> with b = 0.4 and no cost: H = 0.4 for every alpha, residual -0.4.
    auto u = Functional::moment(x1());
    auto sub = viscosity_test(simple(0.4, 0, 0.5), fam, exact, u, Extremum::maximum);
    CHECK(sub.residual == doctest::Approx(-0.4));
    CHECK(sub.satisfied);
    CHECK(sub.margin == doctest::Approx(0.4));
    auto super = viscosity_test(simple(0.4, 0, 0.5), fam, exact, u, Extremum::minimum);
    CHECK_FALSE(super.satisfied);
    CHECK(super.margin == doctest::Approx(-0.4));
}

TEST_CASE("measure-flow chain rule")
{
    auto pol = FeedbackPolicy::constant({0.0});
    auto u = Functional::moment(x1());

    // Driftless, interior start, short horizon: only the martingale remains.
    auto drift_free = simple(0, 0, 0.5);
    auto r = chainrule_check(drift_free, pol, u, InitialLaw::uniform_box({0.4}, {0.6}), 0, 0, 0.01,
                             {4000, 1e-3, 1});
    CHECK(r.boundary == 0.0);
    CHECK(r.rhs == 0.0);
    CHECK(std::abs(r.residual) <= 3 * r.std_error);
    CHECK(r.std_error == doctest::Approx(0.5 * std::sqrt(0.01 / 4000)).epsilon(1e-9));
    CHECK_FALSE(r.compatible);

    // Strong outward drift: the local-time term carries the residual.
    auto pushed = simple(2.0, 0, 0.5);
    auto b = chainrule_check(pushed, pol, u, InitialLaw::uniform_box({0.5}, {0.9}), 0, 0.1, 0.5,
                             {4000, 1e-3, 2});
    CHECK(b.boundary > 0.5);
    CHECK(std::abs(b.residual + b.boundary) <= 3 * b.std_error);
    CHECK(std::abs(b.residual + b.boundary - b.martingale) <= 1e-12);
    CHECK(b.contract_residual() == b.residual + b.boundary);

    // Cosine functional on MR1: boundary compatible, residual is noise plus O(dt).
    auto prob = mr1();
    auto cosu = Functional::moment(BasisFunction::cosine(prob.domain(), {1}));
    CHECK(cosu.boundary_compatible(prob.domain(), prob.diffusion()));
    CHECK_FALSE(u.boundary_compatible(prob.domain(), prob.diffusion()));
    auto c = chainrule_check(prob, pol, cosu, InitialLaw::uniform_box({0.0}, {1.0}), 0, 0, 1,
                             {4000, 1e-3, 3});
    CHECK(std::abs(c.boundary) <= 1e-12);
    CHECK(std::abs(c.residual) <= 5e-2);
    CHECK(std::abs(c.residual - c.martingale) <= 5e-3);
    CHECK(c.contract_residual() == c.residual);

    CHECK_THROWS_AS(chainrule_check(prob, pol, cosu, InitialLaw::uniform_box({0.0}, {1.0}), 0.5,
                                    0.2, 1, {100, 1e-2, 0}),
                    Error);
}

TEST_CASE("hamiltonian continuity under subsampling")
{
    auto prob = mr1();
    std::vector<double> pts(100000);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> unif(0, 1);
    for (auto& x : pts)
        x = unif(gen) * unif(gen);
    auto mu = EmpiricalMeasure::uniform(1, pts);
    std::vector<Point> alphas;
    for (int k = 0; k <= 8; ++k)
        alphas.push_back({-1 + 0.25 * k});
    auto u = Functional::squared_moment(BasisFunction::polynomial(1, {{1.0, {2}}, {-0.5, {1}}}));
    auto pts_out = hamiltonian_continuity(prob, 0.2, mu, u, {100, 1000, 10000}, alphas, 7, 8);
    REQUIRE(pts_out.size() == 3);
    for (std::size_t k = 1; k < pts_out.size(); ++k)
    {
        CHECK(pts_out[k].w1 < pts_out[k - 1].w1);
        CHECK(pts_out[k].max_diff < pts_out[k - 1].max_diff);
    }
    auto whole = hamiltonian_continuity(prob, 0.2, mu, u, {mu.size()}, alphas, 7);
    CHECK(whole[0].w1 <= 1e-12);
    CHECK(whole[0].max_diff <= 1e-12);
    CHECK_THROWS_AS(hamiltonian_continuity(prob, 0.2, mu, u, {0}, alphas, 7), Error);
}

TEST_CASE("W1 continuity in time")
{
    auto prob = mr1();
    std::vector<double> h;
    for (int k = 0; k < 6; ++k)
        h.push_back(std::ldexp(1.0, -10 + k));
    auto rep = w1_time_continuity(prob, FeedbackPolicy::constant({0.0}), InitialLaw::dirac({0.5}),
                                  0.25, h, {4000, 1.0 / 4096, 4});
    for (std::size_t k = 1; k < h.size(); ++k)
        CHECK(rep.w1[k] > rep.w1[k - 1]);
    CHECK(rep.slope >= 0.4);
    CHECK(rep.slope <= 1.0);
    // From a point mass W1 is E|X - x0| ~ sigma sqrt(2 h / pi) for small h.
    CHECK(rep.w1[0] == doctest::Approx(0.5 * std::sqrt(2 * h[0] / M_PI)).epsilon(0.1));
}
