// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "rmv/fokkerplanck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "rmv/error.hpp"
#include "rmv/parallel.hpp"

namespace rmv
{
namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();

// Gauss-Legendre nodes and weights on [-1, 1].
constexpr double kGaussX[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                               0.8611363115940526};
constexpr double kGaussW[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                               0.3478548451374538};

double bump(double r)
{
    return r * r < 1 ? std::exp(-1 / (1 - r * r)) : 0;
}

double bump_prime(double r)
{
    if (r * r >= 1)
        return 0;
    double q = 1 - r * r;
    return bump(r) * (-2 * r / (q * q));
}

struct TestFunction
{
    Point center;
    double width;
    double ta;
    double tb;

    double eta(double t) const { return bump((2 * t - ta - tb) / (tb - ta)); }
    double eta_prime(double t) const
    {
        return bump_prime((2 * t - ta - tb) / (tb - ta)) * 2 / (tb - ta);
    }
    double phi(std::span<const double> x) const
    {
        double r2 = 0;
        for (std::size_t k = 0; k < x.size(); ++k)
            r2 += (x[k] - center[k]) * (x[k] - center[k]);
        return bump(std::sqrt(r2) / width);
    }
    void grad_phi(std::span<const double> x, std::span<double> g) const
    {
        double r2 = 0;
        for (std::size_t k = 0; k < x.size(); ++k)
            r2 += (x[k] - center[k]) * (x[k] - center[k]);
        double r = std::sqrt(r2);
        double s = r > 0 ? bump_prime(r / width) / (width * r) : 0;
        for (std::size_t k = 0; k < x.size(); ++k)
            g[k] = s * (x[k] - center[k]);
    }
};

std::vector<TestFunction> test_battery(Grid const& grid, double t0, double t1)
{
    // Fixed fractions; every support lies strictly inside the domain and the
    // time window.
    static constexpr double cf[10][2] = {{0.50, 0.50}, {0.30, 0.40}, {0.70, 0.60}, {0.40, 0.70},
                                         {0.60, 0.30}, {0.25, 0.25}, {0.75, 0.75}, {0.45, 0.55},
                                         {0.35, 0.65}, {0.65, 0.35}};
    static constexpr double wf[10] = {0.20, 0.15, 0.15, 0.12, 0.18, 0.10, 0.10, 0.25, 0.14, 0.16};
    static constexpr double tw[10][2] = {{0.05, 0.95}, {0.10, 0.60}, {0.40, 0.90}, {0.20, 0.80},
                                         {0.05, 0.50}, {0.30, 0.95}, {0.15, 0.70}, {0.25, 0.85},
                                         {0.50, 0.98}, {0.02, 0.40}};
    std::vector<TestFunction> out;
    double span = t1 - t0;
    double lmin = kInf;
    for (std::size_t a = 0; a < grid.dim(); ++a)
        lmin = std::min(lmin, grid.hi[a] - grid.lo[a]);
    for (int j = 0; j < 10; ++j)
    {
        TestFunction f;
        for (std::size_t a = 0; a < grid.dim(); ++a)
            f.center.push_back(grid.lo[a] + cf[j][a] * (grid.hi[a] - grid.lo[a]));
        f.width = wf[j] * lmin;
        f.ta = t0 + tw[j][0] * span;
        f.tb = t0 + tw[j][1] * span;
        out.push_back(f);
    }
    return out;
}

LawStats grid_law(GridDensity const& rho, std::vector<double> const& centers,
                  std::vector<MultiIndex> const& exps)
{
    double vol = rho.grid.cell_volume();
    std::vector<double> w(rho.rho.size());
    for (std::size_t c = 0; c < w.size(); ++c)
        w[c] = rho.rho[c] * vol;
    return LawStats::compute(rho.grid.dim(), centers, w, exps);
}

std::vector<MultiIndex> merged_exponents(ControlProblem const& prob, FeedbackPolicy const& pol)
{
    std::set<MultiIndex> s;
    for (auto const& e : prob.drift_exponents())
        s.insert(e);
    for (auto const& e : pol.exponents())
        s.insert(e);
    return {s.begin(), s.end()};
}

void require_grid_domain(Domain const& domain)
{
    require(domain.kind() != Domain::Kind::ball, ErrorCode::invalid_argument,
            "grid solver needs an interval or box domain");
    require(domain.dim() <= 2, ErrorCode::invalid_argument, "grid solver supports d <= 2");
}
}  // namespace

//---------------------------------------------------------------------------//
Grid Grid::on(Domain const& domain, std::size_t cells_per_axis)
{
    require_grid_domain(domain);
    require(cells_per_axis >= 2, ErrorCode::invalid_argument, "grid needs at least two cells");
    return Grid{domain.lower(), domain.upper(),
                std::vector<std::size_t>(domain.dim(), cells_per_axis)};
}

std::size_t Grid::cells() const
{
    std::size_t c = 1;
    for (auto v : n)
        c *= v;
    return c;
}

double Grid::cell_volume() const
{
    double v = 1;
    for (std::size_t a = 0; a < dim(); ++a)
        v *= h(a);
    return v;
}

std::vector<std::size_t> Grid::coords(std::size_t cell) const
{
    std::vector<std::size_t> c(dim());
    for (std::size_t a = 0; a < dim(); ++a)
    {
        c[a] = cell % n[a];
        cell /= n[a];
    }
    return c;
}

void Grid::center(std::size_t cell, std::span<double> out) const
{
    for (std::size_t a = 0; a < dim(); ++a)
    {
        out[a] = lo[a] + (cell % n[a] + 0.5) * h(a);
        cell /= n[a];
    }
}

std::size_t Grid::locate(std::span<const double> x) const
{
    std::size_t cell = 0, stride = 1;
    for (std::size_t a = 0; a < dim(); ++a)
    {
        double f = (x[a] - lo[a]) / h(a);
        auto i = static_cast<std::ptrdiff_t>(std::floor(f));
        i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n[a]) - 1);
        cell += static_cast<std::size_t>(i) * stride;
        stride *= n[a];
    }
    return cell;
}

std::vector<double> Grid::centers() const
{
    std::vector<double> out(cells() * dim());
    for (std::size_t c = 0; c < cells(); ++c)
        center(c, std::span<double>(out.data() + c * dim(), dim()));
    return out;
}

double GridDensity::mass() const
{
    double s = 0;
    for (double r : rho)
        s += r;
    return s * grid.cell_volume();
}

double GridDensity::min_value() const
{
    return *std::min_element(rho.begin(), rho.end());
}

GridDensity uniform_density(Grid const& grid)
{
    double vol = 1;
    for (std::size_t a = 0; a < grid.dim(); ++a)
        vol *= grid.hi[a] - grid.lo[a];
    return GridDensity{grid, std::vector<double>(grid.cells(), 1.0 / vol), 0};
}

GridDensity density_from(Grid const& grid, std::function<double(std::span<const double>)> const& f,
                         bool normalize)
{
    std::size_t d = grid.dim();
    GridDensity g{grid, std::vector<double>(grid.cells(), 0), 0};
    std::vector<double> c(d), x(d);
    std::size_t nodes = d == 1 ? 4 : 16;
    for (std::size_t cell = 0; cell < grid.cells(); ++cell)
    {
        grid.center(cell, c);
        double s = 0;
        for (std::size_t q = 0; q < nodes; ++q)
        {
            double w = 1;
            for (std::size_t a = 0, r = q; a < d; ++a, r /= 4)
            {
                x[a] = c[a] + 0.5 * grid.h(a) * kGaussX[r % 4];
                w *= 0.5 * kGaussW[r % 4];
            }
            s += w * f(x);
        }
        g.rho[cell] = s;
    }
    if (normalize)
    {
        double m = g.mass();
        require(m > 0, ErrorCode::invalid_argument, "density has zero mass");
        for (auto& r : g.rho)
            r /= m;
    }
    return g;
}

GridDensity histogram(Grid const& grid, EmpiricalMeasure const& mu)
{
    require(mu.dim() == grid.dim(), ErrorCode::dimension_mismatch,
            "measure and grid dimensions differ");
    GridDensity g{grid, std::vector<double>(grid.cells(), 0), 0};
    double vol = grid.cell_volume();
    for (std::size_t i = 0; i < mu.size(); ++i)
        g.rho[grid.locate(mu.point(i))] += mu.weight(i) / vol;
    return g;
}

double l1_distance(GridDensity const& a, GridDensity const& b)
{
    require(a.rho.size() == b.rho.size(), ErrorCode::dimension_mismatch, "grids differ");
    double s = 0;
    for (std::size_t c = 0; c < a.rho.size(); ++c)
        s += std::abs(a.rho[c] - b.rho[c]);
    return s * a.grid.cell_volume();
}

std::size_t DensityTrajectory::index_of(double t) const
{
    for (std::size_t k = 0; k < densities.size(); ++k)
        if (std::abs(densities[k].t - t) <= 1e-9)
            return k;
    fail(ErrorCode::invalid_argument, "no stored density at t = " + std::to_string(t));
}

double fp_stable_step(Grid const& grid, std::vector<double> const& a, double max_abs_drift)
{
    std::size_t d = grid.dim();
    double s = 0;
    for (std::size_t k = 0; k < d; ++k)
        s += a[k * d + k] / (grid.h(k) * grid.h(k)) + max_abs_drift / grid.h(k);
    return s > 0 ? 1 / s : kInf;
}

//---------------------------------------------------------------------------//
DensityTrajectory fp_solve(ControlProblem const& prob, FeedbackPolicy const& pol,
                           GridDensity rho0, double dt, double t_end, FpOptions const& opts)
{
    require_grid_domain(prob.domain());
    Grid const grid = rho0.grid;
    std::size_t d = grid.dim(), m = prob.control_dim();
    require(d == prob.dim(), ErrorCode::dimension_mismatch, "grid and problem dimensions differ");
    for (std::size_t k = 0; k < d; ++k)
        require(std::abs(grid.lo[k] - prob.domain().lower()[k]) <= 1e-12 &&
                    std::abs(grid.hi[k] - prob.domain().upper()[k]) <= 1e-12,
                ErrorCode::invalid_argument, "grid does not cover the domain");
    auto const& amat = prob.diffusion();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            require(i == j || amat[i * d + j] == 0, ErrorCode::invalid_argument,
                    "grid solver needs a diagonal diffusion matrix");

    double t0 = rho0.t;
    std::size_t steps = step_count(t0, t_end, dt);
    std::set<std::size_t> marks{0, steps};
    for (double s : opts.snapshot_times)
        marks.insert(step_count(t0, s, dt));
    if (opts.store_every > 0)
        for (std::size_t k = 0; k <= steps; k += opts.store_every)
            marks.insert(k);

    auto exps = merged_exponents(prob, pol);
    auto centers = grid.centers();
    std::size_t cells = grid.cells();

    // Interior faces per axis: (left cell, face point).
    struct Face
    {
        std::size_t left;
        std::size_t right;
        std::size_t axis;
        Point x;
    };
    std::vector<Face> faces;
    for (std::size_t c = 0; c < cells; ++c)
    {
        auto ij = grid.coords(c);
        std::size_t stride = 1;
        for (std::size_t a = 0; a < d; ++a)
        {
            if (ij[a] + 1 < grid.n[a])
            {
                Face f{c, c + stride, a, Point(centers.begin() + c * d, centers.begin() + c * d + d)};
                f.x[a] += 0.5 * grid.h(a);
                faces.push_back(std::move(f));
            }
            stride *= grid.n[a];
        }
    }

    DensityTrajectory out;
    out.dt = dt;
    out.steps = steps;
    out.min_value = rho0.min_value();
    GridDensity rho = std::move(rho0);
    std::vector<double> flux(faces.size()), bface(faces.size());
    for (std::size_t k = 0;; ++k)
    {
        out.max_mass_error = std::max(out.max_mass_error, std::abs(rho.mass() - 1));
        out.min_value = std::min(out.min_value, rho.min_value());
        if (marks.count(k))
            out.densities.push_back(rho);
        if (k == steps)
            break;
        double t = rho.t;
        LawStats law = grid_law(rho, centers, exps);
        parallel_for(faces.size(), [&](std::size_t f) {
            double alpha[8], b[8];
            std::vector<double> heap;
            double* ap = alpha;
            double* bp = b;
            if (m > 8 || d > 8)
            {
                heap.resize(m + d);
                ap = heap.data();
                bp = ap + m;
            }
            auto const& face = faces[f];
            pol.evaluate(t, face.x, law, prob.controls(), std::span<double>(ap, m));
            prob.drift(t, face.x, law, std::span<const double>(ap, m), std::span<double>(bp, d));
            bface[f] = bp[face.axis];
        });
        double bmax = 0;
        for (std::size_t f = 0; f < faces.size(); ++f)
        {
            std::size_t a = faces[f].axis;
            double aa = amat[a * d + a], h = grid.h(a);
            double ab = std::abs(bface[f]);
            bmax = std::max(bmax, ab);
            require(aa / h >= ab - 1e-12 * (1 + ab), ErrorCode::cfl_violation,
                    "cell Peclet condition A_aa/h >= |b| violated; refine the grid");
        }
        require(dt <= fp_stable_step(grid, amat, bmax) * (1 + 1e-12), ErrorCode::cfl_violation,
                "time step violates dt * sum(A_aa/h^2 + |b|/h) <= 1");
        for (std::size_t f = 0; f < faces.size(); ++f)
        {
            auto const& face = faces[f];
            double h = grid.h(face.axis), aa = amat[face.axis * d + face.axis];
            double rl = rho.rho[face.left], rr = rho.rho[face.right];
            flux[f] = bface[f] * 0.5 * (rl + rr) - 0.5 * aa * (rr - rl) / h;
        }
        for (std::size_t f = 0; f < faces.size(); ++f)
        {
            double q = dt / grid.h(faces[f].axis) * flux[f];
            rho.rho[faces[f].left] -= q;
            rho.rho[faces[f].right] += q;
        }
        rho.t = t0 + static_cast<double>(k + 1) * dt;
    }
    return out;
}

GridVelocity velocity_field(GridDensity const& rho, ControlProblem const& prob,
                            FeedbackPolicy const& pol, double t)
{
    Grid const& grid = rho.grid;
    std::size_t d = grid.dim(), m = prob.control_dim(), cells = grid.cells();
    auto centers = grid.centers();
    LawStats law = grid_law(rho, centers, merged_exponents(prob, pol));
    auto const& amat = prob.diffusion();
    GridVelocity out;
    out.v.assign(cells * d, 0);
    out.valid.assign(cells, 0);
    std::vector<double> alpha(m), b(d), grad(d);
    for (std::size_t c = 0; c < cells; ++c)
    {
        if (!(rho.rho[c] > kRhoMin))
        {
            ++out.masked;
            continue;
        }
        out.valid[c] = 1;
        std::span<const double> x(centers.data() + c * d, d);
        pol.evaluate(t, x, law, prob.controls(), alpha);
        prob.drift(t, x, law, alpha, b);
        auto ij = grid.coords(c);
        std::size_t stride = 1;
        for (std::size_t a = 0; a < d; ++a)
        {
            double h = grid.h(a);
            bool has_lo = ij[a] > 0, has_hi = ij[a] + 1 < grid.n[a];
            double lo = has_lo ? rho.rho[c - stride] : rho.rho[c];
            double hi = has_hi ? rho.rho[c + stride] : rho.rho[c];
            double span = (has_lo && has_hi) ? 2 * h : h;
            grad[a] = (hi - lo) / span;
            stride *= grid.n[a];
        }
        for (std::size_t a = 0; a < d; ++a)
        {
            double s = 0;
            for (std::size_t j = 0; j < d; ++j)
                s += amat[a * d + j] * grad[j];
            out.v[c * d + a] = b[a] - 0.5 * s / rho.rho[c];
        }
    }
    return out;
}

ContinuityReport continuity_residual(DensityTrajectory const& traj, ControlProblem const& prob,
                                     FeedbackPolicy const& pol)
{
    require(traj.densities.size() >= 2, ErrorCode::invalid_argument,
            "continuity residual needs at least two stored densities");
    Grid const& grid = traj.densities.front().grid;
    std::size_t d = grid.dim(), cells = grid.cells();
    double t0 = traj.densities.front().t, t1 = traj.densities.back().t;
    auto tests = test_battery(grid, t0, t1);
    auto centers = grid.centers();
    double vol = grid.cell_volume();

    std::size_t nt = traj.densities.size();
    std::vector<double> integrand(nt * tests.size(), 0);
    parallel_for(nt, [&](std::size_t k) {
        auto const& rho = traj.densities[k];
        auto vel = velocity_field(rho, prob, pol, rho.t);
        std::vector<double> g(d);
        for (std::size_t j = 0; j < tests.size(); ++j)
        {
            auto const& tf = tests[j];
            double eta = tf.eta(rho.t), deta = tf.eta_prime(rho.t);
            if (eta == 0 && deta == 0)
                continue;
            double s = 0;
            for (std::size_t c = 0; c < cells; ++c)
            {
                if (!vel.valid[c])
                    continue;
                std::span<const double> x(centers.data() + c * d, d);
                double phi = tf.phi(x);
                tf.grad_phi(x, g);
                double dot = 0;
                for (std::size_t a = 0; a < d; ++a)
                    dot += vel.v[c * d + a] * g[a];
                s += rho.rho[c] * (deta * phi + eta * dot);
            }
            integrand[k * tests.size() + j] = s * vol;
        }
    });
    ContinuityReport rep;
    rep.per_test.assign(tests.size(), 0);
    for (std::size_t j = 0; j < tests.size(); ++j)
    {
        double s = 0;
        for (std::size_t k = 0; k + 1 < nt; ++k)
        {
            double dt = traj.densities[k + 1].t - traj.densities[k].t;
            s += 0.5 * dt * (integrand[k * tests.size() + j] + integrand[(k + 1) * tests.size() + j]);
        }
        rep.per_test[j] = std::abs(s);
        rep.residual = std::max(rep.residual, rep.per_test[j]);
    }
    return rep;
}

//---------------------------------------------------------------------------//
double reflected_bm_density_1d(double t, double x, double y, double sigma, double a, double b)
{
    require(t > 0, ErrorCode::invalid_argument, "elapsed time must be positive");
    require(sigma > 0 && a < b, ErrorCode::invalid_argument, "need sigma > 0 and a < b");
    double var = sigma * sigma * t;
    double norm = 1 / std::sqrt(2 * std::numbers::pi * var);
    auto phi = [&](double z) { return norm * std::exp(-z * z / (2 * var)); };
    double len = b - a;
    if (var > len * len)
    {
        // Neumann eigenfunction expansion converges fast for long times.
        double u = (x - a) / len, w = (y - a) / len, s = 1;
        for (long k = 1; k < 1000; ++k)
        {
            double decay = std::exp(-0.5 * var * std::pow(k * std::numbers::pi / len, 2));
            s += 2 * std::cos(k * std::numbers::pi * u) * std::cos(k * std::numbers::pi * w) * decay;
            if (decay < 1e-18)
                break;
        }
        return s / len;
    }
    double s = phi(y - x) + phi(y + x - 2 * a);
    for (long k = 1; k < 1000; ++k)
    {
        double shift = 2 * k * len;
        double add = phi(y - x + shift) + phi(y - x - shift) + phi(y + x - 2 * a + shift) +
                     phi(y + x - 2 * a - shift);
        s += add;
        if (add < 1e-17 * s)
            break;
    }
    return s;
}

double heat_bound_kappa1(std::vector<HeatSample> const& samples, std::size_t dim, double kappa2)
{
    double half_d = 0.5 * static_cast<double>(dim);
    double lk = 0;
    for (auto const& s : samples)
    {
        if (!(s.p > 0))
            return kInf;
        double r2 = (s.y - s.x) * (s.y - s.x);
        double lt = std::log(s.t), lp = std::log(s.p);
        double upper = lp + half_d * lt + kappa2 * r2 / s.t;
        double lower = -half_d * lt - r2 / (kappa2 * s.t) - lp;
        lk = std::max({lk, upper, lower});
    }
    return std::exp(lk);
}

HeatFit heat_bound_fit(std::vector<HeatSample> const& samples, std::size_t dim,
                       std::vector<double> kappa2_grid)
{
    if (kappa2_grid.empty())
        for (int i = 0; i <= 600; ++i)
            kappa2_grid.push_back(std::pow(10.0, -3 + 6.0 * i / 600));
    HeatFit fit;
    double best = kInf;
    for (double k2 : kappa2_grid)
    {
        double k1 = heat_bound_kappa1(samples, dim, k2);
        if (k1 < best)
        {
            best = k1;
            fit.kappa2 = k2;
        }
    }
    fit.feasible = std::isfinite(best);
    fit.kappa1 = best;
    return fit;
}
}  // namespace rmv
