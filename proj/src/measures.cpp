// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "rmv/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rmv/error.hpp"

namespace rmv
{
namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_dim(EmpiricalMeasure const& mu, EmpiricalMeasure const& nu)
{
    require(mu.dim() == nu.dim(), ErrorCode::dimension_mismatch,
            "measures have different dimensions");
    require(mu.size() > 0 && nu.size() > 0, ErrorCode::invalid_argument, "empty measure");
}

std::vector<double> cost_matrix(EmpiricalMeasure const& mu, EmpiricalMeasure const& nu, int order)
{
    std::size_t n = mu.size(), m = nu.size();
    std::vector<double> c(n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            c[i * m + j] = ground_cost(mu.point(i), nu.point(j), order);
    return c;
}

double plan_cost(std::vector<PlanEntry> const& entries, EmpiricalMeasure const& mu,
                 EmpiricalMeasure const& nu, int order)
{
    double s = 0;
    for (auto const& e : entries)
        s += e.mass * ground_cost(mu.point(e.source), nu.point(e.target), order);
    return s;
}

double root_of_cost(double cost, int order)
{
    cost = std::max(cost, 0.0);
    return order == 1 ? cost : std::pow(cost, 1.0 / order);
}

// Jonker-Volgenant style shortest augmenting path on a dense n x n matrix.
// Returns the column assigned to each row.
std::vector<std::size_t> solve_assignment(std::vector<double> const& c, std::size_t n)
{
    std::vector<double> u(n + 1, 0), v(n + 1, 0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i)
    {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do
        {
            used[j0] = 1;
            std::size_t i0 = p[j0], j1 = 0;
            double delta = kInf;
            for (std::size_t j = 1; j <= n; ++j)
            {
                if (used[j])
                    continue;
                double cur = c[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j])
                {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta)
                {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j)
            {
                if (used[j])
                {
                    u[p[j]] += delta;
                    v[j] -= delta;
                }
                else
                {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do
        {
            std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> row_to_col(n);
    for (std::size_t j = 1; j <= n; ++j)
        row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

// Transportation simplex on the bipartite tree of basic cells. Nodes 0..n-1
// are rows and n..n+m-1 columns.
class TransportSimplex
{
  public:
    TransportSimplex(std::vector<double> const& a, std::vector<double> const& b,
                     std::vector<double> const& c)
        : n_(a.size()), m_(b.size()), c_(c)
    {
        northwest_corner(a, b);
    }

    std::vector<PlanEntry> solve()
    {
        double cmax = *std::max_element(c_.begin(), c_.end());
        double tol = 1e-12 * std::max(cmax, 1.0);
        std::size_t max_iter = 50 * (n_ + m_) * (n_ + m_) + 1000;
        int degenerate_run = 0;
        std::vector<double> u(n_), v(m_);
        for (std::size_t iter = 0;; ++iter)
        {
            require(iter < max_iter, ErrorCode::check_failed,
                    "transportation simplex did not terminate");
            potentials(u, v);
            bool bland = degenerate_run > 50;
            std::size_t ei = 0, ej = 0;
            double best = -tol;
            bool found = false;
            for (std::size_t i = 0; i < n_ && !(bland && found); ++i)
            {
                for (std::size_t j = 0; j < m_; ++j)
                {
                    double r = c_[i * m_ + j] - u[i] - v[j];
                    if (r < best)
                    {
                        best = r;
                        ei = i;
                        ej = j;
                        found = true;
                        if (bland)
                            break;
                    }
                }
            }
            if (!found)
                break;
            double theta = pivot(ei, ej);
            degenerate_run = theta > 0 ? 0 : degenerate_run + 1;
        }
        std::vector<PlanEntry> out;
        for (auto const& cell : basis_)
            if (cell.flow > 0)
                out.push_back({cell.i, cell.j, cell.flow});
        return out;
    }

  private:
    struct Cell
    {
        std::size_t i, j;
        double flow;
    };

    void northwest_corner(std::vector<double> const& a, std::vector<double> const& b)
    {
        std::vector<double> ra = a, rb = b;
        std::size_t i = 0, j = 0;
        while (i < n_ && j < m_)
        {
            double q = std::min(ra[i], rb[j]);
            basis_.push_back({i, j, q});
            ra[i] -= q;
            rb[j] -= q;
            if (i + 1 == n_)
                ++j;
            else if (j + 1 == m_)
                ++i;
            else if (ra[i] <= rb[j])
                ++i;
            else
                ++j;
        }
        rebuild_adjacency();
    }

    void rebuild_adjacency()
    {
        adj_.assign(n_ + m_, {});
        for (std::size_t k = 0; k < basis_.size(); ++k)
        {
            adj_[basis_[k].i].push_back(k);
            adj_[n_ + basis_[k].j].push_back(k);
        }
    }

    std::size_t other(std::size_t k, std::size_t node) const
    {
        std::size_t r = basis_[k].i, c = n_ + basis_[k].j;
        return node == r ? c : r;
    }

    void potentials(std::vector<double>& u, std::vector<double>& v) const
    {
        std::vector<char> seen(n_ + m_, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        u[0] = 0;
        while (!stack.empty())
        {
            std::size_t node = stack.back();
            stack.pop_back();
            for (std::size_t k : adj_[node])
            {
                std::size_t nb = other(k, node);
                if (seen[nb])
                    continue;
                seen[nb] = 1;
                double cij = c_[basis_[k].i * m_ + basis_[k].j];
                if (nb >= n_)
                    v[nb - n_] = cij - u[node];
                else
                    u[nb] = cij - v[node - n_];
                stack.push_back(nb);
            }
        }
    }

    // Enter cell (ei, ej); returns the step length.
    double pivot(std::size_t ei, std::size_t ej)
    {
        std::size_t src = ei, dst = n_ + ej;
        std::vector<std::size_t> parent_edge(n_ + m_, SIZE_MAX);
        std::vector<char> seen(n_ + m_, 0);
        std::vector<std::size_t> stack{src};
        seen[src] = 1;
        while (!stack.empty() && !seen[dst])
        {
            std::size_t node = stack.back();
            stack.pop_back();
            for (std::size_t k : adj_[node])
            {
                std::size_t nb = other(k, node);
                if (seen[nb])
                    continue;
                seen[nb] = 1;
                parent_edge[nb] = k;
                stack.push_back(nb);
            }
        }
        // Path from the entering column back to the entering row; signs
        // alternate starting with a decrease.
        std::vector<std::size_t> path;
        for (std::size_t node = dst; node != src;)
        {
            std::size_t k = parent_edge[node];
            path.push_back(k);
            node = other(k, node);
        }
        double theta = kInf;
        std::size_t leave = SIZE_MAX;
        for (std::size_t t = 0; t < path.size(); t += 2)
        {
            double f = basis_[path[t]].flow;
            if (f < theta || (f == theta && path[t] < leave))
            {
                theta = f;
                leave = path[t];
            }
        }
        for (std::size_t t = 0; t < path.size(); ++t)
        {
            double& f = basis_[path[t]].flow;
            f += (t % 2 == 0) ? -theta : theta;
            if (t % 2 == 0 && f < 0)
                f = 0;
        }
        basis_[leave] = {ei, ej, theta};
        rebuild_adjacency();
        return theta;
    }

    std::size_t n_, m_;
    std::vector<double> const& c_;
    std::vector<Cell> basis_;
    std::vector<std::vector<std::size_t>> adj_;
};

double log_sum_exp(std::vector<double> const& z)
{
    double mx = *std::max_element(z.begin(), z.end());
    if (mx == -kInf)
        return -kInf;
    double s = 0;
    for (double x : z)
        s += std::exp(x - mx);
    return mx + std::log(s);
}
}  // namespace

//---------------------------------------------------------------------------//
EmpiricalMeasure::EmpiricalMeasure(std::size_t dim, std::vector<double> points,
                                   std::vector<double> weights)
    : dim_(dim), points_(std::move(points)), weights_(std::move(weights))
{
    require(dim_ > 0, ErrorCode::invalid_argument, "measure dimension must be positive");
    require(points_.size() == dim_ * weights_.size(), ErrorCode::dimension_mismatch,
            "point array does not match weights and dimension");
    require(!weights_.empty(), ErrorCode::invalid_argument, "empty measure");
    // Compensated sum so large uniform clouds validate at 1e-12.
    double total = 0, comp = 0;
    for (double w : weights_)
    {
        require(w >= 0 && std::isfinite(w), ErrorCode::invalid_argument,
                "weights must be finite and nonnegative");
        double t = total + w;
        comp += std::abs(total) >= w ? (total - t) + w : (w - t) + total;
        total = t;
    }
    total += comp;
    require(std::abs(total - 1.0) <= 1e-12, ErrorCode::invalid_argument,
            "weights must sum to one");
    for (double x : points_)
        require(std::isfinite(x), ErrorCode::invalid_argument, "non-finite support point");
}

EmpiricalMeasure EmpiricalMeasure::uniform(std::size_t dim, std::vector<double> points)
{
    require(dim > 0 && points.size() % dim == 0 && !points.empty(),
            ErrorCode::dimension_mismatch, "point array does not match dimension");
    std::size_t n = points.size() / dim;
    return EmpiricalMeasure(dim, std::move(points), std::vector<double>(n, 1.0 / n));
}

EmpiricalMeasure EmpiricalMeasure::dirac(Point const& x)
{
    return EmpiricalMeasure(x.size(), x, {1.0});
}

bool EmpiricalMeasure::has_uniform_weights() const
{
    double w0 = 1.0 / size();
    return std::all_of(weights_.begin(), weights_.end(),
                       [w0](double w) { return std::abs(w - w0) <= 1e-15; });
}

void EmpiricalMeasure::require_in(Domain const& domain) const
{
    require(domain.dim() == dim_, ErrorCode::dimension_mismatch,
            "measure and domain dimensions differ");
    for (std::size_t i = 0; i < size(); ++i)
        if (!domain.in_closure(point(i)))
            fail(ErrorCode::out_of_domain,
                 "support point " + std::to_string(i) + " lies outside the domain");
}

SignedCombo SignedCombo::difference(EmpiricalMeasure const& mu, EmpiricalMeasure const& nu)
{
    SignedCombo s;
    s.add(1.0, mu);
    s.add(-1.0, nu);
    return s;
}

void SignedCombo::add(double coefficient, EmpiricalMeasure mu)
{
    require(terms_.empty() || mu.dim() == dim(), ErrorCode::dimension_mismatch,
            "combination terms have different dimensions");
    terms_.emplace_back(coefficient, std::move(mu));
}

double moment(EmpiricalMeasure const& mu, std::span<const int> exponents)
{
    require(exponents.size() == mu.dim(), ErrorCode::dimension_mismatch,
            "exponent vector does not match dimension");
    return mu.integrate([&](std::span<const double> x) {
        double p = 1;
        for (std::size_t k = 0; k < x.size(); ++k)
            p *= std::pow(x[k], exponents[k]);
        return p;
    });
}

double moment(SignedCombo const& combo, std::span<const int> exponents)
{
    double s = 0;
    for (auto const& [c, mu] : combo.terms())
        s += c * moment(mu, exponents);
    return s;
}

//---------------------------------------------------------------------------//
std::vector<double> TransportPlan::row_sums() const
{
    std::vector<double> r(source.size(), 0);
    for (auto const& e : entries)
        r[e.source] += e.mass;
    return r;
}

std::vector<double> TransportPlan::col_sums() const
{
    std::vector<double> c(target.size(), 0);
    for (auto const& e : entries)
        c[e.target] += e.mass;
    return c;
}

double TransportPlan::marginal_error() const
{
    double err = 0;
    auto r = row_sums();
    for (std::size_t i = 0; i < r.size(); ++i)
        err = std::max(err, std::abs(r[i] - source.weight(i)));
    auto c = col_sums();
    for (std::size_t j = 0; j < c.size(); ++j)
        err = std::max(err, std::abs(c[j] - target.weight(j)));
    return err;
}

double ground_cost(std::span<const double> x, std::span<const double> y, int order)
{
    double s = 0;
    for (std::size_t k = 0; k < x.size(); ++k)
        s += (x[k] - y[k]) * (x[k] - y[k]);
    if (order == 2)
        return s;
    double r = std::sqrt(s);
    return order == 1 ? r : std::pow(r, order);
}

WassersteinResult wasserstein_exact(EmpiricalMeasure const& mu, EmpiricalMeasure const& nu, int order)
{
    require_same_dim(mu, nu);
    require(order >= 1, ErrorCode::invalid_argument, "order must be at least 1");
    require(mu.size() <= kExactSupportLimit && nu.size() <= kExactSupportLimit,
            ErrorCode::support_too_large, "support exceeds exact-solver limit of 512 points");
    WassersteinResult res;
    res.plan.source = mu;
    res.plan.target = nu;
    res.plan.order = order;
    auto c = cost_matrix(mu, nu, order);
    if (mu.size() == nu.size() && mu.has_uniform_weights() && nu.has_uniform_weights())
    {
        std::size_t n = mu.size();
        auto assign = solve_assignment(c, n);
        for (std::size_t i = 0; i < n; ++i)
            res.plan.entries.push_back({i, assign[i], 1.0 / n});
    }
    else
    {
        TransportSimplex lp(mu.weights(), nu.weights(), c);
        res.plan.entries = lp.solve();
    }
    res.plan.cost = plan_cost(res.plan.entries, mu, nu, order);
    res.value = root_of_cost(res.plan.cost, order);
    return res;
}

TransportPlan monotone_plan_1d(EmpiricalMeasure const& mu, EmpiricalMeasure const& nu, int order)
{
    require_same_dim(mu, nu);
    require(mu.dim() == 1, ErrorCode::dimension_mismatch, "quantile coupling needs d = 1");
    require(order >= 1, ErrorCode::invalid_argument, "order must be at least 1");
    auto sorted_index = [](EmpiricalMeasure const& m) {
        std::vector<std::size_t> idx(m.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return m.points()[a] < m.points()[b];
        });
        return idx;
    };
    auto ia = sorted_index(mu), ib = sorted_index(nu);
    TransportPlan plan{mu, nu, {}, order, 0};
    std::size_t i = 0, j = 0;
    double ra = mu.weight(ia[0]), rb = nu.weight(ib[0]);
    for (;;)
    {
        double q = std::min(ra, rb);
        if (q > 0)
            plan.entries.push_back({ia[i], ib[j], q});
        ra -= q;
        rb -= q;
        bool last_i = i + 1 == ia.size(), last_j = j + 1 == ib.size();
        if (last_i && last_j)
            break;
        if (last_j || (!last_i && ra <= rb))
            ra = mu.weight(ia[++i]);
        else
            rb = nu.weight(ib[++j]);
    }
    plan.cost = plan_cost(plan.entries, mu, nu, order);
    return plan;
}

double wasserstein_1d_quantile(EmpiricalMeasure const& mu, EmpiricalMeasure const& nu, int order)
{
    return root_of_cost(monotone_plan_1d(mu, nu, order).cost, order);
}

TransportPlan optimal_plan(EmpiricalMeasure const& mu, EmpiricalMeasure const& nu, int order)
{
    require_same_dim(mu, nu);
    if (mu.size() <= kExactSupportLimit && nu.size() <= kExactSupportLimit)
        return wasserstein_exact(mu, nu, order).plan;
    if (mu.dim() == 1)
        return monotone_plan_1d(mu, nu, order);
    fail(ErrorCode::support_too_large, "support exceeds exact-solver limit of 512 points");
}

double wasserstein(EmpiricalMeasure const& mu, EmpiricalMeasure const& nu, int order)
{
    require_same_dim(mu, nu);
    if (mu.dim() == 1)
        return wasserstein_1d_quantile(mu, nu, order);
    return wasserstein_exact(mu, nu, order).value;
}

SinkhornResult wasserstein_sinkhorn(EmpiricalMeasure const& mu, EmpiricalMeasure const& nu,
                                    int order, double epsilon, int max_iter, double tol)
{
    require_same_dim(mu, nu);
    require(epsilon > 0, ErrorCode::invalid_argument, "epsilon must be positive");
    require(order >= 1, ErrorCode::invalid_argument, "order must be at least 1");
    std::size_t n = mu.size(), m = nu.size();
    auto c = cost_matrix(mu, nu, order);
    std::vector<double> loga(n), logb(m), f(n, 0), g(m, 0);
    for (std::size_t i = 0; i < n; ++i)
        loga[i] = std::log(mu.weight(i));
    for (std::size_t j = 0; j < m; ++j)
        logb[j] = std::log(nu.weight(j));

    SinkhornResult res;
    std::vector<double> zr(m), zc(n);
    auto row_error = [&] {
        double err = 0;
        for (std::size_t i = 0; i < n; ++i)
        {
            if (mu.weight(i) == 0)
                continue;
            double s = 0;
            for (std::size_t j = 0; j < m; ++j)
                s += std::exp((f[i] + g[j] - c[i * m + j]) / epsilon);
            err += std::abs(s - mu.weight(i));
        }
        return err;
    };
    for (int it = 1; it <= max_iter; ++it)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            for (std::size_t j = 0; j < m; ++j)
                zr[j] = (g[j] - c[i * m + j]) / epsilon;
            f[i] = epsilon * (loga[i] - log_sum_exp(zr));
        }
        for (std::size_t j = 0; j < m; ++j)
        {
            for (std::size_t i = 0; i < n; ++i)
                zc[i] = (f[i] - c[i * m + j]) / epsilon;
            g[j] = epsilon * (logb[j] - log_sum_exp(zc));
        }
        res.iterations = it;
        if (it % 10 == 0 || it == max_iter)
        {
            res.marginal_error = row_error();
            if (res.marginal_error < tol)
            {
                res.converged = true;
                break;
            }
        }
    }
    res.plan.source = mu;
    res.plan.target = nu;
    res.plan.order = order;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
        {
            double q = std::exp((f[i] + g[j] - c[i * m + j]) / epsilon);
            if (q > 0)
                res.plan.entries.push_back({i, j, q});
        }
    res.plan.cost = plan_cost(res.plan.entries, mu, nu, order);
    res.value = root_of_cost(res.plan.cost, order);
    return res;
}

double w1_dual_gap(EmpiricalMeasure const& mu, EmpiricalMeasure const& nu, ScalarFunction const& h)
{
    require_same_dim(mu, nu);
    std::vector<std::span<const double>> pts;
    std::vector<double> hv;
    for (auto const* m : {&mu, &nu})
        for (std::size_t i = 0; i < m->size(); ++i)
        {
            pts.push_back(m->point(i));
            hv.push_back(h(m->point(i)));
        }
    // Check pairs along a strided subset so the cost stays near O(200^2).
    std::size_t stride = std::max<std::size_t>(1, pts.size() / 200);
    for (std::size_t a = 0; a < pts.size(); a += stride)
        for (std::size_t b = a + 1; b < pts.size(); b += stride)
        {
            double dist = std::sqrt(ground_cost(pts[a], pts[b], 2));
            require(std::abs(hv[a] - hv[b]) <= dist * (1 + 1e-9) + 1e-12,
                    ErrorCode::invalid_argument, "test function is not 1-Lipschitz");
        }
    double s = 0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        s += mu.weight(i) * hv[i];
    for (std::size_t j = 0; j < nu.size(); ++j)
        s -= nu.weight(j) * hv[mu.size() + j];
    return s;
}

std::vector<double> barycentric_map(TransportPlan const& plan)
{
    std::size_t d = plan.source.dim(), n = plan.source.size();
    std::vector<double> t(n * d, 0), mass(n, 0);
    for (auto const& e : plan.entries)
    {
        auto y = plan.target.point(e.target);
        for (std::size_t k = 0; k < d; ++k)
            t[e.source * d + k] += e.mass * y[k];
        mass[e.source] += e.mass;
    }
    for (std::size_t i = 0; i < n; ++i)
    {
        require(mass[i] > 0, ErrorCode::invalid_argument,
                "barycentric map undefined at a zero-mass source point");
        for (std::size_t k = 0; k < d; ++k)
            t[i * d + k] /= mass[i];
    }
    return t;
}

std::vector<double> dl_w2_squared(EmpiricalMeasure const& mu, EmpiricalMeasure const& zeta)
{
    auto t = barycentric_map(optimal_plan(mu, zeta, 2));
    std::size_t d = mu.dim();
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t k = 0; k < d; ++k)
            t[i * d + k] = 2 * (mu.point(i)[k] - t[i * d + k]);
    return t;
}

EmpiricalMeasure pushforward(EmpiricalMeasure const& mu, VectorField const& v, double eps,
                             Domain const& domain)
{
    require(domain.dim() == mu.dim(), ErrorCode::dimension_mismatch,
            "measure and domain dimensions differ");
    std::size_t d = mu.dim();
    std::vector<double> pts(mu.size() * d), vel(d), y(d);
    for (std::size_t i = 0; i < mu.size(); ++i)
    {
        auto x = mu.point(i);
        v(x, vel);
        for (std::size_t k = 0; k < d; ++k)
            y[k] = x[k] + eps * vel[k];
        domain.project(y, std::span<double>(pts.data() + i * d, d));
    }
    return EmpiricalMeasure(d, std::move(pts), mu.weights());
}
}  // namespace rmv
