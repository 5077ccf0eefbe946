// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "rmv/geometry.hpp"

namespace rmv
{
//---------------------------------------------------------------------------//
/*!
 * Weighted point cloud on a domain closure.
 *
 * Points are stored row-major (size() x dim()). Weights are nonnegative
 * and sum to one within 1e-12.
 */
class EmpiricalMeasure
{
  public:
    EmpiricalMeasure() = default;
    EmpiricalMeasure(std::size_t dim, std::vector<double> points, std::vector<double> weights);

    static EmpiricalMeasure uniform(std::size_t dim, std::vector<double> points);
    static EmpiricalMeasure dirac(Point const& x);

    std::size_t size() const { return weights_.size(); }
    std::size_t dim() const { return dim_; }
    std::span<const double> point(std::size_t i) const
    {
        return {points_.data() + i * dim_, dim_};
    }
    double weight(std::size_t i) const { return weights_[i]; }
    std::vector<double> const& points() const { return points_; }
    std::vector<double> const& weights() const { return weights_; }
    bool has_uniform_weights() const;

    //! Throws out_of_domain unless every support point lies in the closure.
    void require_in(Domain const& domain) const;

    template<class F>
    double integrate(F&& f) const
    {
        double s = 0;
        for (std::size_t i = 0; i < size(); ++i)
            s += weights_[i] * f(point(i));
        return s;
    }

  private:
    std::size_t dim_ = 0;
    std::vector<double> points_;
    std::vector<double> weights_;
};

//! Finite linear combination sum_k c_k mu_k of empirical measures.
class SignedCombo
{
  public:
    SignedCombo() = default;
    explicit SignedCombo(EmpiricalMeasure mu) { add(1.0, std::move(mu)); }

    static SignedCombo difference(EmpiricalMeasure const& mu, EmpiricalMeasure const& nu);

    void add(double coefficient, EmpiricalMeasure mu);
    std::vector<std::pair<double, EmpiricalMeasure>> const& terms() const { return terms_; }
    std::size_t dim() const { return terms_.empty() ? 0 : terms_.front().second.dim(); }

    template<class F>
    double integrate(F&& f) const
    {
        double s = 0;
        for (auto const& [c, mu] : terms_)
            s += c * mu.integrate(f);
        return s;
    }

  private:
    std::vector<std::pair<double, EmpiricalMeasure>> terms_;
};

//! Integral of the monomial x^n (componentwise powers).
double moment(EmpiricalMeasure const& mu, std::span<const int> exponents);
double moment(SignedCombo const& combo, std::span<const int> exponents);

//---------------------------------------------------------------------------//
struct PlanEntry
{
    std::size_t source;
    std::size_t target;
    double mass;
};

//! Discrete coupling stored sparsely; cost = sum mass * |x_i - y_j|^order.
struct TransportPlan
{
    EmpiricalMeasure source;
    EmpiricalMeasure target;
    std::vector<PlanEntry> entries;
    int order = 2;
    double cost = 0;

    std::vector<double> row_sums() const;
    std::vector<double> col_sums() const;
    //! Largest absolute deviation of the plan marginals from the inputs.
    double marginal_error() const;
};

struct WassersteinResult
{
    double value = 0;
    TransportPlan plan;
};

struct SinkhornResult
{
    double value = 0;
    TransportPlan plan;
    bool converged = false;
    int iterations = 0;
    double marginal_error = 0;
};

//! Largest support size accepted by the exact solvers.
inline constexpr std::size_t kExactSupportLimit = 512;

double ground_cost(std::span<const double> x, std::span<const double> y, int order);

/*!
 * Exact W_p by linear programming.
 *
 * Equal-size uniform-weight inputs are solved as an assignment problem
 * (shortest augmenting paths); general weights by the transportation simplex
 * started from the northwest-corner rule.
 */
WassersteinResult wasserstein_exact(EmpiricalMeasure const& mu, EmpiricalMeasure const& nu, int order);

//! Exact 1-D W_p from the quantile coupling (sorted merge of CDF breakpoints).
double wasserstein_1d_quantile(EmpiricalMeasure const& mu, EmpiricalMeasure const& nu, int order);
//! The quantile coupling itself; optimal in 1-D for order >= 1.
TransportPlan monotone_plan_1d(EmpiricalMeasure const& mu, EmpiricalMeasure const& nu, int order);

/*!
 * Optimal plan by the cheapest exact route: the assignment/simplex solver up
 * to kExactSupportLimit points, the quantile coupling for larger 1-D inputs.
 */
TransportPlan optimal_plan(EmpiricalMeasure const& mu, EmpiricalMeasure const& nu, int order);
double wasserstein(EmpiricalMeasure const& mu, EmpiricalMeasure const& nu, int order);

//! Entropic OT in the log domain; epsilon is in absolute cost units.
SinkhornResult wasserstein_sinkhorn(EmpiricalMeasure const& mu, EmpiricalMeasure const& nu,
                                    int order, double epsilon, int max_iter = 20000,
                                    double tol = 1e-8);

using ScalarFunction = std::function<double(std::span<const double>)>;
using VectorField = std::function<void(std::span<const double>, std::span<double>)>;

/*!
 * <mu, h> - <nu, h> for a 1-Lipschitz h.
 *
 * The Lipschitz bound is spot-checked on pairs of support points; a violation
 * throws invalid_argument.
 */
double w1_dual_gap(EmpiricalMeasure const& mu, EmpiricalMeasure const& nu, ScalarFunction const& h);

//! T(x_i) = sum_j pi_ij y_j / sum_j pi_ij, row-major (source size x dim).
std::vector<double> barycentric_map(TransportPlan const& plan);

//! D^L W_2^2(., zeta)(x_i) = 2 (x_i - T(x_i)) from the optimal order-2 plan.
std::vector<double> dl_w2_squared(EmpiricalMeasure const& mu, EmpiricalMeasure const& zeta);

//! Points moved to project(x_i + eps v(x_i)); weights unchanged.
EmpiricalMeasure pushforward(EmpiricalMeasure const& mu, VectorField const& v, double eps,
                             Domain const& domain);
}  // namespace rmv
