// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rmv/dynamics.hpp"
#include "rmv/measures.hpp"
#include "rmv/polyfam.hpp"

namespace rmv
{
//! Scalar function on the state space: a real polynomial or a cosine product.
class BasisFunction
{
  public:
    struct Term
    {
        double coef;
        MultiIndex exponents;
    };

    static BasisFunction polynomial(std::size_t dim, std::vector<Term> terms);
    static BasisFunction monomial(MultiIndex exponents, double coef = 1);
    //! prod_i cos(pi m_i (x_i - lo_i) / (hi_i - lo_i)) on the bounding box.
    static BasisFunction cosine(Domain const& domain, std::vector<int> modes);

    std::size_t dim() const { return dim_; }
    bool is_cosine() const { return cosine_; }
    double value(std::span<const double> x) const;
    void gradient(std::span<const double> x, std::span<double> out) const;
    //! Row-major d x d.
    void hessian(std::span<const double> x, std::span<double> out) const;
    std::string describe() const;

  private:
    std::size_t dim_ = 0;
    bool cosine_ = false;
    std::vector<Term> terms_;
    std::vector<int> modes_;
    Point lo_, scale_;  //!< scale_i = pi m_i / (hi_i - lo_i)
};

//! a(t) = sum_k p_k t^k + q / t.
struct TimeFactor
{
    std::vector<double> poly{1.0};
    double inverse = 0;

    double value(double t) const;
    double derivative(double t) const;
};

class Functional;

//! D^L u(mu)(.) and its x-gradient with (t, mu) fixed.
class BoundDerivative
{
  public:
    std::size_t dim() const { return dim_; }
    //! dl gets d values; grad (optional, d x d row-major) gets the Jacobian.
    void eval(std::span<const double> x, std::span<double> dl, std::span<double> grad = {}) const;

  private:
    friend class Functional;
    struct Piece
    {
        double weight = 0;  //!< multiplies the basis derivatives
        std::shared_ptr<BasisFunction const> f;
        std::shared_ptr<PolyFamily const> family;  //!< keeps potential valid
        PolyPotential potential;                   //!< used when f is null
    };
    std::size_t dim_ = 0;
    std::vector<Piece> pieces_;
};

/*!
 * u(t, mu) = a(t) + sum_j c_j(t) u_j(mu), each u_j one of
 *   moment          <mu, f>,          D^L u = grad f
 *   squared moment  <mu, f>^2,        D^L u = 2 <mu, f> grad f
 *   S-based         S(mu - nu0; K),   D^L u from the polynomial family
 * with closed-form time derivative.
 */
class Functional
{
  public:
    enum class Kind
    {
        moment,
        squared_moment,
        s_based
    };

    static Functional moment(BasisFunction f);
    static Functional squared_moment(BasisFunction f);
    static Functional s_based(std::shared_ptr<PolyFamily const> family, EmpiricalMeasure anchor,
                              int kmax = -1);
    //! Terms must be single plain functionals (no time factor of their own). Without
    //! terms the result is a pure function of time and has dim() == 0.
    static Functional time_augmented(TimeFactor a, std::vector<std::pair<TimeFactor, Functional>> terms);

    std::size_t dim() const { return dim_; }
    double value(double t, EmpiricalMeasure const& mu) const;
    double time_derivative(double t, EmpiricalMeasure const& mu) const;
    //! Sum of the S truncation tails entering value(); 0 without S terms.
    double tail_bound(double t, EmpiricalMeasure const& mu) const;
    BoundDerivative bind(double t, EmpiricalMeasure const& mu) const;
    //! <A D^L u, n> = 0 on the boundary: cosine terms only, diagonal A, interval or box.
    bool boundary_compatible(Domain const& domain, std::vector<double> const& a) const;
    std::string describe() const;

  private:
    struct Atom
    {
        Kind kind;
        TimeFactor factor;
        std::shared_ptr<BasisFunction const> f;
        std::shared_ptr<PolyFamily const> family;
        std::shared_ptr<EmpiricalMeasure const> anchor;
        int kmax = -1;
    };
    double atom_value(Atom const& a, EmpiricalMeasure const& mu, double* tail) const;

    std::size_t dim_ = 0;
    TimeFactor base_{{0.0}, 0};
    std::vector<Atom> atoms_;
};

struct DLField
{
    std::vector<double> values;     //!< n x d
    std::vector<double> gradients;  //!< n x d x d
    double tail = 0;                //!< truncation tail of S terms
};

DLField dl_eval(Functional const& u, double t, EmpiricalMeasure const& mu,
                std::span<const double> points);

struct HamiltonianParts
{
    double drift = 0;      //!< int <b, D^L u> dmu
    double diffusion = 0;  //!< 1/2 int tr(A grad D^L u) dmu
    double running = 0;    //!< int running cost dmu
};

HamiltonianParts hamiltonian_parts(ControlProblem const& prob, double t,
                                   EmpiricalMeasure const& mu, Functional const& u,
                                   std::span<const double> alpha);

/*!
 * int <b(t,x,mu,alpha), D^L u> dmu + 1/2 int tr(A grad D^L u) dmu
 * + int running(t,x,mu,alpha) dmu for a fixed control value alpha.
 */
double hamiltonian(ControlProblem const& prob, double t, EmpiricalMeasure const& mu,
                   Functional const& u, std::span<const double> alpha,
                   bool include_running = true);

struct HamiltonianInfimum
{
    double value = 0;  //!< closed form
    Point alpha;
    double grid_value = 0;
    Point grid_alpha;
    //! Worst-case excess of the final grid for a quadratic control cost.
    double grid_tolerance = 0;
};

/*!
 * inf over the control box. The drift is affine and the running cost
 * quadratic in alpha, so the minimizer is computed in closed form and cross
 * checked by a 3-level, 9-point-per-axis refined grid search whose window
 * shrinks by 8 per level (final spacing (hi - lo) / 512).
 */
HamiltonianInfimum hamiltonian_infimum(ControlProblem const& prob, double t,
                                       EmpiricalMeasure const& mu, Functional const& u);

//! -d_t psi - inf_alpha H(t, mu, psi, alpha).
double hjb_residual(ControlProblem const& prob, Functional const& psi, double t,
                    EmpiricalMeasure const& mu);

struct FamilyPoint
{
    double t = 0;
    EmpiricalMeasure mu;
};

enum class Extremum
{
    maximum,  //!< subsolution test
    minimum   //!< supersolution test
};

struct ViscosityReport
{
    Extremum type = Extremum::maximum;
    std::size_t index = 0;
    std::vector<double> gaps;  //!< V - psi over the family
    double residual = 0;
    bool satisfied = false;
    double margin = 0;  //!< signed distance to violation, >= 0 when satisfied
    //! The extremum beats the runner-up by more than z times the value stderr.
    bool identified = false;
};

/*!
 * Evaluate the viscosity inequality at the extremum of V - psi over the
 * family. With claimed set, throws check_failed unless it is an extremum.
 */
ViscosityReport viscosity_test(ControlProblem const& prob, std::vector<FamilyPoint> const& family,
                               std::vector<double> const& values, Functional const& psi,
                               Extremum type, std::optional<std::size_t> claimed = std::nullopt,
                               double tolerance = 0, double value_std_error = 0,
                               double z = 3);

struct ChainRuleReport
{
    double lhs = 0;          //!< u(t2, mu_t2) - u(t1, mu_t1)
    double rhs = 0;          //!< time integral of d_t u + generator terms
    double residual = 0;     //!< lhs - rhs
    double boundary = 0;     //!< E int <D^L u, n> dk
    double martingale = 0;   //!< realized noise term of the residual
    double std_error = 0;    //!< from its quadratic variation
    bool compatible = false;
    //! residual when compatible, residual + boundary otherwise.
    double contract_residual() const { return compatible ? residual : residual + boundary; }
};

/*!
 * Measure-flow chain rule along a simulated particle system started at s
 * from law. Generator terms use the empirical law at the left end of each
 * step and each particle's own control.
 */
ChainRuleReport chainrule_check(ControlProblem const& prob, FeedbackPolicy const& pol,
                                Functional const& u, InitialLaw const& law, double s, double t1,
                                double t2, SimParams const& params);

//! Averages over the subsample replicates.
struct ContinuityPoint
{
    std::size_t n = 0;
    double w1 = 0;
    double max_diff = 0;  //!< max over the alpha grid
};

//! Subsample mu without replacement and compare Hamiltonians on the alpha grid.
//! Each replicate draws one random order; the sizes take nested prefixes of it.
std::vector<ContinuityPoint> hamiltonian_continuity(ControlProblem const& prob, double t,
                                                    EmpiricalMeasure const& mu,
                                                    Functional const& u,
                                                    std::vector<std::size_t> const& sizes,
                                                    std::vector<Point> const& alphas,
                                                    std::uint64_t seed,
                                                    std::size_t replicates = 1);

struct TimeContinuityReport
{
    std::vector<double> h;
    std::vector<double> w1;
    double slope = 0;
};

//! W1 between the empirical laws at s and s + h (at most 512 points when d > 1).
TimeContinuityReport w1_time_continuity(ControlProblem const& prob, FeedbackPolicy const& pol,
                                        InitialLaw const& law, double s,
                                        std::vector<double> const& h, SimParams const& params);
}  // namespace rmv
