// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rmv/geometry.hpp"
#include "rmv/measures.hpp"
#include "rmv/polyfam.hpp"

namespace rmv
{
//---------------------------------------------------------------------------//
//! Mean and a fixed list of moments <mu, x^e> of the current law.
class LawStats
{
  public:
    LawStats() = default;
    //! Uniform weights when weights is empty.
    static LawStats compute(std::size_t dim, std::span<const double> points,
                            std::span<const double> weights,
                            std::vector<MultiIndex> const& exponents);
    static LawStats compute(EmpiricalMeasure const& mu, std::vector<MultiIndex> const& exponents);

    Point const& mean() const { return mean_; }
    double moment(MultiIndex const& e) const;
    std::vector<MultiIndex> const& exponents() const { return exps_; }
    std::vector<double> const& values() const { return values_; }

  private:
    Point mean_;
    std::vector<MultiIndex> exps_;
    std::vector<double> values_;
};

//! Box of admissible control values.
struct ControlSet
{
    Point lo;
    Point hi;

    std::size_t dim() const { return lo.size(); }
    void clip(std::span<double> a) const;
    bool contains(std::span<const double> a) const;
};

/*!
 * Drift b = b0 + Bx x + Ba alpha + sum_q beta_q <mu, x^{e_q}>.
 *
 * With Bx = 0 the drift depends on the law only through the finite moment
 * list, the "moment" variant.
 */
struct DriftSpec
{
    struct MomentTerm
    {
        MultiIndex exponents;
        Point beta;
    };

    Point b0;
    std::vector<double> bx;      //!< d x d row-major, empty means zero
    std::vector<double> balpha;  //!< d x m row-major, empty means zero
    std::vector<MomentTerm> moments;

    bool moment_variant() const;
};

//! c + a|alpha|^2 + q|x - x_ref|^2 + r|mean - m_ref|^2.
struct RunningCost
{
    double constant = 0;
    double alpha_weight = 0;
    double state_weight = 0;
    Point x_ref;
    double mean_weight = 0;
    Point m_ref;
};

//! c + <l, x> + q|x - x_ref|^2 + r|mean - m_ref|^2.
struct TerminalCost
{
    double constant = 0;
    Point linear;
    double state_weight = 0;
    Point x_ref;
    double mean_weight = 0;
    Point m_ref;
};

class ControlProblem
{
  public:
    ControlProblem(Domain domain, std::vector<double> sigma, double horizon, ControlSet controls,
                   DriftSpec drift, RunningCost running, TerminalCost terminal,
                   double lipschitz_k1 = 0);

    Domain const& domain() const { return domain_; }
    std::size_t dim() const { return domain_.dim(); }
    std::size_t control_dim() const { return controls_.dim(); }
    double horizon() const { return horizon_; }
    ControlSet const& controls() const { return controls_; }
    DriftSpec const& drift_spec() const { return drift_; }
    RunningCost const& running() const { return running_; }
    TerminalCost const& terminal() const { return terminal_; }
    std::vector<double> const& sigma() const { return sigma_; }
    //! A = sigma sigma^T, row-major.
    std::vector<double> const& diffusion() const { return a_; }
    //! Smallest lambda with lambda^-1 |z|^2 <= <Az, z> <= lambda |z|^2; inf if degenerate.
    double ellipticity() const { return lambda0_; }
    //! sigma = 0 test mode; violates uniform ellipticity.
    bool degenerate() const { return degenerate_; }
    double k1() const { return k1_; }

    std::vector<MultiIndex> const& drift_exponents() const { return drift_exps_; }

    void drift(double t, std::span<const double> x, LawStats const& law,
               std::span<const double> alpha, std::span<double> out) const;
    //! Law-dependent part b0 + sum_q beta_q <mu, x^{e_q}>, shared by all particles.
    void drift_offset(LawStats const& law, std::span<double> out) const;
    //! offset + Bx x + Ba alpha.
    void drift_local(std::span<const double> offset, std::span<const double> x,
                     std::span<const double> alpha, std::span<double> out) const;
    double running_cost(double t, std::span<const double> x, LawStats const& law,
                        std::span<const double> alpha) const;
    double terminal_cost(std::span<const double> x, LawStats const& law) const;

    //! K2: upper bound of the running cost over the closure and U.
    double running_cost_bound() const;
    //! sup of the terminal cost over the closure.
    double terminal_cost_bound() const;
    //! Largest observed |db| / (|dx| + W2 + |dalpha|) over random argument pairs.
    double lipschitz_probe(std::uint64_t seed, int pairs = 200) const;

  private:
    Domain domain_;
    std::vector<double> sigma_;
    std::vector<double> a_;
    double horizon_;
    ControlSet controls_;
    DriftSpec drift_;
    RunningCost running_;
    TerminalCost terminal_;
    double k1_;
    double lambda0_ = 0;
    bool degenerate_ = false;
    std::vector<MultiIndex> drift_exps_;
};

//---------------------------------------------------------------------------//
//! A feedback law with (t, mu) fixed: alpha = clip(offset + Cx x).
struct PreparedPolicy
{
    Point offset;
    std::vector<double> const* cx = nullptr;

    void evaluate(std::span<const double> x, ControlSet const& u, std::span<double> out) const;
};

/*!
 * Feedback law alpha = F(t, x, mu), always clipped to U.
 *
 * Variants: constant; affine in moments and state; time-switched
 * concatenation; tabulated on (t-bin, moment-bin). Tabulated laws are
 * piecewise constant and not Lipschitz.
 */
class FeedbackPolicy
{
  public:
    enum class Kind
    {
        constant,
        affine,
        switched,
        tabulated
    };

    static FeedbackPolicy constant(Point alpha, std::string name = {});
    //! alpha = c0 + sum_q coef_q <mu, x^{e_q}> + Cx x, coef_q of length m, Cx m x d.
    static FeedbackPolicy affine(Point c0, std::vector<MultiIndex> exponents,
                                 std::vector<Point> moment_coefficients,
                                 std::vector<double> state_matrix, std::string name = {});
    //! Piece k applies on [breaks[k-1], breaks[k]).
    static FeedbackPolicy switched(std::vector<double> breaks, std::vector<FeedbackPolicy> pieces,
                                   std::string name = {});
    static FeedbackPolicy tabulated(std::vector<double> t_edges, MultiIndex exponent,
                                    std::vector<double> m_edges, std::vector<double> values,
                                    std::size_t control_dim, std::string name = {});

    Kind kind() const { return kind_; }
    std::string const& name() const { return name_; }
    std::size_t control_dim() const;
    //! Lipschitz constant in (x, W2) over the domain; infinite for tabulated laws.
    double lipschitz(Domain const& domain) const;
    bool admissible() const { return kind_ != Kind::tabulated; }
    std::vector<MultiIndex> exponents() const;

    void evaluate(double t, std::span<const double> x, LawStats const& law, ControlSet const& u,
                  std::span<double> out) const;
    //! Resolve the time switch and the law-dependent terms once per step.
    PreparedPolicy prepare(double t, LawStats const& law) const;

    std::vector<double> const& breaks() const { return breaks_; }
    std::vector<FeedbackPolicy> const& pieces() const { return pieces_; }

  private:

    Kind kind_ = Kind::constant;
    std::string name_;
    Point c0_;
    std::vector<MultiIndex> exps_;
    std::vector<Point> mcoef_;
    std::vector<double> cx_;
    std::vector<double> breaks_;
    std::vector<FeedbackPolicy> pieces_;
    std::vector<double> t_edges_, m_edges_, table_;
    std::size_t m_ = 0;
};

//---------------------------------------------------------------------------//
//! Initial law sampler; sampling is a pure function of (seed, stream, particle).
class InitialLaw
{
  public:
    static InitialLaw dirac(Point x);
    static InitialLaw uniform_box(Point lo, Point hi);
    //! Piecewise-constant density on equal cells of [a, b].
    static InitialLaw density_1d(double a, double b, std::vector<double> cell_values);
    /*!
     * Empirical law. When the requested particle count equals the support
     * size and weights are uniform, atoms are used in order without sampling.
     */
    static InitialLaw empirical(EmpiricalMeasure mu);

    std::size_t dim() const { return dim_; }
    void sample(std::size_t n, std::uint64_t seed, std::uint64_t stream,
                std::span<double> out) const;
    std::string describe() const;

  private:
    enum class Kind
    {
        dirac,
        uniform_box,
        density_1d,
        empirical
    };
    Kind kind_ = Kind::dirac;
    std::size_t dim_ = 0;
    Point a_, b_;
    std::vector<double> cdf_;
    EmpiricalMeasure mu_;
};

//! Particle positions, accumulated local times and the RNG identity.
struct ParticleEnsemble
{
    std::size_t dim = 0;
    double t = 0;
    std::uint64_t step = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::vector<double> x;  //!< N x dim
    std::vector<double> k;  //!< N

    std::size_t size() const { return k.size(); }
    std::span<const double> position(std::size_t i) const { return {x.data() + i * dim, dim}; }
    EmpiricalMeasure measure() const { return EmpiricalMeasure::uniform(dim, x); }
};

ParticleEnsemble make_ensemble(InitialLaw const& law, std::size_t n, double t0,
                               std::uint64_t seed, std::uint64_t stream = 0);

//! Per-step data handed to observers.
struct StepInfo
{
    double t = 0;
    double dt = 0;
    LawStats const* law = nullptr;
    std::vector<double> const* alpha = nullptr;   //!< N x m, at the left endpoint
    std::vector<double> const* delta = nullptr;   //!< N local-time increments
    std::vector<double> const* normal = nullptr;  //!< N x d, zero where delta = 0
};

using StepObserver =
    std::function<void(ParticleEnsemble const& before, StepInfo const&, ParticleEnsemble const& after)>;

/*!
 * One reflected Euler step: Y = X + b dt + sigma sqrt(dt) xi, X <- project(Y),
 * k += |Y - project(Y)|. The law enters through the ensemble at the start of
 * the step. Noise is drawn from the ensemble RNG when noise is empty.
 */
void reflected_euler_step(ParticleEnsemble& ens, ControlProblem const& prob,
                          FeedbackPolicy const& pol, double dt,
                          std::span<const double> noise = {},
                          StepObserver const& observer = {});

struct Trajectory
{
    std::vector<double> times;
    std::vector<ParticleEnsemble> snapshots;
    //! Index of the snapshot at time t, matched to 1e-9.
    std::size_t index_of(double t) const;
};

struct SimParams
{
    std::size_t n = 1000;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

//! Number of steps of size dt in [s, t]; throws unless dt divides t - s.
std::size_t step_count(double s, double t, double dt);

/*!
 * Simulate from ens.t to t_end, storing snapshots at the requested times (the
 * start and end are always stored).
 */
Trajectory simulate_from(ParticleEnsemble ens, ControlProblem const& prob,
                         FeedbackPolicy const& pol, double dt, double t_end,
                         std::vector<double> snapshot_times = {},
                         StepObserver const& observer = {});

Trajectory simulate(ControlProblem const& prob, FeedbackPolicy const& pol, InitialLaw const& law,
                    double s, SimParams const& params, std::vector<double> snapshot_times = {},
                    StepObserver const& observer = {});

struct PairTrajectory
{
    Trajectory a;
    Trajectory b;
    double initial_gap = 0;  //!< empirical E|xi - xi~|^2
};

//! Two systems with common initial uniforms and identical Brownian increments.
PairTrajectory synchronous_pair_simulate(ControlProblem const& prob, FeedbackPolicy const& pol,
                                         InitialLaw const& law_a, InitialLaw const& law_b,
                                         double s, SimParams const& params,
                                         std::vector<double> snapshot_times);

struct CouplingReport
{
    double k1 = 0;
    std::vector<double> times;
    std::vector<double> lhs;   //!< E|X_t - X~_t|^2
    std::vector<double> rhs;   //!< E|xi - xi~|^2 exp(2 (K1 + K1^2)(t - s))
    std::vector<double> w2sq;  //!< W2(mu_t, mu~_t)^2
    double initial_gap = 0;
    double max_violation = 0;  //!< max (lhs - rhs)_+
    double max_ratio = 0;      //!< max lhs / rhs
    double max_w2_excess = 0;  //!< max (w2sq - lhs)_+
};

CouplingReport coupling_bound_check(PairTrajectory const& pair, double k1);

//! Effective Lipschitz constant of the closed-loop drift for a policy.
double closed_loop_k1(ControlProblem const& prob, FeedbackPolicy const& pol);
}  // namespace rmv
