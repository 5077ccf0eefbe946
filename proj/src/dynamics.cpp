// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "rmv/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "rmv/error.hpp"
#include "rmv/parallel.hpp"
#include "rmv/random.hpp"

namespace rmv
{
namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();
// Step index reserved for initial-law uniforms.
constexpr std::uint64_t kInitialStep = ~std::uint64_t{0};

double norm2(std::span<const double> v)
{
    double s = 0;
    for (double x : v)
        s += x * x;
    return s;
}

double sq_dist(std::span<const double> a, std::span<const double> b)
{
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

double monomial(std::span<const double> x, MultiIndex const& e)
{
    double p = 1;
    for (std::size_t k = 0; k < x.size(); ++k)
        for (int j = 0; j < e[k]; ++j)
            p *= x[k];
    return p;
}

// sup over the bounding box of |grad x^e|.
double monomial_lipschitz(MultiIndex const& e, Point const& lo, Point const& hi)
{
    double s = 0;
    for (std::size_t i = 0; i < e.size(); ++i)
    {
        if (e[i] == 0)
            continue;
        double g = e[i];
        for (std::size_t j = 0; j < e.size(); ++j)
        {
            double m = std::max(std::abs(lo[j]), std::abs(hi[j]));
            g *= std::pow(m, e[j] - (i == j ? 1 : 0));
        }
        s += g * g;
    }
    return std::sqrt(s);
}

std::vector<MultiIndex> merge_exponents(std::vector<MultiIndex> a, std::vector<MultiIndex> const& b)
{
    std::set<MultiIndex> s(a.begin(), a.end());
    s.insert(b.begin(), b.end());
    return {s.begin(), s.end()};
}
}  // namespace

//---------------------------------------------------------------------------//
LawStats LawStats::compute(std::size_t dim, std::span<const double> points,
                           std::span<const double> weights, std::vector<MultiIndex> const& exponents)
{
    std::size_t n = points.size() / dim;
    require(n > 0, ErrorCode::invalid_argument, "empty law");
    require(weights.empty() || weights.size() == n, ErrorCode::dimension_mismatch,
            "weights do not match points");
    LawStats s;
    s.mean_.assign(dim, 0);
    s.exps_ = exponents;
    s.values_.assign(exponents.size(), 0);
    for (auto const& e : exponents)
        require(e.size() == dim, ErrorCode::dimension_mismatch, "moment exponent length mismatch");
    double w0 = 1.0 / n;
    for (std::size_t i = 0; i < n; ++i)
    {
        std::span<const double> x(points.data() + i * dim, dim);
        double w = weights.empty() ? w0 : weights[i];
        for (std::size_t k = 0; k < dim; ++k)
            s.mean_[k] += w * x[k];
        for (std::size_t q = 0; q < exponents.size(); ++q)
            s.values_[q] += w * monomial(x, exponents[q]);
    }
    return s;
}

LawStats LawStats::compute(EmpiricalMeasure const& mu, std::vector<MultiIndex> const& exponents)
{
    return compute(mu.dim(), mu.points(), mu.weights(), exponents);
}

double LawStats::moment(MultiIndex const& e) const
{
    for (std::size_t q = 0; q < exps_.size(); ++q)
        if (exps_[q] == e)
            return values_[q];
    fail(ErrorCode::invalid_argument, "moment not tracked by the law summary");
}

void ControlSet::clip(std::span<double> a) const
{
    for (std::size_t k = 0; k < a.size(); ++k)
        a[k] = std::clamp(a[k], lo[k], hi[k]);
}

bool ControlSet::contains(std::span<const double> a) const
{
    for (std::size_t k = 0; k < a.size(); ++k)
        if (a[k] < lo[k] || a[k] > hi[k])
            return false;
    return true;
}

bool DriftSpec::moment_variant() const
{
    return std::all_of(bx.begin(), bx.end(), [](double v) { return v == 0; });
}

//---------------------------------------------------------------------------//
ControlProblem::ControlProblem(Domain domain, std::vector<double> sigma, double horizon,
                               ControlSet controls, DriftSpec drift, RunningCost running,
                               TerminalCost terminal, double lipschitz_k1)
    : domain_(std::move(domain)),
      sigma_(std::move(sigma)),
      horizon_(horizon),
      controls_(std::move(controls)),
      drift_(std::move(drift)),
      running_(std::move(running)),
      terminal_(std::move(terminal)),
      k1_(lipschitz_k1)
{
    std::size_t d = domain_.dim(), m = controls_.dim();
    require(sigma_.size() == d * d, ErrorCode::dimension_mismatch, "sigma must be d x d");
    require(horizon_ > 0, ErrorCode::invalid_argument, "horizon T must be positive");
    require(m >= 1 && controls_.hi.size() == m, ErrorCode::dimension_mismatch,
            "control set bounds have inconsistent lengths");
    for (std::size_t k = 0; k < m; ++k)
        require(controls_.lo[k] <= controls_.hi[k], ErrorCode::invalid_argument,
                "control set is empty");
    if (drift_.b0.empty())
        drift_.b0.assign(d, 0);
    require(drift_.b0.size() == d, ErrorCode::dimension_mismatch, "drift b0 must have length d");
    require(drift_.bx.empty() || drift_.bx.size() == d * d, ErrorCode::dimension_mismatch,
            "drift Bx must be d x d");
    require(drift_.balpha.empty() || drift_.balpha.size() == d * m, ErrorCode::dimension_mismatch,
            "drift Balpha must be d x m");
    for (auto const& t : drift_.moments)
    {
        require(t.exponents.size() == d && t.beta.size() == d, ErrorCode::dimension_mismatch,
                "drift moment term has wrong length");
        for (int e : t.exponents)
            require(e >= 0, ErrorCode::invalid_argument, "negative moment exponent");
        drift_exps_.push_back(t.exponents);
    }
    drift_exps_ = merge_exponents(drift_exps_, {});
    for (Point* p : {&running_.x_ref, &running_.m_ref, &terminal_.x_ref, &terminal_.m_ref,
                     &terminal_.linear})
    {
        if (p->empty())
            p->assign(d, 0);
        require(p->size() == d, ErrorCode::dimension_mismatch, "cost reference has wrong length");
    }

    a_.assign(d * d, 0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k)
                a_[i * d + j] += sigma_[i * d + k] * sigma_[j * d + k];
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> amat(
        a_.data(), d, d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(amat);
    double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
    degenerate_ = std::all_of(sigma_.begin(), sigma_.end(), [](double v) { return v == 0; });
    lambda0_ = lmin <= 0 ? kInf : std::max(lmax, 1.0 / lmin);
}

void ControlProblem::drift_offset(LawStats const& law, std::span<double> out) const
{
    std::copy(drift_.b0.begin(), drift_.b0.end(), out.begin());
    for (auto const& t : drift_.moments)
    {
        double mv = law.moment(t.exponents);
        for (std::size_t i = 0; i < dim(); ++i)
            out[i] += t.beta[i] * mv;
    }
}

void ControlProblem::drift_local(std::span<const double> offset, std::span<const double> x,
                                 std::span<const double> alpha, std::span<double> out) const
{
    std::size_t d = dim(), m = control_dim();
    for (std::size_t i = 0; i < d; ++i)
    {
        double b = offset[i];
        if (!drift_.bx.empty())
            for (std::size_t j = 0; j < d; ++j)
                b += drift_.bx[i * d + j] * x[j];
        if (!drift_.balpha.empty())
            for (std::size_t j = 0; j < m; ++j)
                b += drift_.balpha[i * m + j] * alpha[j];
        out[i] = b;
    }
}

void ControlProblem::drift(double, std::span<const double> x, LawStats const& law,
                           std::span<const double> alpha, std::span<double> out) const
{
    Point offset(dim());
    drift_offset(law, offset);
    drift_local(offset, x, alpha, out);
}

double ControlProblem::running_cost(double, std::span<const double> x, LawStats const& law,
                                    std::span<const double> alpha) const
{
    auto const& c = running_;
    return c.constant + c.alpha_weight * norm2(alpha) + c.state_weight * sq_dist(x, c.x_ref) +
           c.mean_weight * sq_dist(law.mean(), c.m_ref);
}

double ControlProblem::terminal_cost(std::span<const double> x, LawStats const& law) const
{
    auto const& c = terminal_;
    double lin = 0;
    for (std::size_t k = 0; k < x.size(); ++k)
        lin += c.linear[k] * x[k];
    return c.constant + lin + c.state_weight * sq_dist(x, c.x_ref) +
           c.mean_weight * sq_dist(law.mean(), c.m_ref);
}

double ControlProblem::running_cost_bound() const
{
    auto const& c = running_;
    double amax = 0;
    for (std::size_t k = 0; k < control_dim(); ++k)
    {
        double v = std::max(std::abs(controls_.lo[k]), std::abs(controls_.hi[k]));
        amax += v * v;
    }
    return c.constant + std::abs(c.alpha_weight) * amax +
           std::abs(c.state_weight) * domain_.max_sq_distance_from(c.x_ref) +
           std::abs(c.mean_weight) * domain_.max_sq_distance_from(c.m_ref);
}

double ControlProblem::terminal_cost_bound() const
{
    auto const& c = terminal_;
    return c.constant + domain_.linear_range(c.linear).second +
           std::abs(c.state_weight) * domain_.max_sq_distance_from(c.x_ref) +
           std::abs(c.mean_weight) * domain_.max_sq_distance_from(c.m_ref);
}

double ControlProblem::lipschitz_probe(std::uint64_t seed, int pairs) const
{
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0, 1);
    std::size_t d = dim(), m = control_dim(), pts = 6;
    auto random_point = [&](std::span<double> out) {
        Point y(d);
        for (std::size_t k = 0; k < d; ++k)
            y[k] = domain_.lower()[k] + u(gen) * (domain_.upper()[k] - domain_.lower()[k]);
        domain_.project(y, out);
    };
    double worst = 0;
    for (int p = 0; p < pairs; ++p)
    {
        Point x(d), y(d), a(m), b(m), ba(d), bb(d);
        random_point(x);
        random_point(y);
        for (std::size_t k = 0; k < m; ++k)
        {
            a[k] = controls_.lo[k] + u(gen) * (controls_.hi[k] - controls_.lo[k]);
            b[k] = controls_.lo[k] + u(gen) * (controls_.hi[k] - controls_.lo[k]);
        }
        std::vector<double> ma(pts * d), mb(pts * d);
        for (std::size_t i = 0; i < pts; ++i)
        {
            random_point(std::span<double>(ma.data() + i * d, d));
            random_point(std::span<double>(mb.data() + i * d, d));
        }
        auto mua = EmpiricalMeasure::uniform(d, ma), mub = EmpiricalMeasure::uniform(d, mb);
        drift(0, x, LawStats::compute(mua, drift_exps_), a, ba);
        drift(0, y, LawStats::compute(mub, drift_exps_), b, bb);
        double denom = std::sqrt(sq_dist(x, y)) + wasserstein_exact(mua, mub, 2).value +
                       std::sqrt(sq_dist(a, b));
        if (denom > 1e-12)
            worst = std::max(worst, std::sqrt(sq_dist(ba, bb)) / denom);
    }
    return worst;
}

//---------------------------------------------------------------------------//
FeedbackPolicy FeedbackPolicy::constant(Point alpha, std::string name)
{
    require(!alpha.empty(), ErrorCode::invalid_argument, "constant control must be nonempty");
    FeedbackPolicy p;
    p.kind_ = Kind::constant;
    p.c0_ = std::move(alpha);
    p.m_ = p.c0_.size();
    p.name_ = std::move(name);
    return p;
}

FeedbackPolicy FeedbackPolicy::affine(Point c0, std::vector<MultiIndex> exponents,
                                      std::vector<Point> moment_coefficients,
                                      std::vector<double> state_matrix, std::string name)
{
    require(!c0.empty(), ErrorCode::invalid_argument, "affine policy needs an offset");
    require(exponents.size() == moment_coefficients.size(), ErrorCode::dimension_mismatch,
            "affine policy: one coefficient vector per moment");
    FeedbackPolicy p;
    p.kind_ = Kind::affine;
    p.m_ = c0.size();
    for (auto const& c : moment_coefficients)
        require(c.size() == p.m_, ErrorCode::dimension_mismatch,
                "affine policy coefficient has wrong length");
    require(state_matrix.size() % p.m_ == 0, ErrorCode::dimension_mismatch,
            "affine policy state matrix must be m x d");
    p.c0_ = std::move(c0);
    p.exps_ = std::move(exponents);
    p.mcoef_ = std::move(moment_coefficients);
    p.cx_ = std::move(state_matrix);
    p.name_ = std::move(name);
    return p;
}

FeedbackPolicy FeedbackPolicy::switched(std::vector<double> breaks,
                                        std::vector<FeedbackPolicy> pieces, std::string name)
{
    require(pieces.size() == breaks.size() + 1 && !pieces.empty(), ErrorCode::invalid_argument,
            "switched policy needs one more piece than breakpoints");
    require(std::is_sorted(breaks.begin(), breaks.end()), ErrorCode::invalid_argument,
            "breakpoints must be increasing");
    FeedbackPolicy p;
    p.kind_ = Kind::switched;
    p.m_ = pieces.front().control_dim();
    for (auto const& q : pieces)
        require(q.control_dim() == p.m_, ErrorCode::dimension_mismatch,
                "switched pieces have different control dimensions");
    p.breaks_ = std::move(breaks);
    p.pieces_ = std::move(pieces);
    p.name_ = std::move(name);
    return p;
}

FeedbackPolicy FeedbackPolicy::tabulated(std::vector<double> t_edges, MultiIndex exponent,
                                         std::vector<double> m_edges, std::vector<double> values,
                                         std::size_t control_dim, std::string name)
{
    require(t_edges.size() >= 2 && m_edges.size() >= 2, ErrorCode::invalid_argument,
            "tabulated policy needs at least one bin per axis");
    require(values.size() == (t_edges.size() - 1) * (m_edges.size() - 1) * control_dim,
            ErrorCode::dimension_mismatch, "tabulated policy table has wrong size");
    FeedbackPolicy p;
    p.kind_ = Kind::tabulated;
    p.t_edges_ = std::move(t_edges);
    p.m_edges_ = std::move(m_edges);
    p.exps_ = {std::move(exponent)};
    p.table_ = std::move(values);
    p.m_ = control_dim;
    p.name_ = std::move(name);
    return p;
}

std::size_t FeedbackPolicy::control_dim() const
{
    return m_;
}

double FeedbackPolicy::lipschitz(Domain const& domain) const
{
    switch (kind_)
    {
        case Kind::constant:
            return 0;
        case Kind::affine: {
            double s = std::sqrt(norm2(cx_));
            for (std::size_t q = 0; q < exps_.size(); ++q)
                s += std::sqrt(norm2(mcoef_[q])) *
                     monomial_lipschitz(exps_[q], domain.lower(), domain.upper());
            return s;
        }
        case Kind::switched: {
            double s = 0;
            for (auto const& q : pieces_)
                s = std::max(s, q.lipschitz(domain));
            return s;
        }
        case Kind::tabulated:
            return kInf;
    }
    return kInf;
}

std::vector<MultiIndex> FeedbackPolicy::exponents() const
{
    if (kind_ != Kind::switched)
        return merge_exponents(exps_, {});
    std::vector<MultiIndex> out;
    for (auto const& q : pieces_)
        out = merge_exponents(out, q.exponents());
    return out;
}

PreparedPolicy FeedbackPolicy::prepare(double t, LawStats const& law) const
{
    switch (kind_)
    {
        case Kind::constant:
            return {c0_, nullptr};
        case Kind::affine: {
            PreparedPolicy p{c0_, cx_.empty() ? nullptr : &cx_};
            for (std::size_t q = 0; q < exps_.size(); ++q)
            {
                double mv = law.moment(exps_[q]);
                for (std::size_t k = 0; k < m_; ++k)
                    p.offset[k] += mcoef_[q][k] * mv;
            }
            return p;
        }
        case Kind::switched: {
            std::size_t piece = 0;
            while (piece < breaks_.size() && t >= breaks_[piece] - 1e-9)
                ++piece;
            return pieces_[piece].prepare(t, law);
        }
        case Kind::tabulated: {
            auto bin = [](std::vector<double> const& e, double v) {
                auto it = std::upper_bound(e.begin(), e.end(), v);
                std::size_t b = it == e.begin() ? 0 : static_cast<std::size_t>(it - e.begin()) - 1;
                return std::min(b, e.size() - 2);
            };
            std::size_t ti = bin(t_edges_, t), mi = bin(m_edges_, law.moment(exps_[0]));
            std::size_t nm = m_edges_.size() - 1;
            auto first = table_.begin() + static_cast<std::ptrdiff_t>((ti * nm + mi) * m_);
            return {Point(first, first + static_cast<std::ptrdiff_t>(m_)), nullptr};
        }
    }
    return {};
}

void PreparedPolicy::evaluate(std::span<const double> x, ControlSet const& u,
                              std::span<double> out) const
{
    std::size_t m = offset.size(), d = x.size();
    require(u.dim() == m, ErrorCode::dimension_mismatch,
            "policy control dimension does not match the control set");
    for (std::size_t k = 0; k < m; ++k)
    {
        double v = offset[k];
        if (cx)
        {
            require(cx->size() == m * d, ErrorCode::dimension_mismatch,
                    "affine policy state matrix does not match state dimension");
            for (std::size_t j = 0; j < d; ++j)
                v += (*cx)[k * d + j] * x[j];
        }
        out[k] = std::clamp(v, u.lo[k], u.hi[k]);
    }
}

void FeedbackPolicy::evaluate(double t, std::span<const double> x, LawStats const& law,
                              ControlSet const& u, std::span<double> out) const
{
    prepare(t, law).evaluate(x, u, out);
}

//---------------------------------------------------------------------------//
InitialLaw InitialLaw::dirac(Point x)
{
    require(!x.empty(), ErrorCode::invalid_argument, "dirac point must be nonempty");
    InitialLaw l;
    l.kind_ = Kind::dirac;
    l.dim_ = x.size();
    l.a_ = std::move(x);
    return l;
}

InitialLaw InitialLaw::uniform_box(Point lo, Point hi)
{
    require(!lo.empty() && lo.size() == hi.size(), ErrorCode::dimension_mismatch,
            "uniform box corners have different lengths");
    for (std::size_t k = 0; k < lo.size(); ++k)
        require(lo[k] <= hi[k], ErrorCode::invalid_argument, "uniform box has lo > hi");
    InitialLaw l;
    l.kind_ = Kind::uniform_box;
    l.dim_ = lo.size();
    l.a_ = std::move(lo);
    l.b_ = std::move(hi);
    return l;
}

InitialLaw InitialLaw::density_1d(double a, double b, std::vector<double> cell_values)
{
    require(a < b && !cell_values.empty(), ErrorCode::invalid_argument,
            "density needs a < b and at least one cell");
    InitialLaw l;
    l.kind_ = Kind::density_1d;
    l.dim_ = 1;
    l.a_ = {a};
    l.b_ = {b};
    l.cdf_.assign(cell_values.size() + 1, 0);
    for (std::size_t k = 0; k < cell_values.size(); ++k)
    {
        require(cell_values[k] >= 0, ErrorCode::invalid_argument, "negative density value");
        l.cdf_[k + 1] = l.cdf_[k] + cell_values[k];
    }
    require(l.cdf_.back() > 0, ErrorCode::invalid_argument, "density has zero mass");
    for (auto& c : l.cdf_)
        c /= l.cdf_.back();
    return l;
}

InitialLaw InitialLaw::empirical(EmpiricalMeasure mu)
{
    InitialLaw l;
    l.kind_ = Kind::empirical;
    l.dim_ = mu.dim();
    l.cdf_.assign(mu.size() + 1, 0);
    for (std::size_t k = 0; k < mu.size(); ++k)
        l.cdf_[k + 1] = l.cdf_[k] + mu.weight(k);
    l.mu_ = std::move(mu);
    return l;
}

void InitialLaw::sample(std::size_t n, std::uint64_t seed, std::uint64_t stream,
                        std::span<double> out) const
{
    require(out.size() == n * dim_, ErrorCode::dimension_mismatch, "sample buffer size mismatch");
    CounterRng rng(seed, stream);
    std::size_t d = dim_;
    bool direct = kind_ == Kind::empirical && mu_.size() == n && mu_.has_uniform_weights();
    for (std::size_t i = 0; i < n; ++i)
    {
        std::span<double> x(out.data() + i * d, d);
        switch (kind_)
        {
            case Kind::dirac:
                std::copy(a_.begin(), a_.end(), x.begin());
                break;
            case Kind::uniform_box:
                for (std::size_t k = 0; k < d; ++k)
                    x[k] = a_[k] + rng.uniform(i, kInitialStep, k) * (b_[k] - a_[k]);
                break;
            case Kind::density_1d: {
                double u = rng.uniform(i, kInitialStep, 0);
                std::size_t cells = cdf_.size() - 1;
                auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
                std::size_t c = std::min<std::size_t>(
                    cells - 1, static_cast<std::size_t>(std::max<std::ptrdiff_t>(
                                   0, (it - cdf_.begin()) - 1)));
                double width = cdf_[c + 1] - cdf_[c];
                double frac = width > 0 ? (u - cdf_[c]) / width : 0.5;
                double h = (b_[0] - a_[0]) / cells;
                x[0] = a_[0] + (c + std::clamp(frac, 0.0, 1.0)) * h;
                break;
            }
            case Kind::empirical: {
                std::size_t atom = i;
                if (!direct)
                {
                    double u = rng.uniform(i, kInitialStep, 0);
                    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
                    atom = std::min<std::size_t>(mu_.size() - 1,
                                                 static_cast<std::size_t>(it - cdf_.begin()) - 1);
                }
                auto p = mu_.point(atom);
                std::copy(p.begin(), p.end(), x.begin());
                break;
            }
        }
    }
}

std::string InitialLaw::describe() const
{
    std::ostringstream os;
    switch (kind_)
    {
        case Kind::dirac:
            os << "dirac";
            break;
        case Kind::uniform_box:
            os << "uniform_box";
            break;
        case Kind::density_1d:
            os << "density_1d(" << cdf_.size() - 1 << " cells)";
            break;
        case Kind::empirical:
            os << "empirical(" << mu_.size() << " atoms)";
            break;
    }
    return os.str();
}

//---------------------------------------------------------------------------//
ParticleEnsemble make_ensemble(InitialLaw const& law, std::size_t n, double t0,
                               std::uint64_t seed, std::uint64_t stream)
{
    require(n >= 1, ErrorCode::invalid_argument, "particle count must be at least 1");
    ParticleEnsemble e;
    e.dim = law.dim();
    e.t = t0;
    e.seed = seed;
    e.stream = stream;
    e.x.resize(n * e.dim);
    e.k.assign(n, 0);
    law.sample(n, seed, stream, e.x);
    return e;
}

void reflected_euler_step(ParticleEnsemble& ens, ControlProblem const& prob,
                          FeedbackPolicy const& pol, double dt, std::span<const double> noise,
                          StepObserver const& observer)
{
    require(dt > 0, ErrorCode::invalid_argument, "time step must be positive");
    std::size_t n = ens.size(), d = ens.dim, m = prob.control_dim();
    require(d == prob.dim(), ErrorCode::dimension_mismatch,
            "ensemble and problem dimensions differ");
    require(noise.empty() || noise.size() == n * d, ErrorCode::dimension_mismatch,
            "noise must be N x d");
    auto exps = merge_exponents(prob.drift_exponents(), pol.exponents());
    LawStats law = LawStats::compute(d, ens.x, {}, exps);

    ParticleEnsemble before;
    if (observer)
        before = ens;
    std::vector<double> alpha(n * m), delta(n, 0), normal(observer ? n * d : 0, 0);
    auto const& sigma = prob.sigma();
    bool noisy = !prob.degenerate();
    CounterRng rng(ens.seed, ens.stream);
    double sq = std::sqrt(dt);
    double t = ens.t;
    PreparedPolicy prep = pol.prepare(t, law);
    Point offset(d);
    prob.drift_offset(law, offset);
    parallel_for(n, [&](std::size_t i) {
        std::span<double> x(ens.x.data() + i * d, d);
        std::span<double> a(alpha.data() + i * m, m);
        prep.evaluate(x, prob.controls(), a);
        double b[8], xi[8], y[8];
        std::vector<double> heap;
        double* bp = b;
        double* xp = xi;
        double* yp = y;
        if (d > 8)
        {
            heap.resize(3 * d);
            bp = heap.data();
            xp = bp + d;
            yp = xp + d;
        }
        prob.drift_local(offset, x, a, std::span<double>(bp, d));
        for (std::size_t k = 0; k < d; ++k)
            xp[k] = !noisy ? 0 : noise.empty() ? rng.normal(i, ens.step, k) : noise[i * d + k];
        for (std::size_t k = 0; k < d; ++k)
        {
            double s = 0;
            if (noisy)
                for (std::size_t j = 0; j < d; ++j)
                    s += sigma[k * d + j] * xp[j];
            yp[k] = x[k] + bp[k] * dt + sq * s;
        }
        double dl = prob.domain().project(std::span<const double>(yp, d), x);
        delta[i] = dl;
        ens.k[i] += dl;
        if (observer && dl > 0)
            for (std::size_t k = 0; k < d; ++k)
                normal[i * d + k] = (yp[k] - x[k]) / dl;
    });
    ens.t += dt;
    ++ens.step;
    if (observer)
    {
        StepInfo info{t, dt, &law, &alpha, &delta, &normal};
        observer(before, info, ens);
    }
}

std::size_t Trajectory::index_of(double t) const
{
    for (std::size_t k = 0; k < times.size(); ++k)
        if (std::abs(times[k] - t) <= 1e-9)
            return k;
    fail(ErrorCode::invalid_argument, "no snapshot at t = " + std::to_string(t));
}

std::size_t step_count(double s, double t, double dt)
{
    require(dt > 0, ErrorCode::invalid_argument, "time step must be positive");
    double r = (t - s) / dt;
    double n = std::round(r);
    require(n >= 0 && std::abs(n * dt - (t - s)) <= 1e-9 * std::max(1.0, std::abs(t - s)),
            ErrorCode::invalid_argument, "time step does not divide the interval");
    return static_cast<std::size_t>(n);
}

Trajectory simulate_from(ParticleEnsemble ens, ControlProblem const& prob,
                         FeedbackPolicy const& pol, double dt, double t_end,
                         std::vector<double> snapshot_times, StepObserver const& observer)
{
    double t0 = ens.t;
    std::size_t steps = step_count(t0, t_end, dt);
    std::set<std::size_t> marks{0, steps};
    for (double s : snapshot_times)
    {
        require(s >= t0 - 1e-9 && s <= t_end + 1e-9, ErrorCode::invalid_argument,
                "snapshot time outside the simulated interval");
        marks.insert(step_count(t0, s, dt));
    }
    Trajectory tr;
    for (std::size_t k = 0;; ++k)
    {
        if (marks.count(k))
        {
            tr.times.push_back(ens.t);
            tr.snapshots.push_back(ens);
        }
        if (k == steps)
            break;
        reflected_euler_step(ens, prob, pol, dt, {}, observer);
        ens.t = t0 + static_cast<double>(k + 1) * dt;
    }
    return tr;
}

Trajectory simulate(ControlProblem const& prob, FeedbackPolicy const& pol, InitialLaw const& law,
                    double s, SimParams const& params, std::vector<double> snapshot_times,
                    StepObserver const& observer)
{
    auto ens = make_ensemble(law, params.n, s, params.seed, params.stream);
    for (std::size_t i = 0; i < ens.size(); ++i)
        require(prob.domain().in_closure(ens.position(i)), ErrorCode::out_of_domain,
                "initial law has support outside the domain");
    return simulate_from(std::move(ens), prob, pol, params.dt, prob.horizon(),
                         std::move(snapshot_times), observer);
}

PairTrajectory synchronous_pair_simulate(ControlProblem const& prob, FeedbackPolicy const& pol,
                                         InitialLaw const& law_a, InitialLaw const& law_b,
                                         double s, SimParams const& params,
                                         std::vector<double> snapshot_times)
{
    PairTrajectory pt;
    pt.a = simulate(prob, pol, law_a, s, params, snapshot_times);
    pt.b = simulate(prob, pol, law_b, s, params, snapshot_times);
    auto const& xa = pt.a.snapshots.front();
    auto const& xb = pt.b.snapshots.front();
    double gap = 0;
    for (std::size_t i = 0; i < xa.size(); ++i)
        gap += sq_dist(xa.position(i), xb.position(i));
    pt.initial_gap = gap / xa.size();
    return pt;
}

CouplingReport coupling_bound_check(PairTrajectory const& pair, double k1)
{
    CouplingReport r;
    r.k1 = k1;
    r.initial_gap = pair.initial_gap;
    double s = pair.a.times.front();
    for (std::size_t k = 0; k < pair.a.times.size(); ++k)
    {
        auto const& xa = pair.a.snapshots[k];
        auto const& xb = pair.b.snapshots[k];
        double lhs = 0;
        for (std::size_t i = 0; i < xa.size(); ++i)
            lhs += sq_dist(xa.position(i), xb.position(i));
        lhs /= xa.size();
        double t = pair.a.times[k];
        double rhs = pair.initial_gap * std::exp(2 * (k1 + k1 * k1) * (t - s));
        double w = wasserstein(xa.measure(), xb.measure(), 2);
        r.times.push_back(t);
        r.lhs.push_back(lhs);
        r.rhs.push_back(rhs);
        r.w2sq.push_back(w * w);
        r.max_violation = std::max(r.max_violation, lhs - rhs);
        if (rhs > 0)
            r.max_ratio = std::max(r.max_ratio, lhs / rhs);
        r.max_w2_excess = std::max(r.max_w2_excess, w * w - lhs);
    }
    return r;
}

double closed_loop_k1(ControlProblem const& prob, FeedbackPolicy const& pol)
{
    return prob.k1() * (1 + pol.lipschitz(prob.domain()));
}
}  // namespace rmv
