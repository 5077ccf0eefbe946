// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "rmv/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "rmv/error.hpp"
#include "rmv/parallel.hpp"
#include "rmv/random.hpp"
#include "rmv/stats.hpp"

namespace rmv
{
namespace
{
double ipow(double x, int e)
{
    double r = 1;
    for (int k = 0; k < e; ++k)
        r *= x;
    return r;
}

// Neumaier sum of term(i) for i < n.
template<class F>
double compensated_sum(std::size_t n, F&& term)
{
    double sum = 0, comp = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        double x = term(i);
        double t = sum + x;
        comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

double weighted_sum(EmpiricalMeasure const& mu, std::vector<double> const& v)
{
    return compensated_sum(v.size(), [&](std::size_t i) { return mu.weight(i) * v[i]; });
}

double moment_of(EmpiricalMeasure const& mu, BasisFunction const& f)
{
    std::vector<double> v(mu.size());
    parallel_blocks(mu.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            v[i] = f.value(mu.point(i));
    });
    return weighted_sum(mu, v);
}

bool diagonal(std::vector<double> const& a, std::size_t d)
{
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (i != j && a[i * d + j] != 0)
                return false;
    return true;
}
}  // namespace

//---------------------------------------------------------------------------//
BasisFunction BasisFunction::polynomial(std::size_t dim, std::vector<Term> terms)
{
    require(dim >= 1, ErrorCode::invalid_argument, "dimension must be positive");
    for (auto const& t : terms)
    {
        require(t.exponents.size() == dim, ErrorCode::dimension_mismatch,
                "monomial exponent length differs from the dimension");
        for (int e : t.exponents)
            require(e >= 0, ErrorCode::invalid_argument, "exponents must be nonnegative");
    }
    BasisFunction f;
    f.dim_ = dim;
    f.terms_ = std::move(terms);
    return f;
}

BasisFunction BasisFunction::monomial(MultiIndex exponents, double coef)
{
    std::size_t d = exponents.size();
    return polynomial(d, {{coef, std::move(exponents)}});
}

BasisFunction BasisFunction::cosine(Domain const& domain, std::vector<int> modes)
{
    require(modes.size() == domain.dim(), ErrorCode::dimension_mismatch,
            "one cosine mode per axis");
    BasisFunction f;
    f.dim_ = modes.size();
    f.cosine_ = true;
    f.lo_ = domain.lower();
    for (std::size_t i = 0; i < f.dim_; ++i)
    {
        require(modes[i] >= 0, ErrorCode::invalid_argument, "cosine modes must be nonnegative");
        f.scale_.push_back(std::numbers::pi * modes[i] / (domain.upper()[i] - domain.lower()[i]));
    }
    f.modes_ = std::move(modes);
    return f;
}

double BasisFunction::value(std::span<const double> x) const
{
    if (cosine_)
    {
        double v = 1;
        for (std::size_t i = 0; i < dim_; ++i)
            v *= std::cos(scale_[i] * (x[i] - lo_[i]));
        return v;
    }
    double v = 0;
    for (auto const& t : terms_)
    {
        double p = t.coef;
        for (std::size_t i = 0; i < dim_; ++i)
            p *= ipow(x[i], t.exponents[i]);
        v += p;
    }
    return v;
}

void BasisFunction::gradient(std::span<const double> x, std::span<double> out) const
{
    std::fill(out.begin(), out.end(), 0.0);
    if (cosine_)
    {
        for (std::size_t k = 0; k < dim_; ++k)
        {
            double g = -scale_[k] * std::sin(scale_[k] * (x[k] - lo_[k]));
            for (std::size_t i = 0; i < dim_; ++i)
                if (i != k)
                    g *= std::cos(scale_[i] * (x[i] - lo_[i]));
            out[k] = g;
        }
        return;
    }
    for (auto const& t : terms_)
        for (std::size_t k = 0; k < dim_; ++k)
        {
            int ek = t.exponents[k];
            if (ek == 0)
                continue;
            double g = t.coef * ek * ipow(x[k], ek - 1);
            for (std::size_t i = 0; i < dim_; ++i)
                if (i != k)
                    g *= ipow(x[i], t.exponents[i]);
            out[k] += g;
        }
}

void BasisFunction::hessian(std::span<const double> x, std::span<double> out) const
{
    std::size_t d = dim_;
    std::fill(out.begin(), out.end(), 0.0);
    if (cosine_)
    {
        std::vector<double> c(d), s(d);
        for (std::size_t i = 0; i < d; ++i)
        {
            c[i] = std::cos(scale_[i] * (x[i] - lo_[i]));
            s[i] = std::sin(scale_[i] * (x[i] - lo_[i]));
        }
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t l = 0; l < d; ++l)
            {
                double h = k == l ? -scale_[k] * scale_[k] * c[k] : scale_[k] * scale_[l] * s[k] * s[l];
                for (std::size_t i = 0; i < d; ++i)
                    if (i != k && i != l)
                        h *= c[i];
                out[k * d + l] = h;
            }
        return;
    }
    for (auto const& t : terms_)
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t l = 0; l < d; ++l)
            {
                MultiIndex e = t.exponents;
                double h = t.coef;
                for (std::size_t a : {k, l})
                {
                    h *= e[a];
                    if (e[a] == 0)
                        break;
                    --e[a];
                }
                if (h == 0)
                    continue;
                for (std::size_t i = 0; i < d; ++i)
                    h *= ipow(x[i], e[i]);
                out[k * d + l] += h;
            }
}

std::string BasisFunction::describe() const
{
    std::ostringstream os;
    if (cosine_)
    {
        os << "cos";
        for (int m : modes_)
            os << (&m == modes_.data() ? "(" : ",") << m;
        os << ")";
        return os.str();
    }
    bool first = true;
    for (auto const& t : terms_)
    {
        os << (first ? "" : " + ") << t.coef;
        for (std::size_t i = 0; i < dim_; ++i)
            if (t.exponents[i] > 0)
                os << " x" << i + 1 << "^" << t.exponents[i];
        first = false;
    }
    return first ? "0" : os.str();
}

//---------------------------------------------------------------------------//
double TimeFactor::value(double t) const
{
    double v = 0;
    for (std::size_t k = poly.size(); k-- > 0;)
        v = v * t + poly[k];
    if (inverse != 0)
        v += inverse / t;
    return v;
}

double TimeFactor::derivative(double t) const
{
    double v = 0;
    for (std::size_t k = poly.size(); k-- > 1;)
        v = v * t + static_cast<double>(k) * poly[k];
    if (inverse != 0)
        v -= inverse / (t * t);
    return v;
}

//---------------------------------------------------------------------------//
void BoundDerivative::eval(std::span<const double> x, std::span<double> dl,
                           std::span<double> grad) const
{
    std::size_t d = dim_;
    std::fill(dl.begin(), dl.end(), 0.0);
    if (!grad.empty())
        std::fill(grad.begin(), grad.end(), 0.0);
    double gbuf[8], hbuf[64];
    std::vector<double> gvec, hvec;
    std::span<double> g(gbuf, d), h(hbuf, d * d);
    if (d > 8)
    {
        gvec.resize(d);
        hvec.resize(d * d);
        g = gvec;
        h = hvec;
    }
    for (auto const& p : pieces_)
    {
        if (p.weight == 0)
            continue;
        if (p.f)
            p.f->gradient(x, g);
        else
            p.potential.gradient(x, g);
        for (std::size_t a = 0; a < d; ++a)
            dl[a] += p.weight * g[a];
        if (grad.empty())
            continue;
        if (p.f)
            p.f->hessian(x, h);
        else
            p.potential.hessian(x, h);
        for (std::size_t a = 0; a < d * d; ++a)
            grad[a] += p.weight * h[a];
    }
}

//---------------------------------------------------------------------------//
Functional Functional::moment(BasisFunction f)
{
    Functional u;
    u.dim_ = f.dim();
    u.atoms_.push_back({Kind::moment, {}, std::make_shared<BasisFunction const>(std::move(f)), {}, {}, -1});
    return u;
}

Functional Functional::squared_moment(BasisFunction f)
{
    Functional u = moment(std::move(f));
    u.atoms_[0].kind = Kind::squared_moment;
    return u;
}

Functional Functional::s_based(std::shared_ptr<PolyFamily const> family, EmpiricalMeasure anchor,
                               int kmax)
{
    require(family != nullptr, ErrorCode::invalid_argument, "S functional needs a family");
    require(anchor.dim() == family->dim(), ErrorCode::dimension_mismatch,
            "anchor dimension differs from the family");
    Functional u;
    u.dim_ = family->dim();
    u.atoms_.push_back({Kind::s_based, {}, {}, std::move(family),
                        std::make_shared<EmpiricalMeasure const>(std::move(anchor)), kmax});
    return u;
}

Functional Functional::time_augmented(TimeFactor a,
                                      std::vector<std::pair<TimeFactor, Functional>> terms)
{
    Functional u;
    u.base_ = std::move(a);
    for (auto& [c, term] : terms)
    {
        bool plain = term.atoms_.size() == 1 && term.base_.poly == std::vector<double>{0.0} &&
                     term.base_.inverse == 0 && term.atoms_[0].factor.poly == std::vector<double>{1.0} &&
                     term.atoms_[0].factor.inverse == 0;
        require(plain, ErrorCode::invalid_argument,
                "time-augmented terms must be plain functionals");
        if (u.dim_ == 0)
            u.dim_ = term.dim_;
        require(term.dim_ == u.dim_, ErrorCode::dimension_mismatch,
                "terms of different dimension");
        Atom atom = term.atoms_[0];
        atom.factor = std::move(c);
        u.atoms_.push_back(std::move(atom));
    }
    return u;
}

double Functional::atom_value(Atom const& a, EmpiricalMeasure const& mu, double* tail) const
{
    switch (a.kind)
    {
        case Kind::moment:
            return moment_of(mu, *a.f);
        case Kind::squared_moment: {
            double m = moment_of(mu, *a.f);
            return m * m;
        }
        case Kind::s_based: {
            auto sv = a.family->S(SignedCombo::difference(mu, *a.anchor), a.kmax);
            if (tail)
                *tail = sv.tail_bound;
            return sv.value;
        }
    }
    return 0;
}

double Functional::value(double t, EmpiricalMeasure const& mu) const
{
    double v = base_.value(t);
    for (auto const& a : atoms_)
        v += a.factor.value(t) * atom_value(a, mu, nullptr);
    return v;
}

double Functional::time_derivative(double t, EmpiricalMeasure const& mu) const
{
    double v = base_.derivative(t);
    for (auto const& a : atoms_)
    {
        double c = a.factor.derivative(t);
        if (c != 0)
            v += c * atom_value(a, mu, nullptr);
    }
    return v;
}

double Functional::tail_bound(double t, EmpiricalMeasure const& mu) const
{
    double tail = 0;
    for (auto const& a : atoms_)
        if (a.kind == Kind::s_based)
        {
            double tb = 0;
            atom_value(a, mu, &tb);
            tail += std::abs(a.factor.value(t)) * tb;
        }
    return tail;
}

BoundDerivative Functional::bind(double t, EmpiricalMeasure const& mu) const
{
    require(dim_ == 0 || mu.dim() == dim_, ErrorCode::dimension_mismatch,
            "measure dimension differs from the functional");
    BoundDerivative b;
    b.dim_ = mu.dim();
    for (auto const& a : atoms_)
    {
        BoundDerivative::Piece p;
        double c = a.factor.value(t);
        switch (a.kind)
        {
            case Kind::moment:
                p.weight = c;
                p.f = a.f;
                break;
            case Kind::squared_moment:
                p.weight = 2 * c * moment_of(mu, *a.f);
                p.f = a.f;
                break;
            case Kind::s_based:
                p.weight = c;
                p.family = a.family;
                p.potential = a.family->dl_S(SignedCombo::difference(mu, *a.anchor), a.kmax);
                break;
        }
        b.pieces_.push_back(std::move(p));
    }
    return b;
}

bool Functional::boundary_compatible(Domain const& domain, std::vector<double> const& a) const
{
    if (domain.kind() == Domain::Kind::ball || !diagonal(a, dim_))
        return false;
    for (auto const& at : atoms_)
        if (at.kind == Kind::s_based || !at.f->is_cosine())
            return false;
    return true;
}

std::string Functional::describe() const
{
    std::ostringstream os;
    bool first = true;
    for (auto const& a : atoms_)
    {
        os << (first ? "" : " + ");
        first = false;
        switch (a.kind)
        {
            case Kind::moment:
                os << "<mu," << a.f->describe() << ">";
                break;
            case Kind::squared_moment:
                os << "<mu," << a.f->describe() << ">^2";
                break;
            case Kind::s_based:
                os << "S(mu-nu0)";
                break;
        }
    }
    return os.str();
}

DLField dl_eval(Functional const& u, double t, EmpiricalMeasure const& mu,
                std::span<const double> points)
{
    std::size_t d = mu.dim();
    require(points.size() % d == 0, ErrorCode::dimension_mismatch,
            "query points are not a multiple of the dimension");
    std::size_t n = points.size() / d;
    auto bound = u.bind(t, mu);
    DLField out;
    out.values.resize(n * d);
    out.gradients.resize(n * d * d);
    parallel_blocks(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            bound.eval(points.subspan(i * d, d), std::span(out.values).subspan(i * d, d),
                       std::span(out.gradients).subspan(i * d * d, d * d));
    });
    out.tail = u.tail_bound(t, mu);
    return out;
}

//---------------------------------------------------------------------------//
HamiltonianParts hamiltonian_parts(ControlProblem const& prob, double t,
                                   EmpiricalMeasure const& mu, Functional const& u,
                                   std::span<const double> alpha)
{
    std::size_t d = prob.dim();
    require((u.dim() == d || u.dim() == 0) && mu.dim() == d, ErrorCode::dimension_mismatch,
            "functional, measure and problem dimensions differ");
    require(alpha.size() == prob.control_dim(), ErrorCode::dimension_mismatch,
            "control has the wrong length");
    auto law = LawStats::compute(mu, prob.drift_exponents());
    auto bound = u.bind(t, mu);
    auto const& a = prob.diffusion();
    std::size_t n = mu.size();
    std::vector<double> drift_term(n), trace_term(n), running_term(n);
    parallel_blocks(n, [&](std::size_t b, std::size_t e) {
        std::vector<double> drift(d), dl(d), grad(d * d);
        for (std::size_t i = b; i < e; ++i)
        {
            auto x = mu.point(i);
            prob.drift(t, x, law, alpha, drift);
            bound.eval(x, dl, grad);
            double s = 0;
            for (std::size_t k = 0; k < d; ++k)
                s += drift[k] * dl[k];
            double tr = 0;
            for (std::size_t k = 0; k < d; ++k)
                for (std::size_t l = 0; l < d; ++l)
                    tr += a[k * d + l] * grad[l * d + k];
            drift_term[i] = s;
            trace_term[i] = 0.5 * tr;
            running_term[i] = prob.running_cost(t, x, law, alpha);
        }
    });
    return {weighted_sum(mu, drift_term), weighted_sum(mu, trace_term),
            weighted_sum(mu, running_term)};
}

double hamiltonian(ControlProblem const& prob, double t, EmpiricalMeasure const& mu,
                   Functional const& u, std::span<const double> alpha, bool include_running)
{
    auto p = hamiltonian_parts(prob, t, mu, u, alpha);
    return p.drift + p.diffusion + (include_running ? p.running : 0.0);
}

HamiltonianInfimum hamiltonian_infimum(ControlProblem const& prob, double t,
                                       EmpiricalMeasure const& mu, Functional const& u)
{
    std::size_t d = prob.dim(), m = prob.control_dim();
    auto const& box = prob.controls();
    auto const& ba = prob.drift_spec().balpha;
    double q = prob.running().alpha_weight;

    // H(alpha) = const + <Ba^T g, alpha> + q |alpha|^2 with g = int D^L u dmu.
    auto bound = u.bind(t, mu);
    std::vector<double> g(d, 0.0), dl(d);
    for (std::size_t i = 0; i < mu.size(); ++i)
    {
        bound.eval(mu.point(i), dl);
        for (std::size_t k = 0; k < d; ++k)
            g[k] += mu.weight(i) * dl[k];
    }
    HamiltonianInfimum res;
    res.alpha.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j)
    {
        double c = 0;
        if (!ba.empty())
            for (std::size_t k = 0; k < d; ++k)
                c += ba[k * m + j] * g[k];
        double a = q > 0 ? -c / (2 * q) : (c > 0 ? box.lo[j] : c < 0 ? box.hi[j] : 0.0);
        res.alpha[j] = std::clamp(a, box.lo[j], box.hi[j]);
    }
    res.value = hamiltonian(prob, t, mu, u, res.alpha);

    // 9 points spanning center +- w per axis. The convex minimizer lies within half a
    // spacing (w / 8) of the best point, so that is the next window.
    Point center(m), w(m);
    for (std::size_t j = 0; j < m; ++j)
    {
        center[j] = 0.5 * (box.lo[j] + box.hi[j]);
        w[j] = 0.5 * (box.hi[j] - box.lo[j]);
    }
    std::size_t points = 1;
    for (std::size_t j = 0; j < m; ++j)
        points *= 9;
    res.grid_value = std::numeric_limits<double>::infinity();
    Point alpha(m);
    for (int level = 0; level < 3; ++level)
    {
        Point best = center;
        for (std::size_t p = 0; p < points; ++p)
        {
            std::size_t r = p;
            for (std::size_t j = m; j-- > 0;)
            {
                int k = static_cast<int>(r % 9);
                r /= 9;
                alpha[j] = std::clamp(center[j] + w[j] * (k / 4.0 - 1.0), box.lo[j], box.hi[j]);
            }
            double h = hamiltonian(prob, t, mu, u, alpha);
            if (h < res.grid_value)
            {
                res.grid_value = h;
                best = alpha;
            }
        }
        center = best;
        if (level < 2)
            for (auto& wj : w)
                wj /= 8;
    }
    res.grid_alpha = center;
    for (std::size_t j = 0; j < m; ++j)
    {
        double half_spacing = w[j] / 8;
        res.grid_tolerance += q * half_spacing * half_spacing;
    }
    return res;
}

double hjb_residual(ControlProblem const& prob, Functional const& psi, double t,
                    EmpiricalMeasure const& mu)
{
    return -psi.time_derivative(t, mu) - hamiltonian_infimum(prob, t, mu, psi).value;
}

ViscosityReport viscosity_test(ControlProblem const& prob, std::vector<FamilyPoint> const& family,
                               std::vector<double> const& values, Functional const& psi,
                               Extremum type, std::optional<std::size_t> claimed,
                               double tolerance, double value_std_error, double z)
{
    require(!family.empty() && family.size() == values.size(), ErrorCode::invalid_argument,
            "family and values must be nonempty and of equal length");
    ViscosityReport rep;
    rep.type = type;
    double sign = type == Extremum::maximum ? 1 : -1;
    for (std::size_t i = 0; i < family.size(); ++i)
    {
        rep.gaps.push_back(values[i] - psi.value(family[i].t, family[i].mu));
        if (sign * rep.gaps[i] > sign * rep.gaps[rep.index])
            rep.index = i;
    }
    if (claimed)
    {
        require(*claimed < family.size(), ErrorCode::invalid_argument, "claimed index out of range");
        if (sign * rep.gaps[*claimed] < sign * rep.gaps[rep.index])
            fail(ErrorCode::check_failed, "claimed point is not an extremum of V - psi over the family");
        rep.index = *claimed;
    }
    double runner = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < family.size(); ++i)
        if (i != rep.index)
            runner = std::max(runner, sign * rep.gaps[i]);
    rep.identified = sign * rep.gaps[rep.index] - runner > z * value_std_error;

    auto const& p = family[rep.index];
    rep.residual = hjb_residual(prob, psi, p.t, p.mu);
    rep.margin = type == Extremum::maximum ? tolerance - rep.residual : rep.residual + tolerance;
    rep.satisfied = rep.margin >= 0;
    return rep;
}

//---------------------------------------------------------------------------//
ChainRuleReport chainrule_check(ControlProblem const& prob, FeedbackPolicy const& pol,
                                Functional const& u, InitialLaw const& law, double s, double t1,
                                double t2, SimParams const& params)
{
    require(s <= t1 && t1 < t2 && t2 <= prob.horizon(), ErrorCode::invalid_argument,
            "need s <= t1 < t2 <= T");
    std::size_t d = prob.dim(), m = prob.control_dim(), n = params.n;
    auto ens = make_ensemble(law, n, s, params.seed, params.stream);
    for (std::size_t i = 0; i < n; ++i)
        require(prob.domain().in_closure(ens.position(i)), ErrorCode::out_of_domain,
                "initial law has support outside the domain");

    auto const& a = prob.diffusion();
    ChainRuleReport rep;
    rep.compatible = u.boundary_compatible(prob.domain(), a);
    double qv = 0;
    std::vector<double> gen(n), mart(n), quad(n), bnd(n);
    StepObserver obs = [&](ParticleEnsemble const& before, StepInfo const& info,
                           ParticleEnsemble const& after) {
        if (info.t < t1 - 1e-9)
            return;
        auto mu = before.measure();
        auto bound = u.bind(info.t, mu);
        double dt = info.dt;
        auto const& alpha = *info.alpha;
        auto const& delta = *info.delta;
        auto const& normal = *info.normal;
        parallel_blocks(n, [&](std::size_t b, std::size_t e) {
            std::vector<double> drift(d), dl(d), grad(d * d), dl1(d);
            for (std::size_t i = b; i < e; ++i)
            {
                auto x = before.position(i);
                auto y = after.position(i);
                prob.drift(info.t, x, *info.law, std::span(alpha).subspan(i * m, m), drift);
                bound.eval(x, dl, grad);
                double g = 0, mt = 0, qq = 0, tr = 0;
                for (std::size_t k = 0; k < d; ++k)
                {
                    g += drift[k] * dl[k];
                    // Unprojected increment minus drift: the noise actually applied.
                    double z = y[k] + delta[i] * normal[i * d + k] - x[k] - drift[k] * dt;
                    mt += dl[k] * z;
                    for (std::size_t l = 0; l < d; ++l)
                    {
                        tr += a[k * d + l] * grad[l * d + k];
                        qq += dl[k] * a[k * d + l] * dl[l];
                    }
                }
                gen[i] = g + 0.5 * tr;
                mart[i] = mt;
                quad[i] = qq;
                double bt = 0;
                if (delta[i] > 0)
                {
                    bound.eval(y, dl1);
                    for (std::size_t k = 0; k < d; ++k)
                        bt += dl1[k] * normal[i * d + k];
                    bt *= delta[i];
                }
                bnd[i] = bt;
            }
        });
        rep.rhs += dt * (u.time_derivative(info.t, mu) + weighted_sum(mu, gen));
        rep.martingale += weighted_sum(mu, mart);
        qv += dt * weighted_sum(mu, quad);
        rep.boundary += weighted_sum(mu, bnd);
    };
    auto tr = simulate_from(std::move(ens), prob, pol, params.dt, t2, {t1}, obs);
    auto const& e1 = tr.snapshots[tr.index_of(t1)];
    auto const& e2 = tr.snapshots.back();
    rep.lhs = u.value(t2, e2.measure()) - u.value(t1, e1.measure());
    rep.residual = rep.lhs - rep.rhs;
    rep.std_error = std::sqrt(qv / static_cast<double>(n));
    return rep;
}

//---------------------------------------------------------------------------//
std::vector<ContinuityPoint> hamiltonian_continuity(ControlProblem const& prob, double t,
                                                    EmpiricalMeasure const& mu,
                                                    Functional const& u,
                                                    std::vector<std::size_t> const& sizes,
                                                    std::vector<Point> const& alphas,
                                                    std::uint64_t seed, std::size_t replicates)
{
    require(!alphas.empty(), ErrorCode::invalid_argument, "need at least one control value");
    require(replicates >= 1, ErrorCode::invalid_argument, "need at least one replicate");
    for (std::size_t n : sizes)
        require(n >= 1 && n <= mu.size(), ErrorCode::invalid_argument,
                "subsample size outside [1, support size]");
    std::size_t d = mu.dim();
    std::vector<double> full;
    for (auto const& al : alphas)
        full.push_back(hamiltonian(prob, t, mu, u, al));

    std::vector<ContinuityPoint> out(sizes.size());
    std::vector<std::size_t> order(mu.size());
    std::vector<double> key(mu.size());
    for (std::size_t r = 0; r < replicates; ++r)
    {
        // Random order for this replicate; each size takes a prefix.
        CounterRng rng(seed, r);
        for (std::size_t i = 0; i < mu.size(); ++i)
            key[i] = rng.uniform(i, 0, 0);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
            return key[i] < key[j] || (key[i] == key[j] && i < j);
        });
        for (std::size_t k = 0; k < sizes.size(); ++k)
        {
            std::size_t n = sizes[k];
            std::vector<double> pts(n * d), w(n);
            for (std::size_t i = 0; i < n; ++i)
            {
                auto p = mu.point(order[i]);
                std::copy(p.begin(), p.end(), pts.begin() + i * d);
                w[i] = mu.weight(order[i]);
            }
            EmpiricalMeasure sub = [&] {
                if (mu.has_uniform_weights())
                    return EmpiricalMeasure::uniform(d, std::move(pts));
                double total = compensated_sum(n, [&](std::size_t i) { return w[i]; });
                for (auto& wi : w)
                    wi /= total;
                return EmpiricalMeasure(d, std::move(pts), std::move(w));
            }();
            double diff = 0;
            for (std::size_t j = 0; j < alphas.size(); ++j)
                diff = std::max(diff, std::abs(hamiltonian(prob, t, sub, u, alphas[j]) - full[j]));
            out[k].n = n;
            out[k].w1 += wasserstein(sub, mu, 1) / static_cast<double>(replicates);
            out[k].max_diff += diff / static_cast<double>(replicates);
        }
    }
    return out;
}

TimeContinuityReport w1_time_continuity(ControlProblem const& prob, FeedbackPolicy const& pol,
                                        InitialLaw const& law, double s,
                                        std::vector<double> const& h, SimParams const& params)
{
    require(!h.empty(), ErrorCode::invalid_argument, "need at least one time offset");
    std::vector<double> times;
    double hmax = 0;
    for (double hk : h)
    {
        require(hk > 0, ErrorCode::invalid_argument, "time offsets must be positive");
        times.push_back(s + hk);
        hmax = std::max(hmax, hk);
    }
    auto ens = make_ensemble(law, params.n, s, params.seed, params.stream);
    auto tr = simulate_from(std::move(ens), prob, pol, params.dt, s + hmax, times);
    std::size_t d = prob.dim();
    std::size_t keep = d == 1 ? params.n : std::min(params.n, kExactSupportLimit);
    auto head = [&](ParticleEnsemble const& e) {
        return EmpiricalMeasure::uniform(d, std::vector<double>(e.x.begin(), e.x.begin() + keep * d));
    };
    auto mu0 = head(tr.snapshots.front());
    TimeContinuityReport rep;
    for (double hk : h)
    {
        rep.h.push_back(hk);
        rep.w1.push_back(wasserstein(mu0, head(tr.snapshots[tr.index_of(s + hk)]), 1));
    }
    bool all_positive = std::all_of(rep.w1.begin(), rep.w1.end(), [](double v) { return v > 0; });
    rep.slope = rep.h.size() >= 2 && all_positive ? loglog_slope(rep.h, rep.w1)
                                                  : std::numeric_limits<double>::quiet_NaN();
    return rep;
}
}  // namespace rmv
