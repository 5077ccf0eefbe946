// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "rmv/polyfam.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "rmv/error.hpp"

namespace rmv
{
namespace
{
// Largest depth whose coefficients j!/k! fit in int64.
constexpr int kMaxDepth = 20;

double binomial(int n, int k)
{
    double r = 1;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return std::round(r);
}

void append_indices(std::size_t d, int kmax, MultiIndex& cur, int used,
                    std::vector<MultiIndex>& out)
{
    if (cur.size() == d)
    {
        out.push_back(cur);
        return;
    }
    std::size_t left = d - cur.size() - 1;
    for (int v = 1; used + v + static_cast<int>(left) <= kmax; ++v)
    {
        cur.push_back(v);
        append_indices(d, kmax, cur, used + v, out);
        cur.pop_back();
    }
}
}  // namespace

//---------------------------------------------------------------------------//
Poly1D::Poly1D(std::vector<std::int64_t> coefficients) : c_(std::move(coefficients))
{
    while (!c_.empty() && c_.back() == 0)
        c_.pop_back();
}

Poly1D Poly1D::monomial(std::int64_t coefficient, int degree)
{
    require(degree >= 0, ErrorCode::invalid_argument, "negative degree");
    std::vector<std::int64_t> c(degree + 1, 0);
    c[degree] = coefficient;
    return Poly1D(std::move(c));
}

Poly1D Poly1D::derivative() const
{
    if (c_.size() <= 1)
        return {};
    std::vector<std::int64_t> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k)
        d[k - 1] = c_[k] * static_cast<std::int64_t>(k);
    return Poly1D(std::move(d));
}

double Poly1D::operator()(double x) const
{
    double r = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it)
        r = r * x + static_cast<double>(*it);
    return r;
}

double Poly1D::sup_abs(double lo, double hi) const
{
    double m = std::max(std::abs(lo), std::abs(hi));
    double s = 0;
    for (std::size_t k = 0; k < c_.size(); ++k)
        s += std::abs(static_cast<double>(c_[k])) * std::pow(m, static_cast<double>(k));
    return s;
}

std::string Poly1D::to_string() const
{
    if (c_.empty())
        return "0";
    std::ostringstream os;
    bool first = true;
    for (std::size_t k = c_.size(); k-- > 0;)
    {
        if (c_[k] == 0)
            continue;
        if (!first)
            os << (c_[k] < 0 ? " - " : " + ");
        else if (c_[k] < 0)
            os << "-";
        std::int64_t a = c_[k] < 0 ? -c_[k] : c_[k];
        if (a != 1 || k == 0)
            os << a;
        if (k >= 1)
            os << "x";
        if (k >= 2)
            os << "^" << k;
        first = false;
    }
    return os.str();
}

std::vector<Poly1D> chi(Poly1D const& f)
{
    std::vector<Poly1D> out;
    for (Poly1D g = f; !g.is_zero(); g = g.derivative())
        out.push_back(g);
    return out;
}

std::vector<Poly1D> build_enumeration(int jmax)
{
    require(jmax >= 1, ErrorCode::invalid_argument, "construction depth must be at least 1");
    require(jmax <= kMaxDepth, ErrorCode::depth_exceeded,
            "construction depth above 20 overflows integer coefficients");
    std::vector<Poly1D> out;
    std::set<Poly1D> seen;
    for (int j = 1; j <= jmax; ++j)
        for (auto const& g : chi(Poly1D::monomial(1, j)))
            if (seen.insert(g).second)
                out.push_back(g);
    return out;
}

//---------------------------------------------------------------------------//
double PolyPotential::value(std::span<const double> x) const
{
    std::vector<double> v, d1, d2;
    family_->tables(x, v, d1, d2);
    std::size_t m = family_->enumeration_size(), d = family_->dim();
    double s = 0;
    auto const& idx = family_->indices();
    for (std::size_t k = 0; k < a_.size(); ++k)
    {
        if (a_[k] == 0)
            continue;
        double p = a_[k];
        for (std::size_t i = 0; i < d; ++i)
            p *= v[i * m + idx[k][i] - 1];
        s += p;
    }
    return s;
}

void PolyPotential::gradient(std::span<const double> x, std::span<double> out) const
{
    std::vector<double> v, d1, d2;
    family_->tables(x, v, d1, d2);
    std::size_t m = family_->enumeration_size(), d = family_->dim();
    std::fill(out.begin(), out.end(), 0.0);
    auto const& idx = family_->indices();
    for (std::size_t k = 0; k < a_.size(); ++k)
    {
        if (a_[k] == 0)
            continue;
        for (std::size_t a = 0; a < d; ++a)
        {
            double p = a_[k];
            for (std::size_t i = 0; i < d; ++i)
                p *= (i == a ? d1 : v)[i * m + idx[k][i] - 1];
            out[a] += p;
        }
    }
}

void PolyPotential::hessian(std::span<const double> x, std::span<double> out) const
{
    std::vector<double> v, d1, d2;
    family_->tables(x, v, d1, d2);
    std::size_t m = family_->enumeration_size(), d = family_->dim();
    std::fill(out.begin(), out.end(), 0.0);
    auto const& idx = family_->indices();
    for (std::size_t k = 0; k < a_.size(); ++k)
    {
        if (a_[k] == 0)
            continue;
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
            {
                double p = a_[k];
                for (std::size_t i = 0; i < d; ++i)
                {
                    std::size_t j = i * m + idx[k][i] - 1;
                    if (i == a && i == b)
                        p *= d2[j];
                    else if (i == a || i == b)
                        p *= d1[j];
                    else
                        p *= v[j];
                }
                out[a * d + b] += p;
            }
    }
}

//---------------------------------------------------------------------------//
PolyFamily::PolyFamily(Domain const& domain, int truncation, int jmax)
    : dim_(domain.dim()), k_(truncation), lo_(domain.lower()), hi_(domain.upper())
{
    require(truncation >= static_cast<int>(dim_), ErrorCode::invalid_argument,
            "truncation K must be at least the dimension");
    if (jmax <= 0)
    {
        jmax = 1;
        while (jmax * (jmax + 3) / 2 < truncation)
            ++jmax;
    }
    jmax_ = jmax;
    f_ = build_enumeration(jmax_);
    for (std::size_t j = 0; j < f_.size(); ++j)
        lookup_.emplace(f_[j], j + 1);
    deriv_.resize(f_.size());
    for (std::size_t j = 0; j < f_.size(); ++j)
    {
        Poly1D g = f_[j].derivative();
        deriv_[j] = g.is_zero() ? 0 : lookup(g);
        require(g.is_zero() || deriv_[j] != 0, ErrorCode::depth_exceeded,
                "derivative not enumerated");
    }
    MultiIndex cur;
    for (int k = static_cast<int>(dim_); k <= k_; ++k)
    {
        std::vector<MultiIndex> lvl;
        append_indices(dim_, k, cur, 0, lvl);
        for (auto& n : lvl)
            if (level(n) == k)
                indices_.push_back(n);
    }
    require(static_cast<std::size_t>(k_ - static_cast<int>(dim_) + 1) <= f_.size(),
            ErrorCode::depth_exceeded, "enumeration shorter than the truncation level");
    for (auto const& n : indices_)
        c_.push_back(c_coefficient(n));
}

Poly1D const& PolyFamily::f(std::size_t j) const
{
    if (j < 1 || j > f_.size())
        fail(ErrorCode::depth_exceeded, "enumeration index " + std::to_string(j) + " out of range");
    return f_[j - 1];
}

std::size_t PolyFamily::lookup(Poly1D const& p) const
{
    auto it = lookup_.find(p);
    return it == lookup_.end() ? 0 : it->second;
}

std::size_t PolyFamily::derivative_index(std::size_t j) const
{
    f(j);
    return deriv_[j - 1];
}

void PolyFamily::check_index(MultiIndex const& n) const
{
    require(n.size() == dim_, ErrorCode::dimension_mismatch,
            "multi-index length does not match dimension");
    for (int v : n)
        if (v < 1 || static_cast<std::size_t>(v) > f_.size())
            fail(ErrorCode::depth_exceeded,
                 "multi-index component " + std::to_string(v) + " beyond enumeration depth");
}

double PolyFamily::s_coefficient(MultiIndex const& n) const
{
    check_index(n);
    double b = 1;
    for (std::size_t i = 0; i < dim_; ++i)
        b *= f_[n[i] - 1].sup_abs(lo_[i], hi_[i]);
    return 1 + b * b;
}

std::vector<MultiIndex> PolyFamily::index_set(MultiIndex const& n) const
{
    check_index(n);
    std::vector<std::vector<int>> chains(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = n[i]; j != 0; j = deriv_[j - 1])
            chains[i].push_back(static_cast<int>(j));
    std::set<MultiIndex> out;
    MultiIndex cur(dim_);
    std::vector<std::size_t> pos(dim_, 0);
    for (;;)
    {
        for (std::size_t i = 0; i < dim_; ++i)
            cur[i] = chains[i][pos[i]];
        out.insert(cur);
        std::size_t i = 0;
        while (i < dim_ && ++pos[i] == chains[i].size())
            pos[i++] = 0;
        if (i == dim_)
            break;
    }
    return {out.begin(), out.end()};
}

double PolyFamily::c_coefficient(MultiIndex const& n) const
{
    auto I = index_set(n);
    double a = 0, s = 0;
    int dm1 = static_cast<int>(dim_) - 1;
    for (auto const& m : I)
    {
        int lm = level(m);
        a += std::ldexp(1.0, lm) * binomial(lm + dm1, dm1);
        s += s_coefficient(m);
    }
    return 1.0 / (a * s);
}

MultiIndex PolyFamily::derivative_of(MultiIndex const& n, std::size_t i) const
{
    check_index(n);
    std::size_t j = deriv_[n[i] - 1];
    if (j == 0)
        return {};
    MultiIndex out = n;
    out[i] = static_cast<int>(j);
    return out;
}

double PolyFamily::eval(MultiIndex const& n, std::span<const double> x) const
{
    check_index(n);
    require(x.size() == dim_, ErrorCode::dimension_mismatch, "point dimension mismatch");
    double p = 1;
    for (std::size_t i = 0; i < dim_; ++i)
        p *= f_[n[i] - 1](x[i]);
    return p;
}

void PolyFamily::tables(std::span<const double> x, std::vector<double>& v,
                        std::vector<double>& d1, std::vector<double>& d2) const
{
    require(x.size() == dim_, ErrorCode::dimension_mismatch, "point dimension mismatch");
    std::size_t m = f_.size();
    v.assign(dim_ * m, 0);
    d1.assign(dim_ * m, 0);
    d2.assign(dim_ * m, 0);
    for (std::size_t i = 0; i < dim_; ++i)
    {
        for (std::size_t j = 0; j < m; ++j)
            v[i * m + j] = f_[j](x[i]);
        for (std::size_t j = 0; j < m; ++j)
        {
            std::size_t dj = deriv_[j];
            d1[i * m + j] = dj ? v[i * m + dj - 1] : 0;
        }
        for (std::size_t j = 0; j < m; ++j)
        {
            std::size_t dj = deriv_[j];
            d2[i * m + j] = dj ? d1[i * m + dj - 1] : 0;
        }
    }
}

std::size_t PolyFamily::count_upto(int kmax) const
{
    if (kmax < 0)
        return indices_.size();
    require(kmax <= k_, ErrorCode::depth_exceeded, "requested level exceeds family truncation");
    std::size_t c = 0;
    while (c < indices_.size() && level(indices_[c]) <= kmax)
        ++c;
    return c;
}

std::vector<double> PolyFamily::pairings(SignedCombo const& combo) const
{
    require(combo.dim() == dim_ || combo.terms().empty(), ErrorCode::dimension_mismatch,
            "measure dimension does not match family");
    std::size_t m = f_.size();
    std::vector<double> out(indices_.size(), 0), v, d1, d2;
    for (auto const& [coef, mu] : combo.terms())
        for (std::size_t p = 0; p < mu.size(); ++p)
        {
            tables(mu.point(p), v, d1, d2);
            double w = coef * mu.weight(p);
            for (std::size_t k = 0; k < indices_.size(); ++k)
            {
                double prod = w;
                for (std::size_t i = 0; i < dim_; ++i)
                    prod *= v[i * m + indices_[k][i] - 1];
                out[k] += prod;
            }
        }
    return out;
}

SValue PolyFamily::S(SignedCombo const& combo, int kmax) const
{
    std::size_t cnt = count_upto(kmax);
    int lvl = kmax < 0 ? k_ : kmax;
    auto p = pairings(combo);
    SValue r;
    for (std::size_t k = 0; k < cnt; ++k)
        r.value += c_[k] * p[k] * p[k];
    double tv = 0;
    for (auto const& t : combo.terms())
        tv += std::abs(t.first);
    r.tail_bound = tv * tv * std::ldexp(1.0, -lvl);
    return r;
}

SValue PolyFamily::S(EmpiricalMeasure const& mu, int kmax) const
{
    return S(SignedCombo(mu), kmax);
}

PolyPotential PolyFamily::dl_S(SignedCombo const& combo, int kmax) const
{
    std::size_t cnt = count_upto(kmax);
    auto p = pairings(combo);
    std::vector<double> a(indices_.size(), 0);
    for (std::size_t k = 0; k < cnt; ++k)
        a[k] = 2 * c_[k] * p[k];
    return PolyPotential(this, std::move(a));
}

PolyPotential PolyFamily::dl_S(EmpiricalMeasure const& mu, int kmax) const
{
    return dl_S(SignedCombo(mu), kmax);
}

double PolyFamily::gradient_sum(EmpiricalMeasure const& nu, int kmax) const
{
    require(nu.dim() == dim_, ErrorCode::dimension_mismatch,
            "measure dimension does not match family");
    std::size_t cnt = count_upto(kmax), m = f_.size();
    std::vector<double> g(cnt * dim_, 0), v, d1, d2;
    for (std::size_t p = 0; p < nu.size(); ++p)
    {
        tables(nu.point(p), v, d1, d2);
        for (std::size_t k = 0; k < cnt; ++k)
            for (std::size_t a = 0; a < dim_; ++a)
            {
                double prod = nu.weight(p);
                for (std::size_t i = 0; i < dim_; ++i)
                    prod *= (i == a ? d1 : v)[i * m + indices_[k][i] - 1];
                g[k * dim_ + a] += prod;
            }
    }
    double s = 0;
    for (std::size_t k = 0; k < cnt; ++k)
    {
        double sq = 0;
        for (std::size_t a = 0; a < dim_; ++a)
            sq += g[k * dim_ + a] * g[k * dim_ + a];
        s += c_[k] * sq;
    }
    return s;
}
}  // namespace rmv
