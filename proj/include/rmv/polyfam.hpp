// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rmv/geometry.hpp"
#include "rmv/measures.hpp"

namespace rmv
{
//! Univariate polynomial with exact integer coefficients, lowest degree first.
class Poly1D
{
  public:
    Poly1D() = default;
    explicit Poly1D(std::vector<std::int64_t> coefficients);
    static Poly1D monomial(std::int64_t coefficient, int degree);

    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    std::vector<std::int64_t> const& coefficients() const { return c_; }
    Poly1D derivative() const;
    double operator()(double x) const;
    //! sup of |p| over [lo, hi]; exact for monomials.
    double sup_abs(double lo, double hi) const;
    std::string to_string() const;

    friend bool operator==(Poly1D const&, Poly1D const&) = default;
    friend auto operator<=>(Poly1D const& a, Poly1D const& b) { return a.c_ <=> b.c_; }

  private:
    std::vector<std::int64_t> c_;
};

//! All nonzero derivatives f, f', f'', ... in that order.
std::vector<Poly1D> chi(Poly1D const& f);

//! Canonical listing of chi(x), chi(x^2), ..., chi(x^jmax), deduplicated.
std::vector<Poly1D> build_enumeration(int jmax);

using MultiIndex = std::vector<int>;

inline int level(MultiIndex const& n)
{
    int s = 0;
    for (int v : n)
        s += v;
    return s;
}

class PolyFamily;

struct SValue
{
    double value = 0;
    double tail_bound = 0;
};

//! phi(x) = sum_n a_n f_n(x); the fields D^L S are gradients of such sums.
class PolyPotential
{
  public:
    PolyPotential() = default;
    PolyPotential(PolyFamily const* family, std::vector<double> coefficients)
        : family_(family), a_(std::move(coefficients))
    {
    }

    double value(std::span<const double> x) const;
    void gradient(std::span<const double> x, std::span<double> out) const;
    //! Row-major d x d Hessian.
    void hessian(std::span<const double> x, std::span<double> out) const;
    std::vector<double> const& coefficients() const { return a_; }

  private:
    PolyFamily const* family_ = nullptr;
    std::vector<double> a_;
};

/*!
 * Tensor-product family f_n(x) = f_{n_1}(x_1) ... f_{n_d}(x_d), n_i >= 1,
 * truncated at |n| <= K.
 *
 * Coefficients s_n use the bounding box of the domain. All caches are filled
 * at construction; the object is immutable afterwards.
 */
class PolyFamily
{
  public:
    //! jmax = 0 picks the smallest construction depth covering index K.
    PolyFamily(Domain const& domain, int truncation, int jmax = 0);

    std::size_t dim() const { return dim_; }
    int truncation() const { return k_; }
    int depth() const { return jmax_; }
    std::size_t enumeration_size() const { return f_.size(); }
    //! 1-based access.
    Poly1D const& f(std::size_t j) const;
    //! 1-based index of p, or 0 if p is not enumerated.
    std::size_t lookup(Poly1D const& p) const;
    //! Index of f_j', 0 when the derivative vanishes.
    std::size_t derivative_index(std::size_t j) const;

    //! Multi-indices with |n| <= K, ordered by level then lexicographically.
    std::vector<MultiIndex> const& indices() const { return indices_; }
    double c_cached(std::size_t k) const { return c_[k]; }

    double s_coefficient(MultiIndex const& n) const;
    std::vector<MultiIndex> index_set(MultiIndex const& n) const;
    double c_coefficient(MultiIndex const& n) const;
    //! The multi-index of d/dx_i f_n, or empty when the derivative vanishes.
    MultiIndex derivative_of(MultiIndex const& n, std::size_t i) const;

    double eval(MultiIndex const& n, std::span<const double> x) const;

    //! Truncated S at level kmax (<= K; negative means K).
    SValue S(SignedCombo const& m, int kmax = -1) const;
    SValue S(EmpiricalMeasure const& mu, int kmax = -1) const;
    //! Potential whose gradient is D^L S at m.
    PolyPotential dl_S(SignedCombo const& m, int kmax = -1) const;
    PolyPotential dl_S(EmpiricalMeasure const& mu, int kmax = -1) const;
    //! sum_n c_n |<nu, grad f_n>|^2.
    double gradient_sum(EmpiricalMeasure const& nu, int kmax = -1) const;

    //! <m, f_n> for all cached indices.
    std::vector<double> pairings(SignedCombo const& m) const;

    // Per-coordinate tables of f_j and its first two derivatives at x.
    void tables(std::span<const double> x, std::vector<double>& v, std::vector<double>& d1,
                std::vector<double>& d2) const;

  private:
    std::size_t count_upto(int kmax) const;
    void check_index(MultiIndex const& n) const;

    std::size_t dim_;
    int k_;
    int jmax_;
    Point lo_, hi_;
    std::vector<Poly1D> f_;
    std::map<Poly1D, std::size_t> lookup_;
    std::vector<std::size_t> deriv_;
    std::vector<MultiIndex> indices_;
    std::vector<double> c_;
};
}  // namespace rmv
