#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "dsfmin/error.hpp"
#include "dsfmin/polynomial.hpp"
#include "dsfmin/tolerances.hpp"

namespace dsfmin {

enum class Properness { StrictlyProper, Biproper, Improper };

namespace detail {
/// Coefficients this small relative to a polynomial's largest one are roundoff.
inline constexpr double kChopRel = 1e-12;
/// A numerator this small relative to its monic denominator is the zero function.
inline constexpr double kZeroRel = 1e-13;
}  // namespace detail

class RationalFunction;
RationalFunction rat_reduce(Polynomial num, Polynomial den, double tol_root = Tolerances{}.root);

/// num/den in reduced form with a monic denominator. Instances are produced by
/// rat_reduce, so the reduced-form invariant always holds.
class RationalFunction {
   public:
    RationalFunction() : den_(Polynomial::constant(1.0)) {}

    static RationalFunction constant(double v) { return rat_reduce(Polynomial::constant(v), Polynomial::constant(1.0)); }

    const Polynomial& num() const { return num_; }
    const Polynomial& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }

    /// deg(den) - deg(num); the zero function counts as strictly proper.
    int relative_degree() const { return is_zero() ? den_.degree() + 1 : den_.degree() - num_.degree(); }

    Properness properness() const {
        const int r = relative_degree();
        if (r > 0) return Properness::StrictlyProper;
        return r == 0 ? Properness::Biproper : Properness::Improper;
    }

    template <typename T>
    T operator()(T s) const {
        return num_(s) / den_(s);
    }

    RationalFunction times_s() const { return rat_reduce(num_.shifted_up(), den_); }

    friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (a.den_ == b.den_) return rat_reduce(a.num_ + b.num_, a.den_);
        return rat_reduce(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend RationalFunction operator-(const RationalFunction& a) {
        RationalFunction r = a;
        r.num_ = -r.num_;
        return r;
    }
    friend RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) { return a + (-b); }
    friend RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
        if (a.is_zero() || b.is_zero()) return {};
        return rat_reduce(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend RationalFunction operator*(const RationalFunction& a, double v) {
        if (v == 0.0) return {};
        RationalFunction r = a;
        r.num_ = r.num_ * v;
        return r;
    }
    friend RationalFunction operator/(const RationalFunction& a, const RationalFunction& b) {
        if (b.is_zero()) throw Error(ErrorKind::ZeroDenominator, "division by the zero rational function");
        return rat_reduce(a.num_ * b.den_, a.den_ * b.num_);
    }

   private:
    friend RationalFunction rat_reduce(Polynomial, Polynomial, double);
    RationalFunction(Polynomial n, Polynomial d) : num_(std::move(n)), den_(std::move(d)) {}

    Polynomial num_;
    Polynomial den_;
};

/// Cancels denominator roots shared with the numerator, then makes the
/// denominator monic. A root counts as shared when a numerator root lands in
/// its cluster, or when the relative residual |num(r)| / sum|num_k||r|^k is
/// within tol_root and a numerator root lies within the widest cluster ring.
/// Multiple roots are cancelled to the smaller multiplicity.
inline RationalFunction rat_reduce(Polynomial num, Polynomial den, double tol_root) {
    if (den.is_zero()) throw Error(ErrorKind::ZeroDenominator, "rational function with zero denominator");
    den = den.chopped(detail::kChopRel);
    num = num.chopped(detail::kChopRel);
    {
        const double lead = den.leading();
        den = den * (1.0 / lead);
        num = num * (1.0 / lead);
    }
    if (num.max_abs() <= detail::kZeroRel * den.max_abs()) return RationalFunction(Polynomial{}, Polynomial::constant(1.0));

    bool cancelled = true;
    while (cancelled && den.degree() > 0 && num.degree() > 0) {
        cancelled = false;
        const std::vector<RootCluster> num_roots = root_clusters(num);
        for (const RootCluster& c : root_clusters(den)) {
            if (c.value.imag() < 0.0) continue;
            if (num.degree() < 1 || den.degree() < 1) break;
            const double radius = detail::kClusterRadius * std::max(1.0, std::abs(c.value));
            // Numerator roots sitting on this cluster; the pooled mean is the
            // best estimate of the shared root.
            int shared = 0;
            Complex pooled = c.value * static_cast<double>(c.multiplicity);
            for (const RootCluster& z : num_roots)
                if (std::abs(z.value - c.value) <= radius) {
                    shared += z.multiplicity;
                    pooled += z.value * static_cast<double>(z.multiplicity);
                }
            Complex r = pooled / static_cast<double>(c.multiplicity + shared);
            if (std::abs(r.imag()) <= tol_root * std::max(1.0, std::abs(r))) r = Complex(r.real(), 0.0);
            if (shared == 0 && std::abs(num(r)) <= tol_root * num.eval_scale(r)) {
                // A small residual alone is not enough for high-degree numerators;
                // a computed numerator root must also be close.
                const double reach = detail::cluster_radius(detail::kMaxClusterMultiplicity) * std::max(1.0, std::abs(r));
                for (const RootCluster& z : num_roots)
                    if (std::abs(z.value - r) <= reach) shared = 1;
            }
            const int times = std::min({shared, c.multiplicity, num.degree()});
            if (times == 0) continue;
            // Complex factors need a conjugate partner in the numerator as well.
            if (r.imag() != 0.0 && num.degree() < 2 * times) continue;
            for (int k = 0; k < times; ++k) {
                num = deflate(num, r);
                den = deflate(den, r);
            }
            cancelled = true;
        }
    }
    const double lead = den.leading();
    den = den * (1.0 / lead);
    num = (num * (1.0 / lead)).chopped(detail::kChopRel);
    if (num.max_abs() <= detail::kZeroRel * den.max_abs()) num = Polynomial{};
    return RationalFunction(std::move(num), std::move(den));
}

}  // namespace dsfmin
