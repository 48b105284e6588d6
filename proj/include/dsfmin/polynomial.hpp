#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dsfmin/error.hpp"

namespace dsfmin {

using Complex = std::complex<double>;

/// Real polynomial stored in ascending order: coeffs()[k] multiplies s^k.
/// The highest stored coefficient is never zero; the zero polynomial has no
/// coefficients and degree -1.
class Polynomial {
   public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { strip(); }
    Polynomial(std::initializer_list<double> coeffs) : c_(coeffs) { strip(); }

    static Polynomial constant(double v) { return Polynomial(std::vector<double>{v}); }

    static Polynomial monomial(int k, double v = 1.0) {
        std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
        c.back() = v;
        return Polynomial(std::move(c));
    }

    /// Monic polynomial prod (s - r).
    static Polynomial from_roots(std::span<const double> roots) {
        Polynomial p = constant(1.0);
        for (double r : roots) p = p * Polynomial{-r, 1.0};
        return p;
    }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    std::span<const double> coeffs() const { return c_; }
    double operator[](std::size_t k) const { return k < c_.size() ? c_[k] : 0.0; }
    double leading() const { return c_.empty() ? 0.0 : c_.back(); }

    double max_abs() const {
        double m = 0.0;
        for (double v : c_) m = std::max(m, std::abs(v));
        return m;
    }

    template <typename T>
    T operator()(T s) const {
        T acc{0.0};
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
        return acc;
    }

    /// sum |c_k| |s|^k, the natural scale for judging |p(s)| small.
    double eval_scale(Complex s) const {
        const double r = std::abs(s);
        double acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * r + std::abs(*it);
        return acc;
    }

    Polynomial derivative() const {
        if (c_.size() <= 1) return {};
        std::vector<double> d(c_.size() - 1);
        for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
        return Polynomial(std::move(d));
    }

    /// Multiplication by s^k.
    Polynomial shifted_up(int k = 1) const {
        if (is_zero()) return {};
        std::vector<double> c(static_cast<std::size_t>(k), 0.0);
        c.insert(c.end(), c_.begin(), c_.end());
        return Polynomial(std::move(c));
    }

    Polynomial monic() const {
        if (is_zero()) throw Error(ErrorKind::ZeroPolynomial, "cannot normalize the zero polynomial");
        return *this * (1.0 / leading());
    }

    /// Zeroes every coefficient whose magnitude is at most rel * max_abs().
    Polynomial chopped(double rel) const {
        const double cut = rel * max_abs();
        std::vector<double> c = c_;
        for (double& v : c)
            if (std::abs(v) <= cut) v = 0.0;
        return Polynomial(std::move(c));
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = a[k] + b[k];
        return Polynomial(std::move(c));
    }
    friend Polynomial operator-(const Polynomial& a) { return a * -1.0; }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return Polynomial(std::move(c));
    }
    friend Polynomial operator*(const Polynomial& a, double v) {
        std::vector<double> c = a.c_;
        for (double& x : c) x *= v;
        return Polynomial(std::move(c));
    }
    friend Polynomial operator*(double v, const Polynomial& a) { return a * v; }

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

   private:
    void strip() {
        while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
    }

    std::vector<double> c_;
};

inline Polynomial poly_mul(const Polynomial& a, const Polynomial& b) { return a * b; }

/// Long division a = q*b + r with deg r < deg b.
inline std::pair<Polynomial, Polynomial> poly_divmod(const Polynomial& a, const Polynomial& b) {
    if (b.is_zero()) throw Error(ErrorKind::ZeroDenominator, "polynomial division by zero");
    if (a.degree() < b.degree()) return {Polynomial{}, a};
    std::vector<double> rem(a.coeffs().begin(), a.coeffs().end());
    const int db = b.degree();
    std::vector<double> q(static_cast<std::size_t>(a.degree() - db) + 1, 0.0);
    for (int k = a.degree() - db; k >= 0; --k) {
        const double f = rem[static_cast<std::size_t>(k + db)] / b.leading();
        q[static_cast<std::size_t>(k)] = f;
        for (int j = 0; j <= db; ++j) rem[static_cast<std::size_t>(k + j)] -= f * b[static_cast<std::size_t>(j)];
    }
    rem.resize(static_cast<std::size_t>(db));
    return {Polynomial(std::move(q)), Polynomial(std::move(rem))};
}

/// Removes the factor (s - r) for a real root, or (s - z)(s - conj z) for a
/// complex one. The division remainder is discarded.
inline Polynomial deflate(const Polynomial& p, Complex root) {
    if (root.imag() == 0.0) return poly_divmod(p, Polynomial{-root.real(), 1.0}).first;
    const Polynomial quad{std::norm(root), -2.0 * root.real(), 1.0};
    return poly_divmod(p, quad).first;
}

/// A root together with how many computed roots collapsed onto it.
struct RootCluster {
    Complex value;
    int multiplicity = 1;
};

struct RealRoot {
    double value;
    int multiplicity = 1;
};

struct RootSet {
    std::vector<RealRoot> real;       ///< ascending
    std::vector<Complex> complex;     ///< each conjugate partner listed, ascending by (re, im)
};

namespace detail {

/// Computed roots closer than this (relative to max(1, |root|)) are treated as
/// one multiple root. Perturbed double roots split by O(sqrt(eps)).
inline constexpr double kClusterRadius = 1e-5;

/// A k-fold root under a relative coefficient error delta splits into a ring
/// of radius about delta^(1/k); delta = kClusterRadius^2 keeps k = 2 at
/// kClusterRadius.
inline double cluster_radius(int multiplicity) {
    return std::pow(kClusterRadius * kClusterRadius, 1.0 / std::max(2, multiplicity));
}

/// Largest multiplicity recognised; beyond it the ring radius gets too wide
/// to tell a multiple root from distinct close ones.
inline constexpr int kMaxClusterMultiplicity = 4;

/// Transposed companion matrix of c (ascending, c.back() != 0) after
/// radix-2 diagonal balancing. Balancing keeps clustered roots of badly
/// scaled polynomials from splitting far beyond their conditioning.
inline Eigen::MatrixXd balanced_companion(const Eigen::VectorXd& c) {
    const Eigen::Index d = c.size() - 1;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k) m(k, d - 1) = -c(k) / c(d);
    for (Eigen::Index k = 1; k < d; ++k) m(k, k - 1) = 1.0;
    bool changed = true;
    for (int sweep = 0; changed && sweep < 100; ++sweep) {
        changed = false;
        for (Eigen::Index i = 0; i < d; ++i) {
            const double col = m.col(i).cwiseAbs().sum() - std::abs(m(i, i));
            const double row = m.row(i).cwiseAbs().sum() - std::abs(m(i, i));
            if (col == 0.0 || row == 0.0) continue;
            double f = 1.0;
            double cs = col;
            while (cs < row / 2.0) {
                f *= 2.0;
                cs *= 4.0;
            }
            while (cs > row * 2.0) {
                f /= 2.0;
                cs /= 4.0;
            }
            if ((cs + row) / f < 0.95 * (col + row)) {
                m.col(i) *= f;
                m.row(i) /= f;
                changed = true;
            }
        }
    }
    return m;
}

inline std::vector<Complex> companion_roots(const Polynomial& p) {
    if (p.degree() < 1) return {};
    if (p.degree() == 1) return {Complex(-p[0] / p[1], 0.0)};
    // Roots at the origin are split off exactly so the solver sees a nonzero
    // constant term.
    std::size_t zeros = 0;
    while (p[zeros] == 0.0) ++zeros;
    std::vector<Complex> out(zeros, Complex(0.0, 0.0));
    if (static_cast<int>(zeros) == p.degree()) return out;
    const int d = p.degree() - static_cast<int>(zeros);
    Eigen::VectorXd c(d + 1);
    for (int k = 0; k <= d; ++k) c(k) = p[static_cast<std::size_t>(k) + zeros];
    if (d == 1) {
        out.emplace_back(-c(0) / c(1), 0.0);
        return out;
    }
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(balanced_companion(c), false).eigenvalues();
    for (Eigen::Index k = 0; k < ev.size(); ++k) out.push_back(ev(k));
    return out;
}

inline bool complex_less(Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
}

/// One Newton step on p, accepted only if it reduces the residual.
inline double polish_real_root(const Polynomial& p, double r) {
    const Polynomial dp = p.derivative();
    for (int it = 0; it < 3; ++it) {
        const double f = p(r);
        const double df = dp(r);
        if (f == 0.0 || df == 0.0) break;
        const double cand = r - f / df;
        if (std::abs(p(cand)) >= std::abs(f)) break;
        r = cand;
    }
    return r;
}

}  // namespace detail

/// All roots of p, with near-coincident computed roots merged into clusters
/// carrying a multiplicity. Cluster values are means of their members, which
/// makes a perturbed real double root real again.
inline std::vector<RootCluster> root_clusters(const Polynomial& p) {
    if (p.is_zero()) throw Error(ErrorKind::ZeroPolynomial, "roots of the zero polynomial are undefined");
    std::vector<Complex> raw = detail::companion_roots(p);
    std::sort(raw.begin(), raw.end(), detail::complex_less);
    std::vector<bool> used(raw.size(), false);
    std::vector<RootCluster> out;
    // k nearest free roots to z, nearest first.
    auto nearest = [&](Complex z, std::size_t k) {
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < raw.size(); ++j)
            if (!used[j]) idx.push_back(j);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return std::abs(raw[a] - z) < std::abs(raw[b] - z); });
        idx.resize(std::min(k, idx.size()));
        return idx;
    };
    // Each free root seeds the largest set of neighbours that fits inside the
    // ring radius of its size.
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (used[i]) continue;
        std::vector<std::size_t> members{i};
        for (int k = detail::kMaxClusterMultiplicity; k >= 2; --k) {
            std::vector<std::size_t> cand = nearest(raw[i], static_cast<std::size_t>(k));
            if (cand.size() < static_cast<std::size_t>(k)) continue;
            Complex centre{};
            for (int pass = 0; pass < 2; ++pass) {
                centre = {};
                for (std::size_t j : cand) centre += raw[j];
                centre /= static_cast<double>(k);
                cand = nearest(centre, static_cast<std::size_t>(k));
            }
            const double radius = detail::cluster_radius(k) * std::max(1.0, std::abs(centre));
            const bool has_seed = std::find(cand.begin(), cand.end(), i) != cand.end();
            if (has_seed && std::all_of(cand.begin(), cand.end(), [&](std::size_t j) { return std::abs(raw[j] - centre) <= radius; })) {
                members = cand;
                break;
            }
        }
        Complex sum{};
        for (std::size_t j : members) {
            used[j] = true;
            sum += raw[j];
        }
        out.push_back({sum / static_cast<double>(members.size()), static_cast<int>(members.size())});
    }
    std::sort(out.begin(), out.end(), [](const RootCluster& a, const RootCluster& b) { return detail::complex_less(a.value, b.value); });
    return out;
}

/// Roots of p split into real roots (with multiplicities) and complex roots.
/// A cluster counts as real when its imaginary part is within tol_root of the axis.
inline RootSet poly_real_roots(const Polynomial& p, double tol_root) {
    RootSet out;
    for (const RootCluster& c : root_clusters(p)) {
        const double scale = std::max(1.0, std::abs(c.value));
        if (std::abs(c.value.imag()) <= tol_root * scale) {
            double r = c.value.real();
            if (c.multiplicity == 1) r = detail::polish_real_root(p, r);
            out.real.push_back({r, c.multiplicity});
        } else {
            for (int k = 0; k < c.multiplicity; ++k) out.complex.push_back(c.value);
        }
    }
    std::sort(out.real.begin(), out.real.end(), [](const RealRoot& a, const RealRoot& b) { return a.value < b.value; });
    std::sort(out.complex.begin(), out.complex.end(), detail::complex_less);
    return out;
}

}  // namespace dsfmin
