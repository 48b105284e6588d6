#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "dsfmin/error.hpp"
#include "dsfmin/polynomial.hpp"
#include "dsfmin/rational.hpp"
#include "dsfmin/tolerances.hpp"

namespace dsfmin {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

/// Dense row-major grid of reduced rational functions.
class RationalMatrix {
   public:
    RationalMatrix() = default;
    RationalMatrix(Index rows, Index cols) : rows_(rows), cols_(cols), e_(static_cast<std::size_t>(rows * cols)) {}

    static RationalMatrix constant(const Matrix& m) {
        RationalMatrix r(m.rows(), m.cols());
        for (Index i = 0; i < m.rows(); ++i)
            for (Index j = 0; j < m.cols(); ++j) r.set(i, j, RationalFunction::constant(m(i, j)));
        return r;
    }

    static RationalMatrix identity(Index n) { return constant(Matrix::Identity(n, n)); }

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }

    const RationalFunction& operator()(Index i, Index j) const { return e_[flat(i, j)]; }
    void set(Index i, Index j, RationalFunction f) { e_[flat(i, j)] = std::move(f); }

    RationalMatrix block(Index r0, Index c0, Index nr, Index nc) const {
        RationalMatrix out(nr, nc);
        for (Index i = 0; i < nr; ++i)
            for (Index j = 0; j < nc; ++j) out.set(i, j, (*this)(r0 + i, c0 + j));
        return out;
    }

    RationalMatrix times_s() const {
        RationalMatrix out(rows_, cols_);
        for (std::size_t k = 0; k < e_.size(); ++k) out.e_[k] = e_[k].times_s();
        return out;
    }

    /// Entrywise multiplication by the polynomial f.
    RationalMatrix times(const Polynomial& f, double tol_root = Tolerances{}.root) const {
        RationalMatrix out(rows_, cols_);
        for (std::size_t k = 0; k < e_.size(); ++k) out.e_[k] = rat_reduce(e_[k].num() * f, e_[k].den(), tol_root);
        return out;
    }

    friend RationalMatrix hstack(const RationalMatrix& a, const RationalMatrix& b) {
        if (a.rows_ != b.rows_) throw Error(ErrorKind::ShapeMismatch, "hstack needs equal row counts");
        RationalMatrix out(a.rows_, a.cols_ + b.cols_);
        for (Index i = 0; i < a.rows_; ++i) {
            for (Index j = 0; j < a.cols_; ++j) out.set(i, j, a(i, j));
            for (Index j = 0; j < b.cols_; ++j) out.set(i, a.cols_ + j, b(i, j));
        }
        return out;
    }

    friend RationalMatrix operator+(const RationalMatrix& a, const RationalMatrix& b) {
        a.require_same_shape(b);
        RationalMatrix out(a.rows_, a.cols_);
        for (std::size_t k = 0; k < a.e_.size(); ++k) out.e_[k] = a.e_[k] + b.e_[k];
        return out;
    }
    friend RationalMatrix operator-(const RationalMatrix& a, const RationalMatrix& b) {
        a.require_same_shape(b);
        RationalMatrix out(a.rows_, a.cols_);
        for (std::size_t k = 0; k < a.e_.size(); ++k) out.e_[k] = a.e_[k] - b.e_[k];
        return out;
    }
    friend RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b) {
        if (a.cols_ != b.rows_) throw Error(ErrorKind::ShapeMismatch, "inner dimensions differ in rational matrix product");
        RationalMatrix out(a.rows_, b.cols_);
        for (Index i = 0; i < a.rows_; ++i)
            for (Index j = 0; j < b.cols_; ++j) {
                RationalFunction acc;
                for (Index k = 0; k < a.cols_; ++k) acc = acc + a(i, k) * b(k, j);
                out.set(i, j, acc);
            }
        return out;
    }

   private:
    std::size_t flat(Index i, Index j) const { return static_cast<std::size_t>(i * cols_ + j); }
    void require_same_shape(const RationalMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw Error(ErrorKind::ShapeMismatch, std::to_string(rows_) + "x" + std::to_string(cols_) + " vs " +
                                                      std::to_string(o.rows_) + "x" + std::to_string(o.cols_));
    }

    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<RationalFunction> e_;
};

/// Simple-pole expansion  M(s) = sum_i K_i / (s - pole_i) + constant.
struct PoleResidueForm {
    std::vector<double> poles;  ///< distinct, descending
    std::vector<Matrix> residues;
    Matrix constant;
};

namespace detail {

/// Real roots of one denominator (multiplicities kept); throws on complex roots.
inline std::vector<RealRoot> real_denominator_roots(const Polynomial& den, Index i, Index j) {
    if (den.degree() < 1) return {};
    RootSet rs = poly_real_roots(den, Tolerances{}.root);
    if (!rs.complex.empty())
        throw Error(ErrorKind::ComplexPolesUnsupported, "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                                            ") has complex poles");
    return rs.real;
}

/// Merges sorted values closer than tol into one representative (the mean of the run).
inline std::vector<double> dedupe_sorted(const std::vector<double>& v, double tol) {
    std::vector<double> out;
    std::size_t i = 0;
    while (i < v.size()) {
        double sum = v[i];
        std::size_t n = 1;
        while (i + n < v.size() && std::abs(v[i + n] - v[i]) <= tol) sum += v[i + n++];
        out.push_back(sum / static_cast<double>(n));
        i += n;
    }
    return out;
}

inline double max_root_modulus(const RationalMatrix& m) {
    double best = 0.0;
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) {
            const Polynomial& d = m(i, j).den();
            if (d.degree() < 1) continue;
            for (const RootCluster& c : root_clusters(d)) best = std::max(best, std::abs(c.value));
        }
    return best;
}

/// Determinant of an n x n polynomial matrix (row-major) by Laplace expansion
/// with memoisation over column subsets.
inline Polynomial poly_det(const std::vector<Polynomial>& a, int n) {
    if (n == 0) return Polynomial::constant(1.0);
    std::unordered_map<std::uint32_t, Polynomial> memo;
    auto rec = [&](auto&& self, int row, std::uint32_t cols) -> Polynomial {
        if (row == n) return Polynomial::constant(1.0);
        if (auto it = memo.find(cols); it != memo.end()) return it->second;
        Polynomial acc;
        int pos = 0;
        for (int c = 0; c < n; ++c) {
            if (!(cols & (1u << c))) continue;
            const Polynomial& entry = a[static_cast<std::size_t>(row * n + c)];
            if (!entry.is_zero()) {
                Polynomial term = entry * self(self, row + 1, cols & ~(1u << c));
                acc = (pos % 2 == 0) ? acc + term : acc - term;
            }
            ++pos;
        }
        memo.emplace(cols, acc);
        return acc;
    };
    return rec(rec, 0, (n >= 32) ? 0xffffffffu : ((1u << n) - 1u));
}

/// Minor of `a` with row r and column c removed.
inline Polynomial poly_minor(const std::vector<Polynomial>& a, int n, int r, int c) {
    std::vector<Polynomial> sub;
    sub.reserve(static_cast<std::size_t>((n - 1) * (n - 1)));
    for (int i = 0; i < n; ++i) {
        if (i == r) continue;
        for (int j = 0; j < n; ++j)
            if (j != c) sub.push_back(a[static_cast<std::size_t>(i * n + j)]);
    }
    return poly_det(sub, n - 1);
}

struct PolynomialForm {
    Polynomial common;             ///< common denominator
    std::vector<Polynomial> nums;  ///< row-major numerators over `common`
};

/// Writes every entry over one common denominator: the product of all distinct
/// denominator roots, each with its largest multiplicity among the entries.
inline PolynomialForm common_denominator(const RationalMatrix& m, double tol_pole) {
    struct Factor {
        Complex root;
        int mult;
    };
    std::vector<Factor> global;
    std::vector<std::vector<Factor>> local(static_cast<std::size_t>(m.rows() * m.cols()));
    auto match = [&](const std::vector<Factor>& fs, Complex z) -> int {
        for (std::size_t k = 0; k < fs.size(); ++k)
            if (std::abs(fs[k].root - z) <= tol_pole * std::max(1.0, std::abs(z))) return static_cast<int>(k);
        return -1;
    };
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) {
            const Polynomial& d = m(i, j).den();
            auto& loc = local[static_cast<std::size_t>(i * m.cols() + j)];
            if (d.degree() < 1) continue;
            for (const RootCluster& c : root_clusters(d)) {
                if (c.value.imag() < 0.0) continue;
                loc.push_back({c.value, c.multiplicity});
                const int g = match(global, c.value);
                if (g < 0)
                    global.push_back({c.value, c.multiplicity});
                else
                    global[static_cast<std::size_t>(g)].mult = std::max(global[static_cast<std::size_t>(g)].mult, c.multiplicity);
            }
        }
    auto factor_poly = [](Complex z) {
        return z.imag() == 0.0 ? Polynomial{-z.real(), 1.0} : Polynomial{std::norm(z), -2.0 * z.real(), 1.0};
    };
    PolynomialForm out;
    out.common = Polynomial::constant(1.0);
    for (const Factor& f : global)
        for (int k = 0; k < f.mult; ++k) out.common = out.common * factor_poly(f.root);
    out.nums.reserve(local.size());
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) {
            const auto& loc = local[static_cast<std::size_t>(i * m.cols() + j)];
            Polynomial cof = Polynomial::constant(1.0 / m(i, j).den().leading());
            for (const Factor& f : global) {
                const int l = match(loc, f.root);
                const int have = l < 0 ? 0 : loc[static_cast<std::size_t>(l)].mult;
                for (int k = have; k < f.mult; ++k) cof = cof * factor_poly(f.root);
            }
            out.nums.push_back(m(i, j).num() * cof);
        }
    return out;
}

}  // namespace detail

/// Distinct real poles over all entries, merged within tol_pole, descending.
inline std::vector<double> rmat_poles(const RationalMatrix& m, double tol_pole = Tolerances{}.pole) {
    std::vector<double> all;
    std::string offending;
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) {
            try {
                for (const RealRoot& r : detail::real_denominator_roots(m(i, j).den(), i, j)) all.push_back(r.value);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::ComplexPolesUnsupported) throw;
                offending += (offending.empty() ? "" : ", ") + std::string("(") + std::to_string(i + 1) + "," +
                             std::to_string(j + 1) + ")";
            }
        }
    if (!offending.empty())
        throw Error(ErrorKind::ComplexPolesUnsupported, "complex poles in entries " + offending);
    std::sort(all.begin(), all.end());
    std::vector<double> out = detail::dedupe_sorted(all, tol_pole);
    std::reverse(out.begin(), out.end());
    return out;
}

/// Entrywise lim_{s -> pole} (s - pole) M(s). Entries without that pole give 0.
inline Matrix residue_at(const RationalMatrix& m, double pole, double tol_pole = Tolerances{}.pole) {
    Matrix k = Matrix::Zero(m.rows(), m.cols());
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) {
            const RationalFunction& f = m(i, j);
            if (f.is_zero() || f.den().degree() < 1) continue;
            for (const RealRoot& r : detail::real_denominator_roots(f.den(), i, j)) {
                if (std::abs(r.value - pole) > tol_pole) continue;
                if (r.multiplicity > 1)
                    throw Error(ErrorKind::RepeatedPole, "pole " + std::to_string(pole) + " has multiplicity " +
                                                             std::to_string(r.multiplicity) + " in entry (" +
                                                             std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
                const Polynomial rest = deflate(f.den(), Complex(r.value, 0.0));
                k(i, j) = f.num()(r.value) / rest(r.value);
            }
        }
    return k;
}

/// Value at infinity; strictly proper entries give 0.
inline Matrix limit_at_infinity(const RationalMatrix& m) {
    Matrix d = Matrix::Zero(m.rows(), m.cols());
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) {
            const RationalFunction& f = m(i, j);
            if (f.properness() == Properness::Improper)
                throw Error(ErrorKind::ImproperMatrix,
                            "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") is improper");
            if (f.properness() == Properness::Biproper) d(i, j) = f.num().leading() / f.den().leading();
        }
    return d;
}

inline PoleResidueForm to_pole_residue(const RationalMatrix& m, const Tolerances& tol = {}) {
    PoleResidueForm out;
    out.constant = limit_at_infinity(m);
    out.poles = rmat_poles(m, tol.pole);
    for (double p : out.poles) out.residues.push_back(residue_at(m, p, tol.pole));
    return out;
}

inline RationalMatrix from_pole_residue(const PoleResidueForm& prf, double tol_root = Tolerances{}.root) {
    const Index rows = prf.constant.rows();
    const Index cols = prf.constant.cols();
    RationalMatrix out(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) {
            std::vector<std::size_t> active;
            for (std::size_t k = 0; k < prf.poles.size(); ++k)
                if (prf.residues[k](i, j) != 0.0) active.push_back(k);
            Polynomial den = Polynomial::constant(1.0);
            for (std::size_t k : active) den = den * Polynomial{-prf.poles[k], 1.0};
            Polynomial num = den * prf.constant(i, j);
            for (std::size_t k : active) {
                Polynomial term = Polynomial::constant(prf.residues[k](i, j));
                for (std::size_t o : active)
                    if (o != k) term = term * Polynomial{-prf.poles[o], 1.0};
                num = num + term;
            }
            out.set(i, j, rat_reduce(num, den, tol_root));
        }
    return out;
}

inline ComplexMatrix rmat_eval(const RationalMatrix& m, Complex s0) {
    ComplexMatrix out(m.rows(), m.cols());
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) {
            const RationalFunction& f = m(i, j);
            const Complex d = f.den()(s0);
            if (std::abs(d) <= 1e-14 * f.den().eval_scale(s0))
                throw Error(ErrorKind::EvaluationAtPole, "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                                             ") has a pole at the evaluation point");
            out(i, j) = f.num()(s0) / d;
        }
    return out;
}

/// Deterministic off-pole sample points sigma + k, k = 1..count, with
/// sigma = 1 + (largest pole modulus over the given matrices).
inline std::vector<double> sample_points(std::initializer_list<const RationalMatrix*> ms, int count) {
    double r = 0.0;
    for (const RationalMatrix* m : ms) r = std::max(r, detail::max_root_modulus(*m));
    std::vector<double> pts;
    for (int k = 1; k <= count; ++k) pts.push_back(1.0 + r + k);
    return pts;
}

/// Entrywise equality: coefficient cross-multiplication first, then agreement
/// at 16 deterministic sample points for entries that fail it.
inline bool rmat_equal(const RationalMatrix& a, const RationalMatrix& b, double tol_eval = Tolerances{}.eval) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorKind::ShapeMismatch, "rmat_equal shapes differ");
    std::vector<std::pair<Index, Index>> pending;
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) {
            const RationalFunction& x = a(i, j);
            const RationalFunction& y = b(i, j);
            if (x.is_zero() && y.is_zero()) continue;
            const Polynomial l = x.num() * y.den();
            const Polynomial r = y.num() * x.den();
            const double scale = std::max(l.max_abs(), r.max_abs());
            if ((l - r).max_abs() > tol_eval * scale) pending.emplace_back(i, j);
        }
    if (pending.empty()) return true;
    for (double s : sample_points({&a, &b}, 16)) {
        double big = 0.0;
        Matrix va(a.rows(), a.cols());
        Matrix vb(b.rows(), b.cols());
        for (auto [i, j] : pending) {
            va(i, j) = a(i, j)(s);
            vb(i, j) = b(i, j)(s);
        }
        for (Index i = 0; i < a.rows(); ++i)
            for (Index j = 0; j < a.cols(); ++j) big = std::max({big, std::abs(a(i, j)(s)), std::abs(b(i, j)(s))});
        for (auto [i, j] : pending)
            if (std::abs(va(i, j) - vb(i, j)) > tol_eval * big) return false;
    }
    return true;
}

}  // namespace dsfmin
