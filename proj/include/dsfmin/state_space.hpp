#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsfmin/error.hpp"
#include "dsfmin/polynomial.hpp"
#include "dsfmin/rational.hpp"
#include "dsfmin/rational_matrix.hpp"
#include "dsfmin/tolerances.hpp"

namespace dsfmin {

/// Continuous-time model  x' = A x + B u,  y = C x + D u.
struct StateSpace {
    Matrix A, B, C, D;

    StateSpace() = default;
    StateSpace(Matrix a, Matrix b, Matrix c, Matrix d) : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
        validate();
    }
    StateSpace(Matrix a, Matrix b, Matrix c) : A(std::move(a)), B(std::move(b)), C(std::move(c)) {
        D = Matrix::Zero(C.rows(), B.cols());
        validate();
    }

    Index order() const { return A.rows(); }
    Index inputs() const { return B.cols(); }
    Index outputs() const { return C.rows(); }

   private:
    // A static gain (order 0) is allowed; everything else must line up.
    void validate() const {
        const Index n = A.rows();
        if (A.cols() != n || B.rows() != n || C.cols() != n || D.rows() != C.rows() || D.cols() != B.cols())
            throw Error(ErrorKind::ShapeMismatch, "state-space matrices have incompatible shapes");
        if (B.cols() < 1 || C.rows() < 1) throw Error(ErrorKind::ShapeMismatch, "a model needs at least one input and one output");
    }
};

/// Model in output normal form: the first p states are measured, the output
/// map is [I_p 0], and the remaining h states are hidden.
struct PartitionedRealization {
    Matrix A11, A12, A21, A22, B1, B2;

    Index p() const { return A11.rows(); }
    Index h() const { return A22.rows(); }
    Index m() const { return B1.cols(); }
    Index order() const { return p() + h(); }

    static PartitionedRealization from_blocks(Matrix a, Matrix b, Index p) {
        const Index n = a.rows();
        if (a.cols() != n || b.rows() != n || p < 1 || p > n)
            throw Error(ErrorKind::ShapeMismatch, "cannot partition a " + std::to_string(n) + "-state model at p=" + std::to_string(p));
        const Index h = n - p;
        return {a.topLeftCorner(p, p), a.topRightCorner(p, h), a.bottomLeftCorner(h, p), a.bottomRightCorner(h, h),
                b.topRows(p), b.bottomRows(h)};
    }

    Matrix A() const {
        Matrix a(order(), order());
        a << A11, A12, A21, A22;
        return a;
    }
    Matrix B() const {
        Matrix b(order(), m());
        b << B1, B2;
        return b;
    }
    Matrix C() const {
        Matrix c = Matrix::Zero(p(), order());
        c.leftCols(p()).setIdentity();
        return c;
    }
    StateSpace assemble() const { return StateSpace(A(), B(), C()); }

    void validate() const {
        const Index P = A11.rows(), H = A22.rows(), M = B1.cols();
        if (A11.cols() != P || A12.rows() != P || A12.cols() != H || A21.rows() != H || A21.cols() != P || A22.cols() != H ||
            B1.rows() != P || B2.rows() != H || B2.cols() != M)
            throw Error(ErrorKind::ShapeMismatch, "partition blocks have inconsistent shapes");
        if (P < 1 || M < 1) throw Error(ErrorKind::ShapeMismatch, "need p >= 1 measured states and m >= 1 inputs");
    }
};

/// Faddeev-LeVerrier expansion of the resolvent:
///   (sI - A)^{-1} = sum_k s^{n-1-k} adj_coeffs[k] / charpoly(s).
struct ResolventExpansion {
    Polynomial charpoly;
    std::vector<Matrix> adj_coeffs;
};

inline ResolventExpansion resolvent_expansion(const Matrix& a) {
    const Index n = a.rows();
    ResolventExpansion out;
    std::vector<double> chi(static_cast<std::size_t>(n) + 1, 0.0);
    chi[static_cast<std::size_t>(n)] = 1.0;
    Matrix nk = Matrix::Identity(n, n);
    for (Index k = 1; k <= n; ++k) {
        out.adj_coeffs.push_back(nk);
        const Matrix an = a * nk;
        const double ck = -an.trace() / static_cast<double>(k);
        chi[static_cast<std::size_t>(n - k)] = ck;
        nk = an + ck * Matrix::Identity(n, n);
    }
    out.charpoly = Polynomial(std::move(chi));
    return out;
}

/// Polynomial matrix  left * adj(sI - A) * right  as row-major polynomials.
inline std::vector<Polynomial> adjugate_sandwich(const ResolventExpansion& re, const Matrix& left, const Matrix& right) {
    const auto n = static_cast<std::size_t>(re.adj_coeffs.size());
    std::vector<Matrix> terms;
    terms.reserve(n);
    for (const Matrix& nk : re.adj_coeffs) terms.push_back(left * nk * right);
    std::vector<Polynomial> out;
    out.reserve(static_cast<std::size_t>(left.rows() * right.cols()));
    for (Index i = 0; i < left.rows(); ++i)
        for (Index j = 0; j < right.cols(); ++j) {
            std::vector<double> c(n, 0.0);
            for (std::size_t k = 0; k < n; ++k) c[n - 1 - k] = terms[k](i, j);
            out.emplace_back(std::move(c));
        }
    return out;
}

namespace detail {

/// Orthonormal basis of span{B, AB, A^2 B, ...}, grown one block at a time
/// with re-orthogonalization. Directions whose residual falls below
/// tol_rank times the block scale are treated as unreachable.
inline Matrix krylov_basis(const Matrix& a, const Matrix& b, double tol_rank) {
    const Index n = a.rows();
    Matrix basis(n, 0);
    if (n == 0 || b.cols() == 0) return basis;
    const double a_scale = a.norm();
    Matrix block = b;
    double scale = b.norm();
    while (basis.cols() < n && scale > 0.0) {
        for (int pass = 0; pass < 2; ++pass) block -= basis * (basis.transpose() * block);
        const Eigen::JacobiSVD<Matrix> svd(block, Eigen::ComputeThinU);
        Index r = 0;
        for (Index k = 0; k < svd.singularValues().size(); ++k)
            if (svd.singularValues()(k) > tol_rank * scale) ++r;
        r = std::min(r, n - basis.cols());
        if (r == 0) break;
        const Matrix fresh = svd.matrixU().leftCols(r);
        basis.conservativeResize(n, basis.cols() + r);
        basis.rightCols(r) = fresh;
        block = a * fresh;
        scale = a_scale;
    }
    return basis;
}

}  // namespace detail

/// Controllable then observable part, by orthogonal projection onto Krylov
/// subspaces. Same transfer function, no uncontrollable or unobservable modes.
inline StateSpace minimal_realization(const StateSpace& ss, const Tolerances& tol = {}) {
    const Matrix vc = detail::krylov_basis(ss.A, ss.B, tol.rank);
    const Matrix ac = vc.transpose() * ss.A * vc;
    const Matrix bc = vc.transpose() * ss.B;
    const Matrix cc = ss.C * vc;
    const Matrix vo = detail::krylov_basis(ac.transpose(), cc.transpose(), tol.rank);
    return StateSpace(vo.transpose() * ac * vo, vo.transpose() * bc, cc * vo, ss.D);
}

/// G(s) = C (sI - A)^{-1} B + D, one entry at a time on the minimal part of
/// each single-input single-output channel, so no pole-zero pair has to be
/// cancelled numerically.
inline RationalMatrix transfer_function(const StateSpace& ss, const Tolerances& tol = {}) {
    RationalMatrix g(ss.outputs(), ss.inputs());
    for (Index i = 0; i < g.rows(); ++i)
        for (Index j = 0; j < g.cols(); ++j) {
            const StateSpace siso = minimal_realization(
                StateSpace(ss.A, ss.B.col(j), ss.C.row(i), ss.D.block(i, j, 1, 1)), tol);
            const ResolventExpansion re = resolvent_expansion(siso.A);
            Polynomial num = re.charpoly * siso.D(0, 0);
            if (siso.order() > 0) num = num + adjugate_sandwich(re, siso.C, siso.B).front();
            g.set(i, j, rat_reduce(num, re.charpoly, tol.root));
        }
    return g;
}

/// Similarity transform T = [C; N] bringing the output map to [I_p 0]. N spans
/// the orthogonal complement of the rows of C; a C that merely selects states
/// gets the matching permutation.
inline PartitionedRealization output_normal_form(const StateSpace& ss, const Tolerances& tol = {}) {
    const Index n = ss.order();
    const Index p = ss.outputs();
    if (!ss.D.isZero(0.0)) throw Error(ErrorKind::ShapeMismatch, "output normal form requires D = 0");
    if (p > n) throw Error(ErrorKind::RankDeficientC, "more outputs than states");
    Matrix ident = Matrix::Zero(p, n);
    ident.leftCols(p).setIdentity();
    if (ss.C == ident) return PartitionedRealization::from_blocks(ss.A, ss.B, p);

    Eigen::ColPivHouseholderQR<Matrix> qr(ss.C.transpose());
    qr.setThreshold(tol.rank);
    if (qr.rank() < p)
        throw Error(ErrorKind::RankDeficientC, "rank(C) = " + std::to_string(qr.rank()) + " < p = " + std::to_string(p));

    Matrix t(n, n);
    t.topRows(p) = ss.C;
    std::vector<Index> selected;
    bool selection = true;
    for (Index i = 0; i < p && selection; ++i) {
        Index hit = -1;
        for (Index j = 0; j < n; ++j) {
            if (ss.C(i, j) == 1.0 && hit < 0)
                hit = j;
            else if (ss.C(i, j) != 0.0)
                selection = false;
        }
        if (hit < 0 || std::find(selected.begin(), selected.end(), hit) != selected.end()) selection = false;
        selected.push_back(hit);
    }
    if (selection) {
        Index row = p;
        for (Index j = 0; j < n; ++j)
            if (std::find(selected.begin(), selected.end(), j) == selected.end()) {
                t.row(row).setZero();
                t(row++, j) = 1.0;
            }
    } else {
        const Matrix q = qr.householderQ();
        t.bottomRows(n - p) = q.rightCols(n - p).transpose();
    }
    const Eigen::PartialPivLU<Matrix> lu(t);
    const Matrix a = t * ss.A * lu.inverse();
    const Matrix b = t * ss.B;
    return PartitionedRealization::from_blocks(a, b, p);
}

/// Rank of a real matrix judged against tol_rank * sigma_max.
template <typename Derived>
Index numerical_rank(const Eigen::MatrixBase<Derived>& m, double tol_rank) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<typename Derived::PlainObject> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    Index r = 0;
    for (Index k = 0; k < sv.size(); ++k)
        if (sv(k) > tol_rank * sv(0)) ++r;
    return r;
}

/// K = E F with E holding left singular vectors scaled by their singular values.
/// Each column of E is signed so that its largest-magnitude entry has the sign
/// of the dominant entry of K (largest entry of K's largest-norm column).
struct RankFactors {
    Matrix E;  ///< rows(K) x r
    Matrix F;  ///< r x cols(K)
};

inline RankFactors rank_factorize(const Matrix& k, double tol_rank) {
    Eigen::JacobiSVD<Matrix> svd(k, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    Index r = 0;
    if (sv.size() > 0 && sv(0) > 0.0)
        for (Index i = 0; i < sv.size(); ++i)
            if (sv(i) > tol_rank * sv(0)) ++r;
    Matrix e = svd.matrixU().leftCols(r) * sv.head(r).asDiagonal();

    Index dom_col = 0;
    k.colwise().norm().maxCoeff(&dom_col);
    Index dom_row = 0;
    k.col(dom_col).cwiseAbs().maxCoeff(&dom_row);
    const bool want_negative = k(dom_row, dom_col) < 0.0;
    for (Index c = 0; c < r; ++c) {
        Index big = 0;
        e.col(c).cwiseAbs().maxCoeff(&big);
        if ((e(big, c) < 0.0) != want_negative) e.col(c) = -e.col(c);
    }
    Matrix f = (e.transpose() * e).ldlt().solve(e.transpose() * k);
    return {e, f};
}

/// Minimal realization built from the rank factorizations of the residues.
inline StateSpace gilbert_realization(const RationalMatrix& m, const Tolerances& tol = {}) {
    const PoleResidueForm prf = to_pole_residue(m, tol);
    std::vector<double> diag;
    std::vector<Matrix> es, fs;
    for (std::size_t i = 0; i < prf.poles.size(); ++i) {
        RankFactors rf = rank_factorize(prf.residues[i], tol.rank);
        for (Index c = 0; c < rf.E.cols(); ++c) diag.push_back(prf.poles[i]);
        es.push_back(std::move(rf.E));
        fs.push_back(std::move(rf.F));
    }
    const auto n = static_cast<Index>(diag.size());
    Matrix a = Matrix::Zero(n, n), b(n, m.cols()), c(m.rows(), n);
    Index at = 0;
    for (std::size_t i = 0; i < es.size(); ++i) {
        const Index r = es[i].cols();
        for (Index k = 0; k < r; ++k) a(at + k, at + k) = diag[static_cast<std::size_t>(at + k)];
        c.middleCols(at, r) = es[i];
        b.middleRows(at, r) = fs[i];
        at += r;
    }
    return StateSpace(a, b, c, prf.constant);
}

namespace detail {

inline RationalMatrix inverse_by_adjugate(const RationalMatrix& m, const Tolerances& tol) {
    const int n = static_cast<int>(m.rows());
    PolynomialForm pf = common_denominator(m, tol.pole);
    const Polynomial det = poly_det(pf.nums, n).chopped(kChopRel);
    if (det.is_zero() || det.max_abs() <= kZeroRel * pf.common.max_abs())
        throw Error(ErrorKind::SingularRationalMatrix, "determinant is identically zero");
    RationalMatrix out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Polynomial cof = poly_minor(pf.nums, n, j, i);
            if ((i + j) % 2 == 1) cof = -cof;
            out.set(i, j, rat_reduce(pf.common * cof, det, tol.root));
        }
    return out;
}

}  // namespace detail

/// Inverse of a square rational matrix. Proper matrices with simple real
/// poles and an invertible value at infinity are inverted on a minimal
/// realization, which avoids cancelling high-multiplicity factors in a
/// determinant; anything else goes through the adjugate.
inline RationalMatrix rmat_inverse(const RationalMatrix& m, const Tolerances& tol = {}) {
    if (m.rows() != m.cols()) throw Error(ErrorKind::ShapeMismatch, "only square rational matrices can be inverted");
    std::optional<StateSpace> ss;
    try {
        ss = gilbert_realization(m, tol);
    } catch (const Error&) {
    }
    if (ss) {
        const Eigen::FullPivLU<Matrix> lu(ss->D);
        if (lu.isInvertible() && lu.rcond() > tol.rank) {
            const Matrix dinv = lu.inverse();
            const StateSpace inv(ss->A - ss->B * dinv * ss->C, ss->B * dinv, -dinv * ss->C, dinv);
            return transfer_function(inv, tol);
        }
    }
    return detail::inverse_by_adjugate(m, tol);
}

inline int mcmillan_degree(const RationalMatrix& m, const Tolerances& tol = {}) {
    const PoleResidueForm prf = to_pole_residue(m, tol);
    int deg = 0;
    for (const Matrix& k : prf.residues) deg += static_cast<int>(numerical_rank(k, tol.rank));
    return deg;
}

/// Normal rank estimated as the largest evaluation rank over 8 sample points.
inline Index normal_rank(const RationalMatrix& g, double tol_rank = Tolerances{}.rank) {
    Index best = 0;
    for (double s : sample_points({&g}, 8)) best = std::max(best, numerical_rank(rmat_eval(g, Complex(s, 0.0)), tol_rank));
    return best;
}

/// True iff the Rosenbrock matrix [[A - s0 I, B], [C, D]] drops below
/// n + normal rank of the transfer function.
inline bool is_invariant_zero(const StateSpace& ss, Complex s0, double tol_rank = Tolerances{}.rank) {
    const Index n = ss.order();
    const Index nr = normal_rank(transfer_function(ss), tol_rank);
    ComplexMatrix ros(n + ss.outputs(), n + ss.inputs());
    ros.topLeftCorner(n, n) = ss.A.cast<Complex>() - s0 * ComplexMatrix::Identity(n, n);
    ros.topRightCorner(n, ss.inputs()) = ss.B.cast<Complex>();
    ros.bottomLeftCorner(ss.outputs(), n) = ss.C.cast<Complex>();
    ros.bottomRightCorner(ss.outputs(), ss.inputs()) = ss.D.cast<Complex>();
    return numerical_rank(ros, tol_rank) < n + nr;
}

}  // namespace dsfmin
