#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dsfmin/error.hpp"
#include "dsfmin/rational_matrix.hpp"
#include "dsfmin/state_space.hpp"
#include "dsfmin/tolerances.hpp"

namespace dsfmin {

/// Dynamical structure function [Q, P]:  Y = Q Y + P U.
///
/// Construction enforces strict properness of every entry, a zero diagonal
/// of Q, and real simple poles in every entry.
class Dsf {
   public:
    static Dsf make(RationalMatrix q, RationalMatrix p, const Tolerances& tol = {}) {
        if (q.rows() != q.cols()) throw Error(ErrorKind::ShapeMismatch, "Q must be square");
        if (p.rows() != q.rows()) throw Error(ErrorKind::ShapeMismatch, "Q and P must have the same number of rows");
        if (q.rows() < 1 || p.cols() < 1) throw Error(ErrorKind::ShapeMismatch, "need p >= 1 and m >= 1");
        auto where = [](const char* name, Index i, Index j) {
            return std::string(name) + "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
        };
        for (Index i = 0; i < q.rows(); ++i)
            if (!q(i, i).is_zero()) throw Error(ErrorKind::InvalidDsf, where("Q", i, i) + " is not zero");
        auto check = [&](const RationalMatrix& m, const char* name) {
            for (Index i = 0; i < m.rows(); ++i)
                for (Index j = 0; j < m.cols(); ++j) {
                    if (m(i, j).properness() != Properness::StrictlyProper)
                        throw Error(ErrorKind::InvalidDsf, where(name, i, j) + " is not strictly proper");
                    for (const RealRoot& r : detail::real_denominator_roots(m(i, j).den(), i, j))
                        if (r.multiplicity > 1)
                            throw Error(ErrorKind::RepeatedPole, where(name, i, j) + " has a repeated pole at " + std::to_string(r.value));
                }
        };
        check(q, "Q");
        check(p, "P");
        Dsf d;
        d.q_ = std::move(q);
        d.p_ = std::move(p);
        d.tol_ = tol;
        rmat_poles(d.qp(), tol.pole);  // reports every complex-pole entry at once
        return d;
    }

    const RationalMatrix& Q() const { return q_; }
    const RationalMatrix& P() const { return p_; }
    RationalMatrix qp() const { return hstack(q_, p_); }
    Index p() const { return q_.rows(); }
    Index m() const { return p_.cols(); }
    const Tolerances& tolerances() const { return tol_; }

   private:
    Dsf() = default;
    RationalMatrix q_, p_;
    Tolerances tol_;
};

/// A11 - diag(A11) and B1 recovered from the DSF's behaviour at infinity.
struct StructureLimits {
    Matrix A11_offdiag;
    Matrix B1;
};

/// Boolean network: q_adj(i,j) iff Q_ij is not identically zero, same for P.
struct BooleanStructure {
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> q_adj;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> p_adj;
};

struct WV {
    RationalMatrix W;
    RationalMatrix V;
};

namespace detail {

struct WvNumerators {
    Polynomial chi;               ///< det(sI - A22)
    std::vector<Polynomial> w;    ///< p x p, W = w / chi
    std::vector<Polynomial> v;    ///< p x m, V = v / chi
};

inline WvNumerators wv_numerators(const PartitionedRealization& part) {
    part.validate();
    const ResolventExpansion re = resolvent_expansion(part.A22);
    WvNumerators out;
    out.chi = re.charpoly;
    const Index p = part.p(), m = part.m();
    std::vector<Polynomial> aw, av;
    if (part.h() > 0) {
        aw = adjugate_sandwich(re, part.A12, part.A21);
        av = adjugate_sandwich(re, part.A12, part.B2);
    }
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) {
            Polynomial w = out.chi * part.A11(i, j);
            if (!aw.empty()) w = w + aw[static_cast<std::size_t>(i * p + j)];
            out.w.push_back(w);
        }
        for (Index j = 0; j < m; ++j) {
            Polynomial v = out.chi * part.B1(i, j);
            if (!av.empty()) v = v + av[static_cast<std::size_t>(i * m + j)];
            out.v.push_back(v);
        }
    }
    return out;
}

struct RawQp {
    RationalMatrix Q, P;
};

/// Q and P from a partitioned realization without enforcing the DSF
/// invariants. Row i shares the denominator s*chi - w_ii.
inline RawQp compute_qp(const PartitionedRealization& part, const Tolerances& tol) {
    const WvNumerators wv = wv_numerators(part);
    const Index p = part.p(), m = part.m();
    RawQp out{RationalMatrix(p, p), RationalMatrix(p, m)};
    for (Index i = 0; i < p; ++i) {
        const Polynomial den = wv.chi.shifted_up() - wv.w[static_cast<std::size_t>(i * p + i)];
        for (Index j = 0; j < p; ++j)
            if (j != i) out.Q.set(i, j, rat_reduce(wv.w[static_cast<std::size_t>(i * p + j)], den, tol.root));
        for (Index j = 0; j < m; ++j) out.P.set(i, j, rat_reduce(wv.v[static_cast<std::size_t>(i * m + j)], den, tol.root));
    }
    return out;
}

}  // namespace detail

/// W = A11 + A12 (sI - A22)^{-1} A21 and V = B1 + A12 (sI - A22)^{-1} B2.
inline WV compute_wv(const PartitionedRealization& part, const Tolerances& tol = {}) {
    const detail::WvNumerators wv = detail::wv_numerators(part);
    const Index p = part.p(), m = part.m();
    WV out{RationalMatrix(p, p), RationalMatrix(p, m)};
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) out.W.set(i, j, rat_reduce(wv.w[static_cast<std::size_t>(i * p + j)], wv.chi, tol.root));
        for (Index j = 0; j < m; ++j) out.V.set(i, j, rat_reduce(wv.v[static_cast<std::size_t>(i * m + j)], wv.chi, tol.root));
    }
    return out;
}

/// Q = (sI - R)^{-1}(W - R), P = (sI - R)^{-1} V with R = diag(W).
inline Dsf compute_dsf(const PartitionedRealization& part, const Tolerances& tol = {}) {
    detail::RawQp raw = detail::compute_qp(part, tol);
    return Dsf::make(std::move(raw.Q), std::move(raw.P), tol);
}

/// G = (I - Q)^{-1} P. With [Q P] = C (sI - L)^{-1} [Bq Bp] from a minimal
/// realization, G = C (sI - L - Bq C)^{-1} Bp. det(I - Q) tends to 1 at
/// infinity because Q is strictly proper, so I - Q is never singular.
inline RationalMatrix dsf_to_transfer(const Dsf& d) {
    const Tolerances& tol = d.tolerances();
    const StateSpace qp = gilbert_realization(d.qp(), tol);
    const Matrix bq = qp.B.leftCols(d.p());
    const StateSpace closed(qp.A + bq * qp.C, qp.B.rightCols(d.m()), qp.C);
    return transfer_function(closed, tol);
}

inline StructureLimits structure_limits(const RationalMatrix& q, const RationalMatrix& p) {
    StructureLimits out{limit_at_infinity(q.times_s()), limit_at_infinity(p.times_s())};
    out.A11_offdiag.diagonal().setZero();
    return out;
}

inline StructureLimits structure_limits(const Dsf& d) { return structure_limits(d.Q(), d.P()); }

inline BooleanStructure boolean_structure(const Dsf& d, double tol_struct = Tolerances{}.structure) {
    double scale = 0.0;
    for (const RationalMatrix* m : {&d.Q(), &d.P()})
        for (Index i = 0; i < m->rows(); ++i)
            for (Index j = 0; j < m->cols(); ++j) scale = std::max(scale, (*m)(i, j).num().max_abs());
    const double cut = tol_struct * scale;
    BooleanStructure out{decltype(BooleanStructure::q_adj)::Constant(d.p(), d.p(), false),
                         decltype(BooleanStructure::p_adj)::Constant(d.p(), d.m(), false)};
    for (Index i = 0; i < d.p(); ++i) {
        for (Index j = 0; j < d.p(); ++j) out.q_adj(i, j) = i != j && d.Q()(i, j).num().max_abs() > cut;
        for (Index j = 0; j < d.m(); ++j) out.p_adj(i, j) = d.P()(i, j).num().max_abs() > cut;
    }
    return out;
}

/// True iff the realization reproduces [Q, P] through W and V.
inline bool consistency_check(const PartitionedRealization& part, const Dsf& d, double tol_eval = Tolerances{}.eval) {
    if (part.p() != d.p() || part.m() != d.m())
        throw Error(ErrorKind::ShapeMismatch, "realization has p=" + std::to_string(part.p()) + ", m=" + std::to_string(part.m()) +
                                                  " but the DSF has p=" + std::to_string(d.p()) + ", m=" + std::to_string(d.m()));
    const detail::RawQp raw = detail::compute_qp(part, d.tolerances());
    return rmat_equal(raw.Q, d.Q(), tol_eval) && rmat_equal(raw.P, d.P(), tol_eval);
}

}  // namespace dsfmin
