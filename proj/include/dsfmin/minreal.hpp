#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "dsfmin/clique.hpp"
#include "dsfmin/dsf.hpp"
#include "dsfmin/error.hpp"
#include "dsfmin/rational_matrix.hpp"
#include "dsfmin/state_space.hpp"
#include "dsfmin/tolerances.hpp"

namespace dsfmin {

/// How the working matrix (s - a)[Q P] picks a. Auto uses a = 0 unless some
/// pole sits at the origin, in which case a = 1 + max |pole|.
struct ShiftSetting {
    bool automatic = true;
    double value = 0.0;

    static ShiftSetting auto_shift() { return {}; }
    static ShiftSetting fixed(double a) { return {false, a}; }
};

struct MinrealOptions {
    Tolerances tol;
    EdgeRule rule = EdgeRule::SupportDisjoint;
    double free_value = -1.0;
    bool enumerate_all = false;
    ShiftSetting shift;
};

/// Per-pole rank-one factors of the residues of (s - a)[Q P].
struct GilbertData {
    std::vector<double> poles;  ///< distinct, descending
    std::vector<Vector> E;      ///< length p, entries below the support threshold are exactly 0
    std::vector<Vector> F;      ///< length p + m
    Matrix D1;                  ///< value of (s - a)[Q P] at infinity
    double shift = 0.0;

    std::size_t l() const { return poles.size(); }
    Index p() const { return D1.rows(); }
    Index m() const { return D1.cols() - D1.rows(); }
};

/// Constant diagonal design matrix. Entries pinned by a cancelled pole are
/// Fixed; the rest are Free and take `free_value` when materialized.
struct RStar {
    std::vector<std::optional<double>> entries;
    double free_value = -1.0;

    Vector values() const {
        Vector v(static_cast<Index>(entries.size()));
        for (std::size_t j = 0; j < entries.size(); ++j) v(static_cast<Index>(j)) = entries[j].value_or(free_value);
        return v;
    }

    /// diag{a,-1,-1} style, with "a" marking free entries.
    std::string notation() const {
        std::string s = "diag{";
        for (std::size_t j = 0; j < entries.size(); ++j) {
            if (j) s += ",";
            s += entries[j] ? fmt::format("{:.10g}", *entries[j]) : std::string("a");
        }
        return s + "}";
    }

    friend bool operator==(const RStar&, const RStar&) = default;
};

namespace detail {

inline bool in_support(const Vector& e, Index k, double tol_orth) {
    return std::abs(e(k)) > tol_orth * e.cwiseAbs().maxCoeff();
}

inline double shift_for(const std::vector<double>& poles, const ShiftSetting& s, double tol_pole) {
    if (s.automatic) {
        double big = 0.0;
        bool at_origin = false;
        for (double p : poles) {
            big = std::max(big, std::abs(p));
            at_origin = at_origin || std::abs(p) < tol_pole;
        }
        return at_origin ? 1.0 + big : 0.0;
    }
    for (double p : poles) {
        if (std::abs(p - s.value) > tol_pole) continue;
        if (s.value == 0.0)
            throw Error(ErrorKind::PoleAtZeroWithoutShift, "[Q P] has a pole at 0; use an automatic or nonzero shift");
        throw Error(ErrorKind::InvalidShift, fmt::format("shift {} coincides with a pole of [Q P]", s.value));
    }
    return s.value;
}

/// Diagonal of N(pole) = (pole I - R*) / (pole - a).
inline Vector cancellation_factor(double pole, double shift, const Vector& r) {
    if (pole - shift == 0.0)
        throw Error(ErrorKind::PoleAtZeroWithoutShift, fmt::format("pole {} equals the shift {}; N cannot be evaluated", pole, shift));
    return (Vector::Constant(r.size(), pole) - r) / (pole - shift);
}

}  // namespace detail

inline GilbertData extract_modes(const Dsf& d, const Tolerances& tol = {}, ShiftSetting shift = {}) {
    const RationalMatrix qp = d.qp();
    const std::vector<double> poles = rmat_poles(qp, tol.pole);
    GilbertData g;
    g.shift = detail::shift_for(poles, shift, tol.pole);
    const PoleResidueForm prf = to_pole_residue(qp.times(Polynomial{-g.shift, 1.0}, tol.root), tol);
    g.poles = prf.poles;
    g.D1 = prf.constant;
    for (std::size_t i = 0; i < prf.poles.size(); ++i) {
        const Matrix& k = prf.residues[i];
        const Index rank = numerical_rank(k, tol.rank);
        if (rank > 1)
            throw Error(ErrorKind::ResidueRankExceedsOne,
                        fmt::format("residue at pole {} has rank {}; only rank-one residues are supported (the "
                                    "relaxation to higher-rank residues is not implemented)",
                                    prf.poles[i], rank));
        const RankFactors rf = rank_factorize(k, tol.rank);
        Vector e = rf.E.col(0);
        const double cut = tol.orth * e.cwiseAbs().maxCoeff();
        for (Index j = 0; j < e.size(); ++j)
            if (std::abs(e(j)) <= cut) e(j) = 0.0;
        g.F.push_back((k.transpose() * e) / e.squaredNorm());
        g.E.push_back(std::move(e));
    }
    return g;
}

inline GilbertData extract_modes(const Dsf& d, const MinrealOptions& opt) { return extract_modes(d, opt.tol, opt.shift); }

inline CompatGraph compatibility_graph(const GilbertData& g, EdgeRule rule = EdgeRule::SupportDisjoint,
                                       double tol_orth = Tolerances{}.orth) {
    CompatGraph cg(g.l(), rule);
    for (std::size_t i = 0; i < g.l(); ++i)
        for (std::size_t j = i + 1; j < g.l(); ++j) {
            const Vector& a = g.E[i];
            const Vector& b = g.E[j];
            bool edge = true;
            if (rule == EdgeRule::Orthogonal) {
                edge = std::abs(a.dot(b)) <= tol_orth * a.norm() * b.norm();
            } else {
                for (Index k = 0; k < a.size() && edge; ++k)
                    edge = !(detail::in_support(a, k, tol_orth) && detail::in_support(b, k, tol_orth));
            }
            if (edge) cg.add_edge(i, j);
        }
    return cg;
}

/// Pins R*[j] = pole_i for every j in the support of E_i, i in the clique.
inline RStar construct_rstar(const GilbertData& g, const std::vector<std::size_t>& clique, double free_value = -1.0,
                             double tol_orth = Tolerances{}.orth) {
    RStar r;
    r.entries.assign(static_cast<std::size_t>(g.p()), std::nullopt);
    r.free_value = free_value;
    for (std::size_t i : clique) {
        for (Index j = 0; j < g.p(); ++j) {
            if (!detail::in_support(g.E[i], j, tol_orth)) continue;
            auto& slot = r.entries[static_cast<std::size_t>(j)];
            if (slot && *slot != g.poles[i])
                throw Error(ErrorKind::ConflictingAssignment,
                            fmt::format("R*[{},{}] would need both {} and {}; use the support-disjoint edge rule", j + 1, j + 1,
                                        *slot, g.poles[i]));
            slot = g.poles[i];
        }
    }
    return r;
}

/// flag i is set iff N(pole_i) E_i vanishes, i.e. pole i leaves the realization.
inline std::vector<bool> cancellation_check(const GilbertData& g, const RStar& r, double tol = Tolerances{}.orth) {
    const Vector rv = r.values();
    std::vector<bool> flags;
    for (std::size_t i = 0; i < g.l(); ++i) {
        const Vector v = detail::cancellation_factor(g.poles[i], g.shift, rv).cwiseProduct(g.E[i]);
        flags.push_back(v.cwiseAbs().maxCoeff() <= tol * g.E[i].cwiseAbs().maxCoeff());
    }
    return flags;
}

enum class ModeRetention { DropCancelled, KeepAll };

/// Realization of [W V] = (sI - R*)[Q P] + [R* 0]:
/// A11 = offdiag(lim sQ) + R*, B1 = lim sP, one hidden state per surviving pole
/// with A12 column N(pole)E, and [A21 B2] row F.
inline PartitionedRealization realize(const Dsf& d, const GilbertData& g, const RStar& r, const Tolerances& tol = {},
                                      ModeRetention keep = ModeRetention::DropCancelled) {
    const Index p = d.p(), m = d.m();
    if (static_cast<Index>(r.entries.size()) != p) throw Error(ErrorKind::ShapeMismatch, "R* size differs from p");
    const Vector rv = r.values();
    const StructureLimits lim = structure_limits(d);
    const std::vector<bool> cancelled = cancellation_check(g, r, tol.orth);
    std::vector<std::size_t> keep_idx;
    for (std::size_t i = 0; i < g.l(); ++i)
        if (keep == ModeRetention::KeepAll || !cancelled[i]) keep_idx.push_back(i);
    const auto h = static_cast<Index>(keep_idx.size());

    PartitionedRealization out;
    out.A11 = lim.A11_offdiag;
    out.A11.diagonal() = rv;
    out.B1 = lim.B1;
    out.A12 = Matrix::Zero(p, h);
    out.A21 = Matrix::Zero(h, p);
    out.A22 = Matrix::Zero(h, h);
    out.B2 = Matrix::Zero(h, m);
    for (Index k = 0; k < h; ++k) {
        const std::size_t i = keep_idx[static_cast<std::size_t>(k)];
        out.A22(k, k) = g.poles[i];
        out.A12.col(k) = detail::cancellation_factor(g.poles[i], g.shift, rv).cwiseProduct(g.E[i]);
        out.A21.row(k) = g.F[i].head(p).transpose();
        out.B2.row(k) = g.F[i].tail(m).transpose();
    }
    return out;
}

inline PartitionedRealization realize(const Dsf& d, const RStar& r, const MinrealOptions& opt = {}) {
    return realize(d, extract_modes(d, opt), r, opt.tol);
}

struct MinimalOrder {
    std::size_t l = 0;
    std::size_t phi = 0;
    Index order = 0;   ///< p + l - phi
    Index hidden = 0;  ///< l - phi
};

inline MinimalOrder minimal_order(const Dsf& d, const MinrealOptions& opt = {}) {
    const GilbertData g = extract_modes(d, opt);
    const CliqueResult cr = maximum_cliques(compatibility_graph(g, opt.rule, opt.tol.orth));
    MinimalOrder mo{g.l(), cr.phi, 0, 0};
    mo.hidden = static_cast<Index>(g.l() - cr.phi);
    mo.order = d.p() + mo.hidden;
    return mo;
}

/// Invariant-zero point test at a cancelled pole, run on the realization that
/// still carries every mode: once for the V-subsystem (A22, B2, A12, B1) and
/// once for the whole system (A, B, [I 0]).
struct ZeroSharing {
    double pole = 0.0;
    bool v_zero = false;
    bool g_zero = false;
};

struct RealizationOutcome {
    std::vector<std::size_t> clique;
    RStar rstar;
    PartitionedRealization realization;
    std::vector<bool> cancelled;
    bool consistent = false;
    std::vector<ZeroSharing> zero_sharing;
};

struct PipelineResult {
    GilbertData modes;
    std::size_t edges = 0;
    std::vector<std::vector<std::size_t>> max_cliques;
    MinimalOrder minimal;
    std::optional<int> mcmillan_degree_G;
    std::string mcmillan_note;  ///< why the degree of G is missing, if it is
    std::vector<RealizationOutcome> outcomes;
};

inline std::vector<ZeroSharing> zero_sharing_checks(const Dsf& d, const GilbertData& g, const RStar& r,
                                                    const std::vector<bool>& cancelled, const Tolerances& tol) {
    std::vector<ZeroSharing> out;
    if (std::none_of(cancelled.begin(), cancelled.end(), [](bool b) { return b; })) return out;
    const PartitionedRealization full = realize(d, g, r, tol, ModeRetention::KeepAll);
    const StateSpace vsub(full.A22, full.B2, full.A12, full.B1);
    const StateSpace whole = full.assemble();
    for (std::size_t i = 0; i < g.l(); ++i) {
        if (!cancelled[i]) continue;
        const Complex z(g.poles[i], 0.0);
        out.push_back({g.poles[i], is_invariant_zero(vsub, z, tol.rank), is_invariant_zero(whole, z, tol.rank)});
    }
    return out;
}

inline PipelineResult minreal_pipeline(const Dsf& d, const MinrealOptions& opt = {}) {
    PipelineResult res;
    res.modes = extract_modes(d, opt);
    const CompatGraph cg = compatibility_graph(res.modes, opt.rule, opt.tol.orth);
    res.edges = cg.edge_count();
    const CliqueResult cr = maximum_cliques(cg, opt.enumerate_all);
    res.max_cliques = cr.cliques;
    res.minimal = {res.modes.l(), cr.phi, 0, static_cast<Index>(res.modes.l() - cr.phi)};
    res.minimal.order = d.p() + res.minimal.hidden;
    try {
        res.mcmillan_degree_G = mcmillan_degree(dsf_to_transfer(d), opt.tol);
    } catch (const Error& e) {
        res.mcmillan_note = e.what();
    }
    std::vector<std::vector<std::size_t>> cliques = cr.cliques;
    if (cliques.empty()) cliques.emplace_back();  // l = 0: nothing to cancel
    for (const auto& clique : cliques) {
        RealizationOutcome o;
        o.clique = clique;
        o.rstar = construct_rstar(res.modes, clique, opt.free_value, opt.tol.orth);
        o.cancelled = cancellation_check(res.modes, o.rstar, opt.tol.orth);
        o.realization = realize(d, res.modes, o.rstar, opt.tol);
        o.consistent = consistency_check(o.realization, d, opt.tol.eval);
        o.zero_sharing = zero_sharing_checks(d, res.modes, o.rstar, o.cancelled, opt.tol);
        res.outcomes.push_back(std::move(o));
    }
    return res;
}

}  // namespace dsfmin
