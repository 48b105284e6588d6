// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "dsfmin/clique.hpp"
#include "dsfmin/dsf.hpp"
#include "dsfmin/minreal.hpp"
#include "dsfmin/state_space.hpp"
#include "test_systems.hpp"

using namespace dsfmin;
using dsfmin::fixtures::lag;

namespace {

// A criterion body returns an empty string on success, else what went wrong.
using Check = std::function<std::string()>;

int failures = 0;

void criterion(int number, const char* title, const Check& body) {
    std::string why;
    try {
        why = body();
    } catch (const std::exception& e) {
        why = std::string("exception: ") + e.what();
    }
    if (!why.empty()) ++failures;
    fmt::print("{} {:2d} {}{}\n", why.empty() ? "PASS" : "FAIL", number, title, why.empty() ? "" : " -- " + why);
}

std::vector<Dsf> random_dsfs(unsigned seed, int count) {
    std::mt19937 rng(seed);
    std::vector<Dsf> out;
    for (int k = 0; k < count; ++k)
        out.push_back(compute_dsf(fixtures::random_symmetric_partition(rng, 1 + k % 3, k % 3, 1 + k % 2)));
    return out;
}

MinrealOptions all_families() {
    MinrealOptions opt;
    opt.enumerate_all = true;
    return opt;
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Both invariant-zero tests at every cancelled pole, and neither at the
// midpoints between neighbouring poles.
std::string zero_point_tests(const Dsf& d, const PipelineResult& res) {
    const GilbertData& g = res.modes;
    for (const RealizationOutcome& o : res.outcomes) {
        if (o.zero_sharing.empty()) return "no cancelled poles for " + o.rstar.notation();
        for (const ZeroSharing& z : o.zero_sharing)
            if (!z.v_zero || !z.g_zero) return fmt::format("pole {} under {}: V {} G {}", z.pole, o.rstar.notation(), z.v_zero, z.g_zero);
        const PartitionedRealization full = realize(d, g, o.rstar, {}, ModeRetention::KeepAll);
        const StateSpace vsub(full.A22, full.B2, full.A12, full.B1);
        const StateSpace whole = full.assemble();
        for (std::size_t i = 0; i + 1 < g.l(); ++i) {
            const Complex mid(0.5 * (g.poles[i] + g.poles[i + 1]), 0.0);
            if (is_invariant_zero(vsub, mid) || is_invariant_zero(whole, mid))
                return fmt::format("control point {} reported as a zero under {}", mid.real(), o.rstar.notation());
        }
    }
    return {};
}

}  // namespace

int main() {
    const Dsf ex2 = fixtures::example2_dsf();
    const Dsf ex1 = compute_dsf(fixtures::example1_partition());

    criterion(1, "Example 2 transfer function has McMillan degree 4", [&]() -> std::string {
        const int deg = mcmillan_degree(dsf_to_transfer(ex2));
        return deg == 4 ? "" : fmt::format("degree {}", deg);
    });

    criterion(2, "Example 2 poles, D1 and residue directions", [&]() -> std::string {
        const GilbertData g = extract_modes(ex2);
        if (g.poles.size() != 4) return fmt::format("{} poles", g.poles.size());
        for (std::size_t i = 0; i < 4; ++i)
            if (std::abs(g.poles[i] + static_cast<double>(i + 1)) > 1e-12) return fmt::format("pole {} = {}", i, g.poles[i]);
        Matrix d1(3, 4);
        d1 << 0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0, 1;
        if (g.D1 != d1) return "D1 differs";
        const std::vector<Vector> directions{(Vector(3) << 0, -0.5, -0.5).finished(), (Vector(3) << -1, 0, -1).finished(),
                                             (Vector(3) << -1.5, -1.5, 0).finished(), (Vector(3) << -1, -1, -1).finished()};
        const PoleResidueForm prf = to_pole_residue(ex2.qp().times(Polynomial{-g.shift, 1.0}));
        for (std::size_t i = 0; i < 4; ++i) {
            const double dir = (g.E[i].normalized() - directions[i].normalized()).norm();
            if (dir > 1e-8) return fmt::format("E{} direction off by {:.3g}", i + 1, dir);
            const double prod = max_abs(g.E[i] * g.F[i].transpose() - prf.residues[i]);
            if (prod > 1e-8) return fmt::format("E{} F{} misses the residue by {:.3g}", i + 1, i + 1, prod);
        }
        return {};
    });

    criterion(3, "Example 2 phi = 1, minimal order 6, 3 hidden states", [&]() -> std::string {
        const MinimalOrder mo = minimal_order(ex2);
        const PipelineResult res = minreal_pipeline(ex2);
        const Index hidden = res.outcomes.front().realization.h();
        if (mo.phi != 1 || mo.order != 6 || hidden != 3) return fmt::format("phi {} order {} hidden {}", mo.phi, mo.order, hidden);
        return {};
    });

    criterion(4, "Example 2 has exactly four R* families in order", [&]() -> std::string {
        const PipelineResult res = minreal_pipeline(ex2, all_families());
        const std::vector<std::string> expected{"diag{a,-1,-1}", "diag{-2,a,-2}", "diag{-3,-3,a}", "diag{-4,-4,-4}"};
        std::vector<std::string> got;
        for (const RealizationOutcome& o : res.outcomes) got.push_back(o.rstar.notation());
        if (got != expected) return fmt::format("got {}", fmt::join(got, " "));
        return {};
    });

    criterion(5, "Example 2 realizations reproduce [Q,P] at order 6", [&]() -> std::string {
        for (const RealizationOutcome& o : minreal_pipeline(ex2, all_families()).outcomes) {
            if (o.realization.order() != 6) return fmt::format("{} has order {}", o.rstar.notation(), o.realization.order());
            if (!rmat_equal(compute_dsf(o.realization).qp(), ex2.qp(), 1e-7)) return o.rstar.notation() + " does not round-trip";
        }
        return {};
    });

    criterion(6, "structure limits recover A11 and B1 on 100 random systems", [&]() -> std::string {
        std::mt19937 rng(6);
        for (int trial = 0; trial < 100; ++trial) {
            const PartitionedRealization part =
                fixtures::random_symmetric_partition(rng, 1 + trial % 4, (trial / 4) % 5, 1 + (trial / 20) % 3);
            const Dsf d = compute_dsf(part);
            const StructureLimits lim = structure_limits(d);
            const WV wv = compute_wv(part);
            RationalMatrix r(part.p(), 1);
            for (Index i = 0; i < part.p(); ++i) r.set(i, 0, wv.W(i, i));
            Matrix off = part.A11;
            off.diagonal().setZero();
            const double err = std::max({max_abs(lim.A11_offdiag - off), max_abs(lim.B1 - part.B1),
                                         max_abs(limit_at_infinity(r).col(0) - part.A11.diagonal())});
            if (err > 1e-8) return fmt::format("system {} off by {:.3g}", trial, err);
        }
        return {};
    });

    criterion(7, "Example 1 closed forms, phi = 3, order 5, R* = diag(-1,-2,-3)", [&]() -> std::string {
        const Dsf closed = fixtures::example1_closed_form();
        if (!rmat_equal(ex1.Q(), closed.Q(), 1e-9) || !rmat_equal(ex1.P(), closed.P(), 1e-9)) return "extracted DSF differs";
        const PipelineResult res = minreal_pipeline(ex1, all_families());
        if (res.minimal.phi != 3 || res.minimal.order != 5) return fmt::format("phi {} order {}", res.minimal.phi, res.minimal.order);
        for (const RealizationOutcome& o : res.outcomes) {
            if (o.clique.size() != 3) continue;
            bool match = true;
            for (std::size_t k = 0; k < 3; ++k) match = match && std::abs(res.modes.poles[o.clique[k]] + static_cast<double>(k + 1)) < 1e-9;
            if (!match) continue;
            const Vector v = o.rstar.values();
            return (v - Vector::LinSpaced(3, -1.0, -3.0)).cwiseAbs().maxCoeff() < 1e-9 ? "" : "R* is " + o.rstar.notation();
        }
        return "no clique {-1,-2,-3}";
    });

    criterion(8, "no random constant R beats p + l - phi", [&]() -> std::string {
        std::mt19937 rng(8);
        std::uniform_real_distribution<double> u(-10.0, 10.0);
        std::vector<Dsf> dsfs = random_dsfs(80, 20);
        dsfs.push_back(ex2);
        for (std::size_t k = 0; k < dsfs.size(); ++k) {
            const Dsf& d = dsfs[k];
            const GilbertData g = extract_modes(d);
            const MinimalOrder mo = minimal_order(d);
            if (g.l() == 0) continue;
            std::uniform_int_distribution<std::size_t> pick(0, g.l() - 1);
            for (int trial = 0; trial < 50; ++trial) {
                RStar r;
                for (Index j = 0; j < d.p(); ++j) r.entries.emplace_back(trial % 2 == 0 ? u(rng) : g.poles[pick(rng)]);
                const PartitionedRealization part = realize(d, g, r);
                if (consistency_check(part, d) && part.order() < mo.order)
                    return fmt::format("DSF {} realized at order {} < {} by {}", k, part.order(), mo.order, r.notation());
            }
        }
        return {};
    });

    criterion(9, "clique number matches brute force on 100 graphs", [&]() -> std::string {
        std::mt19937 rng(9);
        const double densities[] = {0.2, 0.5, 0.8};
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 1 + static_cast<std::size_t>(trial) % 15;
            std::bernoulli_distribution coin(densities[trial % 3]);
            CompatGraph g(n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (coin(rng)) g.add_edge(i, j);
            std::size_t best = 0;
            for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
                bool clique = true;
                for (std::size_t a = 0; a < n && clique; ++a)
                    for (std::size_t b = a + 1; b < n && clique; ++b)
                        if ((mask >> a & 1u) && (mask >> b & 1u)) clique = g.has_edge(a, b);
                if (clique) best = std::max<std::size_t>(best, static_cast<std::size_t>(__builtin_popcount(mask)));
            }
            const std::size_t phi = maximum_cliques(g).phi;
            if (phi != best) return fmt::format("graph {} ({} nodes): {} vs {}", trial, n, phi, best);
        }
        return {};
    });

    criterion(10, "V-subsystem and G share invariant zeros at cancelled poles only", [&]() -> std::string {
        for (const Dsf* d : {&ex2, &ex1}) {
            const std::string why = zero_point_tests(*d, minreal_pipeline(*d, all_families()));
            if (!why.empty()) return why;
        }
        return {};
    });

    criterion(11, "det(sI-W) det(sI-A22) = det(sI-A) on 50 systems", [&]() -> std::string {
        std::mt19937 rng(11);
        for (int trial = 0; trial < 50; ++trial) {
            const PartitionedRealization part =
                fixtures::random_partition(rng, 1 + trial % 4, 1 + (trial / 4) % 4, 1 + trial % 3);
            const WV wv = compute_wv(part);
            const Index p = part.p(), h = part.h(), n = part.order();
            for (int k = 0; k < 8; ++k) {
                const Complex s(0.5 + 0.75 * k, 0.3);
                const Complex lhs = (s * ComplexMatrix::Identity(p, p) - rmat_eval(wv.W, s)).determinant() *
                                    (s * ComplexMatrix::Identity(h, h) - part.A22.cast<Complex>()).determinant();
                const Complex rhs = (s * ComplexMatrix::Identity(n, n) - part.A().cast<Complex>()).determinant();
                if (std::abs(lhs - rhs) > 1e-6 * std::abs(rhs))
                    return fmt::format("system {} point {}: relative error {:.3g}", trial, k, std::abs(lhs - rhs) / std::abs(rhs));
            }
        }
        return {};
    });

    criterion(12, "a pole at the origin is handled by the shift", [&]() -> std::string {
        RationalMatrix q(2, 2), p(2, 1);
        q.set(0, 1, lag(-2.0));
        q.set(1, 0, lag(-1.0));
        p.set(0, 0, lag(0.0));
        const Dsf d = Dsf::make(q, p);
        const PipelineResult res = minreal_pipeline(d);
        if (res.modes.shift == 0.0) return "auto shift stayed at 0";
        if (!res.outcomes.front().consistent) return "auto-shift realization inconsistent";
        for (double a : {3.5, -7.0}) {
            MinrealOptions opt;
            opt.shift = ShiftSetting::fixed(a);
            const std::size_t phi = minimal_order(d, opt).phi;
            if (phi != res.minimal.phi) return fmt::format("shift {} gives phi {} against {}", a, phi, res.minimal.phi);
        }
        return {};
    });

    return failures == 0 ? 0 : 1;
}
