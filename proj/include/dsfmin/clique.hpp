#pragma once

#include <algorithm>
#include <cstddef>
#include <string_view>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "dsfmin/error.hpp"

namespace dsfmin {

enum class EdgeRule { SupportDisjoint, Orthogonal };

constexpr std::string_view to_string(EdgeRule r) {
    return r == EdgeRule::SupportDisjoint ? "support-disjoint" : "orthogonal";
}

/// Undirected simple graph over residue vectors; an edge means the two poles
/// can be cancelled by the same constant diagonal R*.
class CompatGraph {
   public:
    using Bits = boost::dynamic_bitset<>;

    explicit CompatGraph(std::size_t nodes, EdgeRule rule = EdgeRule::SupportDisjoint)
        : rule_(rule), adj_(nodes, Bits(nodes)) {}

    std::size_t size() const { return adj_.size(); }
    EdgeRule rule() const { return rule_; }

    void add_edge(std::size_t i, std::size_t j) {
        if (i == j) return;
        adj_[i].set(j);
        adj_[j].set(i);
    }
    bool has_edge(std::size_t i, std::size_t j) const { return adj_[i].test(j); }
    const Bits& neighbours(std::size_t i) const { return adj_[i]; }

    std::size_t edge_count() const {
        std::size_t twice = 0;
        for (const Bits& b : adj_) twice += b.count();
        return twice / 2;
    }

   private:
    EdgeRule rule_;
    std::vector<Bits> adj_;
};

struct CliqueResult {
    std::vector<std::vector<std::size_t>> cliques;  ///< sorted index sets, lexicographic order
    std::size_t phi = 0;
};

namespace detail {

class MaxCliqueSearch {
   public:
    using Bits = CompatGraph::Bits;

    explicit MaxCliqueSearch(const CompatGraph& g) : g_(g) {}

    CliqueResult run() {
        const std::size_t n = g_.size();
        Bits p(n), x(n);
        p.set();
        std::vector<std::size_t> r;
        expand(r, p, x);
        for (auto& c : found_) std::sort(c.begin(), c.end());
        std::sort(found_.begin(), found_.end());
        return {std::move(found_), best_};
    }

   private:
    // Bron-Kerbosch with Tomita pivoting; branches that cannot reach the best
    // size seen so far are cut. Ties are kept so every maximum clique is found.
    void expand(std::vector<std::size_t>& r, Bits p, Bits x) {
        if (r.size() + p.count() < best_) return;
        if (p.none() && x.none()) {
            if (r.size() > best_) {
                best_ = r.size();
                found_.clear();
            }
            found_.push_back(r);
            return;
        }
        std::size_t pivot = Bits::npos;
        std::size_t pivot_deg = 0;
        const Bits px = p | x;
        for (std::size_t u = px.find_first(); u != Bits::npos; u = px.find_next(u)) {
            const std::size_t d = (p & g_.neighbours(u)).count();
            if (pivot == Bits::npos || d > pivot_deg) {
                pivot = u;
                pivot_deg = d;
            }
        }
        const Bits candidates = p - g_.neighbours(pivot);
        for (std::size_t v = candidates.find_first(); v != Bits::npos; v = candidates.find_next(v)) {
            r.push_back(v);
            expand(r, p & g_.neighbours(v), x & g_.neighbours(v));
            r.pop_back();
            p.reset(v);
            x.set(v);
        }
    }

    const CompatGraph& g_;
    std::size_t best_ = 0;
    std::vector<std::vector<std::size_t>> found_;
};

}  // namespace detail

/// Maximum cliques by exact branch-and-bound. With enumerate_all unset only
/// the lexicographically first maximum clique is returned.
inline CliqueResult maximum_cliques(const CompatGraph& g, bool enumerate_all = false) {
    if (g.size() == 0) return {};
    CliqueResult res = detail::MaxCliqueSearch(g).run();
    if (!enumerate_all && res.cliques.size() > 1) res.cliques.resize(1);
    return res;
}

}  // namespace dsfmin
