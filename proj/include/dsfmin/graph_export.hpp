#pragma once

#include <string>
#include <vector>

#include "dsfmin/dsf.hpp"
#include "dsfmin/model_io.hpp"
#include "dsfmin/state_space.hpp"
#include "dsfmin/tolerances.hpp"

namespace dsfmin {

enum class NodeKind { Measured, Hidden, Input };

inline std::string_view to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Measured: return "measured";
        case NodeKind::Hidden: return "hidden";
        case NodeKind::Input: return "input";
    }
    return "?";
}

struct GraphNode {
    std::string id;
    NodeKind kind;
};

/// Directed edge: `from` appears in the dynamics of `to`.
struct GraphEdge {
    std::size_t from, to;
};

/// Network topology. Self-loops are never listed.
struct NetworkGraph {
    std::string level;  ///< "dsf" or "realization"
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;
};

namespace detail {

inline void add_nodes(NetworkGraph& g, const char* prefix, Index count, NodeKind kind) {
    for (Index k = 0; k < count; ++k) g.nodes.push_back({prefix + std::to_string(k + 1), kind});
}

}  // namespace detail

/// Measured nodes y1..yp; Q_ij != 0 gives y_j -> y_i and P_ij != 0 gives u_j -> y_i.
inline NetworkGraph dsf_graph(const Dsf& d, bool with_inputs = false, double tol_struct = Tolerances{}.structure) {
    const BooleanStructure bs = boolean_structure(d, tol_struct);
    NetworkGraph g{"dsf", {}, {}};
    const Index p = d.p(), m = d.m();
    detail::add_nodes(g, "y", p, NodeKind::Measured);
    if (with_inputs) detail::add_nodes(g, "u", m, NodeKind::Input);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j)
            if (i != j && bs.q_adj(i, j)) g.edges.push_back({static_cast<std::size_t>(j), static_cast<std::size_t>(i)});
    if (with_inputs)
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < m; ++j)
                if (bs.p_adj(i, j)) g.edges.push_back({static_cast<std::size_t>(p + j), static_cast<std::size_t>(i)});
    return g;
}

/// Measured nodes y1..yp, hidden nodes z1..zh; A_ij above tol_struct * max|[A B]|
/// gives state j -> state i.
inline NetworkGraph realization_graph(const PartitionedRealization& r, bool with_inputs = false,
                                      double tol_struct = Tolerances{}.structure) {
    const Matrix a = r.A(), b = r.B();
    const double scale = std::max(a.cwiseAbs().maxCoeff(), b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
    const double cut = tol_struct * scale;
    NetworkGraph g{"realization", {}, {}};
    const Index n = a.rows(), m = b.cols();
    detail::add_nodes(g, "y", r.p(), NodeKind::Measured);
    detail::add_nodes(g, "z", r.h(), NodeKind::Hidden);
    if (with_inputs) detail::add_nodes(g, "u", m, NodeKind::Input);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            if (i != j && std::abs(a(i, j)) > cut) g.edges.push_back({static_cast<std::size_t>(j), static_cast<std::size_t>(i)});
    if (with_inputs)
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < m; ++j)
                if (std::abs(b(i, j)) > cut) g.edges.push_back({static_cast<std::size_t>(n + j), static_cast<std::size_t>(i)});
    return g;
}

inline std::string to_dot(const NetworkGraph& g) {
    std::string s = "digraph network {\n";
    s += "  // edge j -> i: node j drives node i; self-loops omitted\n";
    s += "  level=\"" + g.level + "\";\n";
    for (const GraphNode& n : g.nodes) {
        s += "  " + n.id + " [kind=" + std::string(to_string(n.kind));
        switch (n.kind) {
            case NodeKind::Measured: s += ", shape=circle, style=filled, fillcolor=gray85"; break;
            case NodeKind::Hidden: s += ", shape=circle, style=dashed"; break;
            case NodeKind::Input: s += ", shape=box"; break;
        }
        s += "];\n";
    }
    for (const GraphEdge& e : g.edges) s += "  " + g.nodes[e.from].id + " -> " + g.nodes[e.to].id + ";\n";
    s += "}\n";
    return s;
}

/// Node list, edge list and out-neighbour adjacency.
inline Json to_json(const NetworkGraph& g) {
    Json nodes = Json::array();
    Json adjacency = Json::object();
    for (const GraphNode& n : g.nodes) {
        nodes.push_back(Json{{"id", n.id}, {"kind", to_string(n.kind)}});
        adjacency[n.id] = Json::array();
    }
    Json edges = Json::array();
    for (const GraphEdge& e : g.edges) {
        edges.push_back(Json{{"from", g.nodes[e.from].id}, {"to", g.nodes[e.to].id}});
        adjacency[g.nodes[e.from].id].push_back(g.nodes[e.to].id);
    }
    return Json{{"level", g.level}, {"direction", "from drives to"}, {"nodes", nodes}, {"edges", edges}, {"adjacency", adjacency}};
}

}  // namespace dsfmin
