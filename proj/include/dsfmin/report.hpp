#pragma once

#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "dsfmin/minreal.hpp"
#include "dsfmin/model_io.hpp"

namespace dsfmin {

/// Compact number formatting shared by reports and graph labels.
inline std::string fmt_num(double v) {
    if (v == 0.0) v = 0.0;  // no "-0"
    return fmt::format("{:.10g}", v);
}

struct FamilyReport {
    std::string rstar;                 ///< diag{...} with "a" for free entries
    std::vector<double> rstar_values;  ///< as realized
    std::vector<double> cancelled_poles;
    std::vector<bool> cancelled;       ///< per pole, in pole order
    Index order = 0;
    bool consistent = false;
    std::vector<ZeroSharing> zero_tests;
    std::string file;                  ///< where the realization was written, if anywhere
};

struct AnalysisReport {
    Index p = 0, m = 0;
    std::vector<double> poles;
    double shift = 0.0;
    Matrix D1;
    std::vector<Vector> E;
    std::string edge_rule;
    std::size_t edges = 0;
    std::size_t l = 0, phi = 0;
    Index minimal_order = 0;
    Index hidden_state_count = 0;
    std::optional<int> mcmillan_degree_G;
    std::string mcmillan_note;
    std::vector<std::vector<double>> maximizing_sets;
    std::vector<FamilyReport> families;
};

inline AnalysisReport make_report(const Dsf& d, const PipelineResult& res, const MinrealOptions& opt) {
    AnalysisReport r;
    r.p = d.p();
    r.m = d.m();
    r.poles = res.modes.poles;
    r.shift = res.modes.shift;
    r.D1 = res.modes.D1;
    r.E = res.modes.E;
    r.edge_rule = std::string(to_string(opt.rule));
    r.edges = res.edges;
    r.l = res.minimal.l;
    r.phi = res.minimal.phi;
    r.minimal_order = res.minimal.order;
    r.hidden_state_count = res.minimal.hidden;
    r.mcmillan_degree_G = res.mcmillan_degree_G;
    r.mcmillan_note = res.mcmillan_note;
    for (const auto& c : res.max_cliques) {
        std::vector<double> set;
        for (std::size_t k : c) set.push_back(res.modes.poles[k]);
        r.maximizing_sets.push_back(std::move(set));
    }
    for (const RealizationOutcome& o : res.outcomes) {
        FamilyReport f;
        f.rstar = o.rstar.notation();
        const Vector v = o.rstar.values();
        f.rstar_values.assign(v.data(), v.data() + v.size());
        f.cancelled = o.cancelled;
        for (std::size_t k = 0; k < o.cancelled.size(); ++k)
            if (o.cancelled[k]) f.cancelled_poles.push_back(res.modes.poles[k]);
        f.order = o.realization.order();
        f.consistent = o.consistent;
        f.zero_tests = o.zero_sharing;
        r.families.push_back(std::move(f));
    }
    return r;
}

namespace detail {

inline std::string join_nums(const std::vector<double>& v, const char* sep = ", ") {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += sep;
        s += fmt_num(v[i]);
    }
    return s;
}

inline std::string vector_text(const Vector& v) {
    return "[" + join_nums(std::vector<double>(v.data(), v.data() + v.size())) + "]";
}

inline std::string matrix_text(const Matrix& m, const std::string& indent) {
    std::vector<std::string> cells(static_cast<std::size_t>(m.size()));
    std::size_t width = 1;
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) {
            std::string& c = cells[static_cast<std::size_t>(i * m.cols() + j)];
            c = fmt_num(m(i, j));
            width = std::max(width, c.size());
        }
    std::string s;
    for (Index i = 0; i < m.rows(); ++i) {
        s += indent;
        for (Index j = 0; j < m.cols(); ++j) s += fmt::format(" {:>{}}", cells[static_cast<std::size_t>(i * m.cols() + j)], width);
        s += "\n";
    }
    return s;
}

inline const char* yes_no(bool b) { return b ? "yes" : "no"; }

}  // namespace detail

inline std::string render_text(const AnalysisReport& r) {
    std::string s;
    s += fmt::format("measured states p = {}, inputs m = {}\n", r.p, r.m);
    s += fmt::format("poles (l = {}): {}\n", r.l, detail::join_nums(r.poles, " "));
    if (r.shift != 0.0) s += fmt::format("shift a = {} (working matrix (s - a)[Q P])\n", fmt_num(r.shift));
    s += "McMillan degree of G: ";
    s += r.mcmillan_degree_G ? std::to_string(*r.mcmillan_degree_G) : "unavailable (" + r.mcmillan_note + ")";
    s += "\n";
    s += "D1 =\n" + detail::matrix_text(r.D1, "  ");
    s += "residue directions:\n";
    for (std::size_t k = 0; k < r.poles.size(); ++k) s += fmt::format("  {:>8}: E = {}\n", fmt_num(r.poles[k]), detail::vector_text(r.E[k]));
    s += fmt::format("compatibility graph ({}): {} edge(s)\n", r.edge_rule, r.edges);
    s += fmt::format("phi = {}\n", r.phi);
    s += "Phi:";
    for (const auto& set : r.maximizing_sets) s += " {" + detail::join_nums(set) + "}";
    s += "\n";
    s += fmt::format("minimal order = p + l - phi = {} + {} - {} = {}\n", r.p, r.l, r.phi, r.minimal_order);
    s += fmt::format("hidden states = {}\n", r.hidden_state_count);
    for (std::size_t i = 0; i < r.families.size(); ++i) {
        const FamilyReport& f = r.families[i];
        s += fmt::format("family {}: R* = {}\n", i + 1, f.rstar);
        s += fmt::format("  realized with diag{{{}}}, order {}\n", detail::join_nums(f.rstar_values, ","), f.order);
        s += "  cancelled poles: {" + detail::join_nums(f.cancelled_poles) + "}\n";
        s += fmt::format("  consistent with [Q P]: {}\n", detail::yes_no(f.consistent));
        for (const ZeroSharing& z : f.zero_tests)
            s += fmt::format("  zero at {}: V-subsystem {}, G {}\n", fmt_num(z.pole), detail::yes_no(z.v_zero), detail::yes_no(z.g_zero));
        if (!f.file.empty()) s += "  written to " + f.file + "\n";
    }
    return s;
}

inline Json report_json(const AnalysisReport& r) {
    Json j;
    j["p"] = r.p;
    j["m"] = r.m;
    j["l"] = r.l;
    j["phi"] = r.phi;
    j["minimal_order"] = r.minimal_order;
    j["hidden_state_count"] = r.hidden_state_count;
    j["mcmillan_degree_G"] = r.mcmillan_degree_G ? Json(*r.mcmillan_degree_G) : Json(nullptr);
    if (!r.mcmillan_degree_G) j["mcmillan_note"] = r.mcmillan_note;
    j["poles"] = r.poles;
    j["shift"] = r.shift;
    j["D1"] = detail::matrix_json(r.D1);
    Json e = Json::array();
    for (const Vector& v : r.E) e.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    j["E"] = e;
    j["edge_rule"] = r.edge_rule;
    j["edges"] = r.edges;
    j["maximizing_sets"] = r.maximizing_sets;
    Json fams = Json::array();
    for (const FamilyReport& f : r.families) {
        Json fj;
        fj["rstar"] = f.rstar;
        fj["rstar_values"] = f.rstar_values;
        fj["cancelled"] = f.cancelled;
        fj["cancelled_poles"] = f.cancelled_poles;
        fj["order"] = f.order;
        fj["consistent"] = f.consistent;
        Json zs = Json::array();
        for (const ZeroSharing& z : f.zero_tests) zs.push_back(Json{{"pole", z.pole}, {"v_subsystem", z.v_zero}, {"g", z.g_zero}});
        fj["zero_tests"] = zs;
        if (!f.file.empty()) fj["file"] = f.file;
        fams.push_back(std::move(fj));
    }
    j["families"] = fams;
    return j;
}

}  // namespace dsfmin
