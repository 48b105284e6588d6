#pragma once

#include <algorithm>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "dsfmin/dsf.hpp"
#include "dsfmin/error.hpp"
#include "dsfmin/graph_export.hpp"
#include "dsfmin/minreal.hpp"
#include "dsfmin/model_io.hpp"
#include "dsfmin/report.hpp"

namespace dsfmin {

enum ExitCode : int {
    kExitOk = 0,
    kExitVerificationFailed = 1,
    kExitAssumptionViolated = 2,
    kExitInputError = 3,
};

inline int exit_code_for(const Error& e) {
    if (e.is_assumption_violation()) return kExitAssumptionViolated;
    switch (e.kind()) {
        case ErrorKind::ParseError:
        case ErrorKind::SchemaError:
        case ErrorKind::IoError:
        case ErrorKind::ShapeMismatch:
        case ErrorKind::ZeroDenominator:
        case ErrorKind::ZeroPolynomial:
            return kExitInputError;
        default:
            return kExitVerificationFailed;
    }
}

enum class GraphFormat { Dot, Json };

/// Auto: realization level for state-space files, DSF level otherwise.
enum class GraphLevel { Auto, Dsf, Realization };

struct CliOptions {
    ToleranceOverrides tol;
    EdgeRule rule = EdgeRule::SupportDisjoint;
    double free_value = -1.0;
    bool enumerate_all = false;
    ShiftSetting shift;
    GraphFormat format = GraphFormat::Dot;
    GraphLevel level = GraphLevel::Auto;
    bool with_inputs = false;
    bool json_report = false;
    std::optional<std::filesystem::path> output;   ///< extract: DSF file
    std::optional<std::filesystem::path> out_dir;  ///< minreal: realization files
};

inline MinrealOptions minreal_options(const CliOptions& o, const Tolerances& tol) {
    MinrealOptions m;
    m.tol = tol;
    m.rule = o.rule;
    m.free_value = o.free_value;
    m.enumerate_all = o.enumerate_all;
    m.shift = o.shift;
    return m;
}

/// Runs a command body, turning library errors into a message on `err` and
/// the matching exit code.
inline int run_guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const Error& e) {
        const int code = exit_code_for(e);
        err << "error: " << e.what() << "\n";
        if (code == kExitAssumptionViolated) err << "violated assumption: " << to_string(e.kind()) << "\n";
        return code;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}

namespace detail {

inline std::string pattern_text(const Matrix& m, double cut) {
    std::string s;
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            if (std::abs(m(i, j)) > cut) s += fmt::format("{}({},{})", s.empty() ? "" : " ", i + 1, j + 1);
    return s.empty() ? "none" : s;
}

}  // namespace detail

/// State-space model -> DSF file, printing the limits that pin down A11 and B1.
inline int cmd_extract(const std::filesystem::path& model_path, const CliOptions& opt, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&] {
        const ModelFile model = parse_model(model_path, opt.tol);
        if (!model.realization) throw Error(ErrorKind::SchemaError, "extract needs a state_space model, got " + std::string(to_string(model.kind)));
        const PartitionedRealization& part = *model.realization;
        const Dsf d = compute_dsf(part, model.tol);
        const StructureLimits lim = structure_limits(d);
        const WV wv = compute_wv(part, model.tol);
        RationalMatrix r_diag(d.p(), 1);
        for (Index i = 0; i < d.p(); ++i) r_diag.set(i, 0, wv.W(i, i));
        const Matrix r_lim = limit_at_infinity(r_diag);
        const std::filesystem::path target =
            opt.output ? *opt.output : model_path.parent_path() / (model_path.stem().string() + ".dsf.json");
        write_text_file(target, dump(dsf_to_json(d)));

        const double cut = model.tol.structure * std::max({1.0, lim.A11_offdiag.cwiseAbs().maxCoeff(), lim.B1.cwiseAbs().maxCoeff()});
        out << fmt::format("measured states p = {}, hidden states h = {}, inputs m = {}\n", part.p(), part.h(), part.m());
        out << "lim s Q(s) =\n" << detail::matrix_text(lim.A11_offdiag, "  ");
        out << "lim s P(s) =\n" << detail::matrix_text(lim.B1, "  ");
        out << "lim R(s) =\n" << detail::matrix_text(r_lim.transpose(), "  ");
        out << "nonzero lim s Q: " << detail::pattern_text(lim.A11_offdiag, cut) << "\n";
        out << "nonzero lim s P: " << detail::pattern_text(lim.B1, cut) << "\n";
        out << "DSF written to " << target.string() << "\n";
        return static_cast<int>(kExitOk);
    });
}

/// Full minimal-realization pipeline: report on `out`, one realization file
/// per R* family.
inline int cmd_minreal(const std::filesystem::path& model_path, const CliOptions& opt, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&] {
        const ModelFile model = parse_model(model_path, opt.tol);
        const Dsf d = model.structure_function();
        const MinrealOptions mopt = minreal_options(opt, model.tol);
        const PipelineResult res = minreal_pipeline(d, mopt);
        AnalysisReport report = make_report(d, res, mopt);
        const std::filesystem::path dir = opt.out_dir ? *opt.out_dir : model_path.parent_path();
        if (!dir.empty()) std::filesystem::create_directories(dir);
        for (std::size_t k = 0; k < res.outcomes.size(); ++k) {
            const std::filesystem::path f = dir / fmt::format("{}.realization{}.json", model_path.stem().string(), k + 1);
            write_text_file(f, dump(realization_to_json(res.outcomes[k].realization)));
            report.families[k].file = f.string();
        }
        out << (opt.json_report ? dump(report_json(report)) : render_text(report));
        const bool all_consistent = std::all_of(res.outcomes.begin(), res.outcomes.end(), [](const auto& o) { return o.consistent; });
        if (!all_consistent) err << "error: a realization failed the consistency check\n";
        return static_cast<int>(all_consistent ? kExitOk : kExitVerificationFailed);
    });
}

/// Network graph of the model at the requested level.
inline int cmd_graph(const std::filesystem::path& model_path, const CliOptions& opt, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&] {
        const ModelFile model = parse_model(model_path, opt.tol);
        const bool realization_level = opt.level == GraphLevel::Realization || (opt.level == GraphLevel::Auto && model.realization);
        if (realization_level && !model.realization)
            throw Error(ErrorKind::SchemaError, "a realization-level graph needs a state_space model");
        const NetworkGraph g = realization_level ? realization_graph(*model.realization, opt.with_inputs, model.tol.structure)
                                                 : dsf_graph(model.structure_function(), opt.with_inputs, model.tol.structure);
        out << (opt.format == GraphFormat::Dot ? to_dot(g) : dump(to_json(g)));
        return static_cast<int>(kExitOk);
    });
}

/// Is the realization consistent with the model's DSF, and how does its order
/// compare with p + l - phi?
inline int cmd_verify(const std::filesystem::path& model_path, const std::filesystem::path& realization_path, const CliOptions& opt,
                      std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&] {
        const ModelFile model = parse_model(model_path, opt.tol);
        const ModelFile cand = parse_model(realization_path, opt.tol);
        if (!cand.realization)
            throw Error(ErrorKind::SchemaError, realization_path.string() + ": expected a state_space realization");
        const Dsf d = model.structure_function();
        const PartitionedRealization& part = *cand.realization;
        const bool consistent = consistency_check(part, d, model.tol.eval);
        out << fmt::format("realization order {} (p = {}, hidden = {})\n", part.order(), part.p(), part.h());
        try {
            const MinimalOrder mo = minimal_order(d, minreal_options(opt, model.tol));
            const char* verdict = part.order() == mo.order ? "minimal" : part.order() > mo.order ? "above minimal" : "below minimal";
            out << fmt::format("minimal order p + l - phi = {} + {} - {} = {}: {}\n", d.p(), mo.l, mo.phi, mo.order, verdict);
        } catch (const Error& e) {
            out << "minimal order unavailable: " << e.what() << "\n";
        }
        out << "consistent: " << (consistent ? "yes" : "no") << "\n";
        return static_cast<int>(consistent ? kExitOk : kExitVerificationFailed);
    });
}

}  // namespace dsfmin
