// dsfmin: structure functions and minimal realizations of partitioned LTI models.
//
//   dsfmin extract MODEL [-o OUT]
//   dsfmin minreal MODEL [--out-dir DIR] [--enumerate-all] [--json] ...
//   dsfmin graph MODEL [--format dot|json] [--level auto|dsf|realization] [--inputs]
//   dsfmin verify MODEL REALIZATION
//
// Exit codes: 0 success, 1 verification failure, 2 assumption violation,
// 3 I/O, schema or usage error.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "dsfmin/commands.hpp"

namespace {

using namespace dsfmin;

void add_tolerance_flags(CLI::App* cmd, CliOptions& opt) {
    auto positive = CLI::PositiveNumber;
    cmd->add_option("--tol-pole", opt.tol.pole, "pole clustering tolerance")->check(positive);
    cmd->add_option("--tol-rank", opt.tol.rank, "relative singular-value cut for ranks")->check(positive);
    cmd->add_option("--tol-orth", opt.tol.orth, "support and orthogonality tolerance")->check(positive);
    cmd->add_option("--tol-eval", opt.tol.eval, "rational matrix comparison tolerance")->check(positive);
}

void add_minreal_flags(CLI::App* cmd, CliOptions& opt, std::string& shift, std::string& rule) {
    cmd->add_option("--edge-rule", rule, "compatibility rule")->check(CLI::IsMember({"support-disjoint", "orthogonal"}))->default_val("support-disjoint");
    cmd->add_option("--free-value", opt.free_value, "value given to free R* entries");
    cmd->add_flag("--enumerate-all", opt.enumerate_all, "realize every maximum clique, not just the first");
    cmd->add_option("--shift", shift, "shift a for (s - a)[Q P], or auto")->default_val("auto");
}

ShiftSetting parse_shift(const std::string& text) {
    if (text == "auto") return ShiftSetting::auto_shift();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw CLI::ValidationError("--shift", "expected a number or auto, got " + text);
    return ShiftSetting::fixed(v);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamical structure functions and their minimal realizations"};
    app.require_subcommand(1);

    CliOptions opt;
    std::string model, realization, shift = "auto", rule = "support-disjoint";
    std::string output, out_dir;

    auto* extract = app.add_subcommand("extract", "compute the DSF of a state-space model");
    extract->add_option("model", model, "state_space model file")->required();
    extract->add_option("-o,--output", output, "DSF file to write (default: MODEL stem + .dsf.json)");
    add_tolerance_flags(extract, opt);

    auto* minreal = app.add_subcommand("minreal", "minimal-order realizations consistent with a DSF");
    minreal->add_option("model", model, "model file")->required();
    minreal->add_option("--out-dir", out_dir, "directory for realization files (default: next to MODEL)");
    minreal->add_flag("--json", opt.json_report, "print the report as JSON");
    add_tolerance_flags(minreal, opt);
    add_minreal_flags(minreal, opt, shift, rule);

    auto* graph = app.add_subcommand("graph", "network topology as DOT or adjacency JSON");
    graph->add_option("model", model, "model file")->required();
    const std::map<std::string, GraphFormat> formats{{"dot", GraphFormat::Dot}, {"json", GraphFormat::Json}};
    graph->add_option("--format", opt.format, "output format")->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    const std::map<std::string, GraphLevel> levels{{"auto", GraphLevel::Auto}, {"dsf", GraphLevel::Dsf}, {"realization", GraphLevel::Realization}};
    graph->add_option("--level", opt.level, "dsf or realization level")->transform(CLI::CheckedTransformer(levels, CLI::ignore_case));
    graph->add_flag("--inputs", opt.with_inputs, "include input nodes");
    add_tolerance_flags(graph, opt);

    auto* verify = app.add_subcommand("verify", "check a realization against a model's DSF");
    verify->add_option("model", model, "model file")->required();
    verify->add_option("realization", realization, "state_space realization file")->required();
    add_tolerance_flags(verify, opt);
    add_minreal_flags(verify, opt, shift, rule);

    try {
        app.parse(argc, argv);
        opt.shift = parse_shift(shift);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;
    }
    opt.rule = rule == "orthogonal" ? EdgeRule::Orthogonal : EdgeRule::SupportDisjoint;
    if (!output.empty()) opt.output = output;
    if (!out_dir.empty()) opt.out_dir = out_dir;

    if (extract->parsed()) return cmd_extract(model, opt, std::cout, std::cerr);
    if (minreal->parsed()) return cmd_minreal(model, opt, std::cout, std::cerr);
    if (graph->parsed()) return cmd_graph(model, opt, std::cout, std::cerr);
    return cmd_verify(model, realization, opt, std::cout, std::cerr);
}
