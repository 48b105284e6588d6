#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

#include "dsfmin/commands.hpp"
#include "test_systems.hpp"

using namespace dsfmin;
namespace fs = std::filesystem;

namespace {

const fs::path kModels = DSFMIN_MODELS;

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("dsfmin_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    // Exit status of the installed binary with `args`, output discarded.
    static int run(const std::string& args) {
        const std::string cmd = std::string(DSFMIN_CLI) + " " + args + " >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    fs::path copy_model(const std::string& name) const {
        const fs::path target = dir_ / name;
        fs::copy_file(kModels / name, target);
        return target;
    }

    fs::path dir_;
};

int count(const std::string& text, const std::string& needle) {
    int n = 0;
    for (std::size_t at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
    return n;
}

}  // namespace

TEST_F(Cli, ExtractWritesDsfAndPattern) {
    CliOptions opt;
    opt.output = dir_ / "net.dsf.json";
    std::ostringstream out, err;
    EXPECT_EQ(cmd_extract(kModels / "example1_network.json", opt, out, err), kExitOk) << err.str();
    EXPECT_NE(out.str().find("nonzero lim s Q: (1,3) (3,2)"), std::string::npos) << out.str();
    EXPECT_NE(out.str().find("nonzero lim s P: (1,1) (2,2)"), std::string::npos) << out.str();
    const ModelFile back = parse_model(*opt.output);
    EXPECT_TRUE(rmat_equal(back.structure_function().qp(), compute_dsf(fixtures::example1_partition()).qp(), 1e-9));
}

TEST_F(Cli, ExtractDefaultOutputSitsNextToModel) {
    const fs::path model = copy_model("decoupled.json");
    std::ostringstream out, err;
    EXPECT_EQ(cmd_extract(model, {}, out, err), kExitOk) << err.str();
    EXPECT_TRUE(fs::exists(dir_ / "decoupled.dsf.json"));
}

TEST_F(Cli, ExtractRejectsDsfInput) {
    std::ostringstream out, err;
    EXPECT_EQ(cmd_extract(kModels / "example2_dsf.json", {}, out, err), kExitInputError);
    EXPECT_NE(err.str().find("state_space"), std::string::npos);
}

TEST_F(Cli, MinrealExample2Report) {
    CliOptions opt;
    opt.out_dir = dir_;
    opt.enumerate_all = true;
    std::ostringstream out, err;
    EXPECT_EQ(cmd_minreal(kModels / "example2_dsf.json", opt, out, err), kExitOk) << err.str();
    const std::string report = out.str();
    EXPECT_NE(report.find("diag{"), std::string::npos) << report;
    for (int k = 1; k <= 4; ++k) EXPECT_TRUE(fs::exists(dir_ / ("example2_dsf.realization" + std::to_string(k) + ".json")));
    const ModelFile r = parse_model(dir_ / "example2_dsf.realization1.json");
    ASSERT_TRUE(r.realization.has_value());
    EXPECT_EQ(r.realization->order(), 6);
    EXPECT_TRUE(consistency_check(*r.realization, fixtures::example2_dsf()));
}

TEST_F(Cli, MinrealJsonReport) {
    CliOptions opt;
    opt.out_dir = dir_;
    opt.json_report = true;
    std::ostringstream out, err;
    ASSERT_EQ(cmd_minreal(kModels / "example2_dsf.json", opt, out, err), kExitOk) << err.str();
    EXPECT_TRUE(Json::accept(out.str()));
}

TEST_F(Cli, MinrealOutputIsByteStable) {
    CliOptions opt;
    opt.out_dir = dir_;
    opt.enumerate_all = true;
    std::ostringstream first, second, err;
    ASSERT_EQ(cmd_minreal(kModels / "example1_network.json", opt, first, err), kExitOk) << err.str();
    const std::string file1 = read_text_file(dir_ / "example1_network.realization1.json");
    ASSERT_EQ(cmd_minreal(kModels / "example1_network.json", opt, second, err), kExitOk) << err.str();
    EXPECT_EQ(first.str(), second.str());
    EXPECT_EQ(read_text_file(dir_ / "example1_network.realization1.json"), file1);
}

TEST_F(Cli, MinrealComplexPolesIsAssumptionViolation) {
    CliOptions opt;
    opt.out_dir = dir_;
    std::ostringstream out, err;
    EXPECT_EQ(cmd_minreal(kModels / "oscillator.json", opt, out, err), kExitAssumptionViolated);
    EXPECT_NE(err.str().find("violated assumption"), std::string::npos);
}

TEST_F(Cli, GraphExample1DsfLevel) {
    CliOptions opt;
    opt.level = GraphLevel::Dsf;
    std::ostringstream out, err;
    ASSERT_EQ(cmd_graph(kModels / "example1_network.json", opt, out, err), kExitOk) << err.str();
    const std::string dot = out.str();
    EXPECT_NE(dot.find("y3 -> y1;"), std::string::npos) << dot;
    EXPECT_NE(dot.find("y1 -> y2;"), std::string::npos);
    EXPECT_NE(dot.find("y2 -> y3;"), std::string::npos);
    EXPECT_EQ(count(dot, "-> y"), 3);
    EXPECT_EQ(count(dot, "kind=measured"), 3);
}

TEST_F(Cli, GraphDecoupledHasNoEdges) {
    std::ostringstream out, err;
    ASSERT_EQ(cmd_graph(kModels / "decoupled.json", {}, out, err), kExitOk) << err.str();
    EXPECT_EQ(count(out.str(), "-> y"), 0);
}

TEST_F(Cli, GraphRealizationLevelMarksHiddenStates) {
    CliOptions opt;
    opt.out_dir = dir_;
    std::ostringstream out, err;
    ASSERT_EQ(cmd_minreal(kModels / "example2_dsf.json", opt, out, err), kExitOk) << err.str();
    std::ostringstream dot;
    ASSERT_EQ(cmd_graph(dir_ / "example2_dsf.realization1.json", {}, dot, err), kExitOk) << err.str();
    EXPECT_EQ(count(dot.str(), "kind=measured"), 3);
    EXPECT_EQ(count(dot.str(), "kind=hidden"), 3);
}

TEST_F(Cli, GraphJsonAdjacency) {
    CliOptions opt;
    opt.format = GraphFormat::Json;
    opt.level = GraphLevel::Dsf;
    opt.with_inputs = true;
    std::ostringstream out, err;
    ASSERT_EQ(cmd_graph(kModels / "example1_network.json", opt, out, err), kExitOk) << err.str();
    const Json g = Json::parse(out.str());
    EXPECT_EQ(g.at("nodes").size(), 5u);
    EXPECT_EQ(g.at("adjacency").at("y3"), Json::array({"y1"}));
    EXPECT_EQ(g.at("adjacency").at("u1"), Json::array({"y1"}));
}

TEST_F(Cli, VerifyAcceptsMinrealOutput) {
    CliOptions opt;
    opt.out_dir = dir_;
    std::ostringstream out, err;
    ASSERT_EQ(cmd_minreal(kModels / "example2_dsf.json", opt, out, err), kExitOk) << err.str();
    std::ostringstream report;
    EXPECT_EQ(cmd_verify(kModels / "example2_dsf.json", dir_ / "example2_dsf.realization1.json", {}, report, err), kExitOk);
    EXPECT_NE(report.str().find(": minimal"), std::string::npos) << report.str();
    EXPECT_NE(report.str().find("consistent: yes"), std::string::npos);
}

TEST_F(Cli, VerifyRejectsPerturbedRealization) {
    const Dsf d = fixtures::example2_dsf();
    const GilbertData g = extract_modes(d);
    PartitionedRealization part = realize(d, g, construct_rstar(g, {3}));
    part.A22(1, 1) += 0.2;
    write_text_file(dir_ / "bad.json", dump(realization_to_json(part)));
    std::ostringstream out, err;
    EXPECT_EQ(cmd_verify(kModels / "example2_dsf.json", dir_ / "bad.json", {}, out, err), kExitVerificationFailed);
    EXPECT_NE(out.str().find("consistent: no"), std::string::npos);
}

TEST_F(Cli, BinaryExitCodes) {
    const std::string models = kModels.string();
    EXPECT_EQ(run("minreal " + models + "/example2_dsf.json --out-dir " + dir_.string()), 0);
    EXPECT_EQ(run("verify " + models + "/example2_dsf.json " + dir_.string() + "/example2_dsf.realization1.json"), 0);
    EXPECT_EQ(run("minreal " + models + "/oscillator.json --out-dir " + dir_.string()), 2);
    EXPECT_EQ(run("minreal " + models + "/integrator.json --shift 0 --out-dir " + dir_.string()), 2);
    EXPECT_EQ(run("minreal " + models + "/integrator.json --out-dir " + dir_.string()), 0);
    EXPECT_EQ(run("graph " + dir_.string() + "/missing.json"), 3);
    write_text_file(dir_ / "broken.json", "{\"kind\": ");
    EXPECT_EQ(run("graph " + dir_.string() + "/broken.json"), 3);
    EXPECT_EQ(run("graph " + models + "/decoupled.json --format svg"), 3);
    EXPECT_EQ(run("minreal " + models + "/example2_dsf.json --shift abc"), 3);
    EXPECT_EQ(run("frobnicate"), 3);
}

TEST_F(Cli, BinaryVerifyFailureExitsOne) {
    const Dsf d = fixtures::example2_dsf();
    const GilbertData g = extract_modes(d);
    PartitionedRealization part = realize(d, g, construct_rstar(g, {3}));
    part.A12(0, 0) += 0.5;
    write_text_file(dir_ / "bad.json", dump(realization_to_json(part)));
    EXPECT_EQ(run("verify " + kModels.string() + "/example2_dsf.json " + (dir_ / "bad.json").string()), 1);
}
