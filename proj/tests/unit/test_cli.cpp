#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "fdilab/attack.hpp"
#include "fdilab/linalg.hpp"
#include "fdilab/matrix_io.hpp"
#include "fdilab/synth_data.hpp"
#include "fdilab_cli/app.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace fdilab;

namespace {

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
};

CliRun fdilab_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    CliRun r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::map<std::string, std::string> summary(const fs::path& p) {
    std::map<std::string, std::string> out;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("fdilab_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

} // namespace

TEST_F(CliTest, ValidateCase4) {
    const CliRun r = fdilab_cli({"validate", "case4.grid"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("n=4 p=4 k=1"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("channels: V1 V4 I1-2 I4-3"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find(": observable"), std::string::npos) << r.out;
}

TEST_F(CliTest, ValidateRts24) {
    const CliRun r = fdilab_cli({"validate", "--case", "rts24"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("n=31 p=24 k=4"), std::string::npos) << r.out;
}

TEST_F(CliTest, ValidateMalformed) {
    std::ofstream(path("bad.grid")) << "bus 1\nbus 2\nbranch 1 2 oops\n";
    const CliRun r = fdilab_cli({"validate", path("bad.grid")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("bad.grid:3"), std::string::npos) << r.err;
}

TEST_F(CliTest, ValidateUnobservablePlacement) {
    std::ofstream(path("weak.grid")) << "bus 1 pmu\nbus 2\nbus 3\nbranch 1 2 1 -5\nbranch 2 3 1 -5\n";
    const CliRun r = fdilab_cli({"validate", path("weak.grid")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("unobservable"), std::string::npos);
}

TEST_F(CliTest, InputErrors) {
    EXPECT_EQ(fdilab_cli({"validate", "no_such_case"}).code, 2);
    EXPECT_EQ(fdilab_cli({"simulate", "--bogus"}).code, 2);
    EXPECT_EQ(fdilab_cli({}).code, 2);
    EXPECT_EQ(fdilab_cli({"simulate", "--out", path("s"), "--samples", "0"}).code, 2);
    EXPECT_EQ(fdilab_cli({"detect", "--out", path("empty")}).code, 2);
    EXPECT_EQ(fdilab_cli({"attack", "--mult", "--add", "--bus", "4", "--out", path("a")}).code, 2);
    EXPECT_EQ(fdilab_cli({"attack", "--mult", "--bus", "4", "--gain", "0", "--out", path("a")}).code, 2);
    EXPECT_EQ(fdilab_cli({"--help"}).code, 0);
}

TEST_F(CliTest, SimulateDefault) {
    const CliRun r = fdilab_cli({"simulate", "--out", path("sim")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto W = read_matrix_csv(dir_ / "sim" / "W.csv");
    EXPECT_EQ(W.values.rows(), 150);
    EXPECT_EQ(W.values.cols(), 31);
    EXPECT_LE(std::stoi(summary(dir_ / "sim" / "simulate_summary.txt").at("dominant_singular_values")), 4);

    // The CSV carries exactly the matrix the library produces.
    const GridCase g = testing_support::bundled("rts24");
    const JacobianSet jac = build_jacobian(g);
    EXPECT_EQ(W.values, measure(generate_state_trajectory(g, jac, TrajectoryConfig{}), jac, 0.0, 0));
    EXPECT_EQ(W.labels, jac.index.labels());
    const auto X = read_matrix_csv(dir_ / "sim" / "X.csv");
    EXPECT_EQ(X.labels.front(), "x1");
    EXPECT_EQ(slurp(dir_ / "sim" / "singular_values.csv").substr(0, 12), "index,value\n");
}

TEST_F(CliTest, SimulateSingleRow) {
    const CliRun r = fdilab_cli({"simulate", "--out", path("one"), "--samples", "1", "--onset", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_matrix_csv(dir_ / "one" / "W.csv").values.rows(), 1);
}

TEST_F(CliTest, SimulateDeterministic) {
    for (const char* d : {"a", "b"})
        ASSERT_EQ(fdilab_cli({"simulate", "--out", path(d), "--seed", "5", "--noise-sigma", "0.001"}).code, 0);
    for (const char* f : {"W.csv", "X.csv", "singular_values.csv", "simulate_summary.txt"})
        EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
    ASSERT_EQ(fdilab_cli({"simulate", "--out", path("c"), "--seed", "6", "--noise-sigma", "0.001"}).code, 0);
    EXPECT_NE(slurp(dir_ / "a" / "W.csv"), slurp(dir_ / "c" / "W.csv"));
}

TEST_F(CliTest, ManifestSetsOptions) {
    std::ofstream(path("m.ini")) << "[simulate]\nsamples=12\nonset=5\nseed=3\n";
    const CliRun r = fdilab_cli({"--manifest", path("m.ini"), "simulate", "--out", path("sim")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_matrix_csv(dir_ / "sim" / "W.csv").values.rows(), 12);
    EXPECT_EQ(summary(dir_ / "sim" / "simulate_summary.txt").at("seed"), "3");
}

TEST_F(CliTest, MultiplicativeBus4IsUnobservable) {
    const CliRun r = fdilab_cli({"attack", "--mult", "--bus", "4", "--phase", "0.2", "--out", path("m4")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto s = summary(dir_ / "m4" / "attack_summary.txt");
    EXPECT_EQ(s.at("kind"), "multiplicative");
    EXPECT_EQ(s.at("unobservable"), "yes");
    EXPECT_EQ(s.at("conventional_bdd"), "passed");
    EXPECT_EQ(s.at("enhanced_bdd"), "passed");
    EXPECT_EQ(s.at("rank_preserved"), "yes");
    const JacobianSet jac = build_jacobian(testing_support::bundled("rts24"));
    const AttackSpec spec = read_attack_spec(dir_ / "m4" / "attack.spec", jac);
    EXPECT_EQ(spec.F(3, 3), std::polar(1.0, 0.2));
}

TEST_F(CliTest, MultiplicativeZibBusIsCaught) {
    const CliRun r = fdilab_cli({"attack", "--mult", "--bus", "16", "--phase", "0.3", "--out", path("m16")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto s = summary(dir_ / "m16" / "attack_summary.txt");
    EXPECT_EQ(s.at("unobservable"), "no");
    EXPECT_EQ(s.at("enhanced_bdd"), "flagged");
    EXPECT_NE(s.at("unobservability").find("17"), std::string::npos) << s.at("unobservability");
}

TEST_F(CliTest, AdditiveCase6Feasible) {
    const CliRun r = fdilab_cli({"attack", "--case", "case6", "--add", "--targets", "5", "--controlled",
                              "pmu4,pmu6", "--out", path("a6")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto s = summary(dir_ / "a6" / "attack_summary.txt");
    EXPECT_EQ(s.at("kind"), "additive");
    EXPECT_EQ(s.at("unobservable"), "yes");
    EXPECT_EQ(s.at("enhanced_bdd"), "passed");
    EXPECT_EQ(s.at("controlled"), "V4 V6 I4-3 I6-5");
}

TEST_F(CliTest, AdditiveInfeasibleExitCode) {
    const CliRun r = fdilab_cli({"attack", "--case", "case4", "--targets", "2", "--controlled", "pmu1",
                              "--out", path("a4")});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("bus 2"), std::string::npos) << r.err;
}

TEST_F(CliTest, AdditiveChannelLabels) {
    const CliRun r = fdilab_cli({"attack", "--case", "case6", "--targets", "5", "--controlled", "V4",
                              "--controlled", "I4-3,V6,I6-5", "--out", path("a")});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(fdilab_cli({"attack", "--case", "case6", "--targets", "5", "--controlled", "pmu5", "--out",
                          path("b")})
                  .code,
              2);
}

TEST_F(CliTest, DetectPipeline) {
    ASSERT_EQ(fdilab_cli({"simulate", "--out", path("clean")}).code, 0);
    CliRun r = fdilab_cli({"detect", "--out", path("clean"), "--lambda-sweep", "1.05:1.5:3"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto s = summary(dir_ / "clean" / "detect_summary.txt");
    EXPECT_EQ(s.at("input"), "W.csv");
    EXPECT_EQ(s.at("lrd_support"), "none");
    EXPECT_EQ(s.at("conventional_bdd"), "passed");
    EXPECT_EQ(s.at("enhanced_bdd"), "passed");
    EXPECT_EQ(s.at("lrd_converged"), "yes");
    for (const char* f : {"bdd_conventional.csv", "bdd_enhanced.csv", "W_hat.csv", "C_hat.csv", "lrd_trace.csv",
                          "column_norms.csv", "support.txt", "lambda_sweep.csv"})
        EXPECT_TRUE(fs::exists(dir_ / "clean" / f)) << f;
    std::ifstream sweep(dir_ / "clean" / "lambda_sweep.csv");
    int lines = 0;
    for (std::string l; std::getline(sweep, l);) ++lines;
    EXPECT_EQ(lines, 4);
    EXPECT_EQ(read_matrix_csv(dir_ / "clean" / "C_hat.csv").values.cols(), 24);

    ASSERT_EQ(fdilab_cli({"attack", "--mult", "--bus", "4", "--phase", "0.2", "--out", path("m4")}).code, 0);
    r = fdilab_cli({"detect", "--out", path("m4")});
    ASSERT_EQ(r.code, 0) << r.err;
    s = summary(dir_ / "m4" / "detect_summary.txt");
    EXPECT_EQ(s.at("input"), "Wbar.csv");
    EXPECT_EQ(s.at("lrd_support"), "none");
    EXPECT_EQ(s.at("enhanced_bdd"), "passed");
}

TEST_F(CliTest, DetectPlantedAdditive) {
    const GridCase g = testing_support::bundled("rts24");
    const JacobianSet jac = build_jacobian(g);
    const Trajectory tr = generate_trajectory(g, jac, TrajectoryConfig{});
    const CMatrix W = measure(tr.X, jac, 0.0, 0);
    const linalg::Svd f = linalg::svd(W, Eigen::ComputeThinU);
    const CMatrix U = f.U.leftCols(linalg::numerical_rank(W));
    CVector a = testing_support::random_complex(4, W.rows(), 1).col(0);
    a -= U * (U.adjoint() * a);
    a *= 5.0 * tr.coefficients.cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff();
    fs::create_directories(dir_ / "add");
    write_matrix_csv(dir_ / "add" / "Wbar.csv", {W + a * jac.H_bar.col(13).transpose(), jac.index.labels()});
    const CliRun r = fdilab_cli({"detect", "--out", path("add"), "--detectors", "lrd"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto s = summary(dir_ / "add" / "detect_summary.txt");
    EXPECT_EQ(s.at("lrd_support"), "14");
    EXPECT_EQ(s.count("conventional_bdd"), 0u);
    EXPECT_EQ(slurp(dir_ / "add" / "support.txt").substr(0, 9), "state 14\n");
}

TEST_F(CliTest, DetectNonFiniteInput) {
    const JacobianSet jac = build_jacobian(testing_support::bundled("case4"));
    std::ofstream(path("nan.csv")) << "V1,V4,I1-2,I4-3\n1+0j,nan,0+0j,1+0j\n";
    const CliRun r = fdilab_cli({"detect", "--case", "case4", "--measurements", path("nan.csv"), "--detectors",
                              "lrd", "--out", path("o")});
    EXPECT_EQ(r.code, 4) << r.err;
}

TEST_F(CliTest, DetectRejectsWrongLabels) {
    std::ofstream(path("w.csv")) << "V1,V2,I1-2,I4-3\n1+0j,1+0j,0+0j,1+0j\n";
    EXPECT_EQ(fdilab_cli({"detect", "--case", "case4", "--measurements", path("w.csv"), "--out", path("o")}).code,
              2);
    EXPECT_EQ(fdilab_cli({"detect", "--case", "case4", "--measurements", path("w.csv"), "--detectors", "magic",
                          "--out", path("o")})
                  .code,
              2);
}

TEST_F(CliTest, DetectNonConvergenceWarns) {
    ASSERT_EQ(fdilab_cli({"simulate", "--out", path("s")}).code, 0);
    const CliRun r = fdilab_cli({"detect", "--out", path("s"), "--max-iter", "2"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.err.find("warning"), std::string::npos);
    EXPECT_EQ(summary(dir_ / "s" / "detect_summary.txt").at("lrd_converged"), "no");
}

TEST_F(CliTest, ReportEmptyDirectory) {
    const CliRun r = fdilab_cli({"report", "--out", path("")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(dir_ / "report.csv"),
              "run,attack,targets,conventional,enhanced,lrd_support,lrd_l12_norm,gaps\n");
}

TEST_F(CliTest, ReportThreeScenarios) {
    const fs::path root = dir_ / "runs";
    ASSERT_EQ(fdilab_cli({"simulate", "--out", (root / "a_clean").string()}).code, 0);
    ASSERT_EQ(fdilab_cli({"attack", "--mult", "--bus", "4", "--phase", "0.2", "--out", (root / "b_bus4").string()}).code, 0);
    ASSERT_EQ(fdilab_cli({"attack", "--mult", "--bus", "16", "--phase", "0.3", "--out", (root / "c_bus16").string()}).code, 0);
    for (const char* d : {"a_clean", "b_bus4", "c_bus16"})
        ASSERT_EQ(fdilab_cli({"detect", "--out", (root / d).string(), "--max-iter", "300"}).code, 0);
    fs::create_directories(root / "d_partial");
    std::ofstream(root / "d_partial" / "attack_summary.txt") << "kind=additive\ntargets=5\n";

    const CliRun first = fdilab_cli({"report", "--out", root.string()});
    ASSERT_EQ(first.code, 0) << first.err;
    const std::string csv = slurp(root / "report.csv");
    const CliRun second = fdilab_cli({"report", "--out", root.string()});
    EXPECT_EQ(first.out, second.out);
    EXPECT_EQ(csv, slurp(root / "report.csv"));

    std::istringstream in(csv);
    std::vector<std::string> rows;
    for (std::string l; std::getline(in, l);) rows.push_back(l);
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_TRUE(rows[1].starts_with("a_clean,none,-,passed,passed,none,")) << rows[1];
    EXPECT_TRUE(rows[2].starts_with("b_bus4,multiplicative,4,passed,passed,none,")) << rows[2];
    EXPECT_TRUE(rows[3].starts_with("c_bus16,multiplicative,16,passed,flagged")) << rows[3];
    EXPECT_EQ(rows[4], "d_partial,additive,5,-,-,-,-,detect_summary");
}
