#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + DPI_CLI_PATH + std::string(" ") + args + " 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return {-1, ""};
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    const int status = ::pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) v.push_back(l);
    return v;
}

std::vector<std::string> fields(const std::string& row) {
    std::vector<std::string> v;
    std::istringstream is(row);
    for (std::string f; std::getline(is, f, ',');) v.push_back(f);
    return v;
}

// Data rows after the metadata block and the column header.
std::vector<std::vector<std::string>> data_rows(const std::string& out) {
    std::vector<std::vector<std::string>> rows;
    bool header_seen = false;
    for (const auto& l : lines(out)) {
        if (l.starts_with("#")) continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        rows.push_back(fields(l));
    }
    return rows;
}

std::string strip_comments(const std::string& out) {
    std::string s;
    for (const auto& l : lines(out))
        if (!l.starts_with("#")) s += l + '\n';
    return s;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("dpi_cli_test_" + name)).string();
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("v2 --no-such-flag").code, 1);
    EXPECT_EQ(run("v2 --A 10 --epsilon-D 0.1").code, 1);
    EXPECT_EQ(run("v2 --eps-max 2 --T 1").code, 1);
    EXPECT_EQ(run("v2 --m -1").code, 1);
    EXPECT_EQ(run("paths --variant smooth").code, 1);
}

TEST(Cli, V2MetadataAndRows) {
    const auto r = run("v2 --alpha 2.1 --A 10 --T 1 --m 1 --hbar 1 --eps-min 1e-3 --eps-max 0.5 --points 4 --log");
    ASSERT_EQ(r.code, 0);
    const auto ls = lines(r.out);
    ASSERT_FALSE(ls.empty());
    EXPECT_EQ(ls[0], "# dpi v2 --alpha 2.1 --A 10 --T 1 --m 1 --hbar 1 --eps-min 1e-3 --eps-max 0.5 --points 4 --log");
    EXPECT_NE(r.out.find("# params: m=1 hbar=1 T=1 alpha=2.1 A=10"), std::string::npos);
    EXPECT_NE(r.out.find("# tol=1e-10 seed=1"), std::string::npos);
    EXPECT_NE(r.out.find("\neps,v2,n_terms,tail_bound,model\n"), std::string::npos);
    const auto rows = data_rows(r.out);
    ASSERT_EQ(rows.size(), 8u);
    EXPECT_EQ(rows[0][4], "feynman");
    EXPECT_EQ(rows[1][4], "differentiable");
    EXPECT_NEAR(std::stod(rows[0][1]), 999.0, 1e-6);
}

TEST(Cli, DefaultsStayWithTheirSubcommand) {
    const auto r = run("v2 --points 2");
    ASSERT_EQ(r.code, 0);
    const auto rows = data_rows(r.out);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(std::stod(rows[0][0]), 1e-4);
    EXPECT_EQ(std::stod(rows[3][0]), 0.5);
    EXPECT_EQ(run("spectrum --scan T").code, 1);
    EXPECT_NE(run("commutator --points 2").out.find("model=differentiable"), std::string::npos);
}

TEST(Cli, UnrestrictedLimitColumnsAgree) {
    const auto r = run("v2 --A 1e12 --eps-min 1e-3 --eps-max 0.5 --points 3 --log");
    ASSERT_EQ(r.code, 0);
    const auto rows = data_rows(r.out);
    ASSERT_EQ(rows.size(), 6u);
    for (std::size_t i = 0; i < rows.size(); i += 2) {
        const double f = std::stod(rows[i][1]);
        const double d = std::stod(rows[i + 1][1]);
        EXPECT_NEAR(d / f, 1.0, 1e-6);
    }
}

TEST(Cli, ConvergenceFailureExitCode) {
    EXPECT_EQ(run("v2 --model feynman --eps-min 0.1 --eps-max 0.1 --points 1 --tol 1e-30").code, 2);
}

TEST(Cli, SpectrumFixedTermsAndOmegaFit) {
    const auto r = run("spectrum --epsilon-D 0.1 --alpha 2.1 --omega 1 --n-terms 100000 --min 0.2 --max 1 --points 3");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("# truncation: n_terms=100000"), std::string::npos);
    const auto rows = data_rows(r.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_NEAR(std::stod(rows[2][2]), 0.0034270360976, 1e-12);

    const std::string fit = temp_path("fit.json");
    const auto s = run("spectrum --epsilon-D 0.1 --scan omega --min 100 --max 10000 --points 6 --n-terms 100000 --json-out " + fit);
    ASSERT_EQ(s.code, 0);
    std::ifstream in(fit);
    const auto j = nlohmann::json::parse(in);
    EXPECT_LE(j["fit"]["residual"].get<double>(), 0.05);
    EXPECT_LT(j["fit"]["b"].get<double>(), 0.5);
    std::filesystem::remove(fit);
}

TEST(Cli, UnitarityVerdict) {
    const std::string path = temp_path("verdict.json");
    const auto r = run("unitarity --epsilon-D 0.1 --omega 1 --n-terms 100000 --T-min 0.2 --T-max 5 --points 6 --json-out " + path);
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("# verdict: unitary-compatible"), std::string::npos);
    std::ifstream in(path);
    const auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j["verdict"], "unitary-compatible");
    EXPECT_LE(j["max_rel_deviation"].get<double>(), 0.1);
    std::filesystem::remove(path);

    const auto fine = run("unitarity --epsilon-D 0.1 --omega 1 --n-terms 100000 --T-min 0.01 --T-max 0.05 --points 5");
    EXPECT_NE(fine.out.find("# verdict: non-unitary"), std::string::npos);
}

TEST(Cli, PathsExports) {
    const auto c = run("paths --N 16 --seed 4");
    ASSERT_EQ(c.code, 0);
    EXPECT_EQ(data_rows(c.out).size(), 16u);
    const auto t = run("paths --N 64 --variant twin --format trajectory --grid-points 11 --seed 4");
    ASSERT_EQ(t.code, 0);
    EXPECT_NE(t.out.find("# j_D=8"), std::string::npos);
    EXPECT_NE(t.out.find("\nt,x\n"), std::string::npos);
    EXPECT_EQ(data_rows(t.out).size(), 11u);
}

TEST(Cli, CommutatorScan) {
    const auto r = run("commutator --eps-min 1e-4 --eps-max 0.3 --points 3 --log");
    ASSERT_EQ(r.code, 0);
    const auto rows = data_rows(r.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0][2], "sub_eps_D");
    EXPECT_EQ(rows[2][2], "super_eps_D");
}

TEST(Cli, CasimirStandardAndBound) {
    const auto r = run("casimir --model standard");
    ASSERT_EQ(r.code, 0);
    const auto rows = data_rows(r.out);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_NEAR(std::stod(rows[0][1]) / (0.5 * M_PI), -1.0 / 12.0, 1e-4);
    EXPECT_EQ(rows[0][2], "standard");

    const auto b = run("casimir --bound --L-exp 1e-7 --rel-error 0.01 --c 3e8");
    ASSERT_EQ(b.code, 0);
    EXPECT_TRUE(b.out.starts_with("# dpi casimir --bound"));
    const auto j = nlohmann::json::parse(strip_comments(b.out));
    EXPECT_GE(j["epsilon_D_order"].get<double>(), 1e-16);
    EXPECT_LE(j["epsilon_D_order"].get<double>(), 1e-14);
}

TEST(Cli, OracleRows) {
    const auto r = run("oracle --eps 0.05 --modes 50 --samples 4000 --seed 2");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("\nquantity,mean,stderr,n_samples,seed\n"), std::string::npos);
    EXPECT_NE(r.out.find("# rng: mt19937_64"), std::string::npos);
    const auto rows = data_rows(r.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0][0], "v2_mc(eps=0.05)");
    EXPECT_EQ(rows[0][4], "2");
}

TEST(Cli, ByteIdenticalAcrossRunsAndThreadCaps) {
    const std::string args = "oracle --quantity moments --mode 1,3 --samples 3000 --seed 17";
    const auto a = run(args, "DPI_MAX_THREADS=1");
    const auto b = run(args, "DPI_MAX_THREADS=4");
    const auto c = run(args);
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out, c.out);
    EXPECT_NE(a.out, run("oracle --quantity moments --mode 1,3 --samples 3000 --seed 18").out);

    const std::string v2 = "v2 --eps-min 1e-3 --eps-max 0.4 --points 5 --log";
    EXPECT_EQ(run(v2, "DPI_MAX_THREADS=1").out, run(v2, "DPI_MAX_THREADS=3").out);
}

TEST(Cli, OutFileMatchesStandardOutput) {
    const std::string path = temp_path("paths.csv");
    const auto direct = run("paths --N 8 --seed 9");
    ASSERT_EQ(run("paths --N 8 --seed 9 --out " + path).code, 0);
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    // Only the recorded command line differs.
    auto drop_first = [](const std::string& s) { return s.substr(s.find('\n') + 1); };
    EXPECT_EQ(drop_first(ss.str()), drop_first(direct.out));
    std::filesystem::remove(path);
}
