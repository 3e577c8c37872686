#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oracle_values.hpp"
#include "thetabound/cli.hpp"

using namespace thetabound;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string channel(const std::string& name) { return std::string(THETABOUND_CHANNEL_DIR) + "/" + name; }

double value_line(const std::string& out) {
    std::istringstream is(out);
    std::string key;
    while (is >> key)
        if (key == "value") {
            double v;
            is >> v;
            return v;
        }
    return NAN;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("thetabound_test_" + name);
}

}  // namespace

TEST(Cli, ThetaBsc) {
    const auto r = run({"theta", "--channel", channel("bsc01.json"), "--rho", "1"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(value_line(r.out), 0.223144, 1e-6);
}

TEST(Cli, ThetaIdentity) {
    const auto r = run({"theta", "--channel", channel("identity2.json"), "--rho", "5"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NEAR(value_line(r.out), std::log(2.0), 1e-6);
}

TEST(Cli, ThetaPentagonLargeRho) {
    const auto r = run({"theta", "--channel", channel("pentagon.json"), "--rho", "1e6"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NEAR(value_line(r.out), 0.8047, 1e-4);
}

TEST(Cli, BuiltInChannelsAndBits) {
    const auto r = run({"theta", "--channel", "bsc:0.1", "--rho", "1", "--bits"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NEAR(value_line(r.out), 0.2231435513142097 / std::log(2.0), 1e-6);
    EXPECT_NE(r.out.find("bits"), std::string::npos);
}

TEST(Cli, ThetaWeighted) {
    const auto r = run({"theta-weighted", "--channel", channel("three_input.json"), "--rho", "3", "--Q", "0.5,0.3,0.2"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(value_line(r.out), oracle_values::kW3WeightedRho3, 1e-6);
    EXPECT_EQ(run({"theta-weighted", "--channel", "bsc:0.1", "--rho", "1", "--Q", "0.5,0.6"}).code, 2);
    EXPECT_EQ(run({"theta-weighted", "--channel", "bsc:0.1", "--rho", "1", "--Q", "0.2,0.3,0.5"}).code, 2);
}

TEST(Cli, CertificateRoundTripsThroughAudit) {
    const auto path = temp_file("cert.json");
    const auto r = run({"theta", "--channel", channel("three_input.json"), "--rho", "2", "--cert", path.string()});
    ASSERT_EQ(r.code, 0);
    std::ifstream in(path);
    const auto doc = io::json::parse(in);
    const ThetaCertificate c = io::certificate_from_json(doc);
    const auto rep = audit(c, gram(io::load_channel(channel("three_input.json"))));
    EXPECT_TRUE(rep.ok());
    EXPECT_EQ(io::certificate_to_json(c), doc);
    std::filesystem::remove(path);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"nonsense"}).code, 2);
    EXPECT_EQ(run({"theta", "--rho", "1"}).code, 2);
    EXPECT_EQ(run({"theta", "--channel", "bsc:0.1", "--rho", "0.5"}).code, 2);
    EXPECT_EQ(run({"theta", "--channel", "/no/such/file.json", "--rho", "1"}).code, 2);
    EXPECT_EQ(run({"theta", "--channel", "bsc:abc", "--rho", "1"}).code, 2);
    const auto help = run({"--help"});
    EXPECT_EQ(help.code, 0);
    EXPECT_NE(help.out.find("bound-curve"), std::string::npos);
}

TEST(Cli, MalformedChannelNamesRow) {
    const auto path = temp_file("bad.json");
    std::ofstream(path) << R"({"W": [[0.5, 0.5], [0.7, 0.7]]})";
    const auto r = run({"theta", "--channel", path.string(), "--rho", "1"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("row 1"), std::string::npos);
    std::ofstream(path) << "{not json";
    EXPECT_EQ(run({"theta", "--channel", path.string(), "--rho", "1"}).code, 2);
    std::filesystem::remove(path);
}

TEST(Cli, BoundCurveCsv) {
    const auto r = run({"bound-curve", "--channel", "bsc:0.1", "--R-grid", "0.2,0.4", "--rho-grid", "1,1e4"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream is(r.out);
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, io::kCurveHeader);
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
    }
    EXPECT_EQ(rows, 2);
}

TEST(Cli, BoundCurveNoneRowsAndFileOutput) {
    const auto path = temp_file("curve.csv");
    const auto r = run({"bound-curve", "--channel", "bsc:0.1", "--R-grid", "1e-6", "--rho-grid", "1", "--out",
                        path.string()});
    ASSERT_EQ(r.code, 0);
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(row, "9.9999999999999995e-07,inf,,,,");
    std::filesystem::remove(path);
}

TEST(Cli, BoundCurveEmptyGridIsUsageError) {
    EXPECT_EQ(run({"bound-curve", "--channel", "bsc:0.1", "--R-grid", ""}).code, 2);
    EXPECT_EQ(run({"bound-curve", "--channel", "bsc:0.1", "--R-steps", "0"}).code, 2);
    EXPECT_EQ(run({"bound-curve", "--channel", "bsc:0.1", "--P", "1,0", "--R-grid", "0.2"}).code, 2);
}

TEST(Cli, VerifySuites) {
    EXPECT_EQ(run({"verify", "lemma1", "--trials", "10000", "--seed", "7"}).code, 0);
    EXPECT_EQ(run({"verify", "rowsum", "--trials", "2000"}).code, 0);
    const auto t = run({"verify", "theorem1", "--channel", channel("bsc01.json"), "--n", "3", "--M", "2", "--rho", "1"});
    EXPECT_EQ(t.code, 0) << t.err;
    EXPECT_NE(t.out.find("checked 28"), std::string::npos);
    EXPECT_EQ(run({"verify", "closedform"}).code, 0);
    EXPECT_EQ(run({"verify", "bogus"}).code, 2);
    EXPECT_EQ(run({"verify", "theorem1", "--n", "3"}).code, 2);
}

TEST(Cli, VerifyReportsViolationsWithExitOne) {
    const auto r = run({"verify", "theorem1", "--channel", "bsc:0.1", "--n", "2", "--M", "2", "--theta", "0"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("violation:"), std::string::npos);
}

TEST(Cli, VerifyJsonSummary) {
    const auto r = run({"verify", "lemma1", "--trials", "100", "--json"});
    ASSERT_EQ(r.code, 0);
    const auto doc = io::json::parse(r.out);
    EXPECT_EQ(doc.at("checked").get<int>(), 100);
    EXPECT_EQ(doc.at("violations").get<int>(), 0);
    EXPECT_TRUE(doc.contains("tightest_instance"));
    const auto t = run({"verify", "theorem1", "--channel", "bsc:0.1", "--n", "3", "--M", "3", "--json"});
    EXPECT_EQ(io::json::parse(t.out).at("checked").get<int>(), 56);
}

TEST(Cli, GuardExceededIsRefused) {
    const auto r = run({"verify", "theorem1", "--channel", "bsc:0.1", "--n", "12", "--M", "4", "--theta", "0.1"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("refused"), std::string::npos);
}

TEST(Cli, BinaryTable) {
    const auto r = run({"binary", "--b01", "0.6", "--lambda", "0.11,0.5,0"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream is(r.out);
    std::string line;
    std::getline(is, line);
    std::getline(is, line);
    double lambda, th, rt, lim, rate;
    is >> lambda >> th >> rt >> lim >> rate;
    EXPECT_NEAR(rt / 0.1000196571, 1.0, 0.01);
    is >> lambda >> th >> rt >> lim >> rate;
    EXPECT_NEAR(lim, oracle_values::kZ06 / 2, 1e-6);
    is >> lambda >> th >> rt >> lim >> rate;
    EXPECT_EQ(th, 0.0);
    EXPECT_EQ(rt, 0.0);
    EXPECT_EQ(lim, 0.0);
    EXPECT_EQ(run({"binary"}).code, 2);
    EXPECT_EQ(run({"binary", "--b01", "0.6", "--Z", "0.5"}).code, 2);
    EXPECT_EQ(run({"binary", "--b01", "0"}).code, 2);
}

TEST(Cli, DeterministicOutput) {
    const std::vector<std::string> args{"theta", "--channel", "pentagon", "--rho", "3", "--seed", "9"};
    EXPECT_EQ(run(args).out, run(args).out);
}
