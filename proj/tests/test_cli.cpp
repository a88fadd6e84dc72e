#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "lcp_app.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = lcp::app::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lcp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static json load(const std::string& p) {
    std::ifstream f(p);
    return json::parse(f);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, GenWritesPlantedInstance) {
  const auto r = run({"gen", "--m", "20", "--n", "15", "--k", "8", "--eps", "0.5", "--seed", "3", "--out", path("i.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = load(path("i.json"));
  EXPECT_EQ(j["P"].size(), 20u);
  EXPECT_EQ(j["Q"].size(), 15u);
  EXPECT_EQ(j["truth"]["k"], 8);
  EXPECT_EQ(j["truth"]["pairs"].size(), 8u);
  EXPECT_DOUBLE_EQ(j["eps"].get<double>(), 0.5);
}

TEST_F(CliTest, GenToStdoutAndExact) {
  const auto r = run({"gen", "--m", "8", "--n", "6", "--k", "4", "--exact", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  for (const auto& p : j["P"])
    for (const auto& x : p) EXPECT_EQ(x.get<double>(), std::round(x.get<double>()));
  EXPECT_EQ(run({"gen", "--m", "8", "--n", "6", "--k", "4", "--exact", "--seed", "1"}).out, r.out);
}

TEST_F(CliTest, GenRejectsBadArguments) {
  EXPECT_EQ(run({"gen", "--m", "4", "--n", "6", "--k", "5"}).code, 2);
  EXPECT_EQ(run({"gen", "--eps", "-1"}).code, 2);
  EXPECT_EQ(run({"gen", "--bogus"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
}

TEST_F(CliTest, MatchAndVerifyRoundTrip) {
  ASSERT_EQ(run({"gen", "--m", "20", "--n", "15", "--k", "8", "--eps", "0.5", "--seed", "3", "--out", path("i.json")}).code, 0);
  const auto m = run({"match", "--instance", path("i.json"), "--algo", "da", "--out", path("r.json"), "--threads", "1"});
  ASSERT_EQ(m.code, 0) << m.err;
  const auto rep = load(path("r.json"));
  EXPECT_GE(rep["result"]["size"].get<std::size_t>(), 8u);
  EXPECT_LE(rep["result"]["residual"].get<double>(), 2.0);
  EXPECT_TRUE(rep["certificate"]["passed"].get<bool>());
  EXPECT_EQ(rep["algorithm"], "da");
  EXPECT_EQ(rep["instance_digest"].get<std::string>().size(), 16u);

  const auto v = run({"verify", "--instance", path("i.json"), "--report", path("r.json")});
  EXPECT_EQ(v.code, 0) << v.out;
  EXPECT_TRUE(json::parse(v.out)["passed"].get<bool>());

  EXPECT_EQ(run({"verify", "--instance", path("i.json"), "--report", path("r.json"), "--radius", "0"}).code, 4);

  auto tampered = rep;
  tampered["result"]["motion"]["translation"][0] = tampered["result"]["motion"]["translation"][0].get<double>() + 50.0;
  std::ofstream(path("t.json")) << tampered.dump();
  const auto bad = run({"verify", "--instance", path("i.json"), "--report", path("t.json")});
  EXPECT_EQ(bad.code, 4);
  EXPECT_FALSE(json::parse(bad.out)["violations"].empty());
}

TEST_F(CliTest, ExactAlgorithmsAgree) {
  ASSERT_EQ(run({"gen", "--m", "10", "--n", "10", "--k", "6", "--exact", "--seed", "2", "--out", path("e.json")}).code, 0);
  for (const char* algo : {"pose", "align", "ght", "ghash", "ght-pair", "da-exact"}) {
    const auto r = run({"match", "--instance", path("e.json"), "--algo", algo});
    ASSERT_EQ(r.code, 0) << algo << r.err;
    EXPECT_EQ(json::parse(r.out)["result"]["size"], 6) << algo;
  }
  const auto pig = run({"match", "--instance", path("e.json"), "--algo", "ght-pair", "--sampling", "pigeonhole", "--alpha", "2"});
  ASSERT_EQ(pig.code, 0) << pig.err;
  EXPECT_EQ(json::parse(pig.out)["result"]["size"], 6);
}

TEST_F(CliTest, XyzInputs) {
  std::ofstream(path("p.xyz")) << "# P\n0 0 0\n3 0 0\n0 4 0\n1 1 7\n";
  std::ofstream(path("q.xyz")) << "10 0 0\n13 0 0\n10 4 0\n11 1 7\n";
  const auto r = run({"match", "--p-file", path("p.xyz"), "--q-file", path("q.xyz"), "--algo", "pose"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["result"]["size"], 4);
  std::ofstream(path("bad.xyz")) << "1 2\n";
  EXPECT_EQ(run({"match", "--p-file", path("bad.xyz"), "--q-file", path("q.xyz")}).code, 2);
}

TEST_F(CliTest, ErrorExitCodes) {
  ASSERT_EQ(run({"gen", "--m", "10", "--n", "8", "--k", "5", "--eps", "0.1", "--noise", "0.1", "--seed", "4", "--out", path("i.json")}).code, 0);
  const auto small = run({"match", "--instance", path("i.json"), "--algo", "expander-da", "--degree", "100"});
  EXPECT_EQ(small.code, 2);
  EXPECT_EQ(json::parse(small.err)["error"], "DegreeTooSmall");
  EXPECT_EQ(run({"match", "--instance", path("i.json"), "--algo", "nope"}).code, 2);
  EXPECT_EQ(run({"match", "--instance", path("missing.json")}).code, 2);
  std::ofstream(path("c.json")) << R"({"eps":0,"P":[[0,0,0],[1,0,0],[0,1,0],[0,0,1]],"Q":[[0,0,0],[5,0,0],[0,7,0],[1,1,11]]})";
  const auto none = run({"match", "--instance", path("c.json"), "--algo", "pose"});
  EXPECT_EQ(none.code, 3);
  EXPECT_EQ(json::parse(none.err)["error"], "NoCongruentTriplets");
}

TEST_F(CliTest, SeedFromEnvironment) {
  ::setenv("LCP_MATCH_SEED", "17", 1);
  const auto a = run({"gen", "--m", "10", "--n", "8", "--k", "4"});
  ::unsetenv("LCP_MATCH_SEED");
  const auto b = run({"gen", "--m", "10", "--n", "8", "--k", "4", "--seed", "17"});
  const auto c = run({"gen", "--m", "10", "--n", "8", "--k", "4", "--seed", "18"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
}

TEST_F(CliTest, BenchCsv) {
  const auto r = run({"bench", "--suite", "exact", "--sizes", "8", "--seeds", "1", "--threads", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "algo,m,n,k,eps,sampling,time_ms,size,residual,seed");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 9);
  }
  EXPECT_EQ(rows, 6);
  EXPECT_EQ(run({"bench", "--suite", "bogus"}).code, 2);
}
