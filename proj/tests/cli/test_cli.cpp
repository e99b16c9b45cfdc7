#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "streamfid/jsonl.hpp"
#include "streamfid/simulate.hpp"

namespace streamfid {
namespace {

namespace fs = std::filesystem;

struct Result {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("streamfid_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  // Runs the tool inside the scratch directory with STREAMFID_SEED cleared.
  Result run(const std::string& args, const std::string& env = "") const {
    const auto out = path("stdout.txt");
    const auto err = path("stderr.txt");
    const std::string cmd = "cd '" + dir_.string() + "' && env -u STREAMFID_SEED " + env + " '" +
                            STREAMFID_CLI_PATH + "' " + args + " >'" + out.string() + "' 2>'" +
                            err.string() + "'";
    const int status = std::system(cmd.c_str());
    Result r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path dir_;
};

std::uint64_t count_events(const fs::path& p) {
  std::uint64_t n = 0;
  jsonl::for_each_record(p, [&](jsonl::Record&& r) { n += std::holds_alternative<Event>(r); });
  return n;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

TEST_F(Cli, SimulateIsByteIdenticalOnRerun) {
  ASSERT_EQ(run("simulate --duration 60 --rate 100 --seed 1 -o c.jsonl").exit_code, 0);
  ASSERT_EQ(run("simulate --duration 60 --rate 100 --seed 1 -o c2.jsonl").exit_code, 0);
  const auto a = slurp(path("c.jsonl"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(path("c2.jsonl")));
  ASSERT_EQ(run("simulate --duration 60 --rate 100 --seed 2 -o c3.jsonl").exit_code, 0);
  EXPECT_NE(a, slurp(path("c3.jsonl")));
}

TEST_F(Cli, SeedFallsBackToEnvironment) {
  ASSERT_EQ(run("simulate --duration 5 --seed 9 -o a.jsonl").exit_code, 0);
  ASSERT_EQ(run("simulate --duration 5 -o b.jsonl", "STREAMFID_SEED=9").exit_code, 0);
  EXPECT_EQ(slurp(path("a.jsonl")), slurp(path("b.jsonl")));
}

TEST_F(Cli, SimulateMatchesLibrary) {
  ASSERT_EQ(run("simulate --duration 30 --rate 50 --seed 4 -o c.jsonl").exit_code, 0);
  sim::GeneratorConfig c;
  c.duration_s = 30;
  c.base_rate = 50;
  c.seed = 4;
  EXPECT_EQ(jsonl::read_bundle(path("c.jsonl")).events(), sim::generate_stream(c).events());
}

TEST_F(Cli, RateLimitSampleConservesEvents) {
  ASSERT_EQ(run("simulate --duration 60 --rate 100 --seed 1 -o c.jsonl").exit_code, 0);
  ASSERT_EQ(
      run("sample --mode ratelimit --threshold 50 --anchor-ms 657 -i c.jsonl -o s.jsonl").exit_code,
      0);
  const auto s = jsonl::read_bundle(path("s.jsonl"));
  ASSERT_FALSE(s.messages().empty());
  EXPECT_EQ(s.event_count() + s.messages().back().cumulative_missed, count_events(path("c.jsonl")));

  const auto r = run("validate-ratelimit -i c.jsonl -i s.jsonl");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_GT(j["segments"].get<int>(), 0);
  EXPECT_EQ(j["median_ape"].get<double>(), 0.0);
  EXPECT_EQ(j["true_missing"], j["estimated_missing"]);
}

TEST_F(Cli, BernoulliSampleMatchesLibrary) {
  ASSERT_EQ(run("simulate --duration 20 --seed 3 -o c.jsonl").exit_code, 0);
  ASSERT_EQ(run("sample --mode bernoulli --rate 0.4 --seed 8 -i c.jsonl -o s.jsonl").exit_code, 0);
  const auto c = jsonl::read_bundle(path("c.jsonl"));
  EXPECT_EQ(jsonl::read_bundle(path("s.jsonl")).events(),
            sim::bernoulli_sample(c.events(), 0.4, 8));
}

TEST_F(Cli, EstimateMissingOnZipfFixture) {
  const auto complete = testing::zipf_population(100'000, 2.0, 10'000, 20240501);
  const auto sample = sim::bernoulli_sample(complete, 0.5272, 77);
  jsonl::write_bundle(path("c.jsonl"), StreamBundle(complete));
  jsonl::write_bundle(path("s.jsonl"), StreamBundle(sample));
  std::set<UserId> seen;
  for (const auto& e : sample) seen.insert(e.user_id);
  const double truth = 100'000.0 - static_cast<double>(seen.size());

  const auto r = run("estimate-missing -i s.jsonl --rate 0.5272 --key user");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  const double est = j["estimated_missing"].get<double>();
  EXPECT_LE(std::abs(est - truth) / truth, 0.02) << "estimate " << est << " truth " << truth;

  const auto with_truth = run("estimate-missing -i c.jsonl -i s.jsonl --rate 0.5272 --key user");
  ASSERT_EQ(with_truth.exit_code, 0) << with_truth.err;
  EXPECT_EQ(nlohmann::json::parse(with_truth.out)["true_missing"].get<double>(), truth);
}

TEST_F(Cli, ReportsCarryManifestAndRerunIdentically) {
  ASSERT_EQ(run("simulate --duration 120 --rate 80 --seed 5 -o c.jsonl").exit_code, 0);
  ASSERT_EQ(run("sample --mode ratelimit --threshold 40 -i c.jsonl -o s.jsonl").exit_code, 0);
  const std::vector<std::string> commands{
      "breakdown -i c.jsonl -i s.jsonl --by millisecond",
      "entity-stats -i c.jsonl -i s.jsonl --key hashtag",
      "rank -i c.jsonl -i s.jsonl --k 20 --granularity second",
      "graph bipartite -i s.jsonl",
      "graph cocluster -i c.jsonl --k 3 --seed 7",
      "graph retweet -i c.jsonl",
      "graph bowtie -i c.jsonl",
  };
  for (const auto& cmd : commands) {
    const auto a = run(cmd);
    ASSERT_EQ(a.exit_code, 0) << cmd << ": " << a.err;
    EXPECT_EQ(a.out, run(cmd).out) << cmd;
    const auto line = first_line(a.out);
    ASSERT_EQ(line.rfind("# manifest: ", 0), 0u) << cmd;
    const auto m = nlohmann::json::parse(line.substr(12));
    EXPECT_EQ(m["tool"], "streamfid");
    EXPECT_FALSE(m["version"].get<std::string>().empty());
    EXPECT_FALSE(m["inputs"].empty());
    EXPECT_TRUE(m["flags"].is_object());
  }
  const auto cocluster = run("graph cocluster -i c.jsonl --k 3 --seed 7");
  EXPECT_EQ(nlohmann::json::parse(first_line(cocluster.out).substr(12))["seed"], 7);

  const auto j = run("validate-ratelimit -i c.jsonl -i s.jsonl");
  EXPECT_EQ(nlohmann::json::parse(j.out)["manifest"]["command"], "validate-ratelimit");
}

TEST_F(Cli, CascadeWritesSummaryAndCcdfFiles) {
  ASSERT_EQ(run("simulate --duration 600 --rate 20 --seed 2 -o c.jsonl").exit_code, 0);
  ASSERT_EQ(run("sample --mode bernoulli --rate 0.5 --seed 3 -i c.jsonl -o s.jsonl").exit_code, 0);
  ASSERT_EQ(run("cascade -i c.jsonl -i s.jsonl -o out.json").exit_code, 0);
  const auto first = slurp(path("out.json"));
  const auto j = nlohmann::json::parse(first);
  EXPECT_LE(j["sample_cascades"].get<int>(), j["complete_cascades"].get<int>());
  EXPECT_LE(j["fully_observed"].get<int>(), j["sample_cascades"].get<int>());
  for (const auto& f : j["files"]) {
    const auto csv = slurp(path(f.get<std::string>()));
    EXPECT_NE(csv.find("\nx,ccdf\n"), std::string::npos) << f;
  }
  EXPECT_EQ(j["files"].size(), 5u);
  ASSERT_EQ(run("cascade -i c.jsonl -i s.jsonl -o out.json").exit_code, 0);
  EXPECT_EQ(first, slurp(path("out.json")));
}

TEST_F(Cli, FlowBetweenAssignments) {
  ASSERT_EQ(run("simulate --duration 300 --rate 20 --seed 6 -o c.jsonl").exit_code, 0);
  ASSERT_EQ(run("sample --mode bernoulli --rate 0.5 --seed 1 -i c.jsonl -o s.jsonl").exit_code, 0);
  ASSERT_EQ(run("graph bowtie -i c.jsonl -o bc.csv").exit_code, 0);
  ASSERT_EQ(run("graph bowtie -i s.jsonl -o bs.csv").exit_code, 0);
  const auto r = run("graph flow -i bc.csv -i bs.csv");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  // Six components times seven destination columns, plus header and manifest.
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 44);
  ASSERT_EQ(run("graph cocluster -i c.jsonl --k 2 -o cl.csv").exit_code, 0);
  EXPECT_EQ(run("graph flow -i bc.csv -i cl.csv").exit_code, 1);
  EXPECT_EQ(run("graph flow -i bc.csv -i c.jsonl").exit_code, 1);
}

TEST_F(Cli, MalformedInputExitsOneWithLineNumber) {
  std::ofstream(path("bad.jsonl")) << jsonl::to_line(testing::make_event(0, 0, 1)) << "\n"
                                   << jsonl::to_line(RateLimitMessage{999, 3}) << "\n"
                                   << "{\"id\":1,\"ts_ms\":oops}\n";
  for (const std::string cmd : {"sample --mode ratelimit -i bad.jsonl",
                                "estimate-missing -i bad.jsonl --rate 0.5"}) {
    const auto r = run(cmd);
    EXPECT_EQ(r.exit_code, 1) << cmd;
    EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
  }
  EXPECT_EQ(run("merge -i does_not_exist.jsonl").exit_code, 1);
}

TEST_F(Cli, FlagValidationExitsTwo) {
  ASSERT_EQ(run("simulate --duration 5 -o c.jsonl").exit_code, 0);
  for (const std::string cmd :
       {"sample --mode sometimes -i c.jsonl", "sample --mode ratelimit --anchor-ms 1000 -i c.jsonl",
        "sample --mode bernoulli -i c.jsonl", "simulate --duration -1",
        "estimate-missing -i c.jsonl", "breakdown -i c.jsonl -i c.jsonl --by weekday",
        "rank -i c.jsonl -i c.jsonl --format xml", "cascade -i c.jsonl -i c.jsonl",
        "cascade -i c.jsonl -i c.jsonl -o x.json --window-s -5", "no-such-command", ""}) {
    EXPECT_EQ(run(cmd).exit_code, 2) << cmd;
  }
}

}  // namespace
}  // namespace streamfid
