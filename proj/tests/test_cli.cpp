#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "segvote/cli.hpp"
#include "segvote/dataset_io.hpp"

using namespace segvote;

namespace {

struct Run {
  int code;
  std::string out;
  std::string log;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, log;
  const int code = run_cli(args, out, log);
  return {code, out.str(), log.str()};
}

std::string body(const std::string& out) {
  std::istringstream in(out);
  std::string line, rest;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) != 0) rest += line + "\n";
  }
  return rest;
}

std::string tmp(const std::string& name) { return (oracle::tmp_dir() / ("cli_" + name)).string(); }

}  // namespace

TEST_CASE("help exits 0") {
  const auto r = run({"--help"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("simulate") != std::string::npos);
  CHECK(run({"simulate", "--help"}).code == kExitOk);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run({}).code == kExitConfig);
  CHECK(run({"frobnicate"}).code == kExitConfig);
  CHECK(run({"simulate", "--model", "z"}).code == kExitConfig);
  CHECK(run({"simulate", "--model", "a", "--d", "10", "--rule", "seg", "--c", "3"}).code ==
        kExitConfig);
  CHECK(run({"simulate", "--model", "a", "--rho", "0.7"}).code == kExitConfig);
  CHECK(run({"rate", "--d-grid", "1:2"}).code == kExitConfig);
}

TEST_CASE("simulate echoes its configuration and is a pure function of its arguments") {
  const std::vector<std::string> args{"simulate", "--model", "b", "--d",      "200",
                                      "--l",      "10",      "--p", "0.02",   "--K",
                                      "3",        "--rule",  "seg", "--c",    "20",
                                      "--trials", "50",      "--seed", "4",   "--threads", "1"};
  const auto a = run(args);
  REQUIRE(a.code == kExitOk);
  CHECK(a.out.rfind("# segvote simulate\n", 0) == 0);
  CHECK(a.out.find("# K: 3\n") != std::string::npos);
  CHECK(a.out.find("threads") == std::string::npos);
  CHECK(a.log.find("threads=1") != std::string::npos);
  const auto j = nlohmann::json::parse(body(a.out));
  CHECK(j["results"]["estimate"]["trials"] == 50);

  auto more = args;
  more.back() = "4";
  const auto b = run(more);
  CHECK(b.out == a.out);
}

TEST_CASE("model C and the csv format") {
  const auto r = run({"simulate", "--model", "c", "--d", "100", "--l", "10", "--p", "0.05",
                      "--a", "2", "--amp-law", "exp", "--rule", "coord", "--trials", "20",
                      "--format", "csv"});
  REQUIRE(r.code == kExitOk);
  CHECK(body(r.out).rfind("model,rule,c,k,", 0) == 0);
  CHECK(r.out.find("# amp_law: exp") != std::string::npos);
}

TEST_CASE("--out writes the file and reports it") {
  const auto path = tmp("sim.json");
  const auto r = run({"simulate", "--model", "a", "--d", "20", "--rule", "euclid", "--trials",
                      "10", "--out", path});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("# wrote " + path) != std::string::npos);
  CHECK(std::filesystem::file_size(path) > 0);
  CHECK(run({"simulate", "--model", "a", "--d", "20", "--rule", "euclid", "--trials", "10",
             "--out", tmp("missing/dir.json")})
            .code == kExitIo);
}

TEST_CASE("rate --assert exits 3 when the slope misses") {
  // Tiny grid and trial count: the fit is far from the asymptotic rate.
  const auto r = run({"rate", "--rho", "0.3", "--rule", "euclid", "--d-grid", "2:4:2",
                      "--trials", "200", "--tolerance", "0.01", "--assert"});
  CHECK(r.code == kExitVerdict);
  const auto ok = run({"rate", "--rho", "0.3", "--rule", "euclid", "--d-grid", "2:4:2",
                       "--trials", "200"});
  CHECK(ok.code == kExitOk);
}

TEST_CASE("regimes and sweep-nu") {
  const auto r = run({"regimes", "--model", "b", "--d", "100", "--l", "10", "--p", "0.05",
                      "--trials", "20"});
  REQUIRE(r.code == kExitOk);
  CHECK(nlohmann::json::parse(body(r.out))["results"]["rules"].size() == 3);
  CHECK(run({"regimes", "--model", "a"}).code == kExitConfig);

  // near_zero = 0 cannot hold, so --assert fails
  CHECK(run({"regimes", "--model", "b", "--d", "100", "--l", "10", "--p", "0.05", "--trials",
             "20", "--near-zero", "0", "--assert"})
            .code == kExitVerdict);

  const auto s = run({"sweep-nu", "--d", "100", "--l", "10", "--p", "0.05", "--nu-grid", "1,2",
                      "--rules", "seg,euclid", "--trials", "10", "--format", "csv"});
  REQUIRE(s.code == kExitOk);
  CHECK(body(s.out).rfind("nu,rule,c,trials,", 0) == 0);
  CHECK(s.out.find("# M: 2") != std::string::npos);
}

TEST_CASE("generate, split and bench") {
  const auto train = tmp("train.segf");
  const auto test = tmp("test.csv");
  const auto g = run({"generate", "--model", "b", "--d", "100", "--l", "10", "--p", "0.02",
                      "--train-per-class", "3", "--test-per-class", "5", "--seed", "2",
                      "--train-out", train, "--test-out", test});
  REQUIRE(g.code == kExitOk);
  CHECK(load_dataset(train).size() == 6);
  CHECK(load_dataset(test).size() == 10);

  const auto b = run({"bench", "--train", train, "--test", test, "--segments", "1,3,10,100",
                      "--k", "1", "--dataset", "toy"});
  REQUIRE(b.code == kExitOk);
  const auto table = body(b.out);
  CHECK(table.rfind("dataset,c,k,accuracy\n", 0) == 0);
  CHECK(table.find("toy,10,1,") != std::string::npos);
  CHECK(table.find("toy,3,1,") == std::string::npos);
  CHECK(b.log.find("skipped c=3") != std::string::npos);

  const auto s = run({"split", "--input", test, "--test-fraction", "0.4", "--train-out",
                      tmp("a.segf"), "--test-out", tmp("b.segf")});
  REQUIRE(s.code == kExitOk);
  CHECK(s.out.find("# test_rows: 4") != std::string::npos);
}

TEST_CASE("I/O failures exit 2") {
  CHECK(run({"bench", "--train", tmp("nope.segf"), "--test", tmp("nope.segf")}).code == kExitIo);
  const auto empty = tmp("empty.segf");
  std::ofstream(empty).close();
  CHECK(run({"split", "--input", empty, "--train-out", tmp("x.segf"), "--test-out",
             tmp("y.segf")})
            .code == kExitIo);
  CHECK(run({"bench", "--train"}).code == kExitConfig);
}
