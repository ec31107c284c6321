#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cllb/cli.hpp"
#include "cllb/io.hpp"

namespace {
struct Result {
  int code;
  std::string out, err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cllb::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path tmp(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cllb_test_" + name);
}
}  // namespace

TEST_CASE("constants") {
  const auto r = call({"constants", "--alpha", "2", "--hurst", "0.5"});
  CHECK(r.code == 0);
  CHECK(r.out.find("theta=0.25\n") != std::string::npos);
  CHECK(r.out.find("c21=0.398942") != std::string::npos);
  CHECK(r.out.find("kappa=0.751125") != std::string::npos);
  CHECK(r.out.find("# cllb ") == 0);
  CHECK(r.out.find("# alpha=2") != std::string::npos);
}

TEST_CASE("exit codes") {
  const auto bad = call({"constants", "--alpha", "3"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("kind=validation") != std::string::npos);
  CHECK(bad.err.find("(1,2]") != std::string::npos);
  CHECK(call({}).code == 1);
  CHECK(call({"frobnicate"}).code == 1);
  CHECK(call({"constants", "--alpha", "two"}).code == 1);
  CHECK(call({"constants", "--unknown"}).code == 1);
  CHECK(call({"constants", "--help"}).code == 0);
}

TEST_CASE("config file with overrides") {
  const auto cfg = tmp("cfg.txt");
  {
    std::ofstream f(cfg);
    f << "# model\nalpha = 1.5\nhurst = 0.6\n";
  }
  const auto r = call({"constants", "--config", cfg.string(), "--hurst", "0.8"});
  CHECK(r.code == 0);
  CHECK(r.out.find("# alpha=1.5") != std::string::npos);
  CHECK(r.out.find("# hurst=0.8") != std::string::npos);
  {
    std::ofstream f(cfg);
    f << "alpha\n";
  }
  CHECK(call({"constants", "--config", cfg.string()}).code != 0);
}

TEST_CASE("cov-verify") {
  const auto r = call({"cov-verify", "--alpha", "1.5", "--hurst", "0.75"});
  CHECK(r.code == 0);
  CHECK(r.out.find("alpha,H,s,t,closed,quadrature,rel_err") != std::string::npos);
}

TEST_CASE("sample csv and binary") {
  const auto r = call({"sample", "--grid", "uniform:1:4", "--count", "3", "--seed", "5"});
  CHECK(r.code == 0);
  CHECK(r.out.find("path,t=0.25,t=0.5,t=0.75,t=1\n") != std::string::npos);
  const auto bin = tmp("paths.bin");
  const auto b = call({"sample", "--grid", "list:0.5,1", "--count", "10", "--format", "binary", "--out", bin.string()});
  CHECK(b.code == 0);
  std::ifstream f(bin, std::ios::binary);
  const auto m = cllb::io::read_binary(f);
  CHECK(m.rows() == 10);
  CHECK(m.cols() == 2);
  CHECK(std::filesystem::exists(bin.string() + ".meta"));
  CHECK(call({"sample", "--grid", "bogus:1"}).code == 2);
  CHECK(call({"sample", "--grid", "list:0.5,0.2"}).code == 2);
}

TEST_CASE("smallball is reproducible") {
  const auto a = tmp("sb_a.csv"), b = tmp("sb_b.csv");
  const std::vector<std::string> base{"smallball", "--process", "fbm", "--hurst-index", "0.5", "--seed", "7",
                                      "--count", "20000", "--grid-size", "256"};
  auto args_a = base, args_b = base;
  args_a.insert(args_a.end(), {"--out", a.string(), "--workers", "1"});
  args_b.insert(args_b.end(), {"--out", b.string(), "--workers", "3"});
  REQUIRE(call(args_a).code == 0);
  REQUIRE(call(args_b).code == 0);
  std::ifstream fa(a), fb(b);
  std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
  // headers differ only in the out/workers lines
  auto body = [](const std::string& s) { return s.substr(s.find("epsilon,prob")); };
  CHECK(body(sa) == body(sb));
  CHECK(sa.find("# fit exponent=") != std::string::npos);
}

TEST_CASE("lil summary") {
  const auto r = call({"lil", "--count", "20", "--n-max", "6", "--grid-points", "128", "--lambda-hat", "6",
                       "--no-refine", "--delta", "3"});
  CHECK(r.code == 0);
  CHECK(r.out.find("realization,n,sup_u_over_psi") != std::string::npos);
  CHECK(r.out.find("\"in_bracket\"") != std::string::npos);
  CHECK(r.out.find("\"lemma\"") != std::string::npos);
  CHECK(call({"lil", "--n-min", "0", "--lambda-hat", "6"}).code == 2);
}
