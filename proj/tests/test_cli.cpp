#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "frdim/io.hpp"
#include "support.hpp"

using namespace frdim;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "frdim");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"bogus"}).code == cli::kUsage);
  CHECK(run({"simulate", "ba"}).code == cli::kUsage);
  test::TempDir dir;
  CHECK(run({"simulate", "nope", "-o", (dir / "x.pseq").string()}).code == cli::kUsage);
  CHECK(run({"simulate", "dirichlet", "--k", "5", "-o", (dir / "x.pseq").string()}).code ==
        cli::kUsage);
  CHECK(run({"--help"}).code == cli::kOk);
}

TEST_CASE("simulate, analyze, curve, reduce, validate") {
  test::TempDir dir;
  const auto ba = (dir / "ba.pseq").string();
  auto r = run({"simulate", "ba", "--n", "600", "--seed", "7", "-o", ba});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.err.find("config: ") != std::string::npos);
  {
    std::ifstream side(ba + ".json");
    const auto j = nlohmann::json::parse(side);
    CHECK(j["recommended_eta"] == 1.0);
    CHECK(j["rows"] == 600);
  }

  r = run({"analyze", ba, "--eta", "1.0", "--m-groups", "100", "--seed", "7"});
  REQUIRE(r.code == cli::kOk);
  const auto est = nlohmann::json::parse(r.out);
  CHECK(est["nu_hat"].get<double>() > 0.0);
  CHECK(est["m_groups"] == 100);
  CHECK(est["seed"] == 7);
  CHECK(est["n_pairs"] == 599 * 598 / 2);

  // Same arguments, same bytes.
  CHECK(run({"analyze", ba, "--eta", "1.0", "--m-groups", "100", "--seed", "7", "--threads",
             "1"})
            .out == r.out);

  r = run({"curve", ba, "--eta", "1.0"});
  REQUIRE(r.code == cli::kOk);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') >= 5);

  const auto red = (dir / "red.pseq").string();
  REQUIRE(run({"reduce", ba, "--m-groups", "10", "-o", red}).code == cli::kOk);
  CHECK(io::read_pseq_header(red).dim == 10);

  r = run({"validate", red});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("0 violation") != std::string::npos);

  const auto bad = (dir / "bad.jsonl").string();
  std::ofstream(bad) << "[0.5, 0.6]\n[0.5, 0.5]\n";
  r = run({"validate", bad});
  CHECK(r.code == cli::kData);
  CHECK(r.out.find("row 0") != std::string::npos);
  CHECK(run({"analyze", bad}).code == cli::kData);
  CHECK(run({"analyze", bad, "--renormalize", "--no-filter"}).code == cli::kData);  // 2 rows
}

TEST_CASE("empty after filter exits 2 naming the filter") {
  test::TempDir dir;
  const auto peaked = (dir / "peaked.jsonl").string();
  {
    std::ofstream f(peaked);
    for (int i = 0; i < 200; ++i) f << "[0.9, 0.05, 0.05]\n[0.1, 0.8, 0.1]\n";
  }
  const auto r = run({"analyze", peaked});
  CHECK(r.code == cli::kData);
  CHECK(r.err.find("filter") != std::string::npos);
}

TEST_CASE("other processes") {
  test::TempDir dir;
  const auto p = (dir / "p.pseq").string();
  CHECK(run({"simulate", "dirichlet", "--k", "50", "--alpha-sum", "5", "--n", "20", "-o", p})
            .code == cli::kOk);
  CHECK(run({"simulate", "uniform", "--k", "50", "--n", "20", "--dtype", "f32", "-o", p}).code ==
        cli::kOk);
  CHECK(io::read_pseq_header(p).dtype == io::Dtype::kF32);
  CHECK(run({"simulate", "markov", "--k", "4", "--n", "20", "-o", p}).code == cli::kOk);
  const auto t = (dir / "t.json").string();
  std::ofstream(t) << R"({"transition": [[0.5, 0.5], [0.1, 0.9]], "initial": [1, 0]})";
  CHECK(run({"simulate", "markov", "--transition", t, "--n", "20", "-o", p}).code == cli::kOk);
  CHECK(io::read_pseq(p).row(0)[0] == 0.5);
  CHECK(run({"simulate", "fapa", "--kappa", "0.1", "--n", "50", "--m-groups", "8", "-o", p})
            .code == cli::kOk);
  CHECK(io::read_pseq_header(p).dim == 8);
}

TEST_CASE("verify passes") {
  const auto r = run({"verify", "--seed", "1"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("PASS") != std::string::npos);
}
