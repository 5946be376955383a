#include <doctest.h>

#include "cli_support.hpp"

using namespace treemix::test;

namespace {

const char* kChain = R"({"format_version": 1, "alphabet_size": 2, "nodes": 3,
  "root_dist": [0.5, 0.5], "edges": [
    {"parent": 1, "child": 2, "kernel": [[0.9, 0.1], [0.2, 0.8]]},
    {"parent": 2, "child": 3, "kernel": [[0.7, 0.3], [0.4, 0.6]]}]})";

const char* kCycle = R"({"format_version": 1, "alphabet_size": 2, "nodes": 3,
  "root_dist": [0.5, 0.5], "edges": [
    {"parent": 1, "child": 2, "kernel": [[1, 0], [0, 1]]},
    {"parent": 2, "child": 3, "kernel": [[1, 0], [0, 1]]},
    {"parent": 3, "child": 1, "kernel": [[1, 0], [0, 1]]}]})";

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("exit codes") {
  ScratchDir dir;
  const auto chain = quoted(dir.write("chain.json", kChain));
  CHECK(run_cli("").exit_code == 1);
  CHECK(run_cli("frobnicate").exit_code == 1);
  CHECK(run_cli("eta " + chain + " --source sideways").exit_code == 1);
  CHECK(run_cli("inspect " + quoted(dir / "missing.json")).exit_code == 2);
  CHECK(run_cli("inspect " + quoted(dir.write("cycle.json", kCycle))).exit_code == 2);
  CHECK(run_cli("inspect " + chain).exit_code == 0);
  CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("inspect prints the tree shape") {
  ScratchDir dir;
  const auto r = run_cli("inspect " + quoted(dir.write("chain.json", kChain)));
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("width") != std::string::npos);
  CHECK(r.out.find("depth") != std::string::npos);
}

TEST_CASE("csv headers") {
  ScratchDir dir;
  const auto chain = quoted(dir.write("chain.json", kChain));
  const auto eta = run_cli("eta " + chain + " --source exact --csv -");
  REQUIRE(eta.exit_code == 0);
  CHECK(first_line(eta.out) == "i,j,eta_bar,provenance");
  // Exact eta on a chain is the product of edge contractions: 0.7 * 0.3.
  CHECK(eta.out.find("1,3,0.20999999999999999,exact") != std::string::npos);

  const auto sample = run_cli("sample " + chain + " --seed 1 --count 5 --csv -");
  REQUIRE(sample.exit_code == 0);
  CHECK(first_line(sample.out) == "path,x1,x2,x3");

  for (const char* sub : {"coeffs", "norms", "bound"}) {
    const auto r = run_cli(std::string(sub) + " " + chain + " --csv -");
    INFO(sub);
    CHECK(r.exit_code == 0);
    CHECK(first_line(r.out).find(',') != std::string::npos);
  }
}

TEST_CASE("same seed gives byte-identical csv") {
  ScratchDir dir;
  const auto chain = quoted(dir.write("chain.json", kChain));
  CHECK(run_cli("sample " + chain + " --seed 7 --count 300 --csv " + quoted(dir / "a.csv")).exit_code == 0);
  CHECK(run_cli("sample " + chain + " --seed 7 --count 300 --csv " + quoted(dir / "b.csv")).exit_code == 0);
  CHECK(run_cli("--threads 4 sample " + chain + " --seed 7 --count 300 --csv " + quoted(dir / "c.csv"))
            .exit_code == 0);
  const auto a = slurp(dir / "a.csv");
  CHECK(a.size() > 300 * 6);
  CHECK(a == slurp(dir / "b.csv"));
  CHECK(a == slurp(dir / "c.csv"));
  CHECK(run_cli("sample " + chain + " --seed 8 --count 300 --csv " + quoted(dir / "d.csv")).exit_code == 0);
  CHECK(a != slurp(dir / "d.csv"));
}

TEST_CASE("gen output loads and verifies") {
  ScratchDir dir;
  const auto model = dir / "gen.json";
  REQUIRE(run_cli("gen --depth 3 --width 2 --theta-max 0.8 --seed 3 -o " + quoted(model)).exit_code == 0);
  CHECK(run_cli("inspect " + quoted(model)).exit_code == 0);
  const auto v = run_cli("verify " + quoted(model) + " --trials 50 --seed 42 --samples 2000 --csv -");
  CHECK(v.exit_code == 0);
  CHECK(first_line(v.out) == "suite,cases,max_violation,tolerance,passed,note");
}
