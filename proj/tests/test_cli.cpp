#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

namespace {

std::string g_cli;
std::string g_problems;
std::filesystem::path g_tmp;

struct RunResult {
  int exit_code = -1;
  std::string output;
};

// Runs the binary with stdout captured; pass merge_stderr for the error paths.
RunResult run(const std::string& args, bool merge_stderr = false) {
  std::string cmd = "\"" + g_cli + "\" " + args;
  if (merge_stderr)
    cmd += " 2>&1";
  else
    cmd += " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), got);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string problem(const std::string& name) { return "\"" + g_problems + "/" + name + "\""; }

nlohmann::json envelope_of(const RunResult& r) {
  auto j = nlohmann::json::parse(r.output);
  for (const char* key :
       {"version", "command", "problem", "problem_hash", "order", "settings", "result", "timings"})
    REQUIRE(j.contains(key));
  CHECK(j["problem_hash"].get<std::string>().size() == 16);
  CHECK(j["timings"].contains("solves"));
  CHECK(j["timings"].contains("iterations"));
  for (const char* key : {"tol_eq", "tol_psd", "seed", "max_y"})
    CHECK(j["settings"].contains(key));
  return j;
}

}  // namespace

TEST_CASE("version and help exit cleanly") {
  auto v = run("--version");
  CHECK(v.exit_code == 0);
  CHECK(v.output.find("0.1.0") != std::string::npos);
  CHECK(run("--help").exit_code == 0);
  CHECK(run("member --help").exit_code == 0);
}

TEST_CASE("membership verdicts drive the exit code") {
  auto inside = run("member " + problem("cusp.json") + " --at 1,1 --order 3");
  CHECK(inside.exit_code == 0);
  auto j = envelope_of(inside);
  CHECK(j["command"] == "member");
  CHECK(j["order"] == 3);
  CHECK(j["result"]["decision"] == "member");

  auto outside = run("member " + problem("cusp.json") + " --at 0,1 --order 3");
  CHECK(outside.exit_code == 1);
  CHECK(envelope_of(outside)["result"]["decision"] == "not_member");
}

TEST_CASE("support reports a finite value with a maximizer") {
  auto r = run("support " + problem("cusp.json") + " --dir -2,3 --order 3");
  CHECK(r.exit_code == 0);
  auto j = envelope_of(r);
  double value = j["result"]["value"].get<double>();
  CHECK(value >= 1.0 - 1e-6);
  CHECK(value <= 1.15);
  CHECK(j["result"]["status"] == "ok");

  auto unb = run("support " + problem("parabola.json") + " --dir 0,-1");
  CHECK(unb.exit_code == 1);
  CHECK(envelope_of(unb)["result"]["value"] == "inf");
}

TEST_CASE("reports are byte-identical across reruns") {
  const std::string cmd = "certify " + problem("cusp.json");
  auto first = run(cmd);
  auto second = run(cmd);
  CHECK(first.exit_code == 0);
  CHECK(first.output == second.output);
  CHECK(!first.output.empty());

  auto j = envelope_of(first);
  CHECK(j["result"]["outcome"] == "found");
  CHECK(j["result"]["margin"].get<double>() > 0.0);
  CHECK(j["timings"]["solves"].get<std::uint64_t>() > 0);
}

TEST_CASE("tracing writes a CSV sweep and the report to stdout") {
  auto csv_path = (g_tmp / "trace.csv").string();
  auto r = run("trace " + problem("parabola_augmented.json") + " --angles 8 --out \"" + csv_path +
               "\"");
  CHECK(r.exit_code == 0);
  auto j = envelope_of(r);
  CHECK(j["result"]["rows"] == 8);

  std::ifstream in(csv_path);
  REQUIRE(in.good());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 9);
  CHECK(lines[0] == "theta,value,px,py,status");
  CHECK(lines[1].find("inf") != std::string::npos);
  CHECK(lines[1].find("unbounded") != std::string::npos);
  for (std::size_t i = 1; i < lines.size(); ++i)
    CHECK(std::count(lines[i].begin(), lines[i].end(), ',') == 4);

  // the sweep is required to land somewhere
  CHECK(run("trace " + problem("cusp.json") + " --angles 4", true).exit_code == 64);
}

TEST_CASE("closedness screening and augmentation round-trip") {
  auto closed = run("check-closed " + problem("parabola.json"));
  CHECK(closed.exit_code == 1);
  auto j = envelope_of(closed);
  CHECK(j["result"]["structural_obstruction"] == true);
  CHECK(j["result"]["recommendation"] == "x2 + 1");

  CHECK(run("check-closed " + problem("cusp.json")).exit_code == 0);

  auto aug_path = (g_tmp / "parabola_aug.json").string();
  auto aug = run("augment " + problem("parabola.json") + " \"" + aug_path + "\"");
  CHECK(aug.exit_code == 0);
  std::ifstream in(aug_path);
  REQUIRE(in.good());
  auto written = nlohmann::json::parse(in);
  REQUIRE(written["inequalities"].size() == 2);
  CHECK(written["inequalities"][1] == "x2 + 1");

  // the augmented file is itself a valid problem
  CHECK(run("member \"" + aug_path + "\" --at 0,1").exit_code == 0);
  CHECK(run("member \"" + aug_path + "\" --at 0,-0.25").exit_code == 1);

  // nothing to recommend for the cusp, so nothing is written
  auto noop_path = (g_tmp / "cusp_aug.json").string();
  CHECK(run("augment " + problem("cusp.json") + " \"" + noop_path + "\"").exit_code == 1);
  CHECK(!std::filesystem::exists(noop_path));
}

TEST_CASE("split membership covers the union of orthant pieces") {
  const std::string base = "split-member " + problem("notpointed.json") + " --patterns 00,10 --order 1";
  auto inside = run(base + " --at -5,0.1");
  CHECK(inside.exit_code == 0);
  auto j = envelope_of(inside);
  CHECK(j["result"]["decision"] == "member");
  REQUIRE(j["result"]["weights"].size() == 2);
  double total = 0.0;
  for (const auto& w : j["result"]["weights"]) total += w.get<double>();
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));

  CHECK(run(base + " --at 0,-0.1").exit_code == 1);
}

TEST_CASE("module membership certificates through the CLI") {
  auto r = run("sos-member " + problem("cusp.json") + " --target x0 --order 1");
  CHECK(r.exit_code == 0);
  auto j = envelope_of(r);
  CHECK(j["result"]["outcome"] == "found");
  CHECK(j["result"]["residual"].get<double>() <= 1e-6);

  CHECK(run("sos-member " + problem("cusp.json") + " --target x1 --base --order 1").exit_code == 0);
  CHECK(run("sos-member " + problem("cusp.json") + " --target=-x0 --order 2").exit_code == 1);
}

TEST_CASE("usage and data errors exit with code 64") {
  CHECK(run("member " + problem("cusp.json"), true).exit_code == 64);
  CHECK(run("member " + problem("cusp.json") + " --at 1", true).exit_code == 64);
  CHECK(run("member " + problem("missing.json") + " --at 1,1", true).exit_code == 64);
  CHECK(run("frobnicate " + problem("cusp.json"), true).exit_code == 64);

  auto bad = g_tmp / "bad.json";
  std::ofstream(bad) << "{\"variables\": [\"x1\"], \"inequalities\": [\"x1^\"]}";
  auto r = run("member \"" + bad.string() + "\" --at 1", true);
  CHECK(r.exit_code == 64);
  CHECK(r.output.find("error:") != std::string::npos);

  auto unknown = g_tmp / "unknown.json";
  std::ofstream(unknown) << "{\"variables\": [\"x1\"], \"inequalities\": [\"x1\"], \"frob\": 1}";
  CHECK(run("member \"" + unknown.string() + "\" --at 1", true).exit_code == 64);
}

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s <cli-binary> <problems-dir> [doctest args]\n", argv[0]);
    return 2;
  }
  g_cli = argv[1];
  g_problems = argv[2];
  g_tmp = std::filesystem::temp_directory_path() / "conehull_cli_test";
  std::filesystem::create_directories(g_tmp);

  doctest::Context ctx;
  ctx.applyCommandLine(argc - 2, argv + 2);
  return ctx.run();
}
