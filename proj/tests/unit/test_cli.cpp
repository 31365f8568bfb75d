#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "app.hpp"
#include "config.hpp"
#include "report.hpp"

namespace fs = std::filesystem;
using ssflab::cli::run;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ssf-lab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  Outcome o;
  o.code = run(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "ssflab_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_config(const std::string& name, const std::string& text) {
  const auto p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const char* kWell = R"({"dimension": 1, "profile": "square_well", "depth": 2.0, "half_width": 1.0})";

std::string compute_config() {
  return std::string(R"({
  "experiment": "compute",
  "seed": 3,
  "potential": )") + kWell + R"(,
  "pipeline": "det",
  "lambda_grid": {"min": -2.0, "max": 4.0, "points": 13}
})";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("compute writes the curve with its anchor row") {
  const auto cfg = write_config("compute.json", compute_config());
  const auto o = invoke({"compute", "--config", cfg, "--out", "-"});
  REQUIRE(o.code == 0);
  std::istringstream lines(o.out);
  std::string header, anchor;
  std::getline(lines, header);
  std::getline(lines, anchor);
  CHECK(header == "lambda,xi,method,epsilon,reliable");
  CHECK(anchor.find(",0,det,") != std::string::npos);
  int rows = 0;
  for (std::string l; std::getline(lines, l);) ++rows;
  CHECK(rows == 13);
  CHECK(o.out.back() == '\n');
  CHECK(o.out.find('\r') == std::string::npos);
}

TEST_CASE("outputs are byte-identical across runs and thread counts") {
  const auto cfg = write_config("det.json", compute_config());
  const auto a = scratch() / "a.csv", b = scratch() / "b.csv";
  REQUIRE(invoke({"compute", "--config", cfg, "--out", a.string(), "--threads", "1"}).code == 0);
  REQUIRE(invoke({"compute", "--config", cfg, "--out", b.string(), "--threads", "2"}).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK_FALSE(fs::exists(scratch() / "a.csv.tmp"));

  const auto k1 = invoke({"kernel-check", "--out", "-"});
  const auto k2 = invoke({"kernel-check", "--out", "-", "--threads", "2"});
  REQUIRE(k1.code == 0);
  CHECK(k1.out == k2.out);
  const auto doc = nlohmann::json::parse(k1.out);
  CHECK(doc["rows"].size() >= 100);
  CHECK(doc.contains("seed"));
}

TEST_CASE("empty report is a valid document with rows first") {
  const auto text = ssflab::cli::dump(ssflab::cli::report_skeleton("compute", 0));
  CHECK(text.rfind("{\n  \"rows\": []", 0) == 0);
  CHECK(nlohmann::json::parse(text).is_object());
}

TEST_CASE("converge report carries the weak-convergence tag") {
  const auto cfg = write_config("converge.json", std::string(R"({
  "experiment": "converge",
  "potential": )") + kWell + R"(,
  "domain_sequence": {"kind": "boxes", "sizes": [10, 20]},
  "lambda_max": 400,
  "tests": [{"kind": "bump", "center": 1.0, "radius": 2.0}]
})");
  const auto o = invoke({"converge", "--config", cfg, "--out", "-"});
  REQUIRE(o.code == 0);
  CHECK(o.out.find("\"eq\": \"3.84\"") != std::string::npos);
  const auto doc = nlohmann::ordered_json::parse(o.out);
  CHECK(doc.begin().key() == "rows");
  CHECK(doc["verdicts"]["all_monotone"].get<bool>());
}

TEST_CASE("cesaro warns near the bound state and names the operation when excluded") {
  const auto near = write_config("near.json", std::string(R"({
  "experiment": "cesaro",
  "potential": )") + kWell + R"(,
  "cesaro": {"lambda": -1.15, "radii": [10, 20]}
})");
  const auto o = invoke({"cesaro", "--config", near, "--out", "-"});
  REQUIRE(o.code == 0);
  CHECK(o.err.find("warning") != std::string::npos);
  const auto doc = nlohmann::json::parse(o.out);
  CHECK(!doc["warnings"].empty());
  CHECK(doc["eq"] == "1.4");

  const auto bad = write_config("excluded.json", std::string(R"({
  "experiment": "cesaro",
  "potential": )") + kWell + R"(,
  "cesaro": {"lambda": -1.2, "radii": [10, 20]}
})");
  const auto e = invoke({"cesaro", "--config", bad, "--out", "-"});
  CHECK(e.code == 3);
  CHECK(e.err.find("numerical failure in cesaro_limit") != std::string::npos);
  CHECK(e.out.empty());
}

TEST_CASE("validation errors exit 2 with line and field") {
  const auto cfg = write_config("wrong_type.json", R"({
  "experiment": "compute",
  "potential": {"dimension": 1, "profile": "square_well",
                "depth": "deep", "half_width": 1.0},
  "lambda_grid": {"min": -2.0, "max": 4.0, "points": 13}
})");
  const auto o = invoke({"compute", "--config", cfg, "--out", "-"});
  CHECK(o.code == 2);
  CHECK(o.err.find(":4:") != std::string::npos);
  CHECK(o.err.find("field 'potential.depth'") != std::string::npos);

  CHECK(invoke({"compute"}).code == 2);
  CHECK(invoke({"compute", "--config", (scratch() / "missing.json").string()}).code == 2);
  CHECK(invoke({"frobnicate"}).code == 2);
  CHECK(invoke({"selfcheck", "--threads", "0"}).code == 2);
  CHECK(invoke({"--help"}).code == 0);

  // Command and experiment must agree.
  const auto det = write_config("mismatch.json", compute_config());
  CHECK(invoke({"counting", "--config", det, "--out", "-"}).code == 2);
}

TEST_CASE("thread count from the environment") {
  const auto cfg = write_config("env.json", compute_config());
  ::setenv("SSF_LAB_THREADS", "many", 1);
  const auto bad = invoke({"compute", "--config", cfg, "--out", "-"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("SSF_LAB_THREADS") != std::string::npos);
  ::setenv("SSF_LAB_THREADS", "2", 1);
  CHECK(invoke({"compute", "--config", cfg, "--out", "-"}).code == 0);
  ::unsetenv("SSF_LAB_THREADS");
}

TEST_CASE("shipped configurations parse") {
  for (const char* name : {"well1d.json", "seq.json", "cesaro.json", "ball3d.json", "counting.json"}) {
    INFO(name);
    const auto c = ssflab::cli::load_config(std::string(SSFLAB_CONFIGS) + "/" + name);
    CHECK_NOTHROW(ssflab::cli::check_for_command(c, c.experiment.value()));
  }
}

TEST_CASE("every malformed fixture is rejected with a diagnostic") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(std::string(SSFLAB_FIXTURES) + "/bad")) {
    const std::string stem = entry.path().stem().string();
    const std::string command = stem.substr(0, stem.find("__"));
    INFO(stem);
    const auto o = invoke({command, "--config", entry.path().string(), "--out", "-"});
    CHECK(o.code == 2);
    CHECK((o.err.find("field '") != std::string::npos || o.err.find(".json:") != std::string::npos));
    ++seen;
  }
  CHECK(seen == 20);
}

}  // TEST_SUITE
