#include "report.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#ifndef SSFLAB_VERSION
#define SSFLAB_VERSION "unknown"
#endif

namespace ssflab::cli {

ordered_json report_skeleton(const std::string& experiment, std::uint64_t seed) {
  ordered_json doc;
  doc["rows"] = ordered_json::array();
  doc["experiment"] = experiment;
  doc["tool"] = {{"name", "ssf-lab"}, {"version", SSFLAB_VERSION}};
  doc["versions"] = {{"ssflab", SSFLAB_VERSION},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                   std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"boost", BOOST_LIB_VERSION}};
  doc["seed"] = seed;
  return doc;
}

void append_report(ordered_json& doc, const ConvergenceReport& r) {
  if (!doc.contains("series")) doc["series"] = ordered_json::array();
  if (!doc.contains("notes")) doc["notes"] = ordered_json::array();
  for (const auto& s : r.series) {
    for (const auto& row : s.rows) {
      ordered_json j;
      j["experiment"] = r.experiment;
      j["series"] = s.name;
      j["eq"] = s.eq;
      j["domain"] = row.domain;
      j["size"] = row.domain_size;
      j["value"] = row.value.real();
      j["value_imag"] = row.value.imag();
      j["error"] = row.error;
      j["tail_bound"] = row.tail_bound;
      doc["rows"].push_back(std::move(j));
    }
    ordered_json j;
    j["experiment"] = r.experiment;
    j["name"] = s.name;
    j["eq"] = s.eq;
    j["kind"] = s.kind;
    j["limit"] = s.limit.real();
    j["limit_imag"] = s.limit.imag();
    j["limit_pipeline"] = r.limit_pipeline;
    j["monotone"] = s.monotone;
    j["first_error"] = s.first_error;
    j["final_error"] = s.final_error;
    j["resolution"] = s.resolution;
    doc["series"].push_back(std::move(j));
  }
  for (const auto& n : r.notes) doc["notes"].push_back(r.experiment + ": " + n);
}

std::string dump(const ordered_json& doc) { return doc.dump(2) + "\n"; }

std::string curve_csv(const SsfCurve& curve) {
  std::string out = "lambda,xi,method,epsilon,reliable\n";
  const std::string method = to_string(curve.method);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%.17g,%d\n", curve.anchor, 0.0, method.c_str(),
                0.0, 1);
  out += buf;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double eps = i < curve.epsilon_used.size() ? curve.epsilon_used[i] : 0.0;
    const bool ok = i < curve.reliable.size() ? curve.reliable[i] : true;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%.17g,%d\n", curve.lambdas[i],
                  curve.values[i], method.c_str(), eps, ok ? 1 : 0);
    out += buf;
  }
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content << std::flush;
    return;
  }
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw OutputError("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw OutputError("cannot move output into place at " + path);
  }
}

std::string pipeline_eq(SsfMethod m) {
  switch (m) {
    case SsfMethod::det: return "2.12";
    case SsfMethod::det2: return "2.21a";
    case SsfMethod::counting: return "2.11a";
  }
  return "";
}

}  // namespace ssflab::cli
