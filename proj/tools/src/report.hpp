#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ssflab/convergence.hpp"
#include "ssflab/ssf.hpp"

namespace ssflab::cli {

using ordered_json = nlohmann::ordered_json;

class OutputError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// {"rows": [], "experiment": ..., "tool": ..., "versions": ..., "seed": ...}.
/// Rows come first so that an empty report reads {"rows":[],...}.
ordered_json report_skeleton(const std::string& experiment, std::uint64_t seed);

/// Appends the rows of every series to report["rows"] and a summary per series
/// to report["series"].
void append_report(ordered_json& report, const ConvergenceReport& r);

/// Serialized document, two-space indent, trailing newline.
std::string dump(const ordered_json& doc);

/// CSV with header lambda,xi,method,epsilon,reliable; the first row is the
/// anchor with xi = 0. Numbers use 17 significant digits.
std::string curve_csv(const SsfCurve& curve);

/// Writes to path.tmp then renames over path. "-" writes to stdout.
void write_atomic(const std::string& path, const std::string& content);

/// "eq" tag of a determinant-based curve pipeline.
std::string pipeline_eq(SsfMethod m);

}  // namespace ssflab::cli
