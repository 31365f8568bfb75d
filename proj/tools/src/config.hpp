#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssflab/convergence.hpp"
#include "ssflab/potential.hpp"
#include "ssflab/spectra.hpp"

namespace ssflab::cli {

/// Rejected configuration. line is 0 when the position is unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string source, int line, std::string field, const std::string& message);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

enum class Pipeline { det, det2, counting };

struct TestSpec {
  std::string kind;
  double a = 0.0;  ///< center / lo / value
  double b = 1.0;  ///< radius / width / hi
  int m = 0;
  int n = 0;
  TestFunction build() const;
};

struct CesaroSpec {
  double lambda = 0.0;
  std::vector<double> radii;
  bool half_line = false;
};

struct MomentSpec {
  std::complex<double> a{0.0, -1.0};
  std::complex<double> z{0.0, 1.0};
  int n_max = 2;
};

struct RunConfig {
  std::string source;  ///< file name for diagnostics
  std::optional<std::string> experiment;
  std::uint64_t seed = 0;
  std::optional<PotentialSpec> potential;
  Pipeline pipeline = Pipeline::det;
  std::optional<DomainSpec> domain;
  std::optional<DomainSequence> sequence;
  std::vector<double> lambdas;
  SsfOptions ssf;
  double lambda_max = 400.0;
  std::vector<TestSpec> tests;
  std::optional<std::complex<double>> determinant_z;
  std::optional<std::complex<double>> resolvent_z;
  std::vector<TestSpec> probes;
  std::optional<MomentSpec> moments;
  std::optional<CesaroSpec> cesaro;
  int kernel_samples = 100;
  std::optional<std::string> curve_path;
  std::optional<std::string> report_path;
  /// Line of each top-level key, for diagnostics raised after parsing.
  std::map<std::string, int> lines;

  /// ConfigError for a top-level field.
  [[noreturn]] void reject(const std::string& field, const std::string& message) const;
};

/// Parses and validates a configuration document. Unknown keys, wrong types and
/// out-of-range values raise ConfigError naming the field and its line.
RunConfig parse_config(const std::string& text, const std::string& source);
RunConfig load_config(const std::string& path);

/// Checks that the fields a subcommand needs are present and consistent.
void check_for_command(const RunConfig& config, const std::string& command);

std::string to_string(Pipeline p);

}  // namespace ssflab::cli
