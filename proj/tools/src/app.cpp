#include "app.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "checks.hpp"
#include "config.hpp"
#include "report.hpp"
#include "ssflab/convergence.hpp"
#include "ssflab/errors.hpp"
#include "ssflab/parallel.hpp"

namespace ssflab::cli {

namespace {

struct Flags {
  std::string config;
  std::string out;
  int threads = 0;
  bool verbose = false;
};

void log(const Flags& f, const std::string& msg) {
  if (f.verbose) std::cerr << "ssf-lab: " << msg << "\n";
}

std::string resolve(const Flags& f, const std::optional<std::string>& from_config) {
  if (!f.out.empty()) return f.out;
  return from_config.value_or("-");
}

ordered_json complex_pair(std::complex<double> z) { return ordered_json::array({z.real(), z.imag()}); }

int cmd_curve(const RunConfig& c, const Flags& f, bool counting) {
  const PotentialSpec& V = *c.potential;
  const Pipeline p = counting ? Pipeline::counting : c.pipeline;
  log(f, "computing " + to_string(p) + " curve on " + std::to_string(c.lambdas.size()) + " points");
  SsfCurve curve;
  switch (p) {
    case Pipeline::det: curve = ssf_det(V, KernelId::full_space(1), c.lambdas, c.ssf); break;
    case Pipeline::det2:
      curve = ssf_det2(V, KernelId::full_space(V.dimension()), c.lambdas, c.ssf);
      break;
    case Pipeline::counting: curve = ssf_counting(V, *c.domain, c.lambdas); break;
  }
  write_atomic(resolve(f, c.curve_path), curve_csv(curve));
  if (c.report_path) {
    ordered_json doc = report_skeleton(counting ? "counting" : "compute", c.seed);
    doc["eq"] = pipeline_eq(curve.method);
    doc["method"] = to_string(curve.method);
    doc["pair"] = curve.pair_id;
    doc["anchor"] = curve.anchor;
    doc["constant"] = curve.constant;
    doc["published_constant"] = curve.published_constant ? ordered_json(*curve.published_constant)
                                                         : ordered_json(nullptr);
    doc["eps_schedule"] = curve.epsilon_schedule;
    doc["excluded"] = curve.excluded;
    std::size_t unreliable = 0;
    for (bool r : curve.reliable) unreliable += r ? 0 : 1;
    doc["points"] = curve.size();
    doc["unreliable_points"] = unreliable;
    write_atomic(*c.report_path, dump(doc));
  }
  return 0;
}

int cmd_converge(const RunConfig& c, const Flags& f) {
  const PotentialSpec& V = *c.potential;
  const DomainSequence& seq = *c.sequence;
  ordered_json doc = report_skeleton("converge", c.seed);
  doc["potential"] = V.describe();
  IntegrationOptions io;
  io.lambda_max = c.lambda_max;
  if (V.dimension() == 1) {
    std::optional<SsfCurve> limit;
    auto need_limit = [&]() -> const SsfCurve& {
      if (!limit) {
        log(f, "building the limit curve up to lambda = " + std::to_string(c.lambda_max));
        limit = limit_curve(V, c.lambda_max);
      }
      return *limit;
    };
    if (!c.tests.empty()) {
      std::vector<TestFunction> tests;
      for (const auto& t : c.tests) tests.push_back(t.build());
      const SsfCurve& lim = need_limit();
      log(f, "weak convergence over " + std::to_string(seq.domains.size()) + " domains");
      append_report(doc, weak_convergence_report(seq, V, lim, tests, io));
    }
    log(f, "total masses");
    append_report(doc, total_mass_report(seq, V, io));
    if (c.moments) {
      log(f, "moments");
      append_report(doc, moment_convergence(seq, V, c.moments->a, c.moments->z, c.moments->n_max,
                                            need_limit(), io));
    }
    if (c.resolvent_z) {
      std::vector<TestFunction> probes;
      for (const auto& t : c.probes) probes.push_back(t.build());
      if (probes.empty()) probes.push_back(TestFunction::bump(0.0, 1.0));
      log(f, "resolvent spot check");
      append_report(doc, resolvent_strong_convergence_spotcheck(seq, V, *c.resolvent_z, probes));
    }
  }
  if (c.determinant_z) {
    log(f, "determinant convergence");
    append_report(doc, determinant_convergence(seq, V, Energy::off_axis(*c.determinant_z)));
    doc["determinant_z"] = complex_pair(*c.determinant_z);
  }
  bool all = true;
  if (doc.contains("series"))
    for (const auto& s : doc["series"]) all = all && s["monotone"].get<bool>();
  doc["verdicts"] = {{"all_monotone", all}};
  doc["tolerances"] = {{"lambda_max", io.lambda_max},
                       {"tail_tolerance", io.tolerance},
                       {"resolution", io.resolution}};
  write_atomic(resolve(f, c.report_path), dump(doc));
  return 0;
}

int cmd_cesaro(const RunConfig& c, const Flags& f) {
  CesaroOptions o;
  o.half_line = c.cesaro->half_line;
  o.exclusion_radius = c.ssf.exclusion_radius;
  o.ssf = c.ssf;
  log(f, "Cesaro averages at lambda = " + std::to_string(c.cesaro->lambda));
  const CesaroResult r = cesaro_limit(*c.potential, c.cesaro->lambda, c.cesaro->radii, o);
  ordered_json doc = report_skeleton("cesaro", c.seed);
  for (std::size_t i = 0; i < r.radii.size(); ++i)
    doc["rows"].push_back({{"eq", "1.4"},
                           {"R", r.radii[i]},
                           {"average", r.averages[i]},
                           {"error", r.errors[i]}});
  doc["potential"] = c.potential->describe();
  doc["eq"] = "1.4";
  doc["lambda"] = r.lambda;
  doc["geometry"] = r.half_line ? "half_line" : "symmetric_boxes";
  doc["limit"] = r.limit_estimate;
  doc["limit_pipeline"] = r.limit_pipeline;
  doc["events"] = r.events;
  bool decreasing = true;
  for (std::size_t i = 1; i < r.errors.size(); ++i) decreasing = decreasing && r.errors[i] < r.errors[i - 1];
  doc["verdicts"] = {{"errors_decreasing", decreasing},
                     {"final_error", r.errors.empty() ? 0.0 : r.errors.back()}};
  doc["warnings"] = r.warnings;
  for (const auto& w : r.warnings) std::cerr << "ssf-lab: warning: " << w << "\n";
  write_atomic(resolve(f, c.report_path), dump(doc));
  return 0;
}

int cmd_kernel_check(const RunConfig& c, const Flags& f) {
  log(f, "kernel check with " + std::to_string(c.kernel_samples) + " samples");
  const KernelCheckResult r = kernel_check(c.seed, c.kernel_samples);
  ordered_json doc = report_skeleton("kernel-check", c.seed);
  for (const auto& k : r.cases) {
    ordered_json j;
    j["kernel"] = k.kernel;
    j["eq"] = k.eq;
    j["z"] = complex_pair(k.z);
    if (k.kernel == "interval") {
      j["a"] = k.a;
      j["b"] = k.b;
      j["x"] = k.x;
      j["y"] = k.y;
    } else if (k.kernel == "free1") {
      j["x"] = k.x;
      j["y"] = k.y;
    } else {
      j["distance"] = k.x;
    }
    j["value"] = complex_pair(k.value);
    j["oracle"] = complex_pair(k.oracle);
    j["rel_error"] = k.rel_error;
    doc["rows"].push_back(std::move(j));
  }
  auto mono = [](const MonotonicityReport& m) {
    return ordered_json{{"eq", "4.10"},
                        {"holds", m.holds},
                        {"worst_violation", m.worst_violation},
                        {"samples", m.samples}};
  };
  doc["monotonicity"] = {{"interval", mono(r.interval_monotonicity)},
                         {"ball", mono(r.ball_monotonicity)}};
  const bool ok = r.max_rel_error <= 1e-10 && r.interval_monotonicity.holds &&
                  r.ball_monotonicity.holds;
  doc["verdicts"] = {{"max_rel_error", r.max_rel_error}, {"pass", ok}};
  doc["tolerances"] = {{"rel_error", 1e-10}};
  write_atomic(resolve(f, c.report_path), dump(doc));
  if (!ok) throw NumericalError("kernel-check", "kernel disagrees with its oracle");
  return 0;
}

int cmd_selfcheck(const RunConfig& c, const Flags& f) {
  const auto lines = selfcheck(c.seed);
  bool all = true;
  ordered_json doc = report_skeleton("selfcheck", c.seed);
  for (const auto& l : lines) {
    std::cout << (l.pass ? "PASS " : "FAIL ") << l.name << " (" << l.detail << ")\n";
    all = all && l.pass;
    doc["rows"].push_back({{"invariant", l.name}, {"pass", l.pass}, {"detail", l.detail}});
  }
  doc["verdicts"] = {{"pass", all}};
  if (!f.out.empty()) write_atomic(f.out, dump(doc));
  if (!all) throw NumericalError("selfcheck", "invariant suite failed");
  return 0;
}

int dispatch(const std::string& command, const Flags& f) {
  RunConfig c;
  if (!f.config.empty()) {
    c = load_config(f.config);
  } else if (command != "selfcheck" && command != "kernel-check") {
    throw ConfigError("ssf-lab", 0, "--config", "'" + command + "' needs --config <path>");
  }
  check_for_command(c, command);
  if (command == "compute") return cmd_curve(c, f, false);
  if (command == "counting") return cmd_curve(c, f, true);
  if (command == "converge") return cmd_converge(c, f);
  if (command == "cesaro") return cmd_cesaro(c, f);
  if (command == "kernel-check") return cmd_kernel_check(c, f);
  return cmd_selfcheck(c, f);
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Spectral shift functions: determinant and counting pipelines, convergence runs",
               "ssf-lab"};
  app.fallthrough();
  app.require_subcommand(1, 1);
  Flags f;
  app.add_option("--config", f.config, "run configuration (JSON)");
  app.add_option("--out", f.out, "output path, '-' for stdout");
  auto* threads = app.add_option("--threads", f.threads, "worker threads (overrides SSF_LAB_THREADS)")
                      ->check(CLI::Range(1, 1024));
  app.add_flag("--verbose", f.verbose, "progress on stderr");
  for (const char* name : {"compute", "counting", "converge", "cesaro", "kernel-check", "selfcheck"})
    app.add_subcommand(name, "")->fallthrough();
  app.get_subcommand("compute")->description("spectral shift curve by the configured pipeline (CSV)");
  app.get_subcommand("counting")->description("counting curve on the configured domain (CSV)");
  app.get_subcommand("converge")->description("infinite-volume convergence report (JSON)");
  app.get_subcommand("cesaro")->description("Cesaro averages over growing boxes (JSON)");
  app.get_subcommand("kernel-check")->description("Green's functions against oracles (JSON)");
  app.get_subcommand("selfcheck")->description("invariant suite, one pass/fail line each");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  int n = 1;
  if (const char* env = std::getenv("SSF_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 1024) {
      std::cerr << "ssf-lab: SSF_LAB_THREADS must be an integer in [1, 1024]\n";
      return 2;
    }
    n = static_cast<int>(v);
  }
  if (threads->count() > 0) n = f.threads;
  set_thread_count(n);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return dispatch(command, f);
  } catch (const ConfigError& e) {
    std::cerr << "ssf-lab: invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "ssf-lab: invalid input: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "ssf-lab: numerical failure in " << e.operation() << ": " << e.what() << "\n";
    return 3;
  } catch (const OutputError& e) {
    std::cerr << "ssf-lab: output failure in write: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "ssf-lab: failure in " << command << ": " << e.what() << "\n";
    return 3;
  }
}

}  // namespace ssflab::cli
