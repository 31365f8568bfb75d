#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ssflab::cli {

using nlohmann::json;

ConfigError::ConfigError(std::string source, int line, std::string field,
                         const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " +
                         (field.empty() ? std::string() : "field '" + field + "': ") + message),
      line_(line),
      field_(std::move(field)) {}

std::string to_string(Pipeline p) {
  switch (p) {
    case Pipeline::det: return "det";
    case Pipeline::det2: return "det2";
    case Pipeline::counting: return "counting";
  }
  return "?";
}

void RunConfig::reject(const std::string& field, const std::string& message) const {
  const auto head = field.substr(0, field.find_first_of(".["));
  const auto it = lines.find(head);
  throw ConfigError(source, it == lines.end() ? 0 : it->second, field, message);
}

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  int line = 1;
  for (std::size_t i = 0; i < offset; ++i)
    if (text[i] == '\n') ++line;
  return line;
}

// Walks the document the same way the parser does and remembers where each
// key was last seen, so nested fields get the line of their own key.
class Reader {
 public:
  Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& message) const {
    throw ConfigError(source_, line_for(path), path, message);
  }

  int line_for(const std::string& path) const {
    // Search for each key of the path in turn, starting after the previous one.
    std::size_t pos = 0;
    int line = 0;
    std::size_t start = 0;
    while (start <= path.size()) {
      std::size_t end = path.find_first_of(".[", start);
      std::string key = path.substr(start, end == std::string::npos ? std::string::npos : end - start);
      if (!key.empty() && key.back() == ']') key.clear();
      if (!key.empty()) {
        const std::size_t hit = find_key(key, pos);
        if (hit == std::string::npos) break;
        pos = hit;
        line = line_of_offset(text_, hit);
      }
      if (end == std::string::npos) break;
      start = end + 1;
    }
    return line;
  }

  void keys(const json& j, const std::string& path, const std::set<std::string>& allowed) const {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [k, v] : j.items()) {
      (void)v;
      if (!allowed.count(k)) fail(join(path, k), "unknown key");
    }
  }

  const json* find(const json& j, const std::string& key) const {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
  }

  const json& need(const json& j, const std::string& path, const std::string& key) const {
    const json* p = find(j, key);
    if (!p) fail(join(path, key), "required key missing");
    return *p;
  }

  double number(const json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) fail(path, "expected a finite number");
    return x;
  }

  double positive(const json& j, const std::string& path) const {
    const double x = number(j, path);
    if (!(x > 0.0)) fail(path, "must be positive");
    return x;
  }

  long long integer(const json& j, const std::string& path, long long lo, long long hi) const {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    const long long v = j.is_number_unsigned() && j.get<unsigned long long>() > 9.0e18
                            ? hi + 1
                            : j.get<long long>();
    if (v < lo || v > hi)
      fail(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  }

  std::string string(const json& j, const std::string& path,
                     const std::set<std::string>& choices = {}) const {
    if (!j.is_string()) fail(path, "expected a string");
    std::string s = j.get<std::string>();
    if (!choices.empty() && !choices.count(s)) {
      std::string list;
      for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
      fail(path, "'" + s + "' is not one of " + list);
    }
    if (choices.empty() && s.empty()) fail(path, "must not be empty");
    return s;
  }

  bool boolean(const json& j, const std::string& path) const {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
  }

  std::vector<double> numbers(const json& j, const std::string& path, bool allow_empty = false) const {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    if (j.empty() && !allow_empty) fail(path, "must not be empty");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  std::vector<double> increasing(const json& j, const std::string& path) const {
    auto v = numbers(j, path);
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!(v[i] > v[i - 1])) fail(path, "values must be strictly increasing");
    return v;
  }

  std::complex<double> complex(const json& j, const std::string& path) const {
    auto v = numbers(j, path);
    if (v.size() != 2) fail(path, "expected [real, imag]");
    return {v[0], v[1]};
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  std::size_t find_key(const std::string& key, std::size_t from) const {
    const std::string quoted = "\"" + key + "\"";
    std::size_t pos = from;
    while ((pos = text_.find(quoted, pos)) != std::string::npos) {
      std::size_t after = pos + quoted.size();
      while (after < text_.size() && std::isspace(static_cast<unsigned char>(text_[after]))) ++after;
      if (after < text_.size() && text_[after] == ':') return pos;
      pos = after;
    }
    return std::string::npos;
  }

  const std::string& text_;
  std::string source_;
};

PotentialSpec parse_potential(const Reader& r, const json& j, const std::string& path) {
  if (!j.is_object()) r.fail(path, "expected an object");
  const int dim = static_cast<int>(r.integer(r.need(j, path, "dimension"), path + ".dimension", 1, 3));
  if (dim == 2) r.fail(path + ".dimension", "dimension 2 has no determinant or counting pipeline");
  const std::string profile = r.string(r.need(j, path, "profile"), path + ".profile",
                                       {"zero", "square_well", "gaussian", "sampled"});
  auto num = [&](const char* key) { return r.number(r.need(j, path, key), path + "." + key); };
  auto pos = [&](const char* key) { return r.positive(r.need(j, path, key), path + "." + key); };
  try {
    if (profile == "zero") {
      r.keys(j, path, {"dimension", "profile"});
      return PotentialSpec::zero(dim);
    }
    if (profile == "square_well") {
      r.keys(j, path, {"dimension", "profile", "depth", "half_width"});
      return PotentialSpec::square_well(dim, num("depth"), pos("half_width"));
    }
    if (profile == "gaussian") {
      r.keys(j, path, {"dimension", "profile", "amplitude", "width", "support_radius"});
      return PotentialSpec::gaussian(dim, num("amplitude"), pos("width"), pos("support_radius"));
    }
    r.keys(j, path, {"dimension", "profile", "abscissae", "values"});
    auto xs = r.increasing(r.need(j, path, "abscissae"), path + ".abscissae");
    auto vs = r.numbers(r.need(j, path, "values"), path + ".values");
    if (xs.size() != vs.size()) r.fail(path + ".values", "must have as many entries as abscissae");
    if (xs.size() < 2) r.fail(path + ".abscissae", "need at least two samples");
    return PotentialSpec::sampled(dim, std::move(xs), std::move(vs));
  } catch (const std::invalid_argument& e) {
    r.fail(path, e.what());
  }
}

DomainSpec parse_domain(const Reader& r, const json& j, const std::string& path) {
  if (!j.is_object()) r.fail(path, "expected an object");
  const std::string kind = r.string(r.need(j, path, "kind"), path + ".kind", {"interval", "ball"});
  if (kind == "interval") {
    r.keys(j, path, {"kind", "a", "b"});
    const double a = r.number(r.need(j, path, "a"), path + ".a");
    const double b = r.number(r.need(j, path, "b"), path + ".b");
    if (!(a < b)) r.fail(path + ".b", "need a < b");
    return DomainSpec::interval(a, b);
  }
  r.keys(j, path, {"kind", "radius"});
  return DomainSpec::ball(r.positive(r.need(j, path, "radius"), path + ".radius"));
}

DomainSequence parse_sequence(const Reader& r, const json& j, const std::string& path) {
  if (!j.is_object()) r.fail(path, "expected an object");
  r.keys(j, path, {"kind", "sizes"});
  const std::string kind = r.string(r.need(j, path, "kind"), path + ".kind", {"boxes", "balls"});
  auto sizes = r.increasing(r.need(j, path, "sizes"), path + ".sizes");
  for (double s : sizes)
    if (!(s > 0.0)) r.fail(path + ".sizes", "sizes must be positive");
  return kind == "boxes" ? DomainSequence::symmetric_boxes(sizes) : DomainSequence::balls(sizes);
}

std::vector<double> parse_grid(const Reader& r, const json& j, const std::string& path) {
  if (j.is_array()) return r.increasing(j, path);
  if (!j.is_object()) r.fail(path, "expected {min, max, points} or an array");
  r.keys(j, path, {"min", "max", "points"});
  const double lo = r.number(r.need(j, path, "min"), path + ".min");
  const double hi = r.number(r.need(j, path, "max"), path + ".max");
  const long long n = r.integer(r.need(j, path, "points"), path + ".points", 2, 1000000);
  if (!(hi > lo)) r.fail(path + ".max", "need max > min");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  out.back() = hi;
  return out;
}

TestSpec parse_test(const Reader& r, const json& j, const std::string& path) {
  if (!j.is_object()) r.fail(path, "expected an object");
  TestSpec t;
  t.kind = r.string(r.need(j, path, "kind"), path + ".kind",
                    {"bump", "gaussian", "arctan", "constant", "indicator", "resolvent_monomial"});
  auto num = [&](const char* key) { return r.number(r.need(j, path, key), path + "." + key); };
  auto pos = [&](const char* key) { return r.positive(r.need(j, path, key), path + "." + key); };
  if (t.kind == "bump") {
    r.keys(j, path, {"kind", "center", "radius"});
    t.a = num("center");
    t.b = pos("radius");
  } else if (t.kind == "gaussian") {
    r.keys(j, path, {"kind", "center", "width"});
    t.a = num("center");
    t.b = pos("width");
  } else if (t.kind == "arctan") {
    r.keys(j, path, {"kind"});
  } else if (t.kind == "constant") {
    r.keys(j, path, {"kind", "value"});
    t.a = r.find(j, "value") ? num("value") : 1.0;
  } else if (t.kind == "indicator") {
    r.keys(j, path, {"kind", "lo", "hi"});
    t.a = num("lo");
    t.b = num("hi");
    if (!(t.a < t.b)) r.fail(path + ".hi", "need lo < hi");
  } else {
    r.keys(j, path, {"kind", "m", "n"});
    t.m = static_cast<int>(r.integer(r.need(j, path, "m"), path + ".m", 0, 8));
    t.n = static_cast<int>(r.integer(r.need(j, path, "n"), path + ".n", 0, 8));
    if (t.m + t.n == 0) r.fail(path, "m + n must be at least 1 (use constant)");
  }
  return t;
}

std::vector<TestSpec> parse_tests(const Reader& r, const json& j, const std::string& path) {
  if (!j.is_array()) r.fail(path, "expected an array of test functions");
  std::vector<TestSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(parse_test(r, j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

TestFunction TestSpec::build() const {
  if (kind == "bump") return TestFunction::bump(a, b);
  if (kind == "gaussian") return TestFunction::gaussian(a, b);
  if (kind == "arctan") return TestFunction::arctan();
  if (kind == "constant") return TestFunction::constant(a);
  if (kind == "indicator") return TestFunction::indicator(a, b);
  return TestFunction::resolvent_monomial(m, n);
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source, line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0), "",
                      std::string("malformed JSON (") + e.what() + ")");
  }
  const Reader r(text, source);
  if (!doc.is_object()) throw ConfigError(source, 1, "", "top level must be an object");
  r.keys(doc, "",
         {"experiment", "seed", "potential", "pipeline", "domain", "domain_sequence", "lambda_grid",
          "eps_schedule", "exclusion_radius", "lambda_max", "tests", "determinant_z",
          "resolvent_z", "probes", "moments", "cesaro", "kernel_samples", "output"});

  RunConfig c;
  c.source = source;
  for (const auto& [k, v] : doc.items()) {
    (void)v;
    c.lines[k] = r.line_for(k);
  }
  if (auto* p = r.find(doc, "experiment"))
    c.experiment = r.string(*p, "experiment",
                            {"compute", "counting", "converge", "cesaro", "kernel-check", "selfcheck"});
  if (auto* p = r.find(doc, "seed"))
    c.seed = static_cast<std::uint64_t>(r.integer(*p, "seed", 0, 9007199254740991LL));
  if (auto* p = r.find(doc, "potential")) c.potential = parse_potential(r, *p, "potential");
  if (auto* p = r.find(doc, "pipeline")) {
    const auto s = r.string(*p, "pipeline", {"det", "det2", "counting"});
    c.pipeline = s == "det" ? Pipeline::det : s == "det2" ? Pipeline::det2 : Pipeline::counting;
  }
  if (auto* p = r.find(doc, "domain")) c.domain = parse_domain(r, *p, "domain");
  if (auto* p = r.find(doc, "domain_sequence"))
    c.sequence = parse_sequence(r, *p, "domain_sequence");
  if (auto* p = r.find(doc, "lambda_grid")) c.lambdas = parse_grid(r, *p, "lambda_grid");
  if (auto* p = r.find(doc, "eps_schedule")) {
    auto eps = r.numbers(*p, "eps_schedule");
    for (std::size_t i = 0; i < eps.size(); ++i) {
      if (!(eps[i] > 0.0)) r.fail("eps_schedule", "entries must be positive");
      if (i > 0 && !(eps[i] < eps[i - 1])) r.fail("eps_schedule", "entries must be strictly decreasing");
    }
    c.ssf.eps_schedule = eps;
  }
  if (auto* p = r.find(doc, "exclusion_radius")) {
    c.ssf.exclusion_radius = r.number(*p, "exclusion_radius");
    if (c.ssf.exclusion_radius < 0.0) r.fail("exclusion_radius", "must be nonnegative");
  }
  if (auto* p = r.find(doc, "lambda_max")) c.lambda_max = r.positive(*p, "lambda_max");
  if (auto* p = r.find(doc, "tests")) c.tests = parse_tests(r, *p, "tests");
  if (auto* p = r.find(doc, "determinant_z")) c.determinant_z = r.complex(*p, "determinant_z");
  if (auto* p = r.find(doc, "resolvent_z")) c.resolvent_z = r.complex(*p, "resolvent_z");
  if (auto* p = r.find(doc, "probes")) c.probes = parse_tests(r, *p, "probes");
  if (auto* p = r.find(doc, "moments")) {
    r.keys(*p, "moments", {"a", "z", "n_max"});
    MomentSpec m;
    if (auto* q = r.find(*p, "a")) m.a = r.complex(*q, "moments.a");
    if (auto* q = r.find(*p, "z")) m.z = r.complex(*q, "moments.z");
    if (auto* q = r.find(*p, "n_max")) m.n_max = static_cast<int>(r.integer(*q, "moments.n_max", 1, 6));
    if (m.a.imag() == 0.0) r.fail("moments.a", "must be off the real axis");
    if (m.z.imag() == 0.0) r.fail("moments.z", "must be off the real axis");
    c.moments = m;
  }
  if (auto* p = r.find(doc, "cesaro")) {
    r.keys(*p, "cesaro", {"lambda", "radii", "half_line"});
    CesaroSpec s;
    s.lambda = r.number(r.need(*p, "cesaro", "lambda"), "cesaro.lambda");
    s.radii = r.increasing(r.need(*p, "cesaro", "radii"), "cesaro.radii");
    if (!(s.radii.front() > 0.0)) r.fail("cesaro.radii", "radii must be positive");
    if (auto* q = r.find(*p, "half_line")) s.half_line = r.boolean(*q, "cesaro.half_line");
    c.cesaro = s;
  }
  if (auto* p = r.find(doc, "kernel_samples"))
    c.kernel_samples = static_cast<int>(r.integer(*p, "kernel_samples", 1, 100000));
  if (auto* p = r.find(doc, "output")) {
    r.keys(*p, "output", {"curve", "report"});
    if (auto* q = r.find(*p, "curve")) c.curve_path = r.string(*q, "output.curve");
    if (auto* q = r.find(*p, "report")) c.report_path = r.string(*q, "output.report");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, 0, "", "cannot read configuration file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void check_for_command(const RunConfig& c, const std::string& command) {
  if (c.experiment && *c.experiment != command)
    c.reject("experiment", "config is for '" + *c.experiment + "', not '" + command + "'");
  if (command == "selfcheck" || command == "kernel-check") return;
  if (!c.potential) c.reject("potential", "required for '" + command + "'");
  const int dim = c.potential->dimension();

  if (command == "compute" || command == "counting") {
    if (c.lambdas.empty()) c.reject("lambda_grid", "required for '" + command + "'");
    const Pipeline p = command == "counting" ? Pipeline::counting : c.pipeline;
    if (p == Pipeline::counting) {
      if (!c.domain) c.reject("domain", "the counting pipeline needs a finite domain");
      if (c.domain->dimension != dim)
        c.reject("domain", "domain dimension does not match the potential");
    } else {
      if (c.domain) c.reject("domain", "det and det2 are full-space pipelines; remove the domain");
      if (p == Pipeline::det && dim != 1)
        c.reject("pipeline", "the full determinant exists in 1D only; use det2");
    }
    return;
  }
  if (command == "converge") {
    if (!c.sequence) c.reject("domain_sequence", "required for 'converge'");
    const bool balls = c.sequence->domains.front().kind == DomainSpec::Kind::ball;
    if (balls != (dim == 3))
      c.reject("domain_sequence", balls ? "balls need a 3D radial potential"
                                        : "boxes need a 1D potential");
    if (dim == 3) {
      if (!c.tests.empty()) c.reject("tests", "weak convergence runs in 1D only");
      if (c.resolvent_z) c.reject("resolvent_z", "the resolvent spot check runs in 1D only");
      if (c.moments) c.reject("moments", "moments run in 1D only");
      if (!c.determinant_z) c.reject("determinant_z", "3D convergence runs need determinant_z");
    }
    if (c.determinant_z && c.determinant_z->imag() == 0.0 && c.determinant_z->real() >= 0.0)
      c.reject("determinant_z", "must be off the spectrum [0, inf)");
    if (c.resolvent_z && c.resolvent_z->imag() == 0.0 && c.resolvent_z->real() >= 0.0)
      c.reject("resolvent_z", "must be off the spectrum [0, inf)");
    for (std::size_t i = 0; i < c.probes.size(); ++i)
      if (c.probes[i].kind != "bump" && c.probes[i].kind != "indicator")
        c.reject("probes[" + std::to_string(i) + "]", "probes must be compactly supported");
    return;
  }
  if (command == "cesaro") {
    if (dim != 1) c.reject("potential", "the Cesaro experiment is one-dimensional");
    if (!c.cesaro) c.reject("cesaro", "required for 'cesaro'");
  }
}

}  // namespace ssflab::cli
