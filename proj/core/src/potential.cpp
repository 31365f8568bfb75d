#include "ssflab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ssflab/quadrature.hpp"

namespace ssflab {
namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_dimension(int d) { require(d == 1 || d == 3, "PotentialSpec: dimension must be 1 or 3"); }

}  // namespace

PotentialSpec PotentialSpec::zero(int dimension) {
  check_dimension(dimension);
  PotentialSpec p;
  p.dimension_ = dimension;
  return p;
}

PotentialSpec PotentialSpec::square_well(int dimension, double depth, double half_width) {
  check_dimension(dimension);
  require(std::isfinite(depth), "square_well: depth must be finite");
  require(half_width > 0.0 && std::isfinite(half_width), "square_well: half_width must be > 0");
  PotentialSpec p;
  p.dimension_ = dimension;
  p.profile_ = SquareWell{depth, half_width};
  p.support_radius_ = half_width;
  return p;
}

PotentialSpec PotentialSpec::gaussian(int dimension, double amplitude, double width,
                                      double support_radius) {
  check_dimension(dimension);
  require(std::isfinite(amplitude), "gaussian: amplitude must be finite");
  require(width > 0.0 && std::isfinite(width), "gaussian: width must be > 0");
  require(support_radius > 0.0 && std::isfinite(support_radius),
          "gaussian: support_radius must be > 0");
  PotentialSpec p;
  p.dimension_ = dimension;
  p.profile_ = Gaussian{amplitude, width};
  p.support_radius_ = support_radius;
  return p;
}

PotentialSpec PotentialSpec::sampled(int dimension, std::vector<double> abscissae,
                                     std::vector<double> values) {
  check_dimension(dimension);
  require(abscissae.size() >= 2, "sampled: need at least two samples");
  require(abscissae.size() == values.size(), "sampled: abscissae and values differ in length");
  for (std::size_t i = 0; i < abscissae.size(); ++i) {
    require(std::isfinite(abscissae[i]) && std::isfinite(values[i]), "sampled: non-finite sample");
    if (i > 0) require(abscissae[i] > abscissae[i - 1], "sampled: abscissae must increase");
  }
  if (dimension == 3) require(abscissae.front() >= 0.0, "sampled: radii must be >= 0");
  PotentialSpec p;
  p.dimension_ = dimension;
  p.support_radius_ = std::max(std::abs(abscissae.front()), std::abs(abscissae.back()));
  p.profile_ = Sampled{std::move(abscissae), std::move(values)};
  return p;
}

double PotentialSpec::raw(double x) const {
  const double ax = std::abs(x);
  return std::visit(
      [&](const auto& prof) -> double {
        using T = std::decay_t<decltype(prof)>;
        if constexpr (std::is_same_v<T, ZeroProfile>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, SquareWell>) {
          return ax < prof.half_width ? -prof.depth : 0.0;
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          if (ax > support_radius_) return 0.0;
          const double t = x / prof.width;
          return prof.amplitude * std::exp(-t * t);
        } else {
          const auto& xs = prof.abscissae;
          if (x < xs.front() || x > xs.back()) return 0.0;
          const auto it = std::upper_bound(xs.begin(), xs.end(), x);
          const std::size_t j = std::min<std::size_t>(it - xs.begin(), xs.size() - 1);
          const std::size_t i = j - 1;
          const double t = (x - xs[i]) / (xs[j] - xs[i]);
          return (1.0 - t) * prof.values[i] + t * prof.values[j];
        }
      },
      profile_);
}

double PotentialSpec::operator()(double x) const {
  if (x < clip_lo_ || x > clip_hi_) return 0.0;
  const double v = scale_ * raw(x);
  switch (part_) {
    case Part::whole: return v;
    case Part::positive: return v > 0.0 ? v : 0.0;
    case Part::negative: return v < 0.0 ? -v : 0.0;
  }
  return v;
}

bool PotentialSpec::is_zero() const { return breakpoints().empty(); }

std::vector<double> PotentialSpec::breakpoints() const {
  std::vector<double> b;
  const bool three = dimension_ == 3;
  std::visit(
      [&](const auto& prof) {
        using T = std::decay_t<decltype(prof)>;
        if constexpr (std::is_same_v<T, SquareWell>) {
          if (prof.depth == 0.0) return;
          if (three) b = {0.0, prof.half_width};
          else b = {-prof.half_width, prof.half_width};
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          if (prof.amplitude == 0.0) return;
          if (three) b = {0.0, support_radius_};
          else b = {-support_radius_, 0.0, support_radius_};
        } else if constexpr (std::is_same_v<T, Sampled>) {
          const auto& xs = prof.abscissae;
          const auto& vs = prof.values;
          if (std::all_of(vs.begin(), vs.end(), [](double v) { return v == 0.0; })) return;
          for (std::size_t i = 0; i < xs.size(); ++i) {
            b.push_back(xs[i]);
            if (i + 1 < xs.size() && vs[i] * vs[i + 1] < 0.0)
              b.push_back(xs[i] + (xs[i + 1] - xs[i]) * vs[i] / (vs[i] - vs[i + 1]));
          }
        }
      },
      profile_);
  if (b.empty() || scale_ == 0.0) return {};
  // clip
  std::vector<double> c;
  const double lo = std::max(b.front(), clip_lo_), hi = std::min(b.back(), clip_hi_);
  if (!(hi > lo)) return {};
  c.push_back(lo);
  for (double x : b)
    if (x > lo && x < hi) c.push_back(x);
  c.push_back(hi);
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end(), [](double p, double q) { return std::abs(p - q) <= 1e-14 * (1.0 + std::abs(p)); }), c.end());
  if (part_ != Part::whole) {
    // drop panels where this part vanishes identically (sign is constant per panel)
    std::vector<bool> keep(c.size() - 1);
    for (std::size_t i = 0; i + 1 < c.size(); ++i) keep[i] = (*this)(0.5 * (c[i] + c[i + 1])) != 0.0;
    const auto first = std::find(keep.begin(), keep.end(), true);
    if (first == keep.end()) return {};
    const auto last = std::find(keep.rbegin(), keep.rend(), true);
    const std::size_t i0 = first - keep.begin();
    const std::size_t i1 = keep.size() - (last - keep.rbegin());
    c = std::vector<double>(c.begin() + i0, c.begin() + i1 + 1);
  }
  if (c.size() < 2) return {};
  return c;
}

double PotentialSpec::support_lo() const {
  const auto b = breakpoints();
  return b.empty() ? 0.0 : b.front();
}

double PotentialSpec::support_hi() const {
  const auto b = breakpoints();
  return b.empty() ? 0.0 : b.back();
}

double PotentialSpec::integrate(bool absolute) const {
  const auto b = breakpoints();
  if (b.empty()) return 0.0;
  const GaussRule& gl = gauss_legendre(64);
  double sum = 0.0;
  for (std::size_t p = 0; p + 1 < b.size(); ++p) {
    const double half = 0.5 * (b[p + 1] - b[p]), mid = 0.5 * (b[p + 1] + b[p]);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double x = mid + half * gl.nodes[i];
      double v = (*this)(x);
      if (absolute) v = std::abs(v);
      if (dimension_ == 3) v *= 4.0 * std::numbers::pi * x * x;
      sum += half * gl.weights[i] * v;
    }
  }
  return sum;
}

double PotentialSpec::integral() const { return integrate(false); }
double PotentialSpec::l1_norm() const { return integrate(true); }

double PotentialSpec::min_value() const {
  const auto b = breakpoints();
  double m = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    m = std::min(m, (*this)(b[i]));
    if (i + 1 < b.size()) m = std::min(m, (*this)(0.5 * (b[i] + b[i + 1])));
  }
  return m;
}

double PotentialSpec::max_value() const {
  const auto b = breakpoints();
  double m = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    m = std::max(m, (*this)(b[i]));
    if (i + 1 < b.size()) m = std::max(m, (*this)(0.5 * (b[i] + b[i + 1])));
  }
  return m;
}

PotentialSpec PotentialSpec::positive_part() const {
  PotentialSpec p = *this;
  if (part_ == Part::whole) p.part_ = Part::positive;
  else if (part_ == Part::negative) p.scale_ = 0.0;
  return p;
}

PotentialSpec PotentialSpec::negative_part() const {
  PotentialSpec p = *this;
  if (part_ == Part::whole) p.part_ = Part::negative;
  else p.scale_ = 0.0;  // parts are nonnegative already
  return p;
}

PotentialSpec PotentialSpec::restricted(double lo, double hi) const {
  require(lo < hi, "restricted: need lo < hi");
  PotentialSpec p = *this;
  p.clip_lo_ = std::max(clip_lo_, lo);
  p.clip_hi_ = std::min(clip_hi_, hi);
  return p;
}

PotentialSpec PotentialSpec::scaled(double factor) const {
  require(std::isfinite(factor), "scaled: factor must be finite");
  PotentialSpec p = *this;
  if (factor < 0.0 && part_ != Part::whole)
    throw std::invalid_argument("scaled: negative factor on a sign part");
  p.scale_ *= factor;
  return p;
}

std::string PotentialSpec::describe() const {
  std::ostringstream os;
  os << dimension_ << "d ";
  std::visit(
      [&](const auto& prof) {
        using T = std::decay_t<decltype(prof)>;
        if constexpr (std::is_same_v<T, ZeroProfile>) os << "zero";
        else if constexpr (std::is_same_v<T, SquareWell>)
          os << "square_well(depth=" << prof.depth << ",half_width=" << prof.half_width << ")";
        else if constexpr (std::is_same_v<T, Gaussian>)
          os << "gaussian(amplitude=" << prof.amplitude << ",width=" << prof.width
             << ",support=" << support_radius_ << ")";
        else os << "sampled(" << prof.abscissae.size() << " points)";
      },
      profile_);
  if (scale_ != 1.0) os << "*" << scale_;
  if (part_ == Part::positive) os << "[+]";
  if (part_ == Part::negative) os << "[-]";
  if (std::isfinite(clip_lo_) || std::isfinite(clip_hi_))
    os << " on (" << clip_lo_ << "," << clip_hi_ << ")";
  return os.str();
}

double FactorPair::v(double x) const { return std::sqrt(std::abs(potential_(x))); }

double FactorPair::u(double x) const {
  const double V = potential_(x);
  const double s = std::sqrt(std::abs(V));
  return V < 0.0 ? -s : s;
}

FactorPair factorize(const PotentialSpec& V) { return FactorPair(V); }

FactorPair factorize(const PotentialSpec& V, double lo, double hi) {
  FactorPair f(V.restricted(lo, hi));
  f.restricted_ = true;
  return f;
}

SignSplit sign_split(const PotentialSpec& V) { return {V.positive_part(), V.negative_part()}; }

}  // namespace ssflab
