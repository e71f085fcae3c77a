#include "denest/networks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace denest {

namespace {
constexpr double kBreakpointDedup = 1e-14;

void write_doubles(std::ostream& os, const std::vector<double>& v) {
  char buf[64];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
    os << buf << (i + 1 < v.size() ? ' ' : '\n');
  }
  if (v.empty()) os << '\n';
}
}  // namespace

ShallowGenerator ShallowGenerator::zeros(int out_dim, int hidden) {
  ShallowGenerator g;
  g.out_dim = out_dim;
  g.hidden = hidden;
  g.w_in.assign(hidden, 0.0);
  g.b.assign(hidden, 0.0);
  g.w_out.assign(static_cast<std::size_t>(out_dim) * hidden, 0.0);
  g.out_bias.assign(out_dim, 0.0);
  return g;
}

void ShallowGenerator::validate() const {
  require(out_dim >= 1 && hidden >= 0, "ShallowGenerator: bad dims");
  require(w_in.size() == static_cast<std::size_t>(hidden), "ShallowGenerator: w_in size");
  require(b.size() == static_cast<std::size_t>(hidden), "ShallowGenerator: b size");
  require(w_out.size() == static_cast<std::size_t>(out_dim) * hidden,
          "ShallowGenerator: w_out size");
  require(out_bias.size() == static_cast<std::size_t>(out_dim), "ShallowGenerator: bias size");
}

std::size_t ShallowGenerator::param_count() const {
  return w_in.size() + b.size() + w_out.size() + out_bias.size();
}

std::vector<double> ShallowGenerator::pack_params() const {
  std::vector<double> p;
  p.reserve(param_count());
  p.insert(p.end(), w_in.begin(), w_in.end());
  p.insert(p.end(), b.begin(), b.end());
  p.insert(p.end(), w_out.begin(), w_out.end());
  p.insert(p.end(), out_bias.begin(), out_bias.end());
  return p;
}

void ShallowGenerator::unpack_params(const std::vector<double>& p) {
  require(p.size() == param_count(), "unpack_params: size mismatch");
  std::size_t i = 0;
  for (auto& v : w_in) v = p[i++];
  for (auto& v : b) v = p[i++];
  for (auto& v : w_out) v = p[i++];
  for (auto& v : out_bias) v = p[i++];
}

double ShallowGenerator::max_param_magnitude() const {
  double m = 0.0;
  for (double v : w_in) m = std::max(m, std::abs(v));
  for (double v : b) m = std::max(m, std::abs(v));
  for (double v : w_out) m = std::max(m, std::abs(v));
  for (double v : out_bias) m = std::max(m, std::abs(v));
  return m;
}

void ShallowGenerator::save(std::ostream& os) const {
  os << out_dim << ' ' << hidden << '\n';
  write_doubles(os, w_in);
  write_doubles(os, b);
  write_doubles(os, w_out);
  write_doubles(os, out_bias);
}

ShallowGenerator ShallowGenerator::load(std::istream& is) {
  int d = 0, d1 = 0;
  if (!(is >> d >> d1)) throw std::invalid_argument("generator file: bad header");
  ShallowGenerator g = zeros(d, d1);
  auto read_into = [&is](std::vector<double>& v, const char* what) {
    for (auto& x : v)
      if (!(is >> x)) throw std::invalid_argument(std::string("generator file: truncated ") + what);
  };
  read_into(g.w_in, "w_in");
  read_into(g.b, "b");
  read_into(g.w_out, "w_out");
  read_into(g.out_bias, "out_bias");
  g.validate();
  return g;
}

void ShallowGenerator::save_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  save(os);
}

ShallowGenerator ShallowGenerator::load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  return load(is);
}

Point eval(const ShallowGenerator& g, double z) {
  if (z < 0.0 || z > 1.0) throw std::invalid_argument("eval: z outside [0,1]");
  Point out = g.out_bias;
  for (int j = 0; j < g.hidden; ++j) {
    const double h = std::max(g.w_in[j] * z - g.b[j], 0.0);
    if (h == 0.0) continue;
    for (int i = 0; i < g.out_dim; ++i)
      out[i] += g.w_out[static_cast<std::size_t>(i) * g.hidden + j] * h;
  }
  return out;
}

std::vector<double> breakpoints(const ShallowGenerator& g) {
  std::vector<double> pts;
  for (int j = 0; j < g.hidden; ++j) {
    if (g.w_in[j] == 0.0) continue;
    const double z = g.b[j] / g.w_in[j];
    if (z > 0.0 && z < 1.0) pts.push_back(z);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double z : pts)
    if (out.empty() || z - out.back() > kBreakpointDedup) out.push_back(z);
  return out;
}

PiecewiseLinearForm to_piecewise_linear(const ShallowGenerator& g) {
  PiecewiseLinearForm f;
  f.out_dim = g.out_dim;
  f.knots.push_back(0.0);
  for (double z : breakpoints(g)) f.knots.push_back(z);
  f.knots.push_back(1.0);
  const std::size_t segs = f.knots.size() - 1;
  f.intercept.assign(segs, Point(g.out_dim, 0.0));
  f.slope.assign(segs, Point(g.out_dim, 0.0));
  for (std::size_t s = 0; s < segs; ++s) {
    const double zm = 0.5 * (f.knots[s] + f.knots[s + 1]);
    Point& c = f.intercept[s];
    Point& v = f.slope[s];
    c = g.out_bias;
    for (int j = 0; j < g.hidden; ++j) {
      if (g.w_in[j] * zm - g.b[j] <= 0.0) continue;
      for (int i = 0; i < g.out_dim; ++i) {
        const double w = g.w_out[static_cast<std::size_t>(i) * g.hidden + j];
        c[i] -= w * g.b[j];
        v[i] += w * g.w_in[j];
      }
    }
  }
  return f;
}

Point eval_form(const PiecewiseLinearForm& f, double z) {
  if (z < 0.0 || z > 1.0) throw std::invalid_argument("eval_form: z outside [0,1]");
  std::size_t s = 0;
  while (s + 1 < f.intercept.size() && z > f.knots[s + 1]) ++s;
  Point out(f.out_dim);
  for (int i = 0; i < f.out_dim; ++i) out[i] = f.intercept[s][i] + f.slope[s][i] * z;
  return out;
}

double sup_norm(const ShallowGenerator& g) {
  // piecewise linear, so the sup is attained at a breakpoint or an endpoint
  std::vector<double> zs = breakpoints(g);
  zs.push_back(0.0);
  zs.push_back(1.0);
  double m = 0.0;
  for (double z : zs)
    for (double v : eval(g, z)) m = std::max(m, std::abs(v));
  return m;
}

StepGenerator StepGenerator::create(std::vector<double> cuts, std::vector<Point> values) {
  StepGenerator s;
  s.out_dim = values.empty() ? 0 : static_cast<int>(values.front().size());
  s.cuts = std::move(cuts);
  s.values = std::move(values);
  s.validate();
  return s;
}

void StepGenerator::validate() const {
  require(!values.empty(), "StepGenerator: needs at least one interval");
  require(cuts.size() == values.size() + 1, "StepGenerator: cuts/values size mismatch");
  require(cuts.front() == 0.0 && cuts.back() == 1.0, "StepGenerator: cuts must span [0,1]");
  for (std::size_t t = 0; t + 1 < cuts.size(); ++t)
    require(cuts[t] < cuts[t + 1], "StepGenerator: cuts must be strictly increasing");
  for (const auto& v : values)
    require(static_cast<int>(v.size()) == out_dim, "StepGenerator: inconsistent value dim");
}

double StepGenerator::min_interval_length() const {
  double m = 1.0;
  for (std::size_t t = 0; t + 1 < cuts.size(); ++t) m = std::min(m, cuts[t + 1] - cuts[t]);
  return m;
}

Point step_eval(const StepGenerator& s, double z) {
  if (z < 0.0 || z > 1.0) throw std::invalid_argument("step_eval: z outside [0,1]");
  // value on (cuts[t], cuts[t+1]]; 0 belongs to the first interval
  const auto it = std::lower_bound(s.cuts.begin() + 1, s.cuts.end(), z);
  return s.values[static_cast<std::size_t>(it - s.cuts.begin()) - 1];
}

}  // namespace denest
