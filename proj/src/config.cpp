#include "anisomt/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "anisomt/error.hpp"

namespace anisomt {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(Errc::config_error, msg); }

// every key the experiment driver understands
const std::set<std::string>& known_keys() {
  static const std::set<std::string> k{
      "seed", "h", "h_inv",
      "norm.family", "norm.dim", "norm.p", "norm.weights", "norm.matrix", "norm.angles", "norm.support",
      "domain.kind", "domain.radius", "domain.side", "domain.vertices", "domain.scale", "domain.center",
      "field.kind", "field.center", "field.width", "field.radius",
      "norm_check.samples",
      "isoperimetric.levels", "isoperimetric.coarea_levels",
      "eigen.tol", "eigen.max_outer",
      "solve.source", "solve.tol", "solve.max_iter",
      "bubble.r_max", "bubble.points", "bubble.grid_h", "bubble.r_check",
      "green.alpha", "green.x0",
      "maximize.eps_sub", "maximize.alpha", "maximize.max_iter", "maximize.jitter", "maximize.tol",
      "moser.eps", "moser.alpha", "moser.lambda", "moser.t_exponent",
      "glued.eps", "glued.alpha",
      "identities.n_max",
  };
  return k;
}

bool as_double(const toml::node& n, double& out) {
  if (auto v = n.value<double>()) {
    out = *v;
    return true;
  }
  return false;
}

void flatten(const toml::table& t, const std::string& prefix, std::map<std::string, Config::Value>& out) {
  for (const auto& [k, node] : t) {
    const std::string key = prefix.empty() ? std::string(k.str()) : prefix + "." + std::string(k.str());
    if (const auto* sub = node.as_table()) {
      flatten(*sub, key, out);
    } else if (const auto* arr = node.as_array()) {
      if (arr->empty()) {
        out[key] = std::vector<double>{};
      } else if (arr->front().is_array()) {
        std::vector<std::vector<double>> pts;
        for (const auto& row : *arr) {
          const auto* r = row.as_array();
          if (!r) fail(key + ": mixed array");
          std::vector<double> p;
          for (const auto& x : *r) {
            double d;
            if (!as_double(x, d)) fail(key + ": expected numbers");
            p.push_back(d);
          }
          pts.push_back(std::move(p));
        }
        out[key] = std::move(pts);
      } else {
        std::vector<double> v;
        for (const auto& x : *arr) {
          double d;
          if (!as_double(x, d)) fail(key + ": expected an array of numbers");
          v.push_back(d);
        }
        out[key] = std::move(v);
      }
    } else if (auto b = node.value_exact<bool>()) {
      out[key] = *b;
    } else if (auto i = node.value_exact<std::int64_t>()) {
      out[key] = *i;
    } else if (auto d = node.value_exact<double>()) {
      out[key] = *d;
    } else if (auto s = node.value_exact<std::string>()) {
      out[key] = *s;
    } else {
      fail(key + ": unsupported value type");
    }
  }
}

std::string render(const Config::Value& v) {
  struct {
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return fmt::format("{:.17g}", d); }
    std::string operator()(const std::string& s) const { return "\"" + s + "\""; }
    std::string operator()(const std::vector<double>& a) const {
      std::string s = "[";
      for (std::size_t i = 0; i < a.size(); ++i) s += (i ? ", " : "") + fmt::format("{:.17g}", a[i]);
      return s + "]";
    }
    std::string operator()(const std::vector<std::vector<double>>& a) const {
      std::string s = "[";
      for (std::size_t i = 0; i < a.size(); ++i) s += (i ? ", " : "") + (*this)(a[i]);
      return s + "]";
    }
  } vis;
  return std::visit(vis, v);
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& source) {
  Config c;
  c.text_ = text;
  c.source_ = source;
  toml::table t;
  try {
    t = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
    fail(os.str());
  }
  flatten(t, "", c.values_);
  for (const auto& [k, v] : c.values_)
    if (!known_keys().count(k)) fail(source + ": unknown key '" + k + "'");
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

double Config::number(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail("missing key '" + key + "'");
  if (auto d = std::get_if<double>(&it->second)) return *d;
  if (auto i = std::get_if<std::int64_t>(&it->second)) return double(*i);
  fail(key + ": expected a number");
}

double Config::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::int64_t Config::integer(const std::string& key, std::int64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (auto i = std::get_if<std::int64_t>(&it->second)) return *i;
  fail(key + ": expected an integer");
}

bool Config::flag(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (auto b = std::get_if<bool>(&it->second)) return *b;
  fail(key + ": expected true or false");
}

std::string Config::string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (auto s = std::get_if<std::string>(&it->second)) return *s;
  fail(key + ": expected a string");
}

std::vector<double> Config::numbers(const std::string& key, const std::vector<double>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (auto v = std::get_if<std::vector<double>>(&it->second)) return *v;
  if (auto d = std::get_if<double>(&it->second)) return {*d};
  if (auto i = std::get_if<std::int64_t>(&it->second)) return {double(*i)};
  fail(key + ": expected an array of numbers");
}

std::vector<std::vector<double>> Config::points(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail("missing key '" + key + "'");
  if (auto v = std::get_if<std::vector<std::vector<double>>>(&it->second)) return *v;
  fail(key + ": expected an array of points");
}

std::string Config::echo() const {
  std::string s;
  for (const auto& [k, v] : values_) s += k + " = " + render(v) + "\n";
  return s;
}

FinslerNorm norm_from(const Config& c) {
  const std::string fam = c.string("norm.family", "euclidean");
  try {
    if (fam == "euclidean") return FinslerNorm::euclidean(int(c.integer("norm.dim", 2)));
    if (fam == "weighted_p") {
      const int dim = int(c.integer("norm.dim", 2));
      auto w = c.numbers("norm.weights", std::vector<double>(dim, 1.0));
      return FinslerNorm::weighted_p_norm(c.number("norm.p"), std::move(w));
    }
    if (fam == "quadratic") {
      auto A = c.numbers("norm.matrix");
      const int dim = int(c.integer("norm.dim", A.size() == 9 ? 3 : 2));
      return FinslerNorm::quadratic_form(dim, std::move(A));
    }
    if (fam == "sampled_support")
      return FinslerNorm::sampled_support(c.numbers("norm.angles"), c.numbers("norm.support"));
  } catch (const Error& e) {
    if (e.code() == Errc::config_error) throw;
    fail("norm: " + std::string(e.what()));
  }
  fail("norm.family: unknown family '" + fam + "'");
}

Vec point_from(const Config& c, const std::string& key, int dim) {
  Vec p{};
  if (!c.has(key)) return p;
  auto v = c.numbers(key);
  if (int(v.size()) != dim) fail(key + ": expected " + std::to_string(dim) + " coordinates");
  std::copy(v.begin(), v.end(), p.begin());
  return p;
}

Domain domain_from(const Config& c, int dim) {
  const std::string kind = c.string("domain.kind", "disk");
  const Vec center = point_from(c, "domain.center", dim);
  const double scale = c.number("domain.scale", 1.0);
  if (!(scale > 0.0)) fail("domain.scale must be positive");
  Domain d;
  if (kind == "disk") {
    d = Domain::disk(c.number("domain.radius", 1.0), dim, center);
  } else if (kind == "square") {
    d = Domain::square(c.number("domain.side", 1.0), dim, center);
  } else if (kind == "polygon") {
    if (dim != 2) fail("domain: polygons are 2D");
    std::vector<Vec> verts;
    for (const auto& p : c.points("domain.vertices")) {
      if (p.size() != 2) fail("domain.vertices: expected [x, y] pairs");
      verts.push_back(vec2(p[0], p[1]));
    }
    if (verts.size() < 3) fail("domain.vertices: need at least 3 vertices");
    return Domain::polygon(std::move(verts), scale);
  } else if (kind == "wulff") {
    d = Domain::wulff(norm_from(c), c.number("domain.radius", 1.0), center);
  } else {
    fail("domain.kind: unknown kind '" + kind + "'");
  }
  if (!(d.scale > 0.0)) fail("domain: size must be positive");
  return scale == 1.0 ? d : d.scaled_by(scale);
}

double mesh_spacing(const Config& c, double fallback) {
  double h = fallback;
  if (c.has("h_inv")) {
    const double k = c.number("h_inv");
    if (!(k > 0.0)) fail("h_inv must be positive");
    h = 1.0 / k;
  }
  if (c.has("h")) h = c.number("h");
  if (!(h > 0.0)) fail("h must be positive");
  return h;
}

std::uint64_t seed_from(const Config& c) {
  const std::int64_t s = c.integer("seed", 1);
  if (s < 0) fail("seed must be nonnegative");
  return std::uint64_t(s);
}

std::string config_backend_version() {
  return fmt::format("toml++ {}.{}.{}", TOML_LIB_MAJOR, TOML_LIB_MINOR, TOML_LIB_PATCH);
}

std::vector<double> ladder_from(const Config& c, const std::string& key, const std::vector<double>& fallback) {
  auto v = c.numbers(key, fallback);
  if (v.empty()) fail(key + ": empty ladder");
  bool inc = true, dec = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    inc = inc && v[i] > v[i - 1];
    dec = dec && v[i] < v[i - 1];
  }
  if (v.size() > 1 && !inc && !dec) fail(key + ": ladder must be strictly monotone");
  return v;
}

}  // namespace anisomt
