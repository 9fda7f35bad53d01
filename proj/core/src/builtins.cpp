#include "bsdelab/builtins.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "bsdelab/errors.hpp"

namespace bsdelab {

namespace {

class Params {
 public:
  Params(const std::string& owner, const ParamMap& map) : owner_(owner), map_(map) {}

  double get(const std::string& key, double fallback) {
    seen_.insert(key);
    auto it = map_.find(key);
    return it == map_.end() ? fallback : it->second;
  }

  void done() const {
    for (const auto& [k, v] : map_)
      if (!seen_.count(k))
        throw ConfigError(owner_ + ": unknown parameter '" + k + "'");
  }

 private:
  std::string owner_;
  const ParamMap& map_;
  std::set<std::string> seen_;
};

double rho_log_unit(double t) {
  // t (1 - log t) on (0,1], increasing, concave, slope -> inf at 0+;
  // constant 1 beyond (the tangent at t = 1, so concavity is preserved)
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * (1.0 - std::log(t));
}

}  // namespace

GeneratorSpec make_generator(const std::string& name, const ParamMap& params) {
  Params pp("generator " + name, params);
  GeneratorSpec g;
  g.name = name;
  if (name == "zero") {
    g.eval = [](double, double, std::span<const double>) { return 0.0; };
    g.lipschitz_z = 0.0;
    g.linear_growth = 0.0;
    g.lipschitz_y = 0.0;
    g.affine_in_z = true;
    g.z_coefficients = {};
  } else if (name == "constant") {
    const double c = pp.get("c", 1.0);
    g.eval = [c](double, double, std::span<const double>) { return c; };
    g.lipschitz_z = 0.0;
    g.linear_growth = std::abs(c);
    g.lipschitz_y = 0.0;
    g.affine_in_z = true;
  } else if (name == "linear") {
    const double a = pp.get("a", 0.5);
    const double b = pp.get("b", 0.3);
    const double c = pp.get("c", 0.1);
    g.eval = [a, b, c](double, double y, std::span<const double> z) {
      return a * y + (z.empty() ? 0.0 : b * z[0]) + c;
    };
    g.lipschitz_z = std::abs(b);
    g.linear_growth = std::max({std::abs(a), std::abs(b), std::abs(c)});
    g.lipschitz_y = std::abs(a);
    g.affine_in_z = true;
    g.z_coefficients = {b};
  } else if (name == "cubic_decay") {
    const double b = pp.get("b", 0.3);
    g.eval = [b](double, double y, std::span<const double> z) {
      return -y * y * y + (z.empty() ? 0.0 : b * z[0]);
    };
    g.lipschitz_z = std::abs(b);
    // monotone decreasing in y: any modulus certifies the one-sided condition
    g.osgood = make_osgood("osgood_linear", {{"K", 1.0}});
    // growth is box-scoped; 3 y_box^2 covers the default box with slack
    g.linear_growth = 30.0;
    g.affine_in_z = true;
    g.z_coefficients = {b};
  } else if (name == "sine_drift") {
    const double a = pp.get("a", 1.0);
    g.eval = [a](double, double y, std::span<const double>) { return a * std::sin(y); };
    g.lipschitz_z = 0.0;
    g.linear_growth = std::abs(a);
    g.lipschitz_y = std::abs(a);
    g.affine_in_z = true;
  } else if (name == "sqrt_abs") {
    g.eval = [](double, double y, std::span<const double>) { return std::sqrt(std::abs(y)); };
    g.lipschitz_z = 0.0;
    g.linear_growth = 1.0;
    g.affine_in_z = true;
    // deliberately no lipschitz_y and no osgood: sqrt declarations are what
    // the declaration checks are supposed to refuse
  } else if (name == "osgood_pull") {
    const double K = pp.get("K", 1.0);
    if (!(K > 0.0)) throw ConfigError("osgood_pull: K must be positive");
    g.eval = [K](double, double y, std::span<const double>) {
      const double m = std::min(std::abs(y), 1.0);
      return (y > 0.0 ? -1.0 : (y < 0.0 ? 1.0 : 0.0)) * K * rho_log_unit(m);
    };
    g.lipschitz_z = 0.0;
    g.linear_growth = K;
    g.osgood = make_osgood("osgood_log", {{"K", K}});
    g.affine_in_z = true;
  } else {
    throw ConfigError("unknown generator '" + name + "'");
  }
  pp.done();
  return g;
}

TerminalSpec make_terminal(const std::string& name, const ParamMap& params) {
  Params pp("terminal " + name, params);
  TerminalSpec t;
  t.name = name;
  using Span = std::span<const double>;
  if (name == "constant") {
    const double c = pp.get("c", 1.0);
    t.eval = [c](Span, Span, std::size_t, std::size_t) { return c; };
  } else if (name == "wt") {
    t.eval = [](Span wt, Span, std::size_t, std::size_t) { return wt[0]; };
  } else if (name == "bounded_sin") {
    t.eval = [](Span wt, Span, std::size_t, std::size_t) { return std::sin(wt[0]); };
  } else if (name == "bounded_sin_shift") {
    const double delta = pp.get("delta", 0.0);
    t.eval = [delta](Span wt, Span, std::size_t, std::size_t) {
      return std::sin(wt[0]) + delta;
    };
  } else if (name == "abs_sin") {
    t.eval = [](Span wt, Span, std::size_t, std::size_t) { return std::abs(std::sin(wt[0])); };
  } else if (name == "abs_WT") {
    t.eval = [](Span wt, Span, std::size_t, std::size_t) { return std::abs(wt[0]); };
  } else if (name == "exp_clipped") {
    const double kappa = pp.get("kappa", 2.0);
    t.eval = [kappa](Span wt, Span, std::size_t, std::size_t) {
      return std::exp(std::min(wt[0], kappa));
    };
  } else if (name == "exp_wt_squared") {
    t.eval = [](Span wt, Span, std::size_t, std::size_t) {
      return std::exp(std::min(wt[0] * wt[0], 700.0));
    };
  } else if (name == "scaled") {
    const double c = pp.get("c", 1.0);
    t.eval = [c](Span wt, Span, std::size_t, std::size_t) { return c * std::sin(wt[0]); };
  } else {
    throw ConfigError("unknown terminal '" + name + "'");
  }
  pp.done();
  return t;
}

OsgoodFunction make_osgood(const std::string& name, const ParamMap& params) {
  Params pp("osgood " + name, params);
  OsgoodFunction rho;
  rho.name = name;
  if (name == "osgood_linear") {
    const double K = pp.get("K", 1.0);
    if (!(K > 0.0)) throw ConfigError("osgood_linear: K must be positive");
    rho.eval = [K](double t) { return K * t; };
  } else if (name == "osgood_log") {
    const double K = pp.get("K", 1.0);
    if (!(K > 0.0)) throw ConfigError("osgood_log: K must be positive");
    rho.eval = [K](double t) { return K * rho_log_unit(t); };
  } else {
    throw ConfigError("unknown osgood modulus '" + name + "'");
  }
  pp.done();
  return rho;
}

std::vector<BuiltinEntry> builtin_catalog() {
  return {
      {"generator", "zero", {}},
      {"generator", "constant", {"c"}},
      {"generator", "linear", {"a", "b", "c"}},
      {"generator", "cubic_decay", {"b"}},
      {"generator", "sine_drift", {"a"}},
      {"generator", "sqrt_abs", {}},
      {"generator", "osgood_pull", {"K"}},
      {"terminal", "constant", {"c"}},
      {"terminal", "wt", {}},
      {"terminal", "bounded_sin", {}},
      {"terminal", "bounded_sin_shift", {"delta"}},
      {"terminal", "abs_sin", {}},
      {"terminal", "abs_WT", {}},
      {"terminal", "exp_clipped", {"kappa"}},
      {"terminal", "exp_wt_squared", {}},
      {"terminal", "scaled", {"c"}},
      {"osgood", "osgood_linear", {"K"}},
      {"osgood", "osgood_log", {"K"}},
  };
}

}  // namespace bsdelab
