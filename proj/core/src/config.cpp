#include "bsdelab/config.hpp"

#include <set>

#include <json.hpp>

#include "bsdelab/errors.hpp"
#include "bsdelab/math_util.hpp"

namespace bsdelab {

using nlohmann::json;

namespace {

const std::set<std::string> kKinds = {"psi-check", "solve",     "price",
                                      "admissibility", "uniqueness", "comparison",
                                      "stability",     "class-d",    "apriori"};

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad(path_, "expected an object");
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception& e) {
      bad(path_ + "/" + key, e.what());
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  // Returns a reference into the parent object (or a shared empty object),
  // so a Section built on top of it never outlives its storage.
  const json& sub(const std::string& key) {
    static const json empty = json::object();
    seen_.insert(key);
    return j_.contains(key) ? j_.at(key) : empty;
  }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) bad(path_ + "/" + it.key(), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

ParamMap param_map(const json& j, const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object of numbers");
  ParamMap out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number()) bad(path + "/" + it.key(), "expected a number");
    out[it.key()] = it.value().get<double>();
  }
  return out;
}

NamedSpec named_spec(const json& j, const std::string& path, const NamedSpec& fallback) {
  if (j.is_null() || (j.is_object() && j.empty())) return fallback;
  Section s(j, path);
  NamedSpec out;
  out.name = s.get<std::string>("name", fallback.name);
  out.params = s.has("params") ? param_map(s.sub("params"), path + "/params") : fallback.params;
  s.done();
  return out;
}

BasisSpec basis_spec(const json& j, const std::string& path, const BasisSpec& fallback) {
  if (j.is_null() || (j.is_object() && j.empty())) return fallback;
  Section s(j, path);
  BasisSpec out = fallback;
  out.degree = s.get<int>("degree", fallback.degree);
  out.ridge_scale = s.get<double>("ridge", fallback.ridge_scale);
  s.done();
  if (out.degree < 1 || out.degree > 8) bad(path + "/degree", "must be in [1,8]");
  if (!(out.ridge_scale >= 0.0)) bad(path + "/ridge", "must be nonnegative");
  return out;
}

json named_to_json(const NamedSpec& n) {
  json j;
  j["name"] = n.name;
  j["params"] = json::object();
  for (const auto& [k, v] : n.params) j["params"][k] = v;
  return j;
}

json basis_to_json(const BasisSpec& b) {
  json j;
  j["degree"] = b.degree;
  j["ridge"] = b.ridge_scale;
  return j;
}

json resolve_to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.kind;
  j["grid"] = {{"horizon", c.horizon}, {"steps", c.steps}};
  j["ensemble"] = {{"paths", c.paths}, {"dim", c.dim}, {"seed", c.seed}};
  j["psi"] = {{"mu", c.mu}, {"b", c.b}};
  j["generator"] = named_to_json(c.generator);
  j["terminal"] = named_to_json(c.terminal);
  j["basis"] = basis_to_json(c.basis);
  j["solver"] = {{"damping", c.damping},
                 {"max_inner", c.max_inner},
                 {"inner_tol", c.inner_tol},
                 {"clip_predictions", c.clip_predictions},
                 {"declaration_checks", c.declaration_checks},
                 {"check_samples", c.check_samples},
                 {"picard_sweeps", c.picard_sweeps},
                 {"picard_tol", c.picard_tol},
                 {"picard_slice", c.picard_slice}};
  j["tolerances"] = {{"unique_c1", c.tol.unique_c1},
                     {"unique_c2", c.tol.unique_c2},
                     {"comparison", c.tol.comparison},
                     {"stability", c.tol.stability},
                     {"series_band", c.tol.series_band},
                     {"uniform_int_eps", c.tol.uniform_int_eps},
                     {"apriori_violation", c.tol.apriori_violation},
                     {"ess_floor", c.tol.ess_floor_fraction},
                     {"price_gap", c.tol.price_gap}};
  j["output_dir"] = c.output_dir;
  if (c.kind == "uniqueness") j["uniqueness"] = {{"basis2", basis_to_json(c.basis2)}};
  if (c.kind == "comparison")
    j["comparison"] = {{"mode", c.comparison_mode},
                       {"probe_delta", c.probe_delta},
                       {"generator_prime", named_to_json(c.generator_prime)},
                       {"terminal_prime", named_to_json(c.terminal_prime)}};
  if (c.kind == "stability")
    j["stability"] = {{"l0", c.stab_l0},
                      {"n_values", c.stab_n_values},
                      {"betas", c.stab_betas},
                      {"eta", named_to_json(c.stab_eta)}};
  if (c.kind == "class-d") j["classd"] = {{"k_ladder", c.classd_ladder}};
  if (c.kind == "admissibility" || c.kind == "price")
    j["admissibility"] = {{"stability_threshold", c.admissibility_threshold}};
  if (c.kind == "price") j["price"] = {{"override_admissibility", c.price_override}};
  if (c.kind == "solve")
    j["solve"] = {{"scheme", c.solve_scheme}, {"dump_solution", c.dump_solution}};
  if (c.kind == "psi-check") j["psi_check"] = {{"samples", c.psi_check_samples}};
  return j;
}

void freeze(ExperimentConfig& c) {
  json j = resolve_to_json(c);
  c.resolved_json = j.dump(2);
  j.erase("output_dir");  // location must not change identity
  const std::string canon = j.dump();
  c.hash = to_hex(fnv1a(canon.data(), canon.size()));
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig c;
  Section top(root, "");
  c.kind = top.get<std::string>("experiment", "");
  if (!kKinds.count(c.kind))
    bad("/experiment", "unknown experiment kind '" + c.kind + "'");

  {
    Section s(top.sub("grid"), "/grid");
    c.horizon = s.get<double>("horizon", c.horizon);
    c.steps = s.get<std::size_t>("steps", c.steps);
    s.done();
    if (!(c.horizon > 0.0)) bad("/grid/horizon", "must be positive");
    if (c.steps < 1) bad("/grid/steps", "must be >= 1");
  }
  {
    Section s(top.sub("ensemble"), "/ensemble");
    c.paths = s.get<std::size_t>("paths", c.paths);
    c.dim = s.get<std::size_t>("dim", c.dim);
    c.seed = s.get<std::uint64_t>("seed", c.seed);
    s.done();
    if (c.paths < 2) bad("/ensemble/paths", "must be >= 2");
    if (c.dim < 1 || c.dim > 16) bad("/ensemble/dim", "must be in [1,16]");
  }
  {
    Section s(top.sub("psi"), "/psi");
    c.mu = s.get<double>("mu", c.mu);
    c.b = s.get<double>("b", c.b);
    s.done();
    if (!(c.mu > 0.0)) bad("/psi/mu", "must be positive");
  }
  c.generator = named_spec(top.sub("generator"), "/generator", c.generator);
  c.terminal = named_spec(top.sub("terminal"), "/terminal", c.terminal);
  c.basis = basis_spec(top.sub("basis"), "/basis", c.basis);
  {
    Section s(top.sub("solver"), "/solver");
    c.damping = s.get<double>("damping", c.damping);
    c.max_inner = s.get<std::size_t>("max_inner", c.max_inner);
    c.inner_tol = s.get<double>("inner_tol", c.inner_tol);
    c.clip_predictions = s.get<bool>("clip_predictions", c.clip_predictions);
    c.declaration_checks = s.get<bool>("declaration_checks", c.declaration_checks);
    c.check_samples = s.get<std::size_t>("check_samples", c.check_samples);
    c.picard_sweeps = s.get<std::size_t>("picard_sweeps", c.picard_sweeps);
    c.picard_tol = s.get<double>("picard_tol", c.picard_tol);
    c.picard_slice = s.get<std::size_t>("picard_slice", c.picard_slice);
    s.done();
    if (!(c.damping > 0.0 && c.damping <= 1.0)) bad("/solver/damping", "must be in (0,1]");
  }
  {
    Section s(top.sub("tolerances"), "/tolerances");
    c.tol.unique_c1 = s.get<double>("unique_c1", c.tol.unique_c1);
    c.tol.unique_c2 = s.get<double>("unique_c2", c.tol.unique_c2);
    c.tol.comparison = s.get<double>("comparison", c.tol.comparison);
    c.tol.stability = s.get<double>("stability", c.tol.stability);
    c.tol.series_band = s.get<double>("series_band", c.tol.series_band);
    c.tol.uniform_int_eps = s.get<double>("uniform_int_eps", c.tol.uniform_int_eps);
    c.tol.apriori_violation = s.get<double>("apriori_violation", c.tol.apriori_violation);
    c.tol.ess_floor_fraction = s.get<double>("ess_floor", c.tol.ess_floor_fraction);
    c.tol.price_gap = s.get<double>("price_gap", c.tol.price_gap);
    s.done();
  }
  c.output_dir = top.get<std::string>("output_dir", "");

  if (top.has("uniqueness")) {
    Section s(top.sub("uniqueness"), "/uniqueness");
    c.basis2 = basis_spec(s.sub("basis2"), "/uniqueness/basis2", c.basis2);
    s.done();
  }
  if (top.has("comparison")) {
    Section s(top.sub("comparison"), "/comparison");
    c.comparison_mode = s.get<std::string>("mode", c.comparison_mode);
    c.probe_delta = s.get<double>("probe_delta", c.probe_delta);
    c.generator_prime = named_spec(s.sub("generator_prime"), "/comparison/generator_prime",
                                   c.generator_prime);
    c.terminal_prime =
        named_spec(s.sub("terminal_prime"), "/comparison/terminal_prime", c.terminal_prime);
    s.done();
    if (c.comparison_mode != "lipschitz" && c.comparison_mode != "osgood")
      bad("/comparison/mode", "must be 'lipschitz' or 'osgood'");
  }
  if (top.has("stability")) {
    Section s(top.sub("stability"), "/stability");
    c.stab_l0 = s.get<double>("l0", c.stab_l0);
    c.stab_n_values = s.get<std::vector<double>>("n_values", c.stab_n_values);
    c.stab_betas = s.get<std::vector<double>>("betas", c.stab_betas);
    c.stab_eta = named_spec(s.sub("eta"), "/stability/eta", c.stab_eta);
    s.done();
  }
  if (top.has("classd")) {
    Section s(top.sub("classd"), "/classd");
    c.classd_ladder = s.get<std::vector<double>>("k_ladder", c.classd_ladder);
    s.done();
  }
  if (top.has("admissibility")) {
    Section s(top.sub("admissibility"), "/admissibility");
    c.admissibility_threshold = s.get<double>("stability_threshold", c.admissibility_threshold);
    s.done();
  }
  if (top.has("price")) {
    Section s(top.sub("price"), "/price");
    c.price_override = s.get<bool>("override_admissibility", c.price_override);
    s.done();
  }
  if (top.has("solve")) {
    Section s(top.sub("solve"), "/solve");
    c.solve_scheme = s.get<std::string>("scheme", c.solve_scheme);
    c.dump_solution = s.get<bool>("dump_solution", c.dump_solution);
    s.done();
  }
  if (top.has("psi_check")) {
    Section s(top.sub("psi_check"), "/psi_check");
    c.psi_check_samples = s.get<std::size_t>("samples", c.psi_check_samples);
    s.done();
  }
  top.done();

  // defaults that depend on the rest of the config
  if (c.kind == "comparison" && c.generator_prime.name.empty())
    c.generator_prime = c.generator;
  if (c.kind == "comparison" && c.terminal_prime.name.empty()) c.terminal_prime = c.terminal;

  freeze(c);
  return c;
}

std::string default_config_json(const std::string& kind) {
  ExperimentConfig c;
  if (!kKinds.count(kind)) throw ConfigError("default_config_json: unknown kind '" + kind + "'");
  c.kind = kind;
  if (kind == "comparison") {
    c.generator_prime = c.generator;
    c.terminal_prime = c.terminal;
    c.terminal = NamedSpec{"bounded_sin_shift", {{"delta", -0.2}}};
  }
  if (kind == "stability") {
    // contraction drift keeps every rung of the perturbation ladder
    // well-conditioned over the default horizon
    c.generator = NamedSpec{"linear", {{"a", -1.0}, {"b", 0.5}, {"c", 0.0}}};
  }
  freeze(c);
  return c.resolved_json;
}

std::string apply_overrides(const std::string& json_text,
                            const std::vector<std::string>& overrides) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("override '" + ov + "' is not of the form path.to.key=value");
    const std::string path = ov.substr(0, eq);
    const std::string raw = ov.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::exception&) {
      value = raw;  // bare strings are allowed unquoted
    }
    json* node = &root;
    std::size_t begin = 0;
    while (true) {
      const auto dot = path.find('.', begin);
      const std::string key = path.substr(begin, dot == std::string::npos ? dot : dot - begin);
      if (key.empty()) throw ConfigError("override '" + ov + "': empty path segment");
      if (dot == std::string::npos) {
        (*node)[key] = value;
        break;
      }
      node = &(*node)[key];
      if (!node->is_object() && !node->is_null())
        throw ConfigError("override '" + ov + "': '" + key + "' is not an object");
      begin = dot + 1;
    }
  }
  return root.dump();
}

}  // namespace bsdelab
