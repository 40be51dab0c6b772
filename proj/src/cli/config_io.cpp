#include "cli/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace gaplab::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Walks one JSON object, recording which keys were consumed so leftovers can
// be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError("config key '" + display() + "': expected an object");
  }

  [[nodiscard]] std::string key_path(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    out = convert<T>(*v, key);
  }

  template <typename T>
  void read_optional(const std::string& key, std::optional<T>& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (v->is_null()) {
      out.reset();
      return;
    }
    out = convert<T>(*v, key);
  }

  ObjectReader child(const std::string& key) {
    const json* v = find(key);
    static const json empty = json::object();
    return ObjectReader(v == nullptr ? empty : *v, key_path(key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("config key '" + key_path(key) + "': unknown key");
    }
  }

 private:
  [[nodiscard]] std::string display() const { return prefix_.empty() ? "<root>" : prefix_; }

  template <typename T>
  T convert(const json& v, const std::string& key) const {
    const std::string path = key_path(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("config key '" + path + "': expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
        throw ConfigError("config key '" + path + "': expected a non-negative integer");
      }
      return static_cast<T>(v.get<std::uint64_t>());
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("config key '" + path + "': expected a number");
      return v.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("config key '" + path + "': expected a string");
      return v.get<std::string>();
    } else {
      static_assert(std::is_same_v<T, std::vector<double>>);
      if (!v.is_array()) throw ConfigError("config key '" + path + "': expected an array of numbers");
      std::vector<double> out;
      for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError("config key '" + path + "': expected an array of numbers");
        out.push_back(e.get<double>());
      }
      return out;
    }
  }

  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

template <typename Fn>
auto with_key(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

ordered_json to_json(const ConstantsConfig& c) {
  return ordered_json{{"C_main", c.C_main}, {"C_op", c.C_op}, {"c_33", c.c_33}, {"c_34", c.c_34},
                      {"C_36", c.C_36},     {"c_36", c.c_36}, {"C_37", c.C_37}, {"C_41", c.C_41},
                      {"c_41", c.c_41},     {"c_43", c.c_43}, {"C_51", c.C_51}, {"c_51", c.c_51}};
}

ordered_json to_json_without_threads(const RunConfig& cfg) {
  ordered_json j = to_json(cfg);
  j.erase("threads");
  return j;
}

}  // namespace

ordered_json to_json(const RunConfig& cfg) {
  const ExperimentConfig& e = cfg.experiment;
  ordered_json j;
  j["n"] = e.n;
  j["trials"] = e.trials;
  j["seed"] = e.master_seed;
  j["threads"] = e.threads;
  j["alpha"] = e.alpha;
  if (e.eta) j["eta"] = *e.eta;
  if (e.nu) j["nu"] = *e.nu;
  if (e.beta_override) j["beta"] = *e.beta_override;
  j["thresholds"] = e.thresholds;
  j["lambda_grid_cap"] = e.lambda_grid_cap;
  j["dist"] = ordered_json{{"kind", to_string(e.dist.kind)}, {"q", e.dist.lazy_probability}, {"K", e.dist.K}};
  ordered_json pert{{"kind", to_string(e.perturbation.kind)}, {"scale", e.perturbation.scale}};
  if (!e.perturbation.direction.empty()) pert["direction"] = e.perturbation.direction;
  if (!e.perturbation.file.empty()) pert["file"] = e.perturbation.file.string();
  if (e.perturbation.target_norm) pert["target_norm"] = *e.perturbation.target_norm;
  j["perturbation"] = pert;
  j["constants"] = to_json(e.constants);
  j["rho_mode"] = ordered_json{
      {"kind", e.rho_mode.kind == SubsetMode::exact_subsets ? "exact" : "sampled"},
      {"samples", e.rho_mode.sample_count}};
  j["rho"] = ordered_json{{"x", cfg.rho.x},
                          {"radii", cfg.rho.radii},
                          {"method", cfg.rho.method},
                          {"mc_trials", cfg.rho.mc_trials}};
  j["lattice"] = ordered_json{{"y", cfg.lattice.y},
                              {"gamma_min", cfg.lattice.gamma_min},
                              {"gamma_max", cfg.lattice.gamma_max},
                              {"step", cfg.lattice.step}};
  j["counting"] = ordered_json{{"n", cfg.counting.n},     {"p", cfg.counting.p},
                               {"thresholds", cfg.counting.thresholds},
                               {"m", cfg.counting.m},     {"l", cfg.counting.l},
                               {"rho", cfg.counting.rho}};
  return j;
}

RunConfig from_json(const json& j) {
  RunConfig cfg;
  ExperimentConfig& e = cfg.experiment;
  ObjectReader root(j, "");
  root.read("n", e.n);
  root.read("trials", e.trials);
  root.read("seed", e.master_seed);
  root.read("threads", e.threads);
  root.read("alpha", e.alpha);
  root.read_optional("eta", e.eta);
  root.read_optional("nu", e.nu);
  root.read_optional("beta", e.beta_override);
  root.read("thresholds", e.thresholds);
  root.read("lambda_grid_cap", e.lambda_grid_cap);

  {
    ObjectReader d = root.child("dist");
    std::string kind = to_string(e.dist.kind);
    d.read("kind", kind);
    e.dist.kind = with_key("dist.kind", [&] { return parse_distribution_kind(kind); });
    d.read("q", e.dist.lazy_probability);
    d.read("K", e.dist.K);
    d.finish();
  }
  {
    ObjectReader p = root.child("perturbation");
    std::string kind = to_string(e.perturbation.kind);
    p.read("kind", kind);
    e.perturbation.kind = with_key("perturbation.kind", [&] { return parse_perturbation_kind(kind); });
    p.read("scale", e.perturbation.scale);
    p.read("direction", e.perturbation.direction);
    std::string file = e.perturbation.file.string();
    p.read("file", file);
    e.perturbation.file = file;
    p.read_optional("target_norm", e.perturbation.target_norm);
    p.finish();
  }
  {
    ObjectReader c = root.child("constants");
    ConstantsConfig& k = e.constants;
    c.read("C_main", k.C_main);
    c.read("C_op", k.C_op);
    c.read("c_33", k.c_33);
    c.read("c_34", k.c_34);
    c.read("C_36", k.C_36);
    c.read("c_36", k.c_36);
    c.read("C_37", k.C_37);
    c.read("C_41", k.C_41);
    c.read("c_41", k.c_41);
    c.read("c_43", k.c_43);
    c.read("C_51", k.C_51);
    c.read("c_51", k.c_51);
    c.finish();
  }
  {
    ObjectReader m = root.child("rho_mode");
    std::string kind = e.rho_mode.kind == SubsetMode::exact_subsets ? "exact" : "sampled";
    m.read("kind", kind);
    if (kind == "exact") {
      e.rho_mode.kind = SubsetMode::exact_subsets;
    } else if (kind == "sampled") {
      e.rho_mode.kind = SubsetMode::sampled_subsets;
    } else {
      throw ConfigError("config key 'rho_mode.kind': expected 'exact' or 'sampled'");
    }
    m.read("samples", e.rho_mode.sample_count);
    m.finish();
  }
  {
    ObjectReader r = root.child("rho");
    r.read("x", cfg.rho.x);
    r.read("radii", cfg.rho.radii);
    r.read("method", cfg.rho.method);
    r.read("mc_trials", cfg.rho.mc_trials);
    if (cfg.rho.method != "exact" && cfg.rho.method != "monte_carlo") {
      throw ConfigError("config key 'rho.method': expected 'exact' or 'monte_carlo'");
    }
    r.finish();
  }
  {
    ObjectReader l = root.child("lattice");
    l.read("y", cfg.lattice.y);
    l.read("gamma_min", cfg.lattice.gamma_min);
    l.read("gamma_max", cfg.lattice.gamma_max);
    l.read("step", cfg.lattice.step);
    l.finish();
  }
  {
    ObjectReader c = root.child("counting");
    c.read("n", cfg.counting.n);
    c.read("p", cfg.counting.p);
    c.read("thresholds", cfg.counting.thresholds);
    c.read("m", cfg.counting.m);
    c.read("l", cfg.counting.l);
    c.read("rho", cfg.counting.rho);
    c.finish();
  }
  root.finish();

  try {
    e.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError(err.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

std::string manifest_hash(const RunConfig& cfg, const std::string& subcommand) {
  const std::string text = subcommand + "\n" + to_json_without_threads(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace gaplab::cli
