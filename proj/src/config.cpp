#include "nphase/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "nphase/cahn_hilliard.hpp"
#include "nphase/errors.hpp"

namespace nphase {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Ordered key -> value store; later assignments overwrite earlier ones and
// iteration stays deterministic.
using KeyValues = std::map<std::string, std::string>;

void parse_line(const std::string& raw, KeyValues& kv,
                const std::string& where) {
  std::string line = raw;
  std::size_t hash = line.find('#');
  if (hash != std::string::npos) line.erase(hash);
  line = trim(line);
  if (line.empty()) return;
  std::size_t eq = line.find('=');
  if (eq == std::string::npos)
    throw ConfigError(where + ": expected `key = value`, got \"" + trim(raw) +
                      "\"");
  std::string key = trim(line.substr(0, eq));
  std::string value = trim(line.substr(eq + 1));
  if (key.empty()) throw ConfigError(where + ": empty key");
  if (value.empty()) throw ConfigError(where + ": empty value for " + key);
  kv[key] = value;
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: \"" + value + "\"");
  }
  if (used != value.size())
    throw ConfigError(key + ": trailing characters in \"" + value + "\"");
  return v;
}

long long to_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an integer: \"" + value + "\"");
  }
  if (used != value.size())
    throw ConfigError(key + ": trailing characters in \"" + value + "\"");
  return v;
}

std::uint64_t to_uint64(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(value, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an unsigned integer: \"" + value + "\"");
  }
  if (used != value.size() || value.find('-') != std::string::npos)
    throw ConfigError(key + ": not an unsigned integer: \"" + value + "\"");
  return v;
}

std::vector<std::string> split(const std::string& value, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(trim(item));
  if (!value.empty() && value.back() == sep) parts.push_back("");
  return parts;
}

class ConfigReader {
 public:
  explicit ConfigReader(KeyValues kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return false;
    used_.push_back(key);
    return true;
  }

  std::string str(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing required key: " + key);
    used_.push_back(key);
    return it->second;
  }

  std::string str_or(const std::string& key, const std::string& fallback) {
    return has(key) ? kv_.at(key) : fallback;
  }

  double num(const std::string& key) { return to_double(key, str(key)); }
  double num_or(const std::string& key, double fallback) {
    return has(key) ? to_double(key, kv_.at(key)) : fallback;
  }
  long long integer(const std::string& key) { return to_int(key, str(key)); }
  long long integer_or(const std::string& key, long long fallback) {
    return has(key) ? to_int(key, kv_.at(key)) : fallback;
  }

  // Every key not consumed by the schema is a typo; name the first one.
  void reject_unknown() const {
    for (const auto& [key, value] : kv_) {
      (void)value;
      if (std::find(used_.begin(), used_.end(), key) == used_.end())
        throw ConfigError("unknown key: " + key);
    }
  }

  const KeyValues& raw() const { return kv_; }

 private:
  KeyValues kv_;
  std::vector<std::string> used_;
};

Eigen::MatrixXd read_sigma(ConfigReader& r, int n_phases) {
  Eigen::MatrixXd sigma =
      Eigen::MatrixXd::Constant(n_phases, n_phases,
                                r.has("sigma.default")
                                    ? to_double("sigma.default",
                                                r.str("sigma.default"))
                                    : -1.0);
  sigma.diagonal().setZero();
  for (const auto& [key, value] : r.raw()) {
    if (key.rfind("sigma.", 0) != 0 || key == "sigma.default") continue;
    std::vector<std::string> parts = split(key.substr(6), '.');
    if (parts.size() != 2)
      throw ConfigError(key + ": expected sigma.<i>.<j>");
    long long i = to_int(key, parts[0]);
    long long j = to_int(key, parts[1]);
    if (i < 1 || i > n_phases || j < 1 || j > n_phases || i == j)
      throw ConfigError(key + ": phase pair out of range for " +
                        std::to_string(n_phases) + " phases");
    double v = to_double(key, value);
    sigma(i - 1, j - 1) = v;
    sigma(j - 1, i - 1) = v;
    r.has(key);  // mark consumed
  }
  for (int i = 0; i < n_phases; ++i)
    for (int j = 0; j < n_phases; ++j)
      if (i != j && sigma(i, j) < 0.0)
        throw ConfigError("sigma." + std::to_string(i + 1) + "." +
                          std::to_string(j + 1) +
                          " unset and no sigma.default given");
  return sigma;
}

std::vector<std::pair<int, double>> read_ramp(const std::string& value) {
  std::vector<std::pair<int, double>> ramp;
  for (const std::string& part : split(value, ',')) {
    std::vector<std::string> sk = split(part, ':');
    if (sk.size() != 2)
      throw ConfigError("ramp: expected step:k, got \"" + part + "\"");
    int step = static_cast<int>(to_int("ramp", sk[0]));
    double k = to_double("ramp", sk[1]);
    if (step < 1) throw ConfigError("ramp: steps must be >= 1");
    if (!(k > 0.0)) throw ConfigError("ramp: k values must be positive");
    if (!ramp.empty() && step <= ramp.back().first)
      throw ConfigError("ramp: steps must be strictly increasing");
    ramp.emplace_back(step, k);
  }
  return ramp;
}

void read_init(ConfigReader& r, RunConfig& cfg) {
  std::string kind = r.str("init");
  if (kind == "grains") {
    cfg.init = InitKind::Grains;
    cfg.grains_count = static_cast<int>(r.integer("grains.count"));
    cfg.grains_r_min = r.num("grains.r_min");
    cfg.grains_r_max = r.num("grains.r_max");
    if (cfg.grains_count < 1) throw ConfigError("grains.count must be >= 1");
    if (!(cfg.grains_r_min > 0.0) || cfg.grains_r_min > cfg.grains_r_max)
      throw ConfigError("grain radii must satisfy 0 < r_min <= r_max");
  } else if (kind == "spinodal") {
    cfg.init = InitKind::Spinodal;
    std::vector<std::string> parts = split(r.str("spinodal.rho"), ',');
    if (static_cast<int>(parts.size()) != cfg.n_phases)
      throw ConfigError("spinodal.rho needs " + std::to_string(cfg.n_phases) +
                        " entries");
    cfg.spinodal_rho.resize(cfg.n_phases);
    for (int i = 0; i < cfg.n_phases; ++i)
      cfg.spinodal_rho(i) = to_double("spinodal.rho", parts[i]);
    if (cfg.spinodal_rho.minCoeff() < 0.0 ||
        std::abs(cfg.spinodal_rho.sum() - 1.0) > 1e-9)
      throw ConfigError("spinodal.rho must be nonnegative and sum to 1");
    cfg.spinodal_amplitude = r.num("spinodal.amplitude");
    if (cfg.spinodal_amplitude < 0.0)
      throw ConfigError("spinodal.amplitude must be >= 0");
  } else if (kind == "regions") {
    cfg.init = InitKind::Regions;
    for (int idx = 1; r.has("region." + std::to_string(idx)); ++idx) {
      std::string key = "region." + std::to_string(idx);
      std::vector<std::string> parts = split(r.str(key), ',');
      if (parts.size() != 5)
        throw ConfigError(key + ": expected x0,y0,x1,y1,phase");
      Region reg;
      reg.x0 = to_double(key, parts[0]);
      reg.y0 = to_double(key, parts[1]);
      reg.x1 = to_double(key, parts[2]);
      reg.y1 = to_double(key, parts[3]);
      reg.phase = static_cast<int>(to_int(key, parts[4]));
      if (reg.x0 < 0.0 || reg.y0 < 0.0 || reg.x1 > 1.0 || reg.y1 > 1.0 ||
          reg.x0 > reg.x1 || reg.y0 > reg.y1)
        throw ConfigError(key + ": rectangle must lie inside the unit square");
      if (reg.phase < 1 || reg.phase > cfg.n_phases)
        throw ConfigError(key + ": phase out of range");
      cfg.regions.push_back(reg);
    }
    if (cfg.regions.empty())
      throw ConfigError("regions init needs region.1 = x0,y0,x1,y1,phase");
  } else {
    throw ConfigError("init: expected grains, spinodal or regions, got \"" +
                      kind + "\"");
  }
}

}  // namespace

RunConfig parse_config(const std::string& text,
                       const std::vector<std::string>& overrides) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    parse_line(line, kv, "line " + std::to_string(lineno));
  }
  for (const std::string& o : overrides) parse_line(o, kv, "--set " + o);

  ConfigReader r{std::move(kv)};
  RunConfig cfg;

  std::string model = r.str("model");
  if (model == "allen_cahn")
    cfg.model = Model::AllenCahn;
  else if (model == "cahn_hilliard")
    cfg.model = Model::CahnHilliard;
  else
    throw ConfigError("model: expected allen_cahn or cahn_hilliard, got \"" +
                      model + "\"");

  std::string scheme = r.str("scheme");
  if (scheme == "semi_implicit")
    cfg.scheme = Scheme::SemiImplicit;
  else if (scheme == "fully_implicit")
    cfg.scheme = Scheme::FullyImplicit;
  else if (scheme == "crank_nicolson")
    cfg.scheme = Scheme::ModifiedCN;
  else
    throw ConfigError(
        "scheme: expected semi_implicit, fully_implicit or crank_nicolson, "
        "got \"" +
        scheme + "\"");

  cfg.n = static_cast<int>(r.integer("n"));
  cfg.n_phases = static_cast<int>(r.integer("n_phases"));
  if (cfg.n < 2) throw ConfigError("n must be >= 2");
  if (cfg.n_phases < 2) throw ConfigError("n_phases must be >= 2");

  cfg.eta = r.num("eta");
  cfg.gamma = r.num_or("gamma", cfg.eta);
  cfg.m0 = r.num_or("m0", default_mobility());
  std::string potential = r.str_or("potential", "pairwise");
  if (potential == "pairwise")
    cfg.potential = PotentialSpec::Kind::pairwise;
  else if (potential == "homogeneous")
    cfg.potential = PotentialSpec::Kind::homogeneous;
  else
    throw ConfigError("potential: expected pairwise or homogeneous, got \"" +
                      potential + "\"");
  cfg.s = r.num_or("s", 0.0);
  cfg.k = r.num("k");
  if (!(cfg.eta > 0.0)) throw ConfigError("eta must be positive");
  if (!(cfg.gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!(cfg.m0 > 0.0)) throw ConfigError("m0 must be positive");
  if (cfg.s < 0.0) throw ConfigError("s must be >= 0");
  if (!(cfg.k > 0.0)) throw ConfigError("k must be positive");
  if (r.has("ramp")) cfg.ramp = read_ramp(r.str("ramp"));

  cfg.steps = static_cast<int>(r.integer("steps"));
  if (cfg.steps < 0) throw ConfigError("steps must be >= 0");
  cfg.snapshot_every = static_cast<int>(r.integer_or("snapshot_every", 0));
  if (cfg.snapshot_every < 0) throw ConfigError("snapshot_every must be >= 0");
  if (r.has("seed")) cfg.seed = to_uint64("seed", r.str("seed"));

  cfg.sigma = read_sigma(r, cfg.n_phases);
  if (cfg.potential == PotentialSpec::Kind::homogeneous) {
    for (int i = 0; i < cfg.n_phases; ++i)
      for (int j = i + 1; j < cfg.n_phases; ++j)
        if (cfg.sigma(i, j) != cfg.sigma(0, 1))
          throw ConfigError("potential = homogeneous requires uniform sigma");
    if (cfg.s != 0.0)
      throw ConfigError("s applies to the pairwise potential only");
  }
  read_init(r, cfg);

  cfg.smooth_width = r.num_or("smooth_width", 0.0);
  if (cfg.smooth_width < 0.0) throw ConfigError("smooth_width must be >= 0");
  if (cfg.smooth_width > 0.0 && cfg.init == InitKind::Spinodal)
    throw ConfigError("smooth_width applies to sharp (grains/regions) fields");

  cfg.output_dir = r.str_or("output_dir", "out");

  r.reject_unknown();
  return cfg;
}

RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

}  // namespace nphase
