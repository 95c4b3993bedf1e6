#include "rpg/tools/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "rpg/error.hpp"

namespace rpg::tools {
namespace {

using nlohmann::json;

struct BadValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

long long to_int(const std::string& v) {
  long long x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw BadValue("expected an integer, got '" + v + "'");
  return x;
}

int to_int32(const std::string& v) {
  const long long x = to_int(v);
  if (x < -2147483647LL || x > 2147483647LL) throw BadValue("integer out of range: " + v);
  return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string& v) {
  std::uint64_t x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw BadValue("expected a non-negative integer, got '" + v + "'");
  }
  return x;
}

double to_real(const std::string& v) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x)) {
    throw BadValue("expected a finite number, got '" + v + "'");
  }
  return x;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw BadValue("expected true/false, got '" + v + "'");
}

template <class E>
E to_enum(const std::string& v, const std::vector<std::pair<const char*, E>>& table) {
  std::string names;
  for (const auto& [name, value] : table) {
    if (v == name) return value;
    names += names.empty() ? name : std::string("|") + name;
  }
  throw BadValue("expected one of " + names + ", got '" + v + "'");
}

// "1" or "1,0;0,1" (rows separated by ';').
Matrix to_matrix(const std::string& v) {
  const std::vector<std::string> rows = split(v, ';');
  std::vector<std::vector<double>> cells;
  for (const std::string& r : rows) {
    std::vector<double> row;
    for (const std::string& c : split(r, ',')) row.push_back(to_real(c));
    if (!cells.empty() && row.size() != cells.front().size()) throw BadValue("ragged matrix '" + v + "'");
    cells.push_back(std::move(row));
  }
  if (cells.empty() || cells.front().empty()) throw BadValue("empty matrix");
  Matrix m(static_cast<Eigen::Index>(cells.size()), static_cast<Eigen::Index>(cells.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = cells[i][j];
  }
  return m;
}

Vector to_vector(const std::string& v) {
  if (v == "none" || v.empty()) return {};
  const std::vector<std::string> parts = split(v, ',');
  Vector x(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) x(static_cast<Eigen::Index>(i)) = to_real(parts[i]);
  return x;
}

std::vector<int> to_widths(const std::string& v) {
  if (v == "none") return {};
  std::vector<int> out;
  for (const std::string& p : split(v, ',')) {
    const int w = to_int32(p);
    if (w < 1) throw BadValue("hidden widths must be >= 1");
    out.push_back(w);
  }
  return out;
}

const std::vector<std::pair<const char*, Variant>> kVariants = {
    {"baseline", Variant::baseline}, {"J", Variant::j}, {"T", Variant::t}};
const std::vector<std::pair<const char*, GradientBackend>> kBackends = {
    {"analytic", GradientBackend::analytic}, {"reinforce", GradientBackend::reinforce}};
const std::vector<std::pair<const char*, PolicyOptimizer>> kOptimizers = {
    {"sgd", PolicyOptimizer::sgd}, {"adam", PolicyOptimizer::adam}};
const std::vector<std::pair<const char*, rl::EnvKind>> kEnvs = {
    {"lqr", rl::EnvKind::lqr},
    {"pointmass", rl::EnvKind::pointmass},
    {"bowl", rl::EnvKind::landscape_quadratic},
    {"rosenbrock", rl::EnvKind::landscape_rosenbrock}};
const std::vector<std::pair<const char*, rl::PolicyHead>> kHeads = {
    {"gaussian", rl::PolicyHead::gaussian}, {"deterministic", rl::PolicyHead::deterministic}};

template <class E>
std::string enum_name(E v, const std::vector<std::pair<const char*, E>>& table) {
  for (const auto& [name, value] : table) {
    if (value == v) return name;
  }
  return "?";
}

std::string fmt_matrix(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i > 0) out += ';';
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += fmt::format("{}{}", j > 0 ? "," : "", m(i, j));
  }
  return out;
}

std::string fmt_vector(const Vector& v) {
  if (v.size() == 0) return "none";
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out += fmt::format("{}{}", i > 0 ? "," : "", v(i));
  return out;
}

std::string fmt_widths(const std::vector<int>& w) {
  if (w.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) out += fmt::format("{}{}", i > 0 ? "," : "", w[i]);
  return out;
}

struct Key {
  const char* section;
  const char* name;
  const char* token;  // field name used in TrainConfig::validate messages
  std::function<void(TrainConfig&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

// The horizon key feeds both the LQR spec and the point-mass env.
const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"run", "variant", "variant",
       [](TrainConfig& c, const std::string& v) { c.variant = to_enum(v, kVariants); },
       [](const TrainConfig& c) { return enum_name(c.variant, kVariants); }},
      {"run", "backend", "analytic",
       [](TrainConfig& c, const std::string& v) { c.backend = to_enum(v, kBackends); },
       [](const TrainConfig& c) { return enum_name(c.backend, kBackends); }},
      {"run", "optimizer", "optimizer",
       [](TrainConfig& c, const std::string& v) { c.optimizer = to_enum(v, kOptimizers); },
       [](const TrainConfig& c) { return enum_name(c.optimizer, kOptimizers); }},
      {"run", "total_steps", "total_steps",
       [](TrainConfig& c, const std::string& v) { c.total_steps = to_int32(v); },
       [](const TrainConfig& c) { return std::to_string(c.total_steps); }},
      {"run", "update_interval", "update_interval",
       [](TrainConfig& c, const std::string& v) { c.update_interval = to_int32(v); },
       [](const TrainConfig& c) { return std::to_string(c.update_interval); }},
      {"run", "alpha", "alpha", [](TrainConfig& c, const std::string& v) { c.alpha = to_real(v); },
       [](const TrainConfig& c) { return fmt::format("{}", c.alpha); }},
      {"run", "gamma", "gamma", [](TrainConfig& c, const std::string& v) { c.gamma = to_real(v); },
       [](const TrainConfig& c) { return fmt::format("{}", c.gamma); }},
      {"run", "kappa", "kappa", [](TrainConfig& c, const std::string& v) { c.kappa = to_real(v); },
       [](const TrainConfig& c) { return fmt::format("{}", c.kappa); }},
      {"run", "gate", "gate",
       [](TrainConfig& c, const std::string& v) {
         if (v == "auto") {
           c.gate.reset();
         } else {
           c.gate = to_bool(v);
         }
       },
       [](const TrainConfig& c) {
         return c.gate.has_value() ? std::string(*c.gate ? "on" : "off") : std::string("auto");
       }},
      {"run", "eval_episodes", "eval_episodes",
       [](TrainConfig& c, const std::string& v) { c.eval_episodes = to_int32(v); },
       [](const TrainConfig& c) { return std::to_string(c.eval_episodes); }},
      {"run", "seed", "seed", [](TrainConfig& c, const std::string& v) { c.seed = to_u64(v); },
       [](const TrainConfig& c) { return std::to_string(c.seed); }},

      {"env", "kind", "kind", [](TrainConfig& c, const std::string& v) { c.env.kind = to_enum(v, kEnvs); },
       [](const TrainConfig& c) { return enum_name(c.env.kind, kEnvs); }},
      {"env", "horizon", "horizon",
       [](TrainConfig& c, const std::string& v) {
         c.env.horizon = to_int32(v);
         c.env.lqr.horizon = c.env.horizon;
       },
       [](const TrainConfig& c) {
         return std::to_string(c.env.kind == rl::EnvKind::lqr ? c.env.lqr.horizon : c.env.horizon);
       }},
      {"env", "a", "A", [](TrainConfig& c, const std::string& v) { c.env.lqr.a = to_matrix(v); },
       [](const TrainConfig& c) { return fmt_matrix(c.env.lqr.a); }},
      {"env", "b", "B", [](TrainConfig& c, const std::string& v) { c.env.lqr.b = to_matrix(v); },
       [](const TrainConfig& c) { return fmt_matrix(c.env.lqr.b); }},
      {"env", "q", "Q", [](TrainConfig& c, const std::string& v) { c.env.lqr.q = to_matrix(v); },
       [](const TrainConfig& c) { return fmt_matrix(c.env.lqr.q); }},
      {"env", "r", "R", [](TrainConfig& c, const std::string& v) { c.env.lqr.r = to_matrix(v); },
       [](const TrainConfig& c) { return fmt_matrix(c.env.lqr.r); }},
      {"env", "noise_std", "noise",
       [](TrainConfig& c, const std::string& v) { c.env.lqr.noise_std = to_real(v); },
       [](const TrainConfig& c) { return fmt::format("{}", c.env.lqr.noise_std); }},
      {"env", "init_std", "init_std",
       [](TrainConfig& c, const std::string& v) { c.env.lqr.init_std = to_real(v); },
       [](const TrainConfig& c) { return fmt::format("{}", c.env.lqr.init_std); }},
      {"env", "init_mean", "init_mean",
       [](TrainConfig& c, const std::string& v) { c.env.lqr.init_mean = to_vector(v); },
       [](const TrainConfig& c) { return fmt_vector(c.env.lqr.init_mean); }},
      {"env", "landscape_dim", "landscape_dim",
       [](TrainConfig& c, const std::string& v) { c.env.landscape_dim = to_int32(v); },
       [](const TrainConfig& c) { return std::to_string(c.env.landscape_dim); }},
      {"env", "landscape_init", "landscape_init",
       [](TrainConfig& c, const std::string& v) { c.landscape_init = to_real(v); },
       [](const TrainConfig& c) { return fmt::format("{}", c.landscape_init); }},
      {"env", "action_noise", "action_noise",
       [](TrainConfig& c, const std::string& v) { c.action_noise = to_real(v); },
       [](const TrainConfig& c) { return fmt::format("{}", c.action_noise); }},

      {"policy", "hidden", "hidden",
       [](TrainConfig& c, const std::string& v) { c.policy.hidden = to_widths(v); },
       [](const TrainConfig& c) { return fmt_widths(c.policy.hidden); }},
      {"policy", "head", "head", [](TrainConfig& c, const std::string& v) { c.policy.head = to_enum(v, kHeads); },
       [](const TrainConfig& c) { return enum_name(c.policy.head, kHeads); }},
      {"policy", "init_log_std", "init_log_std",
       [](TrainConfig& c, const std::string& v) { c.policy.init_log_std = to_real(v); },
       [](const TrainConfig& c) { return fmt::format("{}", c.policy.init_log_std); }},
      {"policy", "learn_log_std", "learn_log_std",
       [](TrainConfig& c, const std::string& v) { c.policy.learn_log_std = to_bool(v); },
       [](const TrainConfig& c) { return std::string(c.policy.learn_log_std ? "true" : "false"); }},
      {"policy", "init_scale", "policy_init_scale",
       [](TrainConfig& c, const std::string& v) { c.policy.init_scale = to_real(v); },
       [](const TrainConfig& c) { return fmt::format("{}", c.policy.init_scale); }},

      {"reinforce", "episodes", "episodes",
       [](TrainConfig& c, const std::string& v) { c.episodes = to_int32(v); },
       [](const TrainConfig& c) { return std::to_string(c.episodes); }},
      {"reinforce", "batch_size", "batch_size",
       [](TrainConfig& c, const std::string& v) { c.batch_size = to_int32(v); },
       [](const TrainConfig& c) { return std::to_string(c.batch_size); }},
      {"reinforce", "buffer_capacity", "buffer_capacity",
       [](TrainConfig& c, const std::string& v) { c.buffer_capacity = to_int32(v); },
       [](const TrainConfig& c) { return std::to_string(c.buffer_capacity); }},

      {"probes", "probe_count", "probe_count",
       [](TrainConfig& c, const std::string& v) { c.probes.probe_count = to_int32(v); },
       [](const TrainConfig& c) { return std::to_string(c.probes.probe_count); }},
      {"probes", "fd_step", "fd_step",
       [](TrainConfig& c, const std::string& v) { c.probes.fd_step = to_real(v); },
       [](const TrainConfig& c) { return fmt::format("{}", c.probes.fd_step); }},

      {"metric", "m_tilde", "m_tilde",
       [](TrainConfig& c, const std::string& v) { c.metric.m_tilde = to_int32(v); },
       [](const TrainConfig& c) { return std::to_string(c.metric.m_tilde); }},
      {"metric", "pool_size", "pool_size",
       [](TrainConfig& c, const std::string& v) { c.metric.pool_size = to_int32(v); },
       [](const TrainConfig& c) { return std::to_string(c.metric.pool_size); }},
      {"metric", "kernel_size", "kernel_size",
       [](TrainConfig& c, const std::string& v) { c.metric.kernel_size = to_int32(v); },
       [](const TrainConfig& c) { return std::to_string(c.metric.kernel_size); }},
      {"metric", "segment_width", "segment_width",
       [](TrainConfig& c, const std::string& v) { c.metric.segment_width = to_int32(v); },
       [](const TrainConfig& c) { return std::to_string(c.metric.segment_width); }},
      {"metric", "trunk_width", "trunk_width",
       [](TrainConfig& c, const std::string& v) { c.metric.trunk_width = to_int32(v); },
       [](const TrainConfig& c) { return std::to_string(c.metric.trunk_width); }},
      {"metric", "init_scale", "init_scale",
       [](TrainConfig& c, const std::string& v) { c.metric.init_scale = to_real(v); },
       [](const TrainConfig& c) { return fmt::format("{}", c.metric.init_scale); }},
      {"metric", "bias_scale", "bias_scale",
       [](TrainConfig& c, const std::string& v) { c.metric.bias_scale = to_real(v); },
       [](const TrainConfig& c) { return fmt::format("{}", c.metric.bias_scale); }},
      {"metric", "head_kick", "head_kick",
       [](TrainConfig& c, const std::string& v) { c.metric.head_kick = to_real(v); },
       [](const TrainConfig& c) { return fmt::format("{}", c.metric.head_kick); }},
      {"metric", "iters", "metric_iters",
       [](TrainConfig& c, const std::string& v) { c.metric_iters = to_int32(v); },
       [](const TrainConfig& c) { return std::to_string(c.metric_iters); }},
      {"metric", "lr", "metric_lr", [](TrainConfig& c, const std::string& v) { c.adam.lr = to_real(v); },
       [](const TrainConfig& c) { return fmt::format("{}", c.adam.lr); }},
      {"metric", "beta1", "beta1", [](TrainConfig& c, const std::string& v) { c.adam.beta1 = to_real(v); },
       [](const TrainConfig& c) { return fmt::format("{}", c.adam.beta1); }},
      {"metric", "beta2", "beta2", [](TrainConfig& c, const std::string& v) { c.adam.beta2 = to_real(v); },
       [](const TrainConfig& c) { return fmt::format("{}", c.adam.beta2); }},
      {"metric", "eps", "eps", [](TrainConfig& c, const std::string& v) { c.adam.eps = to_real(v); },
       [](const TrainConfig& c) { return fmt::format("{}", c.adam.eps); }},
      {"metric", "freeze", "freeze",
       [](TrainConfig& c, const std::string& v) { c.freeze_metric = to_bool(v); },
       [](const TrainConfig& c) { return std::string(c.freeze_metric ? "true" : "false"); }},
  };
  return table;
}

const Key* find_key(const std::string& section, const std::string& name) {
  for (const Key& k : keys()) {
    if (section == k.section && name == k.name) return &k;
  }
  return nullptr;
}

// Range checks that TrainConfig::validate does not cover.
void check_ranges(const TrainConfig& c, const std::function<void(const char*, const std::string&)>& fail) {
  if (c.probes.fd_step < 0.0) fail("fd_step", "probes.fd_step must be >= 0 (0 selects the default)");
  if (c.metric.pool_size < 1) fail("pool_size", "metric.pool_size must be >= 1");
  if (c.metric.kernel_size < 1) fail("kernel_size", "metric.kernel_size must be >= 1");
  if (c.metric.segment_width < 1) fail("segment_width", "metric.segment_width must be >= 1");
  if (c.metric.trunk_width < 1) fail("trunk_width", "metric.trunk_width must be >= 1");
  if (c.metric.init_scale < 0.0) fail("init_scale", "metric.init_scale must be >= 0");
  if (c.metric.bias_scale < 0.0) fail("bias_scale", "metric.bias_scale must be >= 0");
  if (c.metric.head_kick < 0.0) fail("head_kick", "metric.head_kick must be >= 0");
  if (!(c.adam.beta1 >= 0.0 && c.adam.beta1 < 1.0)) fail("beta1", "metric.beta1 must be in [0, 1)");
  if (!(c.adam.beta2 >= 0.0 && c.adam.beta2 < 1.0)) fail("beta2", "metric.beta2 must be in [0, 1)");
  if (c.adam.eps <= 0.0) fail("eps", "metric.eps must be positive");
  if (c.env.horizon < 1) fail("horizon", "env.horizon must be >= 1");
  if (c.landscape_init < 0.0) fail("landscape_init", "env.landscape_init must be >= 0");
  if (c.policy.init_scale < 0.0) fail("policy_init_scale", "policy.init_scale must be >= 0");
}

}  // namespace

ConfigError::ConfigError(const std::string& origin, int line, const std::string& message)
    : std::runtime_error(fmt::format("{}:{}: {}", origin, line, message)), line_(line) {}

TrainConfig parse_run_config(std::string_view text, const std::string& origin) {
  TrainConfig cfg;
  cfg.env.lqr = rl::LqrSpec::scalar(cfg.env.horizon);
  std::map<std::string, int> token_line;  // validate-message token -> line that set it
  std::map<std::string, int> seen;        // "section.key" -> line
  std::string section;
  int env_line = 0;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(origin, line_no, "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      bool known = false;
      for (const Key& k : keys()) known = known || section == k.section;
      if (!known) throw ConfigError(origin, line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin, line_no, "expected 'key = value'");
    const std::string name = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) throw ConfigError(origin, line_no, "key '" + name + "' appears before any [section]");
    const Key* key = find_key(section, name);
    if (key == nullptr) throw ConfigError(origin, line_no, fmt::format("unknown key '{}' in [{}]", name, section));
    const std::string full = section + "." + name;
    if (auto it = seen.find(full); it != seen.end()) {
      throw ConfigError(origin, line_no, fmt::format("duplicate key '{}' (first set on line {})", full, it->second));
    }
    seen[full] = line_no;
    try {
      key->set(cfg, value);
    } catch (const BadValue& e) {
      throw ConfigError(origin, line_no, fmt::format("{}: {}", full, e.what()));
    } catch (const Error& e) {
      throw ConfigError(origin, line_no, fmt::format("{}: {}", full, e.what()));
    }
    token_line[key->token] = line_no;
    if (section == "env") env_line = env_line == 0 ? line_no : env_line;
  }

  check_ranges(cfg, [&](const char* token, const std::string& msg) {
    const auto it = token_line.find(token);
    throw ConfigError(origin, it == token_line.end() ? 0 : it->second, msg);
  });
  try {
    cfg.validate();
  } catch (const BadDimensions& e) {
    // Messages read "config: <field> ..."; anchor to the line that set <field>.
    std::string msg = e.what();
    if (msg.rfind("config: ", 0) == 0) msg.erase(0, 8);
    const std::string token = msg.substr(0, msg.find(' '));
    const auto it = token_line.find(token);
    throw ConfigError(origin, it == token_line.end() ? 0 : it->second, msg);
  }
  if (cfg.env.kind == rl::EnvKind::lqr) {
    try {
      cfg.env.lqr.validate();
    } catch (const BadDimensions& e) {
      throw ConfigError(origin, env_line, e.what());
    }
  }
  return cfg;
}

TrainConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.string());
}

nlohmann::json config_to_json(const TrainConfig& cfg) {
  json out = json::object();
  for (const Key& k : keys()) {
    // Numbers and booleans are echoed typed; everything else as text.
    const std::string text = k.get(cfg);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded() || !(value.is_number() || value.is_boolean())) value = text;
    out[k.section][k.name] = value;
  }
  return out;
}

std::string documented_defaults() {
  TrainConfig cfg;
  cfg.env.lqr = rl::LqrSpec::scalar(cfg.env.horizon);
  std::string out;
  std::string section;
  for (const Key& k : keys()) {
    if (section != k.section) {
      section = k.section;
      out += fmt::format("[{}]\n", section);
    }
    out += fmt::format("{} = {}\n", k.name, k.get(cfg));
  }
  return out;
}

}  // namespace rpg::tools
