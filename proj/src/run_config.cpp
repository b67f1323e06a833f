#include "tma_sim/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "tma_sim/errors.hpp"

namespace tma_sim {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

const std::set<std::string, std::less<>> kKnownKeys = {"m_total", "groups", "n",    "k",           "block_m",
                                                       "block_n", "seed",   "mode", "group_sizes", "seed_count"};

}  // namespace

KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    const std::string_view line = trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, std::string(trim(line.substr(eq + 1)))).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_key_values(ss.str());
}

void write_key_values(std::ostream& out, const KeyValues& kv) {
  for (const auto& [key, value] : kv) out << key << " = " << value << '\n';
}

void write_key_values(const std::filesystem::path& path, const KeyValues& kv) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + path.string());
  write_key_values(f, kv);
}

std::uint64_t parse_u64(std::string_view value, std::string_view key) {
  value = trim(value);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("key '" + std::string(key) + "': '" + std::string(value) + "' is not a non-negative integer");
  }
  return out;
}

std::vector<std::uint64_t> parse_u64_list(std::string_view value, std::string_view key) {
  std::vector<std::uint64_t> out;
  value = trim(value);
  while (!value.empty()) {
    const auto comma = value.find(',');
    out.push_back(parse_u64(value.substr(0, comma), key));
    if (comma == std::string_view::npos) break;
    value = value.substr(comma + 1);
  }
  return out;
}

std::string join_list(std::span<const std::uint64_t> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i != 0) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

const std::string& require_key(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError("missing key '" + key + "'");
  return it->second;
}

void check_known_keys(const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    if (!kKnownKeys.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
}

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::verify:
      return "verify";
    case RunMode::sweep:
      return "sweep";
    case RunMode::golden:
      return "golden";
  }
  return "?";
}

KeyValues RunManifest::to_key_values() const {
  KeyValues kv;
  kv["mode"] = to_string(mode);
  kv["config_source"] = config_source;
  kv["out_dir"] = out_dir ? out_dir->string() : "";
  kv["accounting_only"] = accounting_only ? "true" : "false";
  kv["seeds"] = join_list(seeds);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto& c = configs[i];
    std::ostringstream line;
    line << "n=" << c.n << " k=" << c.k << " block_m=" << c.block_m << " block_n=" << c.block_n
         << " block_k=" << c.block_k << " group_sizes=" << join_list(c.group_sizes);
    kv["config." + std::to_string(i)] = line.str();
  }
  if (grid) {
    kv["grid.m_total"] = join_list(grid->m_total);
    kv["grid.groups"] = join_list(grid->groups);
    kv["grid.n"] = join_list(grid->n);
    kv["grid.k"] = join_list(grid->k);
    kv["grid.seed"] = std::to_string(grid->seed);
    kv["grid.seed_count"] = std::to_string(grid->seed_count);
  }
  return kv;
}

ProblemConfig resolve_problem(const KeyValues& kv) {
  check_known_keys(kv);
  auto get = [&kv](const char* key, std::uint64_t fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : parse_u64(it->second, key);
  };
  ProblemConfig c;
  c.n = get("n", 128);
  c.k = get("k", 128);
  c.block_m = get("block_m", 128);
  c.block_n = get("block_n", 128);
  if (const auto it = kv.find("group_sizes"); it != kv.end()) {
    c.group_sizes = parse_u64_list(it->second, "group_sizes");
  } else if (kv.contains("m_total")) {
    const std::uint64_t groups = get("groups", 1);
    if (groups == 0) throw ConfigError("groups must be at least 1");
    c.group_sizes = generate_group_sizes(get("m_total", 0), groups, get("seed", 0));
  } else {
    c.group_sizes = {253};
  }
  c.validate();
  return c;
}

SweepGrid resolve_grid(const KeyValues& kv, const SweepGrid& defaults) {
  check_known_keys(kv);
  SweepGrid g = defaults;
  auto list = [&kv](const char* key, std::vector<std::uint64_t>& target) {
    if (const auto it = kv.find(key); it != kv.end()) target = parse_u64_list(it->second, key);
  };
  list("m_total", g.m_total);
  list("groups", g.groups);
  list("n", g.n);
  list("k", g.k);
  if (const auto it = kv.find("seed"); it != kv.end()) g.seed = parse_u64(it->second, "seed");
  if (const auto it = kv.find("seed_count"); it != kv.end()) g.seed_count = parse_u64(it->second, "seed_count");
  if (std::find(g.groups.begin(), g.groups.end(), 0) != g.groups.end()) throw ConfigError("groups must be at least 1");
  return g;
}

}  // namespace tma_sim
