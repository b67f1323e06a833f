#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tma_sim/gemm_engine.hpp"
#include "tma_sim/workload.hpp"

namespace tma_sim {

/// Flat `key = value` text. Blank lines and lines starting with '#' are ignored.
using KeyValues = std::map<std::string, std::string>;

/// Throws ConfigError on malformed lines or duplicate keys.
KeyValues parse_key_values(std::string_view text);
KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);
void write_key_values(std::ostream& out, const KeyValues& kv);

std::uint64_t parse_u64(std::string_view value, std::string_view key);
/// Comma-separated integers; an empty value is an empty list.
std::vector<std::uint64_t> parse_u64_list(std::string_view value, std::string_view key);
std::string join_list(std::span<const std::uint64_t> values);
const std::string& require_key(const KeyValues& kv, const std::string& key);

/// Keys understood in config files: m_total, groups, n, k, block_m, block_n,
/// seed, mode, group_sizes, seed_count.
void check_known_keys(const KeyValues& kv);

enum class RunMode { verify, sweep, golden };

const char* to_string(RunMode mode);

/// Everything a run needs, resolved before any simulation starts and written
/// next to the outputs as manifest.txt.
struct RunManifest {
  RunMode mode = RunMode::verify;
  std::string config_source = "<defaults>";
  std::optional<std::filesystem::path> out_dir;
  bool accounting_only = false;
  std::vector<std::uint64_t> seeds;
  std::vector<ProblemConfig> configs;
  std::optional<SweepGrid> grid;

  KeyValues to_key_values() const;
};

/// Verify/golden-record configuration. Defaults: N = K = 128, block_M = block_N = 128,
/// one group of 253 rows. When group_sizes is absent but m_total is present the
/// sizes are generated from (m_total, groups, seed).
ProblemConfig resolve_problem(const KeyValues& kv);

/// Sweep grid from list-valued keys m_total, groups, n, k; missing keys take the
/// values of `defaults`.
SweepGrid resolve_grid(const KeyValues& kv, const SweepGrid& defaults);

}  // namespace tma_sim
