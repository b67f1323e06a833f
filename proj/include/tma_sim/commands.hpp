#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "tma_sim/run_config.hpp"

namespace tma_sim {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int verification_failed = 1;
inline constexpr int usage = 2;
}  // namespace exit_code

enum class LogMode { off, plans, transfers };

/// Reads TMA_SIM_LOG (off, plans, transfers). Unset or empty means off.
LogMode log_mode_from_env();

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  bool accounting_only = false;
  /// Values given as flags; they replace values from the config file.
  KeyValues overrides;
  std::optional<std::filesystem::path> fixture_dir;
  /// golden: write a fixture from the resolved config instead of replaying.
  bool record = false;
  /// verify: drop every phase-b residual store.
  bool inject_fault = false;
  LogMode log = LogMode::off;
};

/// Runs the adaptive pipeline and the padding baseline on one configuration and
/// compares them bit for bit. 0 when every group matches, 1 on mismatch or an
/// alignment/bounds violation, 2 on configuration errors.
int cmd_verify(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// One CSV row per (grid cell, seed), followed by a '#'-prefixed correlation footer.
/// Written to <out>/sweep.csv when --out is given, otherwise to `out`.
int cmd_sweep(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Replays every fixture under the fixture directory and compares output bits to
/// the stored goldens; 1 on drift, 2 when no fixture is found.
int cmd_golden(const CommandOptions& options, std::ostream& out, std::ostream& err);

inline constexpr const char* kSweepCsvHeader =
    "M,N,K,groups,seed,padded_rows,bytes_padded,bytes_actual,saving_pct,eliminated_traffic_bytes,"
    "residual_store_ops,bitwise_equal";

}  // namespace tma_sim
