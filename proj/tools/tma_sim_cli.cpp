// tma-sim verify|sweep|golden [--config PATH] [--seed U64] [--out DIR] [--accounting-only]

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tma_sim/commands.hpp"

namespace {

void add_common(CLI::App* cmd, tma_sim::CommandOptions& opts, std::string& config, std::string& out,
                std::uint64_t& seed) {
  cmd->add_option("--config", config, "Flat key = value config file");
  cmd->add_option("--seed", seed, "Seed for group sizes and operands");
  cmd->add_option("--out", out, "Output directory (manifest, CSV)");
  cmd->add_flag("--accounting-only", opts.accounting_only, "Skip GEMM numerics; memory accounting only");
}

void add_overrides(CLI::App* cmd, tma_sim::KeyValues& overrides) {
  for (const char* key : {"m_total", "groups", "n", "k", "block_m", "block_n", "group_sizes", "seed_count"}) {
    std::string flag = std::string("--") + key;
    for (auto& ch : flag) ch = ch == '_' ? '-' : ch;
    cmd->add_option_function<std::string>(
        flag, [&overrides, key](const std::string& v) { overrides[key] = v; }, std::string("Override '") + key + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Padding-free FP8 grouped GEMM simulator"};
  app.require_subcommand(1);

  tma_sim::CommandOptions opts;
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  std::string fixture_dir;

  auto* verify = app.add_subcommand("verify", "Adaptive vs padded baseline, bit for bit");
  add_common(verify, opts, config, out, seed);
  add_overrides(verify, opts.overrides);
  verify->add_flag("--inject-fault", opts.inject_fault, "Test hook: drop phase-b residual stores")
      ->group("");

  auto* sweep = app.add_subcommand("sweep", "Accounting (and optionally GEMM) sweep to CSV");
  add_common(sweep, opts, config, out, seed);
  add_overrides(sweep, opts.overrides);

  auto* golden = app.add_subcommand("golden", "Replay stored fixtures and compare output bits");
  add_common(golden, opts, config, out, seed);
  add_overrides(golden, opts.overrides);
  golden->add_option("fixtures", fixture_dir, "Fixture directory")->required();
  golden->add_flag("--record", opts.record, "Write a fixture from --config instead of replaying");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return tma_sim::exit_code::usage;
  }

  if (!config.empty()) opts.config = config;
  if (!out.empty()) opts.out = out;
  if (app.got_subcommand(verify) ? verify->count("--seed") : app.got_subcommand(sweep) ? sweep->count("--seed")
                                                                                      : golden->count("--seed")) {
    opts.seed = seed;
  }
  if (!fixture_dir.empty()) opts.fixture_dir = fixture_dir;
  opts.log = tma_sim::log_mode_from_env();

  if (app.got_subcommand(verify)) return tma_sim::cmd_verify(opts, std::cout, std::cerr);
  if (app.got_subcommand(sweep)) return tma_sim::cmd_sweep(opts, std::cout, std::cerr);
  return tma_sim::cmd_golden(opts, std::cout, std::cerr);
}
