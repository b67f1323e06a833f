#include "tma_sim/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tma_sim/errors.hpp"
#include "tma_sim/fixture_io.hpp"
#include "tma_sim/gemm_engine.hpp"
#include "tma_sim/workload.hpp"

namespace tma_sim {
namespace {

KeyValues merged_settings(const CommandOptions& options) {
  KeyValues kv;
  if (options.config) kv = read_key_values(*options.config);
  for (const auto& [key, value] : options.overrides) kv[key] = value;
  if (options.seed) kv["seed"] = std::to_string(*options.seed);
  kv.erase("mode");
  return kv;
}

std::uint64_t seed_of(const KeyValues& kv) {
  const auto it = kv.find("seed");
  return it == kv.end() ? 0 : parse_u64(it->second, "seed");
}

void write_manifest(const RunManifest& manifest) {
  if (!manifest.out_dir) return;
  std::filesystem::create_directories(*manifest.out_dir);
  write_key_values(*manifest.out_dir / "manifest.txt", manifest.to_key_values());
}

RunManifest base_manifest(RunMode mode, const CommandOptions& options) {
  RunManifest m;
  m.mode = mode;
  if (options.config) m.config_source = options.config->string();
  m.out_dir = options.out;
  m.accounting_only = options.accounting_only;
  return m;
}

std::string hex16(std::uint16_t v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%04x", v);
  return buf;
}

void print_comparison(std::ostream& out, const BitwiseReport& report, const std::vector<StorePlan>* plans) {
  for (const auto& g : report.groups) {
    out << "group " << g.group << ": ";
    if (plans != nullptr) {
      const auto& p = (*plans)[g.group];
      out << "rows=" << p.m_g << " full=" << p.full_tiles.size() << " res=" << (p.residual ? p.residual->res : 0)
          << ' ';
    }
    if (g.equal) {
      out << "equal\n";
    } else {
      out << "MISMATCH at row " << g.first->row << " col " << g.first->col << ": " << hex16(g.first->bits_a) << " vs "
          << hex16(g.first->bits_b) << '\n';
    }
  }
}

std::size_t equal_groups(const BitwiseReport& r) {
  return static_cast<std::size_t>(
      std::count_if(r.groups.begin(), r.groups.end(), [](const GroupComparison& g) { return g.equal; }));
}

std::string format_pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", fraction * 100.0);
  return buf;
}

}  // namespace

LogMode log_mode_from_env() {
  const char* v = std::getenv("TMA_SIM_LOG");
  if (v == nullptr) return LogMode::off;
  const std::string s(v);
  if (s == "plans") return LogMode::plans;
  if (s == "transfers") return LogMode::transfers;
  return LogMode::off;
}

int cmd_verify(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  ProblemConfig config;
  std::uint64_t seed = 0;
  RunManifest manifest = base_manifest(RunMode::verify, options);
  try {
    const KeyValues kv = merged_settings(options);
    config = resolve_problem(kv);
    seed = seed_of(kv);
    manifest.seeds = {seed};
    manifest.configs = {config};
    write_manifest(manifest);
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return exit_code::usage;
  }

  out << "config: groups=" << config.group_sizes.size() << " total_rows=" << config.total_rows()
      << " n=" << config.n << " k=" << config.k << " block_m=" << config.block_m << " block_n=" << config.block_n
      << " seed=" << seed << '\n';

  const GroupedOperands operands = make_random_operands(config, seed);
  AdaptiveOptions adaptive_options;
  adaptive_options.drop_phase_b = options.inject_fault;
  if (options.log == LogMode::plans) adaptive_options.plan_log = &err;

  AdaptiveResult adaptive;
  try {
    adaptive = run_adaptive(config, operands, adaptive_options);
  } catch (const AlignmentError& e) {
    err << e.what() << '\n';
    return exit_code::verification_failed;
  } catch (const BoundsError& e) {
    err << e.what() << '\n';
    return exit_code::verification_failed;
  }

  if (options.log == LogMode::transfers) write_transfer_log_csv(err, adaptive.log);
  if (options.out) {
    std::ofstream csv(*options.out / "transfer_log.csv", std::ios::trunc);
    write_transfer_log_csv(csv, adaptive.log);
  }

  const OutputMatrix baseline = run_padded_baseline(config, operands);
  const BitwiseReport report = verify_bitwise(adaptive.output, baseline);
  print_comparison(out, report, &adaptive.plans);
  out << "transfers: ops=" << adaptive.summary.op_count << " g2s_bytes=" << adaptive.summary.global_to_shared_bytes
      << " s2g_bytes=" << adaptive.summary.shared_to_global_bytes
      << " residual_store_ops=" << adaptive.residual_store_ops << '\n';
  const bool pass = report.all_equal();
  out << "result: " << (pass ? "PASS" : "FAIL") << " (" << equal_groups(report) << '/' << report.groups.size()
      << " groups bitwise equal)\n";
  return pass ? exit_code::ok : exit_code::verification_failed;
}

int cmd_sweep(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  SweepGrid grid;
  std::uint64_t block_m = 128;
  std::uint64_t block_n = 128;
  RunManifest manifest = base_manifest(RunMode::sweep, options);
  std::vector<WorkloadSpec> specs;
  try {
    const KeyValues kv = merged_settings(options);
    grid = resolve_grid(kv, options.accounting_only ? paper_grid() : desk_grid());
    if (const auto it = kv.find("block_m"); it != kv.end()) block_m = parse_u64(it->second, "block_m");
    if (const auto it = kv.find("block_n"); it != kv.end()) block_n = parse_u64(it->second, "block_n");
    if (grid.cell_count() == 0 || grid.seed_count == 0) throw ConfigError("sweep grid is empty");
    specs = grid.expand();
    if (!options.accounting_only) {
      for (const auto& s : specs) ProblemConfig{s.n, s.k, {1}, block_m, block_n, 128}.validate();
    }
    manifest.grid = grid;
    for (const auto& s : specs) manifest.seeds.push_back(s.seed);
    std::sort(manifest.seeds.begin(), manifest.seeds.end());
    manifest.seeds.erase(std::unique(manifest.seeds.begin(), manifest.seeds.end()), manifest.seeds.end());
    write_manifest(manifest);
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return exit_code::usage;
  }

  std::ostringstream csv;
  csv << kSweepCsvHeader << '\n';
  std::vector<AccountingReport> reports;
  reports.reserve(specs.size());
  bool all_equal = true;
  for (const auto& spec : specs) {
    AccountingReport r = account(spec, block_m);
    std::string equal = "NA";
    if (!options.accounting_only) {
      const ProblemConfig config{spec.n, spec.k, r.group_sizes, block_m, block_n, 128};
      const GroupedOperands operands = make_random_operands(config, spec.seed);
      bool ok = false;
      try {
        ok = verify_bitwise(run_adaptive(config, operands).output, run_padded_baseline(config, operands)).all_equal();
      } catch (const AlignmentError& e) {
        err << e.what() << '\n';
      } catch (const BoundsError& e) {
        err << e.what() << '\n';
      }
      equal = ok ? "1" : "0";
      all_equal = all_equal && ok;
    }
    csv << spec.m_total << ',' << spec.n << ',' << spec.k << ',' << spec.groups << ',' << spec.seed << ','
        << r.padded_rows << ',' << r.bytes_padded.total() << ',' << r.bytes_actual.total() << ','
        << format_pct(r.memory_saving) << ',' << r.eliminated_traffic_bytes << ',' << r.residual_store_ops << ','
        << equal << '\n';
    reports.push_back(std::move(r));
  }

  try {
    const CorrelationMatrix corr = correlation_matrix(reports);
    csv << "# correlation (Pearson) over " << reports.size() << " rows\n# ,M,N,K,groups,saving\n";
    for (std::size_t i = 0; i < corr.size(); ++i) {
      csv << "# " << kCorrelationVariables[i];
      for (const double v : corr[i]) {
        char buf[32];
        std::snprintf(buf, sizeof buf, ",%.4f", v);
        csv << buf;
      }
      csv << '\n';
    }
  } catch (const DegenerateVariance& e) {
    csv << "# correlation unavailable: " << e.what() << '\n';
  }

  if (options.out) {
    std::ofstream f(*options.out / "sweep.csv", std::ios::trunc);
    f << csv.str();
    out << "wrote " << reports.size() << " rows to " << (*options.out / "sweep.csv").string() << '\n';
  } else {
    out << csv.str();
  }
  return all_equal ? exit_code::ok : exit_code::verification_failed;
}

int cmd_golden(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  if (!options.fixture_dir) {
    err << "golden: a fixture directory is required\n";
    return exit_code::usage;
  }
  const std::filesystem::path& dir = *options.fixture_dir;
  RunManifest manifest = base_manifest(RunMode::golden, options);

  if (options.record) {
    try {
      const KeyValues kv = merged_settings(options);
      const ProblemConfig config = resolve_problem(kv);
      const std::uint64_t seed = seed_of(kv);
      manifest.configs = {config};
      manifest.seeds = {seed};
      write_manifest(manifest);
      Fixture fx{config, make_random_operands(config, seed), {}};
      fx.golden = run_adaptive(fx.config, fx.operands).output;
      if (!verify_bitwise(fx.golden, run_padded_baseline(fx.config, fx.operands)).all_equal()) {
        err << "golden: adaptive and baseline outputs differ; refusing to record\n";
        return exit_code::verification_failed;
      }
      write_fixture(dir, fx);
      out << "recorded fixture " << dir.string() << '\n';
      return exit_code::ok;
    } catch (const Error& e) {
      err << "golden: " << e.what() << '\n';
      return exit_code::usage;
    }
  }

  std::vector<std::filesystem::path> fixtures;
  std::error_code ec;
  if (std::filesystem::exists(dir / "fixture.txt", ec)) {
    fixtures.push_back(dir);
  } else if (std::filesystem::is_directory(dir, ec)) {
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
      if (entry.is_directory() && std::filesystem::exists(entry.path() / "fixture.txt")) fixtures.push_back(entry.path());
    }
    std::sort(fixtures.begin(), fixtures.end());
  }
  if (fixtures.empty()) {
    err << "golden: no fixtures found under " << dir.string() << '\n';
    return exit_code::usage;
  }

  bool drift = false;
  for (const auto& path : fixtures) {
    Fixture fx;
    try {
      fx = read_fixture(path);
      manifest.configs.push_back(fx.config);
    } catch (const Error& e) {
      err << "golden: cannot load " << path.string() << ": " << e.what() << '\n';
      return exit_code::usage;
    }
    try {
      const OutputMatrix replay = run_adaptive(fx.config, fx.operands).output;
      const BitwiseReport report = verify_bitwise(replay, fx.golden);
      out << "fixture " << path.filename().string() << ":\n";
      print_comparison(out, report, nullptr);
      drift = drift || !report.all_equal();
    } catch (const Error& e) {
      err << "golden: " << path.string() << ": " << e.what() << '\n';
      drift = true;
    }
  }
  write_manifest(manifest);
  out << "result: " << (drift ? "DRIFT" : "PASS") << " (" << fixtures.size() << " fixtures)\n";
  return drift ? exit_code::verification_failed : exit_code::ok;
}

}  // namespace tma_sim
