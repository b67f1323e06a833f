#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tma_sim/commands.hpp"
#include "tma_sim/fixture_io.hpp"

using namespace tma_sim;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const char* name) {
  const auto dir = fs::temp_directory_path() / "tma_sim_cmd_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("verify passes on the default 253-row problem and writes its artifacts") {
  const auto dir = scratch_dir("verify");
  CommandOptions o;
  o.seed = 1;
  o.out = dir;
  std::ostringstream out, err;
  CHECK(cmd_verify(o, out, err) == exit_code::ok);
  CHECK(out.str().find("group 0: rows=253 full=1 res=125 equal") != std::string::npos);
  CHECK(out.str().find("result: PASS (1/1 groups bitwise equal)") != std::string::npos);
  CHECK(fs::exists(dir / "manifest.txt"));
  CHECK(fs::exists(dir / "transfer_log.csv"));
}

TEST_CASE("verify exit codes") {
  std::ostringstream out, err;
  CommandOptions fault;
  fault.inject_fault = true;
  CHECK(cmd_verify(fault, out, err) == exit_code::verification_failed);
  CHECK(out.str().find("MISMATCH") != std::string::npos);

  CommandOptions bad;
  bad.overrides["block_n"] = "96";
  CHECK(cmd_verify(bad, out, err) == exit_code::usage);
  CHECK(err.str().find("block_N") != std::string::npos);
}

TEST_CASE("sweep emits one CSV row per cell and a correlation footer") {
  CommandOptions o;
  o.overrides = {{"m_total", "256,300"}, {"groups", "4"}, {"n", "128"}, {"k", "128"}, {"seed_count", "2"}};
  o.seed = 7;
  std::ostringstream out, err;
  REQUIRE(cmd_sweep(o, out, err) == exit_code::ok);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == kSweepCsvHeader);
  int rows = 0;
  while (std::getline(lines, line) && line[0] != '#') {
    ++rows;
    CHECK(line.substr(line.rfind(',') + 1) == "1");
  }
  CHECK(rows == 4);

  CommandOptions acct = o;
  acct.accounting_only = true;
  std::ostringstream out2;
  REQUIRE(cmd_sweep(acct, out2, err) == exit_code::ok);
  CHECK(out2.str().find(",NA\n") != std::string::npos);

  CommandOptions empty;
  empty.overrides = {{"groups", ""}};
  CHECK(cmd_sweep(empty, out, err) == exit_code::usage);
}

TEST_CASE("golden record, replay, drift and empty directories") {
  const auto root = scratch_dir("golden");
  CommandOptions rec;
  rec.fixture_dir = root / "case";
  rec.record = true;
  rec.seed = 1;
  std::ostringstream out, err;
  REQUIRE(cmd_golden(rec, out, err) == exit_code::ok);

  CommandOptions replay;
  replay.fixture_dir = root;
  CHECK(cmd_golden(replay, out, err) == exit_code::ok);
  replay.fixture_dir = root / "case";
  CHECK(cmd_golden(replay, out, err) == exit_code::ok);

  auto c = read_array(root / "case" / "c.bin");
  c.payload[100] ^= 0x01;
  write_array(root / "case" / "c.bin", c);
  std::ostringstream drift_out;
  CHECK(cmd_golden(replay, drift_out, err) == exit_code::verification_failed);
  CHECK(drift_out.str().find("DRIFT") != std::string::npos);

  CommandOptions empty;
  empty.fixture_dir = scratch_dir("golden_empty");
  CHECK(cmd_golden(empty, out, err) == exit_code::usage);

  std::ofstream(root / "case" / "a.bin", std::ios::trunc) << "junk";
  CHECK(cmd_golden(replay, out, err) == exit_code::usage);
}
