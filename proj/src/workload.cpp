#include "tma_sim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tma_sim/errors.hpp"
#include "tma_sim/fp8.hpp"
#include "tma_sim/random.hpp"
#include "tma_sim/scale_prefetch.hpp"

namespace tma_sim {

std::vector<std::uint64_t> generate_group_sizes(std::uint64_t m_total, std::uint64_t groups, std::uint64_t seed) {
  if (groups == 0) throw InvalidInput("generate_group_sizes: at least one group is required");
  const std::uint64_t upper = 2 * (m_total / groups);
  std::vector<std::uint64_t> v(groups, 0);
  if (upper == 0) {
    v.back() = m_total;
    return v;
  }

  std::uint64_t sum = 0;
  for (std::uint64_t attempt = 0; sum == 0; ++attempt) {
    Rng rng = Rng::substream(seed, attempt);
    for (auto& x : v) x = rng.uniform(upper);
    sum = std::accumulate(v.begin(), v.end(), std::uint64_t{0});
  }
  for (auto& x : v) x = m_total * x / sum;
  const std::uint64_t scaled = std::accumulate(v.begin(), v.end(), std::uint64_t{0});
  v.back() += m_total - scaled;
  return v;
}

AccountingReport account(const WorkloadSpec& spec, std::span<const std::uint64_t> group_sizes, std::uint64_t block_m) {
  AccountingReport r;
  r.spec = spec;
  r.group_sizes.assign(group_sizes.begin(), group_sizes.end());

  std::uint64_t actual_rows = 0;
  for (const std::uint64_t m : group_sizes) {
    actual_rows += m;
    r.padded_rows += ceil_div(m, 128) * 128 - m;
    if (m % block_m != 0) r.residual_store_ops += 2;
  }
  const std::uint64_t padded_total = actual_rows + r.padded_rows;
  const std::uint64_t a_row = spec.k;
  const std::uint64_t sa_row = scale_row_bytes(spec.k);
  const std::uint64_t c_row = 2 * spec.n;

  r.bytes_actual = PaddedBytes{actual_rows * a_row, actual_rows * sa_row, actual_rows * c_row};
  r.bytes_padded = PaddedBytes{padded_total * a_row, padded_total * sa_row, padded_total * c_row};
  r.memory_saving = r.bytes_padded.total() == 0
                        ? 0.0
                        : 1.0 - static_cast<double>(r.bytes_actual.total()) / static_cast<double>(r.bytes_padded.total());
  r.eliminated_traffic_bytes = 2 * (r.bytes_padded.a + r.bytes_padded.sa);
  return r;
}

AccountingReport account(const WorkloadSpec& spec, std::uint64_t block_m) {
  const auto sizes = generate_group_sizes(spec.m_total, spec.groups, spec.seed);
  return account(spec, sizes, block_m);
}

CorrelationMatrix correlation_matrix(std::span<const AccountingReport> reports) {
  if (reports.size() < 2) throw DegenerateVariance("correlation_matrix: need at least two reports");
  const std::size_t count = reports.size();
  std::array<std::vector<double>, 5> cols;
  for (auto& c : cols) c.reserve(count);
  for (const auto& r : reports) {
    cols[0].push_back(static_cast<double>(r.spec.m_total));
    cols[1].push_back(static_cast<double>(r.spec.n));
    cols[2].push_back(static_cast<double>(r.spec.k));
    cols[3].push_back(static_cast<double>(r.spec.groups));
    cols[4].push_back(r.memory_saving);
  }

  std::array<std::vector<double>, 5> centered;
  std::array<double, 5> norm{};
  for (std::size_t v = 0; v < 5; ++v) {
    const double mean = std::accumulate(cols[v].begin(), cols[v].end(), 0.0) / static_cast<double>(count);
    centered[v].resize(count);
    double ss = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      centered[v][i] = cols[v][i] - mean;
      ss += centered[v][i] * centered[v][i];
    }
    if (!(ss > 0.0)) {
      throw DegenerateVariance(std::string("correlation_matrix: variable ") + kCorrelationVariables[v] +
                               " has zero variance");
    }
    norm[v] = std::sqrt(ss);
  }

  CorrelationMatrix m{};
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      if (i == j) {
        m[i][j] = 1.0;
        continue;
      }
      const double dot = std::inner_product(centered[i].begin(), centered[i].end(), centered[j].begin(), 0.0);
      m[i][j] = dot / (norm[i] * norm[j]);
    }
  }
  return m;
}

std::vector<WorkloadSpec> SweepGrid::expand() const {
  std::vector<WorkloadSpec> out;
  out.reserve(cell_count() * seed_count);
  for (const auto m : m_total)
    for (const auto g : groups)
      for (const auto nn : n)
        for (const auto kk : k)
          for (std::uint64_t s = 0; s < seed_count; ++s) out.push_back(WorkloadSpec{m, g, nn, kk, seed + s});
  return out;
}

SweepGrid paper_grid() {
  const std::vector<std::uint64_t> dims = {3072, 4096, 5120, 6144, 7168, 8192};
  return SweepGrid{{8192, 16384, 32768, 65536}, {4, 8, 16, 32}, dims, dims, 0, 1};
}

SweepGrid desk_grid() {
  return SweepGrid{{256, 512, 1024}, {1, 4, 8}, {128, 256}, {128, 192, 256}, 0, 1};
}

}  // namespace tma_sim
