#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tma_sim/descriptor_pool.hpp"
#include "tma_sim/errors.hpp"
#include "tma_sim/fp8.hpp"
#include "tma_sim/gemm_engine.hpp"
#include "tma_sim/scale_prefetch.hpp"
#include "tma_sim/workload.hpp"

namespace py = pybind11;
using namespace tma_sim;

namespace {

template <typename T>
py::array_t<T> to_numpy(std::vector<T> values, std::size_t rows, std::size_t cols) {
  py::array_t<T> out({rows, cols});
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

std::pair<std::vector<float>, std::pair<std::size_t, std::size_t>> from_numpy(
    const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return {std::vector<float>(a.data(), a.data() + rows * cols), {rows, cols}};
}

py::dict transfer_dict(const RowTransfer& t) {
  py::dict d;
  d["smem_rows"] = py::make_tuple(t.smem_row, t.smem_last());
  d["gmem_rows"] = py::make_tuple(t.gmem_row, t.gmem_last());
  return d;
}

py::dict report_dict(const AccountingReport& r) {
  py::dict d;
  d["m_total"] = r.spec.m_total;
  d["groups"] = r.spec.groups;
  d["n"] = r.spec.n;
  d["k"] = r.spec.k;
  d["seed"] = r.spec.seed;
  d["group_sizes"] = r.group_sizes;
  d["padded_rows"] = r.padded_rows;
  d["bytes_padded"] = py::dict(py::arg("a") = r.bytes_padded.a, py::arg("sa") = r.bytes_padded.sa,
                               py::arg("c") = r.bytes_padded.c);
  d["bytes_actual"] = py::dict(py::arg("a") = r.bytes_actual.a, py::arg("sa") = r.bytes_actual.sa,
                               py::arg("c") = r.bytes_actual.c);
  d["memory_saving"] = r.memory_saving;
  d["eliminated_traffic_bytes"] = r.eliminated_traffic_bytes;
  d["residual_store_ops"] = r.residual_store_ops;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Padding-free FP8 grouped GEMM simulator";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<AlignmentError>(m, "AlignmentError", base.ptr());
  py::register_exception<BoundsError>(m, "BoundsError", base.ptr());
  py::register_exception<InvalidBlockN>(m, "InvalidBlockN", base.ptr());
  py::register_exception<InvalidBlockM>(m, "InvalidBlockM", base.ptr());
  py::register_exception<ResOutOfRange>(m, "ResOutOfRange", base.ptr());
  py::register_exception<NoAlignedSolution>(m, "NoAlignedSolution", base.ptr());
  py::register_exception<ShapeMismatch>(m, "ShapeMismatch", base.ptr());
  py::register_exception<DegenerateVariance>(m, "DegenerateVariance", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  m.def("e4m3_encode", [](double x) { return e4m3::encode(x).bits; }, py::arg("x"));
  m.def("e4m3_decode", [](std::uint8_t code) { return e4m3::decode(Fp8Value{code}); }, py::arg("code"));
  m.def("dequant", [](std::uint8_t code, float scale) { return dequant(Fp8Value{code}, scale); }, py::arg("code"),
        py::arg("scale"));

  m.def(
      "quantize_a",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
        auto [values, shape] = from_numpy(a);
        auto [codes, scales] = quantize_a(values, shape.first, shape.second);
        return py::make_tuple(to_numpy(codes.codes, codes.rows, codes.cols),
                              to_numpy(scales.values, scales.rows, scales.cols));
      },
      py::arg("matrix"), "1x128 tiled quantization; returns (codes uint8, scales float32)");
  m.def(
      "quantize_b",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& b) {
        auto [values, shape] = from_numpy(b);
        auto [codes, scales] = quantize_b(values, shape.first, shape.second);
        return py::make_tuple(to_numpy(codes.codes, codes.rows, codes.cols),
                              to_numpy(scales.values, scales.rows, scales.cols));
      },
      py::arg("matrix"), "128x128 blocked quantization; returns (codes uint8, scales float32)");

  m.def(
      "build_pool",
      [](std::uint64_t block_m, std::uint64_t block_n) {
        std::vector<std::uint64_t> rows;
        for (const auto& d : build_pool(block_m, block_n).entries()) rows.push_back(d.box_rows());
        return rows;
      },
      py::arg("block_m"), py::arg("block_n"), "Box row counts of the store descriptor pool");
  m.def(
      "select_descriptor",
      [](std::uint64_t res, std::uint64_t block_m, std::uint64_t block_n) {
        return build_pool(block_m, block_n).select(res).box_rows();
      },
      py::arg("res"), py::arg("block_m") = 128, py::arg("block_n") = 128);
  m.def(
      "plan_two_phase",
      [](std::uint64_t m_g, std::uint64_t block_m, std::uint64_t block_n) {
        const StorePlan plan = plan_two_phase(m_g, build_pool(block_m, block_n));
        py::dict d;
        py::list full;
        for (const auto& t : plan.full_tiles) full.append(transfer_dict(t));
        d["full_tiles"] = full;
        d["store_ops"] = plan.store_ops();
        if (plan.residual) {
          const auto& r = *plan.residual;
          py::dict res;
          res["res"] = r.res;
          res["desc_rows"] = r.desc_rows;
          res["overlap_rows"] = r.overlap_rows();
          res["phase_a"] = transfer_dict(r.phase_a);
          res["phase_b"] = transfer_dict(r.phase_b);
          d["residual"] = res;
        } else {
          d["residual"] = py::none();
        }
        return d;
      },
      py::arg("m_g"), py::arg("block_m") = 128, py::arg("block_n") = 128);

  m.def(
      "plan_prefetch",
      [](std::uint64_t addr, std::uint64_t k, std::uint64_t block_m) {
        const PrefetchWindow w = plan_prefetch(addr, k, block_m);
        py::dict d;
        d["start_addr"] = w.start_addr;
        d["row_prev"] = w.row_prev;
        d["row_next"] = w.row_next;
        d["desc_dims"] = py::make_tuple(w.desc_rows, w.desc_cols);
        d["valid_rows"] = py::make_tuple(w.valid_begin(), w.valid_end());
        return d;
      },
      py::arg("addr"), py::arg("k"), py::arg("block_m") = 128);

  m.def("generate_group_sizes", &generate_group_sizes, py::arg("m_total"), py::arg("groups"), py::arg("seed"));

  m.def(
      "account",
      [](std::uint64_t m_total, std::uint64_t groups, std::uint64_t n, std::uint64_t k, std::uint64_t seed,
         std::optional<std::vector<std::uint64_t>> group_sizes) {
        const WorkloadSpec spec{m_total, groups, n, k, seed};
        return report_dict(group_sizes ? account(spec, *group_sizes) : account(spec));
      },
      py::arg("m_total"), py::arg("groups"), py::arg("n"), py::arg("k"), py::arg("seed") = 0,
      py::arg("group_sizes") = py::none());

  m.def(
      "correlation_matrix",
      [](const std::vector<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t>>&
             specs) {
        std::vector<AccountingReport> reports;
        for (const auto& [m_total, groups, n, k, seed] : specs) reports.push_back(account({m_total, groups, n, k, seed}));
        const auto c = correlation_matrix(reports);
        std::vector<std::vector<double>> out;
        for (const auto& row : c) out.emplace_back(row.begin(), row.end());
        return out;
      },
      py::arg("specs"),
      "Pearson matrix over (M, N, K, groups, saving) for (m_total, groups, n, k, seed) workloads");

  m.def(
      "verify",
      [](std::vector<std::uint64_t> group_sizes, std::uint64_t n, std::uint64_t k, std::uint64_t block_m,
         std::uint64_t block_n, std::uint64_t seed) {
        const ProblemConfig config{n, k, std::move(group_sizes), block_m, block_n, 128};
        const GroupedOperands ops = make_random_operands(config, seed);
        const AdaptiveResult adaptive = run_adaptive(config, ops);
        const OutputMatrix baseline = run_padded_baseline(config, ops);
        const BitwiseReport report = verify_bitwise(adaptive.output, baseline);
        py::dict d;
        d["bitwise_equal"] = report.all_equal();
        d["residual_store_ops"] = adaptive.residual_store_ops;
        d["transfer_ops"] = adaptive.summary.op_count;
        d["g2s_bytes"] = adaptive.summary.global_to_shared_bytes;
        d["s2g_bytes"] = adaptive.summary.shared_to_global_bytes;
        d["adaptive"] = to_numpy(adaptive.output.bits, adaptive.output.rows, adaptive.output.cols);
        d["baseline"] = to_numpy(baseline.bits, baseline.rows, baseline.cols);
        return d;
      },
      py::arg("group_sizes"), py::arg("n") = 128, py::arg("k") = 128, py::arg("block_m") = 128,
      py::arg("block_n") = 128, py::arg("seed") = 0,
      "Run the adaptive pipeline and the padding baseline on random operands");
}
