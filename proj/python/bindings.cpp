#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "convbound/bounds.hpp"
#include "convbound/dataflow.hpp"
#include "convbound/energy.hpp"
#include "convbound/io.hpp"
#include "convbound/refcheck.hpp"
#include "convbound/report.hpp"
#include "convbound/simulator.hpp"

namespace py = pybind11;
using namespace convbound;

namespace {

using IntArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const IntArray& a) {
  std::vector<Count> dims(a.shape(), a.shape() + a.ndim());
  Tensor t(dims);
  std::copy(a.data(), a.data() + a.size(), t.data.begin());
  return t;
}

IntArray to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.dims.begin(), t.dims.end());
  IntArray out(shape);
  std::copy(t.data.begin(), t.data.end(), out.mutable_data());
  return out;
}

py::dict counters_dict(const TrafficCounters& c) {
  py::dict d;
  d["dram_in_r"] = c.dram_in_r;
  d["dram_in_w"] = c.dram_in_w;
  d["dram_wt_r"] = c.dram_wt_r;
  d["dram_wt_w"] = c.dram_wt_w;
  d["dram_out_r"] = c.dram_out_r;
  d["dram_out_w"] = c.dram_out_w;
  d["gbuf_in_r"] = c.gbuf_in_r;
  d["gbuf_in_w"] = c.gbuf_in_w;
  d["gbuf_wt_r"] = c.gbuf_wt_r;
  d["gbuf_wt_w"] = c.gbuf_wt_w;
  d["greg_in_r"] = c.greg_in_r;
  d["greg_in_w"] = c.greg_in_w;
  d["greg_wt_r"] = c.greg_wt_r;
  d["greg_wt_w"] = c.greg_wt_w;
  d["lreg_r"] = c.lreg_r;
  d["lreg_w"] = c.lreg_w;
  d["mac_ops"] = c.mac_ops;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Off-chip communication bounds, dataflow search and accelerator simulation";

  // translators run newest first, so the base class goes in first
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ValueError);
  py::register_exception<OverflowError>(m, "OverflowError", PyExc_OverflowError);

  py::class_<ConvLayer>(m, "ConvLayer")
      .def(py::init(&make_layer), py::arg("name"), py::arg("co"), py::arg("ci"), py::arg("ho"),
           py::arg("wo"), py::arg("hk"), py::arg("wk"), py::arg("d") = 1)
      .def_readwrite("name", &ConvLayer::name)
      .def_readwrite("co", &ConvLayer::co)
      .def_readwrite("ci", &ConvLayer::ci)
      .def_readwrite("ho", &ConvLayer::ho)
      .def_readwrite("wo", &ConvLayer::wo)
      .def_readwrite("hk", &ConvLayer::hk)
      .def_readwrite("wk", &ConvLayer::wk)
      .def_readwrite("d", &ConvLayer::d)
      .def_property_readonly("hi", &ConvLayer::hi)
      .def_property_readonly("wi", &ConvLayer::wi)
      .def("input_words", &ConvLayer::input_words)
      .def("weight_words", &ConvLayer::weight_words)
      .def("output_words", &ConvLayer::output_words)
      .def("__repr__", [](const ConvLayer& l) {
        return "ConvLayer('" + l.name + "', co=" + std::to_string(l.co) +
               ", ci=" + std::to_string(l.ci) + ", ho=" + std::to_string(l.ho) +
               ", wo=" + std::to_string(l.wo) + ", hk=" + std::to_string(l.hk) +
               ", wk=" + std::to_string(l.wk) + ", d=" + std::to_string(l.d) + ")";
      });

  py::class_<Workload>(m, "Workload")
      .def(py::init<>())
      .def_readwrite("layers", &Workload::layers)
      .def_readwrite("batch", &Workload::batch)
      .def_readwrite("word_bits", &Workload::word_bits)
      .def("to_mb", &Workload::to_mb);

  m.def("vgg16_workload", &vgg16_workload, py::arg("batch"));
  m.def("tiny_workload", &tiny_workload, py::arg("batch") = 1);
  m.def("reuse_factor", [](const ConvLayer& l) {
    const Rational r = reuse_factor(l);
    return py::make_tuple(r.num, r.den);
  });
  m.def("mac_count", &mac_count, py::arg("layer"), py::arg("batch"));
  m.def("total_macs", &total_macs);
  m.def(
      "offchip_lower_bound",
      [](const ConvLayer& l, Count batch, Count words) {
        return offchip_lower_bound(l, batch, MemoryBudget{words});
      },
      py::arg("layer"), py::arg("batch"), py::arg("budget_words"));
  m.def("parse_budget", &io::parse_budget, py::arg("text"), py::arg("word_bytes") = 2);

  py::enum_<DataflowKind>(m, "DataflowKind")
      .value("Proposed", DataflowKind::Proposed)
      .value("InR_A", DataflowKind::InR_A)
      .value("InR_B", DataflowKind::InR_B)
      .value("WtR_A", DataflowKind::WtR_A)
      .value("WtR_B", DataflowKind::WtR_B)
      .value("OutR_A", DataflowKind::OutR_A)
      .value("OutR_B", DataflowKind::OutR_B);
  m.def("kind_name", [](DataflowKind k) { return std::string(to_string(k)); });

  py::class_<Tile>(m, "Tile")
      .def(py::init<Count, Count, Count, Count, Count>(), py::arg("b") = 1, py::arg("z") = 1,
           py::arg("y") = 1, py::arg("x") = 1, py::arg("k") = 1)
      .def_readwrite("b", &Tile::b)
      .def_readwrite("z", &Tile::z)
      .def_readwrite("y", &Tile::y)
      .def_readwrite("x", &Tile::x)
      .def_readwrite("k", &Tile::k)
      .def(py::self == py::self)
      .def("__repr__", [](const Tile& t) {
        return "Tile(b=" + std::to_string(t.b) + ", z=" + std::to_string(t.z) +
               ", y=" + std::to_string(t.y) + ", x=" + std::to_string(t.x) +
               ", k=" + std::to_string(t.k) + ")";
      });

  py::class_<AccessVolume>(m, "AccessVolume")
      .def_readonly("input_reads", &AccessVolume::input_reads)
      .def_readonly("weight_reads", &AccessVolume::weight_reads)
      .def_readonly("output_reads", &AccessVolume::output_reads)
      .def_readonly("output_writes", &AccessVolume::output_writes)
      .def("reads", &AccessVolume::reads)
      .def("total", &AccessVolume::total)
      .def(py::self == py::self);

  py::class_<SearchResult>(m, "SearchResult")
      .def_readonly("kind", &SearchResult::kind)
      .def_readonly("tile", &SearchResult::tile)
      .def_readonly("volume", &SearchResult::volume)
      .def_readonly("footprint", &SearchResult::footprint);

  m.def("dataflow_volume", &dataflow_volume, py::arg("kind"), py::arg("layer"), py::arg("batch"),
        py::arg("tile"));
  m.def("footprint_words", &footprint_words, py::arg("kind"), py::arg("layer"), py::arg("tile"));
  m.def(
      "tiling_search",
      [](DataflowKind k, const ConvLayer& l, Count batch, Count words, unsigned threads) {
        return tiling_search(k, l, batch, MemoryBudget{words}, SearchOptions{threads});
      },
      py::arg("kind"), py::arg("layer"), py::arg("batch"), py::arg("budget_words"),
      py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());
  m.def(
      "find_minimum",
      [](const ConvLayer& l, Count batch, Count words) {
        return find_minimum(l, batch, MemoryBudget{words});
      },
      py::arg("layer"), py::arg("batch"), py::arg("budget_words"),
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "brute_force_tiling",
      [](DataflowKind k, const ConvLayer& l, Count batch, Count words) {
        return refcheck::brute_force_tiling(k, l, batch, MemoryBudget{words});
      },
      py::arg("kind"), py::arg("layer"), py::arg("batch"), py::arg("budget_words"));

  py::class_<HwConfig>(m, "HwConfig")
      .def(py::init<>())
      .def_readwrite("name", &HwConfig::name)
      .def_readwrite("p", &HwConfig::p)
      .def_readwrite("q", &HwConfig::q)
      .def_readwrite("pg", &HwConfig::pg)
      .def_readwrite("qg", &HwConfig::qg)
      .def_readwrite("lreg_words_per_pe", &HwConfig::lreg_words_per_pe)
      .def_readwrite("igbuf_words", &HwConfig::igbuf_words)
      .def_readwrite("wgbuf_words", &HwConfig::wgbuf_words)
      .def_readwrite("greg_seg_words", &HwConfig::greg_seg_words)
      .def_readwrite("dram_words_per_cycle", &HwConfig::dram_words_per_cycle)
      .def_readwrite("dram_latency_cycles", &HwConfig::dram_latency_cycles)
      .def_readwrite("clock_hz", &HwConfig::clock_hz)
      .def("validate", &HwConfig::validate)
      .def("effective_words", &HwConfig::effective_words)
      .def("greg_words", &HwConfig::greg_words);
  m.def("implementation_preset", &implementation_preset, py::arg("id"));

  py::class_<IterationPlan>(m, "IterationPlan")
      .def_readonly("xs", &IterationPlan::xs)
      .def_readonly("ys", &IterationPlan::ys)
      .def_readonly("zs", &IterationPlan::zs)
      .def_readonly("passes_per_iteration", &IterationPlan::passes_per_iteration)
      .def_readonly("cycles_per_pass", &IterationPlan::cycles_per_pass)
      .def_readonly("iterations", &IterationPlan::iterations)
      .def("cycles_per_iteration", &IterationPlan::cycles_per_iteration);

  py::class_<LayerPlan>(m, "LayerPlan")
      .def_readonly("tile", &LayerPlan::tile)
      .def_readonly("iter", &LayerPlan::iter)
      .def_readonly("blocks", &LayerPlan::blocks)
      .def_readonly("compute_cycles", &LayerPlan::compute_cycles)
      .def_readonly("pe_utilization", &LayerPlan::pe_utilization);
  m.def("plan_layer", &plan_layer, py::arg("layer"), py::arg("batch"), py::arg("hw"));
  m.def("analytic_counters", [](const LayerPlan& plan, const ConvLayer& l, Count batch) {
    return counters_dict(analytic_counters(plan, l, batch));
  });

  m.def(
      "simulate",
      [](const ConvLayer& l, Count batch, const HwConfig& hw, std::optional<IntArray> inputs,
         std::optional<IntArray> weights) {
        SimResult r;
        py::dict out;
        if (inputs && weights) {
          const ConvTensors t{to_tensor(*inputs), to_tensor(*weights)};
          r = simulate(l, batch, hw, SimMode::Functional, &t);
          const VerifyResult v = verify_against_golden(r, l, batch, t);
          out["outputs"] = to_array(*r.outputs);
          out["verified"] = v.ok;
        } else if (inputs || weights) {
          throw Error("functional simulation needs both inputs and weights");
        } else {
          r = simulate(l, batch, hw, SimMode::CountersOnly);
        }
        out["total_cycles"] = r.total_cycles;
        out["compute_cycles"] = r.compute_cycles;
        out["stall_cycles"] = r.stall_cycles;
        out["pe_utilization"] = r.pe_utilization;
        out["lreg_utilization"] = r.lreg_utilization;
        out["gbuf_utilization"] = r.gbuf_utilization;
        out["greg_utilization"] = r.greg_utilization;
        out["counters"] = counters_dict(r.counters);
        return out;
      },
      py::arg("layer"), py::arg("batch"), py::arg("hw"), py::arg("inputs") = py::none(),
      py::arg("weights") = py::none());

  m.def(
      "golden_conv",
      [](const ConvLayer& l, Count batch, const IntArray& inputs, const IntArray& weights) {
        return to_array(refcheck::golden_conv(l, batch, {to_tensor(inputs), to_tensor(weights)}));
      },
      py::arg("layer"), py::arg("batch"), py::arg("inputs"), py::arg("weights"));
  m.def(
      "random_tensors",
      [](const ConvLayer& l, Count batch, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        const ConvTensors t = random_tensors(l, batch, rng);
        return py::make_tuple(to_array(t.input), to_array(t.weights));
      },
      py::arg("layer"), py::arg("batch"), py::arg("seed"));

  py::class_<EnergyTable>(m, "EnergyTable")
      .def(py::init<>())
      .def_readwrite("mac_pj", &EnergyTable::mac_pj)
      .def_readwrite("dram_pj", &EnergyTable::dram_pj)
      .def_readwrite("greg_pj", &EnergyTable::greg_pj)
      .def_readwrite("gbuf_pj", &EnergyTable::gbuf_pj)
      .def_readwrite("lreg_pj", &EnergyTable::lreg_pj)
      .def_readwrite("lreg_static_pw_per_word", &EnergyTable::lreg_static_pw_per_word);

  m.def(
      "efficiency_summary",
      [](const Workload& w, const HwConfig& hw, const EnergyTable& table) {
        EfficiencySummary s;
        {
          py::gil_scoped_release release;
          s = efficiency_summary(w, hw, table);
        }
        py::dict d;
        d["total_j"] = s.total.total_j;
        d["dram_j"] = s.total.dram_j;
        d["pj_per_mac"] = s.total.pj_per_mac;
        d["onchip_pj_per_mac"] = s.onchip_pj_per_mac;
        d["mac_share"] = s.mac_share;
        d["gbuf_share"] = s.gbuf_share;
        d["greg_share"] = s.greg_share;
        d["lreg_share"] = s.lreg_share;
        d["mac_largest_onchip"] = s.mac_largest_onchip;
        return d;
      },
      py::arg("workload"), py::arg("hw"), py::arg("table") = EnergyTable{});

  m.def(
      "bound_csv", [](const Workload& w, const std::vector<Count>& budgets) {
        return cmd_bound(w, budgets).csv;
      },
      py::arg("workload"), py::arg("budgets"));
  m.def(
      "compare_csv",
      [](const Workload& w, const std::vector<Count>& budgets,
         std::vector<DataflowKind> kinds) {
        if (kinds.empty()) kinds.assign(kAllKinds.begin(), kAllKinds.end());
        return cmd_compare(w, budgets, kinds).csv;
      },
      py::arg("workload"), py::arg("budgets"), py::arg("kinds") = std::vector<DataflowKind>{});
  m.def(
      "simulate_csv",
      [](const Workload& w, const HwConfig& hw, const EnergyTable& table, bool functional,
         std::uint64_t seed) {
        const Report r = cmd_simulate(w, hw, table, {functional, seed});
        return py::make_tuple(r.csv, r.ok);
      },
      py::arg("workload"), py::arg("hw"), py::arg("table") = EnergyTable{},
      py::arg("functional") = false, py::arg("seed") = 1);
}
