#include "doctest.h"

#include <limits>
#include <random>

#include "convbound/refcheck.hpp"
#include "convbound/simulator.hpp"

using namespace convbound;

namespace {

HwConfig small_hw() {
  HwConfig hw;
  hw.name = "2x2";
  hw.p = 2;
  hw.q = 2;
  hw.pg = 1;
  hw.qg = 1;
  hw.lreg_words_per_pe = 8;
  hw.igbuf_words = 4096;
  hw.wgbuf_words = 256;
  hw.greg_seg_words = 64;
  return hw;
}

}  // namespace

TEST_CASE("identity 1x1 convolution") {
  const ConvLayer l = make_layer("id", 3, 3, 5, 4, 1, 1);
  std::mt19937_64 rng(3);
  ConvTensors t = random_tensors(l, 2, rng);
  t.weights = Tensor(weight_shape(l));
  for (Count c = 0; c < 3; ++c) t.weights.at({c, c, 0, 0}) = 1;
  const SimResult r = simulate(l, 2, implementation_preset(1), SimMode::Functional, &t);
  REQUIRE(r.outputs);
  CHECK(r.outputs->data == t.input.data);
  CHECK(verify_against_golden(r, l, 2, t).ok);
}

TEST_CASE("constant tensors give 18") {
  const ConvLayer l = make_layer("const", 2, 2, 4, 4, 3, 3);
  ConvTensors t{Tensor(input_shape(l, 1), 1), Tensor(weight_shape(l), 1)};
  for (int id = 1; id <= 5; ++id) {
    const SimResult r = simulate(l, 1, implementation_preset(id), SimMode::Functional, &t);
    REQUIRE(r.outputs);
    for (auto v : r.outputs->data) CHECK(v == 18);
  }
}

TEST_CASE("hand-traced schedule with unlimited DRAM") {
  const ConvLayer l = make_layer("hand", 4, 2, 4, 2, 3, 3);
  HwConfig hw = small_hw();
  hw.dram_words_per_cycle = std::numeric_limits<double>::infinity();
  hw.dram_latency_cycles = 0;
  const LayerPlan plan = make_plan(l, 1, hw, Tile{1, 4, 4, 2, 1}, 2, 2, 2, 2, 1);
  const SimResult r = simulate(l, 1, hw, plan, SimMode::CountersOnly);
  CHECK(r.compute_cycles == 144);
  CHECK(r.stall_cycles == 0);
  CHECK(r.total_cycles == 144);
}

TEST_CASE("corrupted output is caught at its coordinate") {
  const ConvLayer l = make_layer("c", 3, 2, 4, 5, 3, 3);
  std::mt19937_64 rng(5);
  const ConvTensors t = random_tensors(l, 2, rng);
  SimResult r = simulate(l, 2, implementation_preset(2), SimMode::Functional, &t);
  CHECK(verify_against_golden(r, l, 2, t).ok);
  r.outputs->at({1, 2, 3, 1}) += 1;
  const VerifyResult v = verify_against_golden(r, l, 2, t);
  CHECK_FALSE(v.ok);
  CHECK(v.mismatches == 1);
  REQUIRE(v.first);
  CHECK(*v.first == std::array<Count, 4>{1, 2, 3, 1});
  CHECK(v.actual == v.expected + 1);
}

TEST_CASE("shape errors") {
  const ConvLayer l = make_layer("c", 3, 2, 4, 4, 3, 3);
  ConvTensors t{Tensor({1, 2, 6, 5}), Tensor(weight_shape(l))};
  CHECK_THROWS_AS(simulate(l, 1, implementation_preset(1), SimMode::Functional, &t), Error);
  CHECK_THROWS_AS(simulate(l, 1, implementation_preset(1), SimMode::Functional, nullptr), Error);
  const SimResult counters_only = simulate(l, 1, implementation_preset(1), SimMode::CountersOnly);
  std::mt19937_64 rng(1);
  const ConvTensors good = random_tensors(l, 1, rng);
  CHECK_THROWS_AS(verify_against_golden(counters_only, l, 1, good), Error);
}

TEST_CASE("simulator invariants") {
  std::mt19937_64 rng(17);
  Workload w = tiny_workload(2);
  w.layers.push_back(vgg16_workload(1).layers[1]);
  w.layers.push_back(vgg16_workload(1).layers[12]);
  for (int id = 1; id <= 5; ++id) {
    const HwConfig hw = implementation_preset(id);
    for (const ConvLayer& l : w.layers) {
      CAPTURE(id);
      CAPTURE(l.name);
      const LayerPlan plan = plan_layer(l, w.batch, hw);
      const SimResult r = simulate(l, w.batch, hw, plan, SimMode::CountersOnly);
      CHECK(r.counters == analytic_counters(plan, l, w.batch));
      CHECK(r.total_cycles == r.compute_cycles + r.stall_cycles);
      CHECK(r.compute_cycles == plan.compute_cycles);
      CHECK(r.total_cycles * hw.pe_count() >= mac_count(l, w.batch));
      for (double u : {r.pe_utilization, r.lreg_utilization, r.gbuf_utilization,
                       r.greg_utilization}) {
        CHECK(u >= 0.0);
        CHECK(u <= 1.0);
      }
      const SimResult again = simulate(l, w.batch, hw, plan, SimMode::CountersOnly);
      CHECK(again.total_cycles == r.total_cycles);
      CHECK(again.counters == r.counters);

      HwConfig fast = hw;
      for (int k = 0; k < 4; ++k) {
        const Count before = simulate(l, w.batch, fast, plan, SimMode::CountersOnly).total_cycles;
        fast.dram_words_per_cycle *= 2;
        CHECK(simulate(l, w.batch, fast, plan, SimMode::CountersOnly).total_cycles <= before);
      }
    }
  }
}

TEST_CASE("functional runs are deterministic") {
  const ConvLayer l = tiny_workload(1).layers[0];
  std::mt19937_64 rng(9);
  const ConvTensors t = random_tensors(l, 2, rng);
  const SimResult a = simulate(l, 2, implementation_preset(3), SimMode::Functional, &t);
  const SimResult b = simulate(l, 2, implementation_preset(3), SimMode::Functional, &t);
  CHECK(*a.outputs == *b.outputs);
  CHECK(a.total_cycles == b.total_cycles);
  CHECK(a.counters == b.counters);
}
