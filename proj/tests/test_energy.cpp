#include "doctest.h"

#include "convbound/energy.hpp"

using namespace convbound;

TEST_CASE("per-operation constants") {
  const HwConfig hw = implementation_preset(1);
  const EnergyTable table;
  TrafficCounters c;
  c.mac_ops = 1000;
  EnergyBreakdown e = energy_report(c, 0, 1000, table, hw);
  CHECK(e.mac_j == doctest::Approx(4.16e-9));
  CHECK(e.pj_per_mac == doctest::Approx(4.16));

  c = TrafficCounters{};
  c.dram_in_r = 1'000'000;
  e = energy_report(c, 0, 1, table, hw);
  CHECK(e.dram_j == doctest::Approx(427.9e-6));
}

TEST_CASE("capacity classes") {
  const EnergyTable t;
  CHECK(t.gbuf_class(512) == doctest::Approx(0.30));
  CHECK(t.gbuf_class(2048) == doctest::Approx(1.39));
  CHECK(t.gbuf_class(3200) == doctest::Approx(2.36));
  CHECK(t.lreg_class(256) == doctest::Approx(3.39));
  CHECK(t.lreg_class(64) == doctest::Approx(1.16));
  CHECK_THROWS_AS(t.gbuf_class(1000), Error);
  CHECK_THROWS_AS(t.lreg_class(100), Error);

  HwConfig odd = implementation_preset(1);
  odd.lreg_words_per_pe = 100;
  TrafficCounters c;
  c.lreg_w = 5;
  CHECK_THROWS_AS(energy_report(c, 0, 1, t, odd), Error);
}

TEST_CASE("zero counters give zero energy") {
  const EnergyBreakdown e = energy_report(TrafficCounters{}, 0, 0, EnergyTable{},
                                          implementation_preset(2));
  CHECK(e.total_j == 0.0);
  CHECK(e.dram_j == 0.0);
  CHECK(e.mac_j == 0.0);
}

TEST_CASE("linearity and table scaling") {
  const Workload w = tiny_workload(1);
  const HwConfig hw = implementation_preset(3);
  EnergyTable table;
  table.lreg_static_pw_per_word = 5.0;
  const ConvLayer& l = w.layers[0];
  const SimResult sim = simulate(l, 1, hw, SimMode::CountersOnly);
  const Count macs = mac_count(l, 1);
  const EnergyBreakdown one = energy_report(sim.counters, sim.total_cycles, macs, table, hw);
  const EnergyBreakdown two =
      energy_report(sim.counters.scaled(2), sim.total_cycles, macs, table, hw);
  CHECK(two.dram_j == doctest::Approx(2 * one.dram_j));
  CHECK(two.gbuf_j == doctest::Approx(2 * one.gbuf_j));
  CHECK(two.greg_j == doctest::Approx(2 * one.greg_j));
  CHECK(two.lreg_dynamic_j == doctest::Approx(2 * one.lreg_dynamic_j));
  CHECK(two.mac_j == doctest::Approx(2 * one.mac_j));
  CHECK(two.lreg_static_j == doctest::Approx(one.lreg_static_j));

  const EnergyBreakdown longer =
      energy_report(sim.counters, 3 * sim.total_cycles, macs, table, hw);
  CHECK(longer.lreg_static_j == doctest::Approx(3 * one.lreg_static_j));
  CHECK(one.lreg_static_j ==
        doctest::Approx(5e-12 * hw.lreg_words_per_pe * hw.pe_count() * sim.total_cycles /
                        hw.clock_hz));

  const EnergyBreakdown scaled =
      energy_report(sim.counters, sim.total_cycles, macs, table.scaled(1.7), hw);
  CHECK(scaled.total_j == doctest::Approx(1.7 * one.total_j));
  CHECK(scaled.mac_j / scaled.total_j == doctest::Approx(one.mac_j / one.total_j));

  CHECK(one.total_j == doctest::Approx(one.dram_j + one.gbuf_j + one.greg_j +
                                       one.lreg_dynamic_j + one.lreg_static_j + one.mac_j));
  CHECK(one.pj_per_mac >= table.mac_pj);
}

TEST_CASE("negative constants are rejected") {
  EnergyTable t;
  t.dram_pj = -1;
  CHECK_THROWS_AS(t.validate(), Error);
}

TEST_CASE("lower-bound energy is below the model") {
  const Workload w = tiny_workload(1);
  const HwConfig hw = implementation_preset(1);
  for (const ConvLayer& l : w.layers) {
    const SimResult sim = simulate(l, 1, hw, SimMode::CountersOnly);
    const Count macs = mac_count(l, 1);
    const EnergyBreakdown model = energy_report(sim, macs, EnergyTable{}, hw);
    AccessVolume v;
    v.input_reads = sim.counters.dram_in_r;
    v.weight_reads = sim.counters.dram_wt_r;
    v.output_writes = sim.counters.dram_out_w;
    const EnergyBreakdown lb = lower_bound_energy(l, 1, v, EnergyTable{}, hw);
    CHECK(lb.total_j <= model.total_j);
    CHECK(lb.mac_j == doctest::Approx(macs * 4.16e-12));
  }
}
