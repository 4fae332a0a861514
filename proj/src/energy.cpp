#include "convbound/energy.hpp"

#include <cmath>
#include <sstream>

#include "convbound/bounds.hpp"

namespace convbound {

namespace {

double lookup(const std::map<Count, double>& classes, Count bytes, const char* what) {
  const auto it = classes.find(bytes);
  if (it == classes.end()) {
    std::ostringstream msg;
    msg << "no " << what << " energy class for " << bytes << " bytes (known:";
    for (const auto& [k, v] : classes) msg << ' ' << k;
    msg << ')';
    throw Error(msg.str());
  }
  return it->second;
}

constexpr double kPico = 1e-12;

}  // namespace

void EnergyTable::validate() const {
  auto bad = [](double v) { return !(v >= 0.0) || std::isinf(v); };
  bool fail = bad(mac_pj) || bad(dram_pj) || bad(greg_pj) || bad(lreg_static_pw_per_word);
  for (const auto& [k, v] : gbuf_pj) fail = fail || k < 1 || bad(v);
  for (const auto& [k, v] : lreg_pj) fail = fail || k < 1 || bad(v);
  if (fail) throw Error("energy table entries must be finite and >= 0");
}

double EnergyTable::gbuf_class(Count bytes) const { return lookup(gbuf_pj, bytes, "GBuf"); }
double EnergyTable::lreg_class(Count bytes) const { return lookup(lreg_pj, bytes, "LReg"); }

EnergyTable EnergyTable::scaled(double f) const {
  EnergyTable t = *this;
  t.mac_pj *= f;
  t.dram_pj *= f;
  t.greg_pj *= f;
  t.lreg_static_pw_per_word *= f;
  for (auto& [k, v] : t.gbuf_pj) v *= f;
  for (auto& [k, v] : t.lreg_pj) v *= f;
  return t;
}

EnergyBreakdown& EnergyBreakdown::operator+=(const EnergyBreakdown& o) {
  dram_j += o.dram_j;
  gbuf_j += o.gbuf_j;
  greg_j += o.greg_j;
  lreg_dynamic_j += o.lreg_dynamic_j;
  lreg_static_j += o.lreg_static_j;
  mac_j += o.mac_j;
  total_j += o.total_j;
  return *this;
}

EnergyBreakdown energy_report(const TrafficCounters& c, Count total_cycles, Count useful_macs,
                              const EnergyTable& table, const HwConfig& hw, int word_bytes) {
  table.validate();
  const double ig = table.gbuf_class(hw.igbuf_words * word_bytes);
  const double wg = table.gbuf_class(hw.wgbuf_words * word_bytes);
  const double lr = table.lreg_class(hw.lreg_words_per_pe * word_bytes);
  auto d = [](Count n) { return static_cast<double>(n); };

  EnergyBreakdown e;
  e.dram_j = d(c.dram_total()) * table.dram_pj * kPico;
  e.gbuf_j = (d(c.gbuf_in_r + c.gbuf_in_w) * ig + d(c.gbuf_wt_r + c.gbuf_wt_w) * wg) * kPico;
  e.greg_j = d(c.greg_total()) * table.greg_pj * kPico;
  e.lreg_dynamic_j = d(c.lreg_total()) * lr * kPico;
  e.lreg_static_j = table.lreg_static_pw_per_word * kPico * d(hw.psum_words()) *
                    d(total_cycles) / hw.clock_hz;
  e.mac_j = d(c.mac_ops) * table.mac_pj * kPico;
  e.total_j = e.dram_j + e.gbuf_j + e.greg_j + e.lreg_dynamic_j + e.lreg_static_j + e.mac_j;
  e.pj_per_mac = useful_macs > 0 ? e.total_j / kPico / d(useful_macs) : 0.0;
  return e;
}

EnergyBreakdown energy_report(const SimResult& sim, Count useful_macs, const EnergyTable& table,
                              const HwConfig& hw, int word_bytes) {
  return energy_report(sim.counters, sim.total_cycles, useful_macs, table, hw, word_bytes);
}

EnergyBreakdown lower_bound_energy(const ConvLayer& layer, Count batch,
                                   const AccessVolume& dram_volume, const EnergyTable& table,
                                   const HwConfig& hw, int word_bytes) {
  const Count macs = mac_count(layer, batch);
  TrafficCounters c;
  c.dram_in_r = offchip_lower_bound(layer, batch, MemoryBudget{hw.effective_words()});
  c.gbuf_in_r = dram_volume.input_reads;
  c.gbuf_in_w = dram_volume.input_reads;
  c.gbuf_wt_r = dram_volume.weight_reads;
  c.gbuf_wt_w = dram_volume.weight_reads;
  c.lreg_w = reg_lower_bound(layer, batch);
  c.mac_ops = macs;
  return energy_report(c, 0, macs, table, hw, word_bytes);
}

EfficiencySummary efficiency_summary(const Workload& workload, const HwConfig& hw,
                                     const EnergyTable& table) {
  workload.validate();
  EfficiencySummary s;
  Count macs = 0;
  for (const auto& layer : workload.layers) {
    LayerEnergy le;
    le.name = layer.name;
    le.macs = mac_count(layer, workload.batch);
    le.sim = simulate(layer, workload.batch, hw, SimMode::CountersOnly);
    le.energy = energy_report(le.sim, le.macs, table, hw, workload.word_bytes());
    s.total += le.energy;
    macs += le.macs;
    s.layers.push_back(std::move(le));
  }
  s.total.pj_per_mac = macs > 0 ? s.total.total_j / kPico / static_cast<double>(macs) : 0.0;
  const double onchip = s.total.onchip_j();
  s.onchip_pj_per_mac = macs > 0 ? onchip / kPico / static_cast<double>(macs) : 0.0;
  if (onchip > 0) {
    s.mac_share = s.total.mac_j / onchip;
    s.gbuf_share = s.total.gbuf_j / onchip;
    s.greg_share = s.total.greg_j / onchip;
    s.lreg_share = (s.total.lreg_dynamic_j + s.total.lreg_static_j) / onchip;
  }
  s.mac_largest_onchip = s.total.mac_j >= s.total.gbuf_j && s.total.mac_j >= s.total.greg_j &&
                         s.total.mac_j >= s.total.lreg_dynamic_j + s.total.lreg_static_j;
  return s;
}

}  // namespace convbound
