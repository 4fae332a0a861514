#pragma once

#include <map>
#include <string>
#include <vector>

#include "convbound/mapping.hpp"
#include "convbound/simulator.hpp"
#include "convbound/workload.hpp"

namespace convbound {

/// Per-access energies in pJ. Capacity classes are keyed by size in bytes.
struct EnergyTable {
  double mac_pj = 4.16;
  double dram_pj = 427.9;
  std::map<Count, double> gbuf_pj = {{512, 0.30}, {2048, 1.39}, {3200, 2.36}};
  std::map<Count, double> lreg_pj = {{256, 3.39}, {128, 1.92}, {64, 1.16}};
  double greg_pj = 1.16;
  /// Static LReg power per stored word, in pW.
  double lreg_static_pw_per_word = 0.0;

  void validate() const;
  double gbuf_class(Count bytes) const;
  double lreg_class(Count bytes) const;
  /// Every constant multiplied by factor.
  EnergyTable scaled(double factor) const;
};

struct EnergyBreakdown {
  double dram_j = 0;
  double gbuf_j = 0;
  double greg_j = 0;
  double lreg_dynamic_j = 0;
  double lreg_static_j = 0;
  double mac_j = 0;
  double total_j = 0;
  /// total_j over useful MACs, in pJ.
  double pj_per_mac = 0;

  double onchip_j() const { return total_j - dram_j; }
  EnergyBreakdown& operator+=(const EnergyBreakdown& o);
};

/// Dynamic parts are access counts times per-access energy, with the GBuf and LReg
/// classes picked from the capacities of hw; MAC energy uses executed MACs. Static
/// LReg energy is pW/word * r * p*q * cycles / clock. pj_per_mac divides by useful_macs.
EnergyBreakdown energy_report(const TrafficCounters& counters, Count total_cycles,
                              Count useful_macs, const EnergyTable& table, const HwConfig& hw,
                              int word_bytes = 2);

EnergyBreakdown energy_report(const SimResult& sim, Count useful_macs, const EnergyTable& table,
                              const HwConfig& hw, int word_bytes = 2);

/// Energy of the minimum traffic: the off-chip bound, each loaded input and weight
/// written to and read from the GBuf once, one LReg write and one MAC per MAC.
EnergyBreakdown lower_bound_energy(const ConvLayer& layer, Count batch,
                                   const AccessVolume& dram_volume, const EnergyTable& table,
                                   const HwConfig& hw, int word_bytes = 2);

struct LayerEnergy {
  std::string name;
  Count macs = 0;
  SimResult sim;
  EnergyBreakdown energy;
};

struct EfficiencySummary {
  std::vector<LayerEnergy> layers;
  EnergyBreakdown total;
  double onchip_pj_per_mac = 0;
  /// Component shares of on-chip energy.
  double mac_share = 0;
  double gbuf_share = 0;
  double greg_share = 0;
  double lreg_share = 0;
  bool mac_largest_onchip = false;
};

/// Simulates every layer (counters only) and aggregates the breakdowns.
EfficiencySummary efficiency_summary(const Workload& workload, const HwConfig& hw,
                                     const EnergyTable& table);

}  // namespace convbound
