#pragma once

#include <string>

#include "convbound/common.hpp"
#include "convbound/dataflow.hpp"
#include "convbound/workload.hpp"

namespace convbound {

/// One accelerator instance.
struct HwConfig {
  std::string name = "custom";
  Count p = 16;  // PE rows
  Count q = 16;  // PE columns
  Count pg = 4;  // PE group rows
  Count qg = 4;  // PE group columns
  Count lreg_words_per_pe = 128;
  Count igbuf_words = 1024;
  Count wgbuf_words = 256;
  Count greg_seg_words = 64;
  double dram_words_per_cycle = 6.4;
  Count dram_latency_cycles = 25;  // about 50 ns at 500 MHz
  double clock_hz = 500e6;

  void validate() const;
  Count pe_count() const { return p * q; }
  Count psum_words() const { return p * q * lreg_words_per_pe; }
  /// Effective on-chip memory: LRegs plus both GBufs. GRegs only hold copies.
  Count effective_words() const { return psum_words() + igbuf_words + wgbuf_words; }
  /// Words of GReg storage: each PE row group keeps one input segment per column of
  /// groups, and one copy of the WGBuf slice is broadcast per row group.
  Count greg_words() const;
};

/// Implementations 1 to 5 of the reference design. Throws Error for other ids.
HwConfig implementation_preset(int id);

/// Per-PE work split of one block.
struct IterationPlan {
  Count xs = 1;
  Count ys = 1;
  Count zs = 1;
  Count ty = 1;  // PE-row tiles along y per image
  Count tx = 1;  // PE-row tiles along x per image
  Count passes_per_iteration = 1;
  Count cycles_per_pass = 1;
  Count iterations = 0;  // over the whole layer
  Count xs_in = 1;       // d*(xs-1)+wk
  Count ys_in = 1;

  Count cycles_per_iteration() const { return passes_per_iteration * cycles_per_pass; }
};

struct LayerPlan {
  Tile tile;
  IterationPlan iter;
  Count p = 1;  // array shape the plan was made for
  Count q = 1;
  Count blocks = 0;
  Count compute_cycles = 0;
  /// Useful MACs over p*q*compute_cycles.
  double pe_utilization = 0.0;
};

/// Per-PE tile derived from a fixed block shape; used by plan_layer and by tests
/// that pin the schedule by hand.
IterationPlan make_iteration_plan(const ConvLayer& layer, Count batch, const Tile& tile,
                                  Count xs, Count ys, Count zs, Count ty, Count tx);

/// Chooses the block {b, z, y, x} and per-PE tile that minimise DRAM traffic under the
/// register, GReg segment and GBuf limits of hw. Ties go to higher PE utilisation,
/// then smaller footprint. Throws InfeasibleError if nothing fits.
LayerPlan plan_layer(const ConvLayer& layer, Count batch, const HwConfig& hw);

/// Builds a LayerPlan from an explicit block and per-PE split after checking it
/// against hw. Throws InfeasibleError on violation.
LayerPlan make_plan(const ConvLayer& layer, Count batch, const HwConfig& hw, const Tile& tile,
                    Count xs, Count ys, Count zs, Count ty, Count tx);

/// Block shape the Psum capacity allows when b*x*y is balanced against R*z:
/// z = sqrt(C/R) and u = b*x*y = R*z, before any integer rounding.
struct BalancedShape {
  double z = 0.0;
  double u = 0.0;
};
BalancedShape balanced_shape(const ConvLayer& layer, const HwConfig& hw);

struct TrafficCounters {
  Count dram_in_r = 0;
  Count dram_in_w = 0;
  Count dram_wt_r = 0;
  Count dram_wt_w = 0;
  Count dram_out_r = 0;
  Count dram_out_w = 0;
  Count gbuf_in_r = 0;
  Count gbuf_in_w = 0;
  Count gbuf_wt_r = 0;
  Count gbuf_wt_w = 0;
  Count greg_in_r = 0;
  Count greg_in_w = 0;
  Count greg_wt_r = 0;
  Count greg_wt_w = 0;
  Count lreg_r = 0;
  Count lreg_w = 0;
  /// MACs executed by the array, including idle-lane work on clamped edge blocks.
  Count mac_ops = 0;

  Count dram_total() const;
  Count gbuf_total() const;
  Count greg_total() const;
  Count lreg_total() const { return lreg_r + lreg_w; }

  TrafficCounters& operator+=(const TrafficCounters& o);
  TrafficCounters scaled(Count factor) const;
  friend bool operator==(const TrafficCounters&, const TrafficCounters&) = default;
};

/// DRAM fields of the plan (from proposed_volume).
TrafficCounters dram_traffic(const LayerPlan& plan, const ConvLayer& layer, Count batch);

/// GBuf fields. Weights pass through once; every input slice is written at its
/// nominal block window (the part past the layer edge zero-filled) and read once per
/// active PE row per iteration, halo included.
TrafficCounters gbuf_traffic(const LayerPlan& plan, const ConvLayer& layer, Count batch,
                             const AccessVolume& dram_volume);

/// GReg and LReg fields plus mac_ops.
TrafficCounters reg_traffic(const LayerPlan& plan, const ConvLayer& layer, Count batch);

/// All levels.
TrafficCounters analytic_counters(const LayerPlan& plan, const ConvLayer& layer, Count batch);

/// Time-weighted share of LReg entries holding a Psum of the current block.
double lreg_utilization(const LayerPlan& plan, const ConvLayer& layer, Count batch,
                        const HwConfig& hw);

}  // namespace convbound
