#pragma once

#include <array>
#include <optional>
#include <string>

#include "convbound/mapping.hpp"
#include "convbound/tensor.hpp"

namespace convbound {

enum class SimMode { CountersOnly, Functional };

struct SimResult {
  Count total_cycles = 0;
  Count compute_cycles = 0;
  Count stall_cycles = 0;
  TrafficCounters counters;
  double pe_utilization = 0.0;
  double lreg_utilization = 0.0;
  double gbuf_utilization = 0.0;
  double greg_utilization = 0.0;
  /// [batch][co][ho][wo], functional mode only.
  std::optional<Tensor> outputs;
};

/// Runs the block / iteration / pass schedule of plan on hw.
///
/// Each pass takes xs*ys*zs cycles. The input slice for the next iteration is requested
/// when the current iteration starts, the weights for the next pass when the current
/// pass starts, and a block's outputs when the block ends. Requests share one DRAM
/// channel in issue order: a request of n words waits for the channel, holds it for
/// n / bandwidth cycles and its data is usable latency cycles after that. A pass whose
/// data is not ready stalls; the final output drain also counts as stall.
SimResult simulate(const ConvLayer& layer, Count batch, const HwConfig& hw, const LayerPlan& plan,
                   SimMode mode, const ConvTensors* tensors = nullptr);

/// Plans the layer with plan_layer first.
SimResult simulate(const ConvLayer& layer, Count batch, const HwConfig& hw, SimMode mode,
                   const ConvTensors* tensors = nullptr);

struct VerifyResult {
  bool ok = false;
  Count mismatches = 0;
  /// Coordinate [b, z, y, x] of the first mismatch in row-major order.
  std::optional<std::array<Count, 4>> first;
  std::int64_t expected = 0;
  std::int64_t actual = 0;
  std::string message;
};

/// Element-exact comparison with the reference convolution.
VerifyResult verify_against_golden(const SimResult& result, const ConvLayer& layer, Count batch,
                                   const ConvTensors& tensors);

}  // namespace convbound
