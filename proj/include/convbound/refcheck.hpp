#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "convbound/bounds.hpp"
#include "convbound/dataflow.hpp"
#include "convbound/mapping.hpp"
#include "convbound/tensor.hpp"

// Reference implementations written straight from the loop nests. None of this calls
// the closed-form models, so agreement with them is evidence rather than tautology.
namespace convbound::refcheck {

/// Direct seven-loop convolution with 64-bit accumulation. Output is [batch][co][ho][wo].
Tensor golden_conv(const ConvLayer& layer, Count batch, const ConvTensors& tensors);

/// Same result with the reduction loops outermost.
Tensor golden_conv_permuted(const ConvLayer& layer, Count batch, const ConvTensors& tensors);

enum class Level { DRAM, GBuf, GReg, LReg };
enum class TensorKind { Input, Weight, Output };
enum class Direction { Read, Write };

struct TraceEvent {
  Level level = Level::DRAM;
  TensorKind tensor = TensorKind::Input;
  Direction direction = Direction::Read;
  /// Flat index into the tensor; -1 for filler words (zero padding past the layer
  /// edge, or work on idle lanes of a clamped block).
  Count index = 0;
  Count timestamp = 0;
  bool filler = false;
};

using TraceSink = std::function<void(const TraceEvent&)>;

/// Replays the DRAM-level schedule of any dataflow kind and emits one event per word.
void replay_dataflow(DataflowKind kind, const ConvLayer& layer, Count batch, const Tile& tile,
                     const TraceSink& sink);

/// Replays the mapped schedule of the proposed dataflow on a PE array at every level.
void replay_mapping(const ConvLayer& layer, Count batch, const LayerPlan& plan,
                    const TraceSink& sink);

/// Accumulates events into counts. Throws Error on a non-filler index outside the tensor.
class TraceCounter {
 public:
  TraceCounter(const ConvLayer& layer, Count batch, bool track_unique = false);

  void add(const TraceEvent& e);
  TraceSink sink();

  AccessVolume dram_volume() const;
  TrafficCounters counters() const;
  /// Distinct indices read from DRAM per tensor (only with track_unique).
  Count unique_dram_reads(TensorKind tensor) const;
  Count events() const { return events_; }

 private:
  Count sizes_[3];
  Count counts_[4][3][2] = {};
  Count mac_events_ = 0;
  Count events_ = 0;
  bool track_unique_;
  std::vector<bool> seen_[3];
  Count unique_[3] = {};
};

/// Counts a stored stream.
AccessVolume trace_count(const ConvLayer& layer, Count batch,
                         const std::vector<TraceEvent>& events);
TrafficCounters trace_count_all(const ConvLayer& layer, Count batch,
                                const std::vector<TraceEvent>& events);

/// Volume by summing per-block loads over the explicit block grid.
AccessVolume block_sum_volume(DataflowKind kind, const ConvLayer& layer, Count batch,
                              const Tile& tile);

/// Unpruned enumeration of every tile in [1, dim]^n with the same tie-break as the
/// main search. Throws Error when the lattice exceeds max_candidates.
std::optional<SearchResult> brute_force_tiling(DataflowKind kind, const ConvLayer& layer,
                                               Count batch, const MemoryBudget& budget,
                                               Count max_candidates = 10'000'000);

}  // namespace convbound::refcheck
