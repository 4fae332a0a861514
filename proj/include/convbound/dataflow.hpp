#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "convbound/common.hpp"
#include "convbound/workload.hpp"

namespace convbound {

struct MemoryBudget;

/// Which tensor block stays on chip and in what loop order the others stream.
///
///  Proposed  output block b x z x y x x resident, one input channel per iteration.
///  OutR_A    output block z x y x x resident (single image), k-channel chunks stream.
///  OutR_B    as OutR_A, plus the full-depth weights of the z channels stay resident.
///  InR_A     input block k x y' x x' resident; weights and Psums stream per z chunk.
///  InR_B     full-depth input block ci x y' x x' resident; no Psum shuttling.
///  WtR_A     weight block wk*hk*k x z resident; inputs and Psums stream per tile.
///  WtR_B     full-depth weights wk*hk*ci x z resident; no Psum shuttling.
enum class DataflowKind { Proposed, InR_A, InR_B, WtR_A, WtR_B, OutR_A, OutR_B };

inline constexpr std::array<DataflowKind, 7> kAllKinds = {
    DataflowKind::Proposed, DataflowKind::InR_A,  DataflowKind::InR_B, DataflowKind::WtR_A,
    DataflowKind::WtR_B,    DataflowKind::OutR_A, DataflowKind::OutR_B};

std::string_view to_string(DataflowKind kind);
/// Accepts "Proposed", "InR-A", "inr_a", ... (case and separator insensitive).
std::optional<DataflowKind> parse_kind(std::string_view text);

/// Tile sizes. b: images, z: output channels, y/x: output rows/cols, k: input channels.
/// Kinds that do not use a field pin it (see normalize_tile).
struct Tile {
  Count b = 1;
  Count z = 1;
  Count y = 1;
  Count x = 1;
  Count k = 1;

  friend auto operator<=>(const Tile&, const Tile&) = default;
};

/// Input extent covered by an output extent of n along a dimension.
constexpr Count input_extent(Count n, Count kernel, Count stride) {
  return stride * (n - 1) + kernel;
}

/// DRAM-boundary word counts for one layer.
struct AccessVolume {
  Count input_reads = 0;
  Count weight_reads = 0;
  Count output_reads = 0;
  Count output_writes = 0;

  Count reads() const { return input_reads + weight_reads + output_reads; }
  Count total() const { return reads() + output_writes; }

  AccessVolume& operator+=(const AccessVolume& o);
  friend bool operator==(const AccessVolume&, const AccessVolume&) = default;
};

/// Which tile fields a kind searches over, in (b, z, y, x, k) order.
struct FreeDims {
  bool b = false;
  bool z = false;
  bool y = false;
  bool x = false;
  bool k = false;
};
FreeDims free_dims(DataflowKind kind);

/// Pins unused fields (b = 1 for baselines, k = 1 for Proposed, k = ci for the -B input
/// and weight variants) and clamps the rest to the tensor extents.
Tile normalize_tile(DataflowKind kind, const ConvLayer& layer, Count batch, Tile tile);

/// True if every field is in [1, extent] and pinned fields hold their pinned value.
bool tile_valid(DataflowKind kind, const ConvLayer& layer, Count batch, const Tile& tile);

/// On-chip words needed: resident block plus one streaming slice of each other tensor.
Count footprint_words(DataflowKind kind, const ConvLayer& layer, const Tile& tile);

/// Exact DRAM traffic of the proposed dataflow (edge blocks clamped). k has no effect.
AccessVolume proposed_volume(const ConvLayer& layer, Count batch, const Tile& tile);

/// Exact DRAM traffic of any kind, Proposed included.
AccessVolume dataflow_volume(DataflowKind kind, const ConvLayer& layer, Count batch,
                             const Tile& tile);

/// Baselines only; throws Error for DataflowKind::Proposed.
AccessVolume baseline_volume(DataflowKind kind, const ConvLayer& layer, Count batch,
                             const Tile& tile);

struct SearchResult {
  DataflowKind kind = DataflowKind::Proposed;
  Tile tile;
  AccessVolume volume;
  Count footprint = 0;
};

/// Strict total order used by every search: total words, then footprint, then tile
/// (b, z, y, x, k) lexicographically, then kind.
bool better(const SearchResult& a, const SearchResult& b);

struct SearchOptions {
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Exhaustive search for the tile minimising total DRAM words under the budget.
/// Returns std::nullopt when no tile fits.
std::optional<SearchResult> tiling_search(DataflowKind kind, const ConvLayer& layer, Count batch,
                                          const MemoryBudget& budget,
                                          const SearchOptions& options = {});

/// Best (kind, tile) over the given kinds.
std::optional<SearchResult> find_minimum(const ConvLayer& layer, Count batch,
                                         const MemoryBudget& budget,
                                         std::span<const DataflowKind> kinds = kAllKinds,
                                         const SearchOptions& options = {});

}  // namespace convbound
