#include <algorithm>
#include <array>
#include <atomic>
#include <thread>
#include <vector>

#include "convbound/bounds.hpp"
#include "convbound/dataflow.hpp"

namespace convbound {

namespace {

// The volume of every kind depends only on the tile counts ceil(dim/t), and the
// footprint grows strictly with every tile field, so for each count the smallest
// tile achieving it dominates all others. Those are the values enumerated here.
std::vector<Count> canonical_sizes(Count dim) {
  std::vector<Count> out;
  for (Count n = dim; n >= 1; --n) {
    const Count t = ceil_div(dim, n);
    if (out.empty() || out.back() != t) out.push_back(t);
  }
  return out;
}

using Axes = std::array<std::vector<Count>, 5>;

Tile make_tile(const std::array<Count, 5>& v) { return Tile{v[0], v[1], v[2], v[3], v[4]}; }

struct Searcher {
  DataflowKind kind;
  const ConvLayer& layer;
  Count batch;
  Count capacity;
  const Axes& axes;

  std::optional<SearchResult> best;

  void consider(const Tile& t, Count fp) {
    SearchResult r{kind, t, dataflow_volume(kind, layer, batch, t), fp};
    if (!best || better(r, *best)) best = r;
  }

  // Fills position `depth` onward; positions past depth hold their smallest value.
  void walk(std::array<Count, 5>& v, std::size_t depth) {
    if (depth == v.size()) {
      consider(make_tile(v), footprint_words(kind, layer, make_tile(v)));
      return;
    }
    for (Count value : axes[depth]) {
      v[depth] = value;
      if (footprint_words(kind, layer, make_tile(v)) > capacity) break;
      walk(v, depth + 1);
    }
    v[depth] = axes[depth].front();
  }
};

}  // namespace

std::optional<SearchResult> tiling_search(DataflowKind kind, const ConvLayer& layer, Count batch,
                                          const MemoryBudget& budget,
                                          const SearchOptions& options) {
  layer.validate();
  if (batch < 1) throw Error("batch must be >= 1");
  const FreeDims f = free_dims(kind);
  const Tile pinned = normalize_tile(kind, layer, batch, Tile{});
  auto axis = [](bool free, Count dim, Count fixed) {
    return free ? canonical_sizes(dim) : std::vector<Count>{fixed};
  };
  const Axes axes = {axis(f.b, batch, pinned.b), axis(f.z, layer.co, pinned.z),
                     axis(f.y, layer.ho, pinned.y), axis(f.x, layer.wo, pinned.x),
                     axis(f.k, layer.ci, pinned.k)};

  std::array<Count, 5> smallest{};
  for (std::size_t i = 0; i < axes.size(); ++i) smallest[i] = axes[i].front();
  if (footprint_words(kind, layer, make_tile(smallest)) > budget.s_words) {
    return std::nullopt;
  }

  // Work items are (b, z) prefixes; each thread keeps a local best and the strict
  // order in better() makes the reduction independent of scheduling.
  std::vector<std::array<Count, 5>> prefixes;
  for (Count b : axes[0]) {
    for (Count z : axes[1]) {
      std::array<Count, 5> v = smallest;
      v[0] = b;
      v[1] = z;
      if (footprint_words(kind, layer, make_tile(v)) > budget.s_words) break;
      prefixes.push_back(v);
    }
  }

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(prefixes.size()));
  std::vector<Searcher> workers(threads, Searcher{kind, layer, batch, budget.s_words, axes, {}});
  std::atomic<std::size_t> next{0};
  auto run = [&](Searcher& s) {
    for (std::size_t i = next++; i < prefixes.size(); i = next++) {
      std::array<Count, 5> v = prefixes[i];
      s.walk(v, 2);
    }
  };
  if (threads == 1) {
    run(workers[0]);
  } else {
    std::vector<std::thread> pool;
    for (auto& w : workers) pool.emplace_back(run, std::ref(w));
    for (auto& t : pool) t.join();
  }

  std::optional<SearchResult> best;
  for (const auto& w : workers) {
    if (w.best && (!best || better(*w.best, *best))) best = w.best;
  }
  return best;
}

std::optional<SearchResult> find_minimum(const ConvLayer& layer, Count batch,
                                         const MemoryBudget& budget,
                                         std::span<const DataflowKind> kinds,
                                         const SearchOptions& options) {
  std::optional<SearchResult> best;
  for (DataflowKind kind : kinds) {
    auto r = tiling_search(kind, layer, batch, budget, options);
    if (r && (!best || better(*r, *best))) best = r;
  }
  return best;
}

}  // namespace convbound
