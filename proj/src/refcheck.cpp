#include "convbound/refcheck.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace convbound::refcheck {

Tensor golden_conv(const ConvLayer& l, Count batch, const ConvTensors& t) {
  check_shapes(l, batch, t);
  Tensor out(output_shape(l, batch));
  for (Count b = 0; b < batch; ++b)
    for (Count z = 0; z < l.co; ++z)
      for (Count y = 0; y < l.ho; ++y)
        for (Count x = 0; x < l.wo; ++x) {
          std::int64_t acc = 0;
          for (Count c = 0; c < l.ci; ++c)
            for (Count kh = 0; kh < l.hk; ++kh)
              for (Count kw = 0; kw < l.wk; ++kw)
                acc += t.input.at({b, c, y * l.d + kh, x * l.d + kw}) * t.weights.at({z, c, kh, kw});
          out.at({b, z, y, x}) = acc;
        }
  return out;
}

Tensor golden_conv_permuted(const ConvLayer& l, Count batch, const ConvTensors& t) {
  check_shapes(l, batch, t);
  Tensor out(output_shape(l, batch));
  for (Count kw = 0; kw < l.wk; ++kw)
    for (Count c = 0; c < l.ci; ++c)
      for (Count kh = 0; kh < l.hk; ++kh)
        for (Count x = 0; x < l.wo; ++x)
          for (Count z = 0; z < l.co; ++z) {
            const std::int64_t w = t.weights.at({z, c, kh, kw});
            for (Count b = 0; b < batch; ++b)
              for (Count y = 0; y < l.ho; ++y)
                out.at({b, z, y, x}) += t.input.at({b, c, y * l.d + kh, x * l.d + kw}) * w;
          }
  return out;
}

namespace {

struct Span {
  Count start;
  Count len;
};

std::vector<Span> tiles(Count n, Count t) {
  std::vector<Span> out;
  for (Count s = 0; s < n; s += t) out.push_back({s, std::min(t, n - s)});
  return out;
}

// Smallest and largest input coordinate touched by outputs [start, start+len).
Span receptive(Count start, Count len, Count kernel, Count stride) {
  Count lo = std::numeric_limits<Count>::max();
  Count hi = -1;
  for (Count o = start; o < start + len; ++o)
    for (Count k = 0; k < kernel; ++k) {
      lo = std::min(lo, o * stride + k);
      hi = std::max(hi, o * stride + k);
    }
  return {lo, hi - lo + 1};
}

class Emitter {
 public:
  Emitter(const ConvLayer& l, Count batch, const TraceSink& sink) : l_(l), batch_(batch), sink_(sink) {}

  Count in_idx(Count b, Count c, Count r, Count col) const {
    return ((b * l_.ci + c) * l_.hi() + r) * l_.wi() + col;
  }
  Count wt_idx(Count z, Count c, Count kh, Count kw) const {
    return ((z * l_.ci + c) * l_.hk + kh) * l_.wk + kw;
  }
  Count out_idx(Count b, Count z, Count y, Count x) const {
    return ((b * l_.co + z) * l_.ho + y) * l_.wo + x;
  }

  void emit(Level lv, TensorKind t, Direction d, Count idx, bool filler = false) {
    sink_(TraceEvent{lv, t, d, filler ? -1 : idx, time_++, filler});
  }

  void inputs(Level lv, Direction d, Span b, Span c, Span y, Span x) {
    const Span rows = receptive(y.start, y.len, l_.hk, l_.d);
    const Span cols = receptive(x.start, x.len, l_.wk, l_.d);
    for (Count bi = b.start; bi < b.start + b.len; ++bi)
      for (Count ci = c.start; ci < c.start + c.len; ++ci)
        for (Count r = rows.start; r < rows.start + rows.len; ++r)
          for (Count col = cols.start; col < cols.start + cols.len; ++col)
            emit(lv, TensorKind::Input, d, in_idx(bi, ci, r, col));
  }

  void weights(Level lv, Direction d, Span z, Span c) {
    for (Count zi = z.start; zi < z.start + z.len; ++zi)
      for (Count ci = c.start; ci < c.start + c.len; ++ci)
        for (Count kh = 0; kh < l_.hk; ++kh)
          for (Count kw = 0; kw < l_.wk; ++kw) emit(lv, TensorKind::Weight, d, wt_idx(zi, ci, kh, kw));
  }

  void outputs(Level lv, Direction d, Span b, Span z, Span y, Span x) {
    for (Count bi = b.start; bi < b.start + b.len; ++bi)
      for (Count zi = z.start; zi < z.start + z.len; ++zi)
        for (Count yi = y.start; yi < y.start + y.len; ++yi)
          for (Count xi = x.start; xi < x.start + x.len; ++xi)
            emit(lv, TensorKind::Output, d, out_idx(bi, zi, yi, xi));
  }

  const ConvLayer& l_;
  Count batch_;
  const TraceSink& sink_;
  Count time_ = 0;
};

}  // namespace

void replay_dataflow(DataflowKind kind, const ConvLayer& l, Count batch, const Tile& t,
                     const TraceSink& sink) {
  Emitter e(l, batch, sink);
  const auto bs = tiles(batch, t.b);
  const auto zs = tiles(l.co, t.z);
  const auto ys = tiles(l.ho, t.y);
  const auto xs = tiles(l.wo, t.x);
  const auto ks = tiles(l.ci, t.k);
  const Span all_c{0, l.ci};
  constexpr Level D = Level::DRAM;
  constexpr Direction R = Direction::Read;
  constexpr Direction W = Direction::Write;

  switch (kind) {
    case DataflowKind::Proposed:
    case DataflowKind::OutR_A:
      // Psums of one output block stay on chip while input channels stream through
      for (auto b : bs)
        for (auto z : zs)
          for (auto y : ys)
            for (auto x : xs) {
              for (auto k : ks) {
                e.inputs(D, R, b, k, y, x);
                e.weights(D, R, z, k);
              }
              e.outputs(D, W, b, z, y, x);
            }
      break;
    case DataflowKind::OutR_B:
    case DataflowKind::WtR_B:
      for (auto z : zs) {
        e.weights(D, R, z, all_c);
        for (auto b : bs)
          for (auto y : ys)
            for (auto x : xs) {
              for (auto k : ks) e.inputs(D, R, b, k, y, x);
              e.outputs(D, W, b, z, y, x);
            }
      }
      break;
    case DataflowKind::InR_A:
    case DataflowKind::InR_B:
      for (auto b : bs)
        for (auto y : ys)
          for (auto x : xs)
            for (std::size_t ki = 0; ki < ks.size(); ++ki) {
              e.inputs(D, R, b, ks[ki], y, x);
              for (auto z : zs) {
                e.weights(D, R, z, ks[ki]);
                if (ki > 0) e.outputs(D, R, b, z, y, x);
                e.outputs(D, W, b, z, y, x);
              }
            }
      break;
    case DataflowKind::WtR_A:
      for (auto z : zs)
        for (std::size_t ki = 0; ki < ks.size(); ++ki) {
          e.weights(D, R, z, ks[ki]);
          for (auto b : bs)
            for (auto y : ys)
              for (auto x : xs) {
                e.inputs(D, R, b, ks[ki], y, x);
                if (ki > 0) e.outputs(D, R, b, z, y, x);
                e.outputs(D, W, b, z, y, x);
              }
        }
      break;
  }
}

void replay_mapping(const ConvLayer& l, Count batch, const LayerPlan& plan, const TraceSink& sink) {
  Emitter e(l, batch, sink);
  const IterationPlan& it = plan.iter;
  const Tile& t = plan.tile;
  constexpr Direction R = Direction::Read;
  constexpr Direction W = Direction::Write;

  auto input_word = [&](Level lv, Direction d, Count b, Count c, Count r, Count col) {
    const bool pad = r >= l.hi() || col >= l.wi();
    e.emit(lv, TensorKind::Input, d, pad ? -1 : e.in_idx(b, c, r, col), pad);
  };

  for (auto b : tiles(batch, t.b))
    for (auto z : tiles(l.co, t.z))
      for (auto y : tiles(l.ho, t.y))
        for (auto x : tiles(l.wo, t.x)) {
          const auto row_tiles = tiles(y.len, it.ys);
          const auto col_tiles = tiles(x.len, it.xs);
          const Count ry = static_cast<Count>(row_tiles.size());
          const Count rx = static_cast<Count>(col_tiles.size());
          const Count cols = std::min(plan.q, z.len);
          for (Count c = 0; c < l.ci; ++c) {
            e.inputs(Level::DRAM, R, b, {c, 1}, y, x);
            // IGBuf receives the full window of the active PE rows, zero-filled past the edge
            const Count r0 = y.start * l.d;
            const Count c0 = x.start * l.d;
            const Count nrows = (ry * it.ys - 1) * l.d + l.hk;
            const Count ncols = (rx * it.xs - 1) * l.d + l.wk;
            for (Count bi = b.start; bi < b.start + b.len; ++bi)
              for (Count r = r0; r < r0 + nrows; ++r)
                for (Count col = c0; col < c0 + ncols; ++col) input_word(Level::GBuf, W, bi, c, r, col);
            // each active PE row copies its window into a GReg segment
            for (Count bi = b.start; bi < b.start + b.len; ++bi)
              for (auto rt : row_tiles)
                for (auto ct : col_tiles) {
                  const Count wr = (y.start + rt.start) * l.d;
                  const Count wc = (x.start + ct.start) * l.d;
                  for (Count r = wr; r < wr + it.ys_in; ++r)
                    for (Count col = wc; col < wc + it.xs_in; ++col) {
                      input_word(Level::GBuf, R, bi, c, r, col);
                      input_word(Level::GReg, W, bi, c, r, col);
                    }
                }
            for (Count kh = 0; kh < l.hk; ++kh)
              for (Count kw = 0; kw < l.wk; ++kw) {
                for (Count j = z.start; j < z.start + z.len; ++j) {
                  const Count w = e.wt_idx(j, c, kh, kw);
                  e.emit(Level::DRAM, TensorKind::Weight, R, w);
                  e.emit(Level::GBuf, TensorKind::Weight, W, w);
                  e.emit(Level::GBuf, TensorKind::Weight, R, w);
                  e.emit(Level::GReg, TensorKind::Weight, W, w);
                }
                for (Count bi = b.start; bi < b.start + b.len; ++bi)
                  for (auto rt : row_tiles)
                    for (auto ct : col_tiles)
                      for (Count col = 0; col < cols; ++col)
                        for (Count zi = 0; zi < it.zs; ++zi)
                          for (Count ys = 0; ys < it.ys; ++ys)
                            for (Count xs = 0; xs < it.xs; ++xs) {
                              const Count ch = z.start + col + zi * plan.q;
                              const Count oy = y.start + rt.start + ys;
                              const Count ox = x.start + ct.start + xs;
                              const bool live = ch < z.start + z.len && oy < y.start + y.len &&
                                                ox < x.start + x.len;
                              input_word(Level::GReg, R, bi, c, oy * l.d + kh, ox * l.d + kw);
                              const bool wlive = ch < z.start + z.len;
                              e.emit(Level::GReg, TensorKind::Weight, R,
                                     wlive ? e.wt_idx(ch, c, kh, kw) : -1, !wlive);
                              const Count o = live ? e.out_idx(bi, ch, oy, ox) : -1;
                              e.emit(Level::LReg, TensorKind::Output, R, o, !live);
                              e.emit(Level::LReg, TensorKind::Output, W, o, !live);
                            }
              }
          }
          e.outputs(Level::DRAM, W, b, z, y, x);
        }
}

TraceCounter::TraceCounter(const ConvLayer& l, Count batch, bool track_unique)
    : sizes_{l.input_words(batch), l.weight_words(), l.output_words(batch)},
      track_unique_(track_unique) {
  if (track_unique_) {
    for (int i = 0; i < 3; ++i) seen_[i].assign(static_cast<std::size_t>(sizes_[i]), false);
  }
}

void TraceCounter::add(const TraceEvent& e) {
  const int t = static_cast<int>(e.tensor);
  if (!e.filler && (e.index < 0 || e.index >= sizes_[t])) {
    throw Error("trace event index out of tensor bounds");
  }
  ++counts_[static_cast<int>(e.level)][t][static_cast<int>(e.direction)];
  ++events_;
  if (track_unique_ && e.level == Level::DRAM && e.direction == Direction::Read && !e.filler) {
    auto ref = seen_[t][static_cast<std::size_t>(e.index)];
    if (!ref) {
      ref = true;
      ++unique_[t];
    }
  }
}

TraceSink TraceCounter::sink() {
  return [this](const TraceEvent& e) { add(e); };
}

AccessVolume TraceCounter::dram_volume() const {
  const auto& d = counts_[static_cast<int>(Level::DRAM)];
  AccessVolume v;
  v.input_reads = d[0][0];
  v.weight_reads = d[1][0];
  v.output_reads = d[2][0];
  v.output_writes = d[2][1];
  return v;
}

TrafficCounters TraceCounter::counters() const {
  auto at = [&](Level lv, TensorKind t, Direction d) {
    return counts_[static_cast<int>(lv)][static_cast<int>(t)][static_cast<int>(d)];
  };
  using L = Level;
  using T = TensorKind;
  constexpr auto R = Direction::Read;
  constexpr auto W = Direction::Write;
  TrafficCounters c;
  c.dram_in_r = at(L::DRAM, T::Input, R);
  c.dram_in_w = at(L::DRAM, T::Input, W);
  c.dram_wt_r = at(L::DRAM, T::Weight, R);
  c.dram_wt_w = at(L::DRAM, T::Weight, W);
  c.dram_out_r = at(L::DRAM, T::Output, R);
  c.dram_out_w = at(L::DRAM, T::Output, W);
  c.gbuf_in_r = at(L::GBuf, T::Input, R);
  c.gbuf_in_w = at(L::GBuf, T::Input, W);
  c.gbuf_wt_r = at(L::GBuf, T::Weight, R);
  c.gbuf_wt_w = at(L::GBuf, T::Weight, W);
  c.greg_in_r = at(L::GReg, T::Input, R);
  c.greg_in_w = at(L::GReg, T::Input, W);
  c.greg_wt_r = at(L::GReg, T::Weight, R);
  c.greg_wt_w = at(L::GReg, T::Weight, W);
  c.lreg_r = at(L::LReg, T::Output, R);
  c.lreg_w = at(L::LReg, T::Output, W);
  c.mac_ops = c.lreg_w;
  return c;
}

Count TraceCounter::unique_dram_reads(TensorKind tensor) const {
  if (!track_unique_) throw Error("unique counts were not tracked");
  return unique_[static_cast<int>(tensor)];
}

AccessVolume trace_count(const ConvLayer& layer, Count batch, const std::vector<TraceEvent>& events) {
  TraceCounter c(layer, batch);
  for (const auto& e : events) c.add(e);
  return c.dram_volume();
}

TrafficCounters trace_count_all(const ConvLayer& layer, Count batch,
                                const std::vector<TraceEvent>& events) {
  TraceCounter c(layer, batch);
  for (const auto& e : events) c.add(e);
  return c.counters();
}

AccessVolume block_sum_volume(DataflowKind kind, const ConvLayer& l, Count batch, const Tile& t) {
  // Per-dimension sums over the block grid; every per-block load below is a product
  // of one factor per dimension, so the grid sum factorises.
  Count rows = 0;
  for (auto s : tiles(l.ho, t.y)) rows += receptive(s.start, s.len, l.hk, l.d).len;
  Count cols = 0;
  for (auto s : tiles(l.wo, t.x)) cols += receptive(s.start, s.len, l.wk, l.d).len;
  const Count nb = static_cast<Count>(tiles(batch, t.b).size());
  const Count nz = static_cast<Count>(tiles(l.co, t.z).size());
  const Count ny = static_cast<Count>(tiles(l.ho, t.y).size());
  const Count nx = static_cast<Count>(tiles(l.wo, t.x).size());
  const Count nk = static_cast<Count>(tiles(l.ci, t.k).size());
  const Count window = l.hk * l.wk;
  const Count outs = batch * l.ho * l.wo * l.co;

  // one full sweep of every input channel over all image/row/column blocks
  const Count sweep = batch * l.ci * rows * cols;
  // all weights once per image/row/column block
  const Count per_spatial = nb * ny * nx * (l.co * l.ci * window);

  AccessVolume v;
  v.output_writes = outs;
  switch (kind) {
    case DataflowKind::Proposed:
    case DataflowKind::OutR_A:
      v.input_reads = nz * sweep;
      v.weight_reads = per_spatial;
      break;
    case DataflowKind::OutR_B:
    case DataflowKind::WtR_B:
      v.input_reads = nz * sweep;
      v.weight_reads = l.co * l.ci * window;
      break;
    case DataflowKind::InR_A:
    case DataflowKind::InR_B:
      v.input_reads = sweep;
      v.weight_reads = per_spatial;
      v.output_reads = (nk - 1) * outs;
      v.output_writes = nk * outs;
      break;
    case DataflowKind::WtR_A:
      v.input_reads = nz * sweep;
      v.weight_reads = l.co * l.ci * window;
      v.output_reads = (nk - 1) * outs;
      v.output_writes = nk * outs;
      break;
  }
  return v;
}

namespace {

Count reference_footprint(DataflowKind kind, const ConvLayer& l, const Tile& t) {
  const Count in_rows = receptive(0, t.y, l.hk, l.d).len;
  const Count in_cols = receptive(0, t.x, l.wk, l.d).len;
  const Count psums = t.b * t.z * t.y * t.x;
  const Count slice = t.b * t.k * in_rows * in_cols;
  switch (kind) {
    case DataflowKind::Proposed:
    case DataflowKind::InR_A:
    case DataflowKind::WtR_A:
    case DataflowKind::OutR_A:
      return psums + slice + t.z * t.k * l.hk * l.wk;
    default:
      return psums + slice + t.z * l.ci * l.hk * l.wk;
  }
}

}  // namespace

std::optional<SearchResult> brute_force_tiling(DataflowKind kind, const ConvLayer& l, Count batch,
                                               const MemoryBudget& budget, Count max_candidates) {
  const bool proposed = kind == DataflowKind::Proposed;
  const bool full_depth = kind == DataflowKind::InR_B || kind == DataflowKind::WtR_B;
  const Count b_hi = proposed ? batch : 1;
  const Count k_lo = full_depth ? l.ci : 1;
  const Count k_hi = proposed ? 1 : l.ci;
  const long double lattice = static_cast<long double>(b_hi) * l.co * l.ho * l.wo * (k_hi - k_lo + 1);
  if (lattice > static_cast<long double>(max_candidates)) {
    throw Error("brute_force_tiling: instance too large for exhaustive enumeration");
  }

  std::optional<SearchResult> best;
  for (Count b = 1; b <= b_hi; ++b)
    for (Count z = 1; z <= l.co; ++z)
      for (Count y = 1; y <= l.ho; ++y)
        for (Count x = 1; x <= l.wo; ++x)
          for (Count k = k_lo; k <= k_hi; ++k) {
            const Tile t{b, z, y, x, k};
            const Count fp = reference_footprint(kind, l, t);
            if (fp > budget.s_words) continue;
            const SearchResult r{kind, t, block_sum_volume(kind, l, batch, t), fp};
            if (!best) {
              best = r;
              continue;
            }
            const auto key = [](const SearchResult& s) {
              return std::tuple(s.volume.total(), s.footprint, s.tile.b, s.tile.z, s.tile.y,
                                s.tile.x, s.tile.k);
            };
            if (key(r) < key(*best)) best = r;
          }
  return best;
}

}  // namespace convbound::refcheck
