#include "convbound/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "convbound/refcheck.hpp"

namespace convbound {

namespace {

struct Block {
  Count b0, bb, z0, zz, y0, yy, x0, xx;
  Count ry, rx;  // PE-row tiles actually used along y and x
  Count rows;    // active PE rows
  Count cols;    // active PE columns
  Count dram_slice;   // input words fetched per iteration
  Count gbuf_slice;   // input words written to the IGBuf per iteration
};

// Single DRAM channel serving requests in issue order.
class DramChannel {
 public:
  DramChannel(double words_per_cycle, double latency) : bw_(words_per_cycle), latency_(latency) {}

  // Returns the time the requested data is usable (or the write has completed).
  double request(double issue, Count words) {
    const double start = std::max(issue, free_);
    const double busy = std::isinf(bw_) ? 0.0 : static_cast<double>(words) / bw_;
    free_ = start + busy;
    return free_ + latency_;
  }

 private:
  double bw_;
  double latency_;
  double free_ = 0.0;
};

std::vector<Block> block_list(const ConvLayer& l, Count batch, const LayerPlan& plan, Count q) {
  const Tile& t = plan.tile;
  const IterationPlan& it = plan.iter;
  std::vector<Block> out;
  for (Count b0 = 0; b0 < batch; b0 += t.b)
    for (Count z0 = 0; z0 < l.co; z0 += t.z)
      for (Count y0 = 0; y0 < l.ho; y0 += t.y)
        for (Count x0 = 0; x0 < l.wo; x0 += t.x) {
          Block k{};
          k.b0 = b0;
          k.bb = std::min(t.b, batch - b0);
          k.z0 = z0;
          k.zz = std::min(t.z, l.co - z0);
          k.y0 = y0;
          k.yy = std::min(t.y, l.ho - y0);
          k.x0 = x0;
          k.xx = std::min(t.x, l.wo - x0);
          k.ry = ceil_div(k.yy, it.ys);
          k.rx = ceil_div(k.xx, it.xs);
          k.rows = k.bb * k.ry * k.rx;
          k.cols = std::min(q, k.zz);
          k.dram_slice = k.bb * input_extent(k.yy, l.hk, l.d) * input_extent(k.xx, l.wk, l.d);
          k.gbuf_slice = k.bb * input_extent(k.ry * it.ys, l.hk, l.d) *
                         input_extent(k.rx * it.xs, l.wk, l.d);
          out.push_back(k);
        }
  return out;
}

// Functional state of the array for one block.
class ArrayState {
 public:
  ArrayState(const ConvLayer& l, const LayerPlan& plan, const ConvTensors& t, Tensor& out)
      : l_(l), it_(plan.iter), q_(plan.q), t_(t), out_(out) {}

  void begin_block(const Block& k) {
    k_ = k;
    psum_.assign(static_cast<std::size_t>(k.rows * k.cols * it_.cycles_per_pass), 0);
  }

  // Fills the IGBuf with channel c of the block window, then every active row's GReg segment.
  void load_inputs(Count c) {
    const Count nrows = input_extent(k_.ry * it_.ys, l_.hk, l_.d);
    const Count ncols = input_extent(k_.rx * it_.xs, l_.wk, l_.d);
    igbuf_.assign(static_cast<std::size_t>(k_.bb * nrows * ncols), 0);
    for (Count bi = 0; bi < k_.bb; ++bi)
      for (Count r = 0; r < nrows; ++r)
        for (Count col = 0; col < ncols; ++col) {
          const Count gr = k_.y0 * l_.d + r;
          const Count gc = k_.x0 * l_.d + col;
          if (gr < l_.hi() && gc < l_.wi()) {
            igbuf_[(bi * nrows + r) * ncols + col] = t_.input.at({k_.b0 + bi, c, gr, gc});
          }
        }
    const Count seg = it_.xs_in * it_.ys_in;
    greg_in_.assign(static_cast<std::size_t>(k_.rows * seg), 0);
    for (Count row = 0; row < k_.rows; ++row) {
      const Count bi = row / (k_.ry * k_.rx);
      const Count ty = row / k_.rx % k_.ry;
      const Count tx = row % k_.rx;
      for (Count r = 0; r < it_.ys_in; ++r)
        for (Count col = 0; col < it_.xs_in; ++col) {
          const Count br = ty * it_.ys * l_.d + r;
          const Count bc = tx * it_.xs * l_.d + col;
          greg_in_[row * seg + r * it_.xs_in + col] = igbuf_[(bi * nrows + br) * ncols + bc];
        }
    }
  }

  void load_weights(Count c, Count kh, Count kw) {
    wgbuf_.assign(static_cast<std::size_t>(k_.zz), 0);
    for (Count j = 0; j < k_.zz; ++j) wgbuf_[j] = t_.weights.at({k_.z0 + j, c, kh, kw});
  }

  void run_pass(Count kh, Count kw) {
    const Count seg = it_.xs_in * it_.ys_in;
    for (Count row = 0; row < k_.rows; ++row)
      for (Count col = 0; col < k_.cols; ++col)
        for (Count zi = 0; zi < it_.zs; ++zi) {
          // channels of one PE column are q apart
          const Count ch = col + zi * q_;
          const std::int64_t w = ch < k_.zz ? wgbuf_[ch] : 0;
          for (Count ys = 0; ys < it_.ys; ++ys)
            for (Count xs = 0; xs < it_.xs; ++xs) {
              const std::int64_t in =
                  greg_in_[row * seg + (ys * l_.d + kh) * it_.xs_in + xs * l_.d + kw];
              psum_[(((row * k_.cols + col) * it_.zs + zi) * it_.ys + ys) * it_.xs + xs] += in * w;
            }
        }
  }

  void write_back() {
    for (Count row = 0; row < k_.rows; ++row) {
      const Count bi = row / (k_.ry * k_.rx);
      const Count ty = row / k_.rx % k_.ry;
      const Count tx = row % k_.rx;
      for (Count col = 0; col < k_.cols; ++col)
        for (Count zi = 0; zi < it_.zs; ++zi)
          for (Count ys = 0; ys < it_.ys; ++ys)
            for (Count xs = 0; xs < it_.xs; ++xs) {
              const Count ch = col + zi * q_;
              const Count y = ty * it_.ys + ys;
              const Count x = tx * it_.xs + xs;
              if (ch >= k_.zz || y >= k_.yy || x >= k_.xx) continue;
              out_.at({k_.b0 + bi, k_.z0 + ch, k_.y0 + y, k_.x0 + x}) =
                  psum_[(((row * k_.cols + col) * it_.zs + zi) * it_.ys + ys) * it_.xs + xs];
            }
    }
  }

 private:
  const ConvLayer& l_;
  const IterationPlan& it_;
  Count q_;
  const ConvTensors& t_;
  Tensor& out_;
  Block k_{};
  std::vector<std::int64_t> igbuf_, greg_in_, wgbuf_, psum_;
};

}  // namespace

SimResult simulate(const ConvLayer& l, Count batch, const HwConfig& hw, const LayerPlan& plan,
                   SimMode mode, const ConvTensors* tensors) {
  l.validate();
  if (plan.p != hw.p || plan.q != hw.q) throw Error("plan was made for a different PE array");
  // re-check the plan against this hardware
  make_plan(l, batch, hw, plan.tile, plan.iter.xs, plan.iter.ys, plan.iter.zs, plan.iter.ty,
            plan.iter.tx);

  SimResult res;
  std::optional<ArrayState> array;
  if (mode == SimMode::Functional) {
    if (!tensors) throw Error("functional simulation needs input and weight tensors");
    check_shapes(l, batch, *tensors);
    res.outputs = Tensor(output_shape(l, batch));
    array.emplace(l, plan, *tensors, *res.outputs);
  }

  const IterationPlan& it = plan.iter;
  const std::vector<Block> blocks = block_list(l, batch, plan, hw.q);
  const Count passes = l.hk * l.wk;
  const Count cpp = it.cycles_per_pass;
  const Count greg_cols = hw.q / hw.qg;
  const Count greg_rows = hw.p / hw.pg;

  DramChannel dram(hw.dram_words_per_cycle, static_cast<double>(hw.dram_latency_cycles));
  TrafficCounters& c = res.counters;
  double now = 0.0;
  double stall = 0.0;
  double last_write = 0.0;
  long double lreg_held = 0, gbuf_held = 0, greg_held = 0;

  double input_ready = dram.request(0.0, blocks.front().dram_slice);
  double weight_ready = dram.request(0.0, blocks.front().zz);

  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const Block& k = blocks[bi];
    if (array) array->begin_block(k);
    lreg_held += static_cast<long double>(k.rows) * k.cols * cpp;
    for (Count ch = 0; ch < l.ci; ++ch) {
      const bool last_iter = ch + 1 == l.ci;
      const Block* next_iter_block = last_iter ? (bi + 1 < blocks.size() ? &blocks[bi + 1] : nullptr) : &k;

      c.dram_in_r += k.dram_slice;
      c.gbuf_in_w += k.gbuf_slice;
      c.gbuf_in_r += k.rows * it.xs_in * it.ys_in;
      c.greg_in_w += k.rows * it.xs_in * it.ys_in;
      if (array) array->load_inputs(ch);

      for (Count pass = 0; pass < passes; ++pass) {
        double start = std::max(now, weight_ready);
        if (pass == 0) start = std::max(start, input_ready);
        stall += start - now;
        if (pass == 0 && next_iter_block) {
          input_ready = dram.request(start, next_iter_block->dram_slice);
        }
        const Block* next_pass_block = pass + 1 < passes ? &k : next_iter_block;
        if (next_pass_block) weight_ready = dram.request(start, next_pass_block->zz);
        now = start + static_cast<double>(cpp);
        res.compute_cycles += cpp;

        c.dram_wt_r += k.zz;
        c.gbuf_wt_w += k.zz;
        c.gbuf_wt_r += k.zz;
        c.greg_wt_w += k.zz;
        const Count macs = k.rows * k.cols * cpp;
        c.mac_ops += macs;
        c.greg_in_r += macs;
        c.greg_wt_r += macs;
        c.lreg_r += macs;
        c.lreg_w += macs;
        gbuf_held += static_cast<long double>(k.gbuf_slice + k.zz) * cpp;
        greg_held += static_cast<long double>(k.rows * greg_cols * it.xs_in * it.ys_in +
                                              greg_rows * k.zz) * cpp;
        if (array) {
          array->load_weights(ch, pass / l.wk, pass % l.wk);
          array->run_pass(pass / l.wk, pass % l.wk);
        }
      }
    }
    const Count outs = k.bb * k.yy * k.xx * k.zz;
    c.dram_out_w += outs;
    last_write = std::max(last_write, dram.request(now, outs));
    if (array) array->write_back();
  }
  stall += std::max(0.0, last_write - now);

  res.stall_cycles = static_cast<Count>(std::ceil(stall - 1e-9));
  res.total_cycles = res.compute_cycles + res.stall_cycles;
  const long double cycles = static_cast<long double>(res.compute_cycles);
  res.pe_utilization = static_cast<double>(mac_count(l, batch) / (cycles * hw.pe_count()));
  res.lreg_utilization =
      static_cast<double>(lreg_held / (static_cast<long double>(blocks.size()) * hw.psum_words()));
  res.gbuf_utilization =
      static_cast<double>(gbuf_held / (cycles * (hw.igbuf_words + hw.wgbuf_words)));
  res.greg_utilization = static_cast<double>(greg_held / (cycles * hw.greg_words()));
  return res;
}

SimResult simulate(const ConvLayer& layer, Count batch, const HwConfig& hw, SimMode mode,
                   const ConvTensors* tensors) {
  return simulate(layer, batch, hw, plan_layer(layer, batch, hw), mode, tensors);
}

VerifyResult verify_against_golden(const SimResult& result, const ConvLayer& layer, Count batch,
                                   const ConvTensors& tensors) {
  if (!result.outputs) throw Error("verification needs a functional simulation result");
  const Tensor expected = refcheck::golden_conv(layer, batch, tensors);
  const Tensor& actual = *result.outputs;
  if (actual.dims != expected.dims) throw Error("output tensor shape mismatch");

  VerifyResult v;
  for (Count i = 0; i < expected.size(); ++i) {
    if (expected.data[i] == actual.data[i]) continue;
    if (v.mismatches++ == 0) {
      Count rem = i;
      std::array<Count, 4> coord{};
      for (int d = 3; d >= 0; --d) {
        coord[d] = rem % expected.dims[d];
        rem /= expected.dims[d];
      }
      v.first = coord;
      v.expected = expected.data[i];
      v.actual = actual.data[i];
    }
  }
  v.ok = v.mismatches == 0;
  std::ostringstream msg;
  if (v.ok) {
    msg << "verified " << expected.size() << " outputs";
  } else {
    const auto& f = *v.first;
    msg << v.mismatches << " mismatches; first at [" << f[0] << ", " << f[1] << ", " << f[2]
        << ", " << f[3] << "]: expected " << v.expected << ", got " << v.actual;
  }
  v.message = msg.str();
  return v;
}

}  // namespace convbound
