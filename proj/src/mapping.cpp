#include "convbound/mapping.hpp"

#include <cmath>
#include <tuple>
#include <vector>

namespace convbound {

namespace {

// A dimension of length n cut into tiles of t: full tiles plus at most one short one.
struct Extent {
  Count len;
  Count count;
};

std::vector<Extent> extents(Count n, Count t) {
  std::vector<Extent> out;
  if (n / t > 0) out.push_back({t, n / t});
  if (n % t != 0) out.push_back({n % t, 1});
  return out;
}

template <typename F>
void for_each_block_class(const ConvLayer& l, Count batch, const Tile& t, F&& f) {
  for (auto eb : extents(batch, t.b))
    for (auto ez : extents(l.co, t.z))
      for (auto ey : extents(l.ho, t.y))
        for (auto ex : extents(l.wo, t.x))
          f(eb.len, ez.len, ey.len, ex.len, eb.count * ez.count * ey.count * ex.count);
}

Count window(Count rows, Count tile, Count kernel, Count stride) {
  return input_extent(rows * tile, kernel, stride);
}

}  // namespace

void HwConfig::validate() const {
  if (p < 1 || q < 1 || pg < 1 || qg < 1 || p % pg != 0 || q % qg != 0) {
    throw Error("hardware '" + name + "': PE array must be divisible into groups");
  }
  if (lreg_words_per_pe < 1 || igbuf_words < 1 || wgbuf_words < 1 || greg_seg_words < 1) {
    throw Error("hardware '" + name + "': capacities must be >= 1");
  }
  if (!(dram_words_per_cycle > 0.0) || dram_latency_cycles < 0 || !(clock_hz > 0.0)) {
    throw Error("hardware '" + name + "': DRAM bandwidth and clock must be positive");
  }
}

Count HwConfig::greg_words() const {
  return p * (q / qg) * greg_seg_words + (p / pg) * wgbuf_words;
}

HwConfig implementation_preset(int id) {
  struct Row {
    Count p, q, pg, qg, r, igbuf, seg;
  };
  static constexpr Row rows[] = {
      {16, 16, 4, 4, 128, 1024, 64}, {32, 16, 8, 4, 64, 1024, 52}, {32, 32, 8, 8, 32, 1024, 64},
      {32, 32, 8, 8, 64, 1600, 100}, {64, 32, 8, 8, 32, 1600, 64},
  };
  if (id < 1 || id > 5) {
    throw Error("unknown implementation preset " + std::to_string(id) + " (expected 1-5)");
  }
  const Row& r = rows[id - 1];
  HwConfig hw;
  hw.name = "impl" + std::to_string(id);
  hw.p = r.p;
  hw.q = r.q;
  hw.pg = r.pg;
  hw.qg = r.qg;
  hw.lreg_words_per_pe = r.r;
  hw.igbuf_words = r.igbuf;
  hw.wgbuf_words = 256;
  hw.greg_seg_words = r.seg;
  return hw;
}

IterationPlan make_iteration_plan(const ConvLayer& l, Count batch, const Tile& t, Count xs,
                                  Count ys, Count zs, Count ty, Count tx) {
  IterationPlan it;
  it.xs = xs;
  it.ys = ys;
  it.zs = zs;
  it.ty = ty;
  it.tx = tx;
  it.xs_in = input_extent(xs, l.wk, l.d);
  it.ys_in = input_extent(ys, l.hk, l.d);
  it.passes_per_iteration = t.k * l.wk * l.hk;
  it.cycles_per_pass = xs * ys * zs;
  const Count blocks = ceil_div(batch, t.b) * ceil_div(l.co, t.z) * ceil_div(l.ho, t.y) *
                       ceil_div(l.wo, t.x);
  it.iterations = checked_mul(blocks, ceil_div(l.ci, t.k));
  return it;
}

namespace {

struct Candidate {
  Tile tile;
  Count xs, ys, zs, ty, tx;
};

const char* violation(const ConvLayer& l, Count batch, const HwConfig& hw, const Candidate& c) {
  const Tile& t = c.tile;
  if (!tile_valid(DataflowKind::Proposed, l, batch, t)) return "block outside layer extents";
  if (c.xs < 1 || c.ys < 1 || c.zs < 1 || c.ty < 1 || c.tx < 1) return "per-PE tile must be >= 1";
  if (c.xs * c.ys * c.zs > hw.lreg_words_per_pe) return "per-PE Psums exceed LReg capacity";
  if (input_extent(c.xs, l.wk, l.d) * input_extent(c.ys, l.hk, l.d) > hw.greg_seg_words) {
    return "input window exceeds GReg segment";
  }
  if (t.b * c.ty * c.tx > hw.p) return "block needs more PE rows than available";
  if (t.y > c.ty * c.ys || t.x > c.tx * c.xs) return "PE rows do not cover the block";
  if (t.z > hw.q * c.zs) return "PE columns do not cover the block channels";
  if (t.z > hw.wgbuf_words) return "block channels exceed WGBuf";
  if (t.b * window(c.ty, c.ys, l.hk, l.d) * window(c.tx, c.xs, l.wk, l.d) > hw.igbuf_words) {
    return "input slice exceeds IGBuf";
  }
  return nullptr;
}

LayerPlan finish(const ConvLayer& l, Count batch, const HwConfig& hw, const Candidate& c) {
  LayerPlan plan;
  plan.tile = c.tile;
  plan.iter = make_iteration_plan(l, batch, c.tile, c.xs, c.ys, c.zs, c.ty, c.tx);
  plan.p = hw.p;
  plan.q = hw.q;
  plan.blocks = plan.iter.iterations / l.ci;
  plan.compute_cycles = checked_mul(plan.iter.iterations, plan.iter.cycles_per_iteration());
  plan.pe_utilization = static_cast<double>(mac_count(l, batch)) /
                        (static_cast<double>(hw.p * hw.q) * static_cast<double>(plan.compute_cycles));
  return plan;
}

std::vector<Count> canonical(Count dim) {
  std::vector<Count> out;
  for (Count n = dim; n >= 1; --n) {
    const Count t = ceil_div(dim, n);
    if (out.empty() || out.back() != t) out.push_back(t);
  }
  return out;
}

}  // namespace

LayerPlan make_plan(const ConvLayer& layer, Count batch, const HwConfig& hw, const Tile& tile,
                    Count xs, Count ys, Count zs, Count ty, Count tx) {
  hw.validate();
  const Candidate c{tile, xs, ys, zs, ty, tx};
  if (const char* why = violation(layer, batch, hw, c)) {
    throw InfeasibleError(std::string("plan for '") + layer.name + "' infeasible: " + why);
  }
  return finish(layer, batch, hw, c);
}

LayerPlan plan_layer(const ConvLayer& l, Count batch, const HwConfig& hw) {
  hw.validate();
  l.validate();

  struct Scored {
    Count dram;
    Count cycles;
    Count footprint;
    Candidate c;
  };
  auto key = [](const Scored& s) {
    const Tile& t = s.c.tile;
    return std::tuple(s.dram, s.cycles, s.footprint, t.b, t.z, t.y, t.x, s.c.xs, s.c.ys,
                      s.c.zs, s.c.ty, s.c.tx);
  };
  std::optional<Scored> best;

  for (Count z : canonical(l.co)) {
    if (z > hw.wgbuf_words) break;
    const Count zs = ceil_div(z, hw.q);
    for (Count ys = 1; ys <= l.ho; ++ys) {
      for (Count xs = 1; xs <= l.wo; ++xs) {
        if (xs * ys * zs > hw.lreg_words_per_pe) break;
        if (input_extent(xs, l.wk, l.d) * input_extent(ys, l.hk, l.d) > hw.greg_seg_words) break;
        for (Count b = 1; b <= batch && b <= hw.p; ++b) {
          for (Count ty = 1; ty <= ceil_div(l.ho, ys) && b * ty <= hw.p; ++ty) {
            for (Count tx = 1; tx <= ceil_div(l.wo, xs) && b * ty * tx <= hw.p; ++tx) {
              Candidate c{Tile{b, z, std::min(l.ho, ty * ys), std::min(l.wo, tx * xs), 1},
                          xs, ys, zs, ty, tx};
              if (b * window(ty, ys, l.hk, l.d) * window(tx, xs, l.wk, l.d) > hw.igbuf_words) {
                break;
              }
              const Count blocks = ceil_div(batch, b) * ceil_div(l.co, z) *
                                   ceil_div(l.ho, c.tile.y) * ceil_div(l.wo, c.tile.x);
              Scored s{proposed_volume(l, batch, c.tile).total(), blocks * xs * ys * zs,
                       footprint_words(DataflowKind::Proposed, l, c.tile), c};
              if (!best || key(s) < key(*best)) best = s;
            }
          }
        }
      }
    }
  }
  if (!best) {
    throw InfeasibleError("no mapping of layer '" + l.name + "' fits hardware '" + hw.name + "'");
  }
  return finish(l, batch, hw, best->c);
}

BalancedShape balanced_shape(const ConvLayer& layer, const HwConfig& hw) {
  const double r = reuse_factor(layer).value();
  const double z = std::sqrt(static_cast<double>(hw.psum_words()) / r);
  return BalancedShape{z, r * z};
}

Count TrafficCounters::dram_total() const {
  return dram_in_r + dram_in_w + dram_wt_r + dram_wt_w + dram_out_r + dram_out_w;
}

Count TrafficCounters::gbuf_total() const { return gbuf_in_r + gbuf_in_w + gbuf_wt_r + gbuf_wt_w; }

Count TrafficCounters::greg_total() const { return greg_in_r + greg_in_w + greg_wt_r + greg_wt_w; }

constexpr Count TrafficCounters::* kCounterFields[] = {
    &TrafficCounters::dram_in_r,  &TrafficCounters::dram_in_w,  &TrafficCounters::dram_wt_r,
    &TrafficCounters::dram_wt_w,  &TrafficCounters::dram_out_r, &TrafficCounters::dram_out_w,
    &TrafficCounters::gbuf_in_r,  &TrafficCounters::gbuf_in_w,  &TrafficCounters::gbuf_wt_r,
    &TrafficCounters::gbuf_wt_w,  &TrafficCounters::greg_in_r,  &TrafficCounters::greg_in_w,
    &TrafficCounters::greg_wt_r,  &TrafficCounters::greg_wt_w,  &TrafficCounters::lreg_r,
    &TrafficCounters::lreg_w,     &TrafficCounters::mac_ops};

TrafficCounters& TrafficCounters::operator+=(const TrafficCounters& o) {
  for (auto f : kCounterFields) this->*f = checked_add(this->*f, o.*f);
  return *this;
}

TrafficCounters TrafficCounters::scaled(Count factor) const {
  TrafficCounters out = *this;
  for (auto f : kCounterFields) out.*f = checked_mul(out.*f, factor);
  return out;
}

TrafficCounters dram_traffic(const LayerPlan& plan, const ConvLayer& layer, Count batch) {
  const AccessVolume v = proposed_volume(layer, batch, plan.tile);
  TrafficCounters c;
  c.dram_in_r = v.input_reads;
  c.dram_wt_r = v.weight_reads;
  c.dram_out_r = v.output_reads;
  c.dram_out_w = v.output_writes;
  return c;
}

TrafficCounters gbuf_traffic(const LayerPlan& plan, const ConvLayer& l, Count batch,
                             const AccessVolume& dram_volume) {
  const IterationPlan& it = plan.iter;
  TrafficCounters c;
  c.gbuf_wt_w = dram_volume.weight_reads;
  c.gbuf_wt_r = dram_volume.weight_reads;
  for_each_block_class(l, batch, plan.tile, [&](Count bb, Count, Count yy, Count xx, Count n) {
    const Count ry = ceil_div(yy, it.ys);
    const Count rx = ceil_div(xx, it.xs);
    const Count written = bb * window(ry, it.ys, l.hk, l.d) * window(rx, it.xs, l.wk, l.d);
    const Count read = bb * ry * rx * it.ys_in * it.xs_in;
    c.gbuf_in_w = checked_add(c.gbuf_in_w, checked_mul(n, l.ci, written));
    c.gbuf_in_r = checked_add(c.gbuf_in_r, checked_mul(n, l.ci, read));
  });
  return c;
}

TrafficCounters reg_traffic(const LayerPlan& plan, const ConvLayer& l, Count batch) {
  const IterationPlan& it = plan.iter;
  const TrafficCounters g = gbuf_traffic(plan, l, batch, proposed_volume(l, batch, plan.tile));
  TrafficCounters c;
  for_each_block_class(l, batch, plan.tile, [&](Count bb, Count zz, Count yy, Count xx, Count n) {
    const Count rows = bb * ceil_div(yy, it.ys) * ceil_div(xx, it.xs);
    const Count cols = std::min(plan.q, zz);
    const Count macs = checked_mul(rows, cols, it.cycles_per_pass, l.wk * l.hk, l.ci);
    c.mac_ops = checked_add(c.mac_ops, checked_mul(n, macs));
  });
  c.greg_in_w = g.gbuf_in_r;
  c.greg_wt_w = g.gbuf_wt_r;
  c.greg_in_r = c.mac_ops;
  c.greg_wt_r = c.mac_ops;
  c.lreg_w = c.mac_ops;
  c.lreg_r = c.mac_ops;
  return c;
}

TrafficCounters analytic_counters(const LayerPlan& plan, const ConvLayer& layer, Count batch) {
  const AccessVolume v = proposed_volume(layer, batch, plan.tile);
  TrafficCounters c = dram_traffic(plan, layer, batch);
  const TrafficCounters g = gbuf_traffic(plan, layer, batch, v);
  const TrafficCounters r = reg_traffic(plan, layer, batch);
  c.gbuf_in_r = g.gbuf_in_r;
  c.gbuf_in_w = g.gbuf_in_w;
  c.gbuf_wt_r = g.gbuf_wt_r;
  c.gbuf_wt_w = g.gbuf_wt_w;
  c.greg_in_r = r.greg_in_r;
  c.greg_in_w = r.greg_in_w;
  c.greg_wt_r = r.greg_wt_r;
  c.greg_wt_w = r.greg_wt_w;
  c.lreg_r = r.lreg_r;
  c.lreg_w = r.lreg_w;
  c.mac_ops = r.mac_ops;
  return c;
}

double lreg_utilization(const LayerPlan& plan, const ConvLayer& l, Count batch,
                        const HwConfig& hw) {
  // every block runs for the same number of cycles, so time weighting is a plain mean
  const IterationPlan& it = plan.iter;
  long double held = 0;
  for_each_block_class(l, batch, plan.tile, [&](Count bb, Count zz, Count yy, Count xx, Count n) {
    const Count rows = bb * ceil_div(yy, it.ys) * ceil_div(xx, it.xs);
    const Count cols = std::min(hw.q, zz);
    held += static_cast<long double>(n) * rows * cols * it.cycles_per_pass;
  });
  return static_cast<double>(held / (static_cast<long double>(plan.blocks) * hw.psum_words()));
}

}  // namespace convbound
