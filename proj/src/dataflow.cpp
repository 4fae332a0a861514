#include "convbound/dataflow.hpp"

#include <algorithm>
#include <cctype>

namespace convbound {

namespace {

// Sum over tiles of the input extent each tile needs: with n tiles covering `out`
// outputs, sum(d*(len-1)+kernel) = d*out + n*(kernel-d).
Count halo_span(Count out, Count tile, Count kernel, Count stride) {
  const Count n = ceil_div(out, tile);
  return stride * out + n * (kernel - stride);
}

Count input_sweep(const ConvLayer& l, Count batch, const Tile& t) {
  return checked_mul(batch, halo_span(l.ho, t.y, l.hk, l.d), halo_span(l.wo, t.x, l.wk, l.d),
                     l.ci);
}

}  // namespace

std::string_view to_string(DataflowKind kind) {
  switch (kind) {
    case DataflowKind::Proposed: return "Proposed";
    case DataflowKind::InR_A: return "InR-A";
    case DataflowKind::InR_B: return "InR-B";
    case DataflowKind::WtR_A: return "WtR-A";
    case DataflowKind::WtR_B: return "WtR-B";
    case DataflowKind::OutR_A: return "OutR-A";
    case DataflowKind::OutR_B: return "OutR-B";
  }
  return "?";
}

std::optional<DataflowKind> parse_kind(std::string_view text) {
  auto squash = [](std::string_view s) {
    std::string out;
    for (char c : s) {
      if (c != '-' && c != '_' && c != ' ') {
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      }
    }
    return out;
  };
  const std::string key = squash(text);
  for (DataflowKind k : kAllKinds) {
    if (squash(to_string(k)) == key) {
      return k;
    }
  }
  return std::nullopt;
}

AccessVolume& AccessVolume::operator+=(const AccessVolume& o) {
  input_reads = checked_add(input_reads, o.input_reads);
  weight_reads = checked_add(weight_reads, o.weight_reads);
  output_reads = checked_add(output_reads, o.output_reads);
  output_writes = checked_add(output_writes, o.output_writes);
  return *this;
}

FreeDims free_dims(DataflowKind kind) {
  switch (kind) {
    case DataflowKind::Proposed: return {true, true, true, true, false};
    case DataflowKind::InR_B:
    case DataflowKind::WtR_B: return {false, true, true, true, false};
    default: return {false, true, true, true, true};
  }
}

Tile normalize_tile(DataflowKind kind, const ConvLayer& layer, Count batch, Tile t) {
  const FreeDims f = free_dims(kind);
  auto clamp = [](Count v, Count hi) { return std::clamp<Count>(v, 1, hi); };
  t.b = f.b ? clamp(t.b, batch) : 1;
  t.z = clamp(t.z, layer.co);
  t.y = clamp(t.y, layer.ho);
  t.x = clamp(t.x, layer.wo);
  if (!f.k) {
    t.k = kind == DataflowKind::Proposed ? 1 : layer.ci;
  } else {
    t.k = clamp(t.k, layer.ci);
  }
  return t;
}

bool tile_valid(DataflowKind kind, const ConvLayer& layer, Count batch, const Tile& t) {
  auto in = [](Count v, Count hi) { return v >= 1 && v <= hi; };
  if (!in(t.b, batch) || !in(t.z, layer.co) || !in(t.y, layer.ho) || !in(t.x, layer.wo) ||
      !in(t.k, layer.ci)) {
    return false;
  }
  return normalize_tile(kind, layer, batch, t) == t;
}

Count footprint_words(DataflowKind kind, const ConvLayer& l, const Tile& t) {
  const Count yin = input_extent(t.y, l.hk, l.d);
  const Count xin = input_extent(t.x, l.wk, l.d);
  const Count window = l.wk * l.hk;
  switch (kind) {
    case DataflowKind::Proposed:
      return checked_add(checked_add(checked_mul(t.b, t.x, t.y, t.z), checked_mul(t.b, xin, yin, t.k)),
                         checked_mul(window, t.k, t.z));
    case DataflowKind::InR_B:
    case DataflowKind::WtR_B:
    case DataflowKind::OutR_B:
      // full-depth weights resident next to the block of outputs
      return checked_add(checked_add(checked_mul(t.z, t.y, t.x), checked_mul(t.k, yin, xin)),
                         checked_mul(window, l.ci, t.z));
    default:
      return checked_add(checked_add(checked_mul(t.z, t.y, t.x), checked_mul(t.k, yin, xin)),
                         checked_mul(window, t.k, t.z));
  }
}

AccessVolume proposed_volume(const ConvLayer& layer, Count batch, const Tile& tile) {
  return dataflow_volume(DataflowKind::Proposed, layer, batch, tile);
}

AccessVolume dataflow_volume(DataflowKind kind, const ConvLayer& l, Count batch,
                             const Tile& t) {
  const Count nb = ceil_div(batch, t.b);
  const Count nz = ceil_div(l.co, t.z);
  const Count ny = ceil_div(l.ho, t.y);
  const Count nx = ceil_div(l.wo, t.x);
  const Count nk = ceil_div(l.ci, t.k);
  const Count outputs = l.output_words(batch);
  const Count weights = l.weight_words();
  const Count sweep = input_sweep(l, batch, t);

  AccessVolume v;
  v.output_writes = outputs;
  switch (kind) {
    case DataflowKind::Proposed:
    case DataflowKind::OutR_A:
      // output block resident; each block streams its inputs and weights once
      v.input_reads = checked_mul(nz, sweep);
      v.weight_reads = checked_mul(nb, ny, nx, weights);
      break;
    case DataflowKind::OutR_B:
    case DataflowKind::WtR_B:
      v.input_reads = checked_mul(nz, sweep);
      v.weight_reads = weights;
      break;
    case DataflowKind::InR_A:
    case DataflowKind::InR_B:
      v.input_reads = sweep;
      v.weight_reads = checked_mul(nb, ny, nx, weights);
      v.output_writes = checked_mul(nk, outputs);
      v.output_reads = checked_mul(nk - 1, outputs);
      break;
    case DataflowKind::WtR_A:
      v.input_reads = checked_mul(nz, sweep);
      v.weight_reads = weights;
      v.output_writes = checked_mul(nk, outputs);
      v.output_reads = checked_mul(nk - 1, outputs);
      break;
  }
  return v;
}

AccessVolume baseline_volume(DataflowKind kind, const ConvLayer& layer, Count batch,
                             const Tile& tile) {
  if (kind == DataflowKind::Proposed) {
    throw Error("baseline_volume: Proposed is not a baseline");
  }
  return dataflow_volume(kind, layer, batch, tile);
}

bool better(const SearchResult& a, const SearchResult& b) {
  const Count ta = a.volume.total();
  const Count tb = b.volume.total();
  if (ta != tb) return ta < tb;
  if (a.footprint != b.footprint) return a.footprint < b.footprint;
  if (a.tile != b.tile) return a.tile < b.tile;
  return static_cast<int>(a.kind) < static_cast<int>(b.kind);
}

}  // namespace convbound
