#pragma once

#include "convbound/common.hpp"
#include "convbound/dataflow.hpp"
#include "convbound/workload.hpp"

namespace convbound {

/// Effective on-chip capacity S in words (the largest non-duplicated subset).
struct MemoryBudget {
  Count s_words = 1;
};

struct GbufBound {
  Count reads = 0;
  Count writes = 0;
};

/// ceil(2*MACs/sqrt(R*S)) + outputs, the concrete form of the asymptotic bound.
/// Not a hard floor for small layers; some dataflows beat it there.
Count offchip_lower_bound(const ConvLayer& layer, Count batch, MemoryBudget budget);

/// Each loaded input and weight is written to and read from the GBuf exactly once.
GbufBound gbuf_lower_bound(const AccessVolume& dram_volume);

/// One register write per MAC.
Count reg_lower_bound(const ConvLayer& layer, Count batch);

}  // namespace convbound
