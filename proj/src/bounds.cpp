#include "convbound/bounds.hpp"

#include <cmath>

namespace convbound {

Count offchip_lower_bound(const ConvLayer& layer, Count batch, MemoryBudget budget) {
  if (budget.s_words < 1) {
    throw InfeasibleError("infeasible budget: S must be >= 1 word");
  }
  const Count macs = mac_count(layer, batch);
  const Rational r = reuse_factor(layer);
  // 2*macs / sqrt(S*num/den) == 2*macs*sqrt(den) / sqrt(S*num)
  const long double reads = 2.0L * static_cast<long double>(macs) *
                            std::sqrt(static_cast<long double>(r.den)) /
                            std::sqrt(static_cast<long double>(budget.s_words) *
                                      static_cast<long double>(r.num));
  const long double rounded = std::ceil(reads);
  if (rounded > static_cast<long double>(INT64_MAX / 2)) {
    throw OverflowError("lower bound exceeds 64-bit range");
  }
  return checked_add(static_cast<Count>(rounded), layer.output_words(batch));
}

GbufBound gbuf_lower_bound(const AccessVolume& dram_volume) {
  const Count loaded = checked_add(dram_volume.input_reads, dram_volume.weight_reads);
  return GbufBound{loaded, loaded};
}

Count reg_lower_bound(const ConvLayer& layer, Count batch) { return mac_count(layer, batch); }

}  // namespace convbound
