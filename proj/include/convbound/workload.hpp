#pragma once

#include <compare>
#include <string>
#include <vector>

#include "convbound/common.hpp"

namespace convbound {

/// Exact non-negative rational, always stored in lowest terms.
struct Rational {
  Count num = 1;
  Count den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

Rational make_rational(Count num, Count den);

/// One convolutional layer, described by its output geometry.
///
/// The input image is the padded input: hi = d*(ho-1)+hk and wi = d*(wo-1)+wk.
/// Every traffic model in the library counts padded elements as real data.
struct ConvLayer {
  std::string name;
  Count co = 1;  // output channels
  Count ci = 1;  // input channels
  Count ho = 1;
  Count wo = 1;
  Count hk = 1;
  Count wk = 1;
  Count d = 1;  // stride

  Count hi() const { return d * (ho - 1) + hk; }
  Count wi() const { return d * (wo - 1) + wk; }

  /// Throws Error if any dimension is < 1.
  void validate() const;

  Count input_words(Count batch) const;
  Count weight_words() const;
  Count output_words(Count batch) const;

  friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

ConvLayer make_layer(std::string name, Count co, Count ci, Count ho, Count wo, Count hk,
                     Count wk, Count d = 1);

struct Workload {
  std::vector<ConvLayer> layers;
  Count batch = 1;
  int word_bits = 16;

  void validate() const;
  int word_bytes() const { return word_bits / 8; }
  /// Words to MB, with MB = 2^20 bytes.
  double to_mb(Count words) const;
};

/// Sliding-window reuse of each input, max(1, wk*hk/d^2), exact.
Rational reuse_factor(const ConvLayer& layer);

/// batch*wo*ho*co*wk*hk*ci; throws OverflowError past 2^63.
Count mac_count(const ConvLayer& layer, Count batch);

Count total_macs(const Workload& workload);

/// The 13 convolutional layers of VGGNet-16 (3x3, stride 1, same padding).
Workload vgg16_workload(Count batch);

/// A handful of small layers, cheap enough for functional simulation.
Workload tiny_workload(Count batch);

}  // namespace convbound
