#include "convbound/workload.hpp"

#include <numeric>

namespace convbound {

Rational make_rational(Count num, Count den) {
  if (den <= 0 || num < 0) {
    throw Error("rational must have a positive denominator and non-negative numerator");
  }
  const Count g = std::gcd(num, den);
  return Rational{num / g, den / g};
}

void ConvLayer::validate() const {
  if (co < 1 || ci < 1 || ho < 1 || wo < 1 || hk < 1 || wk < 1 || d < 1) {
    throw Error("layer '" + name + "': all dimensions must be >= 1");
  }
}

Count ConvLayer::input_words(Count batch) const {
  return checked_mul(batch, hi(), wi(), ci);
}

Count ConvLayer::weight_words() const { return checked_mul(wk, hk, ci, co); }

Count ConvLayer::output_words(Count batch) const {
  return checked_mul(batch, ho, wo, co);
}

ConvLayer make_layer(std::string name, Count co, Count ci, Count ho, Count wo, Count hk,
                     Count wk, Count d) {
  ConvLayer layer{std::move(name), co, ci, ho, wo, hk, wk, d};
  layer.validate();
  return layer;
}

void Workload::validate() const {
  if (batch < 1) {
    throw Error("workload batch must be >= 1");
  }
  if (word_bits != 8 && word_bits != 16 && word_bits != 32) {
    throw Error("word_bits must be 8, 16 or 32");
  }
  for (const auto& layer : layers) {
    layer.validate();
  }
}

double Workload::to_mb(Count words) const {
  return static_cast<double>(words) * word_bytes() / (1024.0 * 1024.0);
}

Rational reuse_factor(const ConvLayer& layer) {
  const Rational r = make_rational(layer.wk * layer.hk, layer.d * layer.d);
  if (r.num < r.den) {
    return Rational{1, 1};
  }
  return r;
}

Count mac_count(const ConvLayer& layer, Count batch) {
  return checked_mul(batch, layer.wo, layer.ho, layer.co, layer.wk, layer.hk, layer.ci);
}

Count total_macs(const Workload& workload) {
  Count total = 0;
  for (const auto& layer : workload.layers) {
    total = checked_add(total, mac_count(layer, workload.batch));
  }
  return total;
}

Workload vgg16_workload(Count batch) {
  struct Row {
    const char* name;
    Count hw, ci, co;
  };
  static constexpr Row rows[] = {
      {"conv1_1", 224, 3, 64},    {"conv1_2", 224, 64, 64},   {"conv2_1", 112, 64, 128},
      {"conv2_2", 112, 128, 128}, {"conv3_1", 56, 128, 256},  {"conv3_2", 56, 256, 256},
      {"conv3_3", 56, 256, 256},  {"conv4_1", 28, 256, 512},  {"conv4_2", 28, 512, 512},
      {"conv4_3", 28, 512, 512},  {"conv5_1", 14, 512, 512},  {"conv5_2", 14, 512, 512},
      {"conv5_3", 14, 512, 512},
  };
  Workload w;
  w.batch = batch;
  for (const auto& r : rows) {
    w.layers.push_back(make_layer(r.name, r.co, r.ci, r.hw, r.hw, 3, 3, 1));
  }
  w.validate();
  return w;
}

Workload tiny_workload(Count batch) {
  Workload w;
  w.batch = batch;
  w.layers.push_back(make_layer("tiny_3x3", 16, 8, 8, 8, 3, 3, 1));
  w.layers.push_back(make_layer("tiny_1x1", 12, 16, 6, 6, 1, 1, 1));
  w.layers.push_back(make_layer("tiny_s2", 8, 4, 5, 5, 3, 3, 2));
  w.validate();
  return w;
}

}  // namespace convbound
