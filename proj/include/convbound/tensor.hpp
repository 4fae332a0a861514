#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "convbound/common.hpp"
#include "convbound/workload.hpp"

namespace convbound {

/// Dense row-major integer tensor.
struct Tensor {
  std::vector<Count> dims;
  std::vector<std::int64_t> data;

  Tensor() = default;
  explicit Tensor(std::vector<Count> shape, std::int64_t fill = 0);

  Count size() const { return static_cast<Count>(data.size()); }
  std::int64_t& at(std::initializer_list<Count> idx);
  std::int64_t at(std::initializer_list<Count> idx) const;
  Count flat_index(std::initializer_list<Count> idx) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// Input [batch][ci][hi][wi] and weights [co][ci][hk][wk] of one layer.
struct ConvTensors {
  Tensor input;
  Tensor weights;
};

std::vector<Count> input_shape(const ConvLayer& layer, Count batch);
std::vector<Count> weight_shape(const ConvLayer& layer);
std::vector<Count> output_shape(const ConvLayer& layer, Count batch);

/// Throws Error naming the offending tensor if a shape does not match the layer.
void check_shapes(const ConvLayer& layer, Count batch, const ConvTensors& tensors);

/// Uniform integers in [lo, hi].
ConvTensors random_tensors(const ConvLayer& layer, Count batch, std::mt19937_64& rng,
                           std::int64_t lo = -8, std::int64_t hi = 7);

/// Binary tensor file: "CBTN" magic, u32 version, u32 word_bits, u32 ndims,
/// u64 dims[ndims], then little-endian two's-complement values of word_bits each.
void write_tensor(std::ostream& out, const Tensor& t, int word_bits);
Tensor read_tensor(std::istream& in, int* word_bits = nullptr);
void save_tensor(const std::string& path, const Tensor& t, int word_bits);
Tensor load_tensor(const std::string& path, int* word_bits = nullptr);

}  // namespace convbound
