#include "convbound/tensor.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace convbound {

namespace {

constexpr std::array<char, 4> kMagic = {'C', 'B', 'T', 'N'};
constexpr std::uint32_t kVersion = 1;

void put_le(std::ostream& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(std::istream& in, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = in.get();
    if (c == EOF) throw Error("tensor file truncated");
    v |= static_cast<std::uint64_t>(c & 0xff) << (8 * i);
  }
  return v;
}

}  // namespace

Tensor::Tensor(std::vector<Count> shape, std::int64_t fill) : dims(std::move(shape)) {
  Count n = 1;
  for (Count d : dims) {
    if (d < 0) throw Error("tensor dimension must be >= 0");
    n = checked_mul(n, d);
  }
  data.assign(static_cast<std::size_t>(n), fill);
}

Count Tensor::flat_index(std::initializer_list<Count> idx) const {
  if (idx.size() != dims.size()) throw Error("tensor index rank mismatch");
  Count flat = 0;
  std::size_t i = 0;
  for (Count v : idx) {
    if (v < 0 || v >= dims[i]) throw Error("tensor index out of range");
    flat = flat * dims[i] + v;
    ++i;
  }
  return flat;
}

std::int64_t& Tensor::at(std::initializer_list<Count> idx) { return data[flat_index(idx)]; }
std::int64_t Tensor::at(std::initializer_list<Count> idx) const { return data[flat_index(idx)]; }

std::vector<Count> input_shape(const ConvLayer& l, Count batch) {
  return {batch, l.ci, l.hi(), l.wi()};
}
std::vector<Count> weight_shape(const ConvLayer& l) { return {l.co, l.ci, l.hk, l.wk}; }
std::vector<Count> output_shape(const ConvLayer& l, Count batch) {
  return {batch, l.co, l.ho, l.wo};
}

void check_shapes(const ConvLayer& layer, Count batch, const ConvTensors& t) {
  if (t.input.dims != input_shape(layer, batch)) {
    throw Error("input tensor shape does not match layer '" + layer.name + "'");
  }
  if (t.weights.dims != weight_shape(layer)) {
    throw Error("weight tensor shape does not match layer '" + layer.name + "'");
  }
}

ConvTensors random_tensors(const ConvLayer& layer, Count batch, std::mt19937_64& rng,
                           std::int64_t lo, std::int64_t hi) {
  std::uniform_int_distribution<std::int64_t> dist(lo, hi);
  ConvTensors t{Tensor(input_shape(layer, batch)), Tensor(weight_shape(layer))};
  for (auto& v : t.input.data) v = dist(rng);
  for (auto& v : t.weights.data) v = dist(rng);
  return t;
}

void write_tensor(std::ostream& out, const Tensor& t, int word_bits) {
  if (word_bits != 8 && word_bits != 16 && word_bits != 32 && word_bits != 64) {
    throw Error("tensor word_bits must be 8, 16, 32 or 64");
  }
  const int bytes = word_bits / 8;
  const std::int64_t lo = word_bits == 64 ? INT64_MIN : -(std::int64_t{1} << (word_bits - 1));
  const std::int64_t hi = word_bits == 64 ? INT64_MAX : (std::int64_t{1} << (word_bits - 1)) - 1;
  out.write(kMagic.data(), kMagic.size());
  put_le(out, kVersion, 4);
  put_le(out, static_cast<std::uint64_t>(word_bits), 4);
  put_le(out, t.dims.size(), 4);
  for (Count d : t.dims) put_le(out, static_cast<std::uint64_t>(d), 8);
  for (std::int64_t v : t.data) {
    if (v < lo || v > hi) throw Error("tensor value does not fit in word_bits");
    put_le(out, static_cast<std::uint64_t>(v), bytes);
  }
  if (!out) throw Error("failed writing tensor");
}

Tensor read_tensor(std::istream& in, int* word_bits) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error("not a tensor file (bad magic)");
  if (get_le(in, 4) != kVersion) throw Error("unsupported tensor file version");
  const int bits = static_cast<int>(get_le(in, 4));
  if (bits != 8 && bits != 16 && bits != 32 && bits != 64) {
    throw Error("tensor file has invalid word_bits");
  }
  const std::uint64_t ndims = get_le(in, 4);
  if (ndims > 16) throw Error("tensor file has too many dimensions");
  std::vector<Count> dims;
  for (std::uint64_t i = 0; i < ndims; ++i) {
    const std::uint64_t d = get_le(in, 8);
    if (d > static_cast<std::uint64_t>(INT64_MAX)) throw Error("tensor dimension too large");
    dims.push_back(static_cast<Count>(d));
  }
  Tensor t(dims);
  const int bytes = bits / 8;
  for (auto& v : t.data) {
    std::uint64_t raw = get_le(in, bytes);
    if (bits < 64 && (raw >> (bits - 1)) & 1) raw |= ~std::uint64_t{0} << bits;  // sign-extend
    v = static_cast<std::int64_t>(raw);
  }
  if (word_bits) *word_bits = bits;
  return t;
}

void save_tensor(const std::string& path, const Tensor& t, int word_bits) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_tensor(out, t, word_bits);
}

Tensor load_tensor(const std::string& path, int* word_bits) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_tensor(in, word_bits);
}

}  // namespace convbound
