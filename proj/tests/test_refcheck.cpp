#include "doctest.h"

#include <random>

#include "convbound/refcheck.hpp"

using namespace convbound;
using namespace convbound::refcheck;

namespace {

const ConvLayer kSmall = make_layer("small", 16, 8, 8, 8, 3, 3, 1);

}  // namespace

TEST_CASE("golden convolution trivial cases") {
  const ConvLayer id = make_layer("id", 1, 1, 3, 4, 1, 1);
  std::mt19937_64 rng(2);
  ConvTensors t = random_tensors(id, 2, rng);
  t.weights.data.assign(1, 1);
  CHECK(golden_conv(id, 2, t).data == t.input.data);

  const ConvLayer c = make_layer("c", 2, 2, 4, 4, 3, 3);
  const ConvTensors ones{Tensor(input_shape(c, 1), 1), Tensor(weight_shape(c), 1)};
  for (auto v : golden_conv(c, 1, ones).data) CHECK(v == 18);
}

TEST_CASE("golden convolution matches a permuted loop nest") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<Count> dim(1, 16);
  std::uniform_int_distribution<Count> kern(1, 4);
  for (int i = 0; i < 40; ++i) {
    const ConvLayer l = make_layer("r", dim(rng) % 6 + 1, dim(rng) % 6 + 1, dim(rng) % 9 + 1,
                                   dim(rng) % 9 + 1, kern(rng), kern(rng), kern(rng) % 2 + 1);
    const ConvTensors t = random_tensors(l, 2, rng);
    CHECK(golden_conv(l, 2, t) == golden_conv_permuted(l, 2, t));
  }
}

TEST_CASE("trace counts of the worked examples") {
  std::vector<TraceEvent> events;
  replay_dataflow(DataflowKind::Proposed, kSmall, 1, Tile{1, 4, 4, 4, 1},
                  [&](const TraceEvent& e) { events.push_back(e); });
  const AccessVolume v = trace_count(kSmall, 1, events);
  CHECK(v.reads() == 9216);
  CHECK(v.output_writes == 1024);

  TraceCounter inr(kSmall, 1);
  replay_dataflow(DataflowKind::InR_A, kSmall, 1, Tile{1, 4, 8, 8, 8}, inr.sink());
  CHECK(inr.dram_volume().total() == 2976);

  CHECK(trace_count(kSmall, 1, {}) == AccessVolume{});
  CHECK(trace_count_all(kSmall, 1, {}) == TrafficCounters{});
}

TEST_CASE("unique reads cover each tensor once") {
  TraceCounter tc(kSmall, 1, true);
  replay_dataflow(DataflowKind::WtR_A, kSmall, 1, Tile{1, 4, 4, 4, 2}, tc.sink());
  CHECK(tc.unique_dram_reads(TensorKind::Input) == kSmall.input_words(1));
  CHECK(tc.unique_dram_reads(TensorKind::Weight) == kSmall.weight_words());
}

TEST_CASE("out of range index is an error") {
  TraceCounter tc(kSmall, 1);
  TraceEvent e;
  e.index = kSmall.input_words(1);
  CHECK_THROWS_AS(tc.add(e), Error);
}

TEST_CASE("block sums and traces agree with the closed forms") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<Count> dim(1, 10);
  std::uniform_int_distribution<Count> kern(1, 3);
  for (int i = 0; i < 60; ++i) {
    const ConvLayer l = make_layer("r", dim(rng), dim(rng), dim(rng), dim(rng), kern(rng),
                                   kern(rng), kern(rng) % 2 + 1);
    const Count batch = dim(rng) % 2 + 1;
    for (DataflowKind k : kAllKinds) {
      Tile t{std::uniform_int_distribution<Count>(1, batch)(rng),
             std::uniform_int_distribution<Count>(1, l.co)(rng),
             std::uniform_int_distribution<Count>(1, l.ho)(rng),
             std::uniform_int_distribution<Count>(1, l.wo)(rng),
             std::uniform_int_distribution<Count>(1, l.ci)(rng)};
      t = normalize_tile(k, l, batch, t);
      CAPTURE(i);
      CAPTURE(to_string(k));
      const AccessVolume closed = dataflow_volume(k, l, batch, t);
      TraceCounter tc(l, batch);
      replay_dataflow(k, l, batch, t, tc.sink());
      CHECK(tc.dram_volume() == closed);
      CHECK(block_sum_volume(k, l, batch, t) == closed);
    }
  }
}

TEST_CASE("brute force matches the pruned search") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<Count> dim(1, 6);
  std::uniform_int_distribution<Count> kern(1, 3);
  for (int i = 0; i < 40; ++i) {
    const ConvLayer l = make_layer("r", dim(rng), dim(rng), dim(rng), dim(rng), kern(rng),
                                   kern(rng), kern(rng) % 2 + 1);
    const Count batch = dim(rng) % 2 + 1;
    const Count words = std::uniform_int_distribution<Count>(1, 400)(rng);
    for (DataflowKind k : kAllKinds) {
      CAPTURE(i);
      CAPTURE(to_string(k));
      const auto fast = tiling_search(k, l, batch, MemoryBudget{words});
      const auto slow = brute_force_tiling(k, l, batch, MemoryBudget{words});
      REQUIRE(fast.has_value() == slow.has_value());
      if (fast) {
        CHECK(fast->tile == slow->tile);
        CHECK(fast->volume == slow->volume);
        CHECK(fast->footprint == slow->footprint);
      }
    }
  }
}

TEST_CASE("brute force edge cases") {
  CHECK_FALSE(brute_force_tiling(DataflowKind::Proposed, kSmall, 1, MemoryBudget{5}).has_value());
  const auto whole =
      brute_force_tiling(DataflowKind::Proposed, kSmall, 1, MemoryBudget{1'000'000});
  REQUIRE(whole);
  CHECK(whole->tile == Tile{1, 16, 8, 8, 1});
  const ConvLayer big = make_layer("big", 512, 512, 56, 56, 3, 3);
  CHECK_THROWS_AS(brute_force_tiling(DataflowKind::InR_A, big, 1, MemoryBudget{100000}), Error);
}
