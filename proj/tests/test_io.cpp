#include "doctest.h"

#include <random>
#include <sstream>

#include "convbound/bounds.hpp"
#include "convbound/io.hpp"
#include "convbound/report.hpp"

using namespace convbound;

TEST_CASE("budget parsing") {
  CHECK(io::parse_budget("173.5KB", 2) == 88832);
  CHECK(io::parse_budget("16KB", 2) == 8192);
  CHECK(io::parse_budget("1MB", 2) == 524288);
  CHECK(io::parse_budget("512B", 2) == 256);
  CHECK(io::parse_budget("88832", 2) == 88832);
  CHECK(io::parse_budget(" 2kb ", 2) == 1024);
  for (const char* bad : {"0", "1B", "0KB"}) {
    CAPTURE(bad);
    try {
      io::parse_budget(bad, 2);
      FAIL("accepted");
    } catch (const InfeasibleError& e) {
      CHECK(std::string(e.what()).find("infeasible budget") != std::string::npos);
    }
  }
  CHECK_THROWS_AS(io::parse_budget("abc", 2), Error);
  CHECK_THROWS_AS(io::parse_budget("-3KB", 2), Error);
}

TEST_CASE("JSON round trips") {
  const Workload w = vgg16_workload(3);
  const Workload w2 = io::workload_from_json(io::workload_to_json(w));
  CHECK(w2.batch == 3);
  CHECK(w2.layers == w.layers);

  const HwConfig hw = implementation_preset(4);
  const HwConfig hw2 = io::hw_from_json(io::hw_to_json(hw));
  CHECK(hw2.p == hw.p);
  CHECK(hw2.greg_seg_words == hw.greg_seg_words);
  CHECK(hw2.dram_words_per_cycle == hw.dram_words_per_cycle);

  EnergyTable t;
  t.greg_pj = 0.9;
  const EnergyTable t2 = io::energy_from_json(io::energy_to_json(t));
  CHECK(t2.greg_pj == 0.9);
  CHECK(t2.gbuf_pj == t.gbuf_pj);
  CHECK(t2.lreg_pj == t.lreg_pj);
}

TEST_CASE("JSON errors") {
  CHECK_THROWS_AS(io::workload_from_json("{"), Error);
  CHECK_THROWS_AS(io::workload_from_json(R"({"layers": [{"name": "a", "co": 0}]})"), Error);
  CHECK_THROWS_AS(io::hw_from_json(R"({"p": 6, "pg": 4})"), Error);
  CHECK_THROWS_AS(io::energy_from_json(R"({"dram_pj": -2})"), Error);
  CHECK_THROWS_AS(io::sweep_from_json(R"({"budgets": []})"), Error);
  CHECK_THROWS_AS(io::sweep_from_json(R"({"budgets": ["1KB"], "kinds": ["XYZ"]})"), Error);
  CHECK_THROWS_AS(io::load_workload("/nonexistent/w.json"), Error);
}

TEST_CASE("sweep file") {
  const auto s = io::sweep_from_json(
      R"({"budgets": ["16KB", 4096], "workload": "tiny", "batch": 2, "kinds": ["InR-A"]})");
  CHECK(s.budgets == std::vector<std::string>{"16KB", "4096"});
  CHECK(s.workload == "tiny");
  CHECK(s.batch == 2);
  CHECK(s.kinds == std::vector<DataflowKind>{DataflowKind::InR_A});
}

TEST_CASE("tensor files") {
  const ConvLayer l = make_layer("t", 3, 2, 4, 4, 3, 3);
  std::mt19937_64 rng(1);
  const ConvTensors t = random_tensors(l, 2, rng);
  for (int bits : {8, 16, 32, 64}) {
    std::stringstream ss;
    write_tensor(ss, t.input, bits);
    int got = 0;
    CHECK(read_tensor(ss, &got) == t.input);
    CHECK(got == bits);
  }
  Tensor wide({2}, 0);
  wide.data = {300, -1};
  std::stringstream ss;
  CHECK_THROWS_AS(write_tensor(ss, wide, 8), Error);
  std::stringstream junk("nope");
  CHECK_THROWS_AS(read_tensor(junk), Error);
}

TEST_CASE("report CSVs") {
  const Workload w = vgg16_workload(3);
  const Report b = cmd_bound(w, {88832});
  CHECK(b.ok);
  CHECK(b.csv.rfind("# convbound bound schema 1\n", 0) == 0);
  CHECK(b.csv.find("88832,TOTAL,") != std::string::npos);
  CHECK(cmd_bound(w, {88832}).csv == b.csv);

  const Workload one{{make_layer("only", 16, 8, 8, 8, 3, 3)}, 1};
  const Report single = cmd_bound(one, {100});
  std::istringstream lines(single.csv);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 4);  // comment, header, layer, total
  CHECK(single.csv.find("100,only,73728,9/1," +
                        std::to_string(offchip_lower_bound(one.layers[0], 1, MemoryBudget{100}))) !=
        std::string::npos);

  const Workload tiny = tiny_workload(1);
  const Report c = cmd_compare(tiny, {1000000}, {DataflowKind::WtR_A});
  std::istringstream crows(c.csv);
  std::getline(crows, line);
  std::getline(crows, line);
  int kind_rows = 0;
  while (std::getline(crows, line)) {
    const auto a = line.find(',');
    const auto b2 = line.find(',', a + 1);
    const auto c3 = line.find(',', b2 + 1);
    CHECK(line.substr(b2 + 1, c3 - b2 - 1) == "WtR-A");
    ++kind_rows;
  }
  CHECK(kind_rows == static_cast<int>(tiny.layers.size()) + 1);
  CHECK(cmd_compare(tiny, {1000000}, {DataflowKind::WtR_A}).csv == c.csv);

  const Report s = cmd_simulate(tiny, implementation_preset(1), EnergyTable{}, {true, 7});
  CHECK(s.ok);
  CHECK(s.csv.find(",no\n") == std::string::npos);
  CHECK(s.csv.find("TOTAL") != std::string::npos);
  CHECK(cmd_simulate(tiny, implementation_preset(1), EnergyTable{}, {true, 7}).csv == s.csv);
}
