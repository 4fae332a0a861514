#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "convbound/io.hpp"
#include "convbound/report.hpp"

using namespace convbound;

namespace {

struct Common {
  std::string workload = "vgg16";
  std::optional<Count> batch;
  std::string out;
};

Workload resolve_workload(const Common& c) {
  Workload w;
  if (c.workload == "vgg16") {
    w = vgg16_workload(c.batch.value_or(3));
  } else if (c.workload == "tiny") {
    w = tiny_workload(c.batch.value_or(1));
  } else {
    w = io::load_workload(c.workload);
    if (c.batch) w.batch = *c.batch;
  }
  w.validate();
  return w;
}

HwConfig resolve_hw(const std::string& source) {
  if (source.size() == 1 && source[0] >= '1' && source[0] <= '5') {
    return implementation_preset(source[0] - '0');
  }
  return io::load_hw(source);
}

std::vector<DataflowKind> resolve_kinds(const std::vector<std::string>& names) {
  if (names.empty()) return {kAllKinds.begin(), kAllKinds.end()};
  std::vector<DataflowKind> out;
  for (const auto& n : names) {
    const auto k = parse_kind(n);
    if (!k) throw Error("unknown dataflow kind '" + n + "'");
    out.push_back(*k);
  }
  return out;
}

void emit(const Common& c, const std::string& csv) {
  if (c.out.empty() || c.out == "-") {
    std::cout << csv;
  } else {
    io::write_file(c.out, csv);
  }
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--workload", c.workload, "vgg16, tiny, or a workload JSON file");
  cmd->add_option("--batch", c.batch, "Batch size (overrides the workload's)")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Output file (default stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Communication bounds, dataflow comparison and accelerator simulation for conv layers"};
  app.require_subcommand(1);

  Common common;
  std::vector<std::string> budgets;
  std::vector<std::string> kinds;
  std::string sweep;
  std::string hw_source = "1";
  std::string energy_path;
  bool functional = false;
  std::uint64_t seed = 1;
  std::string what;

  auto* bound = app.add_subcommand("bound", "Off-chip communication lower bound per layer");
  add_common(bound, common);
  bound->add_option("--budget", budgets, "On-chip budget: words, or bytes with B/KB/MB suffix")->take_all();
  bound->add_option("--sweep", sweep, "Sweep JSON with budgets, workload and kinds");

  auto* compare = app.add_subcommand("compare", "Best tiling of each dataflow kind per budget");
  add_common(compare, common);
  compare->add_option("--budget", budgets, "On-chip budget: words, or bytes with B/KB/MB suffix")->take_all();
  compare->add_option("--kinds", kinds, "Dataflow kinds (default all)")->delimiter(',');
  compare->add_option("--sweep", sweep, "Sweep JSON with budgets, workload and kinds");

  auto* sim = app.add_subcommand("simulate", "Map and simulate every layer on an accelerator");
  add_common(sim, common);
  sim->add_option("--hw", hw_source, "Implementation 1-5 or a hardware JSON file");
  sim->add_option("--energy-table", energy_path, "Energy table JSON overriding the defaults");
  sim->add_flag("--functional", functional, "Run with random tensors and check outputs");
  sim->add_option("--seed", seed, "Seed for --functional tensors");

  auto* exp = app.add_subcommand("export", "Write a preset as JSON");
  add_common(exp, common);
  exp->add_option("what", what, "workload, hw or energy")
      ->required()
      ->check(CLI::IsMember({"workload", "hw", "energy"}));
  exp->add_option("--hw", hw_source, "Implementation 1-5 or a hardware JSON file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!sweep.empty()) {
      const io::SweepConfig cfg = io::load_sweep(sweep);
      common.workload = cfg.workload;
      if (cfg.batch > 0) common.batch = cfg.batch;
      budgets.insert(budgets.end(), cfg.budgets.begin(), cfg.budgets.end());
      for (DataflowKind k : cfg.kinds) kinds.emplace_back(to_string(k));
    }
    const Workload w = resolve_workload(common);

    if (bound->parsed() || compare->parsed()) {
      if (budgets.empty()) throw Error("at least one --budget is required");
      std::vector<Count> words;
      for (const auto& b : budgets) words.push_back(io::parse_budget(b, w.word_bytes()));
      const Report r = bound->parsed() ? cmd_bound(w, words) : cmd_compare(w, words, resolve_kinds(kinds));
      emit(common, r.csv);
      return r.ok ? 0 : 3;
    }
    if (sim->parsed()) {
      const HwConfig hw = resolve_hw(hw_source);
      const EnergyTable table = energy_path.empty() ? EnergyTable{} : io::load_energy(energy_path);
      const Report r = cmd_simulate(w, hw, table, {functional, seed});
      emit(common, r.csv);
      if (!r.ok) std::cerr << "convbound: functional verification failed\n";
      return r.ok ? 0 : 3;
    }
    if (what == "workload") {
      emit(common, io::workload_to_json(w));
    } else if (what == "hw") {
      emit(common, io::hw_to_json(resolve_hw(hw_source)));
    } else {
      emit(common, io::energy_to_json(EnergyTable{}));
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "convbound: " << e.what() << "\n";
    return 2;
  }
}
