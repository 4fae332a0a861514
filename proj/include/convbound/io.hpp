#pragma once

#include <string>
#include <vector>

#include "convbound/dataflow.hpp"
#include "convbound/energy.hpp"
#include "convbound/mapping.hpp"
#include "convbound/workload.hpp"

namespace convbound::io {

/// {"layers": [{name, co, ci, ho, wo, hk, wk, d}], "batch": B, "word_bits": 16}
Workload workload_from_json(const std::string& text);
std::string workload_to_json(const Workload& workload);
Workload load_workload(const std::string& path);

/// Keys mirror HwConfig fields; missing keys keep the defaults.
HwConfig hw_from_json(const std::string& text);
std::string hw_to_json(const HwConfig& hw);
HwConfig load_hw(const std::string& path);

/// Any subset of {mac_pj, dram_pj, greg_pj, lreg_static_pw_per_word, gbuf_pj, lreg_pj};
/// the class maps are keyed by capacity in bytes and replace the defaults wholesale.
EnergyTable energy_from_json(const std::string& text);
std::string energy_to_json(const EnergyTable& table);
EnergyTable load_energy(const std::string& path);

/// "88832" is words, "512B" bytes, "173.5KB" KiB (1024 bytes). Throws
/// InfeasibleError("infeasible budget ...") for anything below one word.
Count parse_budget(const std::string& text, int word_bytes);

/// {"budgets": [...], "workload": "vgg16" | path, "batch": B, "kinds": [...]}
struct SweepConfig {
  std::vector<std::string> budgets;
  std::string workload = "vgg16";
  Count batch = 0;  // 0 keeps the workload's own batch
  std::vector<DataflowKind> kinds;
};
SweepConfig sweep_from_json(const std::string& text);
SweepConfig load_sweep(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace convbound::io
