#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "convbound/dataflow.hpp"
#include "convbound/energy.hpp"
#include "convbound/mapping.hpp"
#include "convbound/workload.hpp"

namespace convbound {

inline constexpr int kCsvSchemaVersion = 1;

struct Report {
  std::string csv;
  /// False when an enabled verification failed.
  bool ok = true;
};

/// Per-layer and total lower bounds for each budget (in words).
Report cmd_bound(const Workload& workload, const std::vector<Count>& budgets);

/// Best tiling of each requested kind per (budget, layer), with the found minimum over
/// all kinds and the lower bound alongside; a TOTAL row closes each (budget, kind).
Report cmd_compare(const Workload& workload, const std::vector<Count>& budgets,
                   const std::vector<DataflowKind>& kinds);

struct SimulateOptions {
  bool functional = false;
  std::uint64_t seed = 1;
};

/// Plans and simulates every layer; one row per layer plus a TOTAL row.
Report cmd_simulate(const Workload& workload, const HwConfig& hw, const EnergyTable& table,
                    const SimulateOptions& options = {});

}  // namespace convbound
