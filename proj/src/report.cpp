#include "convbound/report.hpp"

#include <cstdio>
#include <random>
#include <sstream>

#include "convbound/bounds.hpp"
#include "convbound/simulator.hpp"

namespace convbound {

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

class Csv {
 public:
  Csv(const char* report, std::initializer_list<const char*> header) {
    out_ << "# convbound " << report << " schema " << kCsvSchemaVersion << "\n";
    bool first = true;
    for (const char* h : header) {
      out_ << (first ? "" : ",") << h;
      first = false;
    }
    out_ << "\n";
  }

  Csv& operator<<(const std::string& cell) {
    out_ << (fresh_ ? "" : ",") << cell;
    fresh_ = false;
    return *this;
  }
  Csv& operator<<(const char* cell) { return *this << std::string(cell); }
  Csv& operator<<(Count v) { return *this << std::to_string(v); }
  Csv& operator<<(int v) { return *this << std::to_string(v); }
  void end_row() {
    out_ << "\n";
    fresh_ = true;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
  bool fresh_ = true;
};

}  // namespace

Report cmd_bound(const Workload& w, const std::vector<Count>& budgets) {
  w.validate();
  Csv csv("bound", {"budget_words", "layer", "macs", "reuse_factor", "bound_words", "bound_mb",
                    "words_per_mac"});
  for (Count s : budgets) {
    Count total = 0;
    Count macs = 0;
    for (const auto& l : w.layers) {
      const Count lb = offchip_lower_bound(l, w.batch, MemoryBudget{s});
      const Count m = mac_count(l, w.batch);
      const Rational r = reuse_factor(l);
      total += lb;
      macs += m;
      csv << s << l.name << m << (std::to_string(r.num) + "/" + std::to_string(r.den)) << lb
          << fixed(w.to_mb(lb), 4) << fixed(static_cast<double>(lb) / m, 6);
      csv.end_row();
    }
    csv << s << "TOTAL" << macs << "" << total << fixed(w.to_mb(total), 4)
        << fixed(static_cast<double>(total) / macs, 6);
    csv.end_row();
  }
  return {csv.str(), true};
}

Report cmd_compare(const Workload& w, const std::vector<Count>& budgets,
                   const std::vector<DataflowKind>& kinds) {
  w.validate();
  Csv csv("compare",
          {"budget_words", "layer", "kind", "feasible", "b", "z", "y", "x", "k", "footprint_words",
           "input_reads", "weight_reads", "output_reads", "output_writes", "total_words",
           "total_mb", "found_min_kind", "found_min_words", "lower_bound_words"});
  for (Count s : budgets) {
    const MemoryBudget budget{s};
    std::vector<Count> kind_total(kinds.size(), 0);
    std::vector<bool> kind_feasible(kinds.size(), true);
    Count fm_total = 0;
    Count lb_total = 0;
    for (const auto& l : w.layers) {
      const auto fm = find_minimum(l, w.batch, budget);
      const Count lb = offchip_lower_bound(l, w.batch, budget);
      if (fm) fm_total += fm->volume.total();
      lb_total += lb;
      for (std::size_t i = 0; i < kinds.size(); ++i) {
        const auto r = tiling_search(kinds[i], l, w.batch, budget);
        csv << s << l.name << std::string(to_string(kinds[i]));
        if (r) {
          const AccessVolume& v = r->volume;
          kind_total[i] += v.total();
          csv << "yes" << r->tile.b << r->tile.z << r->tile.y << r->tile.x << r->tile.k
              << r->footprint << v.input_reads << v.weight_reads << v.output_reads
              << v.output_writes << v.total() << fixed(w.to_mb(v.total()), 4);
        } else {
          kind_feasible[i] = false;
          csv << "no" << "" << "" << "" << "" << "" << "" << "" << "" << "" << "" << "" << "";
        }
        if (fm) {
          csv << std::string(to_string(fm->kind)) << fm->volume.total();
        } else {
          csv << "" << "";
        }
        csv << lb;
        csv.end_row();
      }
    }
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      csv << s << "TOTAL" << std::string(to_string(kinds[i])) << (kind_feasible[i] ? "yes" : "no")
          << "" << "" << "" << "" << "" << "" << "" << "" << "" << "";
      if (kind_feasible[i]) {
        csv << kind_total[i] << fixed(w.to_mb(kind_total[i]), 4);
      } else {
        csv << "" << "";
      }
      csv << "" << fm_total << lb_total;
      csv.end_row();
    }
  }
  return {csv.str(), true};
}

Report cmd_simulate(const Workload& w, const HwConfig& hw, const EnergyTable& table,
                    const SimulateOptions& options) {
  w.validate();
  hw.validate();
  table.validate();
  Csv csv("simulate",
          {"layer", "b", "z", "y", "x", "xs", "ys", "zs", "macs", "mac_ops", "dram_in_r",
           "dram_wt_r", "dram_out_r", "dram_out_w", "dram_mb", "gbuf_in_r", "gbuf_in_w",
           "gbuf_wt_r", "gbuf_wt_w", "gbuf_in_read_factor", "gbuf_in_write_factor", "greg_in_r",
           "greg_in_w", "greg_wt_r", "greg_wt_w", "lreg_r", "lreg_w", "lreg_w_over_bound",
           "compute_cycles", "stall_cycles", "total_cycles", "pe_util", "lreg_util", "gbuf_util",
           "greg_util", "dram_j", "gbuf_j", "greg_j", "lreg_dynamic_j", "lreg_static_j", "mac_j",
           "total_j", "pj_per_mac", "onchip_pj_per_mac", "verified"});

  TrafficCounters tot;
  EnergyBreakdown etot;
  Count macs_total = 0;
  Count compute = 0, stall = 0, cycles = 0;
  double pe = 0, lr = 0, gb = 0, gr = 0;
  bool all_ok = true;

  auto emit = [&](const std::string& name, const Tile* tile, const IterationPlan* it, Count macs,
                  const TrafficCounters& c, Count comp, Count st, Count total, double u_pe,
                  double u_lr, double u_gb, double u_gr, const EnergyBreakdown& e,
                  const std::string& verified) {
    csv << name;
    if (tile && it) {
      csv << tile->b << tile->z << tile->y << tile->x << it->xs << it->ys << it->zs;
    } else {
      csv << "" << "" << "" << "" << "" << "" << "";
    }
    auto ratio = [](Count a, Count b) { return b > 0 ? static_cast<double>(a) / b : 0.0; };
    csv << macs << c.mac_ops << c.dram_in_r << c.dram_wt_r << c.dram_out_r << c.dram_out_w
        << fixed(w.to_mb(c.dram_total()), 4) << c.gbuf_in_r << c.gbuf_in_w << c.gbuf_wt_r
        << c.gbuf_wt_w << fixed(ratio(c.gbuf_in_r, c.dram_in_r), 4)
        << fixed(ratio(c.gbuf_in_w, c.dram_in_r), 4) << c.greg_in_r << c.greg_in_w << c.greg_wt_r
        << c.greg_wt_w << c.lreg_r << c.lreg_w << fixed(ratio(c.lreg_w, macs), 4) << comp << st
        << total << fixed(u_pe, 4) << fixed(u_lr, 4) << fixed(u_gb, 4) << fixed(u_gr, 4)
        << sci(e.dram_j) << sci(e.gbuf_j) << sci(e.greg_j) << sci(e.lreg_dynamic_j)
        << sci(e.lreg_static_j) << sci(e.mac_j) << sci(e.total_j) << fixed(e.pj_per_mac, 4)
        << fixed(macs > 0 ? e.onchip_j() * 1e12 / macs : 0.0, 4) << verified;
    csv.end_row();
  };

  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    const ConvLayer& l = w.layers[i];
    const LayerPlan plan = plan_layer(l, w.batch, hw);
    const Count macs = mac_count(l, w.batch);
    std::string verified = "skipped";
    SimResult sim;
    if (options.functional) {
      std::mt19937_64 rng(options.seed + i);
      const ConvTensors t = random_tensors(l, w.batch, rng);
      sim = simulate(l, w.batch, hw, plan, SimMode::Functional, &t);
      const VerifyResult v = verify_against_golden(sim, l, w.batch, t);
      verified = v.ok ? "yes" : "no";
      all_ok = all_ok && v.ok;
    } else {
      sim = simulate(l, w.batch, hw, plan, SimMode::CountersOnly);
    }
    const EnergyBreakdown e = energy_report(sim, macs, table, hw, w.word_bytes());
    emit(l.name, &plan.tile, &plan.iter, macs, sim.counters, sim.compute_cycles, sim.stall_cycles,
         sim.total_cycles, sim.pe_utilization, sim.lreg_utilization, sim.gbuf_utilization,
         sim.greg_utilization, e, verified);
    tot += sim.counters;
    etot += e;
    macs_total += macs;
    compute += sim.compute_cycles;
    stall += sim.stall_cycles;
    cycles += sim.total_cycles;
    pe += sim.pe_utilization;
    lr += sim.lreg_utilization;
    gb += sim.gbuf_utilization;
    gr += sim.greg_utilization;
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, w.layers.size()));
  etot.pj_per_mac = macs_total > 0 ? etot.total_j * 1e12 / macs_total : 0.0;
  // utilisations in the total row are means over layers
  emit("TOTAL", nullptr, nullptr, macs_total, tot, compute, stall, cycles, pe / n, lr / n, gb / n,
       gr / n, etot, options.functional ? (all_ok ? "yes" : "no") : "skipped");
  return {csv.str(), all_ok};
}

}  // namespace convbound
