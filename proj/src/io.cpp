#include "convbound/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace convbound::io {

using nlohmann::json;

namespace {

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("invalid ") + what + " JSON: " + e.what());
  }
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

std::map<Count, double> classes_from(const json& j, const char* key) {
  std::map<Count, double> out;
  if (!j.is_object()) throw Error(std::string("'") + key + "' must map byte sizes to pJ");
  for (const auto& [k, v] : j.items()) {
    std::size_t used = 0;
    Count bytes = 0;
    try {
      bytes = std::stoll(k, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != k.size() || bytes < 1) {
      throw Error(std::string("'") + key + "' keys must be byte sizes, got '" + k + "'");
    }
    out[bytes] = v.get<double>();
  }
  return out;
}

json classes_to(const std::map<Count, double>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[std::to_string(k)] = v;
  return j;
}

}  // namespace

Workload workload_from_json(const std::string& text) {
  const json j = parse(text, "workload");
  if (!j.is_object() || !j.contains("layers") || !j["layers"].is_array()) {
    throw Error("workload JSON needs a 'layers' array");
  }
  Workload w;
  take(j, "batch", w.batch);
  take(j, "word_bits", w.word_bits);
  for (const auto& lj : j["layers"]) {
    ConvLayer l;
    take(lj, "name", l.name);
    for (const char* key : {"co", "ci", "ho", "wo", "hk", "wk"}) {
      if (!lj.contains(key)) throw Error(std::string("layer is missing '") + key + "'");
    }
    take(lj, "co", l.co);
    take(lj, "ci", l.ci);
    take(lj, "ho", l.ho);
    take(lj, "wo", l.wo);
    take(lj, "hk", l.hk);
    take(lj, "wk", l.wk);
    take(lj, "d", l.d);
    l.validate();
    w.layers.push_back(l);
  }
  w.validate();
  return w;
}

std::string workload_to_json(const Workload& w) {
  json layers = json::array();
  for (const auto& l : w.layers) {
    layers.push_back({{"name", l.name}, {"co", l.co}, {"ci", l.ci}, {"ho", l.ho}, {"wo", l.wo},
                      {"hk", l.hk}, {"wk", l.wk}, {"d", l.d}});
  }
  json j = {{"layers", layers}, {"batch", w.batch}, {"word_bits", w.word_bits}};
  return j.dump(2) + "\n";
}

Workload load_workload(const std::string& path) { return workload_from_json(read_file(path)); }

HwConfig hw_from_json(const std::string& text) {
  const json j = parse(text, "hardware");
  if (!j.is_object()) throw Error("hardware JSON must be an object");
  HwConfig hw;
  take(j, "name", hw.name);
  take(j, "p", hw.p);
  take(j, "q", hw.q);
  take(j, "pg", hw.pg);
  take(j, "qg", hw.qg);
  take(j, "lreg_words_per_pe", hw.lreg_words_per_pe);
  take(j, "igbuf_words", hw.igbuf_words);
  take(j, "wgbuf_words", hw.wgbuf_words);
  take(j, "greg_seg_words", hw.greg_seg_words);
  take(j, "dram_words_per_cycle", hw.dram_words_per_cycle);
  take(j, "dram_latency_cycles", hw.dram_latency_cycles);
  take(j, "clock_hz", hw.clock_hz);
  hw.validate();
  return hw;
}

std::string hw_to_json(const HwConfig& hw) {
  json j = {{"name", hw.name},
            {"p", hw.p},
            {"q", hw.q},
            {"pg", hw.pg},
            {"qg", hw.qg},
            {"lreg_words_per_pe", hw.lreg_words_per_pe},
            {"igbuf_words", hw.igbuf_words},
            {"wgbuf_words", hw.wgbuf_words},
            {"greg_seg_words", hw.greg_seg_words},
            {"dram_words_per_cycle", hw.dram_words_per_cycle},
            {"dram_latency_cycles", hw.dram_latency_cycles},
            {"clock_hz", hw.clock_hz}};
  return j.dump(2) + "\n";
}

HwConfig load_hw(const std::string& path) { return hw_from_json(read_file(path)); }

EnergyTable energy_from_json(const std::string& text) {
  const json j = parse(text, "energy table");
  if (!j.is_object()) throw Error("energy table JSON must be an object");
  EnergyTable t;
  take(j, "mac_pj", t.mac_pj);
  take(j, "dram_pj", t.dram_pj);
  take(j, "greg_pj", t.greg_pj);
  take(j, "lreg_static_pw_per_word", t.lreg_static_pw_per_word);
  if (j.contains("gbuf_pj")) t.gbuf_pj = classes_from(j["gbuf_pj"], "gbuf_pj");
  if (j.contains("lreg_pj")) t.lreg_pj = classes_from(j["lreg_pj"], "lreg_pj");
  t.validate();
  return t;
}

std::string energy_to_json(const EnergyTable& t) {
  json j = {{"mac_pj", t.mac_pj},
            {"dram_pj", t.dram_pj},
            {"greg_pj", t.greg_pj},
            {"lreg_static_pw_per_word", t.lreg_static_pw_per_word},
            {"gbuf_pj", classes_to(t.gbuf_pj)},
            {"lreg_pj", classes_to(t.lreg_pj)}};
  return j.dump(2) + "\n";
}

EnergyTable load_energy(const std::string& path) { return energy_from_json(read_file(path)); }

Count parse_budget(const std::string& text, int word_bytes) {
  std::string s;
  for (char c : text) {
    if (c != ' ') s.push_back(c);
  }
  double scale = 0.0;  // bytes per unit; 0 means the number is already in words
  auto ends_with = [&](const char* suffix) {
    const std::string suf(suffix);
    if (s.size() > suf.size() && std::equal(suf.rbegin(), suf.rend(), s.rbegin(), [](char a, char b) {
          return std::toupper(static_cast<unsigned char>(a)) == std::toupper(static_cast<unsigned char>(b));
        })) {
      s.resize(s.size() - suf.size());
      return true;
    }
    return false;
  };
  if (ends_with("KB")) {
    scale = 1024.0;
  } else if (ends_with("MB")) {
    scale = 1024.0 * 1024.0;
  } else if (ends_with("B")) {
    scale = 1.0;
  }
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(value)) {
    throw Error("cannot parse budget '" + text + "'");
  }
  const double words = scale > 0.0 ? value * scale / word_bytes : value;
  if (!(words >= 1.0)) {
    throw InfeasibleError("infeasible budget '" + text + "': below one word of on-chip memory");
  }
  return static_cast<Count>(std::floor(words));
}

SweepConfig sweep_from_json(const std::string& text) {
  const json j = parse(text, "sweep");
  if (!j.is_object()) throw Error("sweep JSON must be an object");
  SweepConfig s;
  if (j.contains("budgets")) {
    for (const auto& b : j["budgets"]) {
      s.budgets.push_back(b.is_string() ? b.get<std::string>() : b.dump());
    }
  }
  take(j, "workload", s.workload);
  take(j, "batch", s.batch);
  if (j.contains("kinds")) {
    for (const auto& k : j["kinds"]) {
      const auto kind = parse_kind(k.get<std::string>());
      if (!kind) throw Error("unknown dataflow kind '" + k.get<std::string>() + "'");
      s.kinds.push_back(*kind);
    }
  }
  if (s.budgets.empty()) throw Error("sweep needs at least one budget");
  return s;
}

SweepConfig load_sweep(const std::string& path) { return sweep_from_json(read_file(path)); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace convbound::io
