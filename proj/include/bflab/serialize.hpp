#pragma once

// JSON and CSV forms of the run artifacts: attack reports, flip logs
// (JSONL, one flip per line), deployment results, trial tables.

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bflab/harness.hpp"
#include "bflab/memsim.hpp"

namespace bflab {

using nlohmann::json;

inline void to_json(json& j, const BitLocation& loc) {
  j = json{{"layer", loc.layer}, {"weight_index", loc.weight_index}, {"bit_pos", loc.bit_pos}};
}

inline void from_json(const json& j, BitLocation& loc) {
  j.at("layer").get_to(loc.layer);
  j.at("weight_index").get_to(loc.weight_index);
  j.at("bit_pos").get_to(loc.bit_pos);
}

inline void to_json(json& j, const BitFlipRecord& r) {
  j = json{{"iteration", r.iteration},
           {"layer", r.location.layer},
           {"weight_index", r.location.weight_index},
           {"bit_pos", r.location.bit_pos},
           {"old", r.old_bit},
           {"new", r.new_bit},
           {"grad", r.selection_gradient}};
}

inline void from_json(const json& j, BitFlipRecord& r) {
  j.at("iteration").get_to(r.iteration);
  j.at("layer").get_to(r.location.layer);
  j.at("weight_index").get_to(r.location.weight_index);
  j.at("bit_pos").get_to(r.location.bit_pos);
  j.at("old").get_to(r.old_bit);
  j.at("new").get_to(r.new_bit);
  j.at("grad").get_to(r.selection_gradient);
}

inline void to_json(json& j, const AttackSpec& s) {
  j = json{{"variant", variant_name(s.variant)},
           {"source", s.source_class},
           {"target", s.target_class},
           {"asr_threshold", s.asr_threshold},
           {"stagnation_iters", s.stagnation_iters},
           {"max_flips", s.max_flips},
           {"candidates_per_layer", s.candidates_per_layer},
           {"protect_last_layer", s.protect_last_layer},
           {"frozen", json::array()}};
  for (const BitLocation& loc : s.frozen) j["frozen"].push_back(loc);
}

inline void from_json(const json& j, AttackSpec& s) {
  s.variant = variant_from_name(j.at("variant").get<std::string>());
  s.source_class = j.value("source", -1);
  s.target_class = j.value("target", -1);
  s.asr_threshold = j.value("asr_threshold", 0.9999);
  s.stagnation_iters = j.value("stagnation_iters", 3);
  s.max_flips = j.value("max_flips", 1000);
  s.candidates_per_layer = j.value("candidates_per_layer", 1);
  s.protect_last_layer = j.value("protect_last_layer", false);
  s.frozen.clear();
  if (j.contains("frozen"))
    for (const json& e : j.at("frozen")) s.frozen.insert(e.get<BitLocation>());
}

inline void to_json(json& j, const AttackReport& r) {
  j = json{{"type", "attack_report"},
           {"variant", variant_name(r.variant)},
           {"source", r.source_class},
           {"target", r.target_class},
           {"flips", r.flips},
           {"num_flips", r.flips.size()},
           {"loss_trace", r.loss_trace},
           {"asr_trace", r.asr_trace},
           {"initial_asr", r.initial_asr},
           {"asr", r.asr},
           {"post_attack_ta", r.post_attack_ta},
           {"hamming", r.hamming},
           {"achieved", r.achieved},
           {"termination", r.termination},
           {"per_layer_flips", r.per_layer_flips},
           {"num_qlayers", r.num_qlayers}};
}

inline void from_json(const json& j, AttackReport& r) {
  r.variant = variant_from_name(j.at("variant").get<std::string>());
  j.at("source").get_to(r.source_class);
  j.at("target").get_to(r.target_class);
  r.flips = j.at("flips").get<std::vector<BitFlipRecord>>();
  j.at("loss_trace").get_to(r.loss_trace);
  j.at("asr_trace").get_to(r.asr_trace);
  r.initial_asr = j.value("initial_asr", 0.0);
  j.at("asr").get_to(r.asr);
  j.at("post_attack_ta").get_to(r.post_attack_ta);
  j.at("hamming").get_to(r.hamming);
  j.at("achieved").get_to(r.achieved);
  j.at("termination").get_to(r.termination);
  j.at("per_layer_flips").get_to(r.per_layer_flips);
  j.at("num_qlayers").get_to(r.num_qlayers);
}

inline void to_json(json& j, const PhysicalAddress& a) {
  j = json{{"page", a.page}, {"bit_offset", a.bit_offset}};
}

inline void from_json(const json& j, PhysicalAddress& a) {
  j.at("page").get_to(a.page);
  j.at("bit_offset").get_to(a.bit_offset);
}

inline void to_json(json& j, const FlipProfile& p) {
  j = json{{"seed", p.seed}, {"density", p.density}, {"exceptions", json::array()}};
  for (const auto& [addr, f] : p.exceptions)
    j["exceptions"].push_back(json{{"address", addr}, {"flippability", flippability_name(f)}});
}

inline Flippability flippability_from_name(const std::string& s) {
  if (s == "none") return Flippability::none;
  if (s == "0->1") return Flippability::zero_to_one;
  if (s == "1->0") return Flippability::one_to_zero;
  if (s == "both") return Flippability::both;
  throw std::invalid_argument("unknown flippability: " + s);
}

inline void from_json(const json& j, FlipProfile& p) {
  j.at("seed").get_to(p.seed);
  j.at("density").get_to(p.density);
  p.exceptions.clear();
  if (j.contains("exceptions"))
    for (const json& e : j.at("exceptions"))
      p.exceptions[e.at("address").get<PhysicalAddress>()] =
          flippability_from_name(e.at("flippability").get<std::string>());
}

inline void to_json(json& j, const DeploymentResult& d) {
  j = json{{"type", "deployment_result"},
           {"deployed", d.deployed},
           {"realized", d.realized},
           {"infeasible", d.infeasible},
           {"baseline_flips", d.baseline_flips},
           {"extra_flips_used", d.extra_flips_used},
           {"rounds", d.rounds}};
}

// One flip per line, append-friendly.
inline void write_flips_jsonl(const std::vector<BitFlipRecord>& flips, std::ostream& out) {
  for (const BitFlipRecord& r : flips) out << json(r).dump() << "\n";
}

inline std::vector<BitFlipRecord> read_flips_jsonl(std::istream& in) {
  std::vector<BitFlipRecord> flips;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    flips.push_back(json::parse(line).get<BitFlipRecord>());
  }
  return flips;
}

namespace detail {

inline std::string csv_num(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace detail

inline const char* kTrialCsvHeader = "variant,source,target,n_bits,flips,asr,ta,seed\n";

inline std::string trial_csv_row(const AttackReport& r, int n_bits, std::uint64_t seed) {
  std::ostringstream os;
  os << variant_name(r.variant) << "," << r.source_class << "," << r.target_class << "," << n_bits
     << "," << r.flips.size() << "," << detail::csv_num(r.asr) << ","
     << detail::csv_num(r.post_attack_ta) << "," << seed << "\n";
  return os.str();
}

// Per-trial rows plus a mean/std summary row.
inline std::string trials_csv(const TrialStats& stats, AttackVariant variant, int p, int q,
                              int n_bits) {
  std::ostringstream os;
  os << kTrialCsvHeader;
  for (std::size_t i = 0; i < stats.reports.size(); ++i)
    os << trial_csv_row(stats.reports[i], n_bits, stats.seeds[i]);
  os << variant_name(variant) << "," << p << "," << q << "," << n_bits << ","
     << detail::csv_num(stats.mean_flips) << "±" << detail::csv_num(stats.std_flips) << ","
     << detail::csv_num(stats.mean_asr) << "±" << detail::csv_num(stats.std_asr) << ","
     << detail::csv_num(stats.mean_ta) << "±" << detail::csv_num(stats.std_ta) << ",summary\n";
  return os.str();
}

// One row per bit-width, mean±std cells.
inline std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << "n_bits,mean_flips,std_flips,mean_asr,std_asr,mean_ta,std_ta,achieved,trials\n";
  for (const AblationRow& r : rows)
    os << r.n_bits << "," << detail::csv_num(r.stats.mean_flips) << ","
       << detail::csv_num(r.stats.std_flips) << "," << detail::csv_num(r.stats.mean_asr) << ","
       << detail::csv_num(r.stats.std_asr) << "," << detail::csv_num(r.stats.mean_ta) << ","
       << detail::csv_num(r.stats.std_ta) << "," << r.stats.achieved_count << ","
       << r.stats.reports.size() << "\n";
  return os.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace bflab
