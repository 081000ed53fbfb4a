#pragma once

// Physical-memory view of an 8-bit quantized model: weights packed one byte
// each into 4KB pages, a per-cell flippability profile standing in for a
// hammer-style fault channel, and a freeze-and-research loop that reroutes
// the attack around cells the channel cannot touch.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "bflab/attack.hpp"

namespace bflab {

struct PhysicalAddress {
  long long page = 0;
  int bit_offset = 0;  // 0..32767 within the page, LSB of byte 0 first

  friend bool operator==(const PhysicalAddress& a, const PhysicalAddress& b) {
    return a.page == b.page && a.bit_offset == b.bit_offset;
  }
  friend bool operator<(const PhysicalAddress& a, const PhysicalAddress& b) {
    return std::tie(a.page, a.bit_offset) < std::tie(b.page, b.bit_offset);
  }
};

constexpr int kPageBytes = 4096;
constexpr int kPageBits = kPageBytes * 8;

// Bytes of model weights, cumulative over quantized layers in order.
inline long long total_weight_bytes(const QuantizedModel& qm) {
  long long n = 0;
  for (const auto& l : qm.layers) n += static_cast<long long>(l.size());
  return n;
}

inline long long total_pages(const QuantizedModel& qm) {
  return (total_weight_bytes(qm) + kPageBytes - 1) / kPageBytes;
}

// Where one logical bit lives. Only byte-per-weight (8-bit) models map
// cleanly onto memory, anything else is refused.
inline PhysicalAddress layout(const QuantizedModel& qm, const BitLocation& loc) {
  if (loc.layer < 0 || loc.layer >= static_cast<int>(qm.layers.size()))
    throw std::out_of_range("layout: layer out of range");
  long long byte_index = 0;
  for (int q = 0; q < loc.layer; ++q)
    byte_index += static_cast<long long>(qm.layers[static_cast<std::size_t>(q)].size());
  const QuantizedLayer& l = qm.layers[static_cast<std::size_t>(loc.layer)];
  if (l.n_bits != 8)
    throw std::invalid_argument("layout: memory mapping requires 8-bit quantization");
  if (loc.weight_index < 0 || loc.weight_index >= static_cast<long long>(l.size()))
    throw std::out_of_range("layout: weight index out of range");
  if (loc.bit_pos < 0 || loc.bit_pos >= 8)
    throw std::out_of_range("layout: bit position out of range");
  byte_index += loc.weight_index;
  PhysicalAddress addr;
  addr.page = byte_index / kPageBytes;
  addr.bit_offset = static_cast<int>(byte_index % kPageBytes) * 8 + loc.bit_pos;
  return addr;
}

enum class Flippability { none, zero_to_one, one_to_zero, both };

inline const char* flippability_name(Flippability f) {
  switch (f) {
    case Flippability::none: return "none";
    case Flippability::zero_to_one: return "0->1";
    case Flippability::one_to_zero: return "1->0";
    case Flippability::both: return "both";
  }
  return "?";
}

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Deterministic per-cell fault capability. `density` is the fraction of
// cells flippable at all; flippable cells split evenly between the two
// single directions and both, except that full density means every cell
// flips both ways (a perfect channel imposes no constraint at all).
// Explicit `exceptions` override the hash.
struct FlipProfile {
  std::uint64_t seed = 0;
  double density = 1.0;
  std::map<PhysicalAddress, Flippability> exceptions;

  Flippability at(const PhysicalAddress& addr) const {
    auto it = exceptions.find(addr);
    if (it != exceptions.end()) return it->second;
    if (density >= 1.0) return Flippability::both;
    std::uint64_t cell = static_cast<std::uint64_t>(addr.page) * kPageBits +
                         static_cast<std::uint64_t>(addr.bit_offset);
    std::uint64_t h = detail::mix64(seed ^ detail::mix64(cell));
    double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    if (!(u < density)) return Flippability::none;
    switch (detail::mix64(h) % 3) {
      case 0: return Flippability::zero_to_one;
      case 1: return Flippability::one_to_zero;
      default: return Flippability::both;
    }
  }
};

inline FlipProfile make_profile(double density, std::uint64_t seed) {
  if (density < 0.0 || density > 1.0)
    throw std::invalid_argument("flip profile density must be in [0,1]");
  FlipProfile p;
  p.seed = seed;
  p.density = density;
  return p;
}

// Whether the channel can realize this exact transition at this cell.
inline bool feasible(const QuantizedModel& qm, const BitFlipRecord& rec,
                     const FlipProfile& profile) {
  Flippability f = profile.at(layout(qm, rec.location));
  if (f == Flippability::both) return true;
  if (rec.old_bit == 0 && rec.new_bit == 1) return f == Flippability::zero_to_one;
  if (rec.old_bit == 1 && rec.new_bit == 0) return f == Flippability::one_to_zero;
  return false;
}

struct DeploymentResult {
  bool deployed = false;
  std::vector<BitFlipRecord> realized;     // the flip chain that cleared the profile
  std::vector<BitLocation> infeasible;     // cells frozen over all rounds
  long long baseline_flips = 0;            // flips the unconstrained attack needed
  long long extra_flips_used = 0;          // realized count minus baseline
  int rounds = 0;
};

// Re-runs the attack from the pristine model, freezing every found-but-
// unflippable cell, until a fully realizable flip chain appears (applied to
// `qm`) or the search gives out (`qm` left pristine).
inline std::pair<AttackReport, DeploymentResult> deploy_with_research(
    QuantizedModel& qm, const AttackSpec& spec, const DataSplit& split,
    const FlipProfile& profile, int max_rounds = 16) {
  if (max_rounds < 1) throw std::invalid_argument("deploy: max_rounds must be >= 1");
  const QuantizedModel pristine = qm;
  AttackSpec round_spec = spec;
  DeploymentResult result;
  AttackReport report;

  for (int round = 1; round <= max_rounds; ++round) {
    result.rounds = round;
    QuantizedModel working = pristine;
    report = run_attack(working, round_spec, split);
    if (round == 1) result.baseline_flips = static_cast<long long>(report.flips.size());

    if (!report.achieved) {
      // On round 1 the search failed on its own terms; afterwards the frozen
      // cells are what starved it, so the verdict is the channel's.
      if (round > 1) report.termination = "infeasible";
      return {report, result};
    }

    std::vector<BitLocation> blocked;
    for (const BitFlipRecord& rec : report.flips)
      if (!feasible(pristine, rec, profile)) blocked.push_back(rec.location);

    if (blocked.empty()) {
      qm = std::move(working);
      result.deployed = true;
      result.realized = report.flips;
      result.extra_flips_used =
          static_cast<long long>(report.flips.size()) - result.baseline_flips;
      return {report, result};
    }

    bool grew = false;
    for (const BitLocation& loc : blocked)
      if (round_spec.frozen.insert(loc).second) {
        result.infeasible.push_back(loc);
        grew = true;
      }
    if (!grew) break;
  }

  report.achieved = false;
  report.termination = "infeasible";
  return {report, result};
}

}  // namespace bflab
