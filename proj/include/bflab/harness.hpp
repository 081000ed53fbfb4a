#pragma once

// Experimental protocol: seeded data splits, multi-trial aggregation,
// bit-width ablation, and per-layer flip histograms.

#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "bflab/attack.hpp"
#include "bflab/rng.hpp"

namespace bflab {

// Carves one test set into the three roles an attack run needs.
//
//   n-to-1 / untargeted: attack batch = `attack_batch_size` random samples,
//     both eval sets = the full test set.
//   1-to-1: the source class is halved into attack batch and success eval;
//     accuracy eval = every non-source sample.
//   1-to-1 stealthy: attack batch = source half + an equal-size random
//     non-source sample; success eval = the other source half; accuracy
//     eval = non-source samples not drafted into the attack batch.
//
// Same seed, same split.
inline DataSplit split_data(const LabeledBatch& test_set, AttackVariant variant, int p,
                            [[maybe_unused]] int q, std::uint64_t seed,
                            int attack_batch_size = 128) {
  if (test_set.empty()) throw std::invalid_argument("split_data: empty test set");
  Rng rng(seed);
  DataSplit split;

  if (variant == AttackVariant::n_to_1 || variant == AttackVariant::untargeted) {
    if (attack_batch_size < 1 || attack_batch_size > test_set.size())
      throw std::invalid_argument("split_data: attack batch size out of range");
    std::vector<int> order(static_cast<std::size_t>(test_set.size()));
    for (int i = 0; i < test_set.size(); ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);
    order.resize(static_cast<std::size_t>(attack_batch_size));
    split.attack_batch = subset(test_set, order);
    split.asr_eval = test_set;
    split.ta_eval = test_set;
    return split;
  }

  std::vector<int> source = rows_with_label(test_set, p);
  if (static_cast<int>(source.size()) < 2)
    throw std::invalid_argument("split_data: source class too small to halve");
  rng.shuffle(source);
  std::size_t half = source.size() / 2;
  std::vector<int> attack_rows(source.begin(), source.begin() + static_cast<std::ptrdiff_t>(half));
  std::vector<int> asr_rows(source.begin() + static_cast<std::ptrdiff_t>(half), source.end());

  std::vector<int> rest;
  for (int i = 0; i < test_set.size(); ++i)
    if (test_set.labels[static_cast<std::size_t>(i)] != p) rest.push_back(i);

  if (variant == AttackVariant::one_to_1) {
    split.attack_batch = subset(test_set, attack_rows);
    split.asr_eval = subset(test_set, asr_rows);
    split.ta_eval = subset(test_set, rest);
    return split;
  }

  // stealthy: pad the attack batch with held-out non-source samples so the
  // objective can pin their predictions in place
  if (rest.size() < attack_rows.size())
    throw std::invalid_argument("split_data: not enough non-source samples for stealthy batch");
  rng.shuffle(rest);
  std::vector<int> aux(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(attack_rows.size()));
  std::vector<int> ta_rows(rest.begin() + static_cast<std::ptrdiff_t>(attack_rows.size()),
                           rest.end());
  std::vector<int> batch_rows = attack_rows;
  batch_rows.insert(batch_rows.end(), aux.begin(), aux.end());
  split.attack_batch = subset(test_set, batch_rows);
  split.asr_eval = subset(test_set, asr_rows);
  split.ta_eval = subset(test_set, ta_rows);
  return split;
}

struct TrialStats {
  std::vector<AttackReport> reports;
  std::vector<std::uint64_t> seeds;
  double mean_asr = 0.0, std_asr = 0.0;
  double mean_ta = 0.0, std_ta = 0.0;
  double mean_flips = 0.0, std_flips = 0.0;
  int achieved_count = 0;
};

namespace detail {

inline void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) {
    sd = 0.0;
    return;
  }
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  sd = std::sqrt(var / static_cast<double>(xs.size()));
}

}  // namespace detail

inline TrialStats aggregate_trials(std::vector<AttackReport> reports,
                                   std::vector<std::uint64_t> seeds) {
  if (reports.empty()) throw std::invalid_argument("aggregate_trials: no reports");
  TrialStats stats;
  std::vector<double> asr, ta, flips;
  for (const AttackReport& r : reports) {
    asr.push_back(r.asr);
    ta.push_back(r.post_attack_ta);
    flips.push_back(static_cast<double>(r.flips.size()));
    if (r.achieved) ++stats.achieved_count;
  }
  detail::mean_std(asr, stats.mean_asr, stats.std_asr);
  detail::mean_std(ta, stats.mean_ta, stats.std_ta);
  detail::mean_std(flips, stats.mean_flips, stats.std_flips);
  stats.reports = std::move(reports);
  stats.seeds = std::move(seeds);
  return stats;
}

// Independent attacks from the same pristine model, one split seed per
// trial. Each trial owns a private model copy, so trials can run on their
// own threads; results land by index either way.
inline TrialStats run_trials(const QuantizedModel& pristine, const AttackSpec& spec,
                             const LabeledBatch& test_set,
                             const std::vector<std::uint64_t>& seeds, int attack_batch_size = 128,
                             bool parallel = false) {
  if (seeds.empty()) throw std::invalid_argument("run_trials: need at least one seed");
  std::vector<AttackReport> reports(seeds.size());

  auto one = [&](std::size_t i) {
    DataSplit split = split_data(test_set, spec.variant, spec.source_class, spec.target_class,
                                 seeds[i], attack_batch_size);
    QuantizedModel qm = pristine;
    reports[i] = run_attack(qm, spec, split);
  };

  if (parallel && seeds.size() > 1) {
    std::vector<std::thread> workers;
    workers.reserve(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) workers.emplace_back(one, i);
    for (std::thread& t : workers) t.join();
  } else {
    for (std::size_t i = 0; i < seeds.size(); ++i) one(i);
  }
  return aggregate_trials(std::move(reports), seeds);
}

struct AblationRow {
  int n_bits = 0;
  TrialStats stats;
};

// Quantizes the float model at each width and runs the full trial battery.
inline std::vector<AblationRow> ablate_bitwidth(const Model& float_model, const AttackSpec& spec,
                                                const LabeledBatch& test_set,
                                                const std::vector<int>& bitwidths,
                                                const std::vector<std::uint64_t>& seeds,
                                                int attack_batch_size = 128) {
  if (bitwidths.empty()) throw std::invalid_argument("ablate_bitwidth: no widths");
  std::vector<AblationRow> rows;
  for (int n : bitwidths) {
    QuantizedModel qm = quantize_model(float_model, QuantConfig{n});
    AblationRow row;
    row.n_bits = n;
    row.stats = run_trials(qm, spec, test_set, seeds, attack_batch_size);
    rows.push_back(std::move(row));
  }
  return rows;
}

struct LayerHistogram {
  std::vector<long long> flips_per_layer;
  long long total = 0;
  double last_layer_fraction = 0.0;
};

inline LayerHistogram layer_histogram(const AttackReport& report) {
  LayerHistogram h;
  h.flips_per_layer = report.per_layer_flips;
  for (long long c : h.flips_per_layer) h.total += c;
  if (h.total > 0 && !h.flips_per_layer.empty())
    h.last_layer_fraction = static_cast<double>(h.flips_per_layer.back()) /
                            static_cast<double>(h.total);
  return h;
}

}  // namespace bflab
