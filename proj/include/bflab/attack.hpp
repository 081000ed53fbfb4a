#pragma once

// Progressive single-bit search. Each iteration takes one gradient pass,
// ranks bits inside every eligible layer by gradient magnitude, profiles the
// leading candidates by actually flipping them, and commits the one flip
// that moves the objective furthest.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bflab/bitspace.hpp"
#include "bflab/metrics.hpp"

namespace bflab {

struct AttackSpec {
  AttackVariant variant = AttackVariant::n_to_1;
  int source_class = -1;  // p; only 1-to-1 variants use it
  int target_class = -1;  // q; unused when untargeted
  double asr_threshold = 0.9999;
  int stagnation_iters = 3;
  int max_flips = 1000;
  int candidates_per_layer = 1;
  std::set<BitLocation> frozen;  // bits the search must not touch
  bool protect_last_layer = false;

  void validate(int num_classes) const {
    if (!(asr_threshold > 0.0 && asr_threshold <= 1.0))
      throw std::invalid_argument("asr_threshold must be in (0,1]");
    if (stagnation_iters < 1) throw std::invalid_argument("stagnation_iters must be >= 1");
    if (max_flips < 1) throw std::invalid_argument("max_flips must be >= 1");
    if (candidates_per_layer < 1)
      throw std::invalid_argument("candidates_per_layer must be >= 1");
    auto check_class = [&](int c, const char* what) {
      if (c < 0 || c >= num_classes)
        throw std::invalid_argument(std::string(what) + " class out of range");
    };
    switch (variant) {
      case AttackVariant::n_to_1:
        check_class(target_class, "target");
        break;
      case AttackVariant::one_to_1:
      case AttackVariant::one_to_1_stealthy:
        check_class(source_class, "source");
        check_class(target_class, "target");
        if (source_class == target_class)
          throw std::invalid_argument("source and target class must differ");
        break;
      case AttackVariant::untargeted:
        break;
    }
  }
};

// The objective one attack run optimizes, expressed as mean cross-entropy
// against per-sample effective labels.
struct LossSpec {
  AttackVariant variant = AttackVariant::n_to_1;
  int source_class = -1;
  int target_class = -1;

  FlipDirection direction() const {
    return variant == AttackVariant::untargeted ? FlipDirection::ascent : FlipDirection::descent;
  }

  std::vector<int> effective_labels(const LabeledBatch& batch) const {
    std::vector<int> labels(batch.labels.size());
    for (std::size_t i = 0; i < batch.labels.size(); ++i) {
      switch (variant) {
        case AttackVariant::n_to_1:
        case AttackVariant::one_to_1:
          labels[i] = target_class;
          break;
        case AttackVariant::one_to_1_stealthy:
          labels[i] = batch.labels[i] == source_class ? target_class : batch.labels[i];
          break;
        case AttackVariant::untargeted:
          labels[i] = batch.labels[i];
          break;
      }
    }
    return labels;
  }

  double evaluate(const Model& m, const LabeledBatch& batch) const {
    return cross_entropy(forward(m, batch.inputs), effective_labels(batch));
  }
};

inline LossSpec loss_for(const AttackSpec& spec) {
  return LossSpec{spec.variant, spec.source_class, spec.target_class};
}

// Steer every sample to class q.
inline double loss_n_to_1(const Model& m, const LabeledBatch& batch, int q) {
  return LossSpec{AttackVariant::n_to_1, -1, q}.evaluate(m, batch);
}

// Steer class-p samples to class q (the batch is all class p).
inline double loss_1_to_1(const Model& m, const LabeledBatch& batch, int p, int q) {
  return LossSpec{AttackVariant::one_to_1, p, q}.evaluate(m, batch);
}

// Steer class-p samples to q while pinning everything else to its own label.
inline double loss_1_to_1_stealthy(const Model& m, const LabeledBatch& batch, int p, int q) {
  return LossSpec{AttackVariant::one_to_1_stealthy, p, q}.evaluate(m, batch);
}

// Push samples away from their true labels.
inline double loss_untargeted(const Model& m, const LabeledBatch& batch) {
  return LossSpec{AttackVariant::untargeted, -1, -1}.evaluate(m, batch);
}

struct LayerCandidate {
  BitFlipRecord record;
  double profiled_loss = 0.0;  // objective with just this flip applied
  int layer = 0;
};

namespace detail {

struct RankedBit {
  double magnitude;
  long long weight_index;
  int bit_pos;
  int new_bit;
  double grad;
};

}  // namespace detail

// Best admissible flip inside one layer: bits ranked by gradient magnitude,
// the top `candidates` profiled one at a time, the lowest-loss (descent) or
// highest-loss (ascent) survivor returned. The model is restored before
// returning. Empty optional when no bit in the layer can move.
inline std::optional<LayerCandidate> intra_layer_search(
    QuantizedModel& qm, int qlayer, const LossSpec& loss, const LabeledBatch& attack_batch,
    const Tensor& weight_grads, int candidates, const std::set<BitLocation>& frozen) {
  const QuantizedLayer& q = qm.layers[static_cast<std::size_t>(qlayer)];
  FlipDirection dir = loss.direction();

  std::vector<detail::RankedBit> ranked;
  for (long long j = 0; j < static_cast<long long>(q.size()); ++j) {
    double wg = weight_grads.data[static_cast<std::size_t>(j)];
    if (wg == 0.0) continue;
    std::vector<double> bg = bit_gradients(wg, q.delta_w, q.n_bits);
    std::uint8_t raw = static_cast<std::uint8_t>(q.codes[static_cast<std::size_t>(j)]);
    for (int bp = 0; bp < q.n_bits; ++bp) {
      if (frozen.count(BitLocation{qlayer, j, bp})) continue;
      int bit = (raw >> bp) & 1;
      std::optional<int> moved = admissible_flip(bit, bg[static_cast<std::size_t>(bp)], dir);
      if (!moved) continue;
      ranked.push_back({std::abs(bg[static_cast<std::size_t>(bp)]), j, bp, *moved,
                        bg[static_cast<std::size_t>(bp)]});
    }
  }
  if (ranked.empty()) return std::nullopt;

  std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(candidates), ranked.size());
  auto better_rank = [](const detail::RankedBit& a, const detail::RankedBit& b) {
    if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
    if (a.weight_index != b.weight_index) return a.weight_index < b.weight_index;
    return a.bit_pos < b.bit_pos;
  };
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep),
                    ranked.end(), better_rank);

  std::optional<LayerCandidate> best;
  for (std::size_t k = 0; k < keep; ++k) {
    const detail::RankedBit& rb = ranked[k];
    BitFlipRecord rec;
    rec.location = BitLocation{qlayer, rb.weight_index, rb.bit_pos};
    rec.old_bit = 1 - rb.new_bit;
    rec.new_bit = rb.new_bit;
    rec.selection_gradient = rb.grad;
    apply_flip(qm, rec);
    double l = loss.evaluate(qm.model, attack_batch);
    revert_flip(qm, rec);

    bool take = false;
    if (!best) {
      take = true;
    } else if (l != best->profiled_loss) {
      take = dir == FlipDirection::descent ? l < best->profiled_loss : l > best->profiled_loss;
    } else {
      take = rec.location < best->record.location;
    }
    if (take) best = LayerCandidate{rec, l, qlayer};
  }
  return best;
}

// One flip across layers: the candidate with the best profiled objective,
// ties to the lowest layer index.
inline const LayerCandidate& inter_layer_select(const std::vector<LayerCandidate>& candidates,
                                                FlipDirection dir) {
  if (candidates.empty()) throw std::invalid_argument("inter_layer_select: no candidates");
  const LayerCandidate* best = &candidates.front();
  for (const LayerCandidate& c : candidates) {
    bool take;
    if (c.profiled_loss != best->profiled_loss)
      take = dir == FlipDirection::descent ? c.profiled_loss < best->profiled_loss
                                           : c.profiled_loss > best->profiled_loss;
    else
      take = c.layer < best->layer;
    if (take && &c != best) best = &c;
  }
  return *best;
}

struct AttackReport {
  AttackVariant variant = AttackVariant::n_to_1;
  int source_class = -1;
  int target_class = -1;
  std::vector<BitFlipRecord> flips;
  std::vector<double> loss_trace;  // objective after each committed flip
  std::vector<double> asr_trace;   // success rate after each committed flip
  double initial_asr = 0.0;
  double asr = 0.0;
  double post_attack_ta = 0.0;
  long long hamming = 0;  // bits differing from the pristine model
  bool achieved = false;
  std::string termination;  // asr_threshold | stagnation | max_flips | exhausted | infeasible
  std::vector<long long> per_layer_flips;
  int num_qlayers = 0;
};

// Snapshot handed to the observer after selection, before the flip commits.
struct IterationView {
  int iteration;
  const QuantizedModel& model;  // pre-flip state
  const Gradients& grads;
  const std::vector<LayerCandidate>& candidates;
  const LayerCandidate& winner;
};

using AttackObserver = std::function<void(const IterationView&)>;

// Runs the search in place: `qm` ends in the post-attack state. Exactly one
// bit flips per committed iteration.
inline AttackReport run_attack(QuantizedModel& qm, const AttackSpec& spec, const DataSplit& split,
                               const AttackObserver& observer = {}) {
  spec.validate(qm.model.num_classes());
  if (split.attack_batch.empty()) throw std::invalid_argument("run_attack: empty attack batch");
  if (split.asr_eval.empty()) throw std::invalid_argument("run_attack: empty asr eval set");

  const QuantizedModel pristine = qm;
  LossSpec loss = loss_for(spec);
  FlipDirection dir = loss.direction();

  AttackReport rep;
  rep.variant = spec.variant;
  rep.source_class = spec.source_class;
  rep.target_class = spec.target_class;
  rep.num_qlayers = static_cast<int>(qm.layers.size());
  rep.per_layer_flips.assign(qm.layers.size(), 0);

  double asr = evaluate_asr(qm, split.asr_eval, spec.variant, spec.target_class);
  rep.initial_asr = asr;
  int stagnant = 0;

  if (asr >= spec.asr_threshold) {
    rep.asr = asr;
    rep.achieved = true;
    rep.termination = "asr_threshold";
  } else {
    while (true) {
      if (static_cast<int>(rep.flips.size()) >= spec.max_flips) {
        rep.termination = "max_flips";
        break;
      }
      Gradients grads =
          backward(qm.model, split.attack_batch.inputs, loss.effective_labels(split.attack_batch));

      std::vector<LayerCandidate> candidates;
      int last = static_cast<int>(qm.layers.size()) - 1;
      for (int ql = 0; ql < static_cast<int>(qm.layers.size()); ++ql) {
        if (spec.protect_last_layer && ql == last) continue;
        std::optional<LayerCandidate> c =
            intra_layer_search(qm, ql, loss, split.attack_batch,
                               grads.weight[static_cast<std::size_t>(ql)],
                               spec.candidates_per_layer, spec.frozen);
        if (c) candidates.push_back(std::move(*c));
      }
      if (candidates.empty()) {
        rep.termination = "exhausted";
        break;
      }
      LayerCandidate winner = inter_layer_select(candidates, dir);
      winner.record.iteration = static_cast<int>(rep.flips.size()) + 1;

      if (observer)
        observer(IterationView{winner.record.iteration, qm, grads, candidates, winner});

      apply_flip(qm, winner.record);
      rep.flips.push_back(winner.record);
      rep.per_layer_flips[static_cast<std::size_t>(winner.layer)] += 1;
      rep.loss_trace.push_back(winner.profiled_loss);

      double next_asr = evaluate_asr(qm, split.asr_eval, spec.variant, spec.target_class);
      rep.asr_trace.push_back(next_asr);
      if (next_asr == asr)
        ++stagnant;
      else
        stagnant = 0;
      asr = next_asr;

      if (asr >= spec.asr_threshold) {
        rep.achieved = true;
        rep.termination = "asr_threshold";
        break;
      }
      if (stagnant >= spec.stagnation_iters) {
        rep.termination = "stagnation";
        break;
      }
    }
    rep.asr = asr;
  }

  rep.post_attack_ta = split.ta_eval.empty() ? 0.0 : evaluate_ta(qm, split.ta_eval);
  rep.hamming = hamming_distance(pristine, qm);
  return rep;
}

}  // namespace bflab
