#pragma once

// Attack variants, data splits, and the two headline metrics: attack success
// rate on the relevant eval set and clean top-1 accuracy on the rest.

#include <stdexcept>
#include <string>
#include <vector>

#include "bflab/data.hpp"
#include "bflab/quantize.hpp"

namespace bflab {

enum class AttackVariant { n_to_1, one_to_1, one_to_1_stealthy, untargeted };

inline const char* variant_name(AttackVariant v) {
  switch (v) {
    case AttackVariant::n_to_1: return "n-to-1";
    case AttackVariant::one_to_1: return "1-to-1";
    case AttackVariant::one_to_1_stealthy: return "1-to-1-stealthy";
    case AttackVariant::untargeted: return "untargeted";
  }
  return "?";
}

inline AttackVariant variant_from_name(const std::string& s) {
  if (s == "n-to-1") return AttackVariant::n_to_1;
  if (s == "1-to-1") return AttackVariant::one_to_1;
  if (s == "1-to-1-stealthy") return AttackVariant::one_to_1_stealthy;
  if (s == "untargeted") return AttackVariant::untargeted;
  throw std::invalid_argument("unknown attack variant: " + s);
}

inline bool variant_is_targeted(AttackVariant v) { return v != AttackVariant::untargeted; }

// The three roles a sample can play in one run: steering the search,
// scoring success, and scoring collateral accuracy.
struct DataSplit {
  LabeledBatch attack_batch;  // drives gradient and profiling decisions
  LabeledBatch asr_eval;      // held out, scores the attack objective
  LabeledBatch ta_eval;       // held out, scores remaining clean accuracy
};

// Success rate of the attack objective on an eval set. Targeted variants
// count predictions landing on the target class; the untargeted variant
// counts any misclassification.
inline double evaluate_asr(const QuantizedModel& qm, const LabeledBatch& eval, AttackVariant v,
                           int target) {
  if (eval.empty()) throw std::invalid_argument("evaluate_asr: empty eval set");
  std::vector<int> pred = predict_classes(qm.model, eval.inputs);
  int hits = 0;
  for (int i = 0; i < eval.size(); ++i) {
    if (variant_is_targeted(v)) {
      if (pred[static_cast<std::size_t>(i)] == target) ++hits;
    } else {
      if (pred[static_cast<std::size_t>(i)] != eval.labels[static_cast<std::size_t>(i)]) ++hits;
    }
  }
  return static_cast<double>(hits) / eval.size();
}

// Top-1 accuracy against true labels.
inline double evaluate_ta(const QuantizedModel& qm, const LabeledBatch& eval) {
  if (eval.empty()) throw std::invalid_argument("evaluate_ta: empty eval set");
  std::vector<int> pred = predict_classes(qm.model, eval.inputs);
  int hits = 0;
  for (int i = 0; i < eval.size(); ++i)
    if (pred[static_cast<std::size_t>(i)] == eval.labels[static_cast<std::size_t>(i)]) ++hits;
  return static_cast<double>(hits) / eval.size();
}

}  // namespace bflab
