// Acceptance gate: ten numbered behavioral guarantees, each printed as one
// [PASS]/[FAIL] line. Run with no arguments for the full battery or with a
// single number (1..10) for one criterion. Exit status 0 iff every line
// printed PASS. All seeds and thresholds are frozen here, in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <bflab/bflab.hpp>

#include "oracles.hpp"

using namespace bflab;

namespace {

// ---- frozen experiment constants -----------------------------------------
constexpr std::uint64_t kBlobSeed = 7;    // dataset generation
constexpr std::uint64_t kInitSeed = 1;    // weight init + SGD shuffling
constexpr std::uint64_t kSplitSeed = 5;   // attack data split
constexpr int kEpochs = 30;
constexpr int kHidden = 32;
constexpr int kNto1Target = 3;
constexpr int kSource = 2;
constexpr int kTarget = 7;
constexpr double kDensity = 0.3;          // constrained-deployment cell density
constexpr std::uint64_t kProfileSeed = 11;

// ---- result collection ----------------------------------------------------
struct Check {
  std::vector<std::string> failures;
  int extra_failures = 0;

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures.size() < 4)
      failures.push_back(what);
    else
      ++extra_failures;
  }

  template <class T, class U>
  void expect_eq(const T& got, const U& want, const std::string& what) {
    if (got == static_cast<T>(want)) return;
    std::ostringstream os;
    os << what << " (got " << got << ", want " << want << ")";
    expect(false, os.str());
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// ---- shared victim: blobs + trained MLP, built once per process -----------
struct Victim {
  Dataset ds;
  Model float_model;
  QuantizedModel qm;
  double clean_ta = 0.0;  // quantized test accuracy
};

const Victim& victim() {
  static const Victim v = [] {
    Victim x;
    BlobConfig bc;
    bc.seed = kBlobSeed;
    x.ds = make_blobs(bc);
    x.float_model = make_mlp({16}, kHidden, bc.classes);
    init_params(x.float_model, kInitSeed);
    TrainConfig tc;
    tc.epochs = kEpochs;
    tc.seed = kInitSeed;
    train_sgd(x.float_model, x.ds.train, tc);
    x.qm = quantize_model(x.float_model, QuantConfig{8});
    x.clean_ta = accuracy(x.qm.model, x.ds.test);
    return x;
  }();
  return v;
}

std::vector<std::vector<std::int8_t>> code_snapshot(const QuantizedModel& qm) {
  std::vector<std::vector<std::int8_t>> s;
  for (const QuantizedLayer& l : qm.layers) s.push_back(l.codes);
  return s;
}

// Bit-level diff between two snapshots: total differing bits and the
// location of the first difference found.
long long snapshot_diff(const std::vector<std::vector<std::int8_t>>& a,
                        const std::vector<std::vector<std::int8_t>>& b, int n_bits,
                        BitLocation* where = nullptr) {
  long long bits = 0;
  unsigned mask = (1u << n_bits) - 1u;
  for (std::size_t l = 0; l < a.size(); ++l)
    for (std::size_t j = 0; j < a[l].size(); ++j) {
      unsigned x = (static_cast<unsigned>(static_cast<std::uint8_t>(a[l][j])) ^
                    static_cast<unsigned>(static_cast<std::uint8_t>(b[l][j]))) &
                   mask;
      if (x && where && bits == 0) {
        int bp = 0;
        while (!((x >> bp) & 1u)) ++bp;
        *where = BitLocation{static_cast<int>(l), static_cast<long long>(j), bp};
      }
      bits += __builtin_popcount(x);
    }
  return bits;
}

// =============== criterion 1: code encoding bijection ======================
void c1(Check& c) {
  for (int n : {2, 4, 6, 8}) {
    int lo = -(1 << (n - 1)), hi = (1 << (n - 1)) - 1;
    for (int code = lo; code <= hi; ++code) {
      std::vector<int> bits = encode_code(code, n);
      c.expect(static_cast<int>(bits.size()) == n, "encode width wrong at n=" + std::to_string(n));
      int back = decode_bits(bits);
      if (back != code)
        c.expect(false, "decode(encode(" + std::to_string(code) + ")) = " + std::to_string(back) +
                            " at n=" + std::to_string(n));
      // cross-check against the machine's own two's-complement reading
      c.expect(oracles::decode_reinterpret(bits) == code,
               "sign extension mismatch at n=" + std::to_string(n));
    }
  }
}

// =============== criterion 2: quantizer error bound =========================
void c2(Check& c) {
  for (int n : {2, 4, 6, 8}) {
    Rng rng(100 + static_cast<std::uint64_t>(n));
    Tensor w({100, 100});  // 10^4 weights
    for (double& v : w.data) v = rng.uniform(-3.0, 3.0);
    QuantizedLayer q = quantize_layer(w, QuantConfig{n});
    double bound = q.delta_w / 2.0 + 1e-12;
    c.expect(quantization_error_bound(q) == q.delta_w / 2.0, "stated bound is half a step");
    for (std::size_t i = 0; i < w.data.size(); ++i) {
      double err = std::abs(w.data[i] - q.dequant(i));
      if (err > bound) {
        c.expect(false, "error " + fmt(err) + " > " + fmt(bound) + " at n=" + std::to_string(n));
        break;
      }
    }
  }
  // a tiny-magnitude layer obeys the same bound with its own small step
  Rng rng(55);
  Tensor tiny({1, 100});
  for (double& v : tiny.data) v = rng.uniform(-1e-6, 1e-6);
  QuantizedLayer q = quantize_layer(tiny, QuantConfig{8});
  for (std::size_t i = 0; i < tiny.data.size(); ++i)
    c.expect(std::abs(tiny.data[i] - q.dequant(i)) <= q.delta_w / 2.0 + 1e-12,
             "tiny-scale layer breaks the bound");
}

// =============== criterion 3: gradient soundness ============================
void c3(Check& c) {
  Rng rng(42);
  int models = 0;

  auto check_model = [&](Model& m, const Tensor& x, const std::vector<int>& y) {
    ++models;
    Gradients g = backward(m, x, y);
    auto f = [&](const Model& mm) { return cross_entropy(forward(mm, x), y); };
    std::vector<int> slots = m.param_layers();
    for (std::size_t s = 0; s < slots.size(); ++s) {
      std::size_t count = m.layers[static_cast<std::size_t>(slots[s])].weight.data.size();
      for (int k = 0; k < 6; ++k) {
        std::size_t idx = static_cast<std::size_t>(rng.uniform_int(count));
        double fd = oracles::central_fd(m, slots[s], idx, f, 1e-4);
        double an = g.weight[s].data[idx];
        double tol = 1e-3 * std::max(std::abs(an), std::abs(fd)) + 1e-8;
        if (std::abs(an - fd) > tol)
          c.expect(false, "model " + std::to_string(models) + " grad " + fmt(an) +
                              " vs fd " + fmt(fd));
      }
    }
  };

  for (int t = 0; t < 16; ++t) {  // sixteen random MLPs
    int din = 3 + t % 6, hidden = 4 + t % 7, classes = 3 + t % 3;
    Model m = make_mlp({din}, hidden, classes);
    init_params(m, 1000 + static_cast<std::uint64_t>(t));
    int b = 3 + t % 4;
    Tensor x({b, din});
    for (double& v : x.data) v = rng.uniform(-1.0, 1.0);
    std::vector<int> y;
    for (int i = 0; i < b; ++i) y.push_back(static_cast<int>(rng.uniform_int(classes)));
    check_model(m, x, y);
  }
  for (int t = 0; t < 4; ++t) {  // four random CNNs
    int channels = 2 + t % 3, classes = 3 + t % 2;
    Model m = make_cnn({1, 5, 5}, channels, classes);
    init_params(m, 2000 + static_cast<std::uint64_t>(t));
    int b = 2 + t % 3;
    Tensor x({b, 1, 5, 5});
    for (double& v : x.data) v = rng.uniform(-1.0, 1.0);
    std::vector<int> y;
    for (int i = 0; i < b; ++i) y.push_back(static_cast<int>(rng.uniform_int(classes)));
    check_model(m, x, y);
  }
  c.expect_eq(models, 20, "model count");

  // per-bit gradient signs: positive bit weights follow the weight gradient,
  // the sign bit opposes it, exactly
  for (int t = 0; t < 200; ++t) {
    double wg = rng.uniform(-2.0, 2.0);
    if (wg == 0.0) continue;
    double delta = rng.uniform(0.01, 1.0);
    for (int n : {2, 4, 8}) {
      std::vector<double> bg = bit_gradients(wg, delta, n);
      for (int i = 0; i < n - 1; ++i) {
        c.expect((bg[static_cast<std::size_t>(i)] > 0) == (wg > 0), "magnitude-bit sign");
        c.expect(bg[static_cast<std::size_t>(i)] == wg * delta * static_cast<double>(1 << i),
                 "magnitude-bit value");
      }
      c.expect((bg[static_cast<std::size_t>(n - 1)] > 0) == (wg < 0), "sign-bit sign");
      c.expect(bg[static_cast<std::size_t>(n - 1)] == -wg * delta * static_cast<double>(1 << (n - 1)),
               "sign-bit value");
    }
  }
}

// =============== criterion 4: search equals exhaustive oracle ===============
void c4(Check& c) {
  Rng rng(7);
  for (int t = 0; t < 10; ++t) {
    Model m = make_mlp({4}, 5, 3);  // (4*5 + 5*3) weights * 4 bits = 140 bits
    init_params(m, 500 + static_cast<std::uint64_t>(t));
    QuantizedModel qm = quantize_model(m, QuantConfig{4});

    LabeledBatch batch = empty_batch({4});
    for (int i = 0; i < 6; ++i) {
      double row[4];
      for (double& v : row) v = rng.uniform(-1.0, 1.0);
      append_sample(batch, row, 4, static_cast<int>(rng.uniform_int(3)));
    }

    AttackSpec spec;
    bool ascent = t % 2 == 1;
    if (ascent) {
      spec.variant = AttackVariant::untargeted;
      batch.labels = predict_classes(qm.model, batch.inputs);  // start at zero mispredictions
    } else {
      spec.variant = AttackVariant::n_to_1;
      std::vector<int> pred = predict_classes(qm.model, batch.inputs);
      int counts[3] = {0, 0, 0};
      for (int p : pred) ++counts[p];
      spec.target_class = 0;
      for (int k = 1; k < 3; ++k)
        if (counts[k] < counts[spec.target_class]) spec.target_class = k;
    }
    spec.asr_threshold = 1.0;
    spec.max_flips = 3;
    spec.stagnation_iters = 100;

    DataSplit split;
    split.attack_batch = batch;
    split.asr_eval = batch;
    split.ta_eval = batch;

    FlipDirection dir = ascent ? FlipDirection::ascent : FlipDirection::descent;
    int iters = 0;
    AttackObserver obs = [&](const IterationView& v) {
      ++iters;
      for (const LayerCandidate& cand : v.candidates) {
        auto oracle = oracles::best_bit_oracle(
            v.model, cand.layer, v.grads.weight[static_cast<std::size_t>(cand.layer)], dir);
        if (!oracle) {
          c.expect(false, "oracle finds no admissible bit where the search found one");
          continue;
        }
        c.expect(oracle->location == cand.record.location,
                 "layer " + std::to_string(cand.layer) + " picked a different bit than the oracle");
        c.expect(oracle->new_bit == cand.record.new_bit, "flip direction differs from oracle");
      }
      for (const LayerCandidate& cand : v.candidates)
        c.expect(dir == FlipDirection::descent ? v.winner.profiled_loss <= cand.profiled_loss
                                               : v.winner.profiled_loss >= cand.profiled_loss,
                 "winner's profiled loss is not the best across layers");
    };
    run_attack(qm, spec, split, obs);
    c.expect(iters >= 1, "model " + std::to_string(t) + " ran zero search iterations");
  }
}

// =============== criterion 5: one committed flip per iteration ==============
void c5(Check& c) {
  const Victim& v = victim();

  struct RunCfg {
    AttackVariant variant;
    int target;
    int candidates;
    std::uint64_t seed;
  };
  std::vector<RunCfg> runs = {{AttackVariant::n_to_1, kNto1Target, 3, kSplitSeed},
                              {AttackVariant::n_to_1, kTarget, 1, kSplitSeed + 1},
                              {AttackVariant::untargeted, -1, 2, kSplitSeed + 2}};

  for (const RunCfg& rc : runs) {
    AttackSpec spec;
    spec.variant = rc.variant;
    spec.target_class = rc.target;
    spec.asr_threshold = 1.0;  // out of reach: forces a full run of iterations
    spec.max_flips = 8;
    spec.stagnation_iters = 100;
    spec.candidates_per_layer = rc.candidates;
    DataSplit split = split_data(v.ds.test, spec.variant, -1, rc.target, rc.seed, 128);

    QuantizedModel qm = v.qm;
    std::vector<std::vector<std::vector<std::int8_t>>> snaps;
    std::vector<BitFlipRecord> winners;
    AttackObserver obs = [&](const IterationView& view) {
      snaps.push_back(code_snapshot(view.model));
      winners.push_back(view.winner.record);
    };
    AttackReport rep = run_attack(qm, spec, split, obs);
    snaps.push_back(code_snapshot(qm));

    c.expect_eq(winners.size(), rep.flips.size(), "observer iterations vs committed flips");
    for (std::size_t i = 0; i + 1 < snaps.size(); ++i) {
      BitLocation where;
      long long d = snapshot_diff(snaps[i], snaps[i + 1], qm.n_bits(), &where);
      if (d != 1)
        c.expect(false, "iteration " + std::to_string(i + 1) + " changed " + std::to_string(d) +
                            " bits");
      else
        c.expect(where == winners[i].location,
                 "iteration " + std::to_string(i + 1) + " changed a non-winner bit");
    }
    // the full run's footprint is the flip count (no hidden edits anywhere)
    BitLocation unused;
    c.expect_eq(snapshot_diff(snaps.front(), snaps.back(), qm.n_bits(), &unused),
                static_cast<long long>(rep.flips.size()), "total footprint vs flip count");
  }
}

// =============== criterion 6: desk-scale attack efficacy ====================
void c6(Check& c) {
  const Victim& v = victim();
  c.expect(v.clean_ta >= 0.95, "clean quantized accuracy " + fmt(v.clean_ta) + " < 0.95");

  {  // everything -> one target: ASR >= 0.99 within <= 50 flips
    AttackSpec spec;
    spec.variant = AttackVariant::n_to_1;
    spec.target_class = kNto1Target;
    spec.asr_threshold = 0.99;
    spec.max_flips = 50;
    spec.stagnation_iters = 50;
    DataSplit split = split_data(v.ds.test, spec.variant, -1, spec.target_class, kSplitSeed, 128);
    QuantizedModel qm = v.qm;
    AttackReport rep = run_attack(qm, spec, split);
    c.expect(rep.achieved && rep.asr >= 0.99,
             "n-to-1 asr " + fmt(rep.asr) + " (" + rep.termination + ")");
    c.expect(rep.flips.size() <= 50, "n-to-1 used " + std::to_string(rep.flips.size()) + " flips");
  }
  {  // one source -> one target: perfect held-out ASR within <= 25 flips
    AttackSpec spec;
    spec.variant = AttackVariant::one_to_1;
    spec.source_class = kSource;
    spec.target_class = kTarget;
    spec.asr_threshold = 1.0;
    spec.max_flips = 25;
    spec.stagnation_iters = 25;
    DataSplit split =
        split_data(v.ds.test, spec.variant, spec.source_class, spec.target_class, kSplitSeed, 128);
    QuantizedModel qm = v.qm;
    AttackReport rep = run_attack(qm, spec, split);
    c.expect(rep.achieved && rep.asr == 1.0,
             "1-to-1 held-out asr " + fmt(rep.asr) + " (" + rep.termination + ")");
    c.expect(rep.flips.size() <= 25, "1-to-1 used " + std::to_string(rep.flips.size()) + " flips");
  }
  {  // stealthy: ASR >= 0.90, accuracy on the rest drops <= 0.20, <= 60 flips
    AttackSpec spec;
    spec.variant = AttackVariant::one_to_1_stealthy;
    spec.source_class = kSource;
    spec.target_class = kTarget;
    spec.asr_threshold = 0.90;
    spec.max_flips = 60;
    spec.stagnation_iters = 60;
    DataSplit split =
        split_data(v.ds.test, spec.variant, spec.source_class, spec.target_class, kSplitSeed, 128);
    double clean_rest = evaluate_ta(v.qm, split.ta_eval);
    QuantizedModel qm = v.qm;
    AttackReport rep = run_attack(qm, spec, split);
    c.expect(rep.achieved && rep.asr >= 0.90,
             "stealthy asr " + fmt(rep.asr) + " (" + rep.termination + ")");
    c.expect(rep.flips.size() <= 60, "stealthy used " + std::to_string(rep.flips.size()) + " flips");
    c.expect(clean_rest - rep.post_attack_ta <= 0.20,
             "stealthy accuracy drop " + fmt(clean_rest - rep.post_attack_ta) + " > 0.20");
  }
}

// ======= criterion 7: single-source runs cost no more than all-source =======
void c7(Check& c) {
  const Victim& v = victim();
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

  AttackSpec all;
  all.variant = AttackVariant::n_to_1;
  all.target_class = kTarget;
  all.asr_threshold = 0.99;
  all.max_flips = 50;
  all.stagnation_iters = 50;

  AttackSpec one = all;
  one.variant = AttackVariant::one_to_1;
  one.source_class = kSource;

  TrialStats stats_all = run_trials(v.qm, all, v.ds.test, seeds);
  TrialStats stats_one = run_trials(v.qm, one, v.ds.test, seeds);
  c.expect(stats_one.mean_flips <= stats_all.mean_flips,
           "mean flips: single-source " + fmt(stats_one.mean_flips) + " vs all-source " +
               fmt(stats_all.mean_flips));
  c.expect(stats_one.achieved_count == 5,
           "single-source achieved only " + std::to_string(stats_one.achieved_count) + "/5");
}

// ========= criterion 8: stealthy flips concentrate in the final layer =======
void c8(Check& c) {
  const Victim& v = victim();
  AttackSpec spec;
  spec.variant = AttackVariant::one_to_1_stealthy;
  spec.source_class = kSource;
  spec.target_class = kTarget;
  spec.asr_threshold = 0.90;
  spec.max_flips = 60;
  spec.stagnation_iters = 60;
  DataSplit split =
      split_data(v.ds.test, spec.variant, spec.source_class, spec.target_class, kSplitSeed, 128);

  {
    QuantizedModel qm = v.qm;
    AttackReport rep = run_attack(qm, spec, split);
    LayerHistogram h = layer_histogram(rep);
    c.expect(h.total > 0, "no flips committed");
    c.expect(h.last_layer_fraction >= 0.70,
             "final-layer fraction " + fmt(h.last_layer_fraction) + " < 0.70");
  }
  {  // with the final layer off limits, a verdict still arrives and it is clean
    AttackSpec guarded = spec;
    guarded.protect_last_layer = true;
    QuantizedModel qm = v.qm;
    AttackReport rep = run_attack(qm, guarded, split);
    c.expect(!rep.termination.empty(), "no termination verdict under protection");
    c.expect(!rep.per_layer_flips.empty() && rep.per_layer_flips.back() == 0,
             "protected final layer was flipped anyway");
  }
}

// =============== criterion 9: memory-constrained deployment =================
void c9(Check& c) {
  const Victim& v = victim();
  AttackSpec spec;
  spec.variant = AttackVariant::n_to_1;
  spec.target_class = kNto1Target;
  spec.asr_threshold = 0.99;
  spec.max_flips = 50;
  spec.stagnation_iters = 50;
  DataSplit split = split_data(v.ds.test, spec.variant, -1, spec.target_class, kSplitSeed, 128);

  {  // a fully flippable memory reproduces the unconstrained attack exactly
    QuantizedModel constrained = v.qm;
    auto [rep, dep] = deploy_with_research(constrained, spec, split, make_profile(1.0, 99), 16);
    QuantizedModel free_run = v.qm;
    AttackReport unconstrained = run_attack(free_run, spec, split);
    c.expect(dep.deployed, "full-density deployment failed");
    c.expect_eq(dep.rounds, 1, "full-density rounds");
    c.expect_eq(dep.extra_flips_used, 0, "full-density extra flips");
    c.expect_eq(dep.baseline_flips, static_cast<long long>(unconstrained.flips.size()),
                "baseline flip count");
    bool same_chain = rep.flips.size() == unconstrained.flips.size();
    for (std::size_t i = 0; same_chain && i < rep.flips.size(); ++i)
      same_chain = rep.flips[i].location == unconstrained.flips[i].location &&
                   rep.flips[i].old_bit == unconstrained.flips[i].old_bit &&
                   rep.flips[i].new_bit == unconstrained.flips[i].new_bit;
    c.expect(same_chain, "full-density flip chain differs from the unconstrained one");
    for (std::size_t l = 0; l < constrained.layers.size(); ++l)
      c.expect(constrained.layers[l].codes == free_run.layers[l].codes,
               "post-attack codes differ at layer " + std::to_string(l));
  }
  {  // sparse profile: rerouted attack still lands, every flip is realizable.
    // Freezing blocks the best bits first, so the constrained run gets a
    // larger flip budget and enough research rounds to fence off the dead
    // cells it keeps rediscovering.
    AttackSpec sparse = spec;
    sparse.max_flips = 200;
    FlipProfile profile = make_profile(kDensity, kProfileSeed);
    QuantizedModel qm = v.qm;
    auto [rep, dep] = deploy_with_research(qm, sparse, split, profile, 64);
    c.expect(dep.deployed && rep.achieved && rep.asr >= 0.99,
             "sparse-profile deployment failed (" + rep.termination + ", rounds " +
                 std::to_string(dep.rounds) + ")");
    for (const BitFlipRecord& rec : dep.realized)
      if (!feasible(qm, rec, profile)) {
        c.expect(false, "a realized flip is not feasible under the profile");
        break;
      }
    c.expect_eq(dep.extra_flips_used,
                static_cast<long long>(dep.realized.size()) - dep.baseline_flips,
                "extra-flip accounting");
    c.expect(dep.extra_flips_used >= 0, "constrained run used fewer flips than baseline");
    c.expect(dep.rounds >= 1 && dep.rounds <= 64, "round count out of range");
  }
  {  // address arithmetic at the page boundaries
    QuantizedModel geo;
    geo.model.input_shape = {1};
    geo.model.layers.push_back(make_dense(1, 4096, false));
    geo.model.layers.push_back(make_dense(1, 1000, false));
    geo.param_index = {0, 1};
    for (int li : geo.param_index) {
      QuantizedLayer l;
      l.codes.assign(geo.model.layers[static_cast<std::size_t>(li)].weight.data.size(), 0);
      l.shape = geo.model.layers[static_cast<std::size_t>(li)].weight.shape;
      l.n_bits = 8;
      geo.layers.push_back(l);
    }
    c.expect(layout(geo, {0, 0, 0}) == (PhysicalAddress{0, 0}), "first bit address");
    c.expect(layout(geo, {0, 4095, 7}) == (PhysicalAddress{0, 32767}), "last bit of page 0");
    c.expect(layout(geo, {1, 0, 0}) == (PhysicalAddress{1, 0}), "first bit of page 1");
    c.expect(layout(geo, {1, 904, 3}) == (PhysicalAddress{1, 904 * 8 + 3}), "mid-page address");
    Rng rng(3);
    for (int t = 0; t < 500; ++t) {
      BitLocation loc{static_cast<int>(rng.uniform_int(2)), 0, static_cast<int>(rng.uniform_int(8))};
      loc.weight_index = static_cast<long long>(
          rng.uniform_int(geo.layers[static_cast<std::size_t>(loc.layer)].size()));
      PhysicalAddress a = layout(geo, loc);
      c.expect(a.bit_offset >= 0 && a.bit_offset <= 32767, "bit offset out of range");
    }
  }
}

// =============== criterion 10: data split protocol ==========================
void c10(Check& c) {
  auto tagged = [](int classes, int per_class) {
    LabeledBatch b = empty_batch({1});
    double id = 0.0;
    for (int cl = 0; cl < classes; ++cl)
      for (int s = 0; s < per_class; ++s, id += 1.0) append_sample(b, &id, 1, cl);
    return b;
  };
  auto ids = [](const LabeledBatch& b) {
    return std::set<double>(b.inputs.data.begin(), b.inputs.data.end());
  };
  auto disjoint = [](const std::set<double>& a, const std::set<double>& b) {
    for (double v : a)
      if (b.count(v)) return false;
    return true;
  };

  {  // 10 classes x 1000 samples, single-source split: 500 / 500 / 9000
    LabeledBatch test = tagged(10, 1000);
    DataSplit s = split_data(test, AttackVariant::one_to_1, 4, kTarget, 3);
    c.expect_eq(s.attack_batch.size(), 500, "attack batch size");
    c.expect_eq(s.asr_eval.size(), 500, "success eval size");
    c.expect_eq(s.ta_eval.size(), 9000, "accuracy eval size");
    c.expect(disjoint(ids(s.attack_batch), ids(s.asr_eval)), "attack/success sets overlap");
    for (int l : s.attack_batch.labels)
      if (l != 4) {
        c.expect(false, "non-source sample in the attack batch");
        break;
      }
    for (int l : s.ta_eval.labels)
      if (l == 4) {
        c.expect(false, "source sample in the accuracy eval");
        break;
      }
  }
  {  // 1000 classes x 50 samples: 25 / 25 / 49950 (all 49950 non-source rows)
    LabeledBatch test = tagged(1000, 50);
    DataSplit s = split_data(test, AttackVariant::one_to_1, 123, 456, 3);
    c.expect_eq(s.attack_batch.size(), 25, "attack batch size (large set)");
    c.expect_eq(s.asr_eval.size(), 25, "success eval size (large set)");
    c.expect_eq(s.ta_eval.size(), 49950, "accuracy eval size (large set)");
    c.expect(disjoint(ids(s.attack_batch), ids(s.asr_eval)), "attack/success overlap (large set)");
  }
  {  // stealthy split keeps its auxiliary batch out of the accuracy eval
    LabeledBatch test = tagged(10, 1000);
    DataSplit s = split_data(test, AttackVariant::one_to_1_stealthy, 4, kTarget, 3);
    c.expect_eq(s.attack_batch.size(), 1000, "stealthy batch size");
    c.expect_eq(s.asr_eval.size(), 500, "stealthy success eval size");
    c.expect_eq(s.ta_eval.size(), 8500, "stealthy accuracy eval size");
    std::set<double> batch = ids(s.attack_batch);
    c.expect(disjoint(batch, ids(s.asr_eval)), "stealthy batch leaks into success eval");
    c.expect(disjoint(batch, ids(s.ta_eval)), "stealthy batch leaks into accuracy eval");
    for (int l : s.ta_eval.labels)
      if (l == 4) {
        c.expect(false, "source sample in stealthy accuracy eval");
        break;
      }
  }
  {  // seeded reproducibility
    LabeledBatch test = tagged(10, 100);
    DataSplit a = split_data(test, AttackVariant::one_to_1, 1, 2, 17);
    DataSplit b = split_data(test, AttackVariant::one_to_1, 1, 2, 17);
    c.expect(a.attack_batch.inputs.data == b.attack_batch.inputs.data &&
                 a.ta_eval.inputs.data == b.ta_eval.inputs.data,
             "same seed produced different splits");
  }
}

// ---------------------------------------------------------------------------
struct Criterion {
  int id;
  const char* label;
  double budget_s;  // <= 0: no runtime requirement
  void (*fn)(Check&);
};

const Criterion kCriteria[] = {
    {1, "two's-complement codec is a bijection at widths 2/4/6/8", 1.0, c1},
    {2, "dequantized weights sit within half a step of the originals", 1.0, c2},
    {3, "weight gradients match finite differences; bit gradients keep exact signs", 30.0, c3},
    {4, "greedy search picks the oracle's bit and the best profiled loss", 120.0, c4},
    {5, "each iteration commits exactly one bit and restores the rest", 120.0, c5},
    {6, "desk-scale attacks reach their targets inside the flip budgets", 300.0, c6},
    {7, "single-source attacks need no more flips than all-source ones", 600.0, c7},
    {8, "stealthy flips concentrate in the final layer; protection holds", 600.0, c8},
    {9, "deployment matches the free attack at density 1 and reroutes at 0.3", 300.0, c9},
    {10, "splits produce the documented counts and stay disjoint", 60.0, c10},
};

bool run_one(const Criterion& cr) {
  auto t0 = std::chrono::steady_clock::now();
  Check c;
  cr.fn(c);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (cr.budget_s > 0 && secs > cr.budget_s)
    c.expect(false, "runtime " + fmt(secs) + "s over the " + fmt(cr.budget_s) + "s budget");

  bool ok = c.failures.empty() && c.extra_failures == 0;
  std::ostringstream line;
  line << (ok ? "[PASS]" : "[FAIL]") << " criterion " << cr.id << ": " << cr.label;
  if (!ok) {
    line << " —";
    for (std::size_t i = 0; i < c.failures.size(); ++i)
      line << (i ? "; " : " ") << c.failures[i];
    if (c.extra_failures > 0) line << "; +" << c.extra_failures << " more";
  }
  std::printf("%s (%.1fs)\n", line.str().c_str(), secs);
  std::fflush(stdout);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > 10) {
      std::fprintf(stderr, "usage: %s [criterion 1..10]\n", argv[0]);
      return 2;
    }
  }
  bool all_ok = true;
  for (const Criterion& cr : kCriteria) {
    if (only && cr.id != only) continue;
    if (!run_one(cr)) all_ok = false;
  }
  return all_ok ? 0 : 1;
}
