// bflab command-line driver: train -> quantize -> attack -> simulate ->
// ablate -> report. Every mutating run writes a manifest next to its
// outputs. Exit codes: 0 success/achieved, 1 attack not achieved,
// 2 usage or config error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <bflab/bflab.hpp>

namespace fs = std::filesystem;
using bflab::json;

namespace {

struct DataOptions {
  std::string source = "blobs";
  int classes = 10;
  std::vector<int> shape = {16};
  int train_per_class = 200;
  int test_per_class = 100;
  double spread = 0.30;
  std::uint64_t data_seed = 7;
  std::string idx_train_images, idx_train_labels;
  std::string idx_test_images, idx_test_labels;
};

void add_data_options(CLI::App* sub, DataOptions& d) {
  sub->add_option("--data", d.source, "dataset kind: blobs or idx")
      ->check(CLI::IsMember({"blobs", "idx"}));
  sub->add_option("--classes", d.classes, "blob class count");
  sub->add_option("--shape", d.shape, "blob sample shape, comma separated")->delimiter(',');
  sub->add_option("--train-per-class", d.train_per_class, "blob training samples per class");
  sub->add_option("--test-per-class", d.test_per_class, "blob test samples per class");
  sub->add_option("--spread", d.spread, "blob cluster spread");
  sub->add_option("--data-seed", d.data_seed, "dataset generation seed");
  sub->add_option("--idx-train-images", d.idx_train_images, "IDX training image file");
  sub->add_option("--idx-train-labels", d.idx_train_labels, "IDX training label file");
  sub->add_option("--idx-test-images", d.idx_test_images, "IDX test image file");
  sub->add_option("--idx-test-labels", d.idx_test_labels, "IDX test label file");
}

json data_config(const DataOptions& d) {
  json j{{"data", d.source}};
  if (d.source == "blobs") {
    j["classes"] = d.classes;
    j["shape"] = d.shape;
    j["train-per-class"] = d.train_per_class;
    j["test-per-class"] = d.test_per_class;
    j["spread"] = d.spread;
    j["data-seed"] = d.data_seed;
  } else {
    j["idx-train-images"] = d.idx_train_images;
    j["idx-train-labels"] = d.idx_train_labels;
    j["idx-test-images"] = d.idx_test_images;
    j["idx-test-labels"] = d.idx_test_labels;
  }
  return j;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw std::invalid_argument(std::string(what) + " path missing");
  if (!fs::exists(path)) throw std::invalid_argument(std::string(what) + " not found: " + path);
}

bflab::Dataset load_dataset(const DataOptions& d) {
  if (d.source == "blobs") {
    bflab::BlobConfig cfg;
    cfg.classes = d.classes;
    cfg.sample_shape = d.shape;
    cfg.train_per_class = d.train_per_class;
    cfg.test_per_class = d.test_per_class;
    cfg.spread = d.spread;
    cfg.seed = d.data_seed;
    return bflab::make_blobs(cfg);
  }
  require_file(d.idx_train_images, "--idx-train-images");
  require_file(d.idx_train_labels, "--idx-train-labels");
  require_file(d.idx_test_images, "--idx-test-images");
  require_file(d.idx_test_labels, "--idx-test-labels");
  bflab::Dataset ds;
  ds.train = bflab::load_idx(d.idx_train_images, d.idx_train_labels);
  ds.test = bflab::load_idx(d.idx_test_images, d.idx_test_labels);
  int mx = 0;
  for (int l : ds.train.labels) mx = std::max(mx, l);
  for (int l : ds.test.labels) mx = std::max(mx, l);
  ds.classes = mx + 1;
  return ds;
}

struct AttackOptions {
  std::string model;
  std::string variant = "n-to-1";
  int source = -1;
  int target = 0;
  double asr_threshold = 0.9999;
  int stagnation = 3;
  int max_flips = 1000;
  int candidates = 1;
  bool protect_last = false;
  std::uint64_t split_seed = 1;
  int attack_batch = 128;
};

void add_attack_options(CLI::App* sub, AttackOptions& a, bool with_model = true) {
  if (with_model)
    sub->add_option("--model", a.model, "quantized model file")->required();
  sub->add_option("--variant", a.variant, "n-to-1 | 1-to-1 | 1-to-1-stealthy | untargeted");
  sub->add_option("--source", a.source, "source class p (1-to-1 variants)");
  sub->add_option("--target", a.target, "target class q");
  sub->add_option("--asr-threshold", a.asr_threshold, "stop once ASR reaches this");
  sub->add_option("--stagnation", a.stagnation, "stop after this many ASR-flat iterations");
  sub->add_option("--max-flips", a.max_flips, "flip budget");
  sub->add_option("--candidates", a.candidates, "bits profiled per layer per iteration");
  sub->add_flag("--protect-last-layer", a.protect_last, "exclude the final dense layer");
  sub->add_option("--split-seed", a.split_seed, "data split seed");
  sub->add_option("--attack-batch", a.attack_batch, "attack batch size (n-to-1/untargeted)");
}

bflab::AttackSpec to_spec(const AttackOptions& a) {
  bflab::AttackSpec s;
  s.variant = bflab::variant_from_name(a.variant);
  s.source_class = a.source;
  s.target_class = a.target;
  s.asr_threshold = a.asr_threshold;
  s.stagnation_iters = a.stagnation;
  s.max_flips = a.max_flips;
  s.candidates_per_layer = a.candidates;
  s.protect_last_layer = a.protect_last;
  return s;
}

json attack_config(const AttackOptions& a) {
  return json{{"model", a.model},
              {"variant", a.variant},
              {"source", a.source},
              {"target", a.target},
              {"asr-threshold", a.asr_threshold},
              {"stagnation", a.stagnation},
              {"max-flips", a.max_flips},
              {"candidates", a.candidates},
              {"protect-last-layer", a.protect_last},
              {"split-seed", a.split_seed},
              {"attack-batch", a.attack_batch}};
}

fs::path resolve_out(const std::string& out_dir, const std::string& name) {
  fs::path p(name);
  if (p.is_absolute()) return p;
  return fs::path(out_dir) / p;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_manifest(const fs::path& path, const std::string& command, const json& config) {
  json m{{"tool", "bflab"},
         {"version", BFLAB_VERSION},
         {"command", command},
         {"config", config}};
  ensure_parent(path);
  bflab::write_text_file(path.string(), m.dump(2) + "\n");
}

std::string describe(const bflab::AttackReport& r) {
  std::ostringstream os;
  os << bflab::variant_name(r.variant);
  if (r.source_class >= 0) os << " " << r.source_class;
  if (r.target_class >= 0 && r.variant != bflab::AttackVariant::untargeted)
    os << " -> " << r.target_class;
  os << ": " << r.flips.size() << " flips, ASR " << r.asr << " (from " << r.initial_asr
     << "), TA " << r.post_attack_ta << ", " << (r.achieved ? "achieved" : "not achieved") << " ("
     << r.termination << ")";
  return os.str();
}

// --config <file.json>: each key matches one long option of the subcommand;
// values from the file become flags inserted right after the subcommand
// token, except for keys the command line already sets.
std::vector<std::string> expand_config_args(const std::vector<std::string>& args, CLI::App& app) {
  std::string config_path;
  std::size_t sub_pos = args.size();
  CLI::App* sub = nullptr;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (!sub) {
      for (CLI::App* s : app.get_subcommands({}))
        if (args[i] == s->get_name()) {
          sub = s;
          sub_pos = i;
          break;
        }
    }
    if (args[i] == "--config" && i + 1 < args.size())
      config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;
  if (!sub) throw CLI::ValidationError("--config", "requires a subcommand");

  std::ifstream in(config_path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + config_path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw CLI::ValidationError("--config", std::string("bad JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw CLI::ValidationError("--config", "must be a JSON object");

  auto user_passed = [&](const std::string& flag) {
    for (const std::string& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };

  std::vector<std::string> extra;
  for (const auto& [key, value] : cfg.items()) {
    std::string flag = "--" + key;
    if (!sub->get_option_no_throw(flag))
      throw CLI::ValidationError("--config", "unknown key '" + key + "' for " + sub->get_name());
    if (user_passed(flag)) continue;
    auto one = [&](const json& v) {
      if (v.is_string())
        extra.push_back(flag + "=" + v.get<std::string>());
      else if (v.is_boolean())
        extra.push_back(flag + "=" + (v.get<bool>() ? std::string("true") : std::string("false")));
      else if (v.is_number())
        extra.push_back(flag + "=" + v.dump());
      else
        throw CLI::ValidationError("--config",
                                   "key '" + key + "' must be a scalar or array of scalars");
    };
    if (value.is_array())
      for (const json& v : value) one(v);
    else
      one(value);
  }

  std::vector<std::string> result(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1);
  result.insert(result.end(), extra.begin(), extra.end());
  result.insert(result.end(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, args.end());
  return result;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bit-flip weight attack laboratory"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  std::string out_dir = ".";
  if (const char* env = std::getenv("BFLAB_OUT")) out_dir = env;
  app.add_option("--out", out_dir, "output root (default $BFLAB_OUT or .)");

  int rc = 0;

  // train ------------------------------------------------------------
  auto* t_train = app.add_subcommand("train", "train a float victim model");
  DataOptions train_data;
  add_data_options(t_train, train_data);
  std::string train_arch = "mlp", train_out = "model.bflm", train_config;
  int train_hidden = 32, train_channels = 8, train_epochs = 30, train_batch = 32;
  double train_lr = 0.05, train_momentum = 0.9;
  std::uint64_t train_seed = 1;
  t_train->add_option("--arch", train_arch, "mlp or cnn")
      ->check(CLI::IsMember({"mlp", "cnn"}));
  t_train->add_option("--hidden", train_hidden, "mlp hidden width");
  t_train->add_option("--channels", train_channels, "cnn conv channels");
  t_train->add_option("--epochs", train_epochs);
  t_train->add_option("--batch-size", train_batch);
  t_train->add_option("--lr", train_lr);
  t_train->add_option("--momentum", train_momentum);
  t_train->add_option("--seed", train_seed, "init + shuffle seed");
  t_train->add_option("--model-out", train_out, "output model file");
  t_train->add_option("--config", train_config, "JSON config; explicit flags override");
  t_train->callback([&] {
    bflab::Dataset ds = load_dataset(train_data);
    std::vector<int> sample(ds.test.inputs.shape.begin() + 1, ds.test.inputs.shape.end());
    bflab::Model m = train_arch == "mlp"
                         ? bflab::make_mlp(sample, train_hidden, ds.classes)
                         : bflab::make_cnn(sample, train_channels, ds.classes);
    bflab::init_params(m, train_seed);
    bflab::TrainConfig cfg;
    cfg.epochs = train_epochs;
    cfg.batch_size = train_batch;
    cfg.lr = train_lr;
    cfg.momentum = train_momentum;
    cfg.seed = train_seed;
    bflab::TrainSummary sum = bflab::train_sgd(m, ds.train, cfg);
    double test_acc = bflab::accuracy(m, ds.test);
    fs::path out = resolve_out(out_dir, train_out);
    ensure_parent(out);
    bflab::save_model(m, out.string());
    json config = data_config(train_data);
    config.update(json{{"arch", train_arch},
                       {"hidden", train_hidden},
                       {"channels", train_channels},
                       {"epochs", train_epochs},
                       {"batch-size", train_batch},
                       {"lr", train_lr},
                       {"momentum", train_momentum},
                       {"seed", train_seed},
                       {"model-out", train_out}});
    write_manifest(out.string() + ".manifest.json", "train", config);
    std::cout << "train accuracy " << sum.train_accuracy << ", test accuracy " << test_acc
              << "\nwrote " << out.string() << "\n";
  });

  // quantize ----------------------------------------------------------
  auto* t_quant = app.add_subcommand("quantize", "quantize a float model to N-bit codes");
  std::string quant_in, quant_out = "model.bflq", quant_config;
  int quant_bits = 8;
  t_quant->add_option("--model", quant_in, "float model file")->required();
  t_quant->add_option("--bits", quant_bits, "bit width in [2,8]");
  t_quant->add_option("--quant-out", quant_out, "output quantized model file");
  t_quant->add_option("--config", quant_config, "JSON config; explicit flags override");
  t_quant->callback([&] {
    require_file(quant_in, "--model");
    bflab::Model m = bflab::load_model(quant_in);
    bflab::QuantizedModel qm = bflab::quantize_model(m, bflab::QuantConfig{quant_bits});
    fs::path out = resolve_out(out_dir, quant_out);
    ensure_parent(out);
    bflab::save_quantized(qm, out.string());
    write_manifest(out.string() + ".manifest.json", "quantize",
                   json{{"model", quant_in}, {"bits", quant_bits}, {"quant-out", quant_out}});
    for (std::size_t q = 0; q < qm.layers.size(); ++q)
      std::cout << "layer " << q << ": " << qm.layers[q].size() << " weights, delta_w "
                << qm.layers[q].delta_w << ", " << qm.layers[q].n_bits << " bits\n";
    std::cout << "wrote " << out.string() << "\n";
  });

  // attack ------------------------------------------------------------
  auto* t_attack = app.add_subcommand("attack", "run the bit-flip search on a quantized model");
  DataOptions attack_data;
  AttackOptions attack_opts;
  add_data_options(t_attack, attack_data);
  add_attack_options(t_attack, attack_opts);
  std::string attack_name = "attack", attack_model_out, attack_config_path;
  t_attack->add_option("--name", attack_name, "output file prefix");
  t_attack->add_option("--attacked-out", attack_model_out, "write post-attack model here");
  t_attack->add_option("--config", attack_config_path, "JSON config; explicit flags override");
  t_attack->callback([&] {
    require_file(attack_opts.model, "--model");
    bflab::QuantizedModel qm = bflab::load_quantized(attack_opts.model);
    bflab::Dataset ds = load_dataset(attack_data);
    bflab::AttackSpec spec = to_spec(attack_opts);
    spec.validate(qm.model.num_classes());
    bflab::DataSplit split =
        bflab::split_data(ds.test, spec.variant, spec.source_class, spec.target_class,
                          attack_opts.split_seed, attack_opts.attack_batch);
    bflab::AttackReport rep = bflab::run_attack(qm, spec, split);

    fs::path base = resolve_out(out_dir, attack_name);
    ensure_parent(base);
    bflab::write_text_file(base.string() + ".report.json", json(rep).dump(2) + "\n");
    std::ofstream fl(base.string() + ".flips.jsonl");
    bflab::write_flips_jsonl(rep.flips, fl);
    std::string csv = bflab::kTrialCsvHeader;
    csv += bflab::trial_csv_row(rep, qm.n_bits(), attack_opts.split_seed);
    bflab::write_text_file(base.string() + ".csv", csv);
    if (!attack_model_out.empty()) {
      fs::path mo = resolve_out(out_dir, attack_model_out);
      ensure_parent(mo);
      bflab::save_quantized(qm, mo.string());
    }
    json config = data_config(attack_data);
    config.update(attack_config(attack_opts));
    config.update(json{{"name", attack_name}, {"attacked-out", attack_model_out}});
    write_manifest(base.string() + ".manifest.json", "attack", config);
    std::cout << describe(rep) << "\nwrote " << base.string() << ".report.json\n";
    rc = rep.achieved ? 0 : 1;
  });

  // simulate ----------------------------------------------------------
  auto* t_sim = app.add_subcommand("simulate", "deploy the attack through a memory flip profile");
  DataOptions sim_data;
  AttackOptions sim_opts;
  add_data_options(t_sim, sim_data);
  add_attack_options(t_sim, sim_opts);
  std::string sim_name = "simulate", sim_config_path;
  double sim_density = 1.0;
  std::uint64_t sim_profile_seed = 1;
  int sim_max_rounds = 16;
  t_sim->add_option("--name", sim_name, "output file prefix");
  t_sim->add_option("--density", sim_density, "fraction of flippable bit cells");
  t_sim->add_option("--profile-seed", sim_profile_seed, "flip profile seed");
  t_sim->add_option("--max-rounds", sim_max_rounds, "freeze-and-research round budget");
  t_sim->add_option("--config", sim_config_path, "JSON config; explicit flags override");
  t_sim->callback([&] {
    require_file(sim_opts.model, "--model");
    bflab::QuantizedModel qm = bflab::load_quantized(sim_opts.model);
    bflab::Dataset ds = load_dataset(sim_data);
    bflab::AttackSpec spec = to_spec(sim_opts);
    spec.validate(qm.model.num_classes());
    bflab::DataSplit split =
        bflab::split_data(ds.test, spec.variant, spec.source_class, spec.target_class,
                          sim_opts.split_seed, sim_opts.attack_batch);
    bflab::FlipProfile profile = bflab::make_profile(sim_density, sim_profile_seed);
    auto [rep, dep] = bflab::deploy_with_research(qm, spec, split, profile, sim_max_rounds);

    fs::path base = resolve_out(out_dir, sim_name);
    ensure_parent(base);
    bflab::write_text_file(base.string() + ".report.json", json(rep).dump(2) + "\n");
    json dj(dep);
    dj["profile"] = profile;
    bflab::write_text_file(base.string() + ".deploy.json", dj.dump(2) + "\n");
    json config = data_config(sim_data);
    config.update(attack_config(sim_opts));
    config.update(json{{"name", sim_name},
                       {"density", sim_density},
                       {"profile-seed", sim_profile_seed},
                       {"max-rounds", sim_max_rounds}});
    write_manifest(base.string() + ".manifest.json", "simulate", config);
    std::cout << describe(rep) << "\n"
              << (dep.deployed ? "deployed" : "not deployable") << " after " << dep.rounds
              << " round(s), baseline " << dep.baseline_flips << " flips, extra "
              << dep.extra_flips_used << ", frozen " << dep.infeasible.size() << "\nwrote "
              << base.string() << ".deploy.json\n";
    rc = dep.deployed ? 0 : 1;
  });

  // ablate ------------------------------------------------------------
  auto* t_ablate = app.add_subcommand("ablate", "repeat the attack across bit widths");
  DataOptions abl_data;
  AttackOptions abl_opts;
  add_data_options(t_ablate, abl_data);
  add_attack_options(t_ablate, abl_opts, false);
  std::string abl_model, abl_name = "ablation", abl_config_path;
  std::vector<int> abl_bits = {2, 4, 6, 8};
  int abl_trials = 3;
  bool abl_parallel = false;
  t_ablate->add_option("--model", abl_model, "float model file")->required();
  t_ablate->add_option("--bits", abl_bits, "bit widths, comma separated")->delimiter(',');
  t_ablate->add_option("--trials", abl_trials, "trials per width");
  t_ablate->add_flag("--parallel", abl_parallel, "run trials on separate threads");
  t_ablate->add_option("--name", abl_name, "output file prefix");
  t_ablate->add_option("--config", abl_config_path, "JSON config; explicit flags override");
  t_ablate->callback([&] {
    require_file(abl_model, "--model");
    if (abl_trials < 1) throw std::invalid_argument("--trials must be >= 1");
    bflab::Model m = bflab::load_model(abl_model);
    bflab::Dataset ds = load_dataset(abl_data);
    bflab::AttackSpec spec = to_spec(abl_opts);
    spec.validate(m.num_classes());
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < abl_trials; ++i) seeds.push_back(abl_opts.split_seed + i);

    std::vector<bflab::AblationRow> rows;
    for (int n : abl_bits) {
      bflab::QuantizedModel qm = bflab::quantize_model(m, bflab::QuantConfig{n});
      bflab::AblationRow row;
      row.n_bits = n;
      row.stats = bflab::run_trials(qm, spec, ds.test, seeds, abl_opts.attack_batch, abl_parallel);
      rows.push_back(std::move(row));
    }

    fs::path base = resolve_out(out_dir, abl_name);
    ensure_parent(base);
    bflab::write_text_file(base.string() + ".ablation.csv", bflab::ablation_csv(rows));
    json rows_json = json::array();
    for (const bflab::AblationRow& r : rows) {
      json row{{"n_bits", r.n_bits},
               {"mean_flips", r.stats.mean_flips},
               {"std_flips", r.stats.std_flips},
               {"mean_asr", r.stats.mean_asr},
               {"std_asr", r.stats.std_asr},
               {"mean_ta", r.stats.mean_ta},
               {"std_ta", r.stats.std_ta},
               {"achieved", r.stats.achieved_count},
               {"trials", r.stats.reports.size()},
               {"seeds", r.stats.seeds},
               {"reports", r.stats.reports}};
      rows_json.push_back(std::move(row));
    }
    bflab::write_text_file(base.string() + ".ablation.json",
                           json{{"type", "ablation"}, {"rows", rows_json}}.dump(2) + "\n");
    json config = data_config(abl_data);
    config.update(attack_config(abl_opts));
    config.update(json{{"model", abl_model},
                       {"bits", abl_bits},
                       {"trials", abl_trials},
                       {"parallel", abl_parallel},
                       {"name", abl_name}});
    write_manifest(base.string() + ".manifest.json", "ablate", config);
    for (const bflab::AblationRow& r : rows)
      std::cout << r.n_bits << "-bit: mean flips " << r.stats.mean_flips << " +- "
                << r.stats.std_flips << ", mean ASR " << r.stats.mean_asr << ", mean TA "
                << r.stats.mean_ta << "\n";
    std::cout << "wrote " << base.string() << ".ablation.csv\n";
  });

  // report ------------------------------------------------------------
  auto* t_report = app.add_subcommand("report", "render stored run files as tables");
  std::string report_dir;
  t_report->add_option("--dir", report_dir, "directory holding *.report.json / *.ablation.json")
      ->required();
  t_report->callback([&] {
    if (!fs::is_directory(report_dir))
      throw std::invalid_argument("--dir is not a directory: " + report_dir);
    std::vector<fs::path> reports, ablations;
    for (const auto& entry : fs::directory_iterator(report_dir)) {
      std::string name = entry.path().filename().string();
      if (name.size() > 12 && name.substr(name.size() - 12) == ".report.json")
        reports.push_back(entry.path());
      if (name.size() > 14 && name.substr(name.size() - 14) == ".ablation.json")
        ablations.push_back(entry.path());
    }
    std::sort(reports.begin(), reports.end());
    std::sort(ablations.begin(), ablations.end());
    if (reports.empty() && ablations.empty())
      throw std::invalid_argument("no run files in " + report_dir);

    if (!reports.empty()) {
      std::cout << "run, variant, source, target, flips, hamming, asr, ta, achieved, termination\n";
      for (const fs::path& p : reports) {
        std::ifstream in(p);
        bflab::AttackReport r = json::parse(in).get<bflab::AttackReport>();
        std::cout << p.filename().string() << ", " << bflab::variant_name(r.variant) << ", "
                  << r.source_class << ", " << r.target_class << ", " << r.flips.size() << ", "
                  << r.hamming << ", " << r.asr << ", " << r.post_attack_ta << ", "
                  << (r.achieved ? "yes" : "no") << ", " << r.termination << "\n";
      }
    }
    for (const fs::path& p : ablations) {
      std::ifstream in(p);
      json j = json::parse(in);
      std::cout << p.filename().string() << "\n"
                << "n_bits, mean_flips, std_flips, mean_asr, mean_ta, achieved/trials\n";
      for (const json& row : j.at("rows"))
        std::cout << row.at("n_bits").get<int>() << ", " << row.at("mean_flips").get<double>()
                  << ", " << row.at("std_flips").get<double>() << ", "
                  << row.at("mean_asr").get<double>() << ", " << row.at("mean_ta").get<double>()
                  << ", " << row.at("achieved").get<int>() << "/" << row.at("trials").get<int>()
                  << "\n";
    }
  });

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config_args(args, app);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
