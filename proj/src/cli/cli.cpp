#include "advtext/cli/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <thread>

#include "advtext/attack/engine.hpp"
#include "advtext/cli/manifest.hpp"
#include "advtext/cli/settings.hpp"
#include "advtext/cli/workspace.hpp"
#include "advtext/core/attack_log.hpp"
#include "advtext/core/dataset.hpp"
#include "advtext/core/error.hpp"
#include "advtext/core/rng.hpp"
#include "advtext/desk/learned.hpp"
#include "advtext/desk/toy.hpp"
#include "advtext/eval/metrics.hpp"
#include "advtext/humaneval/server.hpp"
#include "advtext/humaneval/store.hpp"
#include "advtext/humaneval/study.hpp"
#include "advtext/oracles/mock.hpp"
#include "advtext/oracles/remote.hpp"

namespace advtext::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

struct Key {
  std::string name;
  ojson value;
  std::string help;
};

struct Context;
using Handler = std::function<void(Context&)>;

struct Command {
  std::string name;
  std::string help;
  std::vector<Key> keys;
  Handler handler;
};

struct Context {
  std::string command;
  Settings settings;
  Workspace workspace;
  std::vector<std::string> argv;
  std::ostream& out;
  std::ostream& err;
  std::unique_ptr<RunDirectory> run;

  std::size_t workers() const {
    const std::uint64_t w = settings.u64("workers");
    if (w > 0) return w;
    return std::max(1u, std::thread::hardware_concurrency());
  }
  std::uint64_t seed() const { return settings.u64("seed"); }
  std::string hash() const { return settings.hash({"out", "root", "workers"}); }

  RunManifest manifest() const {
    RunManifest m;
    m.command = command;
    m.argv = argv;
    m.config = settings.resolved();
    m.config_hash = hash();
    m.seed = settings.has("seed") ? seed() : 0;
    return m;
  }

  // `fallback` is used when --out is empty.
  RunDirectory& open(const fs::path& fallback, RunManifest m) {
    const std::string explicit_out = settings.str("out");
    run = std::make_unique<RunDirectory>(explicit_out.empty() ? fallback : fs::path(explicit_out),
                                         std::move(m));
    return *run;
  }
  fs::path run_path(const std::string& tag) const {
    return workspace.runs_dir() / fmt::format("{}-{}{}", command, tag.empty() ? "" : tag + "-",
                                              hash().substr(0, 8));
  }
};

// Keys shared by most commands.
const Key kRoot{"root", "advtext-data", "workspace root holding datasets, models and runs"};
const Key kOut{"out", "", "run directory (default: derived under <root>/runs)"};
const Key kSeed{"seed", 42, "root seed; every random stream is derived from it"};
const Key kWorkers{"workers", 0, "parallel attack workers (0: number of processors)"};

std::vector<Key> attack_keys() {
  return {
      {"top_k", 50, "masked-LM candidates per word"},
      {"sim_threshold", 0.8, "minimum sentence similarity of a candidate"},
      {"max_words_perturbed", 0, "word budget per example (0: unlimited)"},
      {"stopword_resource", "builtin", "stopword list file, or builtin"},
      {"mask_token", "[MASK]", "mask token of the masked LM"},
      {"importance_mode", "once", "once | after_each_swap"},
      {"similarity_reference", "original", "original | current"},
      {"oracles", "desk", "desk | mock | remote"},
      {"oracle_url", "", "base URL of remote mask_fill/pos_tag/similarity oracles"},
      {"classifier_url", "", "base URL of a remote classifier (default: local model)"},
      {"oracle_timeout", 30, "seconds per remote oracle request"},
      {"desk_mlm_dim", 32, "desk masked LM embedding size"},
      {"desk_mlm_window", 2, "desk masked LM context window"},
      {"desk_mlm_epochs", 8, "desk masked LM training epochs"},
      {"desk_glove_dim", 50, "desk similarity embedding size"},
      {"desk_glove_epochs", 30, "desk similarity embedding epochs"},
  };
}

void require(const Settings& s, const std::string& key) {
  if (s.str(key).empty()) throw InvalidArgument("missing required option --" + key);
}

AttackConfig attack_config(const Settings& s) {
  AttackConfig c;
  c.top_k = s.u64("top_k");
  c.sim_threshold = s.num("sim_threshold");
  if (s.u64("max_words_perturbed") > 0) c.max_words_perturbed = s.u64("max_words_perturbed");
  c.stopword_resource = s.str("stopword_resource");
  c.mask_token = s.str("mask_token");
  c.seed = s.u64("seed");
  const std::string mode = s.str("importance_mode");
  if (mode == "once") {
    c.importance_mode = ImportanceMode::kOnce;
  } else if (mode == "after_each_swap") {
    c.importance_mode = ImportanceMode::kAfterEachSwap;
  } else {
    throw InvalidArgument("importance_mode must be once or after_each_swap");
  }
  const std::string ref = s.str("similarity_reference");
  if (ref == "original") {
    c.similarity_reference = SimilarityReference::kOriginal;
  } else if (ref == "current") {
    c.similarity_reference = SimilarityReference::kCurrent;
  } else {
    throw InvalidArgument("similarity_reference must be original or current");
  }
  c.validate();
  return c;
}

remote::Endpoint endpoint(const Settings& s, const std::string& url, std::string model = {}) {
  remote::Endpoint e;
  e.base_url = url;
  e.model_id = std::move(model);
  e.timeout = std::chrono::seconds(s.u64("oracle_timeout"));
  return e;
}

// The mask-fill, tagging and similarity oracles chosen by `oracles`.
class OracleProvider {
 public:
  OracleProvider(const Settings& s, const DatasetBundle& data, std::ostream& err)
      : settings_(s), data_(data), mode_(s.str("oracles")) {
    if (mode_ == "desk") {
      desk::DeskOracleConfig cfg;
      cfg.mlm.dim = s.u64("desk_mlm_dim");
      cfg.mlm.window = s.u64("desk_mlm_window");
      cfg.mlm.epochs = s.u64("desk_mlm_epochs");
      cfg.mlm.seed = derive_seed(s.u64("seed"), 31);
      cfg.glove.dim = s.u64("desk_glove_dim");
      cfg.glove.epochs = s.u64("desk_glove_epochs");
      cfg.glove.seed = derive_seed(s.u64("seed"), 32);
      err << "fitting desk oracles on " << data.train.size() << " training sentences\n";
      desk_ = std::make_unique<desk::DeskOracles>(
          desk::DeskOracles::train(data.train, data.lexicon, cfg));
    } else if (mode_ == "mock") {
      if (data.thesaurus.empty())
        throw InvalidArgument("mock oracles need a dataset with thesaurus.json");
    } else if (mode_ == "remote") {
      if (s.str("oracle_url").empty())
        throw InvalidArgument("remote oracles need --oracle-url");
    } else {
      throw InvalidArgument("oracles must be desk, mock or remote");
    }
  }

  OracleSession session(std::unique_ptr<Classifier> classifier) const {
    if (desk_) return desk_->session(std::move(classifier));
    OracleSession s;
    s.classifier = std::move(classifier);
    if (mode_ == "mock") {
      s.mlm = std::make_unique<mock::ThesaurusMlm>(data_.thesaurus);
      s.tagger = std::make_unique<mock::LexiconTagger>(data_.lexicon);
      s.similarity = std::make_unique<mock::OverlapSimilarity>();
    } else {
      const std::string url = settings_.str("oracle_url");
      s.mlm = std::make_unique<remote::HttpMaskedLm>(endpoint(settings_, url),
                                                     settings_.str("mask_token"));
      s.tagger = std::make_unique<remote::HttpPosTagger>(endpoint(settings_, url));
      s.similarity = std::make_unique<remote::HttpSimilarity>(endpoint(settings_, url));
    }
    return s;
  }

 private:
  const Settings& settings_;
  const DatasetBundle& data_;
  std::string mode_;
  std::unique_ptr<desk::DeskOracles> desk_;
};

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

std::map<std::string, std::string> parse_pairs(const std::vector<std::string>& items,
                                               const std::string& what) {
  std::map<std::string, std::string> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
      throw InvalidArgument(what + " entries take the form name=value: " + item);
    if (!out.emplace(item.substr(0, eq), item.substr(eq + 1)).second)
      throw InvalidArgument("duplicate " + what + " entry: " + item.substr(0, eq));
  }
  return out;
}

// Source logs named by --logs name=path, else the newest attack run of
// each source on --dataset.
std::map<std::string, fs::path> resolve_logs(const Context& c,
                                             const std::vector<std::string>& sources) {
  const auto given = parse_pairs(c.settings.list("logs"), "logs");
  std::map<std::string, fs::path> out;
  for (const auto& [name, path] : given)
    if (std::find(sources.begin(), sources.end(), name) == sources.end())
      throw InvalidArgument("--logs names " + name + ", which is not among the sources");
  for (const auto& source : sources) {
    if (auto it = given.find(source); it != given.end()) {
      out[source] = it->second;
      continue;
    }
    const std::string dataset = c.settings.str("dataset");
    if (dataset.empty())
      throw InvalidArgument("no log for source " + source + ": pass --logs or --dataset");
    auto found = c.workspace.latest_attack_log(dataset, source);
    if (!found)
      throw InvalidArgument("no completed attack run of " + source + " on " + dataset);
    out[source] = *found;
  }
  return out;
}

std::vector<AttackLogEntry> read_existing_log(const fs::path& path) {
  if (!fs::exists(path)) throw InvalidArgument("log not found: " + path.string());
  return read_log(path);
}

// ---------------------------------------------------------------- ingest

void cmd_ingest(Context& c) {
  const Settings& s = c.settings;
  const std::string name = s.str("name");
  check_name("dataset", name);

  DatasetBundle b;
  b.name = name;
  LabeledDataset full;
  std::vector<std::string> warnings;
  std::size_t dropped = 0;
  RunManifest m = c.manifest();
  if (s.u64("toy_size") > 0) {
    desk::ToyCorpusConfig tc;
    tc.size = s.u64("toy_size");
    tc.seed = derive_seed(c.seed(), 2);
    tc.noise = s.num("toy_noise");
    tc.name = name;
    desk::ToyCorpus toy = desk::make_toy_corpus(tc);
    full = std::move(toy.dataset);
    b.lexicon = std::move(toy.lexicon);
    b.thesaurus = std::move(toy.thesaurus);
  } else {
    require(s, "input");
    const fs::path input = s.str("input");
    std::string format = s.str("format");
    if (format.empty()) {
      const std::string ext = input.extension().string();
      format = ext == ".csv" ? "csv" : (ext == ".jsonl" || ext == ".json") ? "jsonl" : "";
      if (format.empty()) throw InvalidArgument("cannot infer --format from " + input.string());
    }
    DatasetSchema schema;
    schema.text_column = s.str("text_column");
    schema.label_column = s.str("label_column");
    if (!s.str("id_column").empty()) schema.id_column = s.str("id_column");
    schema.labels = s.list("labels");
    schema.dataset_tag = name;
    LoadedDataset loaded = load_dataset(input, parse_dataset_format(format), schema);
    full = std::move(loaded.dataset);
    warnings = std::move(loaded.warnings);
    dropped = loaded.dropped_count;
    m.input_hashes[input.string()] = file_hash(input);
  }
  if (const auto map = s.list("label_map"); !map.empty())
    full = remap_labels(full, parse_pairs(map, "label_map"));
  if (full.empty()) throw DataError("dataset " + name + " has no examples");

  const TrainTestSplit parts = split(full, s.num("test_fraction"), derive_seed(c.seed(), 1));
  b.full = full;
  b.train = parts.train;
  b.test = parts.test;
  b.hash = dataset_hash(full);
  ojson counts = ojson::object();
  const auto cc = full.class_counts();
  for (std::size_t i = 0; i < cc.size(); ++i) counts[full.label_space.name(i)] = cc[i];
  b.info = {{"name", name},
            {"labels", full.label_space.class_names()},
            {"hash", b.hash},
            {"size", full.size()},
            {"train_size", b.train.size()},
            {"test_size", b.test.size()},
            {"test_fraction", s.num("test_fraction")},
            {"class_counts", counts},
            {"dropped", dropped},
            {"warnings", warnings}};

  m.dataset_hashes[name] = b.hash;
  RunDirectory& run = c.open(c.workspace.dataset_dir(name), std::move(m));
  for (const auto& f : write_dataset_bundle(b, run.path())) run.output(f);
  run.complete();

  for (const auto& w : warnings) c.err << "warning: " << w << '\n';
  c.out << fmt::format("dataset {}: {} examples ({} train, {} test), hash {}\n", name,
                       full.size(), b.train.size(), b.test.size(), b.hash);
  for (std::size_t i = 0; i < cc.size(); ++i)
    c.out << fmt::format("  {:<16} {}\n", full.label_space.name(i), cc[i]);
  c.out << "written to " << run.path().string() << '\n';
}

// ---------------------------------------------------------------- train

void cmd_train(Context& c) {
  const Settings& s = c.settings;
  require(s, "dataset");
  const DatasetBundle data = c.workspace.load_dataset(s.str("dataset"));
  const std::string name = s.str("name").empty() ? s.str("arch") : s.str("name");
  const fs::path dir = c.workspace.model_dir(name);

  ModelSpec spec;
  spec.arch = parse_arch(s.str("arch"));
  spec.arch_params = s.raw("arch_params");
  spec.embedding_dim = s.u64("embedding_dim");
  spec.label_space = data.full.label_space;
  spec.seed = c.seed();
  spec.resolved_params();

  TrainConfig tc;
  tc.epochs = s.u64("epochs");
  tc.learning_rate = s.num("learning_rate");
  tc.batch_size = s.u64("batch_size");
  tc.clip_norm = s.num("clip_norm");
  tc.min_count = s.u64("min_count");
  tc.pretrain_embeddings = s.flag("pretrain_embeddings");
  tc.glove.epochs = s.u64("glove_epochs");
  tc.glove.window = s.u64("glove_window");
  tc.glove.min_count = s.u64("glove_min_count");
  std::optional<EmbeddingTable> pretrained;
  RunManifest m = c.manifest();
  if (!s.str("embeddings").empty()) {
    pretrained = EmbeddingTable::load(s.str("embeddings"));
    m.input_hashes[s.str("embeddings")] = file_hash(s.str("embeddings"));
  }
  m.dataset_hashes[data.name] = data.hash;
  m.model_ids = {dir.filename().string()};

  RunDirectory& run = c.open(dir, std::move(m));
  c.err << fmt::format("training {} on {} ({} train / {} test)\n", to_string(spec.arch),
                       data.name, data.train.size(), data.test.size());
  TrainedModel trained =
      train_victim(spec, data.train, data.test, tc, pretrained ? &*pretrained : nullptr);
  trained.model.set_model_id(run.path().filename().string());
  trained.report.model_id = trained.model.model_id();
  save_model(run.path().parent_path(), trained.model, trained.report);
  for (const char* f : {"spec.json", "vocab.txt", "weights.bin", "report.json"}) run.output(f);
  run.complete();

  const TrainReport& r = trained.report;
  c.out << fmt::format("{:<20} {:>10} {:>10} {:>7} {:>9}\n", "model", "train_acc", "eval_acc",
                       "epochs", "seconds");
  c.out << fmt::format("{:<20} {:>10.4f} {:>10.4f} {:>7} {:>9.1f}\n", r.model_id,
                       r.train_accuracy, r.eval_accuracy, r.epochs, r.wall_time);
}

// ---------------------------------------------------------------- attack

std::unique_ptr<Classifier> victim_classifier(const Settings& s,
                                              const std::shared_ptr<const VictimModel>& model) {
  if (model) return std::make_unique<ModelClassifier>(model);
  return std::make_unique<remote::HttpClassifier>(
      endpoint(s, s.str("classifier_url"), s.str("model")));
}

void check_labels(const VictimModel& model, const DatasetBundle& data) {
  if (!(model.spec().label_space == data.full.label_space))
    throw InvalidArgument("model " + model.model_id() + " was trained on a different label space");
}

void cmd_attack(Context& c) {
  const Settings& s = c.settings;
  require(s, "dataset");
  require(s, "model");
  const DatasetBundle data = c.workspace.load_dataset(s.str("dataset"));
  const AttackEngine engine(attack_config(s));

  const std::string split_name = s.str("split");
  const LabeledDataset* pool = split_name == "test"    ? &data.test
                               : split_name == "train" ? &data.train
                               : split_name == "all"   ? &data.full
                                                       : nullptr;
  if (!pool) throw InvalidArgument("split must be test, train or all");
  const std::size_t n = s.u64("n") == 0 ? pool->size() : s.u64("n");
  const std::vector<Example> sample = sample_examples(*pool, n, derive_seed(c.seed(), 21));

  std::shared_ptr<const VictimModel> model;
  if (s.str("classifier_url").empty()) {
    model = c.workspace.load_model(s.str("model"));
    check_labels(*model, data);
  }

  RunManifest m = c.manifest();
  m.dataset_hashes[data.name] = data.hash;
  m.model_ids = {s.str("model")};
  RunDirectory& run = c.open(c.run_path(s.str("dataset") + "-" + s.str("model")), std::move(m));
  const OracleProvider oracles(s, data, c.err);

  const fs::path log_path = run.output("log.jsonl");
  std::size_t done = 0;
  std::vector<AttackLogEntry> log;
  {
    AttackLogWriter writer(log_path);
    log = run_attacks(
        sample, engine, [&] { return oracles.session(victim_classifier(s, model)); },
        c.workers(), [&](const AttackLogEntry& e) {
          writer.append(e);
          if (++done % 50 == 0 || done == sample.size())
            c.err << fmt::format("attack: {}/{}\n", done, sample.size());
        });
  }
  write_log(log, log_path);
  const MetricsReport report = compute_metrics(log);
  write_text(run.output("metrics.csv"), metrics_csv({report}));
  c.out << render_metrics_table({report});
  if (report.n_error > 0) {
    const std::string msg = fmt::format("{} of {} attacks ended with an oracle error",
                                        report.n_error, log.size());
    run.fail(msg);
    throw Error(msg);
  }
  run.complete();
  c.out << "log written to " << log_path.string() << '\n';
}

// ---------------------------------------------------------------- metrics

void cmd_metrics(Context& c) {
  const auto logs = c.settings.list("log");
  if (logs.empty()) throw InvalidArgument("missing required option --log");
  RunManifest m = c.manifest();
  std::vector<MetricsReport> reports;
  for (const auto& path : logs) {
    reports.push_back(compute_metrics(read_existing_log(path)));
    m.input_hashes[path] = file_hash(path);
    m.model_ids.push_back(reports.back().model_id);
  }
  RunDirectory& run = c.open(c.run_path(""), std::move(m));
  write_text(run.output("metrics.csv"), metrics_csv(reports));
  run.complete();
  c.out << render_metrics_table(reports);
}

// ---------------------------------------------------------------- transfer

void cmd_transfer(Context& c) {
  const Settings& s = c.settings;
  const auto sources = s.list("sources");
  const auto victims = s.list("victim");
  if (sources.empty()) throw InvalidArgument("missing required option --sources");
  if (victims.empty()) throw InvalidArgument("missing required option --victim");
  RunManifest m = c.manifest();
  std::map<std::string, std::vector<AttackLogEntry>> logs;
  for (const auto& [source, path] : resolve_logs(c, sources)) {
    logs[source] = read_existing_log(path);
    m.input_hashes[path.string()] = file_hash(path);
  }
  std::vector<std::unique_ptr<Classifier>> owned;
  std::vector<NamedClassifier> named;
  for (const auto& v : victims) {
    owned.push_back(std::make_unique<ModelClassifier>(c.workspace.load_model(v)));
    named.push_back({v, owned.back().get()});
    m.model_ids.push_back(v);
  }
  const auto cells = transfer_matrix(logs, named, s.u64("n"));
  if (cells.empty()) throw InvalidArgument("no (source, victim) pair with distinct models");

  RunDirectory& run = c.open(c.run_path(""), std::move(m));
  write_text(run.output("transfer.csv"), transfer_csv(cells));
  run.complete();
  for (const auto& cell : cells)
    if (!cell.available)
      c.err << fmt::format("warning: {} has {} successes, fewer than n={}\n", cell.source_model,
                           cell.successes_available, s.u64("n"));
  c.out << render_transfer_table(cells);
}

// ---------------------------------------------------------------- defend

void cmd_defend(Context& c) {
  Settings& s = c.settings;
  fs::path log_path = s.str("log");
  if (log_path.empty()) {
    require(s, "dataset");
    require(s, "model");
    auto found = c.workspace.latest_attack_log(s.str("dataset"), s.str("model"));
    if (!found) throw InvalidArgument("no completed attack run to defend against; pass --log");
    log_path = *found;
  }
  if (fs::exists(log_path.parent_path() / "manifest.json")) {
    const RunManifest attack = RunManifest::read(log_path.parent_path());
    if (attack.command == "attack") {
      ojson inherited = attack.config;
      for (const char* k : {"out", "root", "workers"}) inherited.erase(k);
      s.inherit(inherited);
    }
  }
  require(s, "dataset");
  require(s, "model");
  const DatasetBundle data = c.workspace.load_dataset(s.str("dataset"));
  const auto victim = c.workspace.load_model(s.str("model"));
  check_labels(*victim, data);
  const auto log = read_existing_log(log_path);
  const AttackEngine engine(attack_config(s));
  const std::string defended_name =
      s.str("name").empty() ? s.str("model") + "-defended" : s.str("name");
  const fs::path model_dir = c.workspace.model_dir(defended_name);

  TrainConfig tc;
  tc.epochs = s.u64("epochs");
  tc.learning_rate = s.num("learning_rate");
  tc.batch_size = s.u64("batch_size");
  tc.clip_norm = s.num("clip_norm");

  RunManifest m = c.manifest();
  m.dataset_hashes[data.name] = data.hash;
  m.model_ids = {s.str("model"), defended_name};
  m.input_hashes[log_path.string()] = file_hash(log_path);
  RunDirectory model_run(model_dir, m);
  RunDirectory& run = c.open(c.run_path(s.str("dataset") + "-" + s.str("model")), std::move(m));
  const OracleProvider oracles(s, data, c.err);

  c.err << fmt::format("refine-tuning {} with the successes of {}\n", s.str("model"),
                       log_path.string());
  DefenseOutcome outcome = run_defense(
      *victim, data.train, data.test, log, engine,
      [&](std::shared_ptr<const VictimModel> mdl) {
        return oracles.session(std::make_unique<ModelClassifier>(std::move(mdl)));
      },
      tc, c.workers());
  outcome.defended.model.set_model_id(model_dir.filename().string());
  outcome.defended.report.model_id = outcome.defended.model.model_id();
  outcome.report.defended_model_id = outcome.defended.model.model_id();
  for (auto& e : outcome.reattack_log) e.model_id = outcome.defended.model.model_id();

  save_model(model_dir.parent_path(), outcome.defended.model, outcome.defended.report);
  for (const char* f : {"spec.json", "vocab.txt", "weights.bin", "report.json"})
    model_run.output(f);
  model_run.complete();

  write_log(outcome.reattack_log, run.output("log.jsonl"));
  write_text(run.output("metrics.csv"),
             metrics_csv({compute_metrics(log), compute_metrics(outcome.reattack_log)}));
  write_text(run.output("defense.csv"), defense_csv({outcome.report}));
  run.complete();
  c.out << render_defense_table({outcome.report});
}

// ---------------------------------------------------------------- studies

fs::path store_path(const Context& c) {
  const std::string s = c.settings.str("store");
  return s.empty() ? c.workspace.root() / "studies.db" : fs::path(s);
}

void cmd_study_build(Context& c) {
  const Settings& s = c.settings;
  const auto sources = s.list("sources");
  if (sources.empty()) throw InvalidArgument("missing required option --sources");
  const std::string study_id = s.str("study_id");
  check_name("study", study_id);
  RunManifest m = c.manifest();
  std::map<std::string, std::vector<AttackLogEntry>> logs;
  for (const auto& [source, path] : resolve_logs(c, sources)) {
    logs[source] = read_existing_log(path);
    m.input_hashes[path.string()] = file_hash(path);
  }
  m.model_ids = sources;
  const humaneval::Study study =
      humaneval::build_study(logs, s.u64("per_model"), c.seed(), study_id, s.list("allowlist"));

  fs::create_directories(store_path(c).parent_path().empty() ? fs::path(".")
                                                              : store_path(c).parent_path());
  humaneval::StudyStore store(store_path(c));
  if (store.has_study(study_id))
    throw InvalidArgument("study " + study_id + " already exists in " + store_path(c).string());
  RunDirectory& run = c.open(c.run_path(study_id), std::move(m));
  store.save_study(study);

  ojson tasks = ojson::array();
  for (const auto& t : study.grammar)
    tasks.push_back({{"task_id", t.task_id},
                     {"kind", "grammar"},
                     {"source_model", t.source_model},
                     {"origin", humaneval::to_string(t.hidden_origin)},
                     {"text", t.text}});
  for (const auto& t : study.semantic)
    tasks.push_back({{"task_id", t.task_id},
                     {"kind", "semantic"},
                     {"source_model", t.source_model},
                     {"reference", t.original_text},
                     {"candidate", t.adversarial_text}});
  write_json(run.output("study.json"),
             {{"study_id", study.study_id}, {"seed", study.seed}, {"tasks", tasks}});
  run.complete();
  c.out << fmt::format("study {}: {} grammar and {} semantic tasks stored in {}\n", study_id,
                       study.grammar.size(), study.semantic.size(), store_path(c).string());
}

void cmd_study_serve(Context& c) {
  const Settings& s = c.settings;
  humaneval::StudyStore store(store_path(c));
  humaneval::StudyServer server(store, s.str("ui_dir"));
  const int port = static_cast<int>(s.u64("port"));
  c.out << fmt::format("serving studies from {} on http://{}:{}\n", store_path(c).string(),
                       s.str("host"), port)
        << std::flush;
  server.run(s.str("host"), port);
}

std::string render_study_table(const humaneval::StudyReport& r) {
  std::string out = fmt::format("{:<14} {:<16} {:>12} {:>12} {:>11} {:>8}\n", "group", "model",
                                "grammar_%", "semantic_%", "evaluators", "ratings");
  for (const auto& cell : r.cells)
    out += fmt::format("{:<14} {:<16} {:>12.2f} {:>12.2f} {:>11} {:>8}\n", cell.group,
                       cell.source_model, cell.grammatical_ratio, cell.semantic_percentage,
                       cell.n_evaluators, cell.n_ratings);
  return out;
}

void cmd_report(Context& c) {
  const std::string study_id = c.settings.str("study_id");
  if (!fs::exists(store_path(c)))
    throw InvalidArgument("study store not found: " + store_path(c).string());
  humaneval::StudyStore store(store_path(c));
  const humaneval::Study study = store.load_study(study_id);
  const humaneval::StudyReport report =
      humaneval::aggregate(store.ratings(study_id), study, store.evaluators());
  RunManifest m = c.manifest();
  m.input_hashes[store_path(c).string()] = file_hash(store_path(c));
  RunDirectory& run = c.open(c.run_path(study_id), std::move(m));
  write_json(run.output("report.json"), report.to_json());
  run.complete();
  c.out << render_study_table(report);
  if (!report.complete) {
    std::size_t missing = 0;
    for (const auto& [id, n] : report.missing) missing += n;
    c.err << fmt::format("warning: {} ratings still missing\n", missing);
  }
}

void cmd_oracle_serve(Context& c) {
  const Settings& s = c.settings;
  require(s, "dataset");
  const DatasetBundle data = c.workspace.load_dataset(s.str("dataset"));
  std::shared_ptr<const VictimModel> model;
  if (!s.str("model").empty()) {
    model = c.workspace.load_model(s.str("model"));
    check_labels(*model, data);
  }
  const OracleProvider oracles(s, data, c.err);
  OracleSession session =
      oracles.session(model ? std::make_unique<ModelClassifier>(model) : nullptr);
  remote::OracleServer::Backends b;
  b.classifier = std::move(session.classifier);
  b.mlm = std::move(session.mlm);
  b.tagger = std::move(session.tagger);
  b.similarity = std::move(session.similarity);
  remote::OracleServer server(std::move(b), model ? model->model_id() : s.str("oracles"),
                              version_stamp());
  const int port = static_cast<int>(s.u64("port"));
  c.out << fmt::format("serving oracles on http://{}:{}\n", s.str("host"), port) << std::flush;
  server.run(s.str("host"), port);
}

// ---------------------------------------------------------------- table

std::vector<Command> commands() {
  std::vector<Command> cmds;
  cmds.push_back({"ingest",
                  "load a CSV/JSONL corpus (or generate a toy one) and split it",
                  {kRoot, kOut, kSeed,
                   {"name", "", "dataset name"},
                   {"input", "", "input file"},
                   {"format", "", "csv | jsonl (default: from the extension)"},
                   {"text_column", "text", "text column"},
                   {"label_column", "label", "label column"},
                   {"id_column", "", "id column (default: <name>-<row>)"},
                   {"labels", ojson::array(), "declared label order, comma separated"},
                   {"label_map", ojson::array(), "label renames as from=to, comma separated"},
                   {"test_fraction", 0.2, "held-out share"},
                   {"toy_size", 0, "generate a synthetic review corpus of this size"},
                   {"toy_noise", 0.1, "label noise of the synthetic corpus"}},
                  cmd_ingest});
  cmds.push_back({"train",
                  "train a victim classifier on a dataset's training split",
                  {kRoot, kOut, kSeed,
                   {"dataset", "", "dataset name"},
                   {"arch", "cnn", "cnn | lstm | transformer"},
                   {"name", "", "model name (default: the architecture)"},
                   {"arch_params", ojson::object(), "architecture parameters as JSON"},
                   {"embedding_dim", 200, "word embedding size of cnn/lstm"},
                   {"epochs", 5, "training epochs"},
                   {"learning_rate", 0.001, "Adam learning rate"},
                   {"batch_size", 16, "minibatch size"},
                   {"clip_norm", 5.0, "gradient norm clip"},
                   {"min_count", 1, "vocabulary frequency cut-off"},
                   {"pretrain_embeddings", true, "fit GloVe vectors first (cnn/lstm)"},
                   {"embeddings", "", "GloVe text file to start from instead"},
                   {"glove_epochs", 25, "GloVe epochs"},
                   {"glove_window", 5, "GloVe co-occurrence window"},
                   {"glove_min_count", 2, "GloVe vocabulary cut-off"}},
                  cmd_train});
  std::vector<Key> attack = {kRoot, kOut, kSeed, kWorkers,
                             {"dataset", "", "dataset name"},
                             {"model", "", "victim model name"},
                             {"n", 1000, "examples to attack (0: the whole split)"},
                             {"split", "test", "test | train | all"}};
  for (auto& k : attack_keys()) attack.push_back(k);
  cmds.push_back({"attack", "run the synonym-substitution attack and log every example",
                  attack, cmd_attack});
  cmds.push_back({"metrics",
                  "summarize attack logs",
                  {kRoot, kOut, {"log", ojson::array(), "attack log(s), comma separated"}},
                  cmd_metrics});
  cmds.push_back({"transfer",
                  "score victims on adversarial examples crafted against other models",
                  {kRoot, kOut,
                   {"sources", ojson::array(), "source models, comma separated"},
                   {"victim", ojson::array(), "victim models, comma separated"},
                   {"n", 245, "successes taken from each source log"},
                   {"dataset", "", "dataset used to find source logs"},
                   {"logs", ojson::array(), "explicit source logs as name=path"}},
                  cmd_transfer});
  std::vector<Key> defend = {kRoot, kOut, kSeed, kWorkers,
                             {"dataset", "", "dataset name (default: from the --log run)"},
                             {"model", "", "model to defend (default: from the --log run)"},
                             {"log", "", "attack log (default: newest attack run)"},
                             {"name", "", "defended model name (default: <model>-defended)"},
                             {"epochs", 3, "refine-tuning epochs"},
                             {"learning_rate", 0.001, "Adam learning rate"},
                             {"batch_size", 16, "minibatch size"},
                             {"clip_norm", 5.0, "gradient norm clip"}};
  for (auto& k : attack_keys()) defend.push_back(k);
  cmds.push_back({"defend", "adversarial training: refine-tune on successes and re-attack",
                  defend, cmd_defend});
  cmds.push_back({"study-build",
                  "sample a blind human-evaluation study from attack logs",
                  {kRoot, kOut, kSeed,
                   {"sources", ojson::array(), "source models, comma separated"},
                   {"dataset", "", "dataset used to find source logs"},
                   {"logs", ojson::array(), "explicit source logs as name=path"},
                   {"per_model", 50, "successes sampled per source model"},
                   {"study_id", "study", "study identifier"},
                   {"allowlist", ojson::array(), "dataset tags to draw from (default: all)"},
                   {"store", "", "study database (default: <root>/studies.db)"}},
                  cmd_study_build});
  cmds.push_back({"study-serve",
                  "serve the rating API for stored studies",
                  {kRoot,
                   {"store", "", "study database (default: <root>/studies.db)"},
                   {"host", "127.0.0.1", "bind address"},
                   {"port", 8080, "port"},
                   {"ui_dir", "", "static files served under /ui/"}},
                  cmd_study_serve});
  cmds.push_back({"report",
                  "aggregate the ratings of a study",
                  {kRoot, kOut,
                   {"store", "", "study database (default: <root>/studies.db)"},
                   {"study_id", "study", "study identifier"}},
                  cmd_report});
  std::vector<Key> serve = {kRoot, kSeed,
                            {"dataset", "", "dataset the desk oracles are fitted on"},
                            {"model", "", "model answering /classify (optional)"},
                            {"host", "127.0.0.1", "bind address"},
                            {"port", 8700, "port"}};
  for (auto& k : attack_keys())
    if (k.name == "oracles" || k.name == "mask_token" || k.name.rfind("desk_", 0) == 0)
      serve.push_back(k);
  cmds.push_back({"oracle-serve", "serve local oracles over the HTTP oracle protocol", serve,
                  cmd_oracle_serve});
  return cmds;
}

std::string flag_name(const std::string& key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

std::string default_text(const ojson& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& item : v) s += (s.empty() ? "" : ",") + item.get<std::string>();
    return s;
  }
  return v.dump();
}

std::string type_text(const ojson& v) {
  if (v.is_boolean()) return "BOOL";
  if (v.is_number_float()) return "FLOAT";
  if (v.is_number_integer()) return "UINT";
  if (v.is_array()) return "LIST";
  if (v.is_object()) return "JSON";
  return "TEXT";
}

}  // namespace

std::vector<std::string> command_names() {
  std::vector<std::string> out;
  for (const auto& c : commands()) out.push_back(c.name);
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const std::vector<Command> cmds = commands();
  CLI::App app{"Word-level adversarial attacks on text classifiers", "advtext"};
  app.require_subcommand(1);
  app.footer(
      "Every option is also a key of the JSON --config file (dashes become underscores); "
      "a top-level object named after the subcommand overrides shared keys. "
      "Precedence: flag > config file > default.");

  std::set<std::string> all_keys;
  for (const auto& c : cmds)
    for (const auto& k : c.keys) all_keys.insert(k.name);

  struct Bound {
    CLI::App* sub;
    std::string config;
    std::map<std::string, std::string> raw;
    std::map<std::string, CLI::Option*> opts;
  };
  std::vector<std::unique_ptr<Bound>> bound;
  for (const auto& c : cmds) {
    auto b = std::make_unique<Bound>();
    b->sub = app.add_subcommand(c.name, c.help);
    b->sub->add_option("--config", b->config, "JSON config file");
    for (const auto& k : c.keys) {
      auto* opt = b->sub->add_option(flag_name(k.name), b->raw[k.name],
                                     k.help + " [key: " + k.name + "]");
      opt->default_str(default_text(k.value));
      opt->type_name(type_text(k.value));
      b->opts[k.name] = opt;
    }
    bound.push_back(std::move(b));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  for (std::size_t i = 0; i < cmds.size(); ++i) {
    Bound& b = *bound[i];
    if (!b.sub->parsed()) continue;
    const Command& cmd = cmds[i];
    ojson defaults = ojson::object();
    for (const auto& k : cmd.keys) defaults[k.name] = k.value;
    std::unique_ptr<Context> ctx;
    try {
      Settings settings(defaults);
      if (!b.config.empty()) {
        std::set<std::string> foreign;
        for (const auto& k : all_keys)
          if (!settings.has(k)) foreign.insert(k);
        for (const auto& c : cmds) foreign.insert(c.name);
        settings.apply_file(b.config, cmd.name, foreign);
      }
      for (const auto& [key, opt] : b.opts)
        if (opt->count() > 0) settings.apply_flag(key, b.raw[key]);
      const fs::path root = settings.str("root");
      ctx.reset(new Context{cmd.name, std::move(settings), Workspace(root),
                            std::vector<std::string>(args.begin(), args.end()), out, err,
                            nullptr});
      cmd.handler(*ctx);
      return 0;
    } catch (const std::exception& e) {
      if (ctx && ctx->run) {
        try {
          if (ctx->run->manifest().status == "running") ctx->run->fail(e.what());
        } catch (const std::exception&) {
        }
      }
      err << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 1;
}

}  // namespace advtext::cli
