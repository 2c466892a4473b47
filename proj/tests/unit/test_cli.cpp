#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "advtext/cli/cli.hpp"
#include "advtext/core/attack_log.hpp"
#include "fixtures.hpp"

using namespace advtext;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

json manifest(const fs::path& dir) { return json::parse(slurp(dir / "manifest.json")); }

std::size_t lines(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

// One workspace shared by the flow tests: a toy dataset and three small
// models, built once.
struct Workspace {
  fixtures::TempDir dir;
  std::string root = dir.path().string();

  Workspace() {
    REQUIRE(invoke({"ingest", "--root", root, "--name", "toy", "--toy-size", "300"}).code == 0);
    const std::vector<std::string> small = {"--embedding-dim", "16", "--epochs", "3",
                                            "--learning-rate", "0.01",
                                            "--pretrain-embeddings", "false"};
    auto train = [&](const std::string& arch, const std::string& name, const std::string& params) {
      std::vector<std::string> a = {"train", "--root", root, "--dataset", "toy", "--arch", arch,
                                    "--name", name, "--arch-params", params};
      a.insert(a.end(), small.begin(), small.end());
      const auto r = invoke(a);
      REQUIRE_MESSAGE(r.code == 0, r.err);
    };
    train("cnn", "cnn", R"({"filters": 8})");
    train("lstm", "lstm", R"({"hidden": 8})");
    train("transformer", "bert", R"({"d_model": 16, "heads": 2, "layers": 1, "ff": 32})");
  }

  Outcome attack(const std::string& model, const std::string& out,
                 const std::map<std::string, std::string>& overrides = {}) const {
    std::map<std::string, std::string> flags = {{"--n", "40"}, {"--oracles", "mock"},
                                                {"--sim-threshold", "0.5"}, {"--workers", "1"}};
    for (const auto& [k, v] : overrides) flags[k] = v;
    std::vector<std::string> a = {"attack", "--root", root, "--dataset", "toy",
                                  "--model", model, "--out", out};
    for (const auto& [k, v] : flags) {
      a.push_back(k);
      a.push_back(v);
    }
    return invoke(a);
  }
};

Workspace& shared() {
  static Workspace w;
  return w;
}

}  // namespace

TEST_CASE("ingest and train write bundles with manifests") {
  auto& w = shared();
  const fs::path data = w.dir / "datasets" / "toy";
  for (const char* f : {"full.jsonl", "train.jsonl", "test.jsonl", "manifest.json"})
    CHECK(fs::exists(data / f));
  CHECK(manifest(data)["status"] == "complete");
  CHECK(manifest(data)["command"] == "ingest");
  CHECK(lines(data / "test.jsonl") == 60);
  const fs::path model = w.dir / "models" / "cnn";
  for (const char* f : {"spec.json", "weights.bin", "report.json", "manifest.json"})
    CHECK(fs::exists(model / f));
  const json m = manifest(model);
  CHECK(m["model_ids"] == json::array({"cnn"}));
  CHECK(m["dataset_hashes"].contains("toy"));
  CHECK(m["config"]["embedding_dim"] == 16);
  CHECK(!m["version"].get<std::string>().empty());
}

TEST_CASE("attack writes a log, metrics and a completed manifest") {
  auto& w = shared();
  const fs::path out = w.dir / "runs" / "a1";
  const auto r = w.attack("cnn", out.string());
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(lines(out / "log.jsonl") == 40);
  CHECK(fs::exists(out / "metrics.csv"));
  CHECK_FALSE(fs::exists(out / ".partial"));
  const json m = manifest(out);
  CHECK(m["status"] == "complete");
  CHECK(m["seed"] == 42);
  CHECK(m["config"]["sim_threshold"] == 0.5);
  CHECK(m["outputs"].size() >= 2);
  std::size_t manifests = 0;
  for (const auto& e : fs::directory_iterator(out)) manifests += e.path().filename() == "manifest.json";
  CHECK(manifests == 1);
  const auto log = read_log(out / "log.jsonl");
  for (const auto& e : log) CHECK(e.model_id == "cnn");

  const auto again = invoke({"metrics", "--root", w.root, "--log", (out / "log.jsonl").string(),
                          "--out", (w.dir / "runs" / "m1").string()});
  CHECK(again.code == 0);
  CHECK(again.out.find("Att_SR") != std::string::npos);
  CHECK(fs::exists(w.dir / "runs" / "m1" / "metrics.csv"));
}

TEST_CASE("replay reproduces the log byte for byte") {
  auto& w = shared();
  const fs::path a = w.dir / "runs" / "r1", b = w.dir / "runs" / "r2";
  REQUIRE(w.attack("lstm", a.string()).code == 0);
  REQUIRE(w.attack("lstm", b.string(), {{"--workers", "3"}}).code == 0);
  CHECK(slurp(a / "log.jsonl") == slurp(b / "log.jsonl"));
  CHECK(manifest(a)["config_hash"] == manifest(b)["config_hash"]);
}

TEST_CASE("metrics on an empty log fails") {
  auto& w = shared();
  const fs::path empty = w.dir / "empty.jsonl";
  std::ofstream(empty).close();
  const auto r = invoke({"metrics", "--root", w.root, "--log", empty.string(), "--out",
                      (w.dir / "runs" / "m-empty").string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("empty log") != std::string::npos);
}

TEST_CASE("transfer with two sources yields two cells") {
  auto& w = shared();
  REQUIRE(w.attack("cnn", (w.dir / "runs" / "t-cnn").string()).code == 0);
  REQUIRE(w.attack("lstm", (w.dir / "runs" / "t-lstm").string()).code == 0);
  const std::size_t n = 3;
  const fs::path out = w.dir / "runs" / "transfer";
  const auto r = invoke({"transfer", "--root", w.root, "--dataset", "toy", "--sources", "cnn,lstm",
                      "--victim", "bert", "--n", std::to_string(n), "--logs",
                      "cnn=" + (w.dir / "runs" / "t-cnn" / "log.jsonl").string() + ",lstm=" +
                          (w.dir / "runs" / "t-lstm" / "log.jsonl").string(),
                      "--out", out.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(lines(out / "transfer.csv") == 1 + 2);
  CHECK(manifest(out)["status"] == "complete");
}

TEST_CASE("defend refine-tunes and re-attacks") {
  auto& w = shared();
  const fs::path log = w.dir / "runs" / "a1" / "log.jsonl";
  if (!fs::exists(log)) REQUIRE(w.attack("cnn", (w.dir / "runs" / "a1").string()).code == 0);
  const fs::path out = w.dir / "runs" / "defend";
  const auto r = invoke({"defend", "--root", w.root, "--log", log.string(), "--epochs", "2",
                      "--out", out.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  for (const char* f : {"log.jsonl", "metrics.csv", "defense.csv", "manifest.json"})
    CHECK(fs::exists(out / f));
  CHECK(fs::exists(w.dir / "models" / "cnn-defended" / "manifest.json"));
  // the attack settings come from the attack run
  CHECK(manifest(out)["config"]["sim_threshold"] == 0.5);
  CHECK(lines(out / "log.jsonl") == 40);
}

TEST_CASE("study-build and report") {
  auto& w = shared();
  for (const char* m : {"cnn", "lstm", "bert"})
    REQUIRE(w.attack(m, (w.dir / "runs" / (std::string("s-") + m)).string()).code == 0);
  std::string logs;
  for (const char* m : {"cnn", "lstm", "bert"})
    logs += std::string(logs.empty() ? "" : ",") + m + "=" +
            (w.dir / "runs" / (std::string("s-") + m) / "log.jsonl").string();
  const auto r = invoke({"study-build", "--root", w.root, "--dataset", "toy", "--sources",
                      "cnn,lstm,bert", "--logs", logs, "--per-model", "2", "--study-id", "pilot",
                      "--out", (w.dir / "runs" / "study").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("12 grammar and 6 semantic") != std::string::npos);
  const auto rep = invoke({"report", "--root", w.root, "--study-id", "pilot", "--out",
                        (w.dir / "runs" / "report").string()});
  CHECK(rep.code == 0);
  const auto dup = invoke({"study-build", "--root", w.root, "--dataset", "toy", "--sources",
                        "cnn,lstm,bert", "--logs", logs, "--per-model", "2", "--study-id",
                        "pilot", "--out", (w.dir / "runs" / "study2").string()});
  CHECK(dup.code != 0);
}

TEST_CASE("failed run keeps its partial marker") {
  auto& w = shared();
  const fs::path out = w.dir / "runs" / "broken";
  const auto r = w.attack("cnn", out.string(),
                          {{"--n", "2"},
                           {"--oracles", "remote"},
                           {"--oracle-url", "http://127.0.0.1:1"},
                           {"--oracle-timeout", "1"}});
  CHECK(r.code != 0);
  CHECK(fs::exists(out / ".partial"));
  const json m = manifest(out);
  CHECK(m["status"] == "failed");
  CHECK(!m["error"].get<std::string>().empty());
}

TEST_CASE("config precedence is flag over file over default") {
  auto& w = shared();
  const fs::path cfg = w.dir / "cfg.json";
  std::ofstream(cfg) << R"({"sim_threshold": 0.55, "top_k": 7, "per_model": 3,
                            "attack": {"top_k": 9, "n": 5}})";
  const fs::path a = w.dir / "runs" / "p1";
  REQUIRE(invoke({"attack", "--config", cfg.string(), "--root", w.root, "--dataset", "toy",
               "--model", "cnn", "--oracles", "mock", "--n", "4", "--workers", "1", "--out",
               a.string()})
              .code == 0);
  const json c = manifest(a)["config"];
  CHECK(c["sim_threshold"] == 0.55);  // file
  CHECK(c["top_k"] == 9);             // section beats top level
  CHECK(c["n"] == 4);                 // flag beats section
  CHECK(c["max_words_perturbed"] == 0);  // default
  CHECK_FALSE(c.contains("per_model"));

  std::ofstream(w.dir / "bad.json") << R"({"no_such_key": 1})";
  CHECK(invoke({"attack", "--config", (w.dir / "bad.json").string(), "--root", w.root}).code != 0);
  const auto missing = invoke({"attack", "--config", (w.dir / "absent.json").string(), "--root",
                            w.root, "--dataset", "toy", "--model", "cnn"});
  CHECK(missing.code != 0);
  CHECK(missing.err.find("absent.json") != std::string::npos);
}

TEST_CASE("flag errors and help") {
  CHECK(invoke({"attack", "--no-such-flag", "1"}).code != 0);
  CHECK(invoke({"frobnicate"}).code != 0);
  CHECK(invoke({}).code != 0);
  CHECK(invoke({"attack", "--top-k", "many"}).code != 0);
  const auto help = invoke({"attack", "--help"});
  CHECK(help.code == 0);
  for (const char* k : {"--sim-threshold", "[key: sim_threshold]", "--top-k", "--seed",
                        "--workers", "--config", "--max-words-perturbed"})
    CHECK(help.out.find(k) != std::string::npos);
  for (const auto& name : cli::command_names()) {
    const auto h = invoke({name, "--help"});
    CHECK_MESSAGE(h.code == 0, name);
  }
}
