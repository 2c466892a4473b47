#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <json.hpp>

#include "advtext/oracles/oracles.hpp"

namespace httplib {
class Client;
class Server;
}  // namespace httplib

// HTTP JSON transport for the oracles. Endpoints:
//   POST /classify    {"text"}                           -> {"label","scores"}
//   POST /mask_fill   {"tokens","mask_position","top_k"} -> {"candidates":[{"token","rank","score"}]}
//   POST /pos_tag     {"tokens"}                         -> {"tags"}
//   POST /similarity  {"text_a","text_b"}                -> {"value"}
// Every response also carries {"model","version"}.
namespace advtext::remote {

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{50};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{2000};
};

struct Endpoint {
  std::string base_url;  // e.g. http://127.0.0.1:8700
  std::string model_id;  // expected model identifier; empty accepts any
  std::chrono::seconds timeout{30};
  RetryPolicy retry;
};

// One HTTP session. Single-session: not safe for concurrent calls.
class Transport {
 public:
  explicit Transport(Endpoint endpoint);
  ~Transport();
  Transport(const Transport&) = delete;
  Transport& operator=(const Transport&) = delete;

  // POSTs `body` to `path` with retry and exponential backoff. Throws
  // OracleUnavailable after the last attempt fails.
  nlohmann::json post(const std::string& path, const nlohmann::json& body);

  const Endpoint& endpoint() const { return endpoint_; }
  const std::string& served_model() const { return served_model_; }
  const std::string& served_version() const { return served_version_; }
  std::size_t requests() const { return requests_; }

 private:
  Endpoint endpoint_;
  std::unique_ptr<httplib::Client> client_;
  std::string served_model_;
  std::string served_version_;
  std::size_t requests_ = 0;
};

class HttpClassifier final : public Classifier {
 public:
  explicit HttpClassifier(Endpoint endpoint) : transport_(std::move(endpoint)) {}
  Prediction classify(std::string_view text) override;
  std::string model_id() const override;

 private:
  Transport transport_;
};

class HttpMaskedLm final : public MaskedLanguageModel {
 public:
  HttpMaskedLm(Endpoint endpoint, std::string mask_token)
      : transport_(std::move(endpoint)), mask_token_(std::move(mask_token)) {}
  std::vector<SynonymCandidate> mask_fill(const MaskedQuery& query) override;

 private:
  Transport transport_;
  std::string mask_token_;
};

class HttpPosTagger final : public PosTagger {
 public:
  explicit HttpPosTagger(Endpoint endpoint) : transport_(std::move(endpoint)) {}
  PosTagSequence pos_tag(const std::vector<std::string>& tokens) override;

 private:
  Transport transport_;
};

class HttpSimilarity final : public SimilarityScorer {
 public:
  explicit HttpSimilarity(Endpoint endpoint) : transport_(std::move(endpoint)) {}
  SimilarityScore similarity(std::string_view a, std::string_view b) override;

 private:
  Transport transport_;
};

// Serves local oracle implementations over the transport above. Any of the
// four may be null, in which case its endpoint answers 404. Calls into each
// oracle are serialized with a mutex.
class OracleServer {
 public:
  struct Backends {
    std::shared_ptr<Classifier> classifier;
    std::shared_ptr<MaskedLanguageModel> mlm;
    std::shared_ptr<PosTagger> tagger;
    std::shared_ptr<SimilarityScorer> similarity;
  };

  OracleServer(Backends backends, std::string model_id, std::string version);
  ~OracleServer();

  // Binds to host:port (port 0 picks a free port) and serves on a
  // background thread. Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  void install_routes();

  Backends backends_;
  std::string model_id_;
  std::string version_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::mutex classifier_mu_, mlm_mu_, tagger_mu_, similarity_mu_;
};

}  // namespace advtext::remote
