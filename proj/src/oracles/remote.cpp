#include "advtext/oracles/remote.hpp"

#include <httplib.h>

#include "advtext/core/error.hpp"

namespace advtext::remote {

using nlohmann::json;

Transport::Transport(Endpoint endpoint)
    : endpoint_(std::move(endpoint)),
      client_(std::make_unique<httplib::Client>(endpoint_.base_url)) {
  client_->set_connection_timeout(endpoint_.timeout);
  client_->set_read_timeout(endpoint_.timeout);
  client_->set_write_timeout(endpoint_.timeout);
}

Transport::~Transport() = default;

json Transport::post(const std::string& path, const json& body) {
  const std::size_t index = requests_++;
  const std::string payload = body.dump();
  auto backoff = endpoint_.retry.initial_backoff;
  std::string last_error;
  const int attempts = std::max(1, endpoint_.retry.max_attempts);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff = std::min(
          endpoint_.retry.max_backoff,
          std::chrono::milliseconds(static_cast<long long>(
              static_cast<double>(backoff.count()) * endpoint_.retry.multiplier)));
    }
    auto res = client_->Post(path, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server error " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      // Client errors are not transient.
      throw OracleUnavailable(endpoint_.base_url + path + " answered " +
                                  std::to_string(res->status) + ": " + res->body,
                              index);
    }
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw OracleUnavailable(endpoint_.base_url + path + " malformed reply: " + e.what(),
                              index);
    }
    served_model_ = reply.value("model", std::string());
    served_version_ = reply.value("version", std::string());
    if (!endpoint_.model_id.empty() && served_model_ != endpoint_.model_id)
      throw OracleUnavailable(endpoint_.base_url + " serves model '" + served_model_ +
                                  "', expected '" + endpoint_.model_id + "'",
                              index);
    return reply;
  }
  throw OracleUnavailable(endpoint_.base_url + path + ": " + last_error, index);
}

Prediction HttpClassifier::classify(std::string_view text) {
  const json reply = transport_.post("/classify", json{{"text", std::string(text)}});
  try {
    return Prediction(reply.at("scores").get<std::vector<double>>());
  } catch (const std::exception& e) {
    throw OracleUnavailable(std::string("bad /classify reply: ") + e.what(),
                            transport_.requests() - 1);
  }
}

std::string HttpClassifier::model_id() const {
  if (!transport_.endpoint().model_id.empty()) return transport_.endpoint().model_id;
  if (!transport_.served_model().empty()) return transport_.served_model();
  return transport_.endpoint().base_url;
}

std::vector<SynonymCandidate> HttpMaskedLm::mask_fill(const MaskedQuery& query) {
  query.validate();
  const json reply = transport_.post(
      "/mask_fill", json{{"tokens", query.tokens},
                         {"mask_position", query.mask_position},
                         {"top_k", query.top_k},
                         {"mask_token", mask_token_}});
  std::vector<SynonymCandidate> raw;
  for (const auto& c : reply.at("candidates")) {
    raw.push_back({c.at("token").get<std::string>(), c.value("rank", raw.size()),
                   c.value("score", 0.0)});
  }
  return keep_whole_words(std::move(raw), mask_token_, query.top_k);
}

PosTagSequence HttpPosTagger::pos_tag(const std::vector<std::string>& tokens) {
  const json reply = transport_.post("/pos_tag", json{{"tokens", tokens}});
  PosTagSequence out{reply.at("tags").get<std::vector<std::string>>()};
  if (out.tags.size() != tokens.size())
    throw OracleUnavailable("/pos_tag returned " + std::to_string(out.tags.size()) +
                                " tags for " + std::to_string(tokens.size()) + " tokens",
                            transport_.requests() - 1);
  return out;
}

SimilarityScore HttpSimilarity::similarity(std::string_view a, std::string_view b) {
  const json reply = transport_.post(
      "/similarity", json{{"text_a", std::string(a)}, {"text_b", std::string(b)}});
  return {reply.at("value").get<double>()};
}

OracleServer::OracleServer(Backends backends, std::string model_id, std::string version)
    : backends_(std::move(backends)),
      model_id_(std::move(model_id)),
      version_(std::move(version)),
      server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

OracleServer::~OracleServer() { stop(); }

void OracleServer::install_routes() {
  const auto handle = [this](auto&& fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      try {
        json body = json::parse(req.body);
        json reply = fn(body);
        reply["model"] = model_id_;
        reply["version"] = version_;
        res.set_content(reply.dump(), "application/json");
      } catch (const json::exception& e) {
        res.status = 400;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      } catch (const InvalidArgument& e) {
        res.status = 400;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      }
    };
  };

  if (backends_.classifier) {
    server_->Post("/classify", handle([this](const json& body) {
      std::lock_guard lock(classifier_mu_);
      const Prediction p = backends_.classifier->classify(body.at("text").get<std::string>());
      return json{{"label", p.label()}, {"scores", p.scores()}};
    }));
  }
  if (backends_.mlm) {
    server_->Post("/mask_fill", handle([this](const json& body) {
      MaskedQuery q{body.at("tokens").get<std::vector<std::string>>(),
                    body.at("mask_position").get<std::size_t>(),
                    body.value("top_k", std::size_t{50})};
      std::lock_guard lock(mlm_mu_);
      json cands = json::array();
      for (const auto& c : backends_.mlm->mask_fill(q))
        cands.push_back({{"token", c.token}, {"rank", c.mlm_rank}, {"score", c.mlm_score}});
      return json{{"candidates", cands}};
    }));
  }
  if (backends_.tagger) {
    server_->Post("/pos_tag", handle([this](const json& body) {
      std::lock_guard lock(tagger_mu_);
      return json{{"tags", backends_.tagger
                               ->pos_tag(body.at("tokens").get<std::vector<std::string>>())
                               .tags}};
    }));
  }
  if (backends_.similarity) {
    server_->Post("/similarity", handle([this](const json& body) {
      std::lock_guard lock(similarity_mu_);
      return json{{"value", backends_.similarity
                                ->similarity(body.at("text_a").get<std::string>(),
                                             body.at("text_b").get<std::string>())
                                .value}};
    }));
  }
}

int OracleServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host)
                              : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind oracle server to " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void OracleServer::run(const std::string& host, int port) {
  if (!server_->listen(host, port))
    throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

void OracleServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace advtext::remote
