#include "advtext/humaneval/server.hpp"

#include <httplib.h>

#include <json.hpp>

#include "advtext/core/error.hpp"

namespace advtext::humaneval {

using json = nlohmann::json;

namespace {

void reply(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, nlohmann::ordered_json{{"error", message}});
}

template <typename Fn>
auto guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const json::exception& e) {
      fail(res, 400, std::string("malformed request: ") + e.what());
    } catch (const NotFound& e) {
      fail(res, 404, e.what());
    } catch (const Conflict& e) {
      fail(res, 409, e.what());
    } catch (const OutOfRange& e) {
      fail(res, 422, e.what());
    } catch (const StudyError& e) {
      fail(res, 422, e.what());
    } catch (const InvalidArgument& e) {
      fail(res, 400, e.what());
    } catch (const std::exception& e) {
      fail(res, 500, e.what());
    }
  };
}

}  // namespace

StudyServer::StudyServer(StudyStore& store, std::filesystem::path static_dir)
    : store_(store), static_dir_(std::move(static_dir)),
      server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

StudyServer::~StudyServer() { stop(); }

void StudyServer::install_routes() {
  server_->Post("/evaluators", guarded([this](const httplib::Request& req,
                                              httplib::Response& res) {
    const json body = json::parse(req.body);
    Evaluator e;
    e.id = body.at("id").get<std::string>();
    e.group = parse_group(body.at("group").get<std::string>());
    e.display_alias = body.value("display_alias", e.id);
    const bool existed = store_.evaluator(e.id).has_value();
    store_.register_evaluator(e);
    reply(res, existed ? 200 : 201,
          {{"id", e.id}, {"group", to_string(e.group)}, {"display_alias", e.display_alias}});
  }));

  server_->Get("/studies", guarded([this](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, {{"studies", store_.study_ids()}});
  }));

  server_->Get(R"(/study/([^/]+)/tasks)", guarded([this](const httplib::Request& req,
                                                         httplib::Response& res) {
    const std::string study = req.matches[1];
    if (!store_.has_study(study)) throw NotFound("unknown study: " + study);
    const std::string evaluator = req.get_param_value("evaluator");
    if (evaluator.empty()) throw InvalidArgument("missing evaluator parameter");
    if (!store_.evaluator(evaluator)) {
      reply(res, 404, {{"error", "unknown evaluator: " + evaluator}, {"register", true}});
      return;
    }
    std::size_t limit = 0;
    if (req.has_param("limit")) limit = std::stoul(req.get_param_value("limit"));
    nlohmann::ordered_json body;
    body["study_id"] = study;
    body["evaluator"] = evaluator;
    body["progress"] = {{"rated", store_.rated_count(study, evaluator)},
                        {"total", store_.task_count(study)}};
    body["tasks"] = store_.next_tasks(study, evaluator, limit);
    reply(res, 200, body);
  }));

  server_->Post("/ratings", guarded([this](const httplib::Request& req,
                                           httplib::Response& res) {
    const json body = json::parse(req.body);
    RatingRecord r;
    r.task_id = body.at("task_id").get<std::string>();
    r.evaluator_id = body.at("evaluator_id").get<std::string>();
    r.value = body.at("value").get<int>();
    const auto result = store_.submit_rating(r);
    const bool stored = result == StudyStore::SubmitResult::kStored;
    reply(res, stored ? 201 : 200,
          {{"task_id", r.task_id},
           {"evaluator_id", r.evaluator_id},
           {"value", r.value},
           {"status", stored ? "stored" : "duplicate"}});
  }));

  server_->Get(R"(/study/([^/]+)/report)", guarded([this](const httplib::Request& req,
                                                          httplib::Response& res) {
    const std::string study_id = req.matches[1];
    const Study study = store_.load_study(study_id);
    reply(res, 200, aggregate(store_.ratings(study_id), study, store_.evaluators()).to_json());
  }));

  if (!static_dir_.empty() && std::filesystem::is_directory(static_dir_))
    server_->set_mount_point("/ui", static_dir_.string());
}

int StudyServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host)
                              : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind study server to " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void StudyServer::run(const std::string& host, int port) {
  if (!server_->listen(host, port))
    throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

void StudyServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace advtext::humaneval
