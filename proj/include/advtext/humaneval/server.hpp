#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <thread>

#include "advtext/humaneval/store.hpp"

namespace httplib {
class Server;
}

namespace advtext::humaneval {

// JSON API over a StudyStore:
//   POST /evaluators                      {id, group, display_alias}
//   GET  /study/:id/tasks?evaluator=E     unrated tasks + progress
//   POST /ratings                         {task_id, evaluator_id, value}
//   GET  /study/:id/report                aggregate report
//   GET  /studies                         study ids
// Errors come back as {"error": message} with 400 (malformed), 404
// (unknown study/task/evaluator), 409 (conflicting rating or group) or 422
// (value out of range). When `static_dir` exists it is served under /ui/.
class StudyServer {
 public:
  StudyServer(StudyStore& store, std::filesystem::path static_dir = {});
  ~StudyServer();

  int start(const std::string& host = "127.0.0.1", int port = 0);
  void run(const std::string& host, int port);
  void stop();

 private:
  void install_routes();
  StudyStore& store_;
  std::filesystem::path static_dir_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace advtext::humaneval
