#include "advtext/humaneval/store.hpp"

#include <chrono>
#include <ctime>

#include <fmt/format.h>
#include <sqlite3.h>

#include "advtext/core/error.hpp"

namespace advtext::humaneval {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() %
      1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  return fmt::format("{}.{:03d}Z", buf, static_cast<int>(ms));
}

namespace {

class Stmt {
 public:
  Stmt(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &st_, nullptr) != SQLITE_OK)
      throw Error(std::string("sqlite prepare failed: ") + sqlite3_errmsg(db));
  }
  ~Stmt() { sqlite3_finalize(st_); }
  Stmt& bind(int i, const std::string& v) {
    sqlite3_bind_text(st_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Stmt& bind(int i, long long v) {
    sqlite3_bind_int64(st_, i, v);
    return *this;
  }
  // True while a row is available.
  bool step() {
    const int rc = sqlite3_step(st_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw Error(std::string("sqlite step failed: ") + sqlite3_errmsg(db_));
  }
  std::string text(int col) const {
    const auto* p = sqlite3_column_text(st_, col);
    return p ? std::string(reinterpret_cast<const char*>(p)) : std::string();
  }
  long long integer(int col) const { return sqlite3_column_int64(st_, col); }

 private:
  sqlite3* db_;
  sqlite3_stmt* st_ = nullptr;
};

constexpr const char* kSchema = R"sql(
PRAGMA foreign_keys = ON;
CREATE TABLE IF NOT EXISTS studies (
  study_id TEXT PRIMARY KEY,
  seed INTEGER NOT NULL,
  created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS tasks (
  task_id TEXT PRIMARY KEY,
  study_id TEXT NOT NULL REFERENCES studies(study_id),
  kind TEXT NOT NULL CHECK (kind IN ('grammar', 'semantic')),
  position INTEGER NOT NULL,
  source_model TEXT NOT NULL,
  text TEXT NOT NULL,
  reference_text TEXT,
  hidden_origin TEXT CHECK (hidden_origin IN ('original', 'adversarial'))
);
CREATE INDEX IF NOT EXISTS tasks_by_study ON tasks(study_id, kind, position);
CREATE TABLE IF NOT EXISTS evaluators (
  evaluator_id TEXT PRIMARY KEY,
  grp TEXT NOT NULL CHECK (grp IN ('linguist', 'non_linguist')),
  display_alias TEXT NOT NULL,
  created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS ratings (
  rating_id INTEGER PRIMARY KEY AUTOINCREMENT,
  task_id TEXT NOT NULL REFERENCES tasks(task_id),
  evaluator_id TEXT NOT NULL REFERENCES evaluators(evaluator_id),
  value INTEGER NOT NULL CHECK (value BETWEEN 1 AND 5),
  created_at TEXT NOT NULL,
  UNIQUE (task_id, evaluator_id)
);
CREATE TRIGGER IF NOT EXISTS ratings_no_update BEFORE UPDATE ON ratings
BEGIN SELECT RAISE(ABORT, 'ratings are immutable'); END;
CREATE TRIGGER IF NOT EXISTS ratings_no_delete BEFORE DELETE ON ratings
BEGIN SELECT RAISE(ABORT, 'ratings are immutable'); END;
)sql";

}  // namespace

StudyStore::StudyStore(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (sqlite3_open_v2(path.string().c_str(), &db_,
                      SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    const std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw Error("cannot open study store " + path.string() + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec("PRAGMA journal_mode = WAL;");
  exec(kSchema);
}

StudyStore::~StudyStore() { sqlite3_close(db_); }

void StudyStore::exec(const char* sql) const {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown";
    sqlite3_free(err);
    throw Error("sqlite: " + msg);
  }
}

void StudyStore::save_study(const Study& study) {
  std::lock_guard lock(mu_);
  exec("BEGIN IMMEDIATE;");
  try {
    {
      Stmt s(db_, "SELECT 1 FROM studies WHERE study_id = ?");
      s.bind(1, study.study_id);
      if (s.step()) throw Conflict("study already exists: " + study.study_id);
    }
    Stmt s(db_, "INSERT INTO studies(study_id, seed, created_at) VALUES (?, ?, ?)");
    s.bind(1, study.study_id).bind(2, static_cast<long long>(study.seed)).bind(3, utc_timestamp());
    s.step();
    long long pos = 0;
    for (const auto& t : study.grammar) {
      Stmt ins(db_,
               "INSERT INTO tasks(task_id, study_id, kind, position, source_model, text, "
               "reference_text, hidden_origin) VALUES (?, ?, 'grammar', ?, ?, ?, NULL, ?)");
      ins.bind(1, t.task_id).bind(2, study.study_id).bind(3, pos++).bind(4, t.source_model);
      ins.bind(5, t.text).bind(6, std::string(to_string(t.hidden_origin)));
      ins.step();
    }
    pos = 0;
    for (const auto& t : study.semantic) {
      Stmt ins(db_,
               "INSERT INTO tasks(task_id, study_id, kind, position, source_model, text, "
               "reference_text, hidden_origin) VALUES (?, ?, 'semantic', ?, ?, ?, ?, NULL)");
      ins.bind(1, t.task_id).bind(2, study.study_id).bind(3, pos++).bind(4, t.source_model);
      ins.bind(5, t.adversarial_text).bind(6, t.original_text);
      ins.step();
    }
    exec("COMMIT;");
  } catch (...) {
    exec("ROLLBACK;");
    throw;
  }
}

Study StudyStore::load_study(const std::string& study_id) const {
  std::lock_guard lock(mu_);
  Study study;
  {
    Stmt s(db_, "SELECT seed FROM studies WHERE study_id = ?");
    s.bind(1, study_id);
    if (!s.step()) throw NotFound("unknown study: " + study_id);
    study.study_id = study_id;
    study.seed = static_cast<std::uint64_t>(s.integer(0));
  }
  Stmt s(db_,
         "SELECT task_id, kind, source_model, text, reference_text, hidden_origin FROM tasks "
         "WHERE study_id = ? ORDER BY kind, position");
  s.bind(1, study_id);
  while (s.step()) {
    if (s.text(1) == "grammar")
      study.grammar.push_back({s.text(0), s.text(3), parse_origin(s.text(5)), s.text(2)});
    else
      study.semantic.push_back({s.text(0), s.text(4), s.text(3), s.text(2)});
  }
  return study;
}

std::vector<std::string> StudyStore::study_ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  Stmt s(db_, "SELECT study_id FROM studies ORDER BY study_id");
  while (s.step()) out.push_back(s.text(0));
  return out;
}

bool StudyStore::has_study(const std::string& study_id) const {
  std::lock_guard lock(mu_);
  Stmt s(db_, "SELECT 1 FROM studies WHERE study_id = ?");
  s.bind(1, study_id);
  return s.step();
}

void StudyStore::register_evaluator(const Evaluator& e) {
  if (e.id.empty()) throw StudyError("evaluator id must not be empty");
  std::lock_guard lock(mu_);
  {
    Stmt s(db_, "SELECT grp FROM evaluators WHERE evaluator_id = ?");
    s.bind(1, e.id);
    if (s.step()) {
      if (s.text(0) != to_string(e.group))
        throw Conflict("evaluator " + e.id + " already registered as " + s.text(0));
      return;
    }
  }
  Stmt s(db_,
         "INSERT INTO evaluators(evaluator_id, grp, display_alias, created_at) "
         "VALUES (?, ?, ?, ?)");
  s.bind(1, e.id).bind(2, std::string(to_string(e.group)));
  s.bind(3, e.display_alias.empty() ? e.id : e.display_alias).bind(4, utc_timestamp());
  s.step();
}

std::optional<Evaluator> StudyStore::evaluator(const std::string& id) const {
  std::lock_guard lock(mu_);
  Stmt s(db_, "SELECT grp, display_alias FROM evaluators WHERE evaluator_id = ?");
  s.bind(1, id);
  if (!s.step()) return std::nullopt;
  return Evaluator{id, parse_group(s.text(0)), s.text(1)};
}

std::vector<Evaluator> StudyStore::evaluators() const {
  std::lock_guard lock(mu_);
  std::vector<Evaluator> out;
  Stmt s(db_, "SELECT evaluator_id, grp, display_alias FROM evaluators ORDER BY evaluator_id");
  while (s.step()) out.push_back({s.text(0), parse_group(s.text(1)), s.text(2)});
  return out;
}

StudyStore::SubmitResult StudyStore::submit_rating(RatingRecord r) {
  if (r.value < 1 || r.value > 5)
    throw OutOfRange("rating value " + std::to_string(r.value) + " outside 1..5");
  if (r.timestamp.empty()) r.timestamp = utc_timestamp();
  std::lock_guard lock(mu_);
  {
    Stmt s(db_, "SELECT 1 FROM tasks WHERE task_id = ?");
    s.bind(1, r.task_id);
    if (!s.step()) throw NotFound("unknown task: " + r.task_id);
  }
  {
    Stmt s(db_, "SELECT 1 FROM evaluators WHERE evaluator_id = ?");
    s.bind(1, r.evaluator_id);
    if (!s.step()) throw NotFound("unknown evaluator: " + r.evaluator_id);
  }
  Stmt ins(db_,
           "INSERT INTO ratings(task_id, evaluator_id, value, created_at) VALUES (?, ?, ?, ?) "
           "ON CONFLICT(task_id, evaluator_id) DO NOTHING");
  ins.bind(1, r.task_id).bind(2, r.evaluator_id).bind(3, static_cast<long long>(r.value));
  ins.bind(4, r.timestamp);
  ins.step();
  if (sqlite3_changes(db_) == 1) return SubmitResult::kStored;
  Stmt s(db_, "SELECT value FROM ratings WHERE task_id = ? AND evaluator_id = ?");
  s.bind(1, r.task_id).bind(2, r.evaluator_id);
  s.step();
  if (s.integer(0) != r.value)
    throw Conflict(fmt::format("task {} already rated {} by {}; ratings are immutable",
                                 r.task_id, s.integer(0), r.evaluator_id));
  return SubmitResult::kDuplicate;
}

std::vector<RatingRecord> StudyStore::ratings(const std::string& study_id) const {
  std::lock_guard lock(mu_);
  std::vector<RatingRecord> out;
  Stmt s(db_,
         "SELECT r.task_id, r.evaluator_id, r.value, r.created_at FROM ratings r "
         "JOIN tasks t ON t.task_id = r.task_id WHERE t.study_id = ? ORDER BY r.rating_id");
  s.bind(1, study_id);
  while (s.step())
    out.push_back({s.text(0), s.text(1), static_cast<int>(s.integer(2)), s.text(3)});
  return out;
}

std::vector<nlohmann::ordered_json> StudyStore::next_tasks(const std::string& study_id,
                                                           const std::string& evaluator_id,
                                                           std::size_t limit) const {
  std::lock_guard lock(mu_);
  std::vector<nlohmann::ordered_json> out;
  Stmt s(db_,
         "SELECT t.task_id, t.kind, t.text, t.reference_text FROM tasks t "
         "WHERE t.study_id = ? AND NOT EXISTS (SELECT 1 FROM ratings r "
         "WHERE r.task_id = t.task_id AND r.evaluator_id = ?) ORDER BY t.kind, t.position");
  s.bind(1, study_id).bind(2, evaluator_id);
  while (s.step()) {
    if (limit && out.size() == limit) break;
    if (s.text(1) == "grammar") {
      GrammarTask t{s.text(0), s.text(2), Origin::kOriginal, ""};
      out.push_back(client_view(t));
    } else {
      SemanticTask t{s.text(0), s.text(3), s.text(2), ""};
      out.push_back(client_view(t));
    }
  }
  return out;
}

std::size_t StudyStore::task_count(const std::string& study_id) const {
  std::lock_guard lock(mu_);
  Stmt s(db_, "SELECT COUNT(*) FROM tasks WHERE study_id = ?");
  s.bind(1, study_id);
  s.step();
  return static_cast<std::size_t>(s.integer(0));
}

std::size_t StudyStore::rated_count(const std::string& study_id,
                                    const std::string& evaluator_id) const {
  std::lock_guard lock(mu_);
  Stmt s(db_,
         "SELECT COUNT(*) FROM ratings r JOIN tasks t ON t.task_id = r.task_id "
         "WHERE t.study_id = ? AND r.evaluator_id = ?");
  s.bind(1, study_id).bind(2, evaluator_id);
  s.step();
  return static_cast<std::size_t>(s.integer(0));
}

}  // namespace advtext::humaneval
