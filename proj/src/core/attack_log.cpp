#include "advtext/core/attack_log.hpp"

#include "advtext/core/error.hpp"
#include "advtext/core/text.hpp"

namespace advtext {

using nlohmann::ordered_json;

ordered_json to_json(const Prediction& p) {
  return ordered_json{{"label", p.label()}, {"scores", p.scores()}};
}

Prediction prediction_from_json(const ordered_json& j) {
  auto scores = j.at("scores").get<std::vector<double>>();
  // An "error" entry whose first query failed carries no prediction.
  if (scores.empty()) return Prediction();
  Prediction p(std::move(scores));
  if (j.contains("label") && j.at("label").get<LabelIndex>() != p.label())
    throw InvalidArgument("prediction label disagrees with argmax of scores");
  return p;
}

ordered_json to_json(const CandidateSubstitution& s) {
  return ordered_json{{"position", s.position},
                      {"original_word", s.original_word},
                      {"synonym", s.synonym},
                      {"mlm_rank", s.mlm_rank},
                      {"pos_original", s.pos_original},
                      {"pos_candidate", s.pos_candidate},
                      {"similarity", s.similarity},
                      {"victim_score_delta", s.victim_score_delta},
                      {"flipped", s.flipped}};
}

CandidateSubstitution substitution_from_json(const ordered_json& j) {
  CandidateSubstitution s;
  s.position = j.at("position").get<std::size_t>();
  s.original_word = j.at("original_word").get<std::string>();
  s.synonym = j.at("synonym").get<std::string>();
  s.mlm_rank = j.at("mlm_rank").get<std::size_t>();
  s.pos_original = j.at("pos_original").get<std::string>();
  s.pos_candidate = j.at("pos_candidate").get<std::string>();
  s.similarity = j.at("similarity").get<double>();
  s.victim_score_delta = j.at("victim_score_delta").get<double>();
  s.flipped = j.at("flipped").get<bool>();
  return s;
}

ordered_json to_json(const AttackLogEntry& e) {
  ordered_json j;
  j["example_id"] = e.example_id;
  j["model_id"] = e.model_id;
  j["dataset_tag"] = e.dataset_tag;
  j["gold_label"] = e.gold_label;
  j["original_text"] = e.original_text;
  j["original_prediction"] = to_json(e.original_prediction);
  j["adversarial_text"] =
      e.adversarial_text ? ordered_json(*e.adversarial_text) : ordered_json(nullptr);
  j["adversarial_prediction"] = e.adversarial_prediction
                                    ? to_json(*e.adversarial_prediction)
                                    : ordered_json(nullptr);
  j["status"] = std::string(to_string(e.status));
  ordered_json subs = ordered_json::array();
  for (const auto& s : e.substitutions) subs.push_back(to_json(s));
  j["substitutions"] = std::move(subs);
  j["query_count"] = e.query_count;
  j["config_hash"] = e.config_hash;
  j["note"] = e.note;
  return j;
}

AttackLogEntry entry_from_json(const ordered_json& j) {
  AttackLogEntry e;
  e.example_id = j.at("example_id").get<std::string>();
  e.model_id = j.value("model_id", std::string());
  e.dataset_tag = j.value("dataset_tag", std::string());
  e.gold_label = j.at("gold_label").get<LabelIndex>();
  e.original_text = j.at("original_text").get<std::string>();
  e.original_prediction = prediction_from_json(j.at("original_prediction"));
  if (j.contains("adversarial_text") && !j.at("adversarial_text").is_null())
    e.adversarial_text = j.at("adversarial_text").get<std::string>();
  if (j.contains("adversarial_prediction") && !j.at("adversarial_prediction").is_null())
    e.adversarial_prediction = prediction_from_json(j.at("adversarial_prediction"));
  e.status = parse_attack_status(j.at("status").get<std::string>());
  for (const auto& s : j.at("substitutions")) e.substitutions.push_back(substitution_from_json(s));
  e.query_count = j.at("query_count").get<std::size_t>();
  e.config_hash = j.at("config_hash").get<std::string>();
  e.note = j.value("note", std::string());
  return e;
}

std::string to_log_line(const AttackLogEntry& e) { return to_json(e).dump(); }

AttackLogEntry parse_log_line(const std::string& line) {
  return entry_from_json(ordered_json::parse(line));
}

void write_log(const std::vector<AttackLogEntry>& entries,
               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write attack log " + path.string());
  for (const auto& e : entries) out << to_log_line(e) << '\n';
  if (!out) throw Error("failed writing attack log " + path.string());
}

std::vector<AttackLogEntry> read_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open attack log " + path.string());
  std::vector<AttackLogEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      entries.push_back(parse_log_line(line));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("malformed attack log record: ") + e.what(), line_no);
    } catch (const InvalidArgument& e) {
      throw DataError(std::string("invalid attack log record: ") + e.what(), line_no);
    }
  }
  return entries;
}

AttackLogWriter::AttackLogWriter(const std::filesystem::path& path, bool append)
    : out_(path, std::ios::binary | (append ? std::ios::app : std::ios::trunc)) {
  if (!out_) throw Error("cannot open attack log " + path.string());
}

void AttackLogWriter::append(const AttackLogEntry& entry) {
  const std::string line = to_log_line(entry);
  std::lock_guard lock(mu_);
  out_ << line << '\n';
}

void AttackLogWriter::flush() {
  std::lock_guard lock(mu_);
  out_.flush();
}

}  // namespace advtext
