#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "advtext/core/types.hpp"

namespace advtext {

// Attack logs are line-delimited JSON, one AttackLogEntry per line, UTF-8.
// Field order is fixed so identical entries serialize to identical bytes.

nlohmann::ordered_json to_json(const Prediction& p);
Prediction prediction_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json to_json(const CandidateSubstitution& s);
CandidateSubstitution substitution_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json to_json(const AttackLogEntry& e);
AttackLogEntry entry_from_json(const nlohmann::ordered_json& j);

std::string to_log_line(const AttackLogEntry& e);
AttackLogEntry parse_log_line(const std::string& line);

void write_log(const std::vector<AttackLogEntry>& entries,
               const std::filesystem::path& path);
// Throws DataError with the line number on a malformed record.
std::vector<AttackLogEntry> read_log(const std::filesystem::path& path);

// Append-only writer; safe to share between threads.
class AttackLogWriter {
 public:
  explicit AttackLogWriter(const std::filesystem::path& path, bool append = false);
  void append(const AttackLogEntry& entry);
  void flush();

 private:
  std::mutex mu_;
  std::ofstream out_;
};

}  // namespace advtext
