#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace advtext::cli {

// Layered configuration: defaults, then a JSON config file, then flags.
// The type of each default decides how a flag string is converted.
class Settings {
 public:
  explicit Settings(nlohmann::ordered_json defaults);

  // Top-level keys known to this command apply; an object under `section`
  // applies over them. Keys in `foreign` (other commands' keys) are
  // ignored, anything else is an error.
  void apply_file(const std::filesystem::path& path, std::string_view section,
                  const std::set<std::string>& foreign);
  void apply(const std::string& key, const nlohmann::json& value);
  void apply_flag(const std::string& key, const std::string& raw);
  // Takes values for keys that no file or flag has set.
  void inherit(const nlohmann::json& values);
  bool is_set(const std::string& key) const { return set_.count(key) > 0; }

  bool has(const std::string& key) const;
  const nlohmann::ordered_json& resolved() const { return values_; }
  std::string str(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  double num(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<std::string> list(const std::string& key) const;
  const nlohmann::ordered_json& raw(const std::string& key) const;

  // Hash of the resolved values without `excluded` keys.
  std::string hash(const std::set<std::string>& excluded) const;

 private:
  nlohmann::ordered_json defaults_;
  nlohmann::ordered_json values_;
  std::set<std::string> set_;
};

std::vector<std::string> split_list(std::string_view s);

}  // namespace advtext::cli
