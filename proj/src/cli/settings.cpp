#include "advtext/cli/settings.hpp"

#include <fstream>

#include "advtext/core/error.hpp"
#include "advtext/core/hash.hpp"
#include "advtext/core/text.hpp"

namespace advtext::cli {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    std::string item = text::trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = end + 1;
  }
  return out;
}

Settings::Settings(ojson defaults) : defaults_(std::move(defaults)), values_(defaults_) {}

bool Settings::has(const std::string& key) const { return defaults_.contains(key); }

namespace {

bool compatible(const ojson& def, const json& v) {
  if (def.is_null()) return true;
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_number_float()) return v.is_number();
  if (def.is_number_integer()) return v.is_number_integer() && v.get<std::int64_t>() >= 0;
  if (def.is_string()) return v.is_string();
  if (def.is_array()) return v.is_array() || v.is_string();
  if (def.is_object()) return v.is_object();
  return false;
}

}  // namespace

void Settings::apply(const std::string& key, const json& value) {
  if (!has(key)) throw InvalidArgument("unknown config key: " + key);
  const ojson& def = defaults_.at(key);
  if (!compatible(def, value))
    throw InvalidArgument("config key " + key + " expects " + std::string(def.type_name()) +
                          ", got " + value.dump());
  if (def.is_array() && value.is_string()) {
    values_[key] = split_list(value.get<std::string>());
  } else {
    values_[key] = value;
  }
  set_.insert(key);
}

void Settings::inherit(const json& values) {
  for (const auto& [key, value] : values.items()) {
    if (!has(key) || is_set(key)) continue;
    if (compatible(defaults_.at(key), value)) values_[key] = value;
  }
}

void Settings::apply_flag(const std::string& key, const std::string& raw) {
  if (!has(key)) throw InvalidArgument("unknown config key: " + key);
  const ojson& def = defaults_.at(key);
  try {
    if (def.is_boolean()) {
      if (raw == "true" || raw == "1" || raw == "yes") return apply(key, true);
      if (raw == "false" || raw == "0" || raw == "no") return apply(key, false);
      throw InvalidArgument("");
    }
    if (def.is_number_float()) {
      std::size_t used = 0;
      const double v = std::stod(raw, &used);
      if (used != raw.size()) throw InvalidArgument("");
      return apply(key, v);
    }
    if (def.is_number_integer()) {
      if (raw.empty() || raw.find_first_not_of("0123456789") != std::string::npos)
        throw InvalidArgument("");
      return apply(key, std::stoull(raw));
    }
    if (def.is_object()) return apply(key, json::parse(raw));
    if (def.is_array()) return apply(key, raw);
    return apply(key, raw);
  } catch (const InvalidArgument& e) {
    if (std::string_view(e.what()).empty())
      throw InvalidArgument("invalid value for " + key + ": " + raw);
    throw;
  } catch (const std::exception&) {
    throw InvalidArgument("invalid value for " + key + ": " + raw);
  }
}

void Settings::apply_file(const std::filesystem::path& path, std::string_view section,
                          const std::set<std::string>& foreign) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("missing config file: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("malformed config file " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw InvalidArgument("config file must hold a JSON object");
  const json* sub = nullptr;
  for (const auto& [key, value] : doc.items()) {
    if (key == section && value.is_object()) {
      sub = &value;
      continue;
    }
    if (has(key)) {
      apply(key, value);
    } else if (!foreign.count(key)) {
      throw InvalidArgument("unknown config key: " + key);
    }
  }
  if (sub)
    for (const auto& [key, value] : sub->items()) apply(key, value);
}

const ojson& Settings::raw(const std::string& key) const {
  if (!has(key)) throw InvalidArgument("unknown config key: " + key);
  return values_.at(key);
}

std::string Settings::str(const std::string& key) const {
  const ojson& v = raw(key);
  if (v.is_null()) return {};
  return v.is_string() ? v.get<std::string>() : v.dump();
}

std::uint64_t Settings::u64(const std::string& key) const {
  return raw(key).get<std::uint64_t>();
}

double Settings::num(const std::string& key) const { return raw(key).get<double>(); }

bool Settings::flag(const std::string& key) const { return raw(key).get<bool>(); }

std::vector<std::string> Settings::list(const std::string& key) const {
  const ojson& v = raw(key);
  std::vector<std::string> out;
  for (const auto& item : v) out.push_back(item.is_string() ? item.get<std::string>() : item.dump());
  return out;
}

std::string Settings::hash(const std::set<std::string>& excluded) const {
  ojson j = ojson::object();
  for (const auto& [key, value] : values_.items())
    if (!excluded.count(key)) j[key] = value;
  return hash_hex(j.dump());
}

}  // namespace advtext::cli
