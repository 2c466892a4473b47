#include "advtext/core/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "advtext/core/csv.hpp"
#include "advtext/core/error.hpp"
#include "advtext/core/hash.hpp"
#include "advtext/core/rng.hpp"
#include "advtext/core/text.hpp"

namespace advtext {

namespace {

using nlohmann::json;

struct RawRow {
  std::size_t row;
  std::string id;
  std::string text;
  std::string label;
};

std::string json_scalar_to_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == std::floor(d)) return std::to_string(static_cast<long long>(d));
    return v.dump();
  }
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  throw InvalidArgument("not a scalar");
}

std::vector<RawRow> read_csv_rows(std::istream& in, const DatasetSchema& schema) {
  csv::Reader reader(in);
  auto header = reader.next();
  std::vector<RawRow> rows;
  if (!header) return rows;
  if (!header->empty() && header->front().rfind("\xEF\xBB\xBF", 0) == 0)
    header->front().erase(0, 3);
  const auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header->begin(), header->end(), name);
    if (it == header->end()) throw DataError("missing column '" + name + "'", 1);
    return static_cast<std::size_t>(it - header->begin());
  };
  const std::size_t text_col = column(schema.text_column);
  const std::size_t label_col = column(schema.label_column);
  const std::optional<std::size_t> id_col =
      schema.id_column ? std::optional(column(*schema.id_column)) : std::nullopt;
  std::size_t row_number = 1;
  while (auto rec = reader.next()) {
    ++row_number;
    if (rec->size() == 1 && rec->front().empty()) continue;  // blank line
    if (rec->size() != header->size())
      throw DataError("expected " + std::to_string(header->size()) +
                          " fields, found " + std::to_string(rec->size()),
                      row_number);
    RawRow r{row_number, id_col ? (*rec)[*id_col] : std::string(), (*rec)[text_col],
             text::trim((*rec)[label_col])};
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<RawRow> read_jsonl_rows(std::istream& in, const DatasetSchema& schema) {
  std::vector<RawRow> rows;
  std::string line;
  std::size_t row_number = 0;
  while (std::getline(in, line)) {
    ++row_number;
    if (text::trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(std::string("malformed record: ") + e.what(), row_number);
    }
    if (!obj.is_object()) throw DataError("record is not an object", row_number);
    const auto field = [&](const std::string& name) -> std::string {
      auto it = obj.find(name);
      if (it == obj.end() || it->is_null())
        throw DataError("missing field '" + name + "'", row_number);
      try {
        return json_scalar_to_string(*it);
      } catch (const InvalidArgument&) {
        throw DataError("field '" + name + "' is not a scalar", row_number);
      }
    };
    RawRow r{row_number, schema.id_column ? field(*schema.id_column) : std::string(),
             field(schema.text_column), text::trim(field(schema.label_column))};
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

DatasetFormat parse_dataset_format(std::string_view s) {
  if (s == "csv") return DatasetFormat::kCsv;
  if (s == "jsonl") return DatasetFormat::kJsonl;
  throw InvalidArgument("unknown dataset format '" + std::string(s) + "'");
}

LoadedDataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                           const DatasetSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file " + path.string());
  std::vector<RawRow> rows = format == DatasetFormat::kCsv
                                 ? read_csv_rows(in, schema)
                                 : read_jsonl_rows(in, schema);

  LoadedDataset out;
  out.dataset.name = schema.dataset_tag.empty() ? path.stem().string()
                                                : schema.dataset_tag;
  std::vector<std::string> labels = schema.labels;
  if (labels.empty()) {
    std::set<std::string> seen;
    for (const auto& r : rows)
      if (!text::trim(r.text).empty()) seen.insert(r.label);
    labels.assign(seen.begin(), seen.end());
  }
  if (labels.empty()) {
    out.warnings.push_back("dataset " + path.string() + " contains no examples");
    out.dataset.label_space = LabelSpace(std::vector<std::string>{"unlabeled"});
    return out;
  }
  out.dataset.label_space = LabelSpace(labels);

  for (const auto& r : rows) {
    if (text::trim(r.text).empty()) {
      ++out.dropped_count;
      continue;
    }
    auto label = out.dataset.label_space.index_of(r.label);
    if (!label) throw DataError("unknown label value '" + r.label + "'", r.row);
    Example ex;
    ex.id = r.id.empty() ? out.dataset.name + "-" + std::to_string(r.row) : r.id;
    ex.text = r.text;
    ex.gold_label = *label;
    ex.dataset_tag = out.dataset.name;
    out.dataset.examples.push_back(std::move(ex));
  }
  if (out.dataset.examples.empty())
    out.warnings.push_back("dataset " + path.string() + " contains no examples");
  if (out.dropped_count > 0)
    out.warnings.push_back("dropped " + std::to_string(out.dropped_count) +
                           " rows with empty text");
  out.dataset.validate();
  return out;
}

void write_dataset_jsonl(const LabeledDataset& dataset,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& ex : dataset.examples) {
    json j = {{"id", ex.id},
              {"text", ex.text},
              {"label", dataset.label_space.name(ex.gold_label)},
              {"dataset_tag", ex.dataset_tag}};
    out << j.dump() << '\n';
  }
}

LabeledDataset remap_labels(const LabeledDataset& dataset, const LabelMapping& mapping) {
  const auto& old_names = dataset.label_space.class_names();
  for (const auto& [from, to] : mapping) {
    if (!dataset.label_space.index_of(from))
      throw InvalidArgument("mapping names unknown label '" + from + "'");
  }
  std::vector<std::string> new_names;
  std::set<std::string> targets;
  for (const auto& name : old_names) {
    auto it = mapping.find(name);
    if (it == mapping.end()) throw InvalidArgument("unmapped label '" + name + "'");
    if (!targets.insert(it->second).second)
      throw InvalidArgument("mapping is not bijective: '" + it->second +
                            "' is the target of several labels");
    new_names.push_back(it->second);
  }
  LabeledDataset out = dataset;
  out.label_space = LabelSpace(std::move(new_names));
  return out;
}

LabelMapping invert_mapping(const LabelMapping& mapping) {
  LabelMapping inv;
  for (const auto& [from, to] : mapping) {
    if (!inv.emplace(to, from).second)
      throw InvalidArgument("mapping is not bijective: '" + to + "'");
  }
  return inv;
}

TrainTestSplit split(const LabeledDataset& dataset, double test_fraction,
                     std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw InvalidArgument("test_fraction must lie in (0,1)");
  if (dataset.empty()) throw InvalidArgument("cannot split an empty dataset");
  const std::size_t n = dataset.size();
  // nearbyint under the default rounding mode rounds half to even.
  const auto n_test = static_cast<std::size_t>(
      std::nearbyint(test_fraction * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span(order));
  std::vector<bool> in_test(n, false);
  for (std::size_t i = 0; i < n_test; ++i) in_test[order[i]] = true;

  TrainTestSplit out;
  for (auto* part : {&out.train, &out.test}) {
    part->label_space = dataset.label_space;
    part->split_seed = seed;
  }
  out.train.name = dataset.name + ".train";
  out.test.name = dataset.name + ".test";
  for (std::size_t i = 0; i < n; ++i)
    (in_test[i] ? out.test : out.train).examples.push_back(dataset.examples[i]);
  return out;
}

std::vector<Example> sample_examples(const LabeledDataset& dataset, std::size_t n,
                                     std::uint64_t seed) {
  if (n > dataset.size())
    throw InvalidArgument("cannot sample " + std::to_string(n) + " examples from " +
                          std::to_string(dataset.size()));
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  // Partial Fisher-Yates: the first n slots are a uniform sample.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
    std::swap(order[i], order[j]);
  }
  std::vector<Example> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(dataset.examples[order[i]]);
  return out;
}

std::string dataset_hash(const LabeledDataset& dataset) {
  Fnv1a64 h;
  for (const auto& name : dataset.label_space.class_names()) {
    h.update(name);
    h.update(std::string_view("\x1f", 1));
  }
  for (const auto& ex : dataset.examples) {
    h.update(ex.id);
    h.update(std::string_view("\x1f", 1));
    h.update(ex.text);
    h.update(std::string_view("\x1f", 1));
    h.update(std::to_string(ex.gold_label));
    h.update(std::string_view("\x1e", 1));
  }
  return h.hex();
}

}  // namespace advtext
