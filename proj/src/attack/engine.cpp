#include "advtext/attack/engine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "advtext/core/error.hpp"
#include "advtext/core/hash.hpp"
#include "advtext/core/text.hpp"

namespace advtext {

namespace {

std::string_view to_string(ImportanceMode m) {
  return m == ImportanceMode::kOnce ? "once" : "after_each_swap";
}

std::string_view to_string(SimilarityReference r) {
  return r == SimilarityReference::kOriginal ? "original" : "current";
}

}  // namespace

void AttackConfig::validate() const {
  if (top_k < 1) throw InvalidArgument("top_k must be >= 1");
  if (!(sim_threshold > 0.0 && sim_threshold <= 1.0))
    throw InvalidArgument("sim_threshold must lie in (0, 1]");
  if (max_words_perturbed && *max_words_perturbed == 0)
    throw InvalidArgument("max_words_perturbed must be >= 1 (omit for unlimited)");
  if (mask_token.empty()) throw InvalidArgument("mask_token must not be empty");
}

nlohmann::ordered_json AttackConfig::to_json() const {
  nlohmann::ordered_json j;
  j["top_k"] = top_k;
  j["sim_threshold"] = sim_threshold;
  j["max_words_perturbed"] =
      max_words_perturbed ? nlohmann::ordered_json(*max_words_perturbed)
                          : nlohmann::ordered_json(nullptr);
  j["stopword_resource"] = stopword_resource;
  j["mask_token"] = mask_token;
  j["seed"] = seed;
  j["importance_mode"] = std::string(to_string(importance_mode));
  j["similarity_reference"] = std::string(to_string(similarity_reference));
  return j;
}

AttackConfig AttackConfig::from_json(const nlohmann::json& j) {
  AttackConfig c;
  c.top_k = j.value("top_k", c.top_k);
  c.sim_threshold = j.value("sim_threshold", c.sim_threshold);
  if (j.contains("max_words_perturbed") && !j.at("max_words_perturbed").is_null())
    c.max_words_perturbed = j.at("max_words_perturbed").get<std::size_t>();
  c.stopword_resource = j.value("stopword_resource", c.stopword_resource);
  c.mask_token = j.value("mask_token", c.mask_token);
  c.seed = j.value("seed", c.seed);
  const std::string mode = j.value("importance_mode", std::string("once"));
  if (mode == "once") c.importance_mode = ImportanceMode::kOnce;
  else if (mode == "after_each_swap") c.importance_mode = ImportanceMode::kAfterEachSwap;
  else throw InvalidArgument("unknown importance_mode '" + mode + "'");
  const std::string ref = j.value("similarity_reference", std::string("original"));
  if (ref == "original") c.similarity_reference = SimilarityReference::kOriginal;
  else if (ref == "current") c.similarity_reference = SimilarityReference::kCurrent;
  else throw InvalidArgument("unknown similarity_reference '" + ref + "'");
  c.validate();
  return c;
}

std::string AttackConfig::hash() const { return hash_hex(to_json().dump()); }

ImportanceRanking rank_word_importance(std::string_view input, const CleanedText& cleaned,
                                       const Prediction& original,
                                       Classifier& classifier) {
  const LabelIndex label = original.label();
  const double base = original.score(label);
  ImportanceRanking ranking;
  ranking.entries.reserve(cleaned.size());
  for (std::size_t pos = 0; pos < cleaned.size(); ++pos) {
    const WordSpan& w = cleaned.word(pos);
    const Prediction deleted = classifier.classify(delete_span(input, w.begin, w.end));
    ranking.entries.push_back({pos, w.text, base - deleted.score(label)});
  }
  std::stable_sort(ranking.entries.begin(), ranking.entries.end(),
                   [](const RankedWord& a, const RankedWord& b) { return a.score > b.score; });
  return ranking;
}

ImportanceRanking rank_word_importance(std::string_view input, const CleanedText& cleaned,
                                       Classifier& classifier) {
  if (cleaned.empty()) throw InvalidArgument("no content words to rank");
  const Prediction original = classifier.classify(input);
  return rank_word_importance(input, cleaned, original, classifier);
}

std::vector<CandidateSubstitution> propose_candidates(const SubstitutionContext& ctx,
                                                      std::size_t position,
                                                      MaskedLanguageModel& mlm,
                                                      PosTagger& tagger,
                                                      SimilarityScorer& similarity,
                                                      const AttackConfig& config) {
  if (position >= ctx.cleaned.size())
    throw InvalidArgument("position " + std::to_string(position) + " out of range");
  const std::size_t token_index = ctx.cleaned.content[position];
  const WordSpan& target = ctx.cleaned.tokens[token_index];
  const std::string target_norm = text::normalize(target.text);

  const Segmentation seg = segment(ctx.text, ctx.cleaned);
  MaskedQuery query{seg.segments, seg.word_segment[token_index], config.top_k};
  auto raw = keep_whole_words(mlm.mask_fill(query), config.mask_token, config.top_k);

  std::vector<std::string> tokens = ctx.cleaned.token_texts();
  const PosTagSequence original_tags = tagger.pos_tag(tokens);
  if (original_tags.tags.size() != tokens.size())
    throw OracleUnavailable("tagger returned misaligned tags");
  const std::string pos_original = coarse_pos(original_tags.tags[token_index]);

  std::vector<CandidateSubstitution> survivors;
  std::set<std::string> seen;
  for (const auto& cand : raw) {
    const std::string norm = text::normalize(cand.token);
    if (norm == target_norm || !seen.insert(norm).second) continue;

    tokens[token_index] = cand.token;
    const PosTagSequence tags = tagger.pos_tag(tokens);
    tokens[token_index] = target.text;
    if (tags.tags.size() != tokens.size())
      throw OracleUnavailable("tagger returned misaligned tags");
    const std::string pos_candidate = coarse_pos(tags.tags[token_index]);
    if (pos_candidate != pos_original) continue;

    const std::string substituted =
        replace_span(ctx.text, target.begin, target.end, cand.token);
    const double sim = similarity.similarity(ctx.reference, substituted).value;
    if (sim < config.sim_threshold) continue;

    CandidateSubstitution s;
    s.position = position;
    s.original_word = target.text;
    s.synonym = cand.token;
    s.mlm_rank = cand.mlm_rank;
    s.pos_original = pos_original;
    s.pos_candidate = pos_candidate;
    s.similarity = sim;
    survivors.push_back(std::move(s));
  }
  return survivors;
}

AttackEngine::AttackEngine(AttackConfig config)
    : AttackEngine(config, StopwordList::from_resource(config.stopword_resource)) {}

AttackEngine::AttackEngine(AttackConfig config, StopwordList stopwords)
    : config_(std::move(config)), stopwords_(std::move(stopwords)) {
  config_.validate();
  config_hash_ = config_.hash();
}

AttackResult AttackEngine::attack(const Example& example, const OracleSet& oracles) const {
  CountingClassifier counter(oracles.classifier);
  AttackResult result;
  AttackLogEntry& entry = result.entry;
  entry.example_id = example.id;
  entry.model_id = oracles.classifier.model_id();
  entry.dataset_tag = example.dataset_tag;
  entry.gold_label = example.gold_label;
  entry.original_text = example.text;
  entry.config_hash = config_hash_;

  try {
    const Prediction original = counter.classify(example.text);
    entry.original_prediction = original;
    if (original.label() != example.gold_label) {
      entry.status = AttackStatus::kSkippedMisclassified;
      entry.query_count = counter.count();
      return result;
    }

    CleanedText current_clean = clean(example.text, stopwords_);
    if (current_clean.empty()) {
      entry.status = AttackStatus::kFailed;
      entry.note = "unattackable: no content words";
      entry.query_count = counter.count();
      return result;
    }

    const LabelIndex target = original.label();
    result.ranking = rank_word_importance(example.text, current_clean, original, counter);
    std::vector<RankedWord> queue = result.ranking.entries;

    std::string current_text = example.text;
    Prediction current_pred = original;
    std::set<std::size_t> substituted;
    std::size_t next = 0;
    entry.status = AttackStatus::kFailed;

    while (next < queue.size()) {
      if (config_.max_words_perturbed && substituted.size() >= *config_.max_words_perturbed)
        break;
      const std::size_t position = queue[next++].position;
      if (substituted.count(position)) continue;

      const std::string_view reference =
          config_.similarity_reference == SimilarityReference::kOriginal
              ? std::string_view(example.text)
              : std::string_view(current_text);
      SubstitutionContext ctx{current_text, current_clean, reference};
      auto candidates = propose_candidates(ctx, position, oracles.mlm, oracles.tagger,
                                           oracles.similarity, config_);

      const WordSpan& span = current_clean.word(position);
      std::optional<std::size_t> best;
      std::string best_text;
      Prediction best_pred;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        auto& cand = candidates[i];
        std::string cand_text = replace_span(current_text, span.begin, span.end, cand.synonym);
        const Prediction p = counter.classify(cand_text);
        ++result.candidates_evaluated;
        cand.victim_score_delta = current_pred.score(target) - p.score(target);
        if (p.label() != target) {
          cand.flipped = true;
          entry.substitutions.push_back(cand);
          entry.status = AttackStatus::kSuccess;
          entry.adversarial_text = std::move(cand_text);
          entry.adversarial_prediction = p;
          entry.query_count = counter.count();
          return result;
        }
        if (!best || cand.victim_score_delta > candidates[*best].victim_score_delta) {
          best = i;
          best_text = std::move(cand_text);
          best_pred = p;
        }
      }

      if (best && candidates[*best].victim_score_delta > 0.0) {
        const CandidateSubstitution& chosen = candidates[*best];
        apply_replacement(current_clean, current_clean.content[position], chosen.synonym);
        current_text = std::move(best_text);
        current_pred = best_pred;
        substituted.insert(position);
        entry.substitutions.push_back(chosen);
        if (config_.importance_mode == ImportanceMode::kAfterEachSwap) {
          queue = rank_word_importance(current_text, current_clean, current_pred, counter)
                      .entries;
          next = 0;
        }
      }
    }

    if (!entry.substitutions.empty()) {
      entry.adversarial_text = current_text;
      entry.adversarial_prediction = current_pred;
    }
  } catch (const OracleUnavailable& e) {
    entry.status = AttackStatus::kError;
    entry.note = e.what();
    entry.adversarial_text.reset();
    entry.adversarial_prediction.reset();
  }
  entry.query_count = counter.count();
  return result;
}

std::vector<AttackLogEntry> run_attacks(
    const std::vector<Example>& examples, const AttackEngine& engine,
    const OracleSessionFactory& factory, std::size_t workers,
    const std::function<void(const AttackLogEntry&)>& on_entry) {
  std::vector<AttackLogEntry> out(examples.size());
  if (examples.empty()) return out;
  workers = std::max<std::size_t>(1, std::min(workers, examples.size()));

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  const auto work = [&] {
    OracleSession session;
    {
      std::lock_guard lock(mu);
      session = factory();
    }
    const OracleSet set = session.view();
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= examples.size()) return;
      AttackLogEntry entry = engine.attack(examples[i], set).entry;
      std::lock_guard lock(mu);
      if (on_entry) on_entry(entry);
      out[i] = std::move(entry);
    }
  };
  const auto guarded = [&] {
    try {
      work();
    } catch (...) {
      std::lock_guard lock(mu);
      if (!failure) failure = std::current_exception();
      next.store(examples.size());
    }
  };

  if (workers == 1) {
    guarded();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(guarded);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace advtext
