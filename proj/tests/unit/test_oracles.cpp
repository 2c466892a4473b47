#include <doctest.h>

#include <cmath>

#include "advtext/core/error.hpp"
#include "advtext/oracles/mock.hpp"
#include "advtext/oracles/remote.hpp"

using namespace advtext;

namespace {

std::vector<SynonymCandidate> ranked(const std::vector<std::string>& tokens) {
  std::vector<SynonymCandidate> out;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    out.push_back({tokens[i], i, 1.0 / static_cast<double>(i + 1)});
  return out;
}

std::vector<std::string> tokens_of(const std::vector<SynonymCandidate>& c) {
  std::vector<std::string> t;
  for (const auto& s : c) t.push_back(s.token);
  return t;
}

}  // namespace

TEST_CASE("keyword classifier scores") {
  mock::KeywordClassifier clf(2, {{"good", 0}, {"bad", 1}});
  // softmax([ln 9, 0]) = [9/10, 1/10]
  const Prediction p = clf.classify("a good film");
  CHECK(p.label() == 0);
  CHECK(p.score(0) == doctest::Approx(9.0 / 10.0).epsilon(1e-12));
  CHECK(p.score(1) == doctest::Approx(1.0 / 10.0).epsilon(1e-12));

  const Prediction two = clf.classify("good, good and good bad");
  // logits [3 ln 9, ln 9] -> 81/82
  CHECK(two.score(0) == doctest::Approx(81.0 / 82.0).epsilon(1e-12));

  const Prediction empty = clf.classify("");
  CHECK(empty.score(0) == doctest::Approx(0.5));
  CHECK(empty.label() == 0);
  CHECK(clf.classify("a good film") == p);
}

TEST_CASE("thesaurus mask fill") {
  mock::ThesaurusMlm mlm({{"happy", {"glad", "joyful", "content"}}});
  MaskedQuery q{{"i", "am", "happy"}, 2, 50};
  const auto all = mlm.mask_fill(q);
  REQUIRE(all.size() == 3);
  CHECK(tokens_of(all) == std::vector<std::string>{"glad", "joyful", "content"});
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(all[i].mlm_rank == i);
    CHECK(all[i].mlm_score == doctest::Approx(1.0 / static_cast<double>(i + 1)));
  }
  q.top_k = 1;
  CHECK(tokens_of(mlm.mask_fill(q)) == std::vector<std::string>{"glad"});
  q.tokens[2] = "zebra";
  CHECK(mlm.mask_fill(q).empty());

  MaskedQuery bad{{"a"}, 3, 5};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  MaskedQuery zero{{"a"}, 0, 0};
  CHECK_THROWS_AS(zero.validate(), InvalidArgument);
}

TEST_CASE("lexicon tagger") {
  mock::LexiconTagger tagger({{"the", "DET"}, {"cat", "NOUN"}, {"sat", "VERB"}});
  const auto tags = tagger.pos_tag({"the", "cat", "sat", "quietly"});
  CHECK(tags.tags == std::vector<std::string>{"DET", "NOUN", "VERB", "X"});
  CHECK(tagger.pos_tag({}).tags.empty());
}

TEST_CASE("overlap similarity") {
  mock::OverlapSimilarity sim;
  // {a b c d} vs {a b c d e}: 4 / 5
  CHECK(sim.similarity("a b c d", "a b c d e").value == doctest::Approx(0.8));
  CHECK(sim.similarity("x y", "y z").value ==
        doctest::Approx(sim.similarity("y z", "x y").value));
  CHECK(sim.similarity("same words", "same words").value == doctest::Approx(1.0));
  CHECK(sim.similarity("p", "q").value == doctest::Approx(0.0));
}

TEST_CASE("lookup classifier") {
  mock::LookupClassifier clf(3, {{"alpha", 2}}, 1);
  CHECK(clf.classify("alpha").label() == 2);
  CHECK(clf.classify("alpha").score(2) == doctest::Approx(0.9));
  CHECK(clf.classify("beta").label() == 1);
}

TEST_CASE("keep_whole_words filters and keeps prefixes") {
  const auto raw = ranked({"##ing", "good", "[MASK]", "3", "fine", ",", "nice", "great"});
  const auto k3 = keep_whole_words(raw, "[MASK]", 3);
  CHECK(tokens_of(k3) == std::vector<std::string>{"good", "fine", "nice"});
  for (std::size_t i = 0; i < k3.size(); ++i) CHECK(k3[i].mlm_rank == i);
  for (std::size_t k = 1; k < 5; ++k) {
    const auto a = keep_whole_words(raw, "[MASK]", k);
    const auto b = keep_whole_words(raw, "[MASK]", k + 1);
    REQUIRE(a.size() <= b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
  CHECK(tokens_of(keep_whole_words(ranked({"جميل", "##ة"}), "[MASK]", 5)) ==
        std::vector<std::string>{"جميل"});
}

TEST_CASE("coarse pos mapping") {
  CHECK(coarse_pos("NOUN") == "NOUN");
  CHECK(coarse_pos("NNS") == "NOUN");
  CHECK(coarse_pos("VBD") == "VERB");
  CHECK(coarse_pos("JJ") == "ADJ");
  CHECK(coarse_pos("RB") == "ADV");
  CHECK(coarse_pos("noun_prop") == "NOUN");
  CHECK(coarse_pos("adj") == "ADJ");
  CHECK(coarse_pos("verb") == "VERB");
  CHECK(coarse_pos("X") == "OTHER");
  CHECK(coarse_pos("DET") == "OTHER");
}

TEST_CASE("counting classifier") {
  mock::KeywordClassifier inner(2, {{"good", 0}});
  CountingClassifier counter(inner);
  counter.classify("good");
  counter.classify("x");
  CHECK(counter.count() == 2);
  CHECK(counter.model_id() == inner.model_id());
}

TEST_CASE("remote oracles round trip through the server") {
  remote::OracleServer::Backends b;
  b.classifier = std::make_shared<mock::KeywordClassifier>(
      2, std::map<std::string, LabelIndex>{{"good", 0}, {"bad", 1}});
  b.mlm = std::make_shared<mock::ThesaurusMlm>(
      std::map<std::string, std::vector<std::string>>{{"good", {"fine", "nice"}}});
  b.tagger = std::make_shared<mock::LexiconTagger>(
      std::map<std::string, std::string>{{"good", "ADJ"}});
  b.similarity = std::make_shared<mock::OverlapSimilarity>();
  remote::OracleServer server(b, "served-model", "1.0");
  const int port = server.start();

  remote::Endpoint ep;
  ep.base_url = "http://127.0.0.1:" + std::to_string(port);
  remote::HttpClassifier clf(ep);
  const Prediction p = clf.classify("good film");
  CHECK(p == b.classifier->classify("good film"));
  CHECK(clf.model_id() == "served-model");

  remote::HttpMaskedLm mlm(ep, "[MASK]");
  const MaskedQuery q{{"a", "good", "film"}, 1, 5};
  CHECK(mlm.mask_fill(q) == b.mlm->mask_fill(q));

  remote::HttpPosTagger tagger(ep);
  CHECK(tagger.pos_tag({"good", "thing"}).tags == std::vector<std::string>{"ADJ", "X"});

  remote::HttpSimilarity sim(ep);
  CHECK(sim.similarity("a b c d", "a b c d e").value == doctest::Approx(0.8));

  remote::Endpoint wrong = ep;
  wrong.model_id = "other-model";
  remote::HttpClassifier mismatched(wrong);
  CHECK_THROWS(mismatched.classify("good"));
  server.stop();
}

TEST_CASE("unreachable remote oracle raises OracleUnavailable") {
  remote::Endpoint ep;
  ep.base_url = "http://127.0.0.1:1";
  ep.timeout = std::chrono::seconds(1);
  ep.retry.max_attempts = 2;
  ep.retry.initial_backoff = std::chrono::milliseconds(1);
  remote::HttpClassifier clf(ep);
  CHECK_THROWS_AS(clf.classify("x"), OracleUnavailable);
}
