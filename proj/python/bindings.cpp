#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "advtext/attack/engine.hpp"
#include "advtext/cli/cli.hpp"
#include "advtext/core/attack_log.hpp"
#include "advtext/core/error.hpp"
#include "advtext/eval/metrics.hpp"
#include "advtext/models/victim.hpp"
#include "advtext/oracles/mock.hpp"
#include "advtext/oracles/oracles.hpp"

namespace py = pybind11;
using namespace advtext;

namespace {

class PyClassifier : public Classifier {
 public:
  using Classifier::Classifier;
  Prediction classify(std::string_view text) override {
    PYBIND11_OVERRIDE_PURE(Prediction, Classifier, classify, std::string(text));
  }
  std::string model_id() const override {
    PYBIND11_OVERRIDE(std::string, Classifier, model_id);
  }
};

class PyMaskedLanguageModel : public MaskedLanguageModel {
 public:
  std::vector<SynonymCandidate> mask_fill(const MaskedQuery& q) override {
    PYBIND11_OVERRIDE_PURE(std::vector<SynonymCandidate>, MaskedLanguageModel, mask_fill, q);
  }
};

class PyPosTagger : public PosTagger {
 public:
  PosTagSequence pos_tag(const std::vector<std::string>& tokens) override {
    py::gil_scoped_acquire gil;
    py::function fn = py::get_override(static_cast<const PosTagger*>(this), "pos_tag");
    if (!fn) throw std::runtime_error("PosTagger.pos_tag not implemented");
    return {fn(tokens).cast<std::vector<std::string>>()};
  }
};

class PySimilarityScorer : public SimilarityScorer {
 public:
  SimilarityScore similarity(std::string_view a, std::string_view b) override {
    py::gil_scoped_acquire gil;
    py::function fn = py::get_override(static_cast<const SimilarityScorer*>(this), "similarity");
    if (!fn) throw std::runtime_error("SimilarityScorer.similarity not implemented");
    return {fn(std::string(a), std::string(b)).cast<double>()};
  }
};

std::vector<AttackLogEntry> parse_lines(const std::vector<std::string>& lines) {
  std::vector<AttackLogEntry> out;
  for (const auto& l : lines) out.push_back(parse_log_line(l));
  return out;
}

}  // namespace

PYBIND11_MODULE(_advtext, m) {
  m.doc() = "Word-level adversarial attacks on text classifiers";

  // later registrations are tried first
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<OracleUnavailable>(m, "OracleUnavailable", PyExc_ConnectionError);

  py::class_<LabelSpace>(m, "LabelSpace")
      .def(py::init<std::vector<std::string>>())
      .def("__len__", &LabelSpace::size)
      .def_property_readonly("class_names", &LabelSpace::class_names)
      .def("index_of", &LabelSpace::index_of);

  py::class_<Example>(m, "Example")
      .def(py::init([](std::string id, std::string text, std::size_t gold, std::string tag) {
             return Example{std::move(id), std::move(text), gold, std::move(tag)};
           }),
           py::arg("id"), py::arg("text"), py::arg("gold_label"), py::arg("dataset_tag") = "")
      .def_readwrite("id", &Example::id)
      .def_readwrite("text", &Example::text)
      .def_readwrite("gold_label", &Example::gold_label)
      .def_readwrite("dataset_tag", &Example::dataset_tag);

  py::class_<Prediction>(m, "Prediction")
      .def(py::init<std::vector<double>>())
      .def_static("uniform", &Prediction::uniform)
      .def_static("from_logits", &Prediction::from_logits)
      .def_property_readonly("label", &Prediction::label)
      .def_property_readonly("scores", &Prediction::scores)
      .def("__repr__", [](const Prediction& p) {
        std::ostringstream s;
        s << "Prediction(label=" << p.label() << ")";
        return s.str();
      });

  py::class_<MaskedQuery>(m, "MaskedQuery")
      .def_readonly("tokens", &MaskedQuery::tokens)
      .def_readonly("mask_position", &MaskedQuery::mask_position)
      .def_readonly("top_k", &MaskedQuery::top_k);

  py::class_<SynonymCandidate>(m, "SynonymCandidate")
      .def(py::init([](std::string token, std::size_t rank, double score) {
             return SynonymCandidate{std::move(token), rank, score};
           }),
           py::arg("token"), py::arg("rank"), py::arg("score"))
      .def_readwrite("token", &SynonymCandidate::token)
      .def_readwrite("mlm_rank", &SynonymCandidate::mlm_rank)
      .def_readwrite("mlm_score", &SynonymCandidate::mlm_score);

  py::class_<Classifier, PyClassifier>(m, "Classifier")
      .def(py::init<>())
      .def("classify", &Classifier::classify)
      .def("model_id", &Classifier::model_id);
  py::class_<MaskedLanguageModel, PyMaskedLanguageModel>(m, "MaskedLanguageModel")
      .def(py::init<>())
      .def("mask_fill", &MaskedLanguageModel::mask_fill);
  py::class_<PosTagger, PyPosTagger>(m, "PosTagger")
      .def(py::init<>())
      .def("pos_tag", [](PosTagger& t, const std::vector<std::string>& tokens) {
        return t.pos_tag(tokens).tags;
      });
  py::class_<SimilarityScorer, PySimilarityScorer>(m, "SimilarityScorer")
      .def(py::init<>())
      .def("similarity", [](SimilarityScorer& s, const std::string& a, const std::string& b) {
        return s.similarity(a, b).value;
      });

  py::class_<mock::KeywordClassifier, Classifier>(m, "KeywordClassifier")
      .def(py::init<std::size_t, std::map<std::string, LabelIndex>>(), py::arg("num_classes"),
           py::arg("keywords"));
  py::class_<mock::LookupClassifier, Classifier>(m, "LookupClassifier")
      .def(py::init<std::size_t, std::map<std::string, LabelIndex>, LabelIndex, double>(),
           py::arg("num_classes"), py::arg("table"), py::arg("fallback") = 0,
           py::arg("confidence") = 0.9);
  py::class_<mock::ThesaurusMlm, MaskedLanguageModel>(m, "ThesaurusMlm")
      .def(py::init<std::map<std::string, std::vector<std::string>>>());
  py::class_<mock::LexiconTagger, PosTagger>(m, "LexiconTagger")
      .def(py::init<std::map<std::string, std::string>>());
  py::class_<mock::OverlapSimilarity, SimilarityScorer>(m, "OverlapSimilarity").def(py::init<>());

  py::class_<ModelClassifier, Classifier>(m, "ModelClassifier")
      .def(py::init([](const std::filesystem::path& dir) {
             TrainedModel t = load_model(dir);
             return ModelClassifier(std::make_shared<const VictimModel>(std::move(t.model)));
           }),
           py::arg("model_dir"));

  m.def("keep_whole_words", &keep_whole_words, py::arg("candidates"), py::arg("mask_token"),
        py::arg("top_k"));
  m.def("coarse_pos", &coarse_pos);

  py::class_<AttackConfig>(m, "AttackConfig")
      .def(py::init<>())
      .def_readwrite("top_k", &AttackConfig::top_k)
      .def_readwrite("sim_threshold", &AttackConfig::sim_threshold)
      .def_readwrite("max_words_perturbed", &AttackConfig::max_words_perturbed)
      .def_readwrite("stopword_resource", &AttackConfig::stopword_resource)
      .def_readwrite("mask_token", &AttackConfig::mask_token)
      .def_readwrite("seed", &AttackConfig::seed)
      .def("hash", &AttackConfig::hash)
      .def("to_json", [](const AttackConfig& c) { return c.to_json().dump(); });

  py::class_<AttackEngine>(m, "AttackEngine")
      .def(py::init<AttackConfig>())
      .def(
          "attack_json",
          [](const AttackEngine& e, const Example& ex, Classifier& c, MaskedLanguageModel& mlm,
             PosTagger& tagger, SimilarityScorer& sim) {
            return to_log_line(e.attack(ex, {c, mlm, tagger, sim}).entry);
          },
          py::arg("example"), py::arg("classifier"), py::arg("mlm"), py::arg("tagger"),
          py::arg("similarity"));

  m.def(
      "word_importance",
      [](const std::string& text, Classifier& c) {
        const CleanedText cleaned = clean(text, StopwordList::builtin());
        std::vector<std::tuple<std::size_t, std::string, double>> out;
        for (const auto& e : rank_word_importance(text, cleaned, c).entries)
          out.emplace_back(e.position, e.word, e.score);
        return out;
      },
      py::arg("text"), py::arg("classifier"));

  m.def("metrics_json", [](const std::vector<std::string>& lines) {
    return compute_metrics(parse_lines(lines)).to_json().dump();
  });

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return std::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
