// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>

#include "vocabxfer/corpus_stats.hpp"
#include "vocabxfer/embedding.hpp"
#include "vocabxfer/error.hpp"
#include "vocabxfer/pipeline.hpp"
#include "vocabxfer/subword_trainer.hpp"
#include "vocabxfer/token_trie.hpp"
#include "vocabxfer/transfer.hpp"
#include "vocabxfer/vocabulary.hpp"

namespace py = pybind11;
using namespace vocabxfer;

namespace {

py::dict SummaryDict(const PlanSummary& s) {
  py::dict d;
  d["matched"] = s.matched;
  d["averaged"] = s.averaged;
  d["fallback"] = s.fallback;
  d["partition_lengths"] = s.partition_lengths;
  return d;
}

FallbackStrategy MakeFallback(const std::string& kind, std::optional<std::uint64_t> seed,
                              std::optional<double> scale) {
  FallbackStrategy f = FallbackStrategy::Parse(kind);
  f.seed = seed;
  f.scale = scale;
  return f;
}

}  // namespace

PYBIND11_MODULE(_vocabxfer, m) {
  static py::exception<Error> error_type(m, "VocabError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object cls = py::reinterpret_borrow<py::object>(error_type.ptr());
      py::object exc = cls(py::str(e.what()));
      exc.attr("kind") = std::string(ErrorKindName(e.kind()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<Vocabulary>(m, "Vocabulary")
      .def(py::init([](const std::vector<std::string>& surfaces, const std::string& marker) {
             return Vocabulary::FromSurfaces(surfaces, marker);
           }),
           py::arg("surfaces"), py::arg("marker") = std::string(kDefaultMarker))
      .def("__len__", &Vocabulary::size)
      .def("__getitem__",
           [](const Vocabulary& v, TokenId id) {
             if (id >= v.size()) throw py::index_error();
             return v.token(id).surface;
           })
      .def("find", [](const Vocabulary& v, const std::string& s) { return v.find(s); })
      .def("surfaces",
           [](const Vocabulary& v) {
             std::vector<std::string> out;
             for (const Token& t : v.tokens()) out.push_back(t.surface);
             return out;
           })
      .def_property_readonly("marker", [](const Vocabulary& v) { return v.marker(); })
      .def("digest", &Vocabulary::Digest)
      .def("serialize", [](const Vocabulary& v) { return py::bytes(v.Serialize()); })
      .def("__eq__", [](const Vocabulary& a, const Vocabulary& b) { return a == b; });

  m.def("load_vocabulary", &LoadVocabulary, py::arg("path"),
        py::arg("marker") = std::string(kDefaultMarker));
  m.def("save_vocabulary", &SaveVocabulary, py::arg("vocab"), py::arg("path"));

  py::class_<MergeRule>(m, "MergeRule")
      .def_readonly("left", &MergeRule::left)
      .def_readonly("right", &MergeRule::right)
      .def_readonly("result", &MergeRule::result)
      .def_readonly("rank", &MergeRule::rank)
      .def("__repr__", [](const MergeRule& r) { return "MergeRule(" + r.left + " " + r.right + ")"; });
  m.def("load_merges", &LoadMerges, py::arg("path"), py::arg("marker") = std::string(kDefaultMarker));
  m.def("save_merges", &SaveMerges, py::arg("merges"), py::arg("path"));

  m.def(
      "train_vocabulary",
      [](const std::string& text, std::size_t target_size, const std::string& marker,
         std::size_t min_pair_frequency, std::size_t max_token_length, bool lowercase) {
        TrainerConfig config;
        config.target_size = target_size;
        config.marker = marker;
        config.min_pair_frequency = min_pair_frequency;
        config.max_token_length = max_token_length;
        config.lowercase = lowercase;
        WordCounts words(lowercase);
        words.AddText(text);
        TrainResult r = TrainVocabulary(words, config);
        return py::make_tuple(std::move(r.vocab), std::move(r.merges), std::move(r.warnings));
      },
      py::arg("text"), py::arg("target_size"), py::arg("marker") = std::string(kDefaultMarker),
      py::arg("min_pair_frequency") = 2, py::arg("max_token_length") = 64,
      py::arg("lowercase") = false,
      "Train a subword vocabulary; returns (vocab, merges, warnings).");

  m.def("apply_merges", &ApplyMerges, py::arg("word"), py::arg("merges"), py::arg("vocab"));

  m.def(
      "min_partition",
      [](const std::string& surface, const Vocabulary& old_vocab) -> std::optional<std::vector<TokenId>> {
        const TokenTrie trie(old_vocab);
        Token target{surface, false, 0};
        const std::string& marker = old_vocab.marker();
        if (surface.size() > marker.size() && surface.compare(0, marker.size(), marker) == 0) {
          target.is_continuation = true;
          target.marker_length = marker.size();
        }
        auto p = MinPartition(target, trie);
        if (!p) return std::nullopt;
        return p->segments;
      },
      py::arg("surface"), py::arg("old_vocab"));

  py::class_<TransferPlan>(m, "TransferPlan")
      .def_property_readonly("mode", [](const TransferPlan& p) { return std::string(TransferModeName(p.mode)); })
      .def_readonly("old_vocab_sha256", &TransferPlan::old_vocab_sha256)
      .def_readonly("new_vocab_sha256", &TransferPlan::new_vocab_sha256)
      .def_readonly("tokens", &TransferPlan::tokens)
      .def_property_readonly("directives",
                             [](const TransferPlan& p) {
                               py::list out;
                               for (const InitDirective& d : p.directives) {
                                 out.append(py::make_tuple(std::string(InitKindName(d.kind)), d.sources));
                               }
                               return out;
                             })
      .def("to_json", &SerializePlan);
  m.def(
      "build_transfer_plan",
      [](const Vocabulary& new_vocab, const Vocabulary& old_vocab, const std::string& mode) {
        return BuildTransferPlan(new_vocab, old_vocab, ParseTransferMode(mode));
      },
      py::arg("new_vocab"), py::arg("old_vocab"), py::arg("mode") = "averaged");
  m.def("plan_summary", [](const TransferPlan& p) { return SummaryDict(SummarizePlan(p)); });
  m.def("load_plan", &LoadPlan);
  m.def("save_plan", &SavePlan);

  py::class_<EmbeddingMatrix>(m, "EmbeddingMatrix")
      .def(py::init([](std::size_t rows, std::size_t dim, std::vector<float> data) {
             return EmbeddingMatrix(rows, dim, std::move(data));
           }),
           py::arg("rows"), py::arg("dim"), py::arg("data"))
      .def_property_readonly("rows", &EmbeddingMatrix::rows)
      .def_property_readonly("dim", &EmbeddingMatrix::dim)
      .def("row",
           [](const EmbeddingMatrix& mat, std::size_t i) {
             if (i >= mat.rows()) throw py::index_error();
             const auto r = mat.row(i);
             return std::vector<float>(r.begin(), r.end());
           })
      .def("data", &EmbeddingMatrix::data)
      .def("serialize", [](const EmbeddingMatrix& mat) { return py::bytes(SerializeMatrix(mat)); })
      .def("to_text", &ExportMatrixText)
      .def("__eq__", [](const EmbeddingMatrix& a, const EmbeddingMatrix& b) { return a == b; });
  m.def("load_matrix", &LoadMatrix);
  m.def("save_matrix", &SaveMatrix);
  m.def("parse_matrix", [](py::bytes b) { return ParseMatrix(std::string(b)); });
  m.def("random_matrix", &RandomMatrix, py::arg("rows"), py::arg("dim"), py::arg("seed"),
        py::arg("stddev") = 1.0);

  m.def(
      "apply_transfer",
      [](const TransferPlan& plan, const Vocabulary& old_vocab, const Vocabulary& new_vocab,
         const EmbeddingMatrix& old, const std::string& fallback, std::optional<std::uint64_t> seed,
         std::optional<double> scale) {
        return ApplyTransfer(plan, old_vocab, new_vocab, old, MakeFallback(fallback, seed, scale));
      },
      py::arg("plan"), py::arg("old_vocab"), py::arg("new_vocab"), py::arg("old_embeddings"),
      py::arg("fallback") = "global-mean", py::arg("seed") = py::none(),
      py::arg("scale") = py::none());

  m.def(
      "tokenize_corpus",
      [](const std::string& text, const Vocabulary& vocab, const std::vector<MergeRule>& merges,
         bool lowercase) {
        WordCounts words(lowercase);
        words.AddText(text);
        const CorpusStats s = ComputeStats(words, CorpusTokenizer(vocab, merges));
        py::dict d;
        d["word_count"] = s.word_count;
        d["token_count"] = s.token_count;
        d["unknown_count"] = s.unknown_count;
        d["fertility"] = s.fertility;
        d["unknown_rate"] = s.unknown_rate;
        d["coverage"] = s.coverage;
        return d;
      },
      py::arg("text"), py::arg("vocab"), py::arg("merges") = std::vector<MergeRule>{},
      py::arg("lowercase") = false);

  m.def(
      "compare_vocabularies",
      [](const std::string& text, const Vocabulary& old_vocab, const std::vector<MergeRule>& old_merges,
         const Vocabulary& new_vocab, const std::vector<MergeRule>& new_merges, std::size_t top_k,
         bool lowercase) {
        DriftOptions options;
        options.top_k = top_k;
        options.lowercase = lowercase;
        WordCounts words(lowercase);
        words.AddText(text);
        const PlanSummary summary =
            SummarizePlan(BuildTransferPlan(new_vocab, old_vocab, TransferMode::kAveraged));
        const DriftReport r = CompareVocabularies(words, CorpusTokenizer(old_vocab, old_merges),
                                                  CorpusTokenizer(new_vocab, new_merges), options,
                                                  &summary);
        return SerializeDriftReport(r);
      },
      py::arg("text"), py::arg("old_vocab"), py::arg("old_merges"), py::arg("new_vocab"),
      py::arg("new_merges"), py::arg("top_k") = 20, py::arg("lowercase") = false,
      "Returns the drift report as a JSON string.");

  m.def(
      "run_pipeline",
      [](const std::vector<std::filesystem::path>& corpus, const std::filesystem::path& old_vocab,
         const std::filesystem::path& old_embeddings, const std::filesystem::path& out_dir,
         std::vector<std::size_t> sizes, std::optional<std::filesystem::path> old_merges,
         const std::string& mode, const std::string& fallback, std::optional<std::uint64_t> seed) {
        PipelineConfig config;
        config.corpus = corpus;
        config.old_vocab = old_vocab;
        config.old_merges = old_merges;
        config.old_embeddings = old_embeddings;
        config.out_dir = out_dir;
        config.sizes = std::move(sizes);
        config.mode = ParseTransferMode(mode);
        config.fallback = MakeFallback(fallback, seed, std::nullopt);
        py::gil_scoped_release release;
        return RunPipeline(config).manifest;
      },
      py::arg("corpus"), py::arg("old_vocab"), py::arg("old_embeddings"), py::arg("out_dir"),
      py::arg("sizes") = std::vector<std::size_t>{8000, 16000, 32000},
      py::arg("old_merges") = py::none(), py::arg("mode") = "averaged",
      py::arg("fallback") = "global-mean", py::arg("seed") = py::none(),
      "Runs the full sweep and returns the manifest path.");
}
