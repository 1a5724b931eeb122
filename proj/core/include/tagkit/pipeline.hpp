#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tagkit/conv_scorer.hpp"
#include "tagkit/embeddings.hpp"
#include "tagkit/kg.hpp"
#include "tagkit/pos_tagger.hpp"

namespace tagkit::pipeline {

// Paths and knobs for a full tagging run, parsed from a line-oriented
// "key = value" file with '#' comments. Paths stay unvalidated until the
// resources are actually loaded, so command-line overrides can fill gaps.
struct PipelineConfig {
  std::string graph_path;
  std::string embeddings_path;
  std::string tagger_path;
  std::string scorer_path;      // empty: no scorer, no model-ranked candidates
  std::string popularity_path;  // empty: only the eval harness misses it
  double similarity_threshold = 0.7;
  std::size_t top_n = 10;
  std::size_t k_similar = 3;
  std::size_t k_model_tails = 5;
  std::uint64_t seed = 0;

  bool operator==(const PipelineConfig&) const = default;
};

// Recognized keys: graph, embeddings, tagger, scorer, popularity,
// similarity_threshold, top_n, k_similar, k_model_tails, seed. Unknown keys
// and unparseable values raise errors naming the line.
PipelineConfig parse_config(std::istream& in);
PipelineConfig load_config_file(const std::string& path);

// Everything tagging needs, loaded once up front.
struct Resources {
  kg::KnowledgeGraph graph;
  emb::EmbeddingTable table;
  pos::TaggerModel tagger;
  std::optional<scorer::ConvScorerModel> scorer;
};

// Loads every configured resource, checking that each path exists before
// touching any of them: a bad path fails at startup, never mid-pipeline.
// The graph, embedding, and tagger paths are mandatory.
Resources load_resources(const PipelineConfig& cfg);

// On-disk footprint of the model artifacts: graph (with its vocab sidecar),
// tagger, and scorer files. The embedding text file is a shared resource and
// deliberately excluded from the budget.
struct ResourceFootprint {
  std::uintmax_t graph_bytes = 0;
  std::uintmax_t tagger_bytes = 0;
  std::uintmax_t scorer_bytes = 0;
  std::uintmax_t total_bytes = 0;
  bool within_budget = false;
};

inline constexpr std::uintmax_t kResourceBudgetBytes = 35ull * 1024 * 1024;

ResourceFootprint resource_footprint(const PipelineConfig& cfg);

// One ranked concept tag with the evidence that put it there.
struct ConceptTag {
  std::string tag;
  std::string source_word;
  double context_score = 0.0;
  double rf_total = 0.0;
  std::size_t rank = 0;

  bool operator==(const ConceptTag&) const = default;
};

struct StageTimings {
  double pos_ms = 0.0;
  double concepts_ms = 0.0;
  double ranking_ms = 0.0;
  double total_ms = 0.0;
};

struct TagResult {
  std::string digest;  // 64-bit FNV-1a of the input text, 16 hex digits
  std::vector<std::string> proper_noun_tags;  // verbatim, first-appearance order
  std::vector<ConceptTag> concept_tags;       // sorted by rank
  StageTimings timings;
};

// FNV-1a over the raw bytes, rendered as 16 lowercase hex digits.
std::string text_digest(std::string_view text);

// The full pipeline over one text: tag parts of speech and collect entities,
// pick each content word's best-fitting concept, rank the winners by
// sentence co-occurrence, and pass proper nouns through verbatim. Apart from
// the timing fields the result is deterministic for fixed resources and
// config; empty text gives an empty result.
TagResult extract_tags(const std::string& text, const Resources& resources,
                       const PipelineConfig& cfg);

}  // namespace tagkit::pipeline
