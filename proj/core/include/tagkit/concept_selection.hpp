#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tagkit/conv_scorer.hpp"
#include "tagkit/embeddings.hpp"
#include "tagkit/kg.hpp"
#include "tagkit/pos_tagger.hpp"

namespace tagkit::concepts {

// Where a candidate concept was found. Enum order doubles as the preference
// order when context scores tie: a concept stored directly against the word
// beats one the scorer proposed, which beats one borrowed from a lookalike
// entity.
enum class CandidateOrigin : std::uint8_t {
  DirectKg = 0,   // tail of a triplet whose head is the word itself
  ModelRanked,    // among the scorer's top-ranked tails for the word
  SimilarEntity,  // tail of an embedding-space neighbour of the word
};

// Stable names for serialization and diagnostics: "direct-kg",
// "model-ranked", "similar-entity".
std::string_view origin_name(CandidateOrigin origin);

// A concept the word could be tagged with, plus where it came from and how
// well it fits the surrounding text once scored.
struct ConceptCandidate {
  std::string source_word;
  std::string concept_label;
  CandidateOrigin origin = CandidateOrigin::DirectKg;
  double context_score = 0.0;

  bool operator==(const ConceptCandidate&) const = default;
};

struct SelectionConfig {
  double similarity_threshold = 0.7;  // cosine floor for lookalike entities
  std::size_t k_similar = 3;          // lookalike entities consulted per word
  std::size_t k_model_tails = 5;      // scorer-ranked tails added; 0 disables
};

// Candidate concepts for one content word. Words present in the graph yield
// their direct tails plus, when a scorer model is supplied, the model's
// top-k tails over all relations (best score across relations, duplicates
// against the direct list dropped). Words absent from the graph fall back to
// the direct tails of their nearest in-graph entities by cosine similarity;
// if no entity clears the threshold the word contributes nothing. The
// returned candidates are unique by concept label and carry no context score
// yet.
std::vector<ConceptCandidate> candidate_concepts(const std::string& word,
                                                 const kg::KnowledgeGraph& g,
                                                 const scorer::ConvScorerModel* model,
                                                 const emb::EmbeddingTable& table,
                                                 const SelectionConfig& cfg);

// Fit of a concept to a text: the term-frequency-weighted mean cosine between
// the concept and the text's content words, Σ tf(w)·cos(w, c) / Σ tf(w).
// Content words without a vector contribute zero to the numerator but still
// count in the denominator; a concept without a vector (or a text without
// content words) scores 0.
double context_factor(const std::string& concept_label, const pos::EntitySets& sets,
                      const emb::EmbeddingTable& table);

// Scores every candidate against the text and returns the best one with its
// context score filled in. Ties break by origin (direct graph tails first,
// then model-ranked, then similar-entity) and finally by concept label.
// Empty candidates give nullopt.
std::optional<ConceptCandidate> select_concept(std::span<const ConceptCandidate> candidates,
                                               const pos::EntitySets& sets,
                                               const emb::EmbeddingTable& table);

}  // namespace tagkit::concepts
