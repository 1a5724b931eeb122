#include "tagkit/concept_selection.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "tagkit/errors.hpp"

namespace tagkit::concepts {

namespace {

// Every entity except the word itself, ranked by the scorer's best (lowest)
// dissimilarity to the word across all relations, most plausible first and
// ties alphabetical.
std::vector<scorer::ScoredTail> model_tail_ranking(const scorer::ConvScorerModel& m,
                                                   const kg::KnowledgeGraph& g,
                                                   const std::string& word) {
  std::vector<std::string> others;
  others.reserve(g.num_entities());
  for (const auto& entity : g.entities())
    if (entity != word) others.push_back(entity);
  if (others.empty()) return {};

  std::unordered_map<std::string, double> best;
  for (const auto& relation : g.relations()) {
    for (const auto& scored : scorer::rank_tails(m, g, word, relation, others)) {
      auto [it, fresh] = best.try_emplace(scored.entity, scored.score);
      if (!fresh && scored.score < it->second) it->second = scored.score;
    }
  }

  std::vector<scorer::ScoredTail> ranked;
  ranked.reserve(best.size());
  for (const auto& [entity, score] : best) ranked.push_back({entity, score});
  std::sort(ranked.begin(), ranked.end(), [](const scorer::ScoredTail& a, const scorer::ScoredTail& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.entity < b.entity;
  });
  return ranked;
}

}  // namespace

std::string_view origin_name(CandidateOrigin origin) {
  switch (origin) {
    case CandidateOrigin::DirectKg:
      return "direct-kg";
    case CandidateOrigin::ModelRanked:
      return "model-ranked";
    case CandidateOrigin::SimilarEntity:
      return "similar-entity";
  }
  throw ConfigError("unknown candidate origin");
}

std::vector<ConceptCandidate> candidate_concepts(const std::string& word,
                                                 const kg::KnowledgeGraph& g,
                                                 const scorer::ConvScorerModel* model,
                                                 const emb::EmbeddingTable& table,
                                                 const SelectionConfig& cfg) {
  std::vector<ConceptCandidate> out;
  std::unordered_set<std::string> seen;
  auto add = [&](const std::string& label, CandidateOrigin origin) {
    if (seen.insert(label).second) out.push_back({word, label, origin, 0.0});
  };

  if (auto id = g.entity_id(word)) {
    for (const auto& [relation, tail] : g.tails(*id))
      add(g.entity_label(tail), CandidateOrigin::DirectKg);
    if (model != nullptr && cfg.k_model_tails > 0) {
      auto ranked = model_tail_ranking(*model, g, word);
      if (ranked.size() > cfg.k_model_tails) ranked.resize(cfg.k_model_tails);
      for (const auto& scored : ranked) add(scored.entity, CandidateOrigin::ModelRanked);
    }
    return out;
  }

  auto matches =
      emb::similar_entities(word, g.entities(), table, cfg.similarity_threshold, cfg.k_similar);
  if (!matches) return out;
  for (const auto& match : *matches) {
    auto match_id = g.entity_id(match.word);
    if (!match_id) continue;
    for (const auto& [relation, tail] : g.tails(*match_id))
      add(g.entity_label(tail), CandidateOrigin::SimilarEntity);
  }
  return out;
}

double context_factor(const std::string& concept_label, const pos::EntitySets& sets,
                      const emb::EmbeddingTable& table) {
  auto concept_vec = emb::concept_vector(table, concept_label);
  if (!concept_vec) return 0.0;

  double weighted = 0.0;
  double total = 0.0;
  for (const auto& content : sets.content_words) {
    auto tf = sets.term_frequencies.find(content.lemma);
    if (tf == sets.term_frequencies.end()) continue;
    total += static_cast<double>(tf->second);
    if (auto word_vec = table.vector(content.lemma))
      weighted +=
          static_cast<double>(tf->second) * emb::cosine_similarity(*word_vec, *concept_vec);
  }
  if (total == 0.0) return 0.0;
  return weighted / total;
}

std::optional<ConceptCandidate> select_concept(std::span<const ConceptCandidate> candidates,
                                               const pos::EntitySets& sets,
                                               const emb::EmbeddingTable& table) {
  const ConceptCandidate* best = nullptr;
  double best_score = 0.0;
  for (const auto& candidate : candidates) {
    double score = context_factor(candidate.concept_label, sets, table);
    bool wins = false;
    if (best == nullptr) {
      wins = true;
    } else if (score != best_score) {
      wins = score > best_score;
    } else if (candidate.origin != best->origin) {
      wins = candidate.origin < best->origin;
    } else {
      wins = candidate.concept_label < best->concept_label;
    }
    if (wins) {
      best = &candidate;
      best_score = score;
    }
  }
  if (best == nullptr) return std::nullopt;

  ConceptCandidate chosen = *best;
  chosen.context_score = best_score;
  return chosen;
}

}  // namespace tagkit::concepts
