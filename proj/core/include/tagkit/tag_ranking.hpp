#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tagkit/pos_tagger.hpp"

namespace tagkit::rank {

// A concept tag together with the content word that produced it; the ranking
// is computed from how the source words sit in the text.
struct TagSource {
  std::string tag;
  std::string source_word;

  bool operator==(const TagSource&) const = default;
};

// Breakdown of one pair's ranking value.
struct TagPairStats {
  std::size_t cooccurrence = 0;  // sentences containing both source words
  std::size_t freq_i = 0;        // whole-text frequency of each source word
  std::size_t freq_j = 0;
  double alpha = 1.0;  // mean nearest-occurrence word gap plus 1
  double rf = 0.0;
};

// Square pairwise ranking-factor matrix with a unit diagonal.
struct RankingMatrix {
  std::vector<TagSource> tags;
  std::vector<double> values;  // row-major, tags.size() x tags.size()

  double at(std::size_t i, std::size_t j) const { return values.at(i * tags.size() + j); }
};

struct RankedTag {
  std::string tag;
  std::string source_word;
  double rf_total = 0.0;  // sum of pairwise values against every other tag
  std::size_t rank = 0;   // 1-based

  bool operator==(const RankedTag&) const = default;
};

// Number of sentences containing at least one occurrence of each lemma.
// Words without recorded positions (anything but nouns and verbs) co-occur
// with nothing.
std::size_t cooccurrence(const std::string& w_i, const std::string& w_j,
                         const pos::EntitySets& sets);

// Mean, over the sentences where both lemmas appear, of the number of word
// tokens strictly between the nearest occurrence pair — plus 1. Defined as
// 1.0 for pairs that never share a sentence (their ranking value is 0 anyway).
double alpha(const std::string& w_i, const std::string& w_j, const pos::EntitySets& sets);

// The bare ranking arithmetic: c / (freq_i * freq_j * alpha), or 0 when the
// words never co-occur.
double ranking_factor(std::size_t c, std::size_t freq_i, std::size_t freq_j, double alpha);

TagPairStats pair_stats(const TagSource& t_i, const TagSource& t_j, const pos::EntitySets& sets);

double pairwise_rf(const TagSource& t_i, const TagSource& t_j, const pos::EntitySets& sets);

RankingMatrix ranking_matrix(std::span<const TagSource> tags, const pos::EntitySets& sets);

// Tags ordered by descending total ranking factor (ties alphabetical, then by
// source word), truncated to the best n.
std::vector<RankedTag> rank_tags(std::span<const TagSource> tags, const pos::EntitySets& sets,
                                 std::size_t n);

// Aligned text rendering of the matrix for debugging.
std::string format_matrix(const RankingMatrix& m);

}  // namespace tagkit::rank
