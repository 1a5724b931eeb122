#include "tagkit/tag_ranking.hpp"

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <limits>
#include <sstream>

#include "tagkit/errors.hpp"

namespace tagkit::rank {
namespace {

const std::vector<std::size_t>* positions_of(const pos::EntitySets& sets,
                                             const std::string& lemma) {
  for (const auto& cw : sets.content_words)
    if (cw.lemma == lemma) return &cw.positions;
  return nullptr;
}

std::size_t frequency_of(const pos::EntitySets& sets, const std::string& lemma) {
  auto it = sets.term_frequencies.find(lemma);
  return it == sets.term_frequencies.end() ? 0 : it->second;
}

// Sentence indices (sorted, unique) in which the lemma occurs.
std::vector<std::int32_t> sentences_of(const pos::EntitySets& sets,
                                       const std::vector<std::size_t>& positions) {
  std::vector<std::int32_t> out;
  for (std::size_t p : positions) {
    const std::int32_t s = sets.sentence_of[p];
    if (out.empty() || out.back() != s) out.push_back(s);
  }
  return out;
}

// Word tokens strictly between two positions.
std::size_t word_gap(const pos::EntitySets& sets, std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  std::size_t gap = 0;
  for (std::size_t p = a + 1; p < b; ++p)
    if (sets.is_word[p]) ++gap;
  return gap;
}

}  // namespace

std::size_t cooccurrence(const std::string& w_i, const std::string& w_j,
                         const pos::EntitySets& sets) {
  const auto* pi = positions_of(sets, w_i);
  const auto* pj = positions_of(sets, w_j);
  if (pi == nullptr || pj == nullptr) return 0;
  const auto si = sentences_of(sets, *pi);
  const auto sj = sentences_of(sets, *pj);
  std::vector<std::int32_t> shared;
  std::set_intersection(si.begin(), si.end(), sj.begin(), sj.end(), std::back_inserter(shared));
  return shared.size();
}

double alpha(const std::string& w_i, const std::string& w_j, const pos::EntitySets& sets) {
  const auto* pi = positions_of(sets, w_i);
  const auto* pj = positions_of(sets, w_j);
  if (pi == nullptr || pj == nullptr) return 1.0;

  double gap_sum = 0.0;
  std::size_t shared = 0;
  for (std::size_t s = 0; s < sets.sentences.size(); ++s) {
    const auto in_sentence = [&](std::size_t p) {
      return sets.sentence_of[p] == static_cast<std::int32_t>(s);
    };
    // Nearest occurrence pair within this sentence: smallest raw distance,
    // then smallest word gap.
    std::size_t best_distance = std::numeric_limits<std::size_t>::max();
    std::size_t best_gap = 0;
    for (std::size_t a : *pi) {
      if (!in_sentence(a)) continue;
      for (std::size_t b : *pj) {
        if (!in_sentence(b)) continue;
        const std::size_t distance = a > b ? a - b : b - a;
        const std::size_t gap = word_gap(sets, a, b);
        if (distance < best_distance || (distance == best_distance && gap < best_gap)) {
          best_distance = distance;
          best_gap = gap;
        }
      }
    }
    if (best_distance != std::numeric_limits<std::size_t>::max()) {
      gap_sum += static_cast<double>(best_gap);
      ++shared;
    }
  }
  if (shared == 0) return 1.0;
  return gap_sum / static_cast<double>(shared) + 1.0;
}

double ranking_factor(std::size_t c, std::size_t freq_i, std::size_t freq_j, double alpha) {
  if (c == 0) return 0.0;
  return static_cast<double>(c) /
         (static_cast<double>(freq_i) * static_cast<double>(freq_j) * alpha);
}

TagPairStats pair_stats(const TagSource& t_i, const TagSource& t_j, const pos::EntitySets& sets) {
  TagPairStats stats;
  stats.cooccurrence = cooccurrence(t_i.source_word, t_j.source_word, sets);
  stats.freq_i = frequency_of(sets, t_i.source_word);
  stats.freq_j = frequency_of(sets, t_j.source_word);
  stats.alpha = alpha(t_i.source_word, t_j.source_word, sets);
  stats.rf = ranking_factor(stats.cooccurrence, stats.freq_i, stats.freq_j, stats.alpha);
  return stats;
}

double pairwise_rf(const TagSource& t_i, const TagSource& t_j, const pos::EntitySets& sets) {
  return pair_stats(t_i, t_j, sets).rf;
}

RankingMatrix ranking_matrix(std::span<const TagSource> tags, const pos::EntitySets& sets) {
  if (tags.empty()) throw ConfigError("ranking matrix needs at least one tag");
  const std::size_t n = tags.size();
  RankingMatrix m;
  m.tags.assign(tags.begin(), tags.end());
  m.values.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    m.values[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double rf = pairwise_rf(tags[i], tags[j], sets);
      m.values[i * n + j] = rf;
      m.values[j * n + i] = rf;
    }
  }
  return m;
}

std::vector<RankedTag> rank_tags(std::span<const TagSource> tags, const pos::EntitySets& sets,
                                 std::size_t n) {
  if (n == 0) throw ConfigError("tag count n must be positive");
  if (tags.empty()) return {};

  const RankingMatrix m = ranking_matrix(tags, sets);
  std::vector<RankedTag> ranked;
  ranked.reserve(tags.size());
  for (std::size_t i = 0; i < tags.size(); ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < tags.size(); ++j)
      if (j != i) total += m.at(i, j);
    ranked.push_back({tags[i].tag, tags[i].source_word, total, 0});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedTag& a, const RankedTag& b) {
    if (a.rf_total != b.rf_total) return a.rf_total > b.rf_total;
    if (a.tag != b.tag) return a.tag < b.tag;
    return a.source_word < b.source_word;
  });
  if (ranked.size() > n) ranked.resize(n);
  for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].rank = i + 1;
  return ranked;
}

std::string format_matrix(const RankingMatrix& m) {
  const std::size_t n = m.tags.size();
  std::size_t label_width = 0;
  for (const auto& t : m.tags) label_width = std::max(label_width, t.tag.size());
  const std::size_t cell_width = std::max<std::size_t>(label_width, 6) + 2;

  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(label_width + 2)) << "";
  for (const auto& t : m.tags) out << std::setw(static_cast<int>(cell_width)) << t.tag;
  out << '\n';
  out << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < n; ++i) {
    out << std::setw(static_cast<int>(label_width + 2)) << m.tags[i].tag;
    for (std::size_t j = 0; j < n; ++j)
      out << std::setw(static_cast<int>(cell_width)) << m.at(i, j);
    out << '\n';
  }
  return out.str();
}

}  // namespace tagkit::rank
