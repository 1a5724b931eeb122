#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tagkit::emb {

// Word vectors loaded from a text file, immutable once loaded. Iteration and
// serialization follow insertion order; lookups are by exact label.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  void insert(std::string_view word, std::span<const float> values);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  bool contains(std::string_view word) const { return index_.find(word) != index_.end(); }
  std::optional<std::span<const float>> vector(std::string_view word) const;
  const std::vector<std::string>& words() const { return words_; }

 private:
  struct LabelHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t, LabelHash, std::equal_to<>> index_;
  std::vector<float> data_;  // row-major, size() x dim()
};

struct SimilarityMatch {
  std::string word;
  double score = 0.0;

  bool operator==(const SimilarityMatch&) const = default;
};

// Text format: one entry per line, the word then dim() space-separated floats.
// The dimension is taken from the first line; later lines must match it.
EmbeddingTable load_vectors(std::istream& in);
EmbeddingTable load_vectors_file(const std::string& path);
void save_vectors(const EmbeddingTable& table, std::ostream& out);
void save_vectors_file(const EmbeddingTable& table, const std::string& path);

// dot(a,b) / (|a||b|), accumulated in double; 0.0 when either vector is zero
// so degenerate tokens drop out of similarity sums.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

// Linear scan over `restrict_to`: every entity with a vector whose cosine to
// `word` is >= threshold, best first (ties alphabetical), at most k, the query
// itself excluded. nullopt when the query word has no vector, so the caller
// can drop the word instead of treating it as dissimilar to everything.
std::optional<std::vector<SimilarityMatch>> similar_entities(std::string_view word,
                                                             std::span<const std::string> restrict_to,
                                                             const EmbeddingTable& table,
                                                             double threshold, std::size_t k);

// Vector for a concept label: the word's own vector, or for underscore-joined
// multiword labels the mean of the constituent vectors (absent constituents
// contribute zero). nullopt when no constituent is in the table.
std::optional<std::vector<float>> concept_vector(const EmbeddingTable& table,
                                                 std::string_view label);

}  // namespace tagkit::emb
