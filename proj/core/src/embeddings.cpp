#include "tagkit/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tagkit/errors.hpp"

namespace tagkit::emb {

void EmbeddingTable::insert(std::string_view word, std::span<const float> values) {
  if (values.size() != dim_) throw DataError("vector dimension mismatch for word: " + std::string(word));
  if (contains(word)) throw DataError("duplicate word: " + std::string(word));
  index_.emplace(std::string(word), words_.size());
  words_.emplace_back(word);
  data_.insert(data_.end(), values.begin(), values.end());
}

std::optional<std::span<const float>> EmbeddingTable::vector(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return std::span<const float>{data_.data() + it->second * dim_, dim_};
}

namespace {

// splits on runs of spaces/tabs; tolerates a trailing '\r'
std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

float parse_float(std::string_view token, std::size_t lineno) {
  float value = 0.0f;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    std::ostringstream msg;
    msg << "bad float '" << token << "' at line " << lineno;
    throw DataError(msg.str());
  }
  return value;
}

}  // namespace

EmbeddingTable load_vectors(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  std::size_t lineno = 0;
  std::vector<float> row;
  bool any_nonzero = false;

  while (std::getline(in, line)) {
    ++lineno;
    auto tokens = split_tokens(line);
    if (tokens.empty()) continue;
    if (tokens.size() < 2) {
      std::ostringstream msg;
      msg << "no vector components at line " << lineno;
      throw DataError(msg.str());
    }
    if (table.dim() == 0) table = EmbeddingTable(tokens.size() - 1);
    if (tokens.size() - 1 != table.dim()) {
      std::ostringstream msg;
      msg << "inconsistent dimension at line " << lineno << " (expected " << table.dim()
          << ", got " << tokens.size() - 1 << ")";
      throw DataError(msg.str());
    }
    row.clear();
    for (std::size_t i = 1; i < tokens.size(); ++i) row.push_back(parse_float(tokens[i], lineno));
    for (float v : row) any_nonzero = any_nonzero || v != 0.0f;
    try {
      table.insert(tokens[0], row);
    } catch (const DataError& e) {
      std::ostringstream msg;
      msg << e.what() << " at line " << lineno;
      throw DataError(msg.str());
    }
  }
  if (in.bad()) throw DataError("read failure on embedding stream");
  if (table.size() == 0) throw DataError("empty embedding stream");
  if (!any_nonzero) throw DataError("embedding stream holds only zero vectors");
  return table;
}

EmbeddingTable load_vectors_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file: " + path);
  return load_vectors(in);
}

void save_vectors(const EmbeddingTable& table, std::ostream& out) {
  char buf[64];
  for (const auto& word : table.words()) {
    out << word;
    std::span<const float> row = *table.vector(word);
    for (float v : row) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      (void)ec;
      out << ' ' << std::string_view(buf, ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw DataError("write failure on embedding stream");
}

void save_vectors_file(const EmbeddingTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write embedding file: " + path);
  save_vectors(table, out);
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw DataError("cosine over mismatched dimensions");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::optional<std::vector<SimilarityMatch>> similar_entities(std::string_view word,
                                                             std::span<const std::string> restrict_to,
                                                             const EmbeddingTable& table,
                                                             double threshold, std::size_t k) {
  auto query = table.vector(word);
  if (!query) return std::nullopt;

  std::vector<SimilarityMatch> matches;
  for (const auto& entity : restrict_to) {
    if (entity == word) continue;
    auto candidate = concept_vector(table, entity);
    if (!candidate) continue;
    double score = cosine_similarity(*query, *candidate);
    if (score >= threshold) matches.push_back({entity, score});
  }
  std::sort(matches.begin(), matches.end(), [](const SimilarityMatch& a, const SimilarityMatch& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.word < b.word;
  });
  if (matches.size() > k) matches.resize(k);
  return matches;
}

std::optional<std::vector<float>> concept_vector(const EmbeddingTable& table,
                                                 std::string_view label) {
  if (label.find('_') == std::string_view::npos) {
    auto v = table.vector(label);
    if (!v) return std::nullopt;
    return std::vector<float>(v->begin(), v->end());
  }

  std::vector<float> sum(table.dim(), 0.0f);
  std::size_t parts = 0, embedded = 0;
  std::size_t start = 0;
  while (start <= label.size()) {
    std::size_t pos = label.find('_', start);
    std::string_view part =
        label.substr(start, pos == std::string_view::npos ? pos : pos - start);
    if (!part.empty()) {
      ++parts;
      if (auto v = table.vector(part)) {
        ++embedded;
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
      }
    }
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (embedded == 0) return std::nullopt;
  for (float& v : sum) v /= static_cast<float>(parts);
  return sum;
}

}  // namespace tagkit::emb
