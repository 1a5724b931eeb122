#include "tagkit/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <unordered_map>

#include "tagkit/concept_selection.hpp"
#include "tagkit/errors.hpp"
#include "tagkit/tag_ranking.hpp"

namespace tagkit::pipeline {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_line(std::size_t lineno, const std::string& what) {
  throw ConfigError("config line " + std::to_string(lineno) + ": " + what);
}

template <typename T>
T parse_number(std::string_view value, std::size_t lineno, const char* key) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    bad_line(lineno, std::string("bad value for ") + key + ": '" + std::string(value) + "'");
  return out;
}

void assign(PipelineConfig& cfg, std::string_view key, std::string_view value,
            std::size_t lineno) {
  if (key == "graph") {
    cfg.graph_path = value;
  } else if (key == "embeddings") {
    cfg.embeddings_path = value;
  } else if (key == "tagger") {
    cfg.tagger_path = value;
  } else if (key == "scorer") {
    cfg.scorer_path = value;
  } else if (key == "popularity") {
    cfg.popularity_path = value;
  } else if (key == "similarity_threshold") {
    cfg.similarity_threshold = parse_number<double>(value, lineno, "similarity_threshold");
    if (cfg.similarity_threshold < -1.0 || cfg.similarity_threshold > 1.0)
      bad_line(lineno, "similarity_threshold must lie in [-1, 1]");
  } else if (key == "top_n") {
    cfg.top_n = parse_number<std::size_t>(value, lineno, "top_n");
    if (cfg.top_n == 0) bad_line(lineno, "top_n must be positive");
  } else if (key == "k_similar") {
    cfg.k_similar = parse_number<std::size_t>(value, lineno, "k_similar");
  } else if (key == "k_model_tails") {
    cfg.k_model_tails = parse_number<std::size_t>(value, lineno, "k_model_tails");
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(value, lineno, "seed");
  } else {
    bad_line(lineno, "unknown key '" + std::string(key) + "'");
  }
}

std::uintmax_t file_bytes(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw ConfigError("configured file does not exist: " + path);
  return std::filesystem::file_size(path);
}

double ms_between(std::chrono::steady_clock::time_point a,
                  std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

}  // namespace

PipelineConfig parse_config(std::istream& in) {
  PipelineConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    auto stripped = trim(line);
    if (stripped.empty()) continue;

    auto eq = stripped.find('=');
    if (eq == std::string_view::npos) bad_line(lineno, "expected key = value");
    auto key = trim(stripped.substr(0, eq));
    auto value = trim(stripped.substr(eq + 1));
    if (key.empty()) bad_line(lineno, "missing key");
    assign(cfg, key, value, lineno);
  }
  return cfg;
}

PipelineConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in);
}

Resources load_resources(const PipelineConfig& cfg) {
  if (cfg.graph_path.empty()) throw ConfigError("config is missing the graph path");
  if (cfg.embeddings_path.empty()) throw ConfigError("config is missing the embeddings path");
  if (cfg.tagger_path.empty()) throw ConfigError("config is missing the tagger path");

  std::vector<std::string> required{cfg.graph_path, cfg.graph_path + ".vocab",
                                    cfg.embeddings_path, cfg.tagger_path};
  if (!cfg.scorer_path.empty()) required.push_back(cfg.scorer_path);
  for (const auto& path : required)
    if (!std::filesystem::exists(path))
      throw ConfigError("configured file does not exist: " + path);

  Resources res{kg::load_graph_file(cfg.graph_path), emb::load_vectors_file(cfg.embeddings_path),
                pos::load_tagger(cfg.tagger_path), std::nullopt};
  if (!cfg.scorer_path.empty()) res.scorer = scorer::load_scorer_file(cfg.scorer_path);
  return res;
}

ResourceFootprint resource_footprint(const PipelineConfig& cfg) {
  ResourceFootprint fp;
  if (!cfg.graph_path.empty())
    fp.graph_bytes = file_bytes(cfg.graph_path) + file_bytes(cfg.graph_path + ".vocab");
  if (!cfg.tagger_path.empty()) fp.tagger_bytes = file_bytes(cfg.tagger_path);
  if (!cfg.scorer_path.empty()) fp.scorer_bytes = file_bytes(cfg.scorer_path);
  fp.total_bytes = fp.graph_bytes + fp.tagger_bytes + fp.scorer_bytes;
  fp.within_budget = fp.total_bytes <= kResourceBudgetBytes;
  return fp;
}

std::string text_digest(std::string_view text) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char byte : text) {
    hash ^= byte;
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

TagResult extract_tags(const std::string& text, const Resources& resources,
                       const PipelineConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();

  auto tagged = pos::tag_text(resources.tagger, text);
  auto sets = pos::extract_entities(tagged);
  const auto after_pos = clock::now();

  concepts::SelectionConfig selection;
  selection.similarity_threshold = cfg.similarity_threshold;
  selection.k_similar = cfg.k_similar;
  selection.k_model_tails = cfg.k_model_tails;
  const scorer::ConvScorerModel* model = resources.scorer ? &*resources.scorer : nullptr;

  std::vector<rank::TagSource> sources;
  std::unordered_map<std::string, double> context_of;  // keyed by source word
  for (const auto& word : sets.content_words) {
    auto candidates =
        concepts::candidate_concepts(word.lemma, resources.graph, model, resources.table, selection);
    auto pick = concepts::select_concept(candidates, sets, resources.table);
    if (!pick) continue;
    sources.push_back({pick->concept_label, word.lemma});
    context_of[word.lemma] = pick->context_score;
  }
  const auto after_concepts = clock::now();

  auto ranked = rank::rank_tags(sources, sets, cfg.top_n);
  TagResult result;
  result.digest = text_digest(text);
  result.proper_noun_tags = sets.proper_nouns;
  result.concept_tags.reserve(ranked.size());
  for (const auto& tag : ranked)
    result.concept_tags.push_back(
        {tag.tag, tag.source_word, context_of.at(tag.source_word), tag.rf_total, tag.rank});
  const auto done = clock::now();

  result.timings.pos_ms = ms_between(start, after_pos);
  result.timings.concepts_ms = ms_between(after_pos, after_concepts);
  result.timings.ranking_ms = ms_between(after_concepts, done);
  result.timings.total_ms = ms_between(start, done);
  return result;
}

}  // namespace tagkit::pipeline
