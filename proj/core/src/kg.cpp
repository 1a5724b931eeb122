#include "tagkit/kg.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "tagkit/errors.hpp"

namespace tagkit::kg {

namespace {

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// "/c/en/car/n" -> (en, car). Empty label on failure.
std::pair<std::string, std::string> parse_concept_uri(std::string_view uri) {
  auto parts = split_fields(uri, '/');
  // leading '/' yields an empty first part
  if (parts.size() < 4 || !parts[0].empty() || parts[1] != "c") return {};
  if (parts[2].empty() || parts[3].empty()) return {};
  return {std::string(parts[2]), to_lower(parts[3])};
}

std::string parse_relation_uri(std::string_view uri) {
  if (uri.size() < 4 || uri.substr(0, 3) != "/r/") return {};
  return std::string(uri.substr(3));
}

}  // namespace

std::optional<Triplet> parse_assertion_line(std::string_view line, const PruneConfig& cfg) {
  auto fields = split_fields(line, '\t');
  if (fields.size() < 4) return std::nullopt;

  std::string relation = parse_relation_uri(fields[1]);
  if (relation.empty()) return std::nullopt;
  if (std::find(cfg.relations.begin(), cfg.relations.end(), relation) == cfg.relations.end())
    return std::nullopt;

  auto [head_lang, head] = parse_concept_uri(fields[2]);
  auto [tail_lang, tail] = parse_concept_uri(fields[3]);
  if (head.empty() || tail.empty()) return std::nullopt;

  auto lang_ok = [&](const std::string& lang) {
    return std::find(cfg.languages.begin(), cfg.languages.end(), lang) != cfg.languages.end();
  };
  if (!lang_ok(head_lang) || !lang_ok(tail_lang)) return std::nullopt;

  return Triplet{std::move(head), std::move(relation), std::move(tail)};
}

KnowledgeGraph KnowledgeGraph::from_triplets(std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end());
  triplets.erase(std::unique(triplets.begin(), triplets.end()), triplets.end());

  KnowledgeGraph g;
  std::set<std::string> entity_set, relation_set;
  for (const auto& t : triplets) {
    entity_set.insert(t.head);
    entity_set.insert(t.tail);
    relation_set.insert(t.relation);
  }
  g.entities_.assign(entity_set.begin(), entity_set.end());
  g.relations_.assign(relation_set.begin(), relation_set.end());
  for (std::size_t i = 0; i < g.entities_.size(); ++i)
    g.entity_ids_[g.entities_[i]] = static_cast<std::int32_t>(i);
  for (std::size_t i = 0; i < g.relations_.size(); ++i)
    g.relation_ids_[g.relations_[i]] = static_cast<std::int32_t>(i);

  g.triplets_.reserve(triplets.size());
  for (const auto& t : triplets) {
    g.triplets_.push_back(IndexedTriplet{g.entity_ids_.at(t.head), g.relation_ids_.at(t.relation),
                                         g.entity_ids_.at(t.tail)});
  }
  std::sort(g.triplets_.begin(), g.triplets_.end());
  g.build_index();
  return g;
}

KnowledgeGraph KnowledgeGraph::with_vocab(std::vector<std::string> entities,
                                          std::vector<std::string> relations,
                                          const std::vector<Triplet>& triplets) {
  KnowledgeGraph g;
  g.entities_ = std::move(entities);
  g.relations_ = std::move(relations);
  for (std::size_t i = 0; i < g.entities_.size(); ++i)
    g.entity_ids_[g.entities_[i]] = static_cast<std::int32_t>(i);
  for (std::size_t i = 0; i < g.relations_.size(); ++i)
    g.relation_ids_[g.relations_[i]] = static_cast<std::int32_t>(i);
  if (g.entity_ids_.size() != g.entities_.size() || g.relation_ids_.size() != g.relations_.size())
    throw DataError("duplicate labels in vocabulary");

  g.triplets_.reserve(triplets.size());
  for (const auto& t : triplets) {
    auto h = g.entity_id(t.head);
    auto r = g.relation_id(t.relation);
    auto tl = g.entity_id(t.tail);
    if (!h || !r || !tl) throw DataError("triplet label missing from vocabulary: " + t.head);
    g.triplets_.push_back(IndexedTriplet{*h, *r, *tl});
  }
  std::sort(g.triplets_.begin(), g.triplets_.end());
  g.triplets_.erase(std::unique(g.triplets_.begin(), g.triplets_.end()), g.triplets_.end());
  g.build_index();
  return g;
}

KnowledgeGraph KnowledgeGraph::subset_with_shared_vocab(std::vector<IndexedTriplet> subset) const {
  KnowledgeGraph g;
  g.entities_ = entities_;
  g.relations_ = relations_;
  g.entity_ids_ = entity_ids_;
  g.relation_ids_ = relation_ids_;
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  g.triplets_ = std::move(subset);
  g.build_index();
  return g;
}

void KnowledgeGraph::build_index() {
  adj_.clear();
  adj_offsets_.assign(entities_.size() + 1, 0);
  for (const auto& t : triplets_) adj_offsets_[t.head + 1]++;
  for (std::size_t i = 1; i < adj_offsets_.size(); ++i) adj_offsets_[i] += adj_offsets_[i - 1];
  adj_.resize(triplets_.size());
  std::vector<std::size_t> cursor(adj_offsets_.begin(), adj_offsets_.end() - 1);
  for (const auto& t : triplets_) adj_[cursor[t.head]++] = {t.relation, t.tail};
}

std::optional<std::int32_t> KnowledgeGraph::entity_id(std::string_view label) const {
  auto it = entity_ids_.find(std::string(label));
  if (it == entity_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::int32_t> KnowledgeGraph::relation_id(std::string_view label) const {
  auto it = relation_ids_.find(std::string(label));
  if (it == relation_ids_.end()) return std::nullopt;
  return it->second;
}

bool KnowledgeGraph::contains(const IndexedTriplet& t) const {
  return std::binary_search(triplets_.begin(), triplets_.end(), t);
}

std::span<const std::pair<std::int32_t, std::int32_t>> KnowledgeGraph::tails(std::int32_t head) const {
  if (head < 0 || static_cast<std::size_t>(head) >= entities_.size()) return {};
  return {adj_.data() + adj_offsets_[head], adj_offsets_[head + 1] - adj_offsets_[head]};
}

Triplet KnowledgeGraph::labelled(const IndexedTriplet& t) const {
  return Triplet{entity_label(t.head), relation_label(t.relation), entity_label(t.tail)};
}

KnowledgeGraph load_graph(std::istream& in, const PruneConfig& cfg, IngestStats* stats) {
  IngestStats local;
  std::set<Triplet> seen;
  std::string line;
  while (std::getline(in, line)) {
    ++local.lines_read;
    if (in.bad()) {
      std::ostringstream msg;
      msg << "read failure at line " << local.lines_read;
      throw DataError(msg.str());
    }
    auto t = parse_assertion_line(line, cfg);
    if (!t) {
      ++local.skipped;
      continue;
    }
    if (!seen.insert(std::move(*t)).second) ++local.duplicates;
  }
  if (in.bad()) throw DataError("read failure on assertion stream");

  local.kept = seen.size();
  if (stats) *stats = local;
  return KnowledgeGraph::from_triplets({seen.begin(), seen.end()});
}

KnowledgeGraph prune_graph(const KnowledgeGraph& g, const PruneConfig& cfg) {
  if (cfg.max_triplets == 0) throw ConfigError("max_triplets must be positive");
  if (g.empty()) throw DataError("cannot prune an empty graph");

  // entity frequency over the input graph; self-loops count both endpoints
  std::vector<std::size_t> freq(g.num_entities(), 0);
  for (const auto& t : g.triplets()) {
    freq[t.head]++;
    freq[t.tail]++;
  }

  std::vector<IndexedTriplet> retained;
  if (!cfg.entity_allowlist.empty()) {
    std::set<std::string> allow(cfg.entity_allowlist.begin(), cfg.entity_allowlist.end());
    for (const auto& t : g.triplets()) {
      if (allow.count(g.entity_label(t.head)) && allow.count(g.entity_label(t.tail)))
        retained.push_back(t);
    }
  } else {
    for (const auto& t : g.triplets()) {
      if (freq[t.head] >= cfg.min_entity_frequency && freq[t.tail] >= cfg.min_entity_frequency)
        retained.push_back(t);
    }
  }
  if (retained.empty()) throw DataError("pruning removed every triplet");

  std::stable_sort(retained.begin(), retained.end(),
                   [&](const IndexedTriplet& a, const IndexedTriplet& b) {
                     std::size_t fa = freq[a.head] + freq[a.tail];
                     std::size_t fb = freq[b.head] + freq[b.tail];
                     if (fa != fb) return fa > fb;
                     return g.labelled(a) < g.labelled(b);
                   });
  if (retained.size() > cfg.max_triplets) retained.resize(cfg.max_triplets);

  std::vector<Triplet> labelled;
  labelled.reserve(retained.size());
  for (const auto& t : retained) labelled.push_back(g.labelled(t));
  return KnowledgeGraph::from_triplets(std::move(labelled));
}

std::pair<KnowledgeGraph, KnowledgeGraph> split_train_valid(const KnowledgeGraph& g, double ratio,
                                                            std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must be in (0, 1)");
  if (g.size() < 2) throw DataError("graph too small to split");

  std::vector<std::size_t> order(g.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(g.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, g.size() - 1);

  std::vector<IndexedTriplet> train, valid;
  train.reserve(n_train);
  valid.reserve(g.size() - n_train);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? train : valid).push_back(g.triplets()[order[i]]);
  }
  return {g.subset_with_shared_vocab(std::move(train)),
          g.subset_with_shared_vocab(std::move(valid))};
}

void save_graph(const KnowledgeGraph& g, const std::string& path) {
  {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write graph file: " + path);
    for (const auto& t : g.triplets()) {
      auto lt = g.labelled(t);
      out << lt.head << '\t' << lt.relation << '\t' << lt.tail << '\n';
    }
    if (!out) throw DataError("write failure: " + path);
  }
  std::ofstream vout(path + ".vocab");
  if (!vout) throw DataError("cannot write vocab file: " + path + ".vocab");
  vout << "tagkit-vocab 1\n";
  vout << "entities " << g.num_entities() << '\n';
  for (const auto& e : g.entities()) vout << e << '\n';
  vout << "relations " << g.num_relations() << '\n';
  for (const auto& r : g.relations()) vout << r << '\n';
  if (!vout) throw DataError("write failure: " + path + ".vocab");
}

KnowledgeGraph load_graph_file(const std::string& path) {
  std::ifstream vin(path + ".vocab");
  if (!vin) throw DataError("cannot open vocab file: " + path + ".vocab");
  std::string header, word;
  std::size_t n = 0;
  std::getline(vin, header);
  if (header != "tagkit-vocab 1") throw DataError("bad vocab header in " + path + ".vocab");

  auto read_section = [&](const std::string& name) {
    std::string tag;
    vin >> tag >> n;
    vin.ignore();
    if (tag != name) throw DataError("expected '" + name + "' section in " + path + ".vocab");
    std::vector<std::string> items;
    items.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::getline(vin, word)) throw DataError("truncated vocab file: " + path + ".vocab");
      items.push_back(word);
    }
    return items;
  };
  std::vector<std::string> entities = read_section("entities");
  std::vector<std::string> relations = read_section("relations");

  std::ifstream in(path);
  if (!in) throw DataError("cannot open graph file: " + path);
  std::vector<Triplet> triplets;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_fields(line, '\t');
    if (fields.size() != 3) {
      std::ostringstream msg;
      msg << "bad triplet record at " << path << ":" << lineno;
      throw DataError(msg.str());
    }
    triplets.push_back(
        Triplet{std::string(fields[0]), std::string(fields[1]), std::string(fields[2])});
  }
  return KnowledgeGraph::with_vocab(std::move(entities), std::move(relations), triplets);
}

}  // namespace tagkit::kg
