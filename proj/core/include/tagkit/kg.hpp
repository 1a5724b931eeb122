#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tagkit::kg {

// One assertion: head entity, relation, tail entity. Labels are normalized
// lowercase with underscores for multiword concepts.
struct Triplet {
  std::string head;
  std::string relation;
  std::string tail;

  friend bool operator==(const Triplet&, const Triplet&) = default;
  friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

// Index-resolved triplet; indices refer to a graph's vocabularies.
struct IndexedTriplet {
  std::int32_t head = -1;
  std::int32_t relation = -1;
  std::int32_t tail = -1;

  friend bool operator==(const IndexedTriplet&, const IndexedTriplet&) = default;
  friend auto operator<=>(const IndexedTriplet&, const IndexedTriplet&) = default;
};

struct PruneConfig {
  // Concept URI language segments to accept.
  std::vector<std::string> languages{"en"};
  // Relation names to accept; everything else (including DBpedia-namespace
  // relations) is dropped by the same filter.
  std::vector<std::string> relations{"IsA", "DerivedFrom", "InstanceOf", "PartOf"};
  // Triplet budget applied by prune_graph.
  std::size_t max_triplets = 13000;
  // When non-empty, overrides the frequency policy: a triplet survives only
  // if both endpoints are listed.
  std::vector<std::string> entity_allowlist;
  // Frequency policy: both endpoints must appear in at least this many
  // triplets of the input graph.
  std::size_t min_entity_frequency = 1;
};

struct IngestStats {
  std::size_t lines_read = 0;
  std::size_t kept = 0;       // triplets in the final graph
  std::size_t skipped = 0;    // filtered or malformed lines
  std::size_t duplicates = 0; // parsed fine but already present
};

// Immutable after construction; vocabularies are sorted and densely indexed,
// triplets are deduplicated and stored sorted by (head, relation, tail) index.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  // Dedups, builds sorted vocabularies, resolves indices.
  static KnowledgeGraph from_triplets(std::vector<Triplet> triplets);

  // Builds a graph around an explicit vocabulary order (which may contain
  // entities no triplet references). Throws DataError on unresolvable labels.
  static KnowledgeGraph with_vocab(std::vector<std::string> entities,
                                   std::vector<std::string> relations,
                                   const std::vector<Triplet>& triplets);

  // Subset carrying this graph's vocabularies unchanged (used by the
  // train/valid split so both halves stay index-compatible).
  KnowledgeGraph subset_with_shared_vocab(std::vector<IndexedTriplet> subset) const;

  const std::vector<std::string>& entities() const { return entities_; }
  const std::vector<std::string>& relations() const { return relations_; }
  const std::vector<IndexedTriplet>& triplets() const { return triplets_; }

  std::optional<std::int32_t> entity_id(std::string_view label) const;
  std::optional<std::int32_t> relation_id(std::string_view label) const;
  const std::string& entity_label(std::int32_t id) const { return entities_.at(id); }
  const std::string& relation_label(std::int32_t id) const { return relations_.at(id); }

  bool contains(const IndexedTriplet& t) const;
  // Outgoing (relation, tail) pairs of a head entity.
  std::span<const std::pair<std::int32_t, std::int32_t>> tails(std::int32_t head) const;

  std::size_t num_entities() const { return entities_.size(); }
  std::size_t num_relations() const { return relations_.size(); }
  std::size_t size() const { return triplets_.size(); }
  bool empty() const { return triplets_.empty(); }

  Triplet labelled(const IndexedTriplet& t) const;

 private:
  void build_index();

  std::vector<std::string> entities_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, std::int32_t> entity_ids_;
  std::unordered_map<std::string, std::int32_t> relation_ids_;
  std::vector<IndexedTriplet> triplets_;
  // CSR-style adjacency: adj_[adj_offsets_[h] .. adj_offsets_[h+1])
  std::vector<std::pair<std::int32_t, std::int32_t>> adj_;
  std::vector<std::size_t> adj_offsets_;
};

// Parses one assertion-dump record (5 tab-separated fields: assertion URI,
// relation URI, start URI, end URI, metadata). Returns nothing for lines that
// fail the language/relation filters or are malformed.
std::optional<Triplet> parse_assertion_line(std::string_view line, const PruneConfig& cfg);

// Reads a whole dump, applying parse_assertion_line per record.
KnowledgeGraph load_graph(std::istream& in, const PruneConfig& cfg, IngestStats* stats = nullptr);

// Deterministic stand-in for hand curation: drop triplets whose endpoints are
// too rare, then keep the most frequent triplets (summed endpoint frequency,
// ties lexicographic) up to cfg.max_triplets. A non-empty entity allowlist
// replaces the frequency rule. Throws DataError when nothing survives.
KnowledgeGraph prune_graph(const KnowledgeGraph& g, const PruneConfig& cfg);

// Disjoint partition with |train| = round(ratio * |g|); both halves share g's
// vocabularies. Deterministic per seed.
std::pair<KnowledgeGraph, KnowledgeGraph> split_train_valid(const KnowledgeGraph& g,
                                                            double ratio,
                                                            std::uint64_t seed);

// Text serialization: "head<TAB>relation<TAB>tail" lines plus a "<path>.vocab"
// sidecar that pins the index order. Round-trips bit-exactly.
void save_graph(const KnowledgeGraph& g, const std::string& path);
KnowledgeGraph load_graph_file(const std::string& path);

}  // namespace tagkit::kg
