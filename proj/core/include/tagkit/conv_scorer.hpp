#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "tagkit/kg.hpp"

namespace tagkit::scorer {

// Hyperparameters for the convolutional triplet scorer. Defaults target a
// pruned graph in the 13-15K triplet range.
struct TrainConfig {
  double margin = 1.0;
  double learning_rate = 0.001;
  std::size_t epochs = 500;
  std::size_t batch_size = 500;
  std::size_t dim = 200;      // embedding width d
  std::size_t filters = 8;    // convolution kernel count F
  double dropout_keep = 0.5;  // keep probability on the flattened pool output
  std::size_t neg_per_pos = 1;
  std::uint64_t seed = 0;
};

// Parameter groups in declared (serialization) order.
enum class ParamGroup : std::size_t {
  EntityEmbeddings = 0,  // |E| x d, row-major
  RelationEmbeddings,    // |R| x d, row-major
  ConvWeights,           // F kernels of 3x3, kernel-major then row-major
  ConvBiases,            // F
  FcWeights,             // flat_size x fc_size, input-major
  FcBiases,              // fc_size
  OutWeights,            // fc_size
  OutBias,               // 1
};
inline constexpr std::size_t kParamGroupCount = 8;

// Triplet scorer: stacks the head, relation, and tail embeddings into a 3 x d
// matrix, applies F valid 3x3 convolutions with ReLU, max-pools 1x2 stride 2,
// and feeds the flattened maps through one hidden layer into a single tanh
// unit. The output in (-1, 1) is a dissimilarity: lower means more plausible.
//
// Parameters are stored as 32-bit floats (the serialized form); all arithmetic
// runs in double.
class ConvScorerModel {
 public:
  ConvScorerModel() = default;

  // Fresh model with every parameter drawn uniformly from [-0.1, 0.1) using
  // cfg.seed. Identical seeds give bitwise-identical models.
  static ConvScorerModel init(std::size_t num_entities, std::size_t num_relations,
                              const TrainConfig& cfg);

  std::size_t num_entities() const { return num_entities_; }
  std::size_t num_relations() const { return num_relations_; }
  std::size_t dim() const { return dim_; }
  std::size_t filters() const { return filters_; }

  // Shape chain of the forward pass.
  std::size_t conv_width() const { return dim_ - 2; }
  std::size_t pool_width() const { return conv_width() / 2; }
  std::size_t flat_size() const { return filters_ * pool_width(); }
  std::size_t fc_size() const { return flat_size() / 2; }
  std::size_t parameter_count() const;

  // Dropout is live only while training; scoring requires eval mode.
  bool train_mode() const { return train_mode_; }
  void set_train_mode(bool on) { train_mode_ = on; }

  // Deterministic dissimilarity score in (-1, 1). Throws when an index is out
  // of range or the model is in train mode.
  double score(const kg::IndexedTriplet& t) const;

  std::span<const float> parameters(ParamGroup g) const;
  std::span<float> parameters(ParamGroup g);
  std::size_t group_size(ParamGroup g) const;

  bool operator==(const ConvScorerModel&) const = default;

 private:
  ConvScorerModel(std::size_t num_entities, std::size_t num_relations, std::size_t dim,
                  std::size_t filters);

  friend ConvScorerModel load_scorer(std::istream& in);

  std::size_t num_entities_ = 0;
  std::size_t num_relations_ = 0;
  std::size_t dim_ = 0;
  std::size_t filters_ = 0;
  bool train_mode_ = false;
  std::array<std::vector<float>, kParamGroupCount> params_;
};

// Membership index over a graph's triplets, used to keep negative samples out
// of the golden set and to filter known tails during ranking evaluation.
class TripletSet {
 public:
  TripletSet(std::size_t num_entities, std::size_t num_relations);
  static TripletSet of_graph(const kg::KnowledgeGraph& g);

  void insert(const kg::IndexedTriplet& t);
  bool contains(const kg::IndexedTriplet& t) const;
  std::size_t size() const { return keys_.size(); }

 private:
  std::uint64_t key(const kg::IndexedTriplet& t) const;

  std::uint64_t num_entities_ = 0;
  std::uint64_t num_relations_ = 0;
  std::unordered_set<std::uint64_t> keys_;
};

struct CorruptedTriplet {
  kg::IndexedTriplet triplet;
  bool corrupted_head = false;  // false: the tail was replaced
};

// Gradient of a pair loss with respect to every parameter, same group layout
// and sizes as the model.
struct ScorerGradients {
  std::array<std::vector<double>, kParamGroupCount> groups;
};

struct ScoredTail {
  std::string entity;
  double score = 0.0;

  bool operator==(const ScoredTail&) const = default;
};

struct LinkPredictionReport {
  double mean_rank = 0.0;
  double hits_at_10 = 0.0;
  std::size_t evaluated = 0;
};

struct TrainResult {
  ConvScorerModel model;
  std::vector<double> loss_history;  // mean pair loss per epoch
};

// Sum over pairs of max(0, margin + pos - neg): golden triplets are pushed
// below their corruptions by at least the margin.
double margin_loss(std::span<const double> pos_scores, std::span<const double> neg_scores,
                   double margin);

// Replaces the head or the tail (fair coin) with a uniformly drawn entity,
// resampling until the result is outside the golden set; throws if no valid
// corruption turns up within a bounded number of attempts.
CorruptedTriplet corrupt_triplet(const kg::IndexedTriplet& t, std::size_t num_entities,
                                 const TripletSet& golden, std::mt19937_64& rng);

// Mini-batch training with Adam and per-pair negative sampling. Embedding
// rows are updated lazily (only rows touched by a batch step move); dropout
// applies to the flattened pool output while training. Deterministic per
// cfg.seed. epochs == 0 returns the freshly initialized model untouched.
TrainResult train_scorer(const kg::KnowledgeGraph& g_train, const TrainConfig& cfg);

// Analytic gradient of max(0, margin + score(pos) - score(neg)) in eval mode;
// the reference implementation the finite-difference tests check against.
ScorerGradients pair_loss_gradients(const ConvScorerModel& m, const kg::IndexedTriplet& pos,
                                    const kg::IndexedTriplet& neg, double margin);

// Candidates ordered most-plausible-first (ascending dissimilarity, ties
// alphabetical). Throws on labels missing from the graph's vocabularies or a
// model/graph shape mismatch.
std::vector<ScoredTail> rank_tails(const ConvScorerModel& m, const kg::KnowledgeGraph& g,
                                   const std::string& head, const std::string& relation,
                                   std::span<const std::string> candidates);

// Sum of |e_h[i] + e_r[i] - e_t[i]|: translation-style dissimilarity used as
// a tie-break diagnostic alongside the learned score.
double l1_distance(const ConvScorerModel& m, const kg::IndexedTriplet& t);

// Ranks the true tail of up to eval_size validation triplets against every
// entity, excluding other tails that are golden for the same head and
// relation. Score ties break by l1_distance, then entity index.
LinkPredictionReport evaluate_link_prediction(const ConvScorerModel& m,
                                              const kg::KnowledgeGraph& g_valid,
                                              std::size_t eval_size);

// Same evaluation driven by an arbitrary scoring function (lower = more
// plausible); ties break by entity index only.
using ScoreFn = std::function<double(const kg::IndexedTriplet&)>;
LinkPredictionReport evaluate_link_prediction(const ScoreFn& score,
                                              const kg::KnowledgeGraph& g_valid,
                                              std::size_t eval_size);

// Binary serialization: versioned header (magic, version, d, F, |E|, |R|,
// fc size) followed by the parameter groups as little-endian 32-bit floats in
// declared order. Round-trips bit-exactly.
void save_scorer(const ConvScorerModel& m, std::ostream& out);
void save_scorer_file(const ConvScorerModel& m, const std::string& path);
ConvScorerModel load_scorer(std::istream& in);
ConvScorerModel load_scorer_file(const std::string& path);

// Two-column text: epoch number (1-based) and mean pair loss.
void save_loss_history(std::span<const double> history, std::ostream& out);
void save_loss_history_file(std::span<const double> history, const std::string& path);

}  // namespace tagkit::scorer
