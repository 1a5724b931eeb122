#include "tagkit/conv_scorer.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <string_view>

#include "tagkit/errors.hpp"

namespace tagkit::scorer {
namespace {

constexpr char kMagic[4] = {'T', 'K', 'C', 'S'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint64_t kTrainSeedSalt = 0x9e3779b97f4a7c15ull;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-8;
constexpr int kCorruptAttempts = 1000;

// Uniform double in [0, 1) built from the engine's full 64-bit output, so the
// stream does not depend on the standard library's distribution internals.
double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Shuffle with engine-defined draws only, for the same reason.
void shuffle_indices(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

void validate_config(const TrainConfig& cfg) {
  if (cfg.dim < 3) throw ConfigError("embedding dimension must be at least 3 for a 3x3 convolution");
  if (cfg.filters == 0) throw ConfigError("filter count must be positive");
  if (cfg.batch_size == 0) throw ConfigError("batch size must be positive");
  if (cfg.neg_per_pos == 0) throw ConfigError("negative samples per positive must be positive");
  if (cfg.dropout_keep <= 0.0 || cfg.dropout_keep > 1.0)
    throw ConfigError("dropout keep probability must be in (0, 1]");
  if (cfg.learning_rate <= 0.0) throw ConfigError("learning rate must be positive");
  if (cfg.margin <= 0.0) throw ConfigError("margin must be positive");
}

void validate_triplet(const ConvScorerModel& m, const kg::IndexedTriplet& t) {
  if (t.head < 0 || static_cast<std::size_t>(t.head) >= m.num_entities() || t.tail < 0 ||
      static_cast<std::size_t>(t.tail) >= m.num_entities() || t.relation < 0 ||
      static_cast<std::size_t>(t.relation) >= m.num_relations())
    throw DataError("triplet index out of range for the scorer model");
}

// Per-forward activations kept for the backward pass.
struct Workspace {
  std::vector<double> stacked;         // 3 x d input rows (head, relation, tail)
  std::vector<double> conv_post;       // F x (d-2), after ReLU
  std::vector<double> flat;            // flattened pool output, after dropout
  std::vector<std::size_t> pool_from;  // winning convolution column per pool cell
  std::vector<std::uint8_t> mask;      // dropout keep mask; empty when inactive
  std::vector<double> fc_post;         // hidden layer, after ReLU
  std::vector<double> dflat;           // scratch for the backward pass
  std::vector<double> dstacked;
  double score_value = 0.0;
};

// Runs the network on one triplet. Dropout fires only when an engine is
// passed; each call then draws one keep decision per flattened value.
double forward(const ConvScorerModel& m, const kg::IndexedTriplet& t, double keep,
               std::mt19937_64* dropout_rng, Workspace& ws) {
  const std::size_t d = m.dim(), filters = m.filters(), cw = m.conv_width(),
                    pw = m.pool_width(), flat_n = m.flat_size(), hidden = m.fc_size();
  const auto ent = m.parameters(ParamGroup::EntityEmbeddings);
  const auto rel = m.parameters(ParamGroup::RelationEmbeddings);
  const auto conv_w = m.parameters(ParamGroup::ConvWeights);
  const auto conv_b = m.parameters(ParamGroup::ConvBiases);
  const auto fc_w = m.parameters(ParamGroup::FcWeights);
  const auto fc_b = m.parameters(ParamGroup::FcBiases);
  const auto out_w = m.parameters(ParamGroup::OutWeights);
  const auto out_b = m.parameters(ParamGroup::OutBias);

  ws.stacked.resize(3 * d);
  for (std::size_t i = 0; i < d; ++i) {
    ws.stacked[i] = ent[static_cast<std::size_t>(t.head) * d + i];
    ws.stacked[d + i] = rel[static_cast<std::size_t>(t.relation) * d + i];
    ws.stacked[2 * d + i] = ent[static_cast<std::size_t>(t.tail) * d + i];
  }

  ws.conv_post.resize(filters * cw);
  for (std::size_t f = 0; f < filters; ++f) {
    for (std::size_t j = 0; j < cw; ++j) {
      double sum = conv_b[f];
      for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c)
          sum += static_cast<double>(conv_w[f * 9 + r * 3 + c]) * ws.stacked[r * d + j + c];
      ws.conv_post[f * cw + j] = sum > 0.0 ? sum : 0.0;
    }
  }

  // 1x2 max-pool with stride 2; a trailing odd column is dropped.
  ws.flat.resize(flat_n);
  ws.pool_from.resize(flat_n);
  for (std::size_t f = 0; f < filters; ++f) {
    for (std::size_t p = 0; p < pw; ++p) {
      const std::size_t j = 2 * p;
      const double left = ws.conv_post[f * cw + j], right = ws.conv_post[f * cw + j + 1];
      const bool take_right = right > left;
      ws.flat[f * pw + p] = take_right ? right : left;
      ws.pool_from[f * pw + p] = take_right ? j + 1 : j;
    }
  }

  if (dropout_rng != nullptr && keep < 1.0) {
    ws.mask.resize(flat_n);
    for (std::size_t i = 0; i < flat_n; ++i) {
      ws.mask[i] = unit_double(*dropout_rng) < keep ? 1 : 0;
      ws.flat[i] = ws.mask[i] ? ws.flat[i] / keep : 0.0;
    }
  } else {
    ws.mask.clear();
  }

  ws.fc_post.resize(hidden);
  for (std::size_t h = 0; h < hidden; ++h) {
    double sum = fc_b[h];
    for (std::size_t p = 0; p < flat_n; ++p)
      sum += static_cast<double>(fc_w[p * hidden + h]) * ws.flat[p];
    ws.fc_post[h] = sum > 0.0 ? sum : 0.0;
  }

  double out = out_b[0];
  for (std::size_t h = 0; h < hidden; ++h)
    out += static_cast<double>(out_w[h]) * ws.fc_post[h];
  ws.score_value = std::tanh(out);
  return ws.score_value;
}

// Accumulates upstream * d(score)/d(parameter) into `acc` for the forward pass
// recorded in `ws`. Optionally records which embedding rows were touched so
// the optimizer can update them lazily.
void backward(const ConvScorerModel& m, const kg::IndexedTriplet& t, Workspace& ws, double keep,
              double upstream, std::array<std::vector<double>, kParamGroupCount>& acc,
              std::vector<char>* entity_seen, std::vector<std::int32_t>* touched_entities,
              std::vector<char>* relation_seen, std::vector<std::int32_t>* touched_relations) {
  const std::size_t d = m.dim(), cw = m.conv_width(), pw = m.pool_width(),
                    flat_n = m.flat_size(), hidden = m.fc_size();
  const auto conv_w = m.parameters(ParamGroup::ConvWeights);
  const auto fc_w = m.parameters(ParamGroup::FcWeights);
  const auto out_w = m.parameters(ParamGroup::OutWeights);

  const double dout = upstream * (1.0 - ws.score_value * ws.score_value);

  acc[static_cast<std::size_t>(ParamGroup::OutBias)][0] += dout;
  auto& g_out_w = acc[static_cast<std::size_t>(ParamGroup::OutWeights)];
  auto& g_fc_w = acc[static_cast<std::size_t>(ParamGroup::FcWeights)];
  auto& g_fc_b = acc[static_cast<std::size_t>(ParamGroup::FcBiases)];

  ws.dflat.assign(flat_n, 0.0);
  for (std::size_t h = 0; h < hidden; ++h) {
    g_out_w[h] += dout * ws.fc_post[h];
    if (ws.fc_post[h] <= 0.0) continue;  // ReLU gate closed
    const double dfc = dout * out_w[h];
    g_fc_b[h] += dfc;
    for (std::size_t p = 0; p < flat_n; ++p) {
      g_fc_w[p * hidden + h] += dfc * ws.flat[p];
      ws.dflat[p] += dfc * fc_w[p * hidden + h];
    }
  }

  auto& g_conv_w = acc[static_cast<std::size_t>(ParamGroup::ConvWeights)];
  auto& g_conv_b = acc[static_cast<std::size_t>(ParamGroup::ConvBiases)];
  ws.dstacked.assign(3 * d, 0.0);
  for (std::size_t p = 0; p < flat_n; ++p) {
    double dz = ws.dflat[p];
    if (!ws.mask.empty()) dz = ws.mask[p] ? dz / keep : 0.0;
    if (dz == 0.0) continue;
    const std::size_t f = p / pw, j = ws.pool_from[p];
    if (ws.conv_post[f * cw + j] <= 0.0) continue;  // pooled a dead unit
    g_conv_b[f] += dz;
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = 0; c < 3; ++c) {
        g_conv_w[f * 9 + r * 3 + c] += dz * ws.stacked[r * d + j + c];
        ws.dstacked[r * d + j + c] += dz * conv_w[f * 9 + r * 3 + c];
      }
    }
  }

  auto& g_ent = acc[static_cast<std::size_t>(ParamGroup::EntityEmbeddings)];
  auto& g_rel = acc[static_cast<std::size_t>(ParamGroup::RelationEmbeddings)];
  const auto head = static_cast<std::size_t>(t.head), tail = static_cast<std::size_t>(t.tail),
             relation = static_cast<std::size_t>(t.relation);
  for (std::size_t i = 0; i < d; ++i) {
    g_ent[head * d + i] += ws.dstacked[i];
    g_rel[relation * d + i] += ws.dstacked[d + i];
    g_ent[tail * d + i] += ws.dstacked[2 * d + i];
  }

  if (entity_seen != nullptr) {
    for (std::int32_t row : {t.head, t.tail}) {
      if (!(*entity_seen)[static_cast<std::size_t>(row)]) {
        (*entity_seen)[static_cast<std::size_t>(row)] = 1;
        touched_entities->push_back(row);
      }
    }
    if (!(*relation_seen)[relation]) {
      (*relation_seen)[relation] = 1;
      touched_relations->push_back(t.relation);
    }
  }
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw DataError("truncated scorer model");
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

std::uint64_t get_u64(std::istream& in) {
  const std::uint64_t lo = get_u32(in);
  return lo | static_cast<std::uint64_t>(get_u32(in)) << 32;
}

}  // namespace

ConvScorerModel::ConvScorerModel(std::size_t num_entities, std::size_t num_relations,
                                 std::size_t dim, std::size_t filters)
    : num_entities_(num_entities), num_relations_(num_relations), dim_(dim), filters_(filters) {
  for (std::size_t g = 0; g < kParamGroupCount; ++g)
    params_[g].assign(group_size(static_cast<ParamGroup>(g)), 0.0f);
}

ConvScorerModel ConvScorerModel::init(std::size_t num_entities, std::size_t num_relations,
                                      const TrainConfig& cfg) {
  validate_config(cfg);
  if (num_entities == 0 || num_relations == 0)
    throw ConfigError("model needs at least one entity and one relation");
  ConvScorerModel m(num_entities, num_relations, cfg.dim, cfg.filters);
  if (m.fc_size() == 0)
    throw ConfigError("pool output too small for a hidden layer; increase dim or filters");
  std::mt19937_64 rng(cfg.seed);
  for (auto& group : m.params_)
    for (float& value : group)
      value = static_cast<float>(unit_double(rng) * 0.2 - 0.1);
  return m;
}

std::size_t ConvScorerModel::group_size(ParamGroup g) const {
  switch (g) {
    case ParamGroup::EntityEmbeddings: return num_entities_ * dim_;
    case ParamGroup::RelationEmbeddings: return num_relations_ * dim_;
    case ParamGroup::ConvWeights: return filters_ * 9;
    case ParamGroup::ConvBiases: return filters_;
    case ParamGroup::FcWeights: return flat_size() * fc_size();
    case ParamGroup::FcBiases: return fc_size();
    case ParamGroup::OutWeights: return fc_size();
    case ParamGroup::OutBias: return 1;
  }
  throw ConfigError("unknown parameter group");
}

std::size_t ConvScorerModel::parameter_count() const {
  std::size_t total = 0;
  for (std::size_t g = 0; g < kParamGroupCount; ++g)
    total += group_size(static_cast<ParamGroup>(g));
  return total;
}

std::span<const float> ConvScorerModel::parameters(ParamGroup g) const {
  return params_[static_cast<std::size_t>(g)];
}

std::span<float> ConvScorerModel::parameters(ParamGroup g) {
  return params_[static_cast<std::size_t>(g)];
}

double ConvScorerModel::score(const kg::IndexedTriplet& t) const {
  if (train_mode_) throw ConfigError("scoring requires eval mode; call set_train_mode(false)");
  validate_triplet(*this, t);
  Workspace ws;
  return forward(*this, t, 1.0, nullptr, ws);
}

TripletSet::TripletSet(std::size_t num_entities, std::size_t num_relations)
    : num_entities_(num_entities), num_relations_(num_relations) {
  if (num_entities > 2'000'000 || num_relations > 2'048)
    throw ConfigError("vocabulary too large for the triplet index");
}

TripletSet TripletSet::of_graph(const kg::KnowledgeGraph& g) {
  TripletSet set(g.num_entities(), g.num_relations());
  for (const auto& t : g.triplets()) set.insert(t);
  return set;
}

std::uint64_t TripletSet::key(const kg::IndexedTriplet& t) const {
  if (t.head < 0 || static_cast<std::uint64_t>(t.head) >= num_entities_ || t.tail < 0 ||
      static_cast<std::uint64_t>(t.tail) >= num_entities_ || t.relation < 0 ||
      static_cast<std::uint64_t>(t.relation) >= num_relations_)
    throw DataError("triplet index out of range for the triplet index");
  return (static_cast<std::uint64_t>(t.head) * num_relations_ +
          static_cast<std::uint64_t>(t.relation)) *
             num_entities_ +
         static_cast<std::uint64_t>(t.tail);
}

void TripletSet::insert(const kg::IndexedTriplet& t) { keys_.insert(key(t)); }

bool TripletSet::contains(const kg::IndexedTriplet& t) const {
  return keys_.find(key(t)) != keys_.end();
}

double margin_loss(std::span<const double> pos_scores, std::span<const double> neg_scores,
                   double margin) {
  if (pos_scores.size() != neg_scores.size())
    throw DataError("positive and negative score lists differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < pos_scores.size(); ++i)
    total += std::max(0.0, margin + pos_scores[i] - neg_scores[i]);
  return total;
}

CorruptedTriplet corrupt_triplet(const kg::IndexedTriplet& t, std::size_t num_entities,
                                 const TripletSet& golden, std::mt19937_64& rng) {
  if (num_entities < 2) throw ConfigError("corruption needs at least two entities");
  for (int attempt = 0; attempt < kCorruptAttempts; ++attempt) {
    const bool corrupt_head = (rng() & 1) != 0;
    const auto replacement = static_cast<std::int32_t>(rng() % num_entities);
    kg::IndexedTriplet candidate = t;
    (corrupt_head ? candidate.head : candidate.tail) = replacement;
    if (candidate != t && !golden.contains(candidate)) return {candidate, corrupt_head};
  }
  throw DataError("no valid corruption found; the graph is too densely golden");
}

ScorerGradients pair_loss_gradients(const ConvScorerModel& m, const kg::IndexedTriplet& pos,
                                    const kg::IndexedTriplet& neg, double margin) {
  if (m.train_mode()) throw ConfigError("gradients are computed in eval mode");
  validate_triplet(m, pos);
  validate_triplet(m, neg);
  ScorerGradients grads;
  for (std::size_t g = 0; g < kParamGroupCount; ++g)
    grads.groups[g].assign(m.group_size(static_cast<ParamGroup>(g)), 0.0);
  Workspace ws_pos, ws_neg;
  const double s_pos = forward(m, pos, 1.0, nullptr, ws_pos);
  const double s_neg = forward(m, neg, 1.0, nullptr, ws_neg);
  if (margin + s_pos - s_neg > 0.0) {
    backward(m, pos, ws_pos, 1.0, 1.0, grads.groups, nullptr, nullptr, nullptr, nullptr);
    backward(m, neg, ws_neg, 1.0, -1.0, grads.groups, nullptr, nullptr, nullptr, nullptr);
  }
  return grads;
}

TrainResult train_scorer(const kg::KnowledgeGraph& g_train, const TrainConfig& cfg) {
  validate_config(cfg);
  if (g_train.empty()) throw DataError("cannot train a scorer on an empty graph");

  TrainResult result{ConvScorerModel::init(g_train.num_entities(), g_train.num_relations(), cfg),
                     {}};
  if (cfg.epochs == 0) return result;

  ConvScorerModel& model = result.model;
  model.set_train_mode(true);
  const TripletSet golden = TripletSet::of_graph(g_train);
  // Separate stream from the one that initialized the parameters.
  std::mt19937_64 rng(cfg.seed ^ kTrainSeedSalt);

  const std::size_t n = g_train.triplets().size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  // Gradient buffers plus Adam moments, all full-sized; embedding rows are
  // visited only when a batch touched them, with bias correction driven by
  // the global step count.
  std::array<std::vector<double>, kParamGroupCount> grads, adam_m, adam_v;
  for (std::size_t g = 0; g < kParamGroupCount; ++g) {
    const std::size_t size = model.group_size(static_cast<ParamGroup>(g));
    grads[g].assign(size, 0.0);
    adam_m[g].assign(size, 0.0);
    adam_v[g].assign(size, 0.0);
  }
  std::vector<char> entity_seen(model.num_entities(), 0), relation_seen(model.num_relations(), 0);
  std::vector<std::int32_t> touched_entities, touched_relations;
  std::uint64_t step = 0;

  const bool use_dropout = cfg.dropout_keep < 1.0;
  Workspace ws_pos, ws_neg;

  auto adam_update = [&](std::size_t group, std::size_t index, double bc1, double bc2) {
    const double g_val = grads[group][index];
    double& m1 = adam_m[group][index];
    double& m2 = adam_v[group][index];
    m1 = kAdamBeta1 * m1 + (1.0 - kAdamBeta1) * g_val;
    m2 = kAdamBeta2 * m2 + (1.0 - kAdamBeta2) * g_val * g_val;
    const double delta = cfg.learning_rate * (m1 / bc1) / (std::sqrt(m2 / bc2) + kAdamEpsilon);
    float& param = model.parameters(static_cast<ParamGroup>(group))[index];
    param = static_cast<float>(static_cast<double>(param) - delta);
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_indices(order, rng);
    double epoch_loss = 0.0;
    std::size_t pairs = 0;

    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      for (std::size_t i = start; i < end; ++i) {
        const kg::IndexedTriplet& pos = g_train.triplets()[order[i]];
        for (std::size_t k = 0; k < cfg.neg_per_pos; ++k) {
          const kg::IndexedTriplet neg =
              corrupt_triplet(pos, model.num_entities(), golden, rng).triplet;
          const double s_pos =
              forward(model, pos, cfg.dropout_keep, use_dropout ? &rng : nullptr, ws_pos);
          const double s_neg =
              forward(model, neg, cfg.dropout_keep, use_dropout ? &rng : nullptr, ws_neg);
          const double gap = cfg.margin + s_pos - s_neg;
          ++pairs;
          if (gap <= 0.0) continue;
          epoch_loss += gap;
          backward(model, pos, ws_pos, cfg.dropout_keep, 1.0, grads, &entity_seen,
                   &touched_entities, &relation_seen, &touched_relations);
          backward(model, neg, ws_neg, cfg.dropout_keep, -1.0, grads, &entity_seen,
                   &touched_entities, &relation_seen, &touched_relations);
        }
      }

      ++step;
      const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
      for (std::size_t g = static_cast<std::size_t>(ParamGroup::ConvWeights);
           g < kParamGroupCount; ++g) {
        for (std::size_t i = 0; i < grads[g].size(); ++i) adam_update(g, i, bc1, bc2);
        std::fill(grads[g].begin(), grads[g].end(), 0.0);
      }
      const auto ent_group = static_cast<std::size_t>(ParamGroup::EntityEmbeddings);
      for (std::int32_t row : touched_entities) {
        const std::size_t base = static_cast<std::size_t>(row) * model.dim();
        for (std::size_t i = 0; i < model.dim(); ++i) adam_update(ent_group, base + i, bc1, bc2);
        std::fill_n(grads[ent_group].begin() + static_cast<std::ptrdiff_t>(base), model.dim(), 0.0);
        entity_seen[static_cast<std::size_t>(row)] = 0;
      }
      const auto rel_group = static_cast<std::size_t>(ParamGroup::RelationEmbeddings);
      for (std::int32_t row : touched_relations) {
        const std::size_t base = static_cast<std::size_t>(row) * model.dim();
        for (std::size_t i = 0; i < model.dim(); ++i) adam_update(rel_group, base + i, bc1, bc2);
        std::fill_n(grads[rel_group].begin() + static_cast<std::ptrdiff_t>(base), model.dim(), 0.0);
        relation_seen[static_cast<std::size_t>(row)] = 0;
      }
      touched_entities.clear();
      touched_relations.clear();
    }

    result.loss_history.push_back(pairs > 0 ? epoch_loss / static_cast<double>(pairs) : 0.0);
  }

  model.set_train_mode(false);
  return result;
}

std::vector<ScoredTail> rank_tails(const ConvScorerModel& m, const kg::KnowledgeGraph& g,
                                   const std::string& head, const std::string& relation,
                                   std::span<const std::string> candidates) {
  if (m.num_entities() != g.num_entities() || m.num_relations() != g.num_relations())
    throw ConfigError("scorer model does not match the graph vocabularies");
  const auto head_id = g.entity_id(head);
  if (!head_id) throw DataError("unknown head entity '" + head + "'");
  const auto relation_id = g.relation_id(relation);
  if (!relation_id) throw DataError("unknown relation '" + relation + "'");
  if (candidates.empty()) throw ConfigError("candidate list is empty");

  std::vector<ScoredTail> ranked;
  ranked.reserve(candidates.size());
  for (const std::string& candidate : candidates) {
    const auto tail_id = g.entity_id(candidate);
    if (!tail_id) throw DataError("unknown candidate entity '" + candidate + "'");
    ranked.push_back({candidate, m.score({*head_id, *relation_id, *tail_id})});
  }
  std::sort(ranked.begin(), ranked.end(), [](const ScoredTail& a, const ScoredTail& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.entity < b.entity;
  });
  return ranked;
}

double l1_distance(const ConvScorerModel& m, const kg::IndexedTriplet& t) {
  validate_triplet(m, t);
  const auto ent = m.parameters(ParamGroup::EntityEmbeddings);
  const auto rel = m.parameters(ParamGroup::RelationEmbeddings);
  const std::size_t d = m.dim();
  double total = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double head = ent[static_cast<std::size_t>(t.head) * d + i];
    const double relation = rel[static_cast<std::size_t>(t.relation) * d + i];
    const double tail = ent[static_cast<std::size_t>(t.tail) * d + i];
    total += std::abs(head + relation - tail);
  }
  return total;
}

namespace {

// Shared ranking loop; `tie` may be empty, in which case score ties fall back
// to the entity index directly.
LinkPredictionReport evaluate_impl(const ScoreFn& score, const ScoreFn& tie,
                                   const kg::KnowledgeGraph& g_valid, std::size_t eval_size) {
  if (g_valid.empty()) throw DataError("cannot evaluate on an empty graph");
  if (eval_size == 0) throw ConfigError("evaluation size must be positive");

  const TripletSet golden = TripletSet::of_graph(g_valid);
  const std::size_t n = std::min(eval_size, g_valid.triplets().size());
  const auto num_entities = static_cast<std::int32_t>(g_valid.num_entities());

  double rank_sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const kg::IndexedTriplet& t = g_valid.triplets()[i];
    const double true_score = score(t);
    const double true_tie = tie ? tie(t) : 0.0;
    std::size_t rank = 1;
    for (std::int32_t e = 0; e < num_entities; ++e) {
      if (e == t.tail) continue;
      const kg::IndexedTriplet candidate{t.head, t.relation, e};
      if (golden.contains(candidate)) continue;  // filtered: also a true answer
      const double s = score(candidate);
      bool better = s < true_score;
      if (s == true_score) {
        if (tie) {
          const double tb = tie(candidate);
          better = tb < true_tie || (tb == true_tie && e < t.tail);
        } else {
          better = e < t.tail;
        }
      }
      if (better) ++rank;
    }
    rank_sum += static_cast<double>(rank);
    if (rank <= 10) ++hits;
  }
  return {rank_sum / static_cast<double>(n), static_cast<double>(hits) / static_cast<double>(n),
          n};
}

}  // namespace

LinkPredictionReport evaluate_link_prediction(const ConvScorerModel& m,
                                              const kg::KnowledgeGraph& g_valid,
                                              std::size_t eval_size) {
  if (m.num_entities() != g_valid.num_entities() || m.num_relations() != g_valid.num_relations())
    throw ConfigError("scorer model does not match the graph vocabularies");
  return evaluate_impl([&m](const kg::IndexedTriplet& t) { return m.score(t); },
                       [&m](const kg::IndexedTriplet& t) { return l1_distance(m, t); }, g_valid,
                       eval_size);
}

LinkPredictionReport evaluate_link_prediction(const ScoreFn& score,
                                              const kg::KnowledgeGraph& g_valid,
                                              std::size_t eval_size) {
  if (!score) throw ConfigError("score function is empty");
  return evaluate_impl(score, ScoreFn{}, g_valid, eval_size);
}

void save_scorer(const ConvScorerModel& m, std::ostream& out) {
  out.write(kMagic, 4);
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(m.dim()));
  put_u32(out, static_cast<std::uint32_t>(m.filters()));
  put_u64(out, m.num_entities());
  put_u64(out, m.num_relations());
  put_u32(out, static_cast<std::uint32_t>(m.fc_size()));
  std::vector<unsigned char> buffer;
  for (std::size_t g = 0; g < kParamGroupCount; ++g) {
    const auto group = m.parameters(static_cast<ParamGroup>(g));
    buffer.resize(group.size() * 4);
    for (std::size_t i = 0; i < group.size(); ++i) {
      const auto bits = std::bit_cast<std::uint32_t>(group[i]);
      buffer[i * 4] = static_cast<unsigned char>(bits);
      buffer[i * 4 + 1] = static_cast<unsigned char>(bits >> 8);
      buffer[i * 4 + 2] = static_cast<unsigned char>(bits >> 16);
      buffer[i * 4 + 3] = static_cast<unsigned char>(bits >> 24);
    }
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size()));
  }
  if (!out) throw DataError("failed to write scorer model");
}

ConvScorerModel load_scorer(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::string_view(magic, 4) != std::string_view(kMagic, 4))
    throw DataError("not a scorer model file");
  const std::uint32_t version = get_u32(in);
  if (version != kFormatVersion)
    throw DataError("unsupported scorer model version " + std::to_string(version));
  const std::uint32_t dim = get_u32(in);
  const std::uint32_t filters = get_u32(in);
  const std::uint64_t num_entities = get_u64(in);
  const std::uint64_t num_relations = get_u64(in);
  const std::uint32_t fc = get_u32(in);
  if (dim < 3 || filters == 0 || num_entities == 0 || num_relations == 0)
    throw DataError("scorer model header is inconsistent");

  ConvScorerModel m(num_entities, num_relations, dim, filters);
  if (m.fc_size() != fc || m.fc_size() == 0)
    throw DataError("scorer model header is inconsistent");

  std::vector<unsigned char> buffer;
  for (std::size_t g = 0; g < kParamGroupCount; ++g) {
    auto group = m.parameters(static_cast<ParamGroup>(g));
    buffer.resize(group.size() * 4);
    if (!in.read(reinterpret_cast<char*>(buffer.data()),
                 static_cast<std::streamsize>(buffer.size())))
      throw DataError("truncated scorer model");
    for (std::size_t i = 0; i < group.size(); ++i) {
      const std::uint32_t bits = static_cast<std::uint32_t>(buffer[i * 4]) |
                                 static_cast<std::uint32_t>(buffer[i * 4 + 1]) << 8 |
                                 static_cast<std::uint32_t>(buffer[i * 4 + 2]) << 16 |
                                 static_cast<std::uint32_t>(buffer[i * 4 + 3]) << 24;
      group[i] = std::bit_cast<float>(bits);
    }
  }
  if (in.peek() != std::istream::traits_type::eof())
    throw DataError("trailing bytes after scorer model");
  return m;
}

void save_scorer_file(const ConvScorerModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  save_scorer(m, out);
}

ConvScorerModel load_scorer_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return load_scorer(in);
}

void save_loss_history(std::span<const double> history, std::ostream& out) {
  char buf[64];
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), history[i]);
    if (ec != std::errc{}) throw DataError("failed to format loss value");
    out << (i + 1) << '\t' << std::string_view(buf, end) << '\n';
  }
  if (!out) throw DataError("failed to write loss history");
}

void save_loss_history_file(std::span<const double> history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  save_loss_history(history, out);
}

}  // namespace tagkit::scorer
