#include <benchmark/benchmark.h>

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tagkit/conv_scorer.hpp"
#include "tagkit/embeddings.hpp"
#include "tagkit/kg.hpp"
#include "tagkit/pipeline.hpp"
#include "tagkit/pos_tagger.hpp"
#include "tagkit/tag_ranking.hpp"

namespace {

const std::string kFixtures = TAGKIT_TEST_FIXTURES;

const char* kNote =
    "Typically, the driver is responsible for all damage to the car during the tenure of "
    "the lease, even if they are not at fault. Your own insurance may apply to pay for the "
    "damage. Also, the credit-card you used to pay for the lease may have supplemental "
    "insurance for damage to the car.";

const tagkit::pos::TaggerModel& tagger() {
  static auto model =
      tagkit::pos::train_tagger_file(kFixtures + "/pos_corpus.conll", 5, 1);
  return model;
}

// Production-sized scorer: ~1.73M parameters over the pruned-graph vocabulary.
const tagkit::scorer::ConvScorerModel& full_scorer() {
  static auto model = [] {
    tagkit::scorer::TrainConfig cfg;  // d = 200, F = 8
    cfg.seed = 42;
    return tagkit::scorer::ConvScorerModel::init(7077, 4, cfg);
  }();
  return model;
}

// Synthetic 5000-word x 50-dim table for the nearest-neighbour scan.
struct ScanFixture {
  tagkit::emb::EmbeddingTable table;
  std::vector<std::string> vocabulary;
};

const ScanFixture& scan_fixture() {
  static auto fixture = [] {
    std::mt19937_64 rng(7);
    std::ostringstream text;
    ScanFixture f;
    for (int i = 0; i < 5000; ++i) {
      std::string word = "word" + std::to_string(i);
      f.vocabulary.push_back(word);
      text << word;
      for (int j = 0; j < 50; ++j)
        text << ' ' << (static_cast<double>(rng() % 2000) / 1000.0 - 1.0);
      text << '\n';
    }
    std::istringstream in(text.str());
    f.table = tagkit::emb::load_vectors(in);
    return f;
  }();
  return fixture;
}

struct PipelineFixture {
  tagkit::pipeline::PipelineConfig cfg;
  tagkit::pipeline::Resources resources;
};

const PipelineFixture& pipeline_fixture() {
  static auto fixture = [] {
    std::string tagger_path = std::string("/tmp/tagkit_bench_tagger.bin");
    tagkit::pos::save_tagger(tagger(), tagger_path);
    tagkit::pipeline::PipelineConfig cfg;
    cfg.graph_path = kFixtures + "/concept_graph.tsv";
    cfg.embeddings_path = kFixtures + "/embeddings_50d.txt";
    cfg.tagger_path = tagger_path;
    return PipelineFixture{cfg, tagkit::pipeline::load_resources(cfg)};
  }();
  return fixture;
}

void BM_ScoreTriplet(benchmark::State& state) {
  const auto& model = full_scorer();
  tagkit::kg::IndexedTriplet t{12, 1, 4711};
  for (auto _ : state) benchmark::DoNotOptimize(model.score(t));
}
BENCHMARK(BM_ScoreTriplet);

void BM_Viterbi(benchmark::State& state) {
  const auto& model = tagger();
  for (auto _ : state) benchmark::DoNotOptimize(tagkit::pos::tag_text(model, kNote));
}
BENCHMARK(BM_Viterbi);

void BM_CosineScan(benchmark::State& state) {
  const auto& f = scan_fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        tagkit::emb::similar_entities("word2500", f.vocabulary, f.table, -1.0, 3));
}
BENCHMARK(BM_CosineScan);

void BM_RankTags(benchmark::State& state) {
  const auto& f = pipeline_fixture();
  auto sets = tagkit::pos::extract_entities(tagkit::pos::tag_text(f.resources.tagger, kNote));
  std::vector<tagkit::rank::TagSource> sources = {{"contract", "lease"},
                                                  {"vehicle", "car"},
                                                  {"change", "damage"},
                                                  {"payment", "pay"},
                                                  {"responsibility", "fault"}};
  for (auto _ : state)
    benchmark::DoNotOptimize(tagkit::rank::rank_tags(sources, sets, 10));
}
BENCHMARK(BM_RankTags);

void BM_ExtractTags(benchmark::State& state) {
  const auto& f = pipeline_fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(tagkit::pipeline::extract_tags(kNote, f.resources, f.cfg));
}
BENCHMARK(BM_ExtractTags);

}  // namespace

BENCHMARK_MAIN();
