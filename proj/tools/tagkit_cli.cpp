#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "tagkit/errors.hpp"
#include "tagkit/evaluation.hpp"
#include "tagkit/kg.hpp"
#include "tagkit/pipeline.hpp"
#include "tagkit/pos_tagger.hpp"

namespace {

using nlohmann::ordered_json;

// Built-in sample for `bench` when no input file is given: a three-sentence
// car-lease note, long enough to exercise every stage.
const char* kSampleNote =
    "Typically, the driver is responsible for all damage to the car during the tenure of "
    "the lease, even if they are not at fault. Your own insurance may apply to pay for the "
    "damage. Also, the credit-card you used to pay for the lease may have supplemental "
    "insurance for damage to the car.";

constexpr double kLatencyBudgetMs = 670.0;

std::string slurp(const std::string& path) {
  if (path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tagkit::DataError("cannot open input file: " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void emit(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tagkit::DataError("cannot open output file: " + path);
  out << content;
  if (!out) throw tagkit::DataError("write failure: " + path);
}

double to_mb(std::uintmax_t bytes) { return static_cast<double>(bytes) / (1024.0 * 1024.0); }

// Shared --config/--top/--seed handling: flags override the file.
struct ConfigOpts {
  std::string config_path;
  std::size_t top_n = 0;
  std::uint64_t seed = 0;
  bool top_set = false;
  bool seed_set = false;

  tagkit::pipeline::PipelineConfig resolve() const {
    auto cfg = tagkit::pipeline::load_config_file(config_path);
    if (top_set) {
      if (top_n == 0) throw tagkit::ConfigError("--top must be positive");
      cfg.top_n = top_n;
    }
    if (seed_set) cfg.seed = seed;
    return cfg;
  }
};

void add_config_opts(CLI::App* cmd, const std::shared_ptr<ConfigOpts>& opts, bool with_top) {
  cmd->add_option("--config", opts->config_path, "pipeline config file")->required();
  if (with_top)
    cmd->add_option("--top", opts->top_n, "maximum concept tags to keep")
        ->each([opts](const std::string&) { opts->top_set = true; });
  cmd->add_option("--seed", opts->seed, "random seed override")
      ->each([opts](const std::string&) { opts->seed_set = true; });
}

ordered_json result_to_json(const tagkit::pipeline::TagResult& result, bool with_timings) {
  ordered_json doc;
  doc["digest"] = result.digest;
  doc["proper_nouns"] = result.proper_noun_tags;
  doc["concepts"] = ordered_json::array();
  for (const auto& tag : result.concept_tags) {
    doc["concepts"].push_back({{"tag", tag.tag},
                               {"source_word", tag.source_word},
                               {"context_score", tag.context_score},
                               {"rf_total", tag.rf_total},
                               {"rank", tag.rank}});
  }
  if (with_timings) {
    doc["timings"] = {{"pos_ms", result.timings.pos_ms},
                      {"concepts_ms", result.timings.concepts_ms},
                      {"ranking_ms", result.timings.ranking_ms},
                      {"total_ms", result.timings.total_ms}};
  }
  return doc;
}

void setup_ingest(CLI::App& app) {
  auto* cmd = app.add_subcommand("ingest", "filter a raw assertion dump into a concept graph");
  struct Opts {
    std::string in = "-";
    std::string out;
    std::size_t max_triplets = 13000;
    std::size_t min_entity_frequency = 1;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--in", opts->in, "assertion dump (CSV), - for stdin");
  cmd->add_option("--out", opts->out, "graph file to write")->required();
  cmd->add_option("--max-triplets", opts->max_triplets, "triplet budget after pruning");
  cmd->add_option("--min-entity-freq", opts->min_entity_frequency,
                  "minimum triplet count per endpoint");

  cmd->callback([opts] {
    tagkit::kg::PruneConfig prune;
    prune.max_triplets = opts->max_triplets;
    prune.min_entity_frequency = opts->min_entity_frequency;

    tagkit::kg::IngestStats stats;
    std::istringstream buffer(slurp(opts->in));
    auto raw = tagkit::kg::load_graph(buffer, prune, &stats);
    auto pruned = tagkit::kg::prune_graph(raw, prune);
    tagkit::kg::save_graph(pruned, opts->out);

    std::cerr << "read " << stats.lines_read << " lines: kept " << stats.kept << ", skipped "
              << stats.skipped << ", duplicates " << stats.duplicates << "\n";
    std::cerr << "pruned to " << pruned.size() << " triplets over " << pruned.num_entities()
              << " entities and " << pruned.num_relations() << " relations -> " << opts->out
              << "\n";
  });
}

void setup_train_kg(CLI::App& app) {
  auto* cmd = app.add_subcommand("train-kg", "train the triplet scorer on a graph file");
  struct Opts {
    std::string in;
    std::string out;
    std::string history;
    tagkit::scorer::TrainConfig train;
    double valid_ratio = 0.0;
    std::size_t eval_size = 100;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--in", opts->in, "graph file")->required();
  cmd->add_option("--out", opts->out, "scorer model to write")->required();
  cmd->add_option("--epochs", opts->train.epochs, "training epochs");
  cmd->add_option("--seed", opts->train.seed, "training seed");
  cmd->add_option("--dim", opts->train.dim, "embedding width");
  cmd->add_option("--filters", opts->train.filters, "convolution kernel count");
  cmd->add_option("--batch-size", opts->train.batch_size, "triplets per batch");
  cmd->add_option("--learning-rate", opts->train.learning_rate, "Adam step size");
  cmd->add_option("--margin", opts->train.margin, "ranking margin");
  cmd->add_option("--history", opts->history, "write per-epoch loss here");
  cmd->add_option("--valid-ratio", opts->valid_ratio,
                  "hold out this fraction for link-prediction eval");
  cmd->add_option("--eval-size", opts->eval_size, "validation triplets to rank");

  cmd->callback([opts] {
    if (opts->valid_ratio < 0.0 || opts->valid_ratio >= 1.0)
      throw tagkit::ConfigError("--valid-ratio must lie in [0, 1)");

    auto g = tagkit::kg::load_graph_file(opts->in);
    auto train_graph = g;
    tagkit::kg::KnowledgeGraph valid_graph;
    if (opts->valid_ratio > 0.0) {
      auto split =
          tagkit::kg::split_train_valid(g, 1.0 - opts->valid_ratio, opts->train.seed);
      train_graph = std::move(split.first);
      valid_graph = std::move(split.second);
    }

    auto result = tagkit::scorer::train_scorer(train_graph, opts->train);
    tagkit::scorer::save_scorer_file(result.model, opts->out);
    if (!opts->history.empty())
      tagkit::scorer::save_loss_history_file(result.loss_history, opts->history);

    std::cerr << "trained " << opts->train.epochs << " epochs on " << train_graph.size()
              << " triplets";
    if (!result.loss_history.empty())
      std::cerr << ": first loss " << result.loss_history.front() << ", final "
                << result.loss_history.back();
    std::cerr << " -> " << opts->out << "\n";

    if (!valid_graph.empty()) {
      auto report =
          tagkit::scorer::evaluate_link_prediction(result.model, valid_graph, opts->eval_size);
      std::cerr << "link prediction on " << report.evaluated << " held-out triplets: mean rank "
                << report.mean_rank << ", hits@10 " << report.hits_at_10 << "\n";
    }
  });
}

void setup_train_pos(CLI::App& app) {
  auto* cmd = app.add_subcommand("train-pos", "train the part-of-speech tagger on a corpus");
  struct Opts {
    std::string in;
    std::string out;
    std::size_t epochs = 5;
    std::uint64_t seed = 0;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--in", opts->in, "two-column training corpus")->required();
  cmd->add_option("--out", opts->out, "tagger model to write")->required();
  cmd->add_option("--epochs", opts->epochs, "training epochs");
  cmd->add_option("--seed", opts->seed, "shuffle seed");

  cmd->callback([opts] {
    auto model = tagkit::pos::train_tagger_file(opts->in, opts->epochs, opts->seed);
    tagkit::pos::save_tagger(model, opts->out);
    std::cerr << "trained tagger (" << model.tagset().size() << " tags) -> " << opts->out << "\n";
  });
}

void setup_tag(CLI::App& app) {
  auto* cmd = app.add_subcommand("tag", "extract ranked tags from a text");
  struct Opts {
    ConfigOpts config;
    std::string in = "-";
    std::string out = "-";
    bool timings = false;
  };
  auto opts = std::make_shared<Opts>();
  auto config = std::shared_ptr<ConfigOpts>(opts, &opts->config);
  add_config_opts(cmd, config, /*with_top=*/true);
  cmd->add_option("--in", opts->in, "text file to tag, - for stdin");
  cmd->add_option("--out", opts->out, "where to write the result, - for stdout");
  cmd->add_flag("--timings", opts->timings, "include per-stage timings in the output");

  cmd->callback([opts] {
    auto cfg = opts->config.resolve();
    auto resources = tagkit::pipeline::load_resources(cfg);
    auto text = slurp(opts->in);
    auto result = tagkit::pipeline::extract_tags(text, resources, cfg);

    emit(opts->out, result_to_json(result, opts->timings).dump(2) + "\n");
    std::cerr << "tagged " << result.digest << ": " << result.concept_tags.size()
              << " concept tags, " << result.proper_noun_tags.size() << " proper nouns in "
              << result.timings.total_ms << " ms\n";
  });
}

void setup_eval(CLI::App& app) {
  auto* cmd = app.add_subcommand("eval", "score our tags against competitors and an oracle");
  struct Opts {
    std::string config_path;
    std::string oracle_path;
    std::string ours_path;
    std::vector<std::string> theirs_paths;
    std::string labels_path;
    std::string out = "-";
    std::size_t sample = 5;
    double percentile = 50.0;
    std::uint64_t seed = 0;
    bool seed_set = false;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--config", opts->config_path, "pipeline config (for popularity/seed)");
  cmd->add_option("--oracle", opts->oracle_path, "popularity table, overrides the config");
  cmd->add_option("--ours", opts->ours_path, "our ranked tag list")->required();
  cmd->add_option("--theirs", opts->theirs_paths, "competitor tag list(s)")->required();
  cmd->add_option("--labels", opts->labels_path, "known-correct tags (else volume threshold)");
  cmd->add_option("--out", opts->out, "where to write the report, - for stdout");
  cmd->add_option("--sample", opts->sample, "tags sampled per side");
  cmd->add_option("--percentile", opts->percentile, "volume percentile deciding correctness");
  cmd->add_option("--seed", opts->seed, "sampling seed")
      ->each([opts](const std::string&) { opts->seed_set = true; });

  cmd->callback([opts] {
    auto oracle_path = opts->oracle_path;
    auto seed = opts->seed;
    if (!opts->config_path.empty()) {
      auto cfg = tagkit::pipeline::load_config_file(opts->config_path);
      if (oracle_path.empty()) oracle_path = cfg.popularity_path;
      if (!opts->seed_set) seed = cfg.seed;
    }
    if (oracle_path.empty())
      throw tagkit::ConfigError("no popularity table: pass --oracle or configure popularity");

    std::vector<std::string> warnings;
    auto oracle = tagkit::eval::load_popularity_file(oracle_path, &warnings);
    for (const auto& warning : warnings) std::cerr << "warning: " << warning << "\n";

    auto ours = tagkit::eval::load_tag_list_file(opts->ours_path);
    auto ours_sample = tagkit::eval::sample_tags(ours, opts->sample, seed);

    tagkit::eval::MetricReport report;
    report.seed = seed;
    for (const auto& path : opts->theirs_paths) {
      auto theirs = tagkit::eval::load_tag_list_file(path);
      auto theirs_sample = tagkit::eval::sample_tags(theirs, opts->sample, seed);
      tagkit::eval::EvalOutcome outcome;
      outcome.competitor = std::filesystem::path(path).stem().string();
      outcome.ours = ours_sample;
      outcome.theirs = theirs_sample;
      outcome.precision = tagkit::eval::precision(ours_sample, theirs_sample, oracle);
      report.precision += outcome.precision;
      report.outcomes.push_back(std::move(outcome));
    }
    report.precision /= static_cast<double>(report.outcomes.size());

    std::unordered_set<std::string> correct;
    if (!opts->labels_path.empty()) {
      correct = tagkit::eval::load_labels_file(opts->labels_path);
      report.correctness = "labels";
    } else {
      correct = tagkit::eval::correct_by_volume(ours, oracle, opts->percentile);
      char buf[32];
      std::snprintf(buf, sizeof(buf), "volume>p%g", opts->percentile);
      report.correctness = buf;
    }
    report.bpm = tagkit::eval::bpm(ours, correct);

    emit(opts->out, tagkit::eval::format_report(report));
  });
}

void setup_similar(CLI::App& app) {
  auto* cmd = app.add_subcommand("similar", "nearest graph entities of a word, by cosine");
  struct Opts {
    ConfigOpts config;
    std::string word;
    std::size_t top = 5;
    double threshold = -1.0;
  };
  auto opts = std::make_shared<Opts>();
  auto config = std::shared_ptr<ConfigOpts>(opts, &opts->config);
  add_config_opts(cmd, config, /*with_top=*/false);
  cmd->add_option("--word", opts->word, "query word")->required();
  cmd->add_option("--k", opts->top, "matches to list");
  cmd->add_option("--threshold", opts->threshold, "minimum cosine similarity");

  cmd->callback([opts] {
    auto cfg = opts->config.resolve();
    auto resources = tagkit::pipeline::load_resources(cfg);
    auto matches = tagkit::emb::similar_entities(opts->word, resources.graph.entities(),
                                                 resources.table, opts->threshold, opts->top);
    if (!matches) throw tagkit::DataError("no vector for '" + opts->word + "'");
    char buf[64];
    for (const auto& match : *matches) {
      std::snprintf(buf, sizeof(buf), "%.6f", match.score);
      std::cout << match.word << "\t" << buf << "\n";
    }
    std::cerr << matches->size() << " matches for '" << opts->word << "'\n";
  });
}

void setup_bench(CLI::App& app) {
  auto* cmd = app.add_subcommand("bench", "per-stage size and latency report");
  struct Opts {
    ConfigOpts config;
    std::string in;
    std::size_t repeat = 5;
  };
  auto opts = std::make_shared<Opts>();
  auto config = std::shared_ptr<ConfigOpts>(opts, &opts->config);
  add_config_opts(cmd, config, /*with_top=*/false);
  cmd->add_option("--in", opts->in, "text to benchmark (default: built-in sample)");
  cmd->add_option("--repeat", opts->repeat, "timed runs to average");

  cmd->callback([opts] {
    if (opts->repeat == 0) throw tagkit::ConfigError("--repeat must be positive");
    auto cfg = opts->config.resolve();
    auto resources = tagkit::pipeline::load_resources(cfg);
    auto footprint = tagkit::pipeline::resource_footprint(cfg);
    std::string text = opts->in.empty() ? kSampleNote : slurp(opts->in);

    tagkit::pipeline::StageTimings mean;
    for (std::size_t i = 0; i < opts->repeat; ++i) {
      auto result = tagkit::pipeline::extract_tags(text, resources, cfg);
      mean.pos_ms += result.timings.pos_ms;
      mean.concepts_ms += result.timings.concepts_ms;
      mean.ranking_ms += result.timings.ranking_ms;
      mean.total_ms += result.timings.total_ms;
    }
    auto runs = static_cast<double>(opts->repeat);
    mean.pos_ms /= runs;
    mean.concepts_ms /= runs;
    mean.ranking_ms /= runs;
    mean.total_ms /= runs;

    char line[128];
    std::printf("%-18s %10s %10s\n", "Component", "Size (MB)", "Time (ms)");
    std::snprintf(line, sizeof(line), "%-18s %10.2f %10.2f", "POS Tagger",
                  to_mb(footprint.tagger_bytes), mean.pos_ms);
    std::printf("%s\n", line);
    std::snprintf(line, sizeof(line), "%-18s %10.2f %10.2f", "Graph CNN",
                  to_mb(footprint.graph_bytes + footprint.scorer_bytes), mean.concepts_ms);
    std::printf("%s\n", line);
    std::snprintf(line, sizeof(line), "%-18s %10s %10.2f", "Ranking", "-", mean.ranking_ms);
    std::printf("%s\n", line);
    std::snprintf(line, sizeof(line), "%-18s %10.2f %10.2f", "Proposed System",
                  to_mb(footprint.total_bytes), mean.total_ms);
    std::printf("%s\n", line);

    std::fprintf(stderr, "resources: %.2f MB of %.0f MB budget (%s)\n",
                 to_mb(footprint.total_bytes),
                 to_mb(tagkit::pipeline::kResourceBudgetBytes),
                 footprint.within_budget ? "ok" : "OVER");
    if (mean.total_ms > kLatencyBudgetMs)
      std::fprintf(stderr, "warning: end-to-end mean %.1f ms exceeds the %.0f ms budget\n",
                   mean.total_ms, kLatencyBudgetMs);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"concept-level tag extraction toolkit"};
  app.require_subcommand(1);

  setup_ingest(app);
  setup_train_kg(app);
  setup_train_pos(app);
  setup_tag(app);
  setup_eval(app);
  setup_similar(app);
  setup_bench(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);     // prints the message; --help/--version exit 0
    return code == 0 ? 0 : 1;   // fold CLI11's many usage codes into one
  } catch (const tagkit::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const tagkit::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
