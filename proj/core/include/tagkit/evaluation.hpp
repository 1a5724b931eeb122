#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace tagkit::eval {

// Search-volume table standing in for a live popularity service: how often
// each word is queried, with absent words counting as never queried.
class PopularityOracle {
 public:
  PopularityOracle() = default;
  explicit PopularityOracle(std::unordered_map<std::string, std::uint64_t> volumes)
      : volumes_(std::move(volumes)) {}

  std::uint64_t volume(const std::string& word) const;
  std::size_t size() const { return volumes_.size(); }

  // Nearest-rank percentile of the stored volumes, p in [0, 100]; an empty
  // oracle reports 0. Used as the default correctness threshold.
  std::uint64_t percentile(double p) const;

 private:
  std::unordered_map<std::string, std::uint64_t> volumes_;
};

// One sampled comparison of our tags against a competitor's.
struct EvalOutcome {
  std::string competitor;
  std::vector<std::string> ours;
  std::vector<std::string> theirs;
  double precision = 0.0;

  bool operator==(const EvalOutcome&) const = default;
};

// Aggregate metrics plus the per-comparison breakdown and the knobs needed
// to reproduce them.
struct MetricReport {
  double precision = 0.0;  // mean over outcomes
  double bpm = 0.0;
  std::uint64_t seed = 0;
  std::string correctness;  // rule that decided correct tags, e.g. "volume>p50"
  std::vector<EvalOutcome> outcomes;
};

// Text format: "word<TAB>volume" per line. A repeated word keeps the last
// volume and appends a note to `warnings` when given; malformed lines raise
// an error naming the line.
PopularityOracle load_popularity(std::istream& in, std::vector<std::string>* warnings = nullptr);
PopularityOracle load_popularity_file(const std::string& path,
                                      std::vector<std::string>* warnings = nullptr);

// One tag per line, order preserved (a ranked list). Blank lines are skipped.
std::vector<std::string> load_tag_list(std::istream& in);
std::vector<std::string> load_tag_list_file(const std::string& path);

// One known-correct tag per line, order irrelevant.
std::unordered_set<std::string> load_labels(std::istream& in);
std::unordered_set<std::string> load_labels_file(const std::string& path);

// Up to k tags drawn without replacement, deterministic per seed; fewer than
// k tags come back unshuffled in full.
std::vector<std::string> sample_tags(std::span<const std::string> tags, std::size_t k,
                                     std::uint64_t seed);

// Popularity-weighted precision: both samples are sorted by search volume,
// best first, and compared position by position; the score is the fraction
// of positions where our tag's volume strictly beats the competitor's. The
// samples must be the same nonzero length.
double precision(std::span<const std::string> ours, std::span<const std::string> theirs,
                 const PopularityOracle& oracle);

// Binary preference measure over a ranked tag list: each correct tag
// contributes 1 minus the fraction of the list that is incorrect and ranked
// above it (first occurrence counts), averaged over the correct tags. The
// correct set must be nonempty and drawn from the list.
double bpm(std::span<const std::string> ranked, const std::unordered_set<std::string>& correct);

// Default correctness rule when no label file is supplied: tags whose volume
// strictly exceeds the oracle's p-th percentile.
std::unordered_set<std::string> correct_by_volume(std::span<const std::string> tags,
                                                  const PopularityOracle& oracle,
                                                  double percentile = 50.0);

// Key/value text rendering of a report, one field per line.
std::string format_report(const MetricReport& report);

}  // namespace tagkit::eval
