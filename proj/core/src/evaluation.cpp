#include "tagkit/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>

#include "tagkit/errors.hpp"

namespace tagkit::eval {

namespace {

void chomp(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& part : parts) {
    if (!out.empty()) out += ' ';
    out += part;
  }
  return out;
}

// Volumes of a tag sample, largest first, ready for one-on-one comparison.
std::vector<std::uint64_t> sorted_volumes(std::span<const std::string> tags,
                                          const PopularityOracle& oracle) {
  std::vector<std::uint64_t> volumes;
  volumes.reserve(tags.size());
  for (const auto& tag : tags) volumes.push_back(oracle.volume(tag));
  std::sort(volumes.begin(), volumes.end(), std::greater<>());
  return volumes;
}

}  // namespace

std::uint64_t PopularityOracle::volume(const std::string& word) const {
  auto it = volumes_.find(word);
  return it == volumes_.end() ? 0 : it->second;
}

std::uint64_t PopularityOracle::percentile(double p) const {
  if (p < 0.0 || p > 100.0)
    throw ConfigError("percentile must lie in [0, 100], got " + format_double(p));
  if (volumes_.empty()) return 0;

  std::vector<std::uint64_t> sorted;
  sorted.reserve(volumes_.size());
  for (const auto& [word, volume] : volumes_) sorted.push_back(volume);
  std::sort(sorted.begin(), sorted.end());

  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(sorted.size())));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

PopularityOracle load_popularity(std::istream& in, std::vector<std::string>* warnings) {
  std::unordered_map<std::string, std::uint64_t> volumes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    chomp(line);
    if (line.empty()) continue;

    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw DataError("popularity line " + std::to_string(lineno) + ": expected word<TAB>volume");
    std::string word = line.substr(0, tab);

    std::uint64_t volume = 0;
    const char* first = line.data() + tab + 1;
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, volume);
    if (ec != std::errc() || ptr != last)
      throw DataError("popularity line " + std::to_string(lineno) +
                      ": bad volume '" + std::string(first, last) + "'");

    auto [it, fresh] = volumes.try_emplace(word, volume);
    if (!fresh) {
      if (warnings != nullptr)
        warnings->push_back("popularity line " + std::to_string(lineno) + ": duplicate entry for '" +
                            word + "' replaces volume " + std::to_string(it->second));
      it->second = volume;
    }
  }
  return PopularityOracle(std::move(volumes));
}

PopularityOracle load_popularity_file(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open popularity file: " + path);
  return load_popularity(in, warnings);
}

std::vector<std::string> load_tag_list(std::istream& in) {
  std::vector<std::string> tags;
  std::string line;
  while (std::getline(in, line)) {
    chomp(line);
    if (!line.empty()) tags.push_back(line);
  }
  return tags;
}

std::vector<std::string> load_tag_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open tag list: " + path);
  return load_tag_list(in);
}

std::unordered_set<std::string> load_labels(std::istream& in) {
  auto tags = load_tag_list(in);
  return {tags.begin(), tags.end()};
}

std::unordered_set<std::string> load_labels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file: " + path);
  return load_labels(in);
}

std::vector<std::string> sample_tags(std::span<const std::string> tags, std::size_t k,
                                     std::uint64_t seed) {
  if (k >= tags.size()) return {tags.begin(), tags.end()};

  std::vector<std::size_t> index(tags.size());
  for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;

  // Partial Fisher-Yates with the modulo draw used everywhere else, so the
  // same seed picks the same tags on every platform.
  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng() % (index.size() - i));
    std::swap(index[i], index[j]);
    out.push_back(tags[index[i]]);
  }
  return out;
}

double precision(std::span<const std::string> ours, std::span<const std::string> theirs,
                 const PopularityOracle& oracle) {
  if (ours.size() != theirs.size())
    throw ConfigError("tag samples differ in length: " + std::to_string(ours.size()) + " vs " +
                      std::to_string(theirs.size()));
  if (ours.empty()) throw ConfigError("tag samples are empty");

  auto our_volumes = sorted_volumes(ours, oracle);
  auto their_volumes = sorted_volumes(theirs, oracle);
  std::size_t wins = 0;
  for (std::size_t i = 0; i < our_volumes.size(); ++i)
    if (our_volumes[i] > their_volumes[i]) ++wins;
  return static_cast<double>(wins) / static_cast<double>(our_volumes.size());
}

double bpm(std::span<const std::string> ranked, const std::unordered_set<std::string>& correct) {
  if (correct.empty()) throw ConfigError("no correct tags to score against");
  std::unordered_set<std::string> listed(ranked.begin(), ranked.end());
  for (const auto& tag : correct)
    if (listed.find(tag) == listed.end())
      throw ConfigError("correct tag '" + tag + "' is not in the ranked list");

  const auto list_size = static_cast<double>(ranked.size());
  std::unordered_set<std::string> credited;
  std::size_t incorrect_above = 0;
  double sum = 0.0;
  for (const auto& tag : ranked) {
    if (correct.find(tag) != correct.end()) {
      if (credited.insert(tag).second)
        sum += 1.0 - static_cast<double>(incorrect_above) / list_size;
    } else {
      ++incorrect_above;
    }
  }
  return sum / static_cast<double>(correct.size());
}

std::unordered_set<std::string> correct_by_volume(std::span<const std::string> tags,
                                                  const PopularityOracle& oracle,
                                                  double percentile) {
  auto threshold = oracle.percentile(percentile);
  std::unordered_set<std::string> correct;
  for (const auto& tag : tags)
    if (oracle.volume(tag) > threshold) correct.insert(tag);
  return correct;
}

std::string format_report(const MetricReport& report) {
  std::ostringstream out;
  out << "seed = " << report.seed << '\n';
  out << "correctness = " << report.correctness << '\n';
  out << "precision = " << format_double(report.precision) << '\n';
  out << "bpm = " << format_double(report.bpm) << '\n';
  out << "samples = " << report.outcomes.size() << '\n';
  for (std::size_t i = 0; i < report.outcomes.size(); ++i) {
    const auto& outcome = report.outcomes[i];
    const std::string prefix = "sample." + std::to_string(i + 1) + ".";
    out << prefix << "competitor = " << outcome.competitor << '\n';
    out << prefix << "ours = " << join(outcome.ours) << '\n';
    out << prefix << "theirs = " << join(outcome.theirs) << '\n';
    out << prefix << "precision = " << format_double(outcome.precision) << '\n';
  }
  return out.str();
}

}  // namespace tagkit::eval
