#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "tagkit/errors.hpp"
#include "tagkit/evaluation.hpp"

using tagkit::ConfigError;
using tagkit::DataError;
using namespace tagkit::eval;

namespace {

PopularityOracle oracle_of(std::unordered_map<std::string, std::uint64_t> volumes) {
  return PopularityOracle(std::move(volumes));
}

std::vector<std::string> tags(std::initializer_list<const char*> names) {
  return {names.begin(), names.end()};
}

}  // namespace

TEST_CASE("popularity tables parse, deduplicate, and default to zero") {
  std::istringstream in("car\t1000\nlease\t50\n");
  auto oracle = load_popularity(in);
  CHECK(oracle.size() == 2);
  CHECK(oracle.volume("car") == 1000);
  CHECK(oracle.volume("lease") == 50);
  CHECK(oracle.volume("absent") == 0);

  // Blank lines and Windows line endings are tolerated.
  std::istringstream messy("car\t10\r\n\nlease\t5\n");
  auto tolerant = load_popularity(messy);
  CHECK(tolerant.volume("car") == 10);
  CHECK(tolerant.volume("lease") == 5);

  // The later of two entries for one word wins, with a note kept about it.
  std::vector<std::string> warnings;
  std::istringstream dup("car\t10\ncar\t20\n");
  auto last_wins = load_popularity(dup, &warnings);
  CHECK(last_wins.volume("car") == 20);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("line 2") != std::string::npos);
  CHECK(warnings[0].find("car") != std::string::npos);
  CHECK(warnings[0].find("10") != std::string::npos);

  std::istringstream dup2("car\t10\ncar\t20\n");
  CHECK(load_popularity(dup2).volume("car") == 20);  // no warning sink needed

  for (const char* bad : {"car", "car 1000", "car\t12x", "car\t-5", "\t5", "car\t"}) {
    std::istringstream stream(bad);
    CHECK_THROWS_AS(load_popularity(stream), DataError);
  }
  try {
    std::istringstream stream("ok\t1\nbroken line\n");
    load_popularity(stream);
    FAIL("expected a parse error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  auto path = std::filesystem::temp_directory_path() / "tagkit_popularity_test.tsv";
  {
    std::ofstream out(path);
    out << "alpha\t7\n";
  }
  CHECK(load_popularity_file(path.string()).volume("alpha") == 7);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_popularity_file(path.string()), DataError);
}

TEST_CASE("percentiles use nearest rank over stored volumes") {
  auto oracle = oracle_of({{"a", 1}, {"b", 2}, {"c", 3}, {"d", 4}});
  CHECK(oracle.percentile(50.0) == 2);
  CHECK(oracle.percentile(25.0) == 1);
  CHECK(oracle.percentile(75.0) == 3);
  CHECK(oracle.percentile(100.0) == 4);
  CHECK(oracle.percentile(0.0) == 1);

  auto single = oracle_of({{"a", 7}});
  CHECK(single.percentile(0.0) == 7);
  CHECK(single.percentile(50.0) == 7);
  CHECK(single.percentile(100.0) == 7);

  CHECK(PopularityOracle().percentile(50.0) == 0);

  CHECK_THROWS_AS(oracle.percentile(-0.5), ConfigError);
  CHECK_THROWS_AS(oracle.percentile(100.5), ConfigError);
}

TEST_CASE("precision counts strict volume wins position by position") {
  auto oracle = oracle_of({{"a", 10}, {"b", 8}, {"c", 6}, {"d", 4}, {"e", 2},
                           {"f", 9}, {"g", 9}, {"h", 5}, {"i", 5}, {"j", 1}});

  // Sorted volumes 10,8,6,4,2 vs 9,9,5,5,1: wins at positions 1, 3, and 5.
  auto ours = tags({"a", "b", "c", "d", "e"});
  auto theirs = tags({"f", "g", "h", "i", "j"});
  CHECK(precision(ours, theirs, oracle) == 0.6);

  // Input order is irrelevant; both sides are sorted before comparing.
  CHECK(precision(tags({"e", "c", "a", "d", "b"}), theirs, oracle) == 0.6);

  // Identical samples never win strictly; unknown competitors always lose.
  CHECK(precision(ours, ours, oracle) == 0.0);
  CHECK(precision(ours, tags({"z1", "z2", "z3", "z4", "z5"}), oracle) == 1.0);

  CHECK_THROWS_AS(precision(ours, tags({"f", "g"}), oracle), ConfigError);
  CHECK_THROWS_AS(precision({}, {}, oracle), ConfigError);

  // Ties claim neither side, so the two directions never sum above one.
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::unordered_map<std::string, std::uint64_t> volumes;
    std::vector<std::string> left, right;
    for (int i = 0; i < 5; ++i) {
      left.push_back("l" + std::to_string(i));
      right.push_back("r" + std::to_string(i));
      volumes[left.back()] = rng() % 5;
      volumes[right.back()] = rng() % 5;
    }
    auto table = oracle_of(volumes);
    double p = precision(left, right, table);
    double q = precision(right, left, table);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(p + q <= 1.0 + 1e-12);
  }
}

TEST_CASE("bpm averages how clean the ranking is above each correct tag") {
  auto all = tags({"a", "b", "c", "d", "e"});
  CHECK(bpm(all, {"a", "b", "c", "d", "e"}) == 1.0);

  // One correct tag with two incorrect ranked above it in a list of five.
  CHECK(bpm(tags({"x1", "x2", "c", "x3", "x4"}), {"c"}) == 0.6);

  // Correct tags first and last with three incorrect between.
  CHECK(bpm(tags({"c1", "x1", "x2", "x3", "c2"}), {"c1", "c2"}) ==
        doctest::Approx(0.7).epsilon(1e-15));

  // Perfect score exactly when nothing incorrect outranks anything correct.
  CHECK(bpm(tags({"c1", "c2", "x1", "x2"}), {"c1", "c2"}) == 1.0);
  CHECK(bpm(tags({"x1", "c1"}), {"c1"}) < 1.0);

  // Shuffling tags below the lowest correct tag changes nothing.
  std::vector<std::string> below{"x2", "x3", "x4"};
  std::sort(below.begin(), below.end());
  do {
    std::vector<std::string> ranked{"x1", "c"};
    ranked.insert(ranked.end(), below.begin(), below.end());
    CHECK(bpm(ranked, {"c"}) == doctest::Approx(0.8).epsilon(1e-15));
  } while (std::next_permutation(below.begin(), below.end()));

  // A repeated correct tag is credited at its best rank only.
  CHECK(bpm(tags({"x1", "c", "x2", "c", "x3"}), {"c"}) ==
        doctest::Approx(0.8).epsilon(1e-15));

  CHECK_THROWS_AS(bpm(all, {}), ConfigError);
  CHECK_THROWS_AS(bpm(all, {"not-listed"}), ConfigError);

  // Every correct tag contributes something, so scores stay in (0, 1].
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> ranked;
    for (int i = 0; i < 8; ++i) ranked.push_back("t" + std::to_string(i));
    for (std::size_t i = ranked.size() - 1; i > 0; --i)
      std::swap(ranked[i], ranked[rng() % (i + 1)]);
    std::unordered_set<std::string> correct;
    for (const auto& tag : ranked)
      if (rng() & 1) correct.insert(tag);
    if (correct.empty()) correct.insert(ranked[rng() % ranked.size()]);
    double score = bpm(ranked, correct);
    CHECK(score > 0.0);
    CHECK(score <= 1.0);
  }
}

TEST_CASE("volume thresholds decide correctness when labels are missing") {
  auto oracle = oracle_of({{"a", 10}, {"b", 20}, {"c", 30}, {"d", 40}});
  auto sample = tags({"a", "b", "c", "d", "zz"});

  auto median = correct_by_volume(sample, oracle);
  CHECK(median == std::unordered_set<std::string>{"c", "d"});  // b sits at the median, excluded

  CHECK(correct_by_volume(sample, oracle, 75.0) == std::unordered_set<std::string>{"d"});
  CHECK(correct_by_volume(sample, oracle, 0.0) ==
        std::unordered_set<std::string>{"b", "c", "d"});
  CHECK_THROWS_AS(correct_by_volume(sample, oracle, 101.0), ConfigError);

  std::istringstream labels_in("c\r\n\nd\n");
  CHECK(load_labels(labels_in) == std::unordered_set<std::string>{"c", "d"});

  std::istringstream list_in("vehicle\ncontract\n\npayment\n");
  CHECK(load_tag_list(list_in) == std::vector<std::string>{"vehicle", "contract", "payment"});
}

TEST_CASE("tag sampling is deterministic and without replacement") {
  std::vector<std::string> pool;
  for (int i = 0; i < 10; ++i) pool.push_back("t" + std::to_string(i));

  auto first = sample_tags(pool, 5, 99);
  auto again = sample_tags(pool, 5, 99);
  CHECK(first == again);
  REQUIRE(first.size() == 5);

  std::unordered_set<std::string> seen(first.begin(), first.end());
  CHECK(seen.size() == 5);
  for (const auto& tag : first)
    CHECK(std::find(pool.begin(), pool.end(), tag) != pool.end());

  CHECK(sample_tags(pool, 5, 100) != first);

  // Asking for at least the whole pool returns it untouched.
  CHECK(sample_tags(pool, 10, 99) == pool);
  CHECK(sample_tags(pool, 15, 99) == pool);
  CHECK(sample_tags(pool, 0, 99).empty());
}

TEST_CASE("reports render as key/value lines") {
  MetricReport report;
  report.precision = 0.6;
  report.bpm = 0.7;
  report.seed = 42;
  report.correctness = "volume>p50";
  report.outcomes.push_back({"textrank", {"alpha", "beta"}, {"gamma", "delta"}, 0.5});

  CHECK(format_report(report) ==
        "seed = 42\n"
        "correctness = volume>p50\n"
        "precision = 0.600000\n"
        "bpm = 0.700000\n"
        "samples = 1\n"
        "sample.1.competitor = textrank\n"
        "sample.1.ours = alpha beta\n"
        "sample.1.theirs = gamma delta\n"
        "sample.1.precision = 0.500000\n");

  MetricReport empty;
  empty.correctness = "labels";
  CHECK(format_report(empty) ==
        "seed = 0\n"
        "correctness = labels\n"
        "precision = 0.000000\n"
        "bpm = 0.000000\n"
        "samples = 0\n");
}
