#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <random>
#include <string>
#include <vector>

#include "tagkit/errors.hpp"
#include "tagkit/pos_tagger.hpp"
#include "tagkit/tag_ranking.hpp"

using tagkit::ConfigError;
using namespace tagkit::rank;

namespace {

const std::string kFixtures = TAGKIT_TEST_FIXTURES;

const char* kNote =
    "Typically, the driver is responsible for all damage to the car during the tenure of "
    "the lease, even if they are not at fault. Your own insurance may apply to pay for the "
    "damage. Also, the credit-card you used to pay for the lease may have supplemental "
    "insurance for damage to the car.";

const tagkit::pos::EntitySets& note_sets() {
  static tagkit::pos::EntitySets sets = [] {
    auto model = tagkit::pos::train_tagger_file(kFixtures + "/pos_corpus.conll", 5, 1);
    return tagkit::pos::extract_entities(tagkit::pos::tag_text(model, kNote));
  }();
  return sets;
}

// The five concept tags the note produces, in extraction order.
std::vector<TagSource> note_tags() {
  return {{"responsibility", "fault"},
          {"contract", "lease"},
          {"payment", "pay"},
          {"vehicle", "car"},
          {"change", "damage"}};
}

// Hand-built two-word text: "machine pay" as one sentence.
tagkit::pos::EntitySets adjacent_pair_sets() {
  tagkit::pos::EntitySets sets;
  sets.content_words = {{"machine", {0}}, {"pay", {1}}};
  sets.sentences = {{0, 2}};
  sets.term_frequencies = {{"machine", 1}, {"pay", 1}};
  sets.total_tokens = 2;
  sets.is_word = {true, true};
  sets.sentence_of = {0, 0};
  return sets;
}

// Two one-word sentences, so the words never co-occur.
tagkit::pos::EntitySets disjoint_pair_sets() {
  tagkit::pos::EntitySets sets;
  sets.content_words = {{"machine", {0}}, {"pay", {1}}};
  sets.sentences = {{0, 1}, {1, 2}};
  sets.term_frequencies = {{"machine", 1}, {"pay", 1}};
  sets.total_tokens = 2;
  sets.is_word = {true, true};
  sets.sentence_of = {0, 1};
  return sets;
}

}  // namespace

TEST_CASE("cooccurrence counts sentences sharing both lemmas") {
  const auto& sets = note_sets();
  CHECK(cooccurrence("lease", "car", sets) == 2);   // sentences 1 and 3
  CHECK(cooccurrence("fault", "pay", sets) == 0);   // never share a sentence
  CHECK(cooccurrence("insurance", "tenure", sets) == 0);
  CHECK(cooccurrence("damage", "car", sets) == 2);
  CHECK(cooccurrence("damage", "pay", sets) == 2);
  CHECK(cooccurrence("lease", "fault", sets) == 1);

  SUBCASE("words without positions never co-occur") {
    CHECK(cooccurrence("the", "car", sets) == 0);  // determiners carry no positions
    CHECK(cooccurrence("ghost", "car", sets) == 0);
  }
}

TEST_CASE("alpha averages nearest-pair word gaps plus one") {
  const auto& sets = note_sets();
  // lease..car: gap 5 in the first sentence, 8 in the last.
  CHECK(alpha("lease", "car", sets) == 7.5);
  // damage..car: gap 2 in both shared sentences.
  CHECK(alpha("damage", "car", sets) == 3.0);
  // lease..fault: the comma between them does not count as a word.
  CHECK(alpha("lease", "fault", sets) == 7.0);
  CHECK(alpha("car", "fault", sets) == 13.0);

  SUBCASE("adjacent words have gap zero") {
    CHECK(alpha("machine", "pay", adjacent_pair_sets()) == 1.0);
  }

  SUBCASE("pairs that never co-occur default to one") {
    CHECK(alpha("fault", "pay", sets) == 1.0);
    CHECK(alpha("machine", "pay", disjoint_pair_sets()) == 1.0);
    CHECK(alpha("credit-card", "you", sets) == 1.0);  // pronouns carry no positions
  }
}

TEST_CASE("ranking_factor arithmetic") {
  CHECK(ranking_factor(1, 1, 1, 1.0) == 1.0);
  CHECK(ranking_factor(0, 5, 5, 9.0) == 0.0);
  CHECK(ranking_factor(2, 2, 2, 7.5) == doctest::Approx(1.0 / 15.0).epsilon(1e-12));

  SUBCASE("more co-occurrence helps, more frequency or distance hurts") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t c = 1 + rng() % 5, fi = 1 + rng() % 6, fj = 1 + rng() % 6;
      const double a = 1.0 + static_cast<double>(rng() % 100) / 10.0;
      const double base = ranking_factor(c, fi, fj, a);
      CHECK(ranking_factor(c + 1, fi, fj, a) >= base);
      CHECK(ranking_factor(c, fi + 1, fj, a) <= base);
      CHECK(ranking_factor(c, fi, fj + 1, a) <= base);
      CHECK(ranking_factor(c, fi, fj, a + 0.5) <= base);
    }
  }
}

TEST_CASE("pair_stats assembles the full breakdown") {
  const auto& sets = note_sets();
  const auto stats = pair_stats({"contract", "lease"}, {"vehicle", "car"}, sets);
  CHECK(stats.cooccurrence == 2);
  CHECK(stats.freq_i == 2);
  CHECK(stats.freq_j == 2);
  CHECK(stats.alpha == 7.5);
  CHECK(stats.rf == doctest::Approx(1.0 / 15.0).epsilon(1e-12));

  SUBCASE("the upper-end pair scores exactly one") {
    const auto top = pair_stats({"tool", "machine"}, {"payment", "pay"}, adjacent_pair_sets());
    CHECK(top.rf == 1.0);
  }
}

TEST_CASE("ranking_matrix is symmetric with a unit diagonal") {
  const auto& sets = note_sets();
  const auto tags = note_tags();
  const RankingMatrix m = ranking_matrix(tags, sets);

  REQUIRE(m.tags.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(m.at(i, i) == 1.0);
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(m.at(i, j) == m.at(j, i));
      if (i != j) CHECK(m.at(i, j) >= 0.0);
    }
  }

  // Input order: responsibility, contract, payment, vehicle, change.
  CHECK(m.at(0, 2) == 0.0);  // responsibility/payment never share a sentence
  CHECK(m.at(1, 3) == doctest::Approx(1.0 / 15.0).epsilon(1e-12));  // contract/vehicle
  CHECK(m.at(1, 0) == doctest::Approx(1.0 / 14.0).epsilon(1e-12));  // contract/responsibility
  CHECK(m.at(1, 2) == doctest::Approx(1.0 / 12.0).epsilon(1e-12));  // contract/payment
  CHECK(m.at(1, 4) == doctest::Approx(2.0 / 45.0).epsilon(1e-12));  // contract/change
  CHECK(m.at(3, 4) == doctest::Approx(1.0 / 9.0).epsilon(1e-12));   // vehicle/change
  CHECK(m.at(0, 4) == doctest::Approx(1.0 / 48.0).epsilon(1e-12));  // responsibility/change
  CHECK(m.at(2, 4) == doctest::Approx(1.0 / 18.0).epsilon(1e-12));  // payment/change

  SUBCASE("a single tag gives the 1x1 unit matrix") {
    const auto one = ranking_matrix(std::vector<TagSource>{{"vehicle", "car"}}, sets);
    CHECK(one.values == std::vector<double>{1.0});
  }

  SUBCASE("no tags is an error") {
    CHECK_THROWS_AS((void)ranking_matrix(std::vector<TagSource>{}, sets), ConfigError);
  }
}

TEST_CASE("rank_tags reproduces the note's concept order") {
  const auto& sets = note_sets();
  const auto ranked = rank_tags(note_tags(), sets, 10);

  REQUIRE(ranked.size() == 5);
  CHECK(ranked[0].tag == "contract");
  CHECK(ranked[1].tag == "vehicle");
  CHECK(ranked[2].tag == "change");
  CHECK(ranked[3].tag == "payment");
  CHECK(ranked[4].tag == "responsibility");
  CHECK(ranked[0].source_word == "lease");
  CHECK(ranked[1].source_word == "car");
  CHECK(ranked[2].source_word == "damage");
  CHECK(ranked[3].source_word == "pay");
  CHECK(ranked[4].source_word == "fault");
  for (std::size_t i = 0; i < 5; ++i) CHECK(ranked[i].rank == i + 1);

  CHECK(ranked[0].rf_total ==
        doctest::Approx(1.0 / 14 + 1.0 / 12 + 1.0 / 15 + 2.0 / 45).epsilon(1e-12));
  CHECK(ranked[1].rf_total ==
        doctest::Approx(1.0 / 26 + 1.0 / 15 + 1.0 / 48 + 1.0 / 9).epsilon(1e-12));
  CHECK(ranked[2].rf_total ==
        doctest::Approx(1.0 / 48 + 2.0 / 45 + 1.0 / 18 + 1.0 / 9).epsilon(1e-12));
  CHECK(ranked[3].rf_total == doctest::Approx(1.0 / 12 + 1.0 / 48 + 1.0 / 18).epsilon(1e-12));
  CHECK(ranked[4].rf_total == doctest::Approx(1.0 / 14 + 1.0 / 26 + 1.0 / 48).epsilon(1e-12));
  for (std::size_t i = 1; i < 5; ++i) CHECK(ranked[i - 1].rf_total >= ranked[i].rf_total);

  SUBCASE("n truncates the list") {
    const auto top3 = rank_tags(note_tags(), sets, 3);
    REQUIRE(top3.size() == 3);
    CHECK(top3[2].tag == "change");
    CHECK(top3[2].rank == 3);
  }

  SUBCASE("all-zero pairs fall back to alphabetical order") {
    const auto sets2 = disjoint_pair_sets();
    const auto ranked2 =
        rank_tags(std::vector<TagSource>{{"zebra", "machine"}, {"apple", "pay"}}, sets2, 10);
    REQUIRE(ranked2.size() == 2);
    CHECK(ranked2[0].tag == "apple");
    CHECK(ranked2[1].tag == "zebra");
    CHECK(ranked2[0].rf_total == 0.0);
  }

  SUBCASE("n must be positive") {
    CHECK_THROWS_AS((void)rank_tags(note_tags(), sets, 0), ConfigError);
  }
}

TEST_CASE("a known affinity matrix ranks by row sums the same way") {
  // Reference pairwise values for the same note, rows and columns ordered
  // change, vehicle, contract, responsibility, payment. The absolute cells
  // differ from ours, but the row-sum ordering is the contract.
  const std::array<std::string, 5> labels{"change", "vehicle", "contract", "responsibility",
                                          "payment"};
  const double cells[5][5] = {
      {1.0, 0.11, 0.04, 0.02, 0.06},
      {0.11, 1.0, 0.13, 0.04, 0.02},
      {0.04, 0.13, 1.0, 0.07, 0.08},
      {0.02, 0.04, 0.07, 1.0, 0.0},
      {0.06, 0.02, 0.08, 0.0, 1.0},
  };

  std::vector<std::pair<std::string, double>> sums;
  for (std::size_t i = 0; i < 5; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < 5; ++j)
      if (j != i) total += cells[i][j];
    sums.push_back({labels[i], total});
  }
  CHECK(sums[0].second == doctest::Approx(0.23));
  CHECK(sums[1].second == doctest::Approx(0.30));
  CHECK(sums[2].second == doctest::Approx(0.32));
  CHECK(sums[3].second == doctest::Approx(0.13));
  CHECK(sums[4].second == doctest::Approx(0.16));

  std::sort(sums.begin(), sums.end(),
            [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::array<std::string, 5> expected{"contract", "vehicle", "change", "payment",
                                            "responsibility"};
  for (std::size_t i = 0; i < 5; ++i) CHECK(sums[i].first == expected[i]);
}

TEST_CASE("format_matrix renders an aligned table") {
  const auto& sets = note_sets();
  const auto m = ranking_matrix(note_tags(), sets);
  const std::string text = format_matrix(m);

  CHECK(text.find("responsibility") != std::string::npos);
  CHECK(text.find("1.0000") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);  // header plus five rows
  const std::size_t first_line = text.find('\n');
  const std::size_t second_line = text.find('\n', first_line + 1);
  CHECK(second_line - first_line == first_line + 1);  // rows line up with the header
}
