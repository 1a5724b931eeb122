#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tagkit::pos {

// Coarse word classes the pipeline routes on. The tagger itself works over
// the fine-grained (Penn-style) tagset of its training corpus and maps down.
enum class WordClass : std::uint8_t { Noun, ProperNoun, Verb, Other };

WordClass coarse_class(std::string_view penn_tag);

struct SentenceSpan {
  std::size_t begin = 0;  // first token index
  std::size_t end = 0;    // one past the last token index

  bool operator==(const SentenceSpan&) const = default;
};

struct TokenizedText {
  std::vector<std::string> tokens;
  std::vector<SentenceSpan> sentences;
};

struct TaggedToken {
  std::string surface;
  std::string penn;  // fine-grained label, e.g. "NN", "VBD"
  WordClass tag = WordClass::Other;
  std::string lemma;  // verbs lemmatized, everything else lowercased
  std::int32_t sentence_index = 0;
  std::int32_t token_index = 0;
};

// A content word (noun or lemmatized verb) with every token position at
// which its lemma occurs.
struct ContentWord {
  std::string lemma;
  std::vector<std::size_t> positions;
};

// Everything downstream stages need to know about a tagged text: the proper
// nouns (verbatim tags), the content words feeding concept lookup, sentence
// structure for co-occurrence counting, and term frequencies over all tokens
// keyed the same way content lemmas are.
struct EntitySets {
  std::vector<std::string> proper_nouns;   // unique, first-appearance order
  std::vector<ContentWord> content_words;  // unique lemmas, first-appearance order
  std::vector<SentenceSpan> sentences;
  std::unordered_map<std::string, std::size_t> term_frequencies;
  std::size_t total_tokens = 0;
  std::vector<bool> is_word;                // false for punctuation tokens
  std::vector<std::int32_t> sentence_of;    // token index -> sentence index
};

class TaggerModel {
 public:
  TaggerModel() = default;
  TaggerModel(std::vector<std::string> tagset, std::vector<double> transitions,
              std::map<std::string, std::vector<double>> feature_weights);

  const std::vector<std::string>& tagset() const { return tagset_; }
  // row-major tagset() x tagset(): transition score from tag r to tag c
  const std::vector<double>& transitions() const { return transitions_; }
  const std::map<std::string, std::vector<double>>& feature_weights() const {
    return feature_weights_;
  }

  // summed feature weights for one token; `features` are the active keys
  std::vector<double> emission_scores(const std::vector<std::string>& features) const;

  bool operator==(const TaggerModel&) const = default;

 private:
  std::vector<std::string> tagset_;
  std::vector<double> transitions_;
  std::map<std::string, std::vector<double>> feature_weights_;
};

// Whitespace and punctuation-boundary tokenization. Punctuation marks are
// their own tokens; internal hyphens and apostrophes keep a word together
// ("credit-card" is one token). Sentences end at . ! ? followed by space or
// end of text; text without a terminator is one sentence.
TokenizedText tokenize_and_split(std::string_view text);

// Rule-based verb lemmatization: an irregular-verb table, then suffix
// stripping (-ies/-ied, -es, -s, -ing, -ed) with doubled-consonant repair
// and silent-e restoration. Idempotent.
std::string lemmatize_verb(std::string_view word);

// Best path through emissions[token][tag] + transitions[prev][tag]
// (row-major, tags x tags). Ties prefer the lower tag index.
std::vector<std::size_t> viterbi_decode(const std::vector<std::vector<double>>& emissions,
                                        std::size_t num_tags,
                                        const std::vector<double>& transitions);

// Averaged structured perceptron over two-column CoNLL input ("token tag",
// blank line between sentences; extra columns ignored). Deterministic for a
// fixed corpus, epoch count, and shuffle seed.
TaggerModel train_tagger(std::istream& corpus, std::size_t epochs, std::uint64_t seed);
TaggerModel train_tagger_file(const std::string& path, std::size_t epochs, std::uint64_t seed);

std::vector<TaggedToken> tag_tokens(const TaggerModel& m, const TokenizedText& text);
std::vector<TaggedToken> tag_text(const TaggerModel& m, std::string_view text);

EntitySets extract_entities(const std::vector<TaggedToken>& tokens);

// Versioned binary serialization; round-trips bit-exactly.
void save_tagger(const TaggerModel& m, const std::string& path);
TaggerModel load_tagger(const std::string& path);

}  // namespace tagkit::pos
