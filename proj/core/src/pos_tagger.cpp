#include "tagkit/pos_tagger.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "tagkit/errors.hpp"

namespace tagkit::pos {

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// base forms for irregular verbs, plus identity entries for base forms the
// suffix rules would otherwise mangle (bring, need, ...)
const std::unordered_map<std::string_view, std::string_view>& irregular_verbs() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"am", "be"},         {"is", "be"},         {"are", "be"},       {"was", "be"},
      {"were", "be"},       {"been", "be"},       {"being", "be"},     {"has", "have"},
      {"had", "have"},      {"having", "have"},   {"does", "do"},      {"did", "do"},
      {"done", "do"},       {"doing", "do"},      {"goes", "go"},      {"went", "go"},
      {"gone", "go"},       {"going", "go"},      {"said", "say"},     {"caught", "catch"},
      {"paid", "pay"},      {"made", "make"},     {"making", "make"},  {"took", "take"},
      {"taken", "take"},    {"taking", "take"},   {"got", "get"},      {"gotten", "get"},
      {"getting", "get"},   {"gave", "give"},     {"given", "give"},   {"giving", "give"},
      {"came", "come"},     {"coming", "come"},   {"saw", "see"},      {"seen", "see"},
      {"seeing", "see"},    {"knew", "know"},     {"known", "know"},   {"thought", "think"},
      {"found", "find"},    {"told", "tell"},     {"became", "become"},{"becoming", "become"},
      {"showed", "show"},   {"shown", "show"},    {"left", "leave"},   {"leaving", "leave"},
      {"felt", "feel"},     {"brought", "bring"}, {"began", "begin"},  {"begun", "begin"},
      {"beginning", "begin"},{"kept", "keep"},    {"held", "hold"},    {"wrote", "write"},
      {"written", "write"}, {"writing", "write"}, {"stood", "stand"},  {"heard", "hear"},
      {"meant", "mean"},    {"met", "meet"},      {"meeting", "meet"}, {"ran", "run"},
      {"running", "run"},   {"bought", "buy"},    {"spoke", "speak"},  {"spoken", "speak"},
      {"read", "read"},     {"spent", "spend"},   {"grew", "grow"},    {"grown", "grow"},
      {"won", "win"},       {"winning", "win"},   {"taught", "teach"}, {"sat", "sit"},
      {"sitting", "sit"},   {"sent", "send"},     {"built", "build"},  {"fell", "fall"},
      {"fallen", "fall"},   {"rose", "rise"},     {"risen", "rise"},   {"rising", "rise"},
      {"broke", "break"},   {"broken", "break"},  {"breaking", "break"},
      {"changed", "change"},{"changing", "change"},
      {"drove", "drive"},   {"driven", "drive"},  {"driving", "drive"},{"drew", "draw"},
      {"drawn", "draw"},    {"chose", "choose"},  {"chosen", "choose"},{"choosing", "choose"},
      {"wore", "wear"},     {"worn", "wear"},     {"sold", "sell"},    {"ate", "eat"},
      {"eaten", "eat"},     {"lost", "lose"},     {"losing", "lose"},  {"led", "lead"},
      {"understood", "understand"},               {"sang", "sing"},    {"sung", "sing"},
      {"rang", "ring"},     {"rung", "ring"},     {"swung", "swing"},  {"sprang", "spring"},
      {"sprung", "spring"}, {"clung", "cling"},   {"stung", "sting"},  {"fed", "feed"},
      {"bled", "bleed"},    {"bred", "breed"},    {"let", "let"},      {"set", "set"},
      {"put", "put"},       {"cut", "cut"},       {"bring", "bring"},  {"sing", "sing"},
      {"ring", "ring"},     {"swing", "swing"},   {"spring", "spring"},{"cling", "cling"},
      {"sting", "sting"},   {"need", "need"},     {"feed", "feed"},    {"speed", "speed"},
      {"bleed", "bleed"},   {"breed", "breed"},   {"exceed", "exceed"},{"succeed", "succeed"},
      {"proceed", "proceed"},{"shed", "shed"},    {"wed", "wed"},      {"embed", "embed"},
  };
  return table;
}

// true when the stem's final syllable looks like it lost a silent e:
// exactly one vowel group, ending vowel + consonant (not w/x/y)
bool wants_silent_e(std::string_view stem) {
  if (stem.size() < 2) return false;
  char last = stem.back();
  char before = stem[stem.size() - 2];
  if (is_vowel(last) || last == 'w' || last == 'x' || last == 'y') return false;
  if (!is_vowel(before)) return false;
  std::size_t vowel_groups = 0;
  bool in_group = false;
  for (char c : stem) {
    if (is_vowel(c)) {
      if (!in_group) ++vowel_groups;
      in_group = true;
    } else {
      in_group = false;
    }
  }
  return vowel_groups == 1;
}

std::string repair_stem(std::string stem) {
  if (stem.size() >= 2 && stem.back() == stem[stem.size() - 2] && !is_vowel(stem.back()) &&
      stem.back() != 'l' && stem.back() != 's' && stem.back() != 'z') {
    stem.pop_back();  // running -> run, stopped -> stop
    return stem;
  }
  if (wants_silent_e(stem)) stem += 'e';  // used -> use, liked -> like
  return stem;
}

std::string shape_of(std::string_view token) {
  std::string pattern;
  for (char c : token) {
    char k;
    if (std::isupper(static_cast<unsigned char>(c))) k = 'X';
    else if (std::islower(static_cast<unsigned char>(c))) k = 'x';
    else if (std::isdigit(static_cast<unsigned char>(c))) k = 'd';
    else k = 'p';
    if (pattern.empty() || pattern.back() != k) pattern += k;
  }
  return pattern;
}

// active feature keys for token i of a sentence
std::vector<std::string> feature_keys(const std::vector<std::string>& tokens, std::size_t i) {
  const std::string& surface = tokens[i];
  std::string lower = to_lower(surface);
  std::vector<std::string> feats;
  feats.reserve(9);
  feats.emplace_back("bias");
  feats.push_back("w=" + surface);
  feats.push_back("l=" + lower);
  for (std::size_t k = 1; k <= 3; ++k) {
    if (lower.size() >= k) feats.push_back("s" + std::to_string(k) + "=" + lower.substr(lower.size() - k));
  }
  feats.push_back("shape=" + shape_of(surface));
  feats.push_back("p=" + (i == 0 ? std::string("<s>") : to_lower(tokens[i - 1])));
  feats.push_back("n=" + (i + 1 == tokens.size() ? std::string("</s>") : to_lower(tokens[i + 1])));
  return feats;
}

struct CorpusSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
};

std::vector<CorpusSentence> parse_conll(std::istream& in) {
  std::vector<CorpusSentence> sentences;
  CorpusSentence current;
  std::string line;
  std::size_t lineno = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) {
      sentences.push_back(std::move(current));
      current = {};
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string token, tag;
    if (!(fields >> token)) {
      flush();
      continue;
    }
    if (token == "-DOCSTART-") continue;
    if (!(fields >> tag)) {
      std::ostringstream msg;
      msg << "corpus line " << lineno << " lacks a tag";
      throw DataError(msg.str());
    }
    current.tokens.push_back(std::move(token));
    current.tags.push_back(std::move(tag));
  }
  if (in.bad()) throw DataError("read failure on corpus stream");
  flush();
  if (sentences.empty()) throw DataError("empty training corpus");
  return sentences;
}

// lazily-averaged perceptron weights for one feature (or transition cell)
struct Averaged {
  std::vector<double> w;
  std::vector<double> total;
  std::vector<std::uint64_t> stamp;

  explicit Averaged(std::size_t n) : w(n, 0.0), total(n, 0.0), stamp(n, 0) {}

  void bump(std::size_t idx, double delta, std::uint64_t step) {
    total[idx] += w[idx] * static_cast<double>(step - stamp[idx]);
    stamp[idx] = step;
    w[idx] += delta;
  }

  double average(std::size_t idx, std::uint64_t final_step) const {
    double t = total[idx] + w[idx] * static_cast<double>(final_step + 1 - stamp[idx]);
    return t / static_cast<double>(final_step);
  }
};

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_str(std::ostream& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in) {
  char b[4];
  if (!in.read(b, 4)) throw DataError("truncated tagger model");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  char b[8];
  if (!in.read(b, 8)) throw DataError("truncated tagger model");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

std::string get_str(std::istream& in) {
  std::uint32_t n = get_u32(in);
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) throw DataError("truncated tagger model");
  return s;
}

constexpr char kTaggerMagic[4] = {'T', 'K', 'P', 'T'};
constexpr std::uint32_t kTaggerVersion = 1;

}  // namespace

WordClass coarse_class(std::string_view penn_tag) {
  if (penn_tag == "NNP" || penn_tag == "NNPS") return WordClass::ProperNoun;
  if (penn_tag == "NN" || penn_tag == "NNS") return WordClass::Noun;
  if (!penn_tag.empty() && penn_tag[0] == 'V' && penn_tag.size() >= 2 && penn_tag[1] == 'B')
    return WordClass::Verb;
  return WordClass::Other;
}

TokenizedText tokenize_and_split(std::string_view text) {
  TokenizedText out;
  std::size_t sentence_begin = 0;
  std::size_t i = 0;
  auto close_sentence = [&](std::size_t end) {
    if (end > sentence_begin) {
      out.sentences.push_back({sentence_begin, end});
      sentence_begin = end;
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (is_word_char(c)) {
      std::size_t start = i;
      while (i < text.size()) {
        if (is_word_char(text[i])) {
          ++i;
        } else if ((text[i] == '-' || text[i] == '\'') && i + 1 < text.size() &&
                   is_word_char(text[i + 1]) && i > start) {
          ++i;  // internal hyphen/apostrophe keeps the word together
        } else {
          break;
        }
      }
      out.tokens.emplace_back(text.substr(start, i - start));
    } else {
      out.tokens.emplace_back(1, c);
      ++i;
      if ((c == '.' || c == '!' || c == '?') &&
          (i >= text.size() || std::isspace(static_cast<unsigned char>(text[i])))) {
        close_sentence(out.tokens.size());
      }
    }
  }
  close_sentence(out.tokens.size());
  return out;
}

std::string lemmatize_verb(std::string_view word) {
  std::string w = to_lower(word);
  const auto& irregular = irregular_verbs();
  if (auto it = irregular.find(w); it != irregular.end()) return std::string(it->second);

  if (w.size() > 4 && (ends_with(w, "ies") || ends_with(w, "ied")))
    return w.substr(0, w.size() - 3) + "y";
  if (w.size() == 4 && ends_with(w, "ied")) return w.substr(0, 3);  // died -> die
  if (w.size() > 4 && ends_with(w, "eed")) return w.substr(0, w.size() - 1);  // agreed -> agree
  if (w.size() > 3 && ends_with(w, "es")) {
    for (std::string_view tail : {"sses", "shes", "ches", "xes", "zes", "oes"}) {
      if (ends_with(w, tail)) return w.substr(0, w.size() - 2);
    }
    return w.substr(0, w.size() - 1);
  }
  if (w.size() > 2 && w.back() == 's' && w[w.size() - 2] != 's') return w.substr(0, w.size() - 1);
  if (w.size() > 4 && ends_with(w, "ing")) return repair_stem(w.substr(0, w.size() - 3));
  if (w.size() > 3 && ends_with(w, "ed")) return repair_stem(w.substr(0, w.size() - 2));
  return w;
}

std::vector<std::size_t> viterbi_decode(const std::vector<std::vector<double>>& emissions,
                                        std::size_t num_tags,
                                        const std::vector<double>& transitions) {
  const std::size_t n = emissions.size();
  if (n == 0) return {};
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  std::vector<std::vector<double>> score(n, std::vector<double>(num_tags, kNegInf));
  std::vector<std::vector<std::size_t>> back(n, std::vector<std::size_t>(num_tags, 0));
  for (std::size_t t = 0; t < num_tags; ++t) score[0][t] = emissions[0][t];
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t t = 0; t < num_tags; ++t) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t s = 0; s < num_tags; ++s) {
        double v = score[i - 1][s] + transitions[s * num_tags + t];
        if (v > best) {
          best = v;
          arg = s;
        }
      }
      score[i][t] = best + emissions[i][t];
      back[i][t] = arg;
    }
  }
  std::size_t last = 0;
  for (std::size_t t = 1; t < num_tags; ++t) {
    if (score[n - 1][t] > score[n - 1][last]) last = t;
  }
  std::vector<std::size_t> path(n);
  path[n - 1] = last;
  for (std::size_t i = n - 1; i > 0; --i) path[i - 1] = back[i][path[i]];
  return path;
}

TaggerModel::TaggerModel(std::vector<std::string> tagset, std::vector<double> transitions,
                         std::map<std::string, std::vector<double>> feature_weights)
    : tagset_(std::move(tagset)),
      transitions_(std::move(transitions)),
      feature_weights_(std::move(feature_weights)) {
  if (transitions_.size() != tagset_.size() * tagset_.size())
    throw DataError("transition matrix is not square over the tagset");
  for (const auto& [key, w] : feature_weights_) {
    if (w.size() != tagset_.size())
      throw DataError("feature weight arity mismatch for: " + key);
  }
}

std::vector<double> TaggerModel::emission_scores(const std::vector<std::string>& features) const {
  std::vector<double> scores(tagset_.size(), 0.0);
  for (const auto& f : features) {
    auto it = feature_weights_.find(f);
    if (it == feature_weights_.end()) continue;
    for (std::size_t t = 0; t < scores.size(); ++t) scores[t] += it->second[t];
  }
  return scores;
}

TaggerModel train_tagger(std::istream& corpus, std::size_t epochs, std::uint64_t seed) {
  if (epochs == 0) throw ConfigError("epochs must be positive");
  auto sentences = parse_conll(corpus);

  std::vector<std::string> tagset;
  {
    std::set<std::string> labels;
    for (const auto& s : sentences)
      for (const auto& t : s.tags) labels.insert(t);
    tagset.assign(labels.begin(), labels.end());
  }
  const std::size_t T = tagset.size();
  std::unordered_map<std::string, std::size_t> tag_id;
  for (std::size_t i = 0; i < T; ++i) tag_id[tagset[i]] = i;

  // gold tag indices and per-token features, precomputed once
  std::vector<std::vector<std::size_t>> gold(sentences.size());
  std::vector<std::vector<std::vector<std::string>>> feats(sentences.size());
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    gold[s].reserve(sentences[s].tags.size());
    for (const auto& t : sentences[s].tags) gold[s].push_back(tag_id.at(t));
    feats[s].resize(sentences[s].tokens.size());
    for (std::size_t i = 0; i < sentences[s].tokens.size(); ++i)
      feats[s][i] = feature_keys(sentences[s].tokens, i);
  }

  std::unordered_map<std::string, Averaged> weights;
  Averaged trans(T * T);
  auto bump_feature = [&](const std::string& key, std::size_t tag, double delta,
                          std::uint64_t step) {
    auto [it, inserted] = weights.try_emplace(key, T);
    it->second.bump(tag, delta, step);
  };

  std::vector<std::size_t> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);

  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t s : order) {
      ++step;
      const std::size_t n = sentences[s].tokens.size();
      std::vector<std::vector<double>> emissions(n);
      for (std::size_t i = 0; i < n; ++i) {
        emissions[i].assign(T, 0.0);
        for (const auto& f : feats[s][i]) {
          auto it = weights.find(f);
          if (it == weights.end()) continue;
          for (std::size_t t = 0; t < T; ++t) emissions[i][t] += it->second.w[t];
        }
      }
      auto predicted = viterbi_decode(emissions, T, trans.w);
      if (predicted == gold[s]) continue;
      for (std::size_t i = 0; i < n; ++i) {
        if (predicted[i] == gold[s][i]) continue;
        for (const auto& f : feats[s][i]) {
          bump_feature(f, gold[s][i], +1.0, step);
          bump_feature(f, predicted[i], -1.0, step);
        }
      }
      for (std::size_t i = 1; i < n; ++i) {
        if (predicted[i - 1] == gold[s][i - 1] && predicted[i] == gold[s][i]) continue;
        trans.bump(gold[s][i - 1] * T + gold[s][i], +1.0, step);
        trans.bump(predicted[i - 1] * T + predicted[i], -1.0, step);
      }
    }
  }

  std::map<std::string, std::vector<double>> averaged;
  for (const auto& [key, av] : weights) {
    std::vector<double> row(T);
    bool nonzero = false;
    for (std::size_t t = 0; t < T; ++t) {
      row[t] = av.average(t, step);
      nonzero = nonzero || std::abs(row[t]) > 1e-12;
    }
    if (nonzero) averaged.emplace(key, std::move(row));
  }
  std::vector<double> avg_trans(T * T);
  for (std::size_t i = 0; i < T * T; ++i) avg_trans[i] = trans.average(i, step);

  return TaggerModel(std::move(tagset), std::move(avg_trans), std::move(averaged));
}

TaggerModel train_tagger_file(const std::string& path, std::size_t epochs, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);
  return train_tagger(in, epochs, seed);
}

std::vector<TaggedToken> tag_tokens(const TaggerModel& m, const TokenizedText& text) {
  std::vector<TaggedToken> out;
  out.reserve(text.tokens.size());
  const std::size_t T = m.tagset().size();
  for (std::size_t si = 0; si < text.sentences.size(); ++si) {
    auto span = text.sentences[si];
    std::vector<std::string> sentence(text.tokens.begin() + static_cast<std::ptrdiff_t>(span.begin),
                                      text.tokens.begin() + static_cast<std::ptrdiff_t>(span.end));
    std::vector<std::vector<double>> emissions(sentence.size());
    for (std::size_t i = 0; i < sentence.size(); ++i)
      emissions[i] = m.emission_scores(feature_keys(sentence, i));
    auto path = viterbi_decode(emissions, T, m.transitions());
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      TaggedToken tok;
      tok.surface = sentence[i];
      tok.penn = m.tagset()[path[i]];
      tok.tag = coarse_class(tok.penn);
      tok.lemma = tok.tag == WordClass::Verb ? lemmatize_verb(tok.surface) : to_lower(tok.surface);
      tok.sentence_index = static_cast<std::int32_t>(si);
      tok.token_index = static_cast<std::int32_t>(span.begin + i);
      out.push_back(std::move(tok));
    }
  }
  return out;
}

std::vector<TaggedToken> tag_text(const TaggerModel& m, std::string_view text) {
  return tag_tokens(m, tokenize_and_split(text));
}

EntitySets extract_entities(const std::vector<TaggedToken>& tokens) {
  EntitySets sets;
  sets.total_tokens = tokens.size();
  sets.is_word.resize(tokens.size(), false);
  sets.sentence_of.resize(tokens.size(), 0);

  std::unordered_map<std::string, std::size_t> content_index;
  std::int32_t max_sentence = -1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const TaggedToken& tok = tokens[i];
    sets.is_word[i] = std::any_of(tok.surface.begin(), tok.surface.end(),
                                  [](char c) { return is_word_char(c); });
    sets.sentence_of[i] = tok.sentence_index;
    max_sentence = std::max(max_sentence, tok.sentence_index);

    sets.term_frequencies[tok.lemma] += 1;

    if (tok.tag == WordClass::ProperNoun) {
      if (std::find(sets.proper_nouns.begin(), sets.proper_nouns.end(), tok.surface) ==
          sets.proper_nouns.end())
        sets.proper_nouns.push_back(tok.surface);
    } else if (tok.tag == WordClass::Noun || tok.tag == WordClass::Verb) {
      auto [it, inserted] = content_index.try_emplace(tok.lemma, sets.content_words.size());
      if (inserted) sets.content_words.push_back({tok.lemma, {}});
      sets.content_words[it->second].positions.push_back(i);
    }
  }

  // sentence spans recovered from the per-token indices
  sets.sentences.resize(static_cast<std::size_t>(max_sentence + 1));
  for (auto& span : sets.sentences) span = {tokens.size(), 0};
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto& span = sets.sentences[static_cast<std::size_t>(tokens[i].sentence_index)];
    span.begin = std::min(span.begin, i);
    span.end = std::max(span.end, i + 1);
  }
  return sets;
}

void save_tagger(const TaggerModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write tagger model: " + path);
  out.write(kTaggerMagic, 4);
  put_u32(out, kTaggerVersion);
  put_u32(out, static_cast<std::uint32_t>(m.tagset().size()));
  for (const auto& t : m.tagset()) put_str(out, t);
  for (double v : m.transitions()) put_f64(out, v);
  put_u64(out, m.feature_weights().size());
  for (const auto& [key, row] : m.feature_weights()) {
    put_str(out, key);
    for (double v : row) put_f64(out, v);
  }
  if (!out) throw DataError("write failure on tagger model: " + path);
}

TaggerModel load_tagger(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open tagger model: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::string_view(magic, 4) != std::string_view(kTaggerMagic, 4))
    throw DataError("not a tagger model file: " + path);
  if (get_u32(in) != kTaggerVersion) throw DataError("unsupported tagger model version: " + path);

  std::uint32_t T = get_u32(in);
  std::vector<std::string> tagset;
  tagset.reserve(T);
  for (std::uint32_t i = 0; i < T; ++i) tagset.push_back(get_str(in));
  std::vector<double> transitions(static_cast<std::size_t>(T) * T);
  for (double& v : transitions) v = get_f64(in);
  std::uint64_t F = get_u64(in);
  std::map<std::string, std::vector<double>> features;
  for (std::uint64_t i = 0; i < F; ++i) {
    std::string key = get_str(in);
    std::vector<double> row(T);
    for (double& v : row) v = get_f64(in);
    features.emplace(std::move(key), std::move(row));
  }
  return TaggerModel(std::move(tagset), std::move(transitions), std::move(features));
}

}  // namespace tagkit::pos
