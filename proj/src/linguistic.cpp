#include "judgekit/linguistic.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "embedded_data.hpp"
#include "judgekit/error.hpp"
#include "judgekit/hash.hpp"
#include "judgekit/utf8.hpp"

namespace judgekit::ling {
namespace {

using CodePoints = std::vector<char32_t>;

std::string lower_word(std::string_view s) { return utf8::ascii_lower(s); }

bool starts_with_ci(const CodePoints& cps, std::size_t from, std::string_view prefix) {
  if (cps.size() - from < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char32_t c = cps[from + i];
    if (c >= 'A' && c <= 'Z') c = c - 'A' + 'a';
    if (c != static_cast<char32_t>(prefix[i])) return false;
  }
  return true;
}

bool is_apostrophe(char32_t cp) { return cp == '\'' || cp == 0x2019; }

bool is_number_core(const CodePoints& core) {
  bool digit = false;
  for (char32_t c : core) {
    if (utf8::is_digit(c))
      digit = true;
    else if (c != '.' && c != ',' && c != ':' && c != '%' && c != '/' && c != '-' && c != '+')
      return false;
  }
  return digit;
}

void emit_punct(TokenSequence& out, const CodePoints& cps, std::size_t from, std::size_t to) {
  for (std::size_t i = from; i < to; ++i) out.push_back({utf8::encode(cps[i]), TokenKind::Punct});
}

void tokenize_chunk(const CodePoints& cps, std::size_t begin, std::size_t end, TokenSequence& out) {
  std::size_t lead = begin;
  while (lead < end && utf8::is_punct(cps[lead])) ++lead;
  emit_punct(out, cps, begin, lead);
  if (lead == end) return;

  std::size_t trail = end;
  while (trail > lead && utf8::is_punct(cps[trail - 1])) --trail;
  // A URL keeps its internal and trailing slashes; only sentence punctuation
  // after it is split off.
  const bool url = starts_with_ci(cps, lead, "http://") || starts_with_ci(cps, lead, "https://") ||
                   starts_with_ci(cps, lead, "www.");
  if (url) {
    trail = end;
    while (trail > lead) {
      const char32_t c = cps[trail - 1];
      if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == ')' ||
          c == ']' || c == '}' || c == '"' || c == '\'' || c == '>' || c == 0x201D || c == 0x2019)
        --trail;
      else
        break;
    }
  }
  const CodePoints core(cps.begin() + static_cast<std::ptrdiff_t>(lead),
                        cps.begin() + static_cast<std::ptrdiff_t>(trail));
  TokenKind kind = TokenKind::Word;
  if (url)
    kind = TokenKind::Url;
  else if (is_number_core(core))
    kind = TokenKind::Number;
  out.push_back({utf8::encode(core), kind});
  emit_punct(out, cps, trail, end);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (true) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

bool is_blank(std::string_view line) {
  for (char32_t cp : utf8::decode(line))
    if (!utf8::is_space(cp)) return false;
  return true;
}

bool is_list_line(std::string_view line) {
  const CodePoints cps = utf8::decode(line);
  std::size_t i = 0;
  while (i < cps.size() && utf8::is_space(cps[i])) ++i;
  if (i == cps.size()) return false;
  if (cps[i] == '-' || cps[i] == '*' || cps[i] == 0x2022) return true;
  std::size_t j = i;
  while (j < cps.size() && utf8::is_digit(cps[j])) ++j;
  return j > i && j < cps.size() && (cps[j] == '.' || cps[j] == ')');
}

bool is_word_like(const Token& t) { return t.kind == TokenKind::Word || t.kind == TokenKind::Number; }

std::size_t count_words(const TokenSequence& tokens) {
  return static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(), is_word_like));
}

PosTag parse_tag(std::string_view name) {
  if (name == "NOUN") return PosTag::Noun;
  if (name == "VERB") return PosTag::Verb;
  if (name == "ADJ") return PosTag::Adj;
  if (name == "ADV") return PosTag::Adv;
  if (name == "PRON") return PosTag::Pron;
  if (name == "OTHER") return PosTag::Other;
  throw InputError("unknown part-of-speech tag '" + std::string(name) + "'");
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

const std::unordered_set<std::string>& be_forms() {
  static const std::unordered_set<std::string> forms = {"am", "is", "are", "was", "were",
                                                        "be", "been", "being"};
  return forms;
}

bool is_participle(const std::string& lower) {
  static const std::unordered_set<std::string> irregular = {
      "done",   "made",   "seen",   "known",  "shown",     "built",  "found",   "held",
      "told",   "sold",   "paid",   "sent",   "kept",      "left",   "brought", "bought",
      "thought", "caught", "taught", "given", "taken",     "written", "eaten",  "driven",
      "hidden", "broken", "chosen", "spoken", "stolen",    "forgotten", "grown", "thrown",
      "drawn",  "worn",   "begun",  "put",    "set",       "cut",    "let",     "read",
      "hit",    "led",    "met",    "lost",   "spent",     "understood", "won", "said"};
  if (irregular.count(lower)) return true;
  if (be_forms().count(lower)) return false;
  return lower.size() > 3 && (ends_with(lower, "ed") || ends_with(lower, "en"));
}

// Greedy longest-match count of lexicon entries over a word sequence.
std::size_t count_lexicon_hits(const std::vector<std::string>& words, const Lexicon& lexicon) {
  std::size_t hits = 0;
  std::size_t i = 0;
  while (i < words.size()) {
    std::size_t matched = 0;
    for (std::size_t len = std::min(lexicon.longest(), words.size() - i); len >= 1; --len) {
      const std::vector<std::string> window(words.begin() + static_cast<std::ptrdiff_t>(i),
                                            words.begin() + static_cast<std::ptrdiff_t>(i + len));
      if (lexicon.contains(window)) {
        matched = len;
        break;
      }
    }
    if (matched) {
      ++hits;
      i += matched;
    } else {
      ++i;
    }
  }
  return hits;
}

}  // namespace

// ---------------------------------------------------------------------------
// Lexicons

Lexicon Lexicon::parse(std::string_view text) {
  Lexicon lex;
  lex.hash_ = sha256_hex(text);
  for (std::string_view line : split_lines(text)) {
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::istringstream words{std::string(line)};
    std::vector<std::string> entry;
    for (std::string w; words >> w;) entry.push_back(lower_word(w));
    if (entry.empty()) continue;
    lex.longest_ = std::max(lex.longest_, entry.size());
    lex.entries_.push_back(std::move(entry));
  }
  return lex;
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read lexicon " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool Lexicon::contains(const std::vector<std::string>& words) const {
  return std::find(entries_.begin(), entries_.end(), words) != entries_.end();
}

const Lexicon& default_hedges() {
  static const Lexicon lex = Lexicon::parse(data::kHedges);
  return lex;
}

const Lexicon& default_discourse_markers() {
  static const Lexicon lex = Lexicon::parse(data::kDiscourseMarkers);
  return lex;
}

// ---------------------------------------------------------------------------
// Tagging

RuleTagger RuleTagger::from_lexicon_text(std::string_view text) {
  RuleTagger tagger;
  tagger.hash_ = sha256_hex(text);
  for (std::string_view line : split_lines(text)) {
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw InputError("lexicon line lacks a TAB: " + std::string(line));
    std::string_view tag = line.substr(tab + 1);
    while (!tag.empty() && (tag.back() == '\r' || tag.back() == ' ')) tag.remove_suffix(1);
    tagger.lexicon_[lower_word(line.substr(0, tab))] = parse_tag(tag);
  }
  return tagger;
}

const RuleTagger& RuleTagger::default_tagger() {
  static const RuleTagger tagger = from_lexicon_text(data::kPosLexicon);
  return tagger;
}

PosTag RuleTagger::tag_word(std::string_view lower) const {
  if (const auto it = lexicon_.find(std::string(lower)); it != lexicon_.end()) return it->second;
  const auto known_verb_stem = [&](std::string_view stem) {
    for (const std::string& candidate : {std::string(stem), std::string(stem) + "e"}) {
      const auto it = lexicon_.find(candidate);
      if (it != lexicon_.end() && it->second == PosTag::Verb) return true;
    }
    return false;
  };
  if (ends_with(lower, "ly") && lower.size() > 4) return PosTag::Adv;
  for (std::string_view suffix : {"tion", "sion", "ness", "ment", "ity", "ism", "ance", "ence", "ship"})
    if (ends_with(lower, suffix) && lower.size() > suffix.size() + 2) return PosTag::Noun;
  for (std::string_view suffix : {"ize", "ise", "ate", "ify", "izes", "ized", "izing", "ates"})
    if (ends_with(lower, suffix) && lower.size() > suffix.size() + 2) return PosTag::Verb;
  if (ends_with(lower, "ing") && lower.size() > 5)
    return known_verb_stem(lower.substr(0, lower.size() - 3)) ? PosTag::Verb : PosTag::Noun;
  if (ends_with(lower, "ed") && lower.size() > 4)
    return known_verb_stem(lower.substr(0, lower.size() - 2)) ||
                   known_verb_stem(lower.substr(0, lower.size() - 1))
               ? PosTag::Verb
               : PosTag::Adj;
  for (std::string_view suffix : {"ous", "ful", "ive", "able", "ible", "less", "ical", "al", "ic"})
    if (ends_with(lower, suffix) && lower.size() > suffix.size() + 2) return PosTag::Adj;
  return PosTag::Noun;
}

void RuleTagger::tag(std::span<Token> tokens) const {
  for (auto& t : tokens) t.tag = t.kind == TokenKind::Word ? tag_word(lower_word(t.surface)) : PosTag::None;
}

// ---------------------------------------------------------------------------
// Tokens and sentences

TokenSequence tokenize(std::string_view text) {
  const CodePoints cps = utf8::decode(text);
  TokenSequence out;
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && utf8::is_space(cps[i])) ++i;
    std::size_t j = i;
    while (j < cps.size() && !utf8::is_space(cps[j])) ++j;
    if (j > i) tokenize_chunk(cps, i, j, out);
    i = j;
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  static const std::unordered_set<std::string> abbreviations = {"e.g", "i.e", "etc", "dr", "mr",
                                                                "ms",  "fig", "eq",  "vs"};
  const CodePoints cps = utf8::decode(text);
  std::vector<std::string> out;
  const auto emit = [&](std::size_t from, std::size_t to) {
    while (from < to && utf8::is_space(cps[from])) ++from;
    while (to > from && utf8::is_space(cps[to - 1])) --to;
    if (to > from)
      out.push_back(utf8::encode(CodePoints(cps.begin() + static_cast<std::ptrdiff_t>(from),
                                            cps.begin() + static_cast<std::ptrdiff_t>(to))));
  };
  const auto terminator = [](char32_t c) { return c == '.' || c == '!' || c == '?'; };
  const auto closer = [](char32_t c) {
    return c == '"' || c == '\'' || c == ')' || c == ']' || c == 0x201D || c == 0x2019;
  };

  std::size_t start = 0;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!terminator(cps[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < cps.size() && terminator(cps[j])) ++j;
    const bool single_period = j == i + 1 && cps[i] == '.';
    std::size_t end = j;
    while (end < cps.size() && closer(cps[end])) ++end;
    if (end < cps.size() && !utf8::is_space(cps[end])) {
      i = j;
      continue;
    }
    if (single_period) {
      std::size_t w = i;
      while (w > start && !utf8::is_space(cps[w - 1])) --w;
      while (w < i && utf8::is_punct(cps[w]) && cps[w] != '.') ++w;
      const std::string word =
          utf8::ascii_lower(utf8::encode(CodePoints(cps.begin() + static_cast<std::ptrdiff_t>(w),
                                                    cps.begin() + static_cast<std::ptrdiff_t>(i))));
      const bool single_letter = i - w == 1 && utf8::is_letter(cps[w]);
      if (single_letter || abbreviations.count(word)) {
        i = j;
        continue;
      }
    }
    emit(start, end);
    start = end;
    i = end;
  }
  emit(start, cps.size());
  return out;
}

// ---------------------------------------------------------------------------
// Feature families

const std::array<std::string_view, LinguisticRecord::kFieldCount>& LinguisticRecord::field_names() {
  static const std::array<std::string_view, kFieldCount> names = {
      "word_count",         "char_count",          "sentence_count",   "avg_sentence_length",
      "list_count",         "paragraph_count",     "punctuation_count", "reference_count",
      "unique_words",       "vocab_diversity",     "average_word_length", "noun_verb_ratio",
      "adjective_ratio",    "adverb_ratio",        "pronoun_ratio",    "contraction_rate",
      "coleman_liau",       "syntax_tree_depth",   "average_dependency_length",
      "passive_voice_ratio", "subordinate_clause_rate", "hedging_frequency",
      "discourse_marker_rate"};
  return names;
}

std::array<double, LinguisticRecord::kFieldCount> LinguisticRecord::values() const {
  return {word_count,         char_count,          sentence_count,   avg_sentence_length,
          list_count,         paragraph_count,     punctuation_count, reference_count,
          unique_words,       vocab_diversity,     average_word_length, noun_verb_ratio,
          adjective_ratio,    adverb_ratio,        pronoun_ratio,    contraction_rate,
          coleman_liau,       syntax_tree_depth,   average_dependency_length,
          passive_voice_ratio, subordinate_clause_rate, hedging_frequency,
          discourse_marker_rate};
}

LinguisticRecord length_features(std::string_view text) {
  LinguisticRecord r;
  const TokenSequence tokens = tokenize(text);
  for (const auto& t : tokens) {
    if (is_word_like(t)) r.word_count += 1;
    if (t.kind == TokenKind::Punct) r.punctuation_count += 1;
    if (t.kind == TokenKind::Url) r.reference_count += 1;
  }
  r.char_count = static_cast<double>(utf8::length(text));
  r.sentence_count = static_cast<double>(split_sentences(text).size());
  r.avg_sentence_length = r.word_count / std::max(r.sentence_count, 1.0);
  bool in_paragraph = false;
  for (std::string_view line : split_lines(text)) {
    if (is_list_line(line)) r.list_count += 1;
    const bool blank = is_blank(line);
    if (!blank && !in_paragraph) r.paragraph_count += 1;
    in_paragraph = !blank;
  }
  return r;
}

LinguisticRecord lexical_features(const TokenSequence& tokens) {
  LinguisticRecord r;
  std::unordered_set<std::string> unique;
  double total = 0, letters = 0, nouns = 0, verbs = 0, adjs = 0, advs = 0, prons = 0, contractions = 0;
  for (const auto& t : tokens) {
    if (t.kind != TokenKind::Word) continue;
    if (t.tag == PosTag::None) throw InputError("lexical features need tagged tokens ('" + t.surface + "')");
    total += 1;
    unique.insert(lower_word(t.surface));
    const CodePoints cps = utf8::decode(t.surface);
    letters += static_cast<double>(cps.size());
    for (std::size_t i = 1; i + 1 < cps.size(); ++i)
      if (is_apostrophe(cps[i])) {
        contractions += 1;
        break;
      }
    switch (t.tag) {
      case PosTag::Noun: nouns += 1; break;
      case PosTag::Verb: verbs += 1; break;
      case PosTag::Adj: adjs += 1; break;
      case PosTag::Adv: advs += 1; break;
      case PosTag::Pron: prons += 1; break;
      default: break;
    }
  }
  if (total == 0) return r;
  r.unique_words = static_cast<double>(unique.size());
  r.vocab_diversity = r.unique_words / total;
  r.average_word_length = letters / total;
  r.noun_verb_ratio = std::min(kNounVerbRatioCap, nouns / std::max(verbs, 1.0));
  r.adjective_ratio = adjs / total;
  r.adverb_ratio = advs / total;
  r.pronoun_ratio = prons / total;
  r.contraction_rate = contractions / total;
  return r;
}

double coleman_liau_index(double letters, double words, double sentences) {
  if (words <= 0) return 0.0;
  const double l = letters / words * 100.0;
  const double s = sentences / words * 100.0;
  return 0.0588 * l - 0.296 * s - 15.8;
}

double coleman_liau(std::string_view text) {
  const double words = static_cast<double>(count_words(tokenize(text)));
  if (words == 0) return 0.0;
  double letters = 0;
  for (char32_t cp : utf8::decode(text))
    if (utf8::is_letter(cp)) letters += 1;
  return coleman_liau_index(letters, words, static_cast<double>(split_sentences(text).size()));
}

bool HeuristicSyntaxAnalyzer::is_subordinator(std::string_view lower) {
  static const std::unordered_set<std::string_view> subordinators = {
      "that", "because", "although", "which", "who", "if", "while", "since", "whereas", "unless", "when"};
  return subordinators.count(lower) > 0;
}

SyntaxStats HeuristicSyntaxAnalyzer::analyze(std::string_view text) const {
  SyntaxStats stats;
  const std::vector<std::string> sentences = split_sentences(text);
  if (sentences.empty()) return stats;
  double dependency_total = 0, dependency_tokens = 0, passive = 0, subordinators = 0;
  for (const auto& sentence : sentences) {
    TokenSequence tokens = tokenize(sentence);
    if (tokens.empty()) continue;
    tagger_->tag(tokens);
    int level = 0, deepest = 0;
    std::vector<std::string> words;
    std::ptrdiff_t last_verb = -1;
    for (const auto& t : tokens) {
      if (t.kind == TokenKind::Punct) {
        if (t.surface == "," || t.surface == ";" || t.surface == ":") level = std::max(0, level - 1);
        continue;
      }
      if (!is_word_like(t)) continue;
      const auto pos = static_cast<std::ptrdiff_t>(words.size());
      const std::string lower = lower_word(t.surface);
      if (t.kind == TokenKind::Word && is_subordinator(lower)) {
        ++level;
        deepest = std::max(deepest, level);
        subordinators += 1;
      }
      dependency_total += static_cast<double>(last_verb >= 0 ? pos - last_verb : pos);
      dependency_tokens += 1;
      if (t.tag == PosTag::Verb) last_verb = pos;
      words.push_back(lower);
    }
    stats.syntax_tree_depth = std::max(stats.syntax_tree_depth, 1.0 + deepest);
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (!be_forms().count(words[i])) continue;
      const bool hit = (i + 1 < words.size() && is_participle(words[i + 1])) ||
                       (i + 2 < words.size() && is_participle(words[i + 2]));
      if (hit) {
        passive += 1;
        break;
      }
    }
  }
  const double n = static_cast<double>(sentences.size());
  stats.average_dependency_length = dependency_tokens > 0 ? dependency_total / dependency_tokens : 0.0;
  stats.passive_voice_ratio = passive / n;
  stats.subordinate_clause_rate = subordinators / n;
  return stats;
}

const HeuristicSyntaxAnalyzer& default_analyzer() {
  static const HeuristicSyntaxAnalyzer analyzer;
  return analyzer;
}

LinguisticRecord syntax_features(std::string_view text, const SyntaxAnalyzer& analyzer) {
  const SyntaxStats s = analyzer.analyze(text);
  LinguisticRecord r;
  r.syntax_tree_depth = s.syntax_tree_depth;
  r.average_dependency_length = s.average_dependency_length;
  r.passive_voice_ratio = s.passive_voice_ratio;
  r.subordinate_clause_rate = s.subordinate_clause_rate;
  return r;
}

LinguisticRecord discourse_features(const TokenSequence& tokens, const Lexicon& hedges,
                                    const Lexicon& markers) {
  LinguisticRecord r;
  std::vector<std::string> words;
  for (const auto& t : tokens)
    if (is_word_like(t)) words.push_back(lower_word(t.surface));
  if (words.empty()) return r;
  const double n = static_cast<double>(words.size());
  r.hedging_frequency = static_cast<double>(count_lexicon_hits(words, hedges)) / n;
  r.discourse_marker_rate = static_cast<double>(count_lexicon_hits(words, markers)) / n;
  return r;
}

std::vector<std::string> Analyzers::lexicon_hashes() const {
  std::vector<std::string> out;
  if (const auto* rule = dynamic_cast<const RuleTagger*>(tagger)) out.push_back("pos:" + rule->lexicon_hash());
  out.push_back("hedges:" + hedges->hash());
  out.push_back("discourse:" + markers->hash());
  return out;
}

LinguisticRecord analyze_text(std::string_view text, const Analyzers& analyzers) {
  LinguisticRecord r = length_features(text);
  TokenSequence tokens = tokenize(text);
  analyzers.tagger->tag(tokens);
  const LinguisticRecord lex = lexical_features(tokens);
  r.unique_words = lex.unique_words;
  r.vocab_diversity = lex.vocab_diversity;
  r.average_word_length = lex.average_word_length;
  r.noun_verb_ratio = lex.noun_verb_ratio;
  r.adjective_ratio = lex.adjective_ratio;
  r.adverb_ratio = lex.adverb_ratio;
  r.pronoun_ratio = lex.pronoun_ratio;
  r.contraction_rate = lex.contraction_rate;
  r.coleman_liau = coleman_liau(text);
  const SyntaxStats syn = analyzers.syntax->analyze(text);
  r.syntax_tree_depth = syn.syntax_tree_depth;
  r.average_dependency_length = syn.average_dependency_length;
  r.passive_voice_ratio = syn.passive_voice_ratio;
  r.subordinate_clause_rate = syn.subordinate_clause_rate;
  const LinguisticRecord disc = discourse_features(tokens, *analyzers.hedges, *analyzers.markers);
  r.hedging_frequency = disc.hedging_frequency;
  r.discourse_marker_rate = disc.discourse_marker_rate;
  return r;
}

// ---------------------------------------------------------------------------
// Instance blocks

namespace {

void append_record(LinguisticBlock& block, const std::string& prefix,
                   const std::array<double, LinguisticRecord::kFieldCount>& values, bool present) {
  const auto& names = LinguisticRecord::field_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    block.names.push_back(prefix + std::string(names[i]));
    block.values.push_back(present ? values[i] : 0.0);
    block.present.push_back(present ? 1 : 0);
  }
}

std::array<double, LinguisticRecord::kFieldCount> difference(
    const std::array<double, LinguisticRecord::kFieldCount>& a,
    const std::array<double, LinguisticRecord::kFieldCount>& b) {
  std::array<double, LinguisticRecord::kFieldCount> d{};
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

}  // namespace

std::vector<std::string> linguistic_feature_names(JudgmentType type, int listwise_items) {
  std::vector<std::string> names;
  const auto add = [&](const std::string& prefix) {
    for (auto f : LinguisticRecord::field_names()) names.push_back(prefix + std::string(f));
  };
  switch (type) {
    case JudgmentType::Pointwise:
      add("ling.");
      break;
    case JudgmentType::Pairwise:
      add("ling.r1.");
      add("ling.r2.");
      add("ling.diff.");
      break;
    case JudgmentType::Listwise:
      for (int i = 0; i < listwise_items; ++i) {
        add("ling.item" + std::to_string(i) + ".");
        names.push_back("ling.item" + std::to_string(i) + ".present");
      }
      for (int j = 0; j + 1 < listwise_items; ++j) add("ling.rankdiff" + std::to_string(j) + ".");
      break;
  }
  return names;
}

LinguisticBlock extract_linguistic(const JudgmentInstance& instance, int listwise_items,
                                   const Analyzers& analyzers) {
  const auto& responses = instance.candidate.responses;
  LinguisticBlock block;
  switch (instance.type()) {
    case JudgmentType::Pointwise: {
      if (responses.size() != 1) throw InputError("pointwise instance needs exactly 1 response");
      append_record(block, "ling.", analyze_text(responses[0], analyzers).values(), true);
      break;
    }
    case JudgmentType::Pairwise: {
      if (responses.size() != 2) throw InputError("pairwise instance needs exactly 2 responses");
      const auto r1 = analyze_text(responses[0], analyzers).values();
      const auto r2 = analyze_text(responses[1], analyzers).values();
      append_record(block, "ling.r1.", r1, true);
      append_record(block, "ling.r2.", r2, true);
      append_record(block, "ling.diff.", difference(r1, r2), true);
      break;
    }
    case JudgmentType::Listwise: {
      const auto& score = std::get<ListwiseScore>(instance.score);
      const int arity = listwise_items > 0 ? listwise_items : static_cast<int>(responses.size());
      if (responses.size() < 2 || responses.size() > static_cast<std::size_t>(arity))
        throw InputError("listwise instance has " + std::to_string(responses.size()) +
                         " responses; declared arity is " + std::to_string(arity));
      std::vector<std::array<double, LinguisticRecord::kFieldCount>> records;
      for (const auto& r : responses) records.push_back(analyze_text(r, analyzers).values());
      for (int i = 0; i < arity; ++i) {
        const bool present = static_cast<std::size_t>(i) < records.size();
        append_record(block, "ling.item" + std::to_string(i) + ".",
                      present ? records[i] : std::array<double, LinguisticRecord::kFieldCount>{}, present);
        block.names.push_back("ling.item" + std::to_string(i) + ".present");
        block.values.push_back(present ? 1.0 : 0.0);
        block.present.push_back(1);
      }
      for (int j = 0; j + 1 < arity; ++j) {
        const bool present = static_cast<std::size_t>(j + 1) < score.ranking.size();
        append_record(block, "ling.rankdiff" + std::to_string(j) + ".",
                      present ? difference(records[score.ranking[j]], records[score.ranking[j + 1]])
                              : std::array<double, LinguisticRecord::kFieldCount>{},
                      present);
      }
      break;
    }
  }
  return block;
}

}  // namespace judgekit::ling
