#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "judgekit/data_model.hpp"
#include "judgekit/feature_block.hpp"

namespace judgekit::ling {

enum class TokenKind { Word, Punct, Number, Url };
enum class PosTag { None, Noun, Verb, Adj, Adv, Pron, Other };

struct Token {
  std::string surface;
  TokenKind kind = TokenKind::Word;
  PosTag tag = PosTag::None;

  bool operator==(const Token&) const = default;
};

using TokenSequence = std::vector<Token>;

/// Closed word list; entries may span several words ("on the other hand").
class Lexicon {
 public:
  /// One entry per line, '#' starts a comment, blank lines ignored.
  static Lexicon parse(std::string_view text);
  static Lexicon load(const std::string& path);

  const std::vector<std::vector<std::string>>& entries() const { return entries_; }
  const std::string& hash() const { return hash_; }
  std::size_t longest() const { return longest_; }
  bool contains(const std::vector<std::string>& words) const;

 private:
  std::vector<std::vector<std::string>> entries_;
  std::string hash_;
  std::size_t longest_ = 0;
};

/// Default hedge and discourse-marker lists, shipped in data/.
const Lexicon& default_hedges();
const Lexicon& default_discourse_markers();

class Tagger {
 public:
  virtual ~Tagger() = default;
  /// Assigns a tag to every Word token; other kinds keep PosTag::None.
  virtual void tag(std::span<Token> tokens) const = 0;
};

/// Closed-lexicon tagger with suffix heuristics for unknown words.
class RuleTagger : public Tagger {
 public:
  /// Parses "word<TAB>TAG" lines (TAG in NOUN VERB ADJ ADV PRON OTHER).
  static RuleTagger from_lexicon_text(std::string_view text);
  static const RuleTagger& default_tagger();

  void tag(std::span<Token> tokens) const override;
  PosTag tag_word(std::string_view lower) const;
  const std::string& lexicon_hash() const { return hash_; }

 private:
  std::unordered_map<std::string, PosTag> lexicon_;
  std::string hash_;
};

struct SyntaxStats {
  double syntax_tree_depth = 0.0;
  double average_dependency_length = 0.0;
  double passive_voice_ratio = 0.0;
  double subordinate_clause_rate = 0.0;
};

class SyntaxAnalyzer {
 public:
  virtual ~SyntaxAnalyzer() = default;
  virtual SyntaxStats analyze(std::string_view text) const = 0;
};

/// Clause-nesting and verb-distance proxies for dependency structure.
class HeuristicSyntaxAnalyzer : public SyntaxAnalyzer {
 public:
  explicit HeuristicSyntaxAnalyzer(const Tagger& tagger = RuleTagger::default_tagger())
      : tagger_(&tagger) {}
  SyntaxStats analyze(std::string_view text) const override;

  static bool is_subordinator(std::string_view lower);

 private:
  const Tagger* tagger_;
};

const HeuristicSyntaxAnalyzer& default_analyzer();

struct LinguisticRecord {
  double word_count = 0, char_count = 0, sentence_count = 0, avg_sentence_length = 0;
  double list_count = 0, paragraph_count = 0, punctuation_count = 0, reference_count = 0;
  double unique_words = 0, vocab_diversity = 0, average_word_length = 0;
  double noun_verb_ratio = 0, adjective_ratio = 0, adverb_ratio = 0, pronoun_ratio = 0;
  double contraction_rate = 0;
  double coleman_liau = 0;
  double syntax_tree_depth = 0, average_dependency_length = 0, passive_voice_ratio = 0;
  double subordinate_clause_rate = 0;
  double hedging_frequency = 0, discourse_marker_rate = 0;

  static constexpr std::size_t kFieldCount = 23;
  static const std::array<std::string_view, kFieldCount>& field_names();
  std::array<double, kFieldCount> values() const;
};

inline constexpr double kNounVerbRatioCap = 50.0;

TokenSequence tokenize(std::string_view text);
std::vector<std::string> split_sentences(std::string_view text);

/// Length & structure fields; other fields stay 0.
LinguisticRecord length_features(std::string_view text);
/// Lexical fields; throws InputError if a Word token is untagged.
LinguisticRecord lexical_features(const TokenSequence& tokens);
/// 0.0588 * letters-per-100-words - 0.296 * sentences-per-100-words - 15.8;
/// 0 when there are no words.
double coleman_liau_index(double letters, double words, double sentences);
double coleman_liau(std::string_view text);
LinguisticRecord syntax_features(std::string_view text,
                                 const SyntaxAnalyzer& analyzer = default_analyzer());
LinguisticRecord discourse_features(const TokenSequence& tokens,
                                    const Lexicon& hedges = default_hedges(),
                                    const Lexicon& markers = default_discourse_markers());

struct Analyzers {
  const Tagger* tagger = &RuleTagger::default_tagger();
  const SyntaxAnalyzer* syntax = &default_analyzer();
  const Lexicon* hedges = &default_hedges();
  const Lexicon* markers = &default_discourse_markers();

  std::vector<std::string> lexicon_hashes() const;
};

/// All fields of one text.
LinguisticRecord analyze_text(std::string_view text, const Analyzers& analyzers = {});

/// Linguistic features of one instance. `listwise_items` fixes the listwise
/// arity; missing items are zero-filled, absent, and flagged by
/// `ling.item{i}.present`.
using LinguisticBlock = FeatureBlock;

std::vector<std::string> linguistic_feature_names(JudgmentType type, int listwise_items);

LinguisticBlock extract_linguistic(const JudgmentInstance& instance, int listwise_items = 0,
                                   const Analyzers& analyzers = {});

}  // namespace judgekit::ling
