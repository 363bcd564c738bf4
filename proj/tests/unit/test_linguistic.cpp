#include <cctype>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "judgekit/error.hpp"
#include "judgekit/linguistic.hpp"
#include "support.hpp"

using namespace judgekit;
using namespace judgekit::ling;

namespace {

// Tags every word with one fixed tag.
class ConstantTagger : public Tagger {
 public:
  explicit ConstantTagger(PosTag tag) : tag_(tag) {}
  void tag(std::span<Token> tokens) const override {
    for (auto& t : tokens)
      if (t.kind == TokenKind::Word) t.tag = tag_;
  }

 private:
  PosTag tag_;
};

TokenSequence tagged(std::string_view text) {
  TokenSequence t = tokenize(text);
  RuleTagger::default_tagger().tag(t);
  return t;
}

double field(const FeatureBlock& b, const std::string& name) {
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b.names[i] == name) return b.values[i];
  FAIL("missing feature " << name);
  return 0;
}

// Independent readability oracle for plain ASCII prose: words are
// whitespace-separated chunks, letters are isalpha bytes, sentences are
// counted by hand in the fixture table.
double oracle_coleman_liau(const std::string& text, int sentences) {
  std::istringstream in(text);
  std::string w;
  double words = 0, letters = 0;
  while (in >> w) words += 1;
  for (unsigned char c : text) letters += std::isalpha(c) ? 1 : 0;
  if (words == 0) return 0;
  return 0.0588 * (100.0 * letters / words) - 0.296 * (100.0 * sentences / words) - 15.8;
}

}  // namespace

TEST_SUITE("linguistic") {
  TEST_CASE("tokenize") {
    const auto t = tokenize("Hello, world!");
    REQUIRE(t.size() == 4);
    CHECK(t[0].surface == "Hello");
    CHECK(t[0].kind == TokenKind::Word);
    CHECK(t[1].surface == ",");
    CHECK(t[1].kind == TokenKind::Punct);
    CHECK(t[2].surface == "world");
    CHECK(t[3].kind == TokenKind::Punct);

    const auto c = tokenize("don't");
    REQUIRE(c.size() == 1);
    CHECK(c[0].surface == "don't");

    const auto u = tokenize("see https://a.b/c now");
    REQUIRE(u.size() == 3);
    CHECK(u[1].kind == TokenKind::Url);
    CHECK(tokenize("").empty());
  }

  TEST_CASE("split_sentences") {
    CHECK(split_sentences("Hello world. How are you?").size() == 2);
    CHECK(split_sentences("See Fig. 2 for details.").size() == 1);
    CHECK(split_sentences("Ask Dr. Smith, e.g. today.").size() == 1);
    CHECK(split_sentences("J. Smith wrote it.").size() == 1);
    CHECK(split_sentences("").empty());
    CHECK(split_sentences("Wait!! Really?").size() == 2);
  }

  TEST_CASE("length features") {
    const auto r = length_features("Hello world. How are you?");
    CHECK(r.word_count == 5);
    CHECK(r.char_count == 25);
    CHECK(r.sentence_count == 2);
    CHECK(r.avg_sentence_length == doctest::Approx(2.5));

    const auto l = length_features("- a\n- b\n\nc");
    CHECK(l.list_count == 2);
    CHECK(l.paragraph_count == 2);

    const auto e = length_features("");
    for (double v : e.values()) CHECK(v == 0.0);
  }

  TEST_CASE("lexical features") {
    const auto r = lexical_features(tagged("the cat the mat"));
    CHECK(r.unique_words == 3);
    CHECK(r.vocab_diversity == doctest::Approx(0.75));
    CHECK(r.average_word_length == doctest::Approx(3.0));

    TokenSequence nv = tokenize("cat runs");
    nv[0].tag = PosTag::Noun;
    nv[1].tag = PosTag::Verb;
    CHECK(lexical_features(nv).noun_verb_ratio == doctest::Approx(1.0));

    CHECK(lexical_features(tagged("don't stop")).contraction_rate == doctest::Approx(0.5));
    CHECK_THROWS_AS(lexical_features(tokenize("untagged words")), InputError);
  }

  TEST_CASE("noun/verb ratio is capped") {
    std::string text;
    for (int i = 0; i < 80; ++i) text += "cat ";
    TokenSequence t = tokenize(text);
    ConstantTagger(PosTag::Noun).tag(t);
    CHECK(lexical_features(t).noun_verb_ratio == kNounVerbRatioCap);
  }

  TEST_CASE("Coleman-Liau formula") {
    // 10 letters, 3 words, 1 sentence.
    CHECK(std::abs(coleman_liau_index(10, 3, 1) - (-6.0667)) < 1e-4);
    CHECK(coleman_liau("") == 0.0);
    CHECK(coleman_liau_index(0, 0, 0) == 0.0);
    // "The cat sat." has 9 letters; the text path counts what is there.
    CHECK(std::abs(coleman_liau("The cat sat.") - coleman_liau_index(9, 3, 1)) < 1e-12);
  }

  TEST_CASE("Coleman-Liau against an independent oracle") {
    const std::vector<std::pair<std::string, int>> fixtures = {
        {"The cat sat.", 1},
        {"It rains. We stay home.", 2},
        {"Readability formulas estimate grade levels from surface statistics.", 1},
        {"A short one. Another short one. And a third.", 3},
        {"Some sentences run on for a while before they finally come to a stop at the end.", 1},
        {"Yes. No. Maybe.", 3},
        {"Photosynthesis converts electromagnetic radiation into chemical energy.", 1},
        {"I think so. Do you? Perhaps not.", 3},
        {"Evaluation of candidate responses requires careful attention to detail.", 1},
        {"Go home now. Eat dinner. Sleep well tonight.", 3},
    };
    for (const auto& [text, sentences] : fixtures) {
      CAPTURE(text);
      CHECK(split_sentences(text).size() == static_cast<std::size_t>(sentences));
      CHECK(std::abs(coleman_liau(text) - oracle_coleman_liau(text, sentences)) < 1e-6);
    }
  }

  TEST_CASE("syntax heuristics") {
    const auto go = syntax_features("Go.");
    CHECK(go.syntax_tree_depth == 1.0);
    CHECK(go.average_dependency_length == 0.0);
    CHECK(syntax_features("It was eaten.").passive_voice_ratio == doctest::Approx(1.0));
    CHECK(syntax_features("I left because it rained.").subordinate_clause_rate == doctest::Approx(1.0));
    CHECK(syntax_features("I left because it rained because we knew that it would.").syntax_tree_depth >
          syntax_features("I left.").syntax_tree_depth);
  }

  TEST_CASE("discourse features") {
    const auto r = discourse_features(tagged("however it may rain"));
    CHECK(r.hedging_frequency == doctest::Approx(0.25));
    CHECK(r.discourse_marker_rate == doctest::Approx(0.25));
    const auto none = discourse_features(tagged("the cat sat"));
    CHECK(none.hedging_frequency == 0.0);
    CHECK(none.discourse_marker_rate == 0.0);
    CHECK(discourse_features(tagged("may possibly")).hedging_frequency == doctest::Approx(1.0));
  }

  TEST_CASE("multi-word lexicon entries") {
    const Lexicon markers = Lexicon::parse("# comment\non the other hand\n\nhowever\n");
    CHECK(markers.entries().size() == 2);
    CHECK(markers.longest() == 4);
    const auto r = discourse_features(tagged("on the other hand it works"), Lexicon::parse(""), markers);
    CHECK(r.discourse_marker_rate == doctest::Approx(1.0 / 6.0));
    CHECK(Lexicon::parse("a\nb\n").hash() != Lexicon::parse("a\nc\n").hash());
  }

  TEST_CASE("tagger suffix heuristics") {
    const auto& t = RuleTagger::default_tagger();
    CHECK(t.tag_word("quickly") == PosTag::Adv);
    CHECK(t.tag_word("zorbation") == PosTag::Noun);
    CHECK(t.tag_word("they") == PosTag::Pron);
    const auto custom = RuleTagger::from_lexicon_text("blorp\tVERB\n");
    CHECK(custom.tag_word("blorp") == PosTag::Verb);
  }

  TEST_CASE("analyzers are pluggable") {
    const ConstantTagger nouns(PosTag::Noun);
    Analyzers a;
    a.tagger = &nouns;
    const auto r = analyze_text("walk run jump", a);
    CHECK(r.adjective_ratio == 0.0);
    CHECK(r.noun_verb_ratio == 3.0);  // no verbs: nouns over 1
  }

  TEST_CASE("pointwise extraction") {
    const auto b = extract_linguistic(jk_test::pointwise("c", "Hello world. How are you?", {{"q", 1}}));
    CHECK(field(b, "ling.word_count") == 5);
    CHECK(b.names == linguistic_feature_names(JudgmentType::Pointwise, 0));
    CHECK(b.size() == LinguisticRecord::kFieldCount);
  }

  TEST_CASE("pairwise extraction") {
    JudgmentInstance inst;
    inst.candidate.id = "p";
    inst.candidate.responses = {"Same text here. Twice.", "Same text here. Twice."};
    inst.score = PairwiseScore{1};
    const auto b = extract_linguistic(inst);
    CHECK(b.names == linguistic_feature_names(JudgmentType::Pairwise, 0));
    int diffs = 0;
    for (std::size_t i = 0; i < b.size(); ++i)
      if (b.names[i].rfind("ling.diff.", 0) == 0) {
        ++diffs;
        CHECK(b.values[i] == 0.0);
      }
    CHECK(diffs == static_cast<int>(LinguisticRecord::kFieldCount));

    inst.candidate.responses = {"One two three four.", "One two."};
    const auto d = extract_linguistic(inst);
    CHECK(field(d, "ling.diff.word_count") == field(d, "ling.r1.word_count") - field(d, "ling.r2.word_count"));
    CHECK(field(d, "ling.diff.word_count") == 2);
  }

  TEST_CASE("listwise extraction pads missing items") {
    JudgmentInstance inst;
    inst.candidate.id = "l";
    inst.candidate.responses = {"First answer.", "Second answer is longer."};
    inst.score = ListwiseScore{{3, 5}, {1, 0}};
    const auto b = extract_linguistic(inst, 3);
    CHECK(b.names == linguistic_feature_names(JudgmentType::Listwise, 3));
    CHECK(field(b, "ling.item0.present") == 1.0);
    CHECK(field(b, "ling.item2.present") == 0.0);
    for (std::size_t i = 0; i < b.size(); ++i)
      if (b.names[i].rfind("ling.item2.", 0) == 0 && b.names[i] != "ling.item2.present") {
        CHECK(b.values[i] == 0.0);
        CHECK(b.present[i] == 0);
      }
    // Consecutive ranked items: best is item 1, then item 0.
    CHECK(field(b, "ling.rankdiff0.word_count") == 4 - 2);
  }

  TEST_CASE("extraction is deterministic") {
    const auto inst = jk_test::pointwise("c", "Moreover, it may work; however, we doubt it. Really?", {{"q", 1}});
    const auto a = extract_linguistic(inst), b = extract_linguistic(inst);
    CHECK(a.values == b.values);
  }

  TEST_CASE("utf-8 text counts code points") {
    const auto r = length_features("caf\xC3\xA9 na\xC3\xAFve.");
    CHECK(r.word_count == 2);
    CHECK(r.char_count == 11);
  }
}
