#ifndef ANMT_TEXTPREP_HPP
#define ANMT_TEXTPREP_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace anmt {

// Ordered character rewrite table over Unicode code points. Rules are
// applied in a single left-to-right scan (longest FROM wins at each
// position) and the scan is iterated to a fixpoint, so normalize() is
// idempotent by construction. Construction rejects tables whose
// replacement strings are not themselves normalization-stable.
class NormalizationRuleSet {
 public:
  // The built-in Arabic table: hamza-carrying alefs and alef madda to
  // bare alef, alef maqsura to ya, tashkeel (U+064B..U+0652) and
  // tatweel (U+0640) removed, teh marbuta untouched.
  static NormalizationRuleSet arabic_default();

  // One rule per line: "FROM<TAB>TO", both literal UTF-8 code point
  // sequences, TO possibly empty. '#' starts a comment line.
  static NormalizationRuleSet load(const std::string& path);
  static NormalizationRuleSet parse(const std::vector<std::string>& lines);

  std::string normalize(const std::string& text) const;

  size_t rule_count() const { return rules_.size(); }

 private:
  struct Rule {
    std::u32string from;
    std::u32string to;
  };

  void validate() const;
  std::u32string apply_once(const std::u32string& text) const;

  std::vector<Rule> rules_;
};

// Clitic-segmented surface tokens. Proclitics carry a trailing '+'
// ("w+", "Al+"), enclitics a leading '+' ("+hA"). Concatenating the
// tokens and removing the edge markers reproduces the input exactly.
struct SegmentedSentence {
  std::vector<std::string> tokens;
};

// Deterministic ATB-style affix segmenter. Proclitics are peeled as a
// chain (conjunction, then preposition/future particle, then the
// determiner) and the chain is accepted only when it reaches the
// determiner with at least 2 code points of stem left; this keeps words
// like ktAb (whose first letter coincides with the preposition k) and
// wAld (where the determiner peel would strand a 1-letter stem) intact.
// Enclitic pronouns are peeled once from the end, longest first, with a
// minimum stem of 2 code points (3 for single-letter enclitics).
class AffixLexicon {
 public:
  static AffixLexicon arabic_default();

  // One affix per line: "AFFIX<TAB>P" (proclitic) or "AFFIX<TAB>E"
  // (enclitic). Proclitic order in the file is the chain order and the
  // final P entry is the determiner. '#' starts a comment line.
  static AffixLexicon load(const std::string& path);
  static AffixLexicon parse(const std::vector<std::string>& lines);

  SegmentedSentence segment(const std::string& normalized) const;

  size_t proclitic_count() const { return proclitics_.size(); }
  size_t enclitic_count() const { return enclitics_.size(); }

 private:
  std::vector<std::u32string> proclitics_;  // chain order, last = determiner
  std::vector<std::u32string> enclitics_;   // tried in listed order

  std::vector<std::u32string> segment_word(const std::u32string& word) const;
};

// Inverse of segment() on its own output: joins '+'-marked clitics back
// onto their stems. A marker pointing past the sentence edge is a
// format error.
std::string desegment(const SegmentedSentence& tokens);

// Keep/drop decision for a parallel pair: drop iff either side is empty
// or exceeds max_len tokens (boundary inclusive). Lengths are counted
// in post-segmentation, pre-BPE tokens.
bool filter_pair(size_t src_len, size_t tgt_len, size_t max_len);

// English-side tokenizer: whitespace split plus peeling of ASCII
// punctuation at token edges; case preserved unless lowercase is set.
std::vector<std::string> tokenize_english(const std::string& line, bool lowercase);

// Per-line preprocessing as used by the pipeline: normalize + segment
// for Arabic, punctuation tokenization for English.
struct Textprep {
  NormalizationRuleSet rules = NormalizationRuleSet::arabic_default();
  AffixLexicon affixes = AffixLexicon::arabic_default();

  std::string preprocess_arabic_line(const std::string& line) const;
  std::string preprocess_english_line(const std::string& line, bool lowercase) const;
};

}  // namespace anmt

#endif
