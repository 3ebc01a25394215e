#include "anmt/textprep.hpp"

#include <algorithm>
#include <cctype>

#include "anmt/error.hpp"
#include "anmt/util.hpp"

namespace anmt {

namespace {

constexpr char32_t kAlefMadda = 0x0622;
constexpr char32_t kAlefHamzaAbove = 0x0623;
constexpr char32_t kAlefHamzaBelow = 0x0625;
constexpr char32_t kBareAlef = 0x0627;
constexpr char32_t kAlefMaqsura = 0x0649;
constexpr char32_t kYa = 0x064A;
constexpr char32_t kTatweel = 0x0640;

constexpr char32_t kWaw = 0x0648;
constexpr char32_t kFa = 0x0641;
constexpr char32_t kBa = 0x0628;
constexpr char32_t kKaf = 0x0643;
constexpr char32_t kLam = 0x0644;
constexpr char32_t kSin = 0x0633;
constexpr char32_t kAlef = 0x0627;
constexpr char32_t kHa = 0x0647;
constexpr char32_t kMim = 0x0645;
constexpr char32_t kNun = 0x0646;

}  // namespace

NormalizationRuleSet NormalizationRuleSet::arabic_default() {
  NormalizationRuleSet rs;
  const auto one = [&](char32_t from, std::u32string to) {
    rs.rules_.push_back({std::u32string(1, from), std::move(to)});
  };
  one(kAlefHamzaAbove, std::u32string(1, kBareAlef));
  one(kAlefHamzaBelow, std::u32string(1, kBareAlef));
  one(kAlefMadda, std::u32string(1, kBareAlef));
  one(kAlefMaqsura, std::u32string(1, kYa));
  one(kTatweel, U"");
  for (char32_t cp = 0x064B; cp <= 0x0652; ++cp) {
    one(cp, U"");
  }
  rs.validate();
  return rs;
}

NormalizationRuleSet NormalizationRuleSet::load(const std::string& path) {
  return parse(read_lines(path));
}

NormalizationRuleSet NormalizationRuleSet::parse(const std::vector<std::string>& lines) {
  NormalizationRuleSet rs;
  size_t lineno = 0;
  for (const auto& raw : lines) {
    ++lineno;
    if (raw.empty() || raw[0] == '#') continue;
    const auto tab = raw.find('\t');
    if (tab == std::string::npos) {
      fail(ErrorKind::Format,
           "rule file line " + std::to_string(lineno) + ": expected FROM<TAB>TO");
    }
    Rule rule;
    rule.from = utf8_decode(raw.substr(0, tab));
    rule.to = utf8_decode(raw.substr(tab + 1));
    if (rule.from.empty()) {
      fail(ErrorKind::Format,
           "rule file line " + std::to_string(lineno) + ": empty FROM");
    }
    rs.rules_.push_back(std::move(rule));
  }
  rs.validate();
  return rs;
}

void NormalizationRuleSet::validate() const {
  for (const auto& rule : rules_) {
    // Replacements must be fixpoints of the table, otherwise a single
    // pass is not idempotent.
    std::u32string cur = rule.to;
    for (int iter = 0; iter < 8; ++iter) {
      std::u32string next = apply_once(cur);
      if (next == cur) break;
      cur = std::move(next);
      if (iter == 7) {
        fail(ErrorKind::Config, "rule table does not reach a fixpoint");
      }
    }
    if (cur != rule.to) {
      fail(ErrorKind::Config,
           "rule replacement '" + utf8_encode(rule.to) +
               "' is not normalization-stable");
    }
  }
}

std::u32string NormalizationRuleSet::apply_once(const std::u32string& text) const {
  std::u32string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    const Rule* hit = nullptr;
    size_t hit_len = 0;
    for (const auto& rule : rules_) {
      if (rule.from.size() > hit_len && rule.from.size() <= text.size() - i &&
          text.compare(i, rule.from.size(), rule.from) == 0) {
        hit = &rule;
        hit_len = rule.from.size();
      }
    }
    if (hit) {
      out += hit->to;
      i += hit_len;
    } else {
      out.push_back(text[i]);
      ++i;
    }
  }
  return out;
}

std::string NormalizationRuleSet::normalize(const std::string& text) const {
  std::u32string cur = utf8_decode(text);
  for (int iter = 0; iter < 8; ++iter) {
    std::u32string next = apply_once(cur);
    if (next == cur) return utf8_encode(cur);
    cur = std::move(next);
  }
  fail(ErrorKind::Config, "rule table does not reach a fixpoint");
}

AffixLexicon AffixLexicon::arabic_default() {
  AffixLexicon lex;
  lex.proclitics_ = {
      std::u32string(1, kWaw),              // conjunction w
      std::u32string(1, kFa),               // conjunction f
      std::u32string(1, kBa),               // preposition b
      std::u32string(1, kKaf),              // preposition k
      std::u32string(1, kLam),              // preposition l
      std::u32string(1, kSin),              // future particle s
      std::u32string({kAlef, kLam}),        // determiner Al, chain terminal
  };
  lex.enclitics_ = {
      std::u32string({kHa, kMim, kAlef}),   // hmA
      std::u32string({kKaf, kMim, kAlef}),  // kmA
      std::u32string({kHa, kMim}),          // hm
      std::u32string({kHa, kNun}),          // hn
      std::u32string({kKaf, kMim}),         // km
      std::u32string({kKaf, kNun}),         // kn
      std::u32string({kHa, kAlef}),         // hA
      std::u32string({kNun, kAlef}),        // nA
      std::u32string({kNun, kYa}),          // ny
      std::u32string(1, kHa),               // h
      std::u32string(1, kKaf),              // k
      std::u32string(1, kYa),               // y
  };
  return lex;
}

AffixLexicon AffixLexicon::load(const std::string& path) {
  return parse(read_lines(path));
}

AffixLexicon AffixLexicon::parse(const std::vector<std::string>& lines) {
  AffixLexicon lex;
  size_t lineno = 0;
  for (const auto& raw : lines) {
    ++lineno;
    if (raw.empty() || raw[0] == '#') continue;
    const auto tab = raw.find('\t');
    if (tab == std::string::npos) {
      fail(ErrorKind::Format,
           "affix file line " + std::to_string(lineno) + ": expected AFFIX<TAB>P|E");
    }
    const std::u32string affix = utf8_decode(raw.substr(0, tab));
    const std::string side = raw.substr(tab + 1);
    if (affix.empty()) {
      fail(ErrorKind::Format,
           "affix file line " + std::to_string(lineno) + ": empty affix");
    }
    if (side == "P") {
      lex.proclitics_.push_back(affix);
    } else if (side == "E") {
      lex.enclitics_.push_back(affix);
    } else {
      fail(ErrorKind::Format, "affix file line " + std::to_string(lineno) +
                                  ": side marker must be P or E, got '" + side + "'");
    }
  }
  return lex;
}

std::vector<std::u32string> AffixLexicon::segment_word(const std::u32string& word) const {
  // Tokens already containing '+' are left alone: the marker would be
  // ambiguous with our own join markers.
  if (word.find(U'+') != std::u32string::npos) return {word};

  std::vector<std::u32string> proclitics;
  std::u32string rest = word;

  if (!proclitics_.empty()) {
    const std::u32string& determiner = proclitics_.back();
    std::vector<std::u32string> chain;
    std::u32string tail = word;
    bool reached_det = false;
    for (const auto& p : proclitics_) {
      if (tail.size() > p.size() && tail.compare(0, p.size(), p) == 0) {
        // A peel is only tentative until the determiner is reached.
        if (&p == &determiner) {
          if (tail.size() - p.size() >= 2) {
            chain.push_back(p);
            tail = tail.substr(p.size());
            reached_det = true;
          }
          break;
        }
        chain.push_back(p);
        tail = tail.substr(p.size());
      }
    }
    if (reached_det) {
      proclitics = std::move(chain);
      rest = tail;
    }
  }

  std::u32string enclitic;
  for (const auto& e : enclitics_) {
    const size_t min_stem = (e.size() == 1) ? 3 : 2;
    if (rest.size() >= e.size() + min_stem &&
        rest.compare(rest.size() - e.size(), e.size(), e) == 0) {
      enclitic = e;
      rest = rest.substr(0, rest.size() - e.size());
      break;
    }
  }

  std::vector<std::u32string> out;
  for (const auto& p : proclitics) out.push_back(p + U"+");
  out.push_back(rest);
  if (!enclitic.empty()) out.push_back(U"+" + enclitic);
  return out;
}

SegmentedSentence AffixLexicon::segment(const std::string& normalized) const {
  SegmentedSentence seg;
  for (const auto& word : split_ws(normalized)) {
    for (const auto& piece : segment_word(utf8_decode(word))) {
      if (!piece.empty()) seg.tokens.push_back(utf8_encode(piece));
    }
  }
  return seg;
}

std::string desegment(const SegmentedSentence& tokens) {
  std::vector<std::string> words;
  bool join_next = false;
  for (size_t i = 0; i < tokens.tokens.size(); ++i) {
    std::string tok = tokens.tokens[i];
    if (tok.empty()) fail(ErrorKind::Format, "empty token in segmented sentence");
    bool joins_left = tok.size() > 1 && tok.front() == '+';
    bool joins_right = tok.size() > 1 && tok.back() == '+';
    if (tok == "+") {
      fail(ErrorKind::Format,
           "bare join marker at token " + std::to_string(i));
    }
    if (joins_left) tok = tok.substr(1);
    if (joins_right) tok = tok.substr(0, tok.size() - 1);
    if (joins_left || join_next) {
      if (words.empty()) {
        fail(ErrorKind::Format,
             "join marker at token " + std::to_string(i) +
                 " points past the sentence start");
      }
      words.back() += tok;
    } else {
      words.push_back(tok);
    }
    join_next = joins_right;
  }
  if (join_next) {
    fail(ErrorKind::Format, "trailing join marker at sentence end");
  }
  return join_ws(words);
}

bool filter_pair(size_t src_len, size_t tgt_len, size_t max_len) {
  if (src_len == 0 || tgt_len == 0) return false;
  return src_len <= max_len && tgt_len <= max_len;
}

std::vector<std::string> tokenize_english(const std::string& line, bool lowercase) {
  std::vector<std::string> out;
  const auto is_punct = [](char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
  };
  for (auto& word : split_ws(line)) {
    std::string w = word;
    if (lowercase) {
      std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
      });
    }
    std::vector<std::string> lead;
    while (w.size() > 1 && is_punct(w.front())) {
      lead.push_back(std::string(1, w.front()));
      w.erase(w.begin());
    }
    std::vector<std::string> trail;
    while (w.size() > 1 && is_punct(w.back())) {
      trail.insert(trail.begin(), std::string(1, w.back()));
      w.pop_back();
    }
    for (auto& t : lead) out.push_back(std::move(t));
    out.push_back(std::move(w));
    for (auto& t : trail) out.push_back(std::move(t));
  }
  return out;
}

std::string Textprep::preprocess_arabic_line(const std::string& line) const {
  return join_ws(affixes.segment(rules.normalize(line)).tokens);
}

std::string Textprep::preprocess_english_line(const std::string& line,
                                              bool lowercase) const {
  return join_ws(tokenize_english(line, lowercase));
}

}  // namespace anmt
