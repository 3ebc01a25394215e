#include "anmt/subword.hpp"

#include <map>
#include <random>
#include <set>

#include <doctest.h>

#include "anmt/error.hpp"
#include "anmt/util.hpp"
#include "test_util.hpp"

using namespace anmt;

namespace {

// Independent brute-force pair counter: splits every word into code
// points + "</w>" on the last symbol and counts adjacent pairs.
std::map<std::pair<std::string, std::string>, long long> brute_force_pairs(
    const std::vector<std::vector<std::string>>& corpus) {
  std::map<std::pair<std::string, std::string>, long long> counts;
  for (const auto& sentence : corpus) {
    for (const auto& word : sentence) {
      std::vector<std::string> symbols;
      const std::u32string cps = utf8_decode(word);
      for (char32_t cp : cps) symbols.push_back(utf8_encode(std::u32string(1, cp)));
      if (symbols.empty()) continue;
      symbols.back() += "</w>";
      for (size_t i = 0; i + 1 < symbols.size(); ++i) {
        ++counts[{symbols[i], symbols[i + 1]}];
      }
    }
  }
  return counts;
}

std::vector<std::vector<std::string>> toy_corpus() {
  std::vector<std::vector<std::string>> corpus;
  for (int i = 0; i < 5; ++i) corpus.push_back({"low"});
  for (int i = 0; i < 2; ++i) corpus.push_back({"lower"});
  for (int i = 0; i < 6; ++i) corpus.push_back({"newest"});
  for (int i = 0; i < 3; ++i) corpus.push_back({"widest"});
  return corpus;
}

}  // namespace

TEST_CASE("first learned merge is the brute-force most frequent pair") {
  const auto corpus = toy_corpus();
  const auto counts = brute_force_pairs(corpus);
  std::pair<std::string, std::string> expected;
  long long best = 0;
  for (const auto& [pair, count] : counts) {
    if (count > best) {
      best = count;
      expected = pair;
    }
  }
  const MergeTable table = learn_bpe(corpus, 1);
  REQUIRE(table.merges.size() == 1);
  CHECK(table.merges[0] == expected);
  // Frozen from the oracle: ("e","s") and ("s","t</w>") tie at 9, the
  // lexicographically smaller pair wins.
  CHECK(table.merges[0] == std::pair<std::string, std::string>{"e", "s"});
}

TEST_CASE("zero merges yields an empty table") {
  const MergeTable table = learn_bpe(toy_corpus(), 0);
  CHECK(table.merges.empty());
}

TEST_CASE("single word aaaa merges (a, a)") {
  const MergeTable table = learn_bpe({{"aaaa"}}, 1);
  REQUIRE(table.merges.size() == 1);
  CHECK(table.merges[0] == std::pair<std::string, std::string>{"a", "a"});
}

TEST_CASE("empty corpus is an input error") {
  CHECK_THROWS_AS(learn_bpe({}, 1), Error);
  try {
    learn_bpe({{}, {}}, 1);
    FAIL("expected input error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Input);
  }
}

TEST_CASE("vocabulary cap stops merging early") {
  const auto corpus = toy_corpus();
  // Character inventory: l o w</w> w e r</w> n s t</w> i d = 11 symbols
  // (+4 reserved = 15). A cap of 17 leaves room for two new symbols.
  const MergeTable unlimited = learn_bpe(corpus, 50, 90000);
  CHECK(unlimited.merges.size() > 2);
  const MergeTable capped = learn_bpe(corpus, 50, 17);
  std::set<std::string> symbols;
  for (const auto& sentence : corpus) {
    for (const auto& word : sentence) {
      for (char32_t cp : utf8_decode(word)) {
        symbols.insert(utf8_encode(std::u32string(1, cp)));
      }
    }
  }
  // Recompute the inventory the way learn_bpe sees it (with </w>).
  const auto pairs = brute_force_pairs(corpus);
  std::set<std::string> inventory;
  for (const auto& [pair, count] : pairs) {
    inventory.insert(pair.first);
    inventory.insert(pair.second);
  }
  size_t new_symbols = 0;
  std::set<std::string> seen = inventory;
  for (const auto& [left, right] : capped.merges) {
    if (seen.insert(left + right).second) ++new_symbols;
  }
  CHECK(inventory.size() + 4 + new_symbols <= 17);
}

TEST_CASE("apply_bpe leaves unseen words as characters, no UNK") {
  const MergeTable table = learn_bpe(toy_corpus(), 10);
  const auto out = apply_bpe({"zzq"}, table);
  CHECK(out == std::vector<std::string>{"z@@", "z@@", "q"});
}

TEST_CASE("a fully merged word becomes one token") {
  std::vector<std::vector<std::string>> corpus;
  for (int i = 0; i < 10; ++i) corpus.push_back({"cat"});
  const MergeTable table = learn_bpe(corpus, 10);
  CHECK(apply_bpe({"cat"}, table) == std::vector<std::string>{"cat"});
}

TEST_CASE("apply_bpe is deterministic") {
  const MergeTable table = learn_bpe(toy_corpus(), 8);
  const std::vector<std::string> sentence = {"lowest", "newer", "wide"};
  CHECK(apply_bpe(sentence, table) == apply_bpe(sentence, table));
}

TEST_CASE("decode_bpe inverts apply_bpe on random corpus lines") {
  const auto corpus = toy_corpus();
  const MergeTable table = learn_bpe(corpus, 6);
  const std::vector<std::string> words = {"low",  "lower", "newest", "widest",
                                          "wild", "unrelated", "x"};
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<size_t> pick(0, words.size() - 1);
  std::uniform_int_distribution<size_t> len(1, 10);
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::string> sentence;
    const size_t n = len(rng);
    for (size_t k = 0; k < n; ++k) sentence.push_back(words[pick(rng)]);
    CHECK(decode_bpe(apply_bpe(sentence, table)) == sentence);
  }
}

TEST_CASE("decode_bpe handles the plain cases") {
  CHECK(decode_bpe({"un@@", "related"}) == std::vector<std::string>{"unrelated"});
  CHECK(decode_bpe({"cat"}) == std::vector<std::string>{"cat"});
  CHECK(decode_bpe({}) == std::vector<std::string>{});
}

TEST_CASE("decode_bpe rejects a trailing continuation marker") {
  try {
    decode_bpe({"un@@"});
    FAIL("expected format error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
  }
}

TEST_CASE("apply_bpe emits only known symbols") {
  const auto corpus = toy_corpus();
  const MergeTable table = learn_bpe(corpus, 12);
  std::set<std::string> allowed;
  for (const auto& [pair, count] : brute_force_pairs(corpus)) {
    allowed.insert(pair.first);
    allowed.insert(pair.second);
  }
  for (const auto& [left, right] : table.merges) allowed.insert(left + right);
  for (const auto& sentence : corpus) {
    for (const auto& piece : apply_bpe(sentence, table)) {
      std::string internal = piece;
      if (internal.size() >= 2 && internal.substr(internal.size() - 2) == "@@") {
        internal = internal.substr(0, internal.size() - 2);
      } else {
        internal += "</w>";
      }
      CHECK(allowed.count(internal));
    }
  }
}

TEST_CASE("merge table round trips through its file format") {
  testutil::TempDir tmp("bpe");
  const MergeTable table = learn_bpe(toy_corpus(), 5);
  const std::string path = tmp.file("codes.bpe");
  table.save(path);
  const MergeTable loaded = MergeTable::load(path);
  CHECK(loaded.merges == table.merges);
  const auto lines = read_lines(path);
  REQUIRE(!lines.empty());
  CHECK(lines[0].rfind("#version", 0) == 0);
}

TEST_CASE("vocabulary ranks by frequency then lexicographic and caps") {
  const std::vector<std::vector<std::string>> corpus = {
      {"b", "b", "b"}, {"a", "a", "c"}, {"a"}};
  const Vocabulary small = Vocabulary::build(corpus, 90000);
  CHECK(small.size() == 7);
  CHECK(small.decode(4) == "a");  // freq 3, ties with b broken lexicographically
  CHECK(small.decode(5) == "b");
  CHECK(small.decode(6) == "c");

  const Vocabulary capped = Vocabulary::build(corpus, 6);
  CHECK(capped.size() == 6);
  CHECK(capped.encode("c") == Vocabulary::kUnk);  // lowest frequency dropped
}

TEST_CASE("vocabulary encode/decode is a bijection over ids") {
  const Vocabulary vocab =
      Vocabulary::build({{"alpha", "beta", "gamma", "beta"}}, 90000);
  for (size_t id = 0; id < vocab.size(); ++id) {
    CHECK(vocab.encode(vocab.decode(static_cast<int32_t>(id))) ==
          static_cast<int32_t>(id));
  }
  CHECK_THROWS_AS(vocab.decode(static_cast<int32_t>(vocab.size())), Error);
  CHECK_THROWS_AS(vocab.decode(-1), Error);
}

TEST_CASE("vocabulary file format round trips with contiguous ids") {
  testutil::TempDir tmp("vocab");
  const Vocabulary vocab = Vocabulary::build({{"x", "y", "x"}}, 90000);
  const std::string path = tmp.file("vocab.tsv");
  vocab.save(path);
  const Vocabulary loaded = Vocabulary::load(path);
  CHECK(loaded.size() == vocab.size());
  CHECK(loaded.content_hash() == vocab.content_hash());
  CHECK(loaded.encode("y") == vocab.encode("y"));

  // ids must be contiguous from 0
  tmp.write("bad.tsv", {"<pad>\t0", "<s>\t1", "</s>\t2", "<unk>\t3", "tok\t7"});
  CHECK_THROWS_AS(Vocabulary::load(tmp.file("bad.tsv")), Error);
}

TEST_CASE("encode_line appends EOS and maps OOV to UNK") {
  const Vocabulary vocab = Vocabulary::build({{"hello"}}, 90000);
  const auto ids = vocab.encode_line("hello stranger", true);
  REQUIRE(ids.size() == 3);
  CHECK(ids[0] == vocab.encode("hello"));
  CHECK(ids[1] == Vocabulary::kUnk);
  CHECK(ids[2] == Vocabulary::kEos);
}
