#ifndef ANMT_SUBWORD_HPP
#define ANMT_SUBWORD_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace anmt {

// Ordered byte-pair merges; list index is priority (0 = first learned).
// Symbols are UTF-8 strings; a word-final symbol carries the "</w>"
// suffix internally and is serialized without it, while non-final
// symbols are serialized with the "@@" continuation marker.
struct MergeTable {
  std::vector<std::pair<std::string, std::string>> merges;

  static MergeTable load(const std::string& path);
  void save(const std::string& path) const;
};

// Greedy BPE over word frequencies from both language sides. Each word
// is split into code points with "</w>" appended to the last one; the
// most frequent adjacent pair is merged, ties broken lexicographically
// by (left, right). Stops early when the running symbol inventory
// (reserved ids + characters + merge outputs) would exceed vocab_cap.
MergeTable learn_bpe(const std::vector<std::vector<std::string>>& corpus,
                     size_t num_merges, size_t vocab_cap = 90000);

// Applies merges in priority order to each word until no merge fits.
// Unknown characters stay single symbols; no UNK is ever produced.
std::vector<std::string> apply_bpe(const std::vector<std::string>& tokens,
                                   const MergeTable& merges);

// Inverse of apply_bpe: joins "@@"-continued pieces. A continuation
// marker on the final subword of the sentence is a format error.
std::vector<std::string> decode_bpe(const std::vector<std::string>& subwords);

// Token/id bijection with reserved ids 0..3 (<pad>, <s>, </s>, <unk>).
class Vocabulary {
 public:
  static constexpr int32_t kPad = 0;
  static constexpr int32_t kBos = 1;
  static constexpr int32_t kEos = 2;
  static constexpr int32_t kUnk = 3;

  Vocabulary();

  // Ranks tokens by frequency (ties lexicographic) and keeps the top
  // cap - 4 of them after the reserved ids.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                          size_t cap);

  static Vocabulary load(const std::string& path);
  void save(const std::string& path) const;

  int32_t encode(const std::string& token) const;  // OOV -> kUnk
  const std::string& decode(int32_t id) const;     // out of range -> Index error
  std::vector<int32_t> encode_line(const std::string& line, bool append_eos) const;

  size_t size() const { return id_to_token_.size(); }
  std::uint64_t content_hash() const;

 private:
  std::unordered_map<std::string, int32_t> token_to_id_;
  std::vector<std::string> id_to_token_;
};

}  // namespace anmt

#endif
