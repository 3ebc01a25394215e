#include "anmt/subword.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "anmt/error.hpp"
#include "anmt/util.hpp"

namespace anmt {

namespace {

constexpr const char* kEow = "</w>";
constexpr const char* kCont = "@@";

// Code point split with "</w>" glued onto the last symbol.
std::vector<std::string> word_symbols(const std::string& word) {
  std::u32string cps = utf8_decode(word);
  std::vector<std::string> symbols;
  symbols.reserve(cps.size());
  for (char32_t cp : cps) {
    symbols.push_back(utf8_encode(std::u32string(1, cp)));
  }
  if (!symbols.empty()) symbols.back() += kEow;
  return symbols;
}

using Pair = std::pair<std::string, std::string>;

}  // namespace

MergeTable MergeTable::load(const std::string& path) {
  MergeTable table;
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0].rfind("#version", 0) != 0) {
    fail(ErrorKind::Format, "merge file missing #version header: " + path);
  }
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto space = lines[i].find(' ');
    if (space == std::string::npos || space == 0 || space + 1 == lines[i].size()) {
      fail(ErrorKind::Format,
           "merge file line " + std::to_string(i + 1) + ": expected LEFT RIGHT");
    }
    table.merges.emplace_back(lines[i].substr(0, space), lines[i].substr(space + 1));
  }
  return table;
}

void MergeTable::save(const std::string& path) const {
  std::vector<std::string> lines;
  lines.push_back("#version 1");
  for (const auto& [left, right] : merges) {
    lines.push_back(left + " " + right);
  }
  write_lines(path, lines);
}

MergeTable learn_bpe(const std::vector<std::vector<std::string>>& corpus,
                     size_t num_merges, size_t vocab_cap) {
  if (corpus.empty()) fail(ErrorKind::Input, "learn_bpe: empty corpus");

  // Word-type frequencies; all counting below is over types weighted by
  // count, which keeps the merge loop independent of corpus order.
  std::map<std::string, long long> word_freq;
  bool any_token = false;
  for (const auto& sentence : corpus) {
    for (const auto& token : sentence) {
      if (token.empty()) continue;
      ++word_freq[token];
      any_token = true;
    }
  }
  if (!any_token) fail(ErrorKind::Input, "learn_bpe: corpus has no tokens");

  std::vector<std::vector<std::string>> words;
  std::vector<long long> counts;
  words.reserve(word_freq.size());
  for (const auto& [word, count] : word_freq) {
    words.push_back(word_symbols(word));
    counts.push_back(count);
  }

  // Running symbol inventory for the vocabulary cap: reserved ids plus
  // every character symbol, plus one per accepted merge.
  std::set<std::string> symbols;
  for (const auto& w : words) symbols.insert(w.begin(), w.end());
  size_t vocab_size = symbols.size() + 4;
  if (vocab_size > vocab_cap) {
    fail(ErrorKind::Config,
         "character inventory alone exceeds the vocabulary cap (" +
             std::to_string(vocab_size) + " > " + std::to_string(vocab_cap) + ")");
  }

  std::map<Pair, long long> pair_counts;
  std::map<Pair, std::set<size_t>> pair_words;
  const auto count_word = [&](size_t wi, long long sign) {
    const auto& w = words[wi];
    for (size_t k = 0; k + 1 < w.size(); ++k) {
      Pair p{w[k], w[k + 1]};
      pair_counts[p] += sign * counts[wi];
      if (sign > 0) {
        pair_words[p].insert(wi);
      }
    }
  };
  for (size_t wi = 0; wi < words.size(); ++wi) count_word(wi, +1);

  MergeTable table;
  for (size_t step = 0; step < num_merges; ++step) {
    // Most frequent pair; ties broken lexicographically by (left, right).
    Pair best;
    long long best_count = 0;
    for (const auto& [pair, count] : pair_counts) {
      if (count > best_count) {
        best = pair;
        best_count = count;
      }
    }
    if (best_count <= 0) break;

    const std::string merged = best.first + best.second;
    if (!symbols.count(merged)) {
      if (vocab_size + 1 > vocab_cap) break;
      symbols.insert(merged);
      ++vocab_size;
    }
    table.merges.push_back(best);

    // Rewrite only the words that contain the merged pair.
    const std::set<size_t> affected = pair_words[best];
    for (size_t wi : affected) {
      count_word(wi, -1);
      auto& w = words[wi];
      std::vector<std::string> next;
      next.reserve(w.size());
      for (size_t k = 0; k < w.size(); ++k) {
        if (k + 1 < w.size() && w[k] == best.first && w[k + 1] == best.second) {
          next.push_back(merged);
          ++k;
        } else {
          next.push_back(w[k]);
        }
      }
      w = std::move(next);
      count_word(wi, +1);
    }
    pair_counts.erase(best);
    pair_words.erase(best);
    for (auto it = pair_counts.begin(); it != pair_counts.end();) {
      it = (it->second <= 0) ? pair_counts.erase(it) : std::next(it);
    }
  }
  return table;
}

std::vector<std::string> apply_bpe(const std::vector<std::string>& tokens,
                                   const MergeTable& merges) {
  std::map<Pair, size_t> priority;
  for (size_t i = 0; i < merges.merges.size(); ++i) {
    priority.emplace(merges.merges[i], i);
  }

  std::vector<std::string> out;
  for (const auto& token : tokens) {
    if (token.empty()) continue;
    std::vector<std::string> w = word_symbols(token);
    while (w.size() > 1) {
      // Highest-priority applicable merge, applied left to right.
      size_t best_rank = merges.merges.size();
      for (size_t k = 0; k + 1 < w.size(); ++k) {
        auto it = priority.find({w[k], w[k + 1]});
        if (it != priority.end() && it->second < best_rank) {
          best_rank = it->second;
        }
      }
      if (best_rank == merges.merges.size()) break;
      const Pair& target = merges.merges[best_rank];
      std::vector<std::string> next;
      next.reserve(w.size());
      for (size_t k = 0; k < w.size(); ++k) {
        if (k + 1 < w.size() && w[k] == target.first && w[k + 1] == target.second) {
          next.push_back(w[k] + w[k + 1]);
          ++k;
        } else {
          next.push_back(w[k]);
        }
      }
      w = std::move(next);
    }
    // Serialize: strip "</w>", mark non-final pieces with "@@".
    for (size_t k = 0; k < w.size(); ++k) {
      std::string piece = w[k];
      const bool final_piece =
          piece.size() >= 4 && piece.compare(piece.size() - 4, 4, kEow) == 0;
      if (final_piece) {
        piece.resize(piece.size() - 4);
        out.push_back(piece);
      } else {
        out.push_back(piece + kCont);
      }
    }
  }
  return out;
}

std::vector<std::string> decode_bpe(const std::vector<std::string>& subwords) {
  std::vector<std::string> out;
  std::string current;
  for (size_t i = 0; i < subwords.size(); ++i) {
    const std::string& piece = subwords[i];
    const bool cont =
        piece.size() >= 2 && piece.compare(piece.size() - 2, 2, kCont) == 0;
    if (cont) {
      if (i + 1 == subwords.size()) {
        fail(ErrorKind::Format, "continuation marker on final subword");
      }
      current += piece.substr(0, piece.size() - 2);
    } else {
      current += piece;
      out.push_back(current);
      current.clear();
    }
  }
  return out;
}

Vocabulary::Vocabulary() {
  id_to_token_ = {"<pad>", "<s>", "</s>", "<unk>"};
  for (size_t i = 0; i < id_to_token_.size(); ++i) {
    token_to_id_.emplace(id_to_token_[i], static_cast<int32_t>(i));
  }
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus,
                             size_t cap) {
  if (cap <= 4) fail(ErrorKind::Config, "vocabulary cap must exceed the 4 reserved ids");
  std::map<std::string, long long> freq;
  for (const auto& sentence : corpus) {
    for (const auto& token : sentence) {
      if (!token.empty()) ++freq[token];
    }
  }
  std::vector<std::pair<std::string, long long>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  for (const auto& [token, count] : ranked) {
    if (vocab.size() >= cap) break;
    if (vocab.token_to_id_.count(token)) continue;  // reserved literal in corpus
    vocab.token_to_id_.emplace(token, static_cast<int32_t>(vocab.id_to_token_.size()));
    vocab.id_to_token_.push_back(token);
  }
  return vocab;
}

Vocabulary Vocabulary::load(const std::string& path) {
  Vocabulary vocab;
  vocab.token_to_id_.clear();
  vocab.id_to_token_.clear();
  const auto lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto tab = lines[i].find('\t');
    if (tab == std::string::npos) {
      fail(ErrorKind::Format,
           "vocab file line " + std::to_string(i + 1) + ": expected TOKEN<TAB>ID");
    }
    const std::string token = lines[i].substr(0, tab);
    const long id = std::stol(lines[i].substr(tab + 1));
    if (id != static_cast<long>(vocab.id_to_token_.size())) {
      fail(ErrorKind::Format, "vocab file ids must be contiguous from 0, line " +
                                  std::to_string(i + 1));
    }
    vocab.token_to_id_.emplace(token, static_cast<int32_t>(id));
    vocab.id_to_token_.push_back(token);
  }
  if (vocab.id_to_token_.size() < 4 || vocab.id_to_token_[0] != "<pad>" ||
      vocab.id_to_token_[1] != "<s>" || vocab.id_to_token_[2] != "</s>" ||
      vocab.id_to_token_[3] != "<unk>") {
    fail(ErrorKind::Format, "vocab file missing reserved ids 0..3: " + path);
  }
  return vocab;
}

void Vocabulary::save(const std::string& path) const {
  std::vector<std::string> lines;
  lines.reserve(id_to_token_.size());
  for (size_t i = 0; i < id_to_token_.size(); ++i) {
    lines.push_back(id_to_token_[i] + "\t" + std::to_string(i));
  }
  write_lines(path, lines);
}

int32_t Vocabulary::encode(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::decode(int32_t id) const {
  if (id < 0 || static_cast<size_t>(id) >= id_to_token_.size()) {
    fail(ErrorKind::Index, "token id out of range: " + std::to_string(id));
  }
  return id_to_token_[static_cast<size_t>(id)];
}

std::vector<int32_t> Vocabulary::encode_line(const std::string& line,
                                             bool append_eos) const {
  std::vector<int32_t> ids;
  for (const auto& token : split_ws(line)) {
    ids.push_back(encode(token));
  }
  if (append_eos) ids.push_back(kEos);
  return ids;
}

std::uint64_t Vocabulary::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (size_t i = 0; i < id_to_token_.size(); ++i) {
    h = fnv1a64_update(h, id_to_token_[i]);
    h = fnv1a64_update(h, "\t");
    h = fnv1a64_update(h, std::to_string(i));
    h = fnv1a64_update(h, "\n");
  }
  return h;
}

}  // namespace anmt
