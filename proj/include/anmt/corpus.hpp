#ifndef ANMT_CORPUS_HPP
#define ANMT_CORPUS_HPP

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace anmt {

// Aligned sentence pairs with per-pair provenance (the corpus name the
// pair came from).
struct ParallelPair {
  std::string source;
  std::string target;
  std::string tag;
};

struct ParallelCorpus {
  std::vector<ParallelPair> pairs;
  size_t dropped_empty = 0;  // pairs removed at load because a side was empty

  size_t size() const { return pairs.size(); }
};

// Line-aligned twin-file ingestion. Pairs where either line is empty
// are dropped and counted; differing line counts are an alignment error.
ParallelCorpus load_pair_files(const std::string& src_path,
                               const std::string& tgt_path,
                               const std::string& tag);

// Named dataset sets in the nested-membership pattern: each set lists
// member corpora (name = src_path, tgt_path) and may include other sets.
class DatasetSpec {
 public:
  static DatasetSpec load(const std::string& path);
  static DatasetSpec parse(const std::vector<std::string>& lines);

  // Concatenates member corpora in listed order; provenance preserved.
  // dedup removes exact duplicate (source, target) pairs.
  ParallelCorpus compose(const std::string& set_name, bool dedup = false) const;

  std::vector<std::string> set_names() const;
  std::vector<std::string> members(const std::string& set_name) const;

 private:
  struct Entry {
    bool is_include = false;
    std::string name;  // corpus name or included set name
  };
  std::map<std::string, std::vector<Entry>> sets_;          // section order kept separately
  std::vector<std::string> set_order_;
  std::map<std::string, std::pair<std::string, std::string>> corpora_;  // name -> paths

  void expand(const std::string& set_name, std::vector<std::string>& out,
              std::vector<std::string>& visiting) const;
};

// Sentence/word counts in the shape of a per-corpus statistics table.
struct CorpusStats {
  struct Row {
    std::string name;
    size_t sentences = 0;
    size_t source_words = 0;
    size_t target_words = 0;
  };
  std::vector<Row> rows;  // one per provenance tag, in first-seen order
  Row total;
  size_t dropped_empty = 0;  // carried over from the corpus load
};

CorpusStats stats(const ParallelCorpus& corpus);

// Human units: exact below 1000, otherwise one decimal with a k/m suffix.
std::string human_count(size_t count);

// Renders the table (corpus | sentences | source words | target words),
// or a JSON document with both exact and human-readable counts.
std::string render_stats(const CorpusStats& stats, bool json);

}  // namespace anmt

#endif
