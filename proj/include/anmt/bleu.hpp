#ifndef ANMT_BLEU_HPP
#define ANMT_BLEU_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace anmt {

// Clipped n-gram counts for orders 1..4 plus the lengths feeding the
// brevity penalty. Corpus stats are the field-wise sum of sentence stats.
struct BleuStats {
  std::array<size_t, 4> matches{};  // clipped matches per order
  std::array<size_t, 4> totals{};   // candidate n-gram counts per order
  size_t candidate_length = 0;
  size_t reference_length = 0;  // effective (closest, ties -> shorter)

  BleuStats& operator+=(const BleuStats& other);
};

// Clipped counting against all references: each candidate n-gram is
// credited at most its maximum reference count.
BleuStats sentence_stats(const std::vector<std::string>& candidate,
                         const std::vector<std::vector<std::string>>& references);

// Corpus-level BLEU in [0, 1]: geometric mean of the four precisions
// (any zero precision gives 0) times min(1, exp(1 - r/c)).
double corpus_bleu(const BleuStats& stats);

struct BleuReport {
  double bleu = 0.0;  // x100
  std::array<double, 4> precisions{};
  double brevity_penalty = 1.0;
  size_t candidate_length = 0;
  size_t reference_length = 0;
  size_t lines = 0;

  std::string render(bool json) const;
};

// Whitespace-token, case-sensitive file scoring against one or more
// line-aligned reference files.
BleuReport score_files(const std::string& hyp_path,
                       const std::vector<std::string>& ref_paths);

}  // namespace anmt

#endif
