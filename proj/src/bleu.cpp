#include "anmt/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "anmt/error.hpp"
#include "anmt/util.hpp"

namespace anmt {

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (size_t n = 0; n < 4; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  candidate_length += other.candidate_length;
  reference_length += other.reference_length;
  return *this;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, size_t>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

}  // namespace

BleuStats sentence_stats(const std::vector<std::string>& candidate,
                         const std::vector<std::vector<std::string>>& references) {
  if (references.empty()) {
    fail(ErrorKind::Input, "sentence_stats: at least one reference required");
  }
  BleuStats stats;
  stats.candidate_length = candidate.size();

  // Effective reference length: closest to the candidate, ties broken
  // toward the shorter reference.
  size_t best_len = references[0].size();
  for (const auto& ref : references) {
    const size_t len = ref.size();
    const auto dist = [&](size_t r) {
      return r > candidate.size() ? r - candidate.size() : candidate.size() - r;
    };
    if (dist(len) < dist(best_len) || (dist(len) == dist(best_len) && len < best_len)) {
      best_len = len;
    }
  }
  stats.reference_length = best_len;

  for (size_t n = 1; n <= 4; ++n) {
    const NgramCounts cand = count_ngrams(candidate, n);
    NgramCounts max_ref;
    for (const auto& ref : references) {
      for (const auto& [gram, count] : count_ngrams(ref, n)) {
        max_ref[gram] = std::max(max_ref[gram], count);
      }
    }
    size_t matched = 0;
    size_t total = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) matched += std::min(count, it->second);
    }
    stats.matches[n - 1] = matched;
    stats.totals[n - 1] = total;
  }
  return stats;
}

double corpus_bleu(const BleuStats& stats) {
  if (stats.candidate_length == 0) {
    fail(ErrorKind::Input, "corpus_bleu: zero candidate length");
  }
  double log_precision_sum = 0.0;
  for (size_t n = 0; n < 4; ++n) {
    if (stats.matches[n] == 0 || stats.totals[n] == 0) return 0.0;
    log_precision_sum += std::log(static_cast<double>(stats.matches[n]) /
                                  static_cast<double>(stats.totals[n]));
  }
  const double c = static_cast<double>(stats.candidate_length);
  const double r = static_cast<double>(stats.reference_length);
  const double bp = std::min(1.0, std::exp(1.0 - r / c));
  return bp * std::exp(0.25 * log_precision_sum);
}

std::string BleuReport::render(bool json) const {
  if (json) {
    nlohmann::ordered_json doc;
    doc["bleu"] = bleu;
    doc["precisions"] = precisions;
    doc["brevity_penalty"] = brevity_penalty;
    doc["candidate_length"] = candidate_length;
    doc["reference_length"] = reference_length;
    doc["lines"] = lines;
    return doc.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "BLEU = " << format_double(bleu, 2) << "  ";
  for (size_t n = 0; n < 4; ++n) {
    out << format_double(precisions[n] * 100.0, 1) << (n + 1 < 4 ? "/" : "");
  }
  out << "  (BP = " << format_double(brevity_penalty, 3)
      << ", hyp_len = " << candidate_length << ", ref_len = " << reference_length
      << ", lines = " << lines << ")\n";
  return out.str();
}

BleuReport score_files(const std::string& hyp_path,
                       const std::vector<std::string>& ref_paths) {
  if (ref_paths.empty()) {
    fail(ErrorKind::Input, "score_files: at least one reference file required");
  }
  const auto hyp_lines = read_lines(hyp_path);
  std::vector<std::vector<std::string>> ref_lines;
  for (const auto& path : ref_paths) {
    ref_lines.push_back(read_lines(path));
    if (ref_lines.back().size() != hyp_lines.size()) {
      fail(ErrorKind::Alignment,
           "line count mismatch: " + hyp_path + " has " +
               std::to_string(hyp_lines.size()) + " lines, " + path + " has " +
               std::to_string(ref_lines.back().size()));
    }
  }

  BleuStats total;
  for (size_t i = 0; i < hyp_lines.size(); ++i) {
    std::vector<std::vector<std::string>> refs;
    refs.reserve(ref_paths.size());
    for (const auto& rl : ref_lines) refs.push_back(split_ws(rl[i]));
    total += sentence_stats(split_ws(hyp_lines[i]), refs);
  }

  BleuReport report;
  report.lines = hyp_lines.size();
  report.candidate_length = total.candidate_length;
  report.reference_length = total.reference_length;
  for (size_t n = 0; n < 4; ++n) {
    report.precisions[n] =
        total.totals[n] == 0
            ? 0.0
            : static_cast<double>(total.matches[n]) / static_cast<double>(total.totals[n]);
  }
  if (total.candidate_length > 0) {
    const double c = static_cast<double>(total.candidate_length);
    const double r = static_cast<double>(total.reference_length);
    report.brevity_penalty = std::min(1.0, std::exp(1.0 - r / c));
    report.bleu = corpus_bleu(total) * 100.0;
  }
  return report;
}

}  // namespace anmt
