#include "anmt/corpus.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "anmt/error.hpp"
#include "anmt/util.hpp"

namespace anmt {

ParallelCorpus load_pair_files(const std::string& src_path,
                               const std::string& tgt_path,
                               const std::string& tag) {
  const auto src_lines = read_lines(src_path);
  const auto tgt_lines = read_lines(tgt_path);
  if (src_lines.size() != tgt_lines.size()) {
    fail(ErrorKind::Alignment,
         "line count mismatch: " + src_path + " has " +
             std::to_string(src_lines.size()) + " lines, " + tgt_path + " has " +
             std::to_string(tgt_lines.size()));
  }
  ParallelCorpus corpus;
  corpus.pairs.reserve(src_lines.size());
  for (size_t i = 0; i < src_lines.size(); ++i) {
    if (split_ws(src_lines[i]).empty() || split_ws(tgt_lines[i]).empty()) {
      ++corpus.dropped_empty;
      continue;
    }
    corpus.pairs.push_back({src_lines[i], tgt_lines[i], tag});
  }
  return corpus;
}

DatasetSpec DatasetSpec::load(const std::string& path) {
  return parse(read_lines(path));
}

DatasetSpec DatasetSpec::parse(const std::vector<std::string>& lines) {
  DatasetSpec spec;
  std::string current;
  size_t lineno = 0;
  for (const auto& raw : lines) {
    ++lineno;
    std::string line = raw;
    // trim
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
    size_t start = line.find_first_not_of(" \t");
    line = (start == std::string::npos) ? "" : line.substr(start);
    if (line.empty() || line[0] == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        fail(ErrorKind::Config,
             "dataset spec line " + std::to_string(lineno) + ": malformed section");
      }
      current = line.substr(1, line.size() - 2);
      if (spec.sets_.count(current)) {
        fail(ErrorKind::Config, "dataset spec: duplicate section [" + current + "]");
      }
      spec.sets_[current] = {};
      spec.set_order_.push_back(current);
      continue;
    }
    if (current.empty()) {
      fail(ErrorKind::Config,
           "dataset spec line " + std::to_string(lineno) + ": entry before any section");
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::Config,
           "dataset spec line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    const auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t");
      size_t b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    key = trim(key);
    value = trim(value);
    if (key.empty() || value.empty()) {
      fail(ErrorKind::Config,
           "dataset spec line " + std::to_string(lineno) + ": empty key or value");
    }

    Entry entry;
    if (key == "include") {
      entry.is_include = true;
      entry.name = value;
    } else {
      const auto comma = value.find(',');
      if (comma == std::string::npos) {
        fail(ErrorKind::Config, "dataset spec line " + std::to_string(lineno) +
                                    ": corpus entry needs src_path, tgt_path");
      }
      entry.name = key;
      const std::string src = trim(value.substr(0, comma));
      const std::string tgt = trim(value.substr(comma + 1));
      auto it = spec.corpora_.find(key);
      if (it != spec.corpora_.end() && it->second != std::make_pair(src, tgt)) {
        fail(ErrorKind::Config, "dataset spec: corpus '" + key +
                                    "' redefined with different paths");
      }
      spec.corpora_[key] = {src, tgt};
    }
    spec.sets_[current].push_back(entry);
  }
  return spec;
}

void DatasetSpec::expand(const std::string& set_name, std::vector<std::string>& out,
                         std::vector<std::string>& visiting) const {
  auto it = sets_.find(set_name);
  if (it == sets_.end()) {
    fail(ErrorKind::Config, "dataset spec: unknown set '" + set_name + "'");
  }
  if (std::find(visiting.begin(), visiting.end(), set_name) != visiting.end()) {
    fail(ErrorKind::Config, "dataset spec: include cycle through '" + set_name + "'");
  }
  visiting.push_back(set_name);
  for (const auto& entry : it->second) {
    if (entry.is_include) {
      expand(entry.name, out, visiting);
    } else {
      out.push_back(entry.name);
    }
  }
  visiting.pop_back();
}

std::vector<std::string> DatasetSpec::members(const std::string& set_name) const {
  std::vector<std::string> names;
  std::vector<std::string> visiting;
  expand(set_name, names, visiting);
  std::set<std::string> seen;
  for (const auto& name : names) {
    if (!seen.insert(name).second) {
      fail(ErrorKind::Config, "dataset spec: corpus '" + name +
                                  "' appears twice in set '" + set_name + "'");
    }
  }
  return names;
}

ParallelCorpus DatasetSpec::compose(const std::string& set_name, bool dedup) const {
  ParallelCorpus out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& name : members(set_name)) {
    auto it = corpora_.find(name);
    if (it == corpora_.end()) {
      fail(ErrorKind::Config, "dataset spec: unknown corpus '" + name + "'");
    }
    ParallelCorpus part = load_pair_files(it->second.first, it->second.second, name);
    out.dropped_empty += part.dropped_empty;
    for (auto& pair : part.pairs) {
      if (dedup && !seen.insert({pair.source, pair.target}).second) continue;
      out.pairs.push_back(std::move(pair));
    }
  }
  return out;
}

std::vector<std::string> DatasetSpec::set_names() const { return set_order_; }

CorpusStats stats(const ParallelCorpus& corpus) {
  CorpusStats result;
  result.total.name = "total";
  result.dropped_empty = corpus.dropped_empty;
  std::map<std::string, size_t> index;
  for (const auto& pair : corpus.pairs) {
    auto it = index.find(pair.tag);
    if (it == index.end()) {
      it = index.emplace(pair.tag, result.rows.size()).first;
      result.rows.push_back({pair.tag, 0, 0, 0});
    }
    CorpusStats::Row& row = result.rows[it->second];
    const size_t sw = split_ws(pair.source).size();
    const size_t tw = split_ws(pair.target).size();
    row.sentences += 1;
    row.source_words += sw;
    row.target_words += tw;
    result.total.sentences += 1;
    result.total.source_words += sw;
    result.total.target_words += tw;
  }
  return result;
}

std::string human_count(size_t count) {
  if (count < 1000) return std::to_string(count);
  if (count < 1000000) {
    return format_double(static_cast<double>(count) / 1000.0, 1) + "k";
  }
  return format_double(static_cast<double>(count) / 1000000.0, 1) + "m";
}

std::string render_stats(const CorpusStats& st, bool json) {
  if (json) {
    nlohmann::ordered_json doc;
    doc["corpora"] = nlohmann::ordered_json::array();
    for (const auto& row : st.rows) {
      doc["corpora"].push_back({{"corpus", row.name},
                                {"sentences", row.sentences},
                                {"source_words", row.source_words},
                                {"target_words", row.target_words},
                                {"sentences_human", human_count(row.sentences)},
                                {"source_words_human", human_count(row.source_words)},
                                {"target_words_human", human_count(row.target_words)}});
    }
    doc["total"] = {{"sentences", st.total.sentences},
                    {"source_words", st.total.source_words},
                    {"target_words", st.total.target_words},
                    {"sentences_human", human_count(st.total.sentences)},
                    {"source_words_human", human_count(st.total.source_words)},
                    {"target_words_human", human_count(st.total.target_words)}};
    doc["dropped_empty"] = st.dropped_empty;
    return doc.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "corpus\tsentences\tsource words\ttarget words\n";
  const auto line = [&](const CorpusStats::Row& row) {
    out << row.name << '\t' << human_count(row.sentences) << '\t'
        << human_count(row.source_words) << '\t' << human_count(row.target_words)
        << '\n';
  };
  for (const auto& row : st.rows) line(row);
  line(st.total);
  if (st.dropped_empty > 0) {
    out << st.dropped_empty << " dropped (empty side)\n";
  }
  return out.str();
}

}  // namespace anmt
