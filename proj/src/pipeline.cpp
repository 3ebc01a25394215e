#include "anmt/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "anmt/bleu.hpp"
#include "anmt/corpus.hpp"
#include "anmt/error.hpp"
#include "anmt/textprep.hpp"
#include "anmt/util.hpp"
#include "anmt/version.hpp"

namespace anmt {

namespace {

namespace fs = std::filesystem;

const auto trim = [](std::string s) {
  const auto a = s.find_first_not_of(" \t");
  const auto b = s.find_last_not_of(" \t");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
};

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true") return true;
  if (value == "false") return false;
  fail(ErrorKind::Config, "pipeline config: '" + key + "' must be true or false");
}

std::vector<std::string> split_commas(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
  return parse(read_lines(path));
}

PipelineConfig PipelineConfig::parse(const std::vector<std::string>& lines) {
  PipelineConfig c;
  size_t lineno = 0;
  for (const auto& raw : lines) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::Config,
           "pipeline config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "seed") c.seed = std::stoull(value);
      else if (key == "data.train_src") c.train_src = value;
      else if (key == "data.train_tgt") c.train_tgt = value;
      else if (key == "data.dev_src") c.dev_src = value;
      else if (key == "data.dev_tgt") c.dev_tgt = value;
      else if (key == "data.test_src") c.test_src = value;
      else if (key == "data.test_ref") c.test_refs = split_commas(value);
      else if (key == "preprocess.enabled") c.preprocess_enabled = parse_bool(value, key);
      else if (key == "preprocess.max_len") c.max_len = std::stoull(value);
      else if (key == "preprocess.lowercase_english") c.lowercase_english = parse_bool(value, key);
      else if (key == "preprocess.rules") c.rules_path = value;
      else if (key == "preprocess.affixes") c.affixes_path = value;
      else if (key == "bpe.merges") c.bpe_merges = std::stoull(value);
      else if (key == "bpe.vocab_cap") c.vocab_cap = std::stoull(value);
      else if (key == "model.embed_dim") c.embed_dim = std::stoull(value);
      else if (key == "model.hidden_dim") c.hidden_dim = std::stoull(value);
      else if (key == "model.attn_dim") c.attn_dim = std::stoull(value);
      else if (key == "train.batch_size") c.train.batch_size = std::stoull(value);
      else if (key == "train.max_epochs") c.train.max_epochs = std::stoull(value);
      else if (key == "train.learning_rate") c.train.learning_rate = std::stod(value);
      else if (key == "train.optimizer") c.train.optimizer = value;
      else if (key == "train.clip_norm") c.train.clip_norm = std::stod(value);
      else if (key == "train.val_interval") c.train.val_interval = std::stoull(value);
      else if (key == "train.patience") c.train.patience = std::stoull(value);
      else if (key == "tune.enabled") c.tune_enabled = parse_bool(value, key);
      else if (key == "tune.src") c.tune_src = value;
      else if (key == "tune.tgt") c.tune_tgt = value;
      else if (key == "tune.learning_rate") c.tune_learning_rate = std::stod(value);
      else if (key == "tune.max_epochs") c.tune_max_epochs = std::stoull(value);
      else if (key == "ensemble.size") c.ensemble_size = std::stoull(value);
      else if (key == "decode.beam") c.decode.beam_size = std::stoull(value);
      else if (key == "decode.alpha") c.decode.length_norm_alpha = std::stod(value);
      else if (key == "decode.max_len_factor") c.decode.max_len_factor = std::stoull(value);
      else if (key == "decode.max_len_extra") c.decode.max_len_extra = std::stoull(value);
      else if (key == "decode.arithmetic_mean") c.decode.arithmetic_mean = parse_bool(value, key);
      else fail(ErrorKind::Config, "pipeline config: unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      fail(ErrorKind::Config, "pipeline config: bad value for '" + key + "'");
    } catch (const std::out_of_range&) {
      fail(ErrorKind::Config, "pipeline config: bad value for '" + key + "'");
    }
  }
  return c;
}

std::string PipelineConfig::serialize() const {
  std::ostringstream out;
  out << "seed = " << seed << "\n"
      << "data.train_src = " << train_src << "\n"
      << "data.train_tgt = " << train_tgt << "\n"
      << "data.dev_src = " << dev_src << "\n"
      << "data.dev_tgt = " << dev_tgt << "\n"
      << "data.test_src = " << test_src << "\n";
  out << "data.test_ref = ";
  for (size_t i = 0; i < test_refs.size(); ++i) {
    out << (i ? "," : "") << test_refs[i];
  }
  out << "\n";
  out << "preprocess.enabled = " << (preprocess_enabled ? "true" : "false") << "\n"
      << "preprocess.max_len = " << max_len << "\n"
      << "preprocess.lowercase_english = " << (lowercase_english ? "true" : "false") << "\n"
      << "preprocess.rules = " << rules_path << "\n"
      << "preprocess.affixes = " << affixes_path << "\n"
      << "bpe.merges = " << bpe_merges << "\n"
      << "bpe.vocab_cap = " << vocab_cap << "\n"
      << "model.embed_dim = " << embed_dim << "\n"
      << "model.hidden_dim = " << hidden_dim << "\n"
      << "model.attn_dim = " << attn_dim << "\n"
      << "train.batch_size = " << train.batch_size << "\n"
      << "train.clip_norm = " << format_double(train.clip_norm, 9) << "\n"
      << "train.learning_rate = " << format_double(train.learning_rate, 9) << "\n"
      << "train.max_epochs = " << train.max_epochs << "\n"
      << "train.optimizer = " << train.optimizer << "\n"
      << "train.patience = " << train.patience << "\n"
      << "train.val_interval = " << train.val_interval << "\n"
      << "tune.enabled = " << (tune_enabled ? "true" : "false") << "\n"
      << "tune.src = " << tune_src << "\n"
      << "tune.tgt = " << tune_tgt << "\n"
      << "tune.learning_rate = " << format_double(tune_learning_rate, 9) << "\n"
      << "tune.max_epochs = " << tune_max_epochs << "\n"
      << "ensemble.size = " << ensemble_size << "\n"
      << "decode.beam = " << decode.beam_size << "\n"
      << "decode.alpha = " << format_double(decode.length_norm_alpha, 6) << "\n"
      << "decode.max_len_factor = " << decode.max_len_factor << "\n"
      << "decode.max_len_extra = " << decode.max_len_extra << "\n"
      << "decode.arithmetic_mean = " << (decode.arithmetic_mean ? "true" : "false")
      << "\n";
  return out.str();
}

std::uint64_t PipelineConfig::digest() const { return fnv1a64(serialize()); }

void PipelineConfig::validate() const {
  const auto need_file = [](const std::string& path, const std::string& what) {
    if (path.empty()) {
      fail(ErrorKind::Config, "pipeline config: missing " + what);
    }
    if (!file_exists(path)) {
      fail(ErrorKind::Config, "pipeline config: " + what + " not found: " + path);
    }
  };
  need_file(train_src, "data.train_src");
  need_file(train_tgt, "data.train_tgt");
  need_file(test_src, "data.test_src");
  if (test_refs.empty()) {
    fail(ErrorKind::Config, "pipeline config: at least one data.test_ref required");
  }
  for (const auto& ref : test_refs) need_file(ref, "data.test_ref");
  if (dev_src.empty() != dev_tgt.empty()) {
    fail(ErrorKind::Config, "pipeline config: dev_src and dev_tgt go together");
  }
  if (!dev_src.empty()) {
    need_file(dev_src, "data.dev_src");
    need_file(dev_tgt, "data.dev_tgt");
  }
  if (tune_enabled) {
    need_file(tune_src, "tune.src");
    need_file(tune_tgt, "tune.tgt");
  }
  if (!rules_path.empty()) need_file(rules_path, "preprocess.rules");
  if (!affixes_path.empty()) need_file(affixes_path, "preprocess.affixes");
  if (ensemble_size == 0) {
    fail(ErrorKind::Config, "pipeline config: ensemble.size must be >= 1");
  }
  if (max_len == 0) fail(ErrorKind::Config, "pipeline config: max_len must be >= 1");
  if (embed_dim == 0 || hidden_dim == 0 || attn_dim == 0) {
    fail(ErrorKind::Config, "pipeline config: model dimensions must be positive");
  }
  train.validate();
  if (decode.beam_size == 0) {
    fail(ErrorKind::Config, "pipeline config: decode.beam must be >= 1");
  }
}

std::string PipelineReport::render_text() const {
  std::ostringstream out;
  out << "system\tBLEU\n";
  for (const auto& row : rows) {
    out << row.system << '\t' << format_double(row.bleu, 2) << '\n';
  }
  return out.str();
}

std::string PipelineReport::render_json() const {
  nlohmann::ordered_json doc;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    doc["rows"].push_back({{"system", row.system}, {"bleu", row.bleu}});
  }
  return doc.dump(2) + "\n";
}

std::string Manifest::render_json() const {
  nlohmann::ordered_json doc;
  doc["code_version"] = code_version;
  doc["config_digest"] = config_digest;
  doc["seed"] = seed;
  doc["inputs"] = nlohmann::ordered_json::object();
  for (const auto& [path, hash] : input_hashes) doc["inputs"][path] = hash;
  doc["stages"] = nlohmann::ordered_json::array();
  for (const auto& [name, seconds] : stage_seconds) {
    doc["stages"].push_back({{"name", name}, {"seconds", seconds}});
  }
  return doc.dump(2) + "\n";
}

namespace {

// Paired text preprocessing for one variant of the ablation ladder.
struct VariantData {
  std::string name;                 // "baseline" or "arprep"
  std::string dir;                  // run_dir/variants/<name>
  std::vector<std::string> train_src, train_tgt;
  std::vector<std::string> dev_src, dev_tgt;  // may be empty
  std::vector<std::string> tune_src, tune_tgt;
  std::vector<std::string> test_src;          // unfiltered, line-aligned
};

struct PipelineRun {
  const PipelineConfig& config;
  std::string run_dir;
  const LogFn& log;
  Textprep prep;
  std::vector<std::vector<std::string>> test_refs_tokens;  // tokenized refs
  Manifest manifest;

  void note(const std::string& message) const {
    if (log) log(message);
  }

  std::string arabic_line(const std::string& line, bool preprocess) const {
    if (!preprocess) return join_ws(split_ws(line));
    return prep.preprocess_arabic_line(line);
  }

  std::string english_line(const std::string& line) const {
    return prep.preprocess_english_line(line, config.lowercase_english);
  }

  // Pairwise preprocessing + length filtering for a training-side corpus.
  void prepare_pair(const std::string& src_path, const std::string& tgt_path,
                    bool arabic_prep, std::vector<std::string>& out_src,
                    std::vector<std::string>& out_tgt) const {
    const ParallelCorpus corpus = load_pair_files(src_path, tgt_path, "pipeline");
    size_t dropped = corpus.dropped_empty;
    for (const auto& pair : corpus.pairs) {
      const std::string src = arabic_line(pair.source, arabic_prep);
      const std::string tgt = english_line(pair.target);
      const size_t src_len = split_ws(src).size();
      const size_t tgt_len = split_ws(tgt).size();
      if (!filter_pair(src_len, tgt_len, config.max_len)) {
        ++dropped;
        continue;
      }
      out_src.push_back(src);
      out_tgt.push_back(tgt);
    }
    if (out_src.empty()) {
      fail(ErrorKind::Input, "no pairs left after preprocessing " + src_path);
    }
    if (dropped > 0) {
      note("preprocess: dropped " + std::to_string(dropped) + " pairs from " +
           src_path);
    }
  }

  VariantData prepare_variant(bool arabic_prep) {
    VariantData v;
    v.name = arabic_prep ? "arprep" : "baseline";
    v.dir = run_dir + "/variants/" + v.name;
    fs::create_directories(v.dir);

    prepare_pair(config.train_src, config.train_tgt, arabic_prep, v.train_src,
                 v.train_tgt);
    if (!config.dev_src.empty()) {
      prepare_pair(config.dev_src, config.dev_tgt, arabic_prep, v.dev_src, v.dev_tgt);
    }
    if (config.tune_enabled) {
      prepare_pair(config.tune_src, config.tune_tgt, arabic_prep, v.tune_src,
                   v.tune_tgt);
    }
    for (const auto& line : read_lines(config.test_src)) {
      v.test_src.push_back(arabic_line(line, arabic_prep));
    }

    write_lines(v.dir + "/train.src", v.train_src);
    write_lines(v.dir + "/train.tgt", v.train_tgt);
    write_lines(v.dir + "/test.src", v.test_src);
    if (!v.dev_src.empty()) {
      write_lines(v.dir + "/dev.src", v.dev_src);
      write_lines(v.dir + "/dev.tgt", v.dev_tgt);
    }
    if (!v.tune_src.empty()) {
      write_lines(v.dir + "/tune.src", v.tune_src);
      write_lines(v.dir + "/tune.tgt", v.tune_tgt);
    }
    return v;
  }

  // BPE + vocabulary learned per variant over both language sides.
  struct VariantModel {
    MergeTable codes;
    Vocabulary vocab;
    EncodedCorpus train;
    EncodedCorpus dev;  // empty -> trainer holds out a slice
    EncodedCorpus tune;
  };

  VariantModel build_subwords(const VariantData& v) const {
    VariantModel m;
    std::vector<std::vector<std::string>> joint;
    for (const auto& line : v.train_src) joint.push_back(split_ws(line));
    for (const auto& line : v.train_tgt) joint.push_back(split_ws(line));
    m.codes = learn_bpe(joint, config.bpe_merges, config.vocab_cap);
    m.codes.save(v.dir + "/codes.bpe");

    const auto apply_all = [&](const std::vector<std::string>& lines) {
      std::vector<std::string> out;
      out.reserve(lines.size());
      for (const auto& line : lines) {
        out.push_back(join_ws(apply_bpe(split_ws(line), m.codes)));
      }
      return out;
    };
    const auto train_src_bpe = apply_all(v.train_src);
    const auto train_tgt_bpe = apply_all(v.train_tgt);
    write_lines(v.dir + "/train.src.bpe", train_src_bpe);
    write_lines(v.dir + "/train.tgt.bpe", train_tgt_bpe);

    std::vector<std::vector<std::string>> joint_bpe;
    for (const auto& line : train_src_bpe) joint_bpe.push_back(split_ws(line));
    for (const auto& line : train_tgt_bpe) joint_bpe.push_back(split_ws(line));
    m.vocab = Vocabulary::build(joint_bpe, config.vocab_cap);
    m.vocab.save(v.dir + "/vocab.tsv");

    m.train = encode_corpus(train_src_bpe, train_tgt_bpe, m.vocab);
    if (!v.dev_src.empty()) {
      m.dev = encode_corpus(apply_all(v.dev_src), apply_all(v.dev_tgt), m.vocab);
    }
    if (!v.tune_src.empty()) {
      m.tune = encode_corpus(apply_all(v.tune_src), apply_all(v.tune_tgt), m.vocab);
    }
    return m;
  }

  Checkpoint train_member(const VariantData& v, const VariantModel& m,
                          std::uint64_t member) const {
    TrainConfig tc = config.train;
    tc.seed = derive_seed(config.seed, 1000 + member);
    const ModelParams init =
        ModelParams::init(m.vocab.size(), config.embed_dim, config.hidden_dim,
                          config.attn_dim, derive_seed(config.seed, 2000 + member));
    const std::string ckpt_dir = v.dir + "/ckpt-m" + std::to_string(member);
    fs::create_directories(ckpt_dir);
    TrainOutput out =
        train(m.train, m.dev.empty() ? nullptr : &m.dev, tc, init,
              m.vocab.content_hash(), ckpt_dir, [&](const std::string& line) {
                note("train[" + v.name + "/m" + std::to_string(member) + "] " + line);
              });
    return select_best(out.checkpoints, 1)[0];
  }

  Checkpoint tune_member(const VariantData& v, const VariantModel& m,
                         const Checkpoint& base, std::uint64_t member) const {
    TrainConfig tc = config.train;
    tc.learning_rate = config.tune_learning_rate;
    tc.max_epochs = config.tune_max_epochs;
    tc.seed = derive_seed(config.seed, 3000 + member);
    return finetune(base, m.tune, m.dev.empty() ? nullptr : &m.dev, tc,
                    m.vocab.content_hash(),
                    std::numeric_limits<size_t>::max(),
                    [&](const std::string& line) {
                      note("tune[" + v.name + "/m" + std::to_string(member) + "] " +
                           line);
                    });
  }

  double score_translation(const VariantData& v, const VariantModel& m,
                           const std::vector<Checkpoint>& members,
                           const std::string& out_name) const {
    Translator translator(members, m.vocab, m.codes, config.decode);
    const std::string out_path = run_dir + "/trans/" + out_name;
    fs::create_directories(run_dir + "/trans");
    write_lines(out_path + ".src", v.test_src);
    translator.translate_file(out_path + ".src", out_path, out_path + ".scores",
                              [&](const std::string& line) {
                                note("translate[" + out_name + "] " + line);
                              });

    // References tokenized once, shared by every row.
    BleuStats total;
    const auto hyp_lines = read_lines(out_path);
    for (size_t i = 0; i < hyp_lines.size(); ++i) {
      std::vector<std::vector<std::string>> refs;
      refs.reserve(test_refs_tokens.size());
      for (const auto& ref_lines : test_refs_tokens) {
        refs.push_back(split_ws(ref_lines[i]));
      }
      total += sentence_stats(split_ws(hyp_lines[i]), refs);
    }
    return total.candidate_length == 0 ? 0.0 : corpus_bleu(total) * 100.0;
  }

  template <typename F>
  auto stage(const std::string& name, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(body())>) {
        body();
        manifest.stage_seconds.emplace_back(
            name, std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                start)
                      .count());
        return;
      } else {
        auto result = body();
        manifest.stage_seconds.emplace_back(
            name, std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                start)
                      .count());
        return result;
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "stage " + name + ": " + e.what());
    }
  }
};

}  // namespace

PipelineReport run_pipeline(const PipelineConfig& config, const std::string& run_dir,
                            const LogFn& log) {
  config.validate();
  fs::create_directories(run_dir);

  PipelineRun run{config, run_dir, log, Textprep{}, {}, Manifest{}};
  if (!config.rules_path.empty()) {
    run.prep.rules = NormalizationRuleSet::load(config.rules_path);
  }
  if (!config.affixes_path.empty()) {
    run.prep.affixes = AffixLexicon::load(config.affixes_path);
  }

  run.manifest.code_version = std::string("anmt ") + kVersion;
  run.manifest.config_digest = hex64(config.digest());
  run.manifest.seed = config.seed;
  std::vector<std::string> inputs = {config.train_src, config.train_tgt,
                                     config.test_src};
  for (const auto& ref : config.test_refs) inputs.push_back(ref);
  if (!config.dev_src.empty()) {
    inputs.push_back(config.dev_src);
    inputs.push_back(config.dev_tgt);
  }
  if (config.tune_enabled) {
    inputs.push_back(config.tune_src);
    inputs.push_back(config.tune_tgt);
  }
  if (!config.rules_path.empty()) inputs.push_back(config.rules_path);
  if (!config.affixes_path.empty()) inputs.push_back(config.affixes_path);
  for (const auto& path : inputs) {
    run.manifest.input_hashes.emplace_back(path, hex64(fnv1a64(read_file(path))));
  }

  // Tokenized references shared by every scoring pass.
  run.stage("tokenize_references", [&] {
    for (const auto& ref : config.test_refs) {
      std::vector<std::string> lines;
      for (const auto& line : read_lines(ref)) {
        lines.push_back(run.english_line(line));
      }
      run.test_refs_tokens.push_back(std::move(lines));
    }
    const auto test_lines = read_lines(config.test_src).size();
    for (const auto& ref_lines : run.test_refs_tokens) {
      if (ref_lines.size() != test_lines) {
        fail(ErrorKind::Alignment, "test references are not line-aligned with " +
                                       config.test_src);
      }
    }
  });

  PipelineReport report;

  // Baseline row: raw Arabic, tokenized English.
  VariantData base_variant =
      run.stage("preprocess_baseline", [&] { return run.prepare_variant(false); });
  PipelineRun::VariantModel base_model =
      run.stage("bpe_baseline", [&] { return run.build_subwords(base_variant); });
  Checkpoint base_ckpt = run.stage(
      "train_baseline", [&] { return run.train_member(base_variant, base_model, 0); });
  report.rows.push_back(
      {"baseline", run.stage("score_baseline", [&] {
         return run.score_translation(base_variant, base_model, {base_ckpt},
                                      "baseline.out");
       })});

  // The ladder continues on the preprocessed variant when enabled.
  const VariantData* ladder_variant = &base_variant;
  const PipelineRun::VariantModel* ladder_model = &base_model;
  Checkpoint ladder_ckpt = base_ckpt;

  VariantData prep_variant;
  PipelineRun::VariantModel prep_model;
  if (config.preprocess_enabled) {
    prep_variant =
        run.stage("preprocess_arabic", [&] { return run.prepare_variant(true); });
    prep_model =
        run.stage("bpe_arabic", [&] { return run.build_subwords(prep_variant); });
    Checkpoint prep_ckpt = run.stage("train_arabic", [&] {
      return run.train_member(prep_variant, prep_model, 0);
    });
    report.rows.push_back(
        {"+ ar preprocessing", run.stage("score_arabic", [&] {
           return run.score_translation(prep_variant, prep_model, {prep_ckpt},
                                        "arprep.out");
         })});
    ladder_variant = &prep_variant;
    ladder_model = &prep_model;
    ladder_ckpt = std::move(prep_ckpt);
  }

  if (config.tune_enabled) {
    ladder_ckpt = run.stage("finetune", [&] {
      return run.tune_member(*ladder_variant, *ladder_model, ladder_ckpt, 0);
    });
    report.rows.push_back(
        {"+ tuning", run.stage("score_tuning", [&] {
           return run.score_translation(*ladder_variant, *ladder_model, {ladder_ckpt},
                                        "tuning.out");
         })});
  }

  if (config.ensemble_size > 1) {
    std::vector<Checkpoint> members{ladder_ckpt};
    for (size_t m = 1; m < config.ensemble_size; ++m) {
      Checkpoint member = run.stage("train_member_" + std::to_string(m), [&] {
        return run.train_member(*ladder_variant, *ladder_model, m);
      });
      if (config.tune_enabled) {
        member = run.stage("finetune_member_" + std::to_string(m), [&] {
          return run.tune_member(*ladder_variant, *ladder_model, member, m);
        });
      }
      members.push_back(std::move(member));
    }
    report.rows.push_back(
        {"+ ensemble of " + std::to_string(config.ensemble_size),
         run.stage("score_ensemble", [&] {
           return run.score_translation(*ladder_variant, *ladder_model, members,
                                        "ensemble.out");
         })});
  }

  std::ofstream(run_dir + "/report.txt") << report.render_text();
  std::ofstream(run_dir + "/report.json") << report.render_json();
  std::ofstream(run_dir + "/manifest.json") << run.manifest.render_json();
  return report;
}

Manifest read_manifest(const std::string& run_dir) {
  const std::string path = run_dir + "/manifest.json";
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Format, "manifest parse error in " + path + ": " + e.what());
  }
  Manifest m;
  m.code_version = doc.at("code_version").get<std::string>();
  m.config_digest = doc.at("config_digest").get<std::string>();
  m.seed = doc.at("seed").get<std::uint64_t>();
  for (const auto& [key, value] : doc.at("inputs").items()) {
    m.input_hashes.emplace_back(key, value.get<std::string>());
  }
  for (const auto& entry : doc.at("stages")) {
    m.stage_seconds.emplace_back(entry.at("name").get<std::string>(),
                                 entry.at("seconds").get<double>());
  }
  return m;
}

std::vector<std::string> verify_manifest(const std::string& run_dir) {
  const Manifest m = read_manifest(run_dir);
  std::vector<std::string> mismatched;
  for (const auto& [path, stored] : m.input_hashes) {
    if (!file_exists(path)) {
      mismatched.push_back(path);
      continue;
    }
    if (hex64(fnv1a64(read_file(path))) != stored) {
      mismatched.push_back(path);
    }
  }
  return mismatched;
}

}  // namespace anmt
