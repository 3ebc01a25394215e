#include "anmt/pipeline.hpp"

#include <sstream>

#include <doctest.h>

#include "anmt/error.hpp"
#include "anmt/util.hpp"
#include "test_util.hpp"

using namespace anmt;

namespace {

// Tiny bilingual toy: "Arabic" side mixes real Arabic forms (so the
// preprocessing variant differs from the baseline) with ASCII words.
const std::vector<std::string> kSrcWords = {
    "والكتاب",  // w+Al+ktAb
    "كتاب",                    // ktAb
    "بالقلم",        // b+Al+qlm
    "قلم",                          // qlm
    "أكل",                          // Akl with hamza
    "منها"};                   // mn+hA
const std::vector<std::string> kTgtWords = {"book",  "the",  "pen",  "with",
                                            "ate",   "from", "her",  "and"};

struct PipelineFixture {
  testutil::TempDir tmp{"pipe"};
  std::string config_path;

  explicit PipelineFixture(std::uint64_t seed, size_t pairs = 24) {
    std::vector<std::string> src, tgt;
    std::uint64_t state = seed;
    const auto next = [&]() {
      state = state * 6364136223846793005ULL + 1442695040888963407ULL;
      return state >> 33;
    };
    for (size_t i = 0; i < pairs; ++i) {
      const size_t len = 1 + next() % 4;
      std::string s, t;
      for (size_t k = 0; k < len; ++k) {
        if (k) {
          s += ' ';
          t += ' ';
        }
        s += kSrcWords[next() % kSrcWords.size()];
        t += kTgtWords[next() % kTgtWords.size()];
      }
      src.push_back(s);
      tgt.push_back(t);
    }
    tmp.write("train.ar", src);
    tmp.write("train.en", tgt);
    // test set: first 5 training lines; reference = their targets
    tmp.write("test.ar", {src.begin(), src.begin() + 5});
    tmp.write("test.en", {tgt.begin(), tgt.begin() + 5});
    tmp.write("tune.ar", {src.begin(), src.begin() + 8});
    tmp.write("tune.en", {tgt.begin(), tgt.begin() + 8});

    config_path = tmp.write(
        "pipe.cfg",
        {"seed = 5",
         "data.train_src = " + tmp.file("train.ar"),
         "data.train_tgt = " + tmp.file("train.en"),
         "data.test_src = " + tmp.file("test.ar"),
         "data.test_ref = " + tmp.file("test.en"),
         "preprocess.enabled = true",
         "preprocess.max_len = 50",
         "bpe.merges = 30",
         "bpe.vocab_cap = 500",
         "model.embed_dim = 8",
         "model.hidden_dim = 8",
         "model.attn_dim = 8",
         "train.batch_size = 8",
         "train.max_epochs = 2",
         "train.learning_rate = 0.005",
         "train.val_interval = 50",
         "train.patience = 10",
         "tune.enabled = true",
         "tune.src = " + tmp.file("tune.ar"),
         "tune.tgt = " + tmp.file("tune.en"),
         "tune.learning_rate = 0.001",
         "tune.max_epochs = 1",
         "ensemble.size = 2",
         "decode.beam = 2",
         "decode.alpha = 0.6"});
  }
};

}  // namespace

TEST_CASE("pipeline config parses, serializes and digests stably") {
  const PipelineFixture fx(1);
  const PipelineConfig config = PipelineConfig::load(fx.config_path);
  CHECK(config.seed == 5);
  CHECK(config.bpe_merges == 30);
  CHECK(config.tune_enabled);
  CHECK(config.ensemble_size == 2);
  std::vector<std::string> lines;
  std::stringstream ss(config.serialize());
  for (std::string line; std::getline(ss, line);) lines.push_back(line);
  const PipelineConfig reparsed = PipelineConfig::parse(lines);
  CHECK(reparsed.digest() == config.digest());

  CHECK_THROWS_AS(PipelineConfig::parse({"bogus.key = 1"}), Error);
}

TEST_CASE("pipeline validation catches missing pieces before any work") {
  const PipelineFixture fx(2);
  PipelineConfig config = PipelineConfig::load(fx.config_path);

  PipelineConfig no_tune_corpus = config;
  no_tune_corpus.tune_src.clear();
  try {
    no_tune_corpus.validate();
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }

  PipelineConfig missing_file = config;
  missing_file.train_src = fx.tmp.file("nonexistent.ar");
  CHECK_THROWS_AS(missing_file.validate(), Error);

  PipelineConfig no_ensemble = config;
  no_ensemble.ensemble_size = 0;
  CHECK_THROWS_AS(no_ensemble.validate(), Error);
}

TEST_CASE("pipeline produces the ablation ladder and its artifacts") {
  const PipelineFixture fx(3);
  const PipelineConfig config = PipelineConfig::load(fx.config_path);
  const std::string run_dir = fx.tmp.file("run");
  const PipelineReport report = run_pipeline(config, run_dir);

  REQUIRE(report.rows.size() == 4);
  CHECK(report.rows[0].system == "baseline");
  CHECK(report.rows[1].system == "+ ar preprocessing");
  CHECK(report.rows[2].system == "+ tuning");
  CHECK(report.rows[3].system == "+ ensemble of 2");
  for (const auto& row : report.rows) {
    CHECK(row.bleu >= 0.0);
    CHECK(row.bleu <= 100.0);
  }

  CHECK(file_exists(run_dir + "/report.txt"));
  CHECK(file_exists(run_dir + "/report.json"));
  CHECK(file_exists(run_dir + "/manifest.json"));
  CHECK(file_exists(run_dir + "/variants/baseline/codes.bpe"));
  CHECK(file_exists(run_dir + "/variants/arprep/vocab.tsv"));
  CHECK(file_exists(run_dir + "/trans/ensemble.out"));

  const std::string text = read_file(run_dir + "/report.txt");
  CHECK(text.find("system\tBLEU") == 0);
  CHECK(text.find("+ ensemble of 2") != std::string::npos);

  // Manifest: every stage timing non-negative, inputs hashed.
  const Manifest manifest = read_manifest(run_dir);
  CHECK(manifest.seed == 5);
  CHECK(!manifest.input_hashes.empty());
  CHECK(!manifest.stage_seconds.empty());
  for (const auto& [name, seconds] : manifest.stage_seconds) {
    CHECK(seconds >= 0.0);
  }
  CHECK(verify_manifest(run_dir).empty());

  // Tamper with an input: re-validation flags exactly that file.
  std::ofstream(fx.tmp.file("train.ar"), std::ios::app) << "tampered\n";
  const auto mismatched = verify_manifest(run_dir);
  REQUIRE(mismatched.size() == 1);
  CHECK(mismatched[0] == fx.tmp.file("train.ar"));
}

TEST_CASE("disabled stages drop their report rows") {
  const PipelineFixture fx(4);
  PipelineConfig config = PipelineConfig::load(fx.config_path);
  config.preprocess_enabled = false;
  config.tune_enabled = false;
  config.ensemble_size = 1;
  const PipelineReport report = run_pipeline(config, fx.tmp.file("run-min"));
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].system == "baseline");
}

TEST_CASE("stage failures carry the stage name") {
  const PipelineFixture fx(5);
  PipelineConfig config = PipelineConfig::load(fx.config_path);
  // Misalign the training pair after validation by pointing both sides
  // at files with different line counts.
  fx.tmp.write("bad.en", {"only one line"});
  config.train_tgt = fx.tmp.file("bad.en");
  try {
    run_pipeline(config, fx.tmp.file("run-bad"));
    FAIL("expected stage error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("stage") != std::string::npos);
  }
}
