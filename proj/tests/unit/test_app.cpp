#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "synclip/app/commands.hpp"
#include "synclip/app/run_config.hpp"
#include "synclip/syndata/corpus.hpp"
#include "synclip/syndata/labels.hpp"
#include "synclip/syndata/manifest.hpp"
#include "synclip/training/checkpoint.hpp"
#include "synclip/training/trainer.hpp"

namespace fs = std::filesystem;
using namespace synclip;
using app::RunConfig;
using testkit::read_file;
using testkit::TempDir;
using testkit::write_file;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "synclip");
  std::ostringstream out, err;
  const int code = app::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

// Small model so that init-only checkpoints and embeddings are quick.
std::vector<std::string> small_model_flags() {
  return {"--set", "image.stem_channels=4", "image.residual_blocks=2", "embed_dim=16", "text.model_dim=16",
          "text.layers=1", "text.heads=2"};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST(RunConfigTest, ParsesKeysCommentsAndBlankLines) {
  RunConfig c = app::parse_run_config(
      "# experiment\n"
      "seed = 7\n"
      "\n"
      "corpus.n = 40   # small\n"
      "train.learning_rate = 0.002\n"
      "eval.tasks = glaucoma-screening\n");
  c.finalize();
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.corpus.n, 40u);
  EXPECT_EQ(c.corpus.seed, 7u);
  EXPECT_EQ(c.train.seed, 7u);
  EXPECT_DOUBLE_EQ(c.train.learning_rate, 0.002);
  EXPECT_EQ(c.eval_tasks, std::vector<std::string>{"glaucoma-screening"});
}

TEST(RunConfigTest, UnknownKeyNamesTheLine) {
  try {
    app::parse_run_config("seed = 1\n\nbogus.key = 3\n", "exp.cfg");
    FAIL() << "expected ConfigError";
  } catch (const app::ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("exp.cfg:3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("bogus.key"), std::string::npos) << msg;
  }
}

TEST(RunConfigTest, RejectsMalformedValues) {
  EXPECT_THROW(app::parse_run_config("corpus.n = ten\n"), app::ConfigError);
  EXPECT_THROW(app::parse_run_config("corpus.n\n"), app::ConfigError);
  EXPECT_THROW(app::parse_run_config("train.learning_rate = -1\n").finalize(), app::ConfigError);
  EXPECT_THROW(app::parse_run_config("text.heads = 3\n").finalize(), app::ConfigError);
  EXPECT_THROW(app::parse_run_config("text.max_seq_len = 12\n").finalize(), app::ConfigError);
  EXPECT_THROW(app::parse_run_config("eval.split = holdout\n"), app::ConfigError);
  EXPECT_THROW(app::parse_run_config("eval.tasks = glaucoma-screening,nope\n"), app::ConfigError);
  EXPECT_THROW(app::parse_run_config("corpus.image_source = camera\n"), app::ConfigError);
}

TEST(RunConfigTest, EveryKeyHasADocumentedDefault) {
  const RunConfig defaults;
  std::set<std::string> seen;
  for (const auto& info : app::config_keys()) {
    EXPECT_TRUE(seen.insert(info.key).second) << info.key;
    EXPECT_FALSE(info.description.empty()) << info.key;
    EXPECT_FALSE(app::get_config_value(defaults, info.key).empty()) << info.key;
  }
  const std::string rendered = app::render_run_config(defaults);
  for (const auto& info : app::config_keys()) {
    EXPECT_NE(rendered.find("\n" + info.key + " = "), std::string::npos) << info.key;
  }
}

TEST(RunConfigTest, RenderParseRoundTrip) {
  RunConfig c;
  c.seed = 99;
  c.corpus.n = 123;
  c.train.learning_rate = 0.1 + 0.2;  // not exactly representable in short form
  c.corpus.priors[syndata::Finding::Glaucoma] = 1.0 / 3.0;
  c.eval_tasks = {"multi-disease", "dr-grading"};
  c.eval_balance = false;
  c.report_dir = "out dir";
  c.finalize();
  const RunConfig back = app::parse_run_config(app::render_run_config(c));
  EXPECT_EQ(app::config_entries(back), app::config_entries(c));
}

TEST(RunConfigTest, HashIgnoresPathsAndThreadsButTracksValues) {
  RunConfig a;
  a.finalize();
  RunConfig b = a;
  b.corpus_dir = "elsewhere";
  b.checkpoint = "x.vclp";
  b.report_dir = "r2";
  b.threads = 8;
  EXPECT_EQ(app::config_hash(a), app::config_hash(b));
  EXPECT_EQ(app::config_hash(a).size(), 16u);

  for (const auto& info : app::config_keys()) {
    if (info.is_path || info.key == "threads") continue;
    RunConfig c = a;
    const std::string before = app::get_config_value(c, info.key);
    std::string changed;
    if (info.key == "eval.tasks") changed = "glaucoma-screening";
    else if (info.key == "eval.split") changed = "val";
    else if (info.key == "eval.balance") changed = "false";
    else if (info.key == "train.center_images") changed = "true";
    else if (info.key == "corpus.image_source") changed = "files";
    else if (info.key == "text.heads") changed = "2";
    else if (info.key.rfind("prior.", 0) == 0 || info.key.rfind("readability.", 0) == 0) changed = "0.0625";
    else if (info.key == "train.learning_rate") changed = "0.125";
    else if (info.key == "train.log_temperature") changed = "2.5";
    else if (info.key == "train.max_logit_scale") changed = "50";
    else changed = std::to_string(std::strtoull(before.c_str(), nullptr, 10) + 32);
    ASSERT_NE(changed, before) << info.key;
    app::set_config_value(c, info.key, changed);
    EXPECT_NE(app::config_hash(c), app::config_hash(a)) << info.key;
  }
}

TEST(CliTest, FlagsOverrideSetOverridesConfigFile) {
  TempDir dir("app_precedence");
  write_file(dir / "exp.cfg", "corpus.n = 30\nseed = 5\n");
  const auto out = (dir / "corpus").string();
  auto r = cli({"gen-data", "--config", (dir / "exp.cfg").string(), "--set", "corpus.n=20", "--n", "10", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  auto manifest = syndata::read_manifest(fs::path(out) / "manifest.jsonl");
  EXPECT_EQ(manifest.records.size(), 10u);
  ASSERT_TRUE(manifest.header.has_value());
  EXPECT_EQ(manifest.header->seed, 5u);

  r = cli({"gen-data", "--config", (dir / "exp.cfg").string(), "--set", "corpus.n=20", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(syndata::read_manifest(fs::path(out) / "manifest.jsonl").records.size(), 20u);
}

TEST(CliTest, GenDataSplitsAndIsByteIdenticalOnRerun) {
  TempDir dir("app_gen");
  const auto out = (dir / "c").string();
  auto r = cli({"gen-data", "--n", "10", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("train 8, val 1, test 1"), std::string::npos) << r.out;

  const auto manifest = syndata::read_manifest(fs::path(out) / "manifest.jsonl");
  std::map<syndata::Split, int> counts;
  for (const auto& rec : manifest.records) ++counts[rec.split];
  EXPECT_EQ(counts[syndata::Split::Train], 8);
  EXPECT_EQ(counts[syndata::Split::Val], 1);
  EXPECT_EQ(counts[syndata::Split::Test], 1);

  const std::string first = read_file(fs::path(out) / "manifest.jsonl");
  ASSERT_EQ(cli({"gen-data", "--n", "10", "--out", out, "--threads", "4"}).code, 0);
  EXPECT_EQ(read_file(fs::path(out) / "manifest.jsonl"), first);
  EXPECT_NE(first.find(app::config_hash([] {
              RunConfig c;
              c.corpus.n = 10;
              c.finalize();
              return c;
            }())),
            std::string::npos);
}

TEST(CliTest, UserErrorsExitTwoWithAMessage) {
  TempDir dir("app_errors");
  auto r = cli({"gen-data", "--n", "5", "--out", (dir / "c").string()});
  EXPECT_EQ(r.code, app::kExitUser);
  EXPECT_NE(r.err.find("minimum"), std::string::npos) << r.err;

  write_file(dir / "file", "x");
  r = cli({"gen-data", "--n", "10", "--out", (dir / "file" / "sub").string()});
  EXPECT_EQ(r.code, app::kExitUser);
  EXPECT_FALSE(r.err.empty());

  r = cli({"train", "--corpus", (dir / "missing").string()});
  EXPECT_EQ(r.code, app::kExitUser);
  EXPECT_NE(r.err.find("gen-data"), std::string::npos) << r.err;

  r = cli({"eval", "--tasks", "dr-grading,retinoblastoma"});
  EXPECT_EQ(r.code, app::kExitUser);
  for (const char* task : {"dr-grading", "multi-disease", "glaucoma-screening"}) {
    EXPECT_NE(r.err.find(task), std::string::npos) << r.err;
  }

  EXPECT_EQ(cli({"gen-data", "--set", "corpus.n"}).code, app::kExitUser);
  EXPECT_EQ(cli({"gen-data", "--no-such-flag"}).code, app::kExitUser);
  EXPECT_EQ(cli({"frobnicate"}).code, app::kExitUser);
  EXPECT_EQ(cli({"gen-data", "--config", (dir / "nope.cfg").string()}).code, app::kExitUser);
}

TEST(CliTest, ExitCodeMapping) {
  EXPECT_EQ(app::exit_code_for(app::ConfigError("x")), app::kExitUser);
  EXPECT_EQ(app::exit_code_for(app::UserError("x")), app::kExitUser);
  EXPECT_EQ(app::exit_code_for(training::BadMagicError("x")), app::kExitUser);
  EXPECT_EQ(app::exit_code_for(std::runtime_error("x")), app::kExitInternal);
  EXPECT_EQ(app::exit_code_for(std::logic_error("x")), app::kExitInternal);
}

TEST(CliTest, HelpListsEveryFlagWithItsDefault) {
  const std::map<std::string, std::vector<std::string>> flags = {
      {"gen-data", {"--n", "--out"}},
      {"train", {"--corpus", "--checkpoint", "--log", "--epochs", "--init-only"}},
      {"eval", {"--corpus", "--checkpoint", "--tasks", "--split", "--out", "--input"}},
      {"embed", {"--corpus", "--checkpoint", "--input", "--out", "--modality"}},
  };
  for (const auto& [command, own] : flags) {
    const auto r = cli({command, "--help"});
    EXPECT_EQ(r.code, 0) << command;
    std::vector<std::string> all = {"--config", "--set", "--threads", "--seed"};
    all.insert(all.end(), own.begin(), own.end());
    const auto lines = split_lines(r.out);
    for (const auto& flag : all) {
      bool found = false;
      for (const auto& line : lines) {
        const auto at = line.find(flag + " ");
        if (at == std::string::npos || line.find('[', at) == std::string::npos) continue;
        found = line.find(']', line.find('[', at)) != std::string::npos;
        if (found) break;
      }
      EXPECT_TRUE(found) << command << " " << flag << " has no default in:\n" << r.out;
    }
  }
  const auto r = cli({"train", "--help"});
  EXPECT_NE(r.out.find("[5]"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("[20240501]"), std::string::npos) << r.out;
}

class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("app_pipeline");
    auto r = cli({"gen-data", "--n", "40", "--out", corpus()});
    ASSERT_EQ(r.code, 0) << r.err;
    r = cli(concat({"train", "--init-only", "--corpus", corpus(), "--checkpoint", checkpoint()}, small_model_flags()));
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static std::string corpus() { return (*dir_ / "corpus").string(); }
  static std::string checkpoint() { return (*dir_ / "init.vclp").string(); }
  static TempDir* dir_;
};

TempDir* PipelineTest::dir_ = nullptr;

TEST_F(PipelineTest, EmbeddingsAreUnitNormAndReproducible) {
  const auto out = (*dir_ / "emb.csv").string();
  auto r = cli({"embed", "--corpus", corpus(), "--checkpoint", checkpoint(), "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string first = read_file(out);

  std::size_t rows = 0;
  bool saw_header = false, saw_hash = false;
  for (const auto& line : split_lines(first)) {
    if (line.rfind("#", 0) == 0) {
      saw_hash = saw_hash || line.rfind("# config_hash = ", 0) == 0;
      continue;
    }
    if (!saw_header) {
      EXPECT_EQ(line.rfind("id,e0,", 0), 0u) << line;
      saw_header = true;
      continue;
    }
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    double sq = 0.0;
    std::size_t dims = 0;
    while (std::getline(cells, cell, ',')) {
      const double v = std::stod(cell);
      sq += v * v;
      ++dims;
    }
    EXPECT_EQ(dims, 16u);
    EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-6);
    ++rows;
  }
  EXPECT_TRUE(saw_hash);
  EXPECT_EQ(rows, 40u);

  ASSERT_EQ(cli({"embed", "--corpus", corpus(), "--checkpoint", checkpoint(), "--out", out}).code, 0);
  EXPECT_EQ(read_file(out), first);

  const auto text_out = (*dir_ / "text.csv").string();
  r = cli({"embed", "--corpus", corpus(), "--checkpoint", checkpoint(), "--out", text_out, "--modality", "text"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(read_file(text_out), first);
  EXPECT_EQ(cli({"embed", "--corpus", corpus(), "--checkpoint", checkpoint(), "--modality", "audio"}).code,
            app::kExitUser);
}

TEST_F(PipelineTest, ReportCarriesBaselinesAndProvenance) {
  const auto report = (*dir_ / "report").string();
  auto r = cli({"eval", "--corpus", corpus(), "--checkpoint", checkpoint(), "--split", "all", "--out", report});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_file(fs::path(report) / "report.csv");
  for (const char* row : {"CLIP,0.237,0.250,0.470", "BiomedCLIP,0.224,0.416,0.540", "FLAIR,0.545,0.732,0.899",
                          "FLAIR_EK,0.604,0.735,0.920", "VisionCLIP,0.431,0.739,0.925"}) {
    EXPECT_NE(csv.find(row), std::string::npos) << row << "\n" << csv;
  }
  EXPECT_NE(csv.find("# config_hash = "), std::string::npos);
  EXPECT_NE(csv.find("# seed = 20240501"), std::string::npos);
  EXPECT_TRUE(fs::exists(fs::path(report) / "report.txt"));
  EXPECT_TRUE(fs::exists(fs::path(report) / "details.txt"));

  const std::string first = csv;
  ASSERT_EQ(cli({"eval", "--corpus", corpus(), "--checkpoint", checkpoint(), "--split", "all", "--out", report}).code,
            0);
  EXPECT_EQ(read_file(fs::path(report) / "report.csv"), first);
}

TEST_F(PipelineTest, CorruptCheckpointReportsTheStructuredError) {
  const std::string good = read_file(checkpoint());
  struct Case {
    std::string name;
    std::string bytes;
    std::string needle;
  };
  std::string bad_version = good;
  bad_version[4] = 9;
  const std::vector<Case> cases = {
      {"magic.vclp", "XXXX" + good.substr(4), "bad magic"},
      {"version.vclp", bad_version, "version"},
      {"short.vclp", good.substr(0, good.size() / 2), "truncated"},
  };
  std::set<std::string> messages;
  for (const auto& c : cases) {
    const auto path = (*dir_ / c.name).string();
    write_file(path, c.bytes);
    const auto r = cli({"eval", "--corpus", corpus(), "--checkpoint", path, "--out", (*dir_ / "r").string()});
    EXPECT_EQ(r.code, app::kExitUser) << c.name;
    EXPECT_NE(r.err.find(c.needle), std::string::npos) << c.name << ": " << r.err;
    messages.insert(r.err);
  }
  EXPECT_EQ(messages.size(), cases.size());
  EXPECT_EQ(cli({"eval", "--corpus", corpus(), "--checkpoint", (*dir_ / "absent.vclp").string()}).code,
            app::kExitUser);
}

TEST_F(PipelineTest, InitOnlyCheckpointRecordsProvenance) {
  const auto loaded = training::load_checkpoint(checkpoint());
  EXPECT_EQ(loaded.meta.epoch, 0u);
  ASSERT_FALSE(loaded.meta.provenance.empty());
  EXPECT_EQ(loaded.meta.provenance.front().first, "config_hash");
  EXPECT_EQ(loaded.model.config().image.embed_dim, 16u);
}

TEST_F(PipelineTest, CenterImagesStoresTheTrainSplitMean) {
  const auto plain = training::load_checkpoint(checkpoint());
  EXPECT_FALSE(plain.meta.train.center_images);
  for (double v : plain.model.image_mean().data()) ASSERT_EQ(v, 0.0);

  const auto path = (*dir_ / "centered.vclp").string();
  auto r = cli(concat({"train", "--init-only", "--corpus", corpus(), "--checkpoint", path, "--set",
                       "train.center_images=true"},
                      small_model_flags()));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto centered = training::load_checkpoint(path);
  EXPECT_TRUE(centered.meta.train.center_images);

  const auto manifest = syndata::read_manifest(fs::path(corpus()) / "manifest.jsonl");
  std::vector<const syndata::PairRecord*> train;
  for (const auto& rec : manifest.records) {
    if (rec.split == syndata::Split::Train) train.push_back(&rec);
  }
  const auto expected = training::mean_image(train, syndata::ProceduralImages(64));
  ASSERT_EQ(centered.model.image_mean().shape(), expected.shape());
  EXPECT_EQ(std::memcmp(centered.model.image_mean().data().data(), expected.data().data(),
                        expected.size() * sizeof(double)),
            0);
}
