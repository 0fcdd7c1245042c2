#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "synclip/autodiff/ops.hpp"
#include "synclip/syndata/caption.hpp"
#include "synclip/syndata/errors.hpp"
#include "synclip/syndata/manifest.hpp"
#include "synclip/syndata/ppm.hpp"
#include "synclip/zeroshot/classify.hpp"
#include "synclip/zeroshot/dataset.hpp"
#include "synclip/zeroshot/report.hpp"
#include "synclip/zeroshot/tasks.hpp"

namespace {

using namespace synclip;
using autodiff::Rng;
using autodiff::Tensor;
using syndata::Finding;
namespace ops = autodiff::ops;
namespace zs = zeroshot;
using testkit::brute_force_classify;
using testkit::unit_rows;

training::ClipModel default_model(std::uint64_t seed) {
  const auto vocab = syndata::caption_vocabulary();
  training::ModelConfig config;
  config.text.vocab_size = vocab.size();
  return training::ClipModel::initialize(config, vocab, std::log(1 / 0.07), seed);
}

TEST(Classify, MatchesBruteForceOnFixedInstance) {
  Rng rng(41);
  const Tensor images = unit_rows(rng, 20, 16), classes = unit_rows(rng, 5, 16);
  EXPECT_EQ(zs::classify(images, classes), brute_force_classify(images, classes));
}

TEST(Classify, MatchesBruteForceOnRandomInstances) {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(50), c = 2 + rng.below(9), d = 2 + rng.below(30);
    const Tensor images = unit_rows(rng, n, d), classes = unit_rows(rng, c, d);
    ASSERT_EQ(zs::classify(images, classes), brute_force_classify(images, classes)) << "trial " << trial;
  }
}

TEST(Classify, TiesGoToTheLowestClass) {
  const Tensor classes({3, 2}, {0, 1, 1, 0, 1, 0});
  const Tensor images({2, 2}, {1, 0, 0.5, 0.5});
  EXPECT_EQ(zs::classify(images, classes), (std::vector<std::size_t>{1, 0}));
}

TEST(Classify, InvariantUnderPositiveScaling) {
  Rng rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor images = unit_rows(rng, 30, 12), classes = unit_rows(rng, 6, 12);
    const auto base = zs::classify(images, classes);
    for (double factor : {0.25, 8.0, rng.uniform(0.01, 100.0)}) {
      EXPECT_EQ(zs::classify(ops::scale(images, factor), classes), base);
    }
  }
}

TEST(Classify, InvariantUnderPerImageOffset) {
  // Every class gets the same extra coordinate k, so an image's extra
  // coordinate c adds k * c to all of its similarities.
  Rng rng(44);
  const std::size_t n = 40, c = 7, d = 10;
  const Tensor images = unit_rows(rng, n, d), classes = unit_rows(rng, c, d);
  const double k = 0.6, s = 0.8;
  std::vector<double> cls, img_zero, img_offset;
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < d; ++j) cls.push_back(s * classes[i * d + j]);
    cls.push_back(k);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      img_zero.push_back(images[i * d + j]);
      img_offset.push_back(images[i * d + j]);
    }
    img_zero.push_back(0.0);
    img_offset.push_back(rng.uniform(-5.0, 5.0));
  }
  const Tensor class_emb({c, d + 1}, cls);
  EXPECT_EQ(zs::classify(Tensor({n, d + 1}, img_offset), class_emb), zs::classify(Tensor({n, d + 1}, img_zero), class_emb));
  EXPECT_EQ(zs::classify(Tensor({n, d + 1}, img_zero), class_emb), zs::classify(images, classes));
}

TEST(Classify, RejectsMismatchedShapes) {
  Rng rng(45);
  EXPECT_THROW(zs::classify(unit_rows(rng, 3, 4), unit_rows(rng, 2, 5)), autodiff::ShapeError);
}

TEST(Score, AccuracyEqualsRecount) {
  const auto& task = zs::find_task("multi-disease");
  Rng rng(46);
  std::vector<std::size_t> labels(300), preds(300);
  for (auto& l : labels) l = rng.below(4);
  for (auto& p : preds) p = rng.below(4);
  const auto r = zs::score_predictions(task, labels, preds);
  std::size_t correct = 0;
  std::array<std::size_t, 4> per_class{};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    correct += labels[i] == preds[i];
    ++per_class[labels[i]];
  }
  EXPECT_DOUBLE_EQ(r.accuracy, correct / 300.0);
  std::size_t trace = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    std::size_t row = 0;
    for (auto v : r.confusion[k]) row += v;
    EXPECT_EQ(row, per_class[k]);
    trace += r.confusion[k][k];
  }
  EXPECT_DOUBLE_EQ(r.accuracy, double(trace) / r.n);
}

TEST(Tasks, BuiltinsAreWellFormed) {
  const auto model = default_model(1);
  const auto names = zs::builtin_task_names();
  EXPECT_EQ(names, (std::vector<std::string>{"dr-grading", "multi-disease", "glaucoma-screening"}));
  for (const auto& task : zs::builtin_tasks()) {
    EXPECT_NO_THROW(task.validate());
    EXPECT_GE(task.classes.size(), 2u);
    for (const auto& cls : task.classes) {
      EXPECT_FALSE(cls.prompts.empty());
      for (const auto& p : cls.prompts) {
        EXPECT_LE(encoders::split_words(p).size() + 2, model.config().text.max_seq_len) << p;
        for (const auto& w : encoders::split_words(p)) EXPECT_TRUE(model.vocabulary().contains(w)) << w;
      }
    }
    const Tensor emb = zs::build_class_embeddings(model, task);
    ASSERT_EQ(emb.dim(0), task.classes.size());
    for (std::size_t k = 0; k < emb.dim(0); ++k) {
      double s = 0;
      for (std::size_t j = 0; j < emb.dim(1); ++j) s += emb[k * emb.dim(1) + j] * emb[k * emb.dim(1) + j];
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
  EXPECT_THROW(zs::find_task("retina-magic"), zs::UnknownTaskError);
}

TEST(Tasks, LabelRules) {
  const auto& glaucoma = zs::find_task("glaucoma-screening");
  syndata::Labels normal, g, g_and_amd;
  g.set(Finding::Glaucoma, true);
  g_and_amd = g;
  g_and_amd.set(Finding::AgeRelatedDegeneration, true);
  EXPECT_EQ(glaucoma.label_of(normal), 0u);
  EXPECT_EQ(glaucoma.label_of(g), 1u);
  const auto& multi = zs::find_task("multi-disease");
  EXPECT_EQ(multi.label_of(g), 2u);
  EXPECT_FALSE(multi.label_of(g_and_amd).has_value());
  const auto& dr = zs::find_task("dr-grading");
  syndata::Labels severe;
  severe.set(Finding::DrSevere, true);
  severe.dr_grade = 4;
  EXPECT_EQ(dr.label_of(severe), 4u);
  EXPECT_FALSE(dr.label_of(g).has_value());
}

TEST(Tasks, OverlongPromptNamesTheClass) {
  const auto vocab = testkit::tiny_vocabulary();
  const auto model = training::ClipModel::initialize(testkit::tiny_model_config(vocab.size()), vocab, 1.0, 2);
  zs::ZeroShotTask task{"t", "X", {{"short", {"red disc"}}, {"wordy", {"red disc pale vessel macula normal"}}},
                        [](const syndata::Labels&) { return std::optional<std::size_t>(0); }};
  try {
    zs::build_class_embeddings(model, task);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("wordy"), std::string::npos) << e.what();
  }
}

std::vector<zs::EvalSample> samples_with(const syndata::LabelPriors& priors, std::size_t n, std::uint64_t seed) {
  std::vector<syndata::PairRecord> records;
  for (std::size_t i = 0; i < n; ++i) records.push_back(syndata::generate_pair(seed, i, priors));
  std::vector<const syndata::PairRecord*> refs;
  for (const auto& r : records) refs.push_back(&r);
  return zs::samples_from_records(refs, syndata::ProceduralImages(64));
}

TEST(Evaluate, UntrainedModelIsWithinBinomialBoundOfChance) {
  const auto model = default_model(7);
  syndata::LabelPriors priors;
  priors.finding.fill(0.0);
  priors[Finding::Glaucoma] = 0.5;
  const auto samples = samples_with(priors, 560, 48);
  const auto& task = zs::find_task("glaucoma-screening");
  auto selection = zs::select_samples(task, samples, true);
  ASSERT_GE(selection.indices.size(), 500u);
  std::vector<zs::EvalSample> chosen;
  for (std::size_t j = 0; j < 500; ++j) chosen.push_back(samples[selection.indices[j]]);
  const auto r = zs::evaluate_task(model, task, chosen, {false, 64});
  const double sigma = std::sqrt(0.5 * 0.5 / r.n);
  EXPECT_NEAR(r.accuracy, 0.5, 3 * sigma);
}

TEST(Evaluate, BalancingTakesTheSmallestClassCount) {
  syndata::LabelPriors priors;
  priors.finding.fill(0.0);
  priors[Finding::Glaucoma] = 0.2;
  const auto samples = samples_with(priors, 200, 49);
  const auto& task = zs::find_task("glaucoma-screening");
  const auto all = zs::select_samples(task, samples, false);
  const auto balanced = zs::select_samples(task, samples, true);
  const auto glaucoma = std::count(all.labels.begin(), all.labels.end(), 1u);
  EXPECT_EQ(balanced.indices.size(), 2u * static_cast<std::size_t>(glaucoma));
  EXPECT_EQ(std::count(balanced.labels.begin(), balanced.labels.end(), 0u), glaucoma);
}

TEST(Evaluate, AccuracyIsInvariantToSampleOrder) {
  const auto model = default_model(8);
  syndata::LabelPriors priors;
  priors.finding.fill(0.0);
  priors[Finding::Glaucoma] = 0.3;
  priors[Finding::AgeRelatedDegeneration] = 0.3;
  priors[Finding::DrMild] = 0.2;
  auto samples = samples_with(priors, 120, 50);
  const auto& task = zs::find_task("multi-disease");
  const auto a = zs::evaluate_task(model, task, samples, {false, 32});
  std::reverse(samples.begin(), samples.end());
  Rng rng(51);
  for (std::size_t i = samples.size() - 1; i > 0; --i) std::swap(samples[i], samples[rng.below(i + 1)]);
  const auto b = zs::evaluate_task(model, task, samples, {false, 17});
  EXPECT_EQ(a.accuracy, b.accuracy);
  EXPECT_EQ(a.confusion, b.confusion);
}

TEST(Report, BaselineRowsAreVerbatim) {
  const std::vector<zs::ModelReport> none;
  const auto csv = zs::render_report(none, "csv");
  for (const char* row : {"CLIP,0.237,0.250,0.470", "BiomedCLIP,0.224,0.416,0.540", "FLAIR,0.545,0.732,0.899",
                          "FLAIR_EK,0.604,0.735,0.920", "VisionCLIP,0.431,0.739,0.925"}) {
    EXPECT_NE(csv.find(row), std::string::npos) << row << "\n" << csv;
  }
  const auto baselines = zs::baseline_table();
  ASSERT_EQ(baselines.size(), 5u);
  EXPECT_EQ(baselines[4].method, "VisionCLIP");
  EXPECT_EQ(baselines[4].accuracy, (std::array<double, 3>{0.431, 0.739, 0.925}));
  const auto text = zs::render_report(none, "text");
  EXPECT_NE(text.find("0.431"), std::string::npos);
  EXPECT_THROW(zs::render_report(none, "xml"), std::invalid_argument);
}

TEST(Report, LocalRowsFollowBaselines) {
  zs::TaskResult r;
  r.task = "glaucoma-screening";
  r.report_column = "REFUGE";
  r.class_names = {"normal", "glaucoma"};
  r.n = 4;
  r.accuracy = 0.75;
  r.confusion = {{2, 0}, {1, 1}};
  r.per_class_accuracy = {1.0, 0.5};
  const std::vector<zs::ModelReport> reports{{"mine", {r}}};
  const auto csv = zs::render_report(reports, "csv", {{"seed", "3"}});
  EXPECT_NE(csv.find("mine,,,0.750"), std::string::npos) << csv;
  EXPECT_LT(csv.find("VisionCLIP"), csv.find("mine"));
  EXPECT_EQ(csv.rfind("# seed = 3", 0), 0u);
}

TEST(Dataset, LoadsExternalManifestAndChecksImages) {
  testkit::TempDir dir("external");
  syndata::CorpusConfig config;
  config.n = 12;
  const auto records = syndata::generate_corpus(config);
  syndata::write_corpus_images(dir.path(), records, 64);
  syndata::write_manifest(dir / "manifest.jsonl", {std::nullopt, records});
  const auto samples = zs::load_external_dataset(dir.path(), 64);
  ASSERT_EQ(samples.size(), 12u);
  const auto reference = syndata::quantize_8bit(syndata::render_pair(records[3], 64));
  EXPECT_TRUE(std::equal(reference.data().begin(), reference.data().end(), samples[3].image.data().begin()));
  EXPECT_EQ(zs::load_external_dataset(dir / "manifest.jsonl", 32)[0].image.shape(), (autodiff::Shape{3, 32, 32}));

  std::filesystem::remove(dir / records[5].image_path);
  EXPECT_THROW(zs::load_external_dataset(dir.path(), 64), syndata::IoError);
}

}  // namespace
