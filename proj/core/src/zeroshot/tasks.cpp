#include "synclip/zeroshot/tasks.hpp"

#include "synclip/syndata/caption.hpp"

namespace synclip::zeroshot {

using syndata::Finding;
using syndata::Labels;

namespace {

std::vector<std::string> normal_prompts() {
  return {syndata::normal_caption(0), syndata::normal_caption(1), syndata::normal_caption(2)};
}

std::string prompt(std::size_t opening, const std::string& phrase) {
  return std::string(syndata::caption_openings()[opening]) + " with " + phrase;
}

// One prompt per phrase template, cycling through the openings.
std::vector<std::string> finding_prompts(Finding f, int grade = 0) {
  std::vector<std::string> out;
  for (std::size_t t = 0; t < syndata::kPhraseTemplates; ++t) out.push_back(prompt(t, syndata::finding_phrase(f, t, grade)));
  return out;
}

std::vector<std::string> dr_prompts() {
  std::vector<std::string> out;
  for (int grade = 1; grade <= 4; ++grade) {
    const Finding f = grade <= 2 ? Finding::DrMild : Finding::DrSevere;
    out.push_back(prompt(static_cast<std::size_t>(grade - 1) % 3, syndata::finding_phrase(f, 2, grade)));
  }
  return out;
}

// Set flags other than the DR pair.
std::size_t other_findings(const Labels& l) {
  std::size_t n = 0;
  for (std::size_t f = static_cast<std::size_t>(Finding::Glaucoma); f < syndata::kNumFindings; ++f) n += l.findings[f];
  return n;
}

bool has_dr(const Labels& l) { return l.has(Finding::DrMild) || l.has(Finding::DrSevere); }

std::vector<ZeroShotTask> make_tasks() {
  std::vector<ZeroShotTask> tasks;

  ZeroShotTask dr{"dr-grading", "MESSIDOR", {{"grade 0", normal_prompts()}}, {}};
  for (int grade = 1; grade <= 4; ++grade) {
    const Finding f = grade <= 2 ? Finding::DrMild : Finding::DrSevere;
    dr.classes.push_back({"grade " + std::to_string(grade), finding_prompts(f, grade)});
  }
  dr.label_of = [](const Labels& l) -> std::optional<std::size_t> {
    if (other_findings(l) != 0) return std::nullopt;
    return static_cast<std::size_t>(l.dr_grade);
  };
  tasks.push_back(std::move(dr));

  ZeroShotTask multi{"multi-disease",
                     "FIVES",
                     {{"normal", normal_prompts()},
                      {"diabetic retinopathy", dr_prompts()},
                      {"glaucoma", finding_prompts(Finding::Glaucoma)},
                      {"age-related degeneration", finding_prompts(Finding::AgeRelatedDegeneration)}},
                     {}};
  multi.label_of = [](const Labels& l) -> std::optional<std::size_t> {
    const std::size_t others = other_findings(l);
    if (l.normal()) return 0;
    if (has_dr(l) && others == 0) return 1;
    if (has_dr(l)) return std::nullopt;
    if (others != 1) return std::nullopt;
    if (l.has(Finding::Glaucoma)) return 2;
    if (l.has(Finding::AgeRelatedDegeneration)) return 3;
    return std::nullopt;
  };
  tasks.push_back(std::move(multi));

  ZeroShotTask glaucoma{
      "glaucoma-screening", "REFUGE", {{"normal", normal_prompts()}, {"glaucoma", finding_prompts(Finding::Glaucoma)}}, {}};
  glaucoma.label_of = [](const Labels& l) -> std::optional<std::size_t> {
    if (l.has(Finding::Glaucoma)) return 1;
    if (l.normal()) return 0;
    return std::nullopt;
  };
  tasks.push_back(std::move(glaucoma));

  for (const auto& t : tasks) t.validate();
  return tasks;
}

}  // namespace

void ZeroShotTask::validate() const {
  if (classes.size() < 2) throw std::invalid_argument("task " + name + " needs at least 2 classes");
  for (const auto& c : classes) {
    if (c.prompts.empty()) throw std::invalid_argument("task " + name + ": class '" + c.name + "' has no prompts");
  }
  if (!label_of) throw std::invalid_argument("task " + name + " has no label rule");
}

const std::vector<ZeroShotTask>& builtin_tasks() {
  static const std::vector<ZeroShotTask> tasks = make_tasks();
  return tasks;
}

std::vector<std::string> builtin_task_names() {
  std::vector<std::string> names;
  for (const auto& t : builtin_tasks()) names.push_back(t.name);
  return names;
}

const ZeroShotTask& find_task(const std::string& name) {
  for (const auto& t : builtin_tasks()) {
    if (t.name == name) return t;
  }
  std::string valid;
  for (const auto& n : builtin_task_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw UnknownTaskError("unknown task '" + name + "'; valid tasks: " + valid);
}

}  // namespace synclip::zeroshot
