#include "synclip/syndata/caption.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>

#include "synclip/syndata/errors.hpp"

namespace synclip::syndata {

namespace {

// "{a|b}" picks a synonym, "{g}" is the DR grade word.
using Template = std::string_view;

constexpr std::array<std::string_view, 3> kOpenings = {"color fundus photograph", "fundus image", "retinal photograph"};

constexpr std::array<std::string_view, 3> kNormalTemplates = {
    "color fundus photograph with no abnormal findings",
    "normal fundus image with no abnormal findings",
    "retinal photograph showing no abnormal findings",
};

constexpr std::array<std::array<Template, kPhraseTemplates>, kNumFindings> kPhrases = {{
    {"{g} diabetic retinopathy with {scattered|few|multiple} microaneurysms", "{g} nonproliferative diabetic retinopathy",
     "{g} diabetic retinopathy"},
    {"{g} diabetic retinopathy with {scattered|large|blot} hemorrhages", "{g} diabetic retinopathy",
     "{g} diabetic retinopathy with {extensive|multiple} hemorrhages"},
    {"glaucoma with {enlarged|large|increased} cup", "{glaucomatous|deep} optic disc cupping",
     "{suspected|advanced} glaucoma"},
    {"age related macular degeneration with {macular|soft|hard} drusen", "{dry|early} age related macular degeneration",
     "{macular|soft|hard} drusen"},
    {"hypertensive retinopathy", "hypertensive retinopathy with arteriolar narrowing", "{narrowed|thin} bright arterioles"},
    {"retinal vein occlusion", "{branch|central} retinal vein occlusion with pale sector",
     "vein occlusion with {pale|whitened} wedge"},
    {"pathological myopia", "high myopia with {tessellation|tigroid pattern}", "myopic {tessellated|tigroid} pattern"},
    {"cataract haze", "{hazy|blurred} view from cataract", "media opacity due to cataract"},
}};

// Shortest rendering per finding, used when a caption would run too long.
constexpr std::array<Template, kNumFindings> kShortPhrases = {
    "{g} diabetic retinopathy", "{g} diabetic retinopathy", "suspected glaucoma", "soft drusen",
    "hypertensive retinopathy", "vein occlusion",          "pathological myopia", "cataract haze",
};

constexpr std::array<std::string_view, 5> kGradeWords = {"", "mild", "moderate", "severe", "proliferative"};

constexpr std::array<std::string_view, 2> kMildMarkers = {"mild", "moderate"};
constexpr std::array<std::string_view, 2> kSevereMarkers = {"severe", "proliferative"};
constexpr std::array<std::string_view, 2> kGlaucomaMarkers = {"glaucoma", "cupping"};
constexpr std::array<std::string_view, 2> kDegenerationMarkers = {"degeneration", "drusen"};
constexpr std::array<std::string_view, 2> kHypertensiveMarkers = {"hypertensive", "arterioles"};
constexpr std::array<std::string_view, 1> kOcclusionMarkers = {"occlusion"};
constexpr std::array<std::string_view, 2> kMyopiaMarkers = {"myopia", "myopic"};
constexpr std::array<std::string_view, 1> kCataractMarkers = {"cataract"};

constexpr std::array<std::string_view, 3> kLevelWords = {"poor", "fair", ""};
constexpr std::array<std::string_view, kNumRegions> kRegionWords = {"overall", "optic disc", "macula", "vessel"};

std::vector<std::string_view> split_choices(std::string_view group) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= group.size(); ++i) {
    if (i == group.size() || group[i] == '|') {
      out.push_back(group.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

// Expands a template. `choose(k)` returns the synonym index for a group of k.
template <typename Choose>
std::string expand(Template t, int dr_grade, Choose&& choose) {
  std::string out;
  std::size_t i = 0;
  while (i < t.size()) {
    if (t[i] != '{') {
      out.push_back(t[i++]);
      continue;
    }
    const std::size_t close = t.find('}', i);
    const std::string_view group = t.substr(i + 1, close - i - 1);
    if (group == "g") {
      out += dr_grade_word(dr_grade);
    } else {
      const auto choices = split_choices(group);
      out += choices.at(choose(choices.size()));
    }
    i = close + 1;
  }
  return out;
}

std::size_t word_count(const std::string& s) { return encoders::split_words(s).size(); }

std::string quality_clause(const Labels& labels) {
  std::vector<std::size_t> regions;
  for (std::size_t r = 0; r < kNumRegions; ++r) {
    if (labels.readability[r] < kReadabilityGood) regions.push_back(r);
  }
  std::stable_sort(regions.begin(), regions.end(),
                   [&](std::size_t a, std::size_t b) { return labels.readability[a] < labels.readability[b]; });
  if (regions.size() > 2) regions.resize(2);
  std::string out;
  for (std::size_t k = 0; k < regions.size(); ++k) {
    if (k > 0) out += " and ";
    out += std::string(kLevelWords[static_cast<std::size_t>(labels.readability[regions[k]])]) + " " +
           std::string(kRegionWords[regions[k]]) + " visibility";
  }
  return out;
}

std::string join_findings(std::string_view opening, const std::vector<std::string>& phrases) {
  std::string out(opening);
  out += " with ";
  for (std::size_t k = 0; k < phrases.size(); ++k) {
    if (k > 0) out += " and ";
    out += phrases[k];
  }
  return out;
}

}  // namespace

std::string_view dr_grade_word(int grade) {
  if (grade < 0 || grade > 4) throw LabelError("dr grade " + std::to_string(grade) + " outside 0-4");
  return kGradeWords[static_cast<std::size_t>(grade)];
}

std::span<const std::string_view> caption_openings() { return kOpenings; }

std::string normal_caption(std::size_t template_index) { return std::string(kNormalTemplates.at(template_index)); }

std::string finding_phrase(Finding finding, std::size_t template_index, int dr_grade) {
  return expand(kPhrases.at(static_cast<std::size_t>(finding)).at(template_index), dr_grade,
                [](std::size_t) { return std::size_t{0}; });
}

std::span<const std::string_view> finding_markers(Finding finding) {
  switch (finding) {
    case Finding::DrMild: return kMildMarkers;
    case Finding::DrSevere: return kSevereMarkers;
    case Finding::Glaucoma: return kGlaucomaMarkers;
    case Finding::AgeRelatedDegeneration: return kDegenerationMarkers;
    case Finding::HypertensiveRetinopathy: return kHypertensiveMarkers;
    case Finding::VeinOcclusion: return kOcclusionMarkers;
    case Finding::PathologicalMyopia: return kMyopiaMarkers;
    case Finding::CataractHaze: return kCataractMarkers;
  }
  throw LabelError("unknown finding");
}

std::string generate_caption(const Labels& labels, autodiff::Rng& rng) {
  labels.validate();
  const std::string quality = quality_clause(labels);
  const std::string prefix = quality.empty() ? std::string() : quality + " . ";
  auto pick = [&rng](std::size_t k) { return static_cast<std::size_t>(rng.below(k)); };

  if (labels.normal()) return prefix + normal_caption(pick(kNormalTemplates.size()));

  const auto opening = kOpenings[pick(kOpenings.size())];
  std::vector<std::string> phrases;
  for (std::size_t f = 0; f < kNumFindings; ++f) {
    if (!labels.findings[f]) continue;
    phrases.push_back(expand(kPhrases[f][pick(kPhraseTemplates)], labels.dr_grade, pick));
  }
  std::string caption = prefix + join_findings(opening, phrases);
  if (word_count(caption) <= kMaxCaptionWords) return caption;

  phrases.clear();
  for (std::size_t f = 0; f < kNumFindings; ++f) {
    if (labels.findings[f]) phrases.push_back(expand(kShortPhrases[f], labels.dr_grade, [](std::size_t) { return std::size_t{0}; }));
  }
  return join_findings("fundus image", phrases);
}

std::vector<std::string> caption_words() {
  std::set<std::string> words;
  auto add_text = [&words](std::string_view text) {
    for (auto& w : encoders::split_words(text)) words.insert(std::move(w));
  };
  auto add_template = [&](Template t) {
    std::string literal;
    for (std::size_t i = 0; i < t.size();) {
      if (t[i] != '{') {
        literal.push_back(t[i++]);
        continue;
      }
      const std::size_t close = t.find('}', i);
      const auto group = t.substr(i + 1, close - i - 1);
      if (group != "g") {
        for (auto choice : split_choices(group)) add_text(choice);
      }
      literal.push_back(' ');
      i = close + 1;
    }
    add_text(literal);
  };
  for (auto t : kOpenings) add_text(t);
  for (auto t : kNormalTemplates) add_text(t);
  for (const auto& per_finding : kPhrases) {
    for (auto t : per_finding) add_template(t);
  }
  for (auto t : kShortPhrases) add_template(t);
  for (auto w : kGradeWords) add_text(w);
  for (auto w : kLevelWords) add_text(w);
  for (auto w : kRegionWords) add_text(w);
  add_text("with and visibility .");
  return {words.begin(), words.end()};
}

encoders::Vocabulary caption_vocabulary() {
  const auto words = caption_words();
  return encoders::Vocabulary::from_words(words);
}

}  // namespace synclip::syndata
