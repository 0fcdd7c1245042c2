#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "synclip/autodiff/rng.hpp"
#include "synclip/encoders/vocabulary.hpp"
#include "synclip/syndata/labels.hpp"

namespace synclip::syndata {

inline constexpr std::size_t kMaxCaptionWords = 24;
inline constexpr std::size_t kPhraseTemplates = 3;

/// Caption grammar:
///
///   caption  := [quality "."] opening "with" phrase ("and" phrase)*
///             | [quality "."] normal-template
///   quality  := level region "visibility" ["and" level region "visibility"]
///
/// One phrase per set flag in Finding order, each from one of three
/// templates with synonym choices. The DR grade word is fixed by the grade
/// (mild, moderate, severe, proliferative). The quality clause names at most
/// the two worst regions scored below good. Captions longer than
/// kMaxCaptionWords fall back to the shortest form of every part.
std::string generate_caption(const Labels& labels, autodiff::Rng& rng);

std::span<const std::string_view> caption_openings();
/// Normal templates 0..2, e.g. 0 -> "color fundus photograph with no abnormal findings".
std::string normal_caption(std::size_t template_index);
/// Phrase template `template_index` for `finding`, always taking the first
/// synonym. `dr_grade` selects the grade word for the DR findings.
std::string finding_phrase(Finding finding, std::size_t template_index, int dr_grade = 0);
/// Words that appear in a caption exactly when `finding` is set.
std::span<const std::string_view> finding_markers(Finding finding);
std::string_view dr_grade_word(int grade);

/// Every word the grammar can emit, sorted and unique.
std::vector<std::string> caption_words();
encoders::Vocabulary caption_vocabulary();

}  // namespace synclip::syndata
