#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "debater/kpa.hpp"
#include "debater/scorers.hpp"

namespace debater::narrative {

enum class Mode { kpa, clustering };

struct NarrativeParams {
  scorers::Stance stance = scorers::Stance::pro;
  double min_stance_confidence = 0.0;
  std::size_t top_n_quality = 50;
  std::size_t paragraphs = 4;          // P
  std::size_t args_per_paragraph = 3;  // A
  Mode mode = Mode::kpa;
  kpa::KpaParams kpa;        // used in kpa mode
  std::uint64_t seed = 0;    // clustering mode
  std::size_t restarts = 10;
};

// Throws "narrative.invalid".
void validate(const NarrativeParams& params);

struct Paragraph {
  std::string header;
  std::vector<std::string> arguments;  // after cleanup
  std::vector<std::size_t> sources;    // indices into the input arguments

  bool operator==(const Paragraph&) const = default;
};

struct Speech {
  std::string opening;
  std::vector<Paragraph> paragraphs;
  std::string closing;
  std::string full_text;

  bool operator==(const Speech&) const = default;
};

struct Templates {
  std::string opening_pro, opening_con;
  std::string closing_pro, closing_con;
  std::vector<std::string> connectives;

  static Templates parse(std::string_view json);
  static const Templates& bundled();
};

struct DiscourseMarkers {
  std::vector<std::string> markers;  // lowercased, longest first

  static DiscourseMarkers parse(std::string_view contents);
  static const DiscourseMarkers& bundled();
};

// Strips leading discourse markers, collapses whitespace, capitalizes the
// first letter and ensures terminal punctuation. Idempotent. Throws
// "narrative.empty_argument" when nothing is left.
std::string cleanup_rephrase(std::string_view text, const DiscourseMarkers& markers = DiscourseMarkers::bundled());

// Throws "narrative.empty" for no arguments and "narrative.no_arguments"
// (semantic) when the stance filter removes every argument.
Speech generate_narrative(const scorers::Topic& topic, const std::vector<std::string>& arguments,
                          const NarrativeParams& params, const scorers::ScorerRegistry& registry,
                          const kpa::PairMatcher& matcher, const Templates& templates = Templates::bundled());

std::string speech_json(const Speech& speech);

}  // namespace debater::narrative
