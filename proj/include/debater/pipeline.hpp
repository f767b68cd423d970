#pragma once

#include <string>

#include "debater/api.hpp"

namespace debater::pipeline {

// Online-debate flow: split arguments by stance, score quality, run KPA on
// each side's top arguments, then write the speech for `params.stance`.
//
// `doc` is {"topic": {...}, "arguments": [string | {"id", "text"}]}.
// Output: {"topic", "stance", "split": {"pro", "con", "abstain"},
// "quality": {id: score}, "key_points": {"pro", "con"}, "speech"}. A side
// whose KPA has nothing to work with carries {"error": {code, message}}.
api::Json debate(const nlohmann::json& doc, const narrative::NarrativeParams& params, const kpa::PairMatcher& matcher,
                 const scorers::ScorerRegistry& registry);

// Counts, both key point reports and the speech text.
std::string debate_report(const api::Json& result);

}  // namespace debater::pipeline
