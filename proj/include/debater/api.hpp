#pragma once

// Endpoint bodies shared by the HTTP service and the CLI, so both produce the
// same JSON for the same request.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "debater/kpa.hpp"
#include "debater/narrative.hpp"
#include "debater/scorers.hpp"
#include "debater/sent_index.hpp"
#include "json.hpp"

namespace debater::api {

using Json = nlohmann::ordered_json;

struct Context {
  std::shared_ptr<const index::SentenceIndex> index;  // for /index/query without inline sentences
  scorers::ScorerRegistry registry = scorers::ScorerRegistry::baseline();
};

// Synchronous endpoints, without the /v1 prefix: "/wikify", "/relatedness",
// "/cluster", "/themes", "/claim/score", "/claim/boundaries",
// "/evidence/score", "/quality", "/stance", "/narrative", "/index/query".
const std::vector<std::string>& endpoints();

// Schema name for an endpoint path ("/claim/score" -> "claim_score").
std::string schema_name(std::string_view endpoint);

// Validates `body` against the endpoint's request schema ("body.schema") and
// runs it. Throws "route.unknown" and any module error.
Json call(std::string_view endpoint, const nlohmann::json& body, const Context& context);

// The KPA job body ("kpa" schema). Validation is separate so the service can
// reject a bad submission before queueing it.
void validate_kpa_request(const nlohmann::json& body);
Json run_kpa_request(const nlohmann::json& body, const scorers::ScorerRegistry& registry);
std::vector<kpa::Comment> kpa_comments(const nlohmann::json& body);

scorers::Topic topic_from_json(const nlohmann::json& j);
kpa::KpaParams kpa_params_from_json(const nlohmann::json& j);
narrative::NarrativeParams narrative_params_from_json(const nlohmann::json& j);
std::unique_ptr<kpa::PairMatcher> matcher_named(const std::string& name);

// Pretty-printed document followed by a newline; the one rendering both
// surfaces use.
std::string render(const Json& j);

}  // namespace debater::api
