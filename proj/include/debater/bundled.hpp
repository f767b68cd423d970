#pragma once

#include <string>
#include <string_view>
#include <vector>

// Data files compiled into the library (lexicons, templates, schemas, toy
// corpora). Names are repository-relative paths such as "data/abbreviations.txt".
namespace debater::bundled {

std::string_view file(std::string_view name);
std::vector<std::string_view> names();

}  // namespace debater::bundled
