#include "debater/schema.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

#include "debater/bundled.hpp"
#include "debater/error.hpp"
#include "debater/text.hpp"

namespace debater::schema {

using nlohmann::json;

namespace {

bool has_type(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    if (!v.is_number_float()) return false;
    const double d = v.get<double>();
    return d == static_cast<double>(static_cast<long long>(d));
  }
  return false;
}

std::string escape_pointer(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

class Checker {
 public:
  explicit Checker(const json& root) : root_(root) {}

  std::optional<std::string> run(const json& s, const json& v, const std::string& at) const {
    if (s.contains("$ref")) {
      const auto ref = s["$ref"].get<std::string>();
      const std::string prefix = "#/$defs/";
      if (ref.rfind(prefix, 0) != 0 || !root_.contains("$defs") || !root_["$defs"].contains(ref.substr(prefix.size()))) {
        return at + ": unresolvable reference " + ref;
      }
      return run(root_["$defs"][ref.substr(prefix.size())], v, at);
    }
    if (s.contains("type")) {
      const auto& t = s["type"];
      bool ok = false;
      if (t.is_array()) {
        for (const auto& x : t) ok = ok || has_type(v, x.get<std::string>());
      } else {
        ok = has_type(v, t.get<std::string>());
      }
      if (!ok) return at + ": expected " + t.dump();
    }
    if (s.contains("const") && s["const"] != v) return at + ": must equal " + s["const"].dump();
    if (s.contains("enum")) {
      bool found = false;
      for (const auto& e : s["enum"]) found = found || e == v;
      if (!found) return at + ": must be one of " + s["enum"].dump();
    }
    if (s.contains("anyOf")) {
      std::optional<std::string> last;
      bool ok = false;
      for (const auto& alt : s["anyOf"]) {
        last = run(alt, v, at);
        if (!last) {
          ok = true;
          break;
        }
      }
      if (!ok) return last;
    }
    if (v.is_string() && s.contains("minLength") &&
        text::codepoint_length(v.get_ref<const std::string&>()) < s["minLength"].get<std::size_t>()) {
      return at + ": shorter than " + s["minLength"].dump();
    }
    if (v.is_number()) {
      const double d = v.get<double>();
      if (s.contains("minimum") && d < s["minimum"].get<double>()) return at + ": below " + s["minimum"].dump();
      if (s.contains("maximum") && d > s["maximum"].get<double>()) return at + ": above " + s["maximum"].dump();
    }
    if (v.is_array()) {
      if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>()) {
        return at + ": fewer than " + s["minItems"].dump() + " items";
      }
      if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>()) {
        return at + ": more than " + s["maxItems"].dump() + " items";
      }
      if (s.contains("items")) {
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (auto e = run(s["items"], v[i], at + "/" + std::to_string(i))) return e;
        }
      }
    }
    if (v.is_object()) {
      if (s.contains("required")) {
        for (const auto& r : s["required"]) {
          if (!v.contains(r.get<std::string>())) return at + ": missing property " + r.dump();
        }
      }
      const json empty = json::object();
      const auto& props = s.contains("properties") ? s["properties"] : empty;
      for (auto it = v.begin(); it != v.end(); ++it) {
        const auto where = at + "/" + escape_pointer(it.key());
        if (props.contains(it.key())) {
          if (auto e = run(props[it.key()], it.value(), where)) return e;
        } else if (s.contains("additionalProperties") && s["additionalProperties"] == false) {
          return where + ": unknown property";
        }
      }
    }
    return std::nullopt;
  }

 private:
  const json& root_;
};

}  // namespace

std::optional<std::string> check(const json& schema, const json& instance) {
  return Checker(schema).run(schema, instance, "");
}

const json& bundled(const std::string& name) {
  static std::mutex mu;
  static std::map<std::string, json> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(name); it != cache.end()) return it->second;
  const auto path = "schemas/v1/" + name + ".json";
  std::string_view contents;
  try {
    contents = bundled::file(path);
  } catch (const std::out_of_range&) {
    throw Error("schema.unknown", "no schema named " + name);
  }
  return cache.emplace(name, json::parse(contents)).first->second;
}

}  // namespace debater::schema
