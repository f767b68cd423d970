#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>

#include "debater/error.hpp"
#include "debater/newsgroups.hpp"

using namespace debater;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("debater-20ng-" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  void write(const fs::path& rel, const std::string& contents) const {
    fs::create_directories((path / rel).parent_path());
    std::ofstream(path / rel, std::ios::binary) << contents;
  }
};

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("strip_post removes header, quotes and footer") {
  const std::string raw =
      "From: someone@example.com\nSubject: Re: engines\nLines: 9\n\n"
      "In article <1@x.com> bob@x.com writes:\n"
      "> the old engine was better\n"
      "| so was the gearbox\n"
      "I disagree, the new engine is quieter.\n"
      "Fuel use is lower too.\n"
      "--\n"
      "Alice, Springfield\n";
  CHECK(newsgroups::strip_post(raw) == "I disagree, the new engine is quieter.\nFuel use is lower too.");

  // no blank line: the whole post is header
  CHECK(newsgroups::strip_post("From: a\nSubject: b\n") == "");
  // no footer marker: body kept as is after quote removal
  CHECK(newsgroups::strip_post("H: x\n\nline one\nline two") == "line one\nline two");
  // a dash line at the very top is not a footer
  CHECK(newsgroups::strip_post("H: x\n\n----\nbody") == "----\nbody");
  // "wrote:" anywhere in a line drops it
  CHECK(newsgroups::strip_post("H: x\n\nJohn wrote: hi\nkept\nalso kept") == "kept\nalso kept");
}

TEST_CASE("load: group directories, bydate layout and JSONL") {
  TempDir t;
  t.write("flat/rec.autos/1", "From: a\n\nengines and wheels\n");
  t.write("flat/rec.autos/2", "From: a\n\ntires and brakes\n");
  t.write("flat/sci.space/1", "From: b\n\norbit \xE9tude\n");  // Latin-1
  auto c = newsgroups::load((t.path / "flat").string());
  REQUIRE(c.texts.size() == 3);
  CHECK(c.label_names == std::vector<std::string>{"rec.autos", "sci.space"});
  CHECK(c.labels == std::vector<int>{0, 0, 1});
  CHECK(c.texts[0] == "engines and wheels\n");
  CHECK(c.texts[2] == "orbit \xC3\xA9tude\n");

  t.write("bydate/20news-bydate-train/b/1", "h\n\ntrain b\n");
  t.write("bydate/20news-bydate-train/a/1", "h\n\ntrain a\n");
  t.write("bydate/20news-bydate-test/a/9", "h\n\ntest a\n");
  t.write("bydate/20news-bydate-test/c/9", "h\n\ntest c\n");
  c = newsgroups::load((t.path / "bydate").string());
  REQUIRE(c.texts.size() == 4);
  CHECK(c.label_names == std::vector<std::string>{"a", "b", "c"});
  CHECK(c.labels == std::vector<int>{0, 1, 0, 2});

  t.write("posts.jsonl", "{\"text\": \"x y\", \"label\": \"p\"}\n\n{\"text\": \"z\", \"label\": 3}\n");
  c = newsgroups::load((t.path / "posts.jsonl").string());
  CHECK(c.texts.size() == 2);
  CHECK(c.label_names == std::vector<std::string>{"p", "3"});

  t.write("bad.jsonl", "{\"text\": \"x\"}\n");
  CHECK(code_of([&] { newsgroups::load((t.path / "bad.jsonl").string()); }) == "data.invalid");
  fs::create_directories(t.path / "empty");
  CHECK(code_of([&] { newsgroups::load((t.path / "empty").string()); }) == "data.invalid");
  CHECK(code_of([&] { newsgroups::load((t.path / "missing").string()); }) == "data.not_found");
}

TEST_CASE("locate prefers the flag") {
  CHECK(newsgroups::locate(std::string("/x")) == std::optional<std::string>("/x"));
  if (std::getenv("DEBATER_20NG_PATH") == nullptr) CHECK_FALSE(newsgroups::locate(std::nullopt));
}

TEST_CASE("evaluate recovers separated groups and reports in the fixed format") {
  newsgroups::LabeledCorpus c;
  c.label_names = {"space", "cars", "food"};
  const std::vector<std::vector<std::string>> vocab = {
      {"orbit", "rocket", "launch", "satellite", "nasa", "shuttle"},
      {"engine", "tires", "brakes", "dealer", "sedan", "mileage"},
      {"recipe", "flour", "butter", "oven", "sugar", "dough"}};
  std::uint64_t x = 7;
  for (int g = 0; g < 3; ++g) {
    for (int d = 0; d < 15; ++d) {
      std::string text;
      for (int w = 0; w < 8; ++w) {
        x = x * 6364136223846793005ULL + 1442695040888963407ULL;
        text += vocab[g][(x >> 33) % 6] + " ";
      }
      c.texts.push_back(text + "common words everywhere");
      c.labels.push_back(g);
    }
  }
  c.texts.push_back("zzz");  // no term survives min_df: dropped
  c.labels.push_back(0);

  newsgroups::EvalParams p;
  p.k = 3;
  p.restarts = 3;
  p.min_df = 2;
  p.max_df = 0.9;
  p.kmeans = true;
  const auto r = newsgroups::evaluate(c, p);
  CHECK(r.documents == 45);
  CHECK(r.vocabulary == 18);  // "common", "words", "everywhere" exceed max_df
  CHECK(r.ami > 0.95);
  CHECK(r.ari > 0.95);
  REQUIRE(r.kmeans_ami);
  CHECK(*r.kmeans_ami > 0.9);
  const auto text = newsgroups::report(r);
  CHECK(std::regex_search(text, std::regex(R"(^AMI=\d\.\d{3} ARI=\d\.\d{3}\n)")));
  CHECK(text.find("KMeans AMI=") != std::string::npos);
}
