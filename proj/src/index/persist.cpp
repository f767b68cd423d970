#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "debater/sent_index.hpp"

namespace debater::index {

namespace {

constexpr std::array<char, 5> kMagic{'S', 'I', 'D', 'X', '1'};
constexpr std::uint32_t kVersion = 1;

// Little-endian, length-prefixed primitives.
class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_ += s;
  }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string str() {
    auto n = u32();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto v = data_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  // Element counts are bounded by the bytes left, so a corrupt count cannot
  // trigger a huge allocation.
  std::uint32_t count(std::size_t min_element_bytes) {
    auto n = u32();
    if (static_cast<std::uint64_t>(n) * min_element_bytes > data_.size() - pos_) fail();
    return n;
  }
  bool done() const { return pos_ == data_.size(); }

  [[noreturn]] static void fail() { throw Error("index.format", "malformed index file"); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) fail();
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

void write_section(std::ostream& out, const char (&tag)[5], const std::string& payload) {
  Writer w;
  w.u64(payload.size());
  out.write(tag, 4);
  const auto header = w.take();
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

}  // namespace

void SentenceIndex::save(std::ostream& out) const {
  out.write(kMagic.data(), kMagic.size());
  {
    Writer w;
    w.u32(kVersion);
    auto v = w.take();
    out.write(v.data(), static_cast<std::streamsize>(v.size()));
  }

  Writer store;
  store.u32(static_cast<std::uint32_t>(store_.size()));
  for (const auto& s : store_) {
    store.str(s.id);
    store.str(s.text);
    store.u32(static_cast<std::uint32_t>(s.tokens.size()));
    for (const auto& t : s.tokens) {
      store.str(t.surface);
      store.u32(static_cast<std::uint32_t>(t.start));
      store.u32(static_cast<std::uint32_t>(t.end));
    }
    store.u32(static_cast<std::uint32_t>(s.layers.size()));
    for (const auto& [name, spans] : s.layers) {
      store.str(name);
      store.u32(static_cast<std::uint32_t>(spans.size()));
      for (const auto& sp : spans) {
        store.u32(static_cast<std::uint32_t>(sp.first_token));
        store.u32(static_cast<std::uint32_t>(sp.last_token));
        store.str(sp.tag);
      }
    }
  }
  write_section(out, "STOR", store.take());

  std::vector<const std::string*> terms;
  for (const auto& [t, p] : postings_) terms.push_back(&t);
  std::sort(terms.begin(), terms.end(), [](auto a, auto b) { return *a < *b; });
  Writer post;
  post.u32(static_cast<std::uint32_t>(terms.size()));
  for (const auto* t : terms) {
    post.str(*t);
    const auto& list = postings_.at(*t);
    post.u32(static_cast<std::uint32_t>(list.size()));
    for (const auto& p : list) {
      post.u32(p.sentence);
      post.u32(static_cast<std::uint32_t>(p.positions.size()));
      for (auto pos : p.positions) post.u32(pos);
    }
  }
  write_section(out, "POST", post.take());

  auto write_layer_list = [](Writer& w, const std::vector<LayerPosting>& list) {
    w.u32(static_cast<std::uint32_t>(list.size()));
    for (const auto& p : list) {
      w.u32(p.sentence);
      w.u32(static_cast<std::uint32_t>(p.spans.size()));
      for (const auto& s : p.spans) {
        w.u32(s.first);
        w.u32(s.last);
      }
    }
  };
  Writer lay;
  lay.u32(static_cast<std::uint32_t>(layers_.size()));
  for (const auto& [name, layer] : layers_) {
    lay.str(name);
    write_layer_list(lay, layer.all);
    lay.u32(static_cast<std::uint32_t>(layer.by_tag.size()));
    for (const auto& [tag, list] : layer.by_tag) {
      lay.str(tag);
      write_layer_list(lay, list);
    }
  }
  write_section(out, "LAYR", lay.take());
  if (!out) throw Error("index.io", "failed writing index");
}

SentenceIndex SentenceIndex::load(std::istream& in) {
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  Reader r(data);
  if (r.bytes(kMagic.size()) != std::string_view(kMagic.data(), kMagic.size())) {
    throw Error("index.format", "not an index file (bad magic)");
  }
  if (auto v = r.u32(); v != kVersion) {
    throw Error("index.format", "unsupported index version " + std::to_string(v));
  }

  SentenceIndex idx;
  auto section = [&](std::string_view tag) {
    if (r.bytes(4) != tag) Reader::fail();
    auto len = r.u64();
    if (len > data.size()) Reader::fail();
    return Reader(r.bytes(static_cast<std::size_t>(len)));
  };

  {
    auto s = section("STOR");
    const auto n = s.count(8);
    idx.store_.resize(n);
    for (auto& rec : idx.store_) {
      rec.id = s.str();
      rec.text = s.str();
      rec.tokens.resize(s.count(12));
      for (auto& t : rec.tokens) {
        t.surface = s.str();
        t.start = s.u32();
        t.end = s.u32();
      }
      const auto nl = s.count(8);
      for (std::uint32_t l = 0; l < nl; ++l) {
        auto name = s.str();
        auto& spans = rec.layers[name];
        spans.resize(s.count(12));
        for (auto& sp : spans) {
          sp.first_token = s.u32();
          sp.last_token = s.u32();
          sp.tag = s.str();
        }
      }
    }
    if (!s.done()) Reader::fail();
  }
  const auto n_sentences = idx.store_.size();
  auto check_sentence = [&](std::uint32_t ord) {
    if (ord >= n_sentences) Reader::fail();
  };
  {
    auto s = section("POST");
    const auto nt = s.count(8);
    for (std::uint32_t i = 0; i < nt; ++i) {
      auto term = s.str();
      auto& list = idx.postings_[term];
      list.resize(s.count(8));
      for (auto& p : list) {
        p.sentence = s.u32();
        check_sentence(p.sentence);
        p.positions.resize(s.count(4));
        for (auto& pos : p.positions) pos = s.u32();
      }
    }
    if (!s.done()) Reader::fail();
  }
  {
    auto s = section("LAYR");
    auto read_list = [&](std::vector<LayerPosting>& list) {
      list.resize(s.count(8));
      for (auto& p : list) {
        p.sentence = s.u32();
        check_sentence(p.sentence);
        p.spans.resize(s.count(8));
        for (auto& sp : p.spans) {
          sp.first = s.u32();
          sp.last = s.u32();
        }
      }
    };
    const auto nl = s.count(8);
    for (std::uint32_t i = 0; i < nl; ++i) {
      auto& layer = idx.layers_[s.str()];
      read_list(layer.all);
      const auto ntags = s.count(8);
      for (std::uint32_t t = 0; t < ntags; ++t) read_list(layer.by_tag[s.str()]);
    }
    if (!s.done()) Reader::fail();
  }
  if (!r.done()) Reader::fail();
  try {
    for (const auto& rec : idx.store_) text::validate(rec);
  } catch (const Error&) {
    Reader::fail();
  }
  return idx;
}

void SentenceIndex::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("index.io", "cannot write '" + path + "'");
  save(out);
}

SentenceIndex SentenceIndex::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("index.io", "cannot read '" + path + "'");
  return load(in);
}

}  // namespace debater::index
