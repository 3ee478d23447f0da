#pragma once

// Minimal well-formedness checker for generated SVG. Accepts a prolog,
// comments, elements with quoted attributes, text and the five predefined
// entities plus numeric character references. No DTDs, no CDATA.

#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xml {

struct Element {
  std::string name;
  std::map<std::string, std::string> attrs;
  std::vector<std::unique_ptr<Element>> children;

  std::string attr(const std::string& key) const {
    const auto it = attrs.find(key);
    return it == attrs.end() ? std::string{} : it->second;
  }

  // Descendants (not self) with the given name whose class attribute equals cls, if given.
  void find_all(const std::string& tag, const std::string& cls, std::vector<const Element*>& out) const {
    for (const auto& c : children) {
      if (c->name == tag && (cls.empty() || c->attr("class") == cls)) out.push_back(c.get());
      c->find_all(tag, cls, out);
    }
  }
  std::vector<const Element*> find_all(const std::string& tag, const std::string& cls = {}) const {
    std::vector<const Element*> out;
    find_all(tag, cls, out);
    return out;
  }
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  std::unique_ptr<Element> document() {
    skip_space();
    if (starts("<?xml")) {
      const auto end = s_.find("?>", pos_);
      if (end == std::string::npos) fail("unterminated prolog");
      pos_ = end + 2;
    }
    skip_misc();
    auto root = element();
    skip_misc();
    if (pos_ != s_.size()) fail("content after the root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " at offset " + std::to_string(pos_));
  }
  bool starts(const char* lit) const { return s_.compare(pos_, std::char_traits<char>::length(lit), lit) == 0; }
  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void skip_misc() {
    for (;;) {
      skip_space();
      if (!starts("<!--")) return;
      const auto end = s_.find("-->", pos_);
      if (end == std::string::npos) fail("unterminated comment");
      pos_ = end + 3;
    }
  }
  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' || c == '.';
  }
  std::string name() {
    const std::size_t start = pos_;
    if (pos_ >= s_.size() || !(std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      fail("expected a name");
    while (pos_ < s_.size() && name_char(s_[pos_])) ++pos_;
    return s_.substr(start, pos_ - start);
  }
  void check_text(const std::string& text) const {
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == '<') fail("raw '<' in text");
      if (text[i] != '&') continue;
      const auto semi = text.find(';', i);
      if (semi == std::string::npos) fail("unterminated entity");
      const std::string ent = text.substr(i + 1, semi - i - 1);
      const bool numeric = ent.size() > 1 && ent[0] == '#';
      if (!numeric && ent != "amp" && ent != "lt" && ent != "gt" && ent != "quot" && ent != "apos")
        fail("unknown entity &" + ent + ";");
      i = semi;
    }
  }
  std::unique_ptr<Element> element() {
    if (pos_ >= s_.size() || s_[pos_] != '<') fail("expected '<'");
    ++pos_;
    auto el = std::make_unique<Element>();
    el->name = name();
    for (;;) {
      skip_space();
      if (starts("/>")) {
        pos_ += 2;
        return el;
      }
      if (starts(">")) {
        ++pos_;
        break;
      }
      const std::string key = name();
      skip_space();
      if (!starts("=")) fail("expected '=' after attribute " + key);
      ++pos_;
      skip_space();
      if (pos_ >= s_.size() || (s_[pos_] != '"' && s_[pos_] != '\'')) fail("unquoted attribute " + key);
      const char quote = s_[pos_++];
      const auto end = s_.find(quote, pos_);
      if (end == std::string::npos) fail("unterminated attribute " + key);
      const std::string value = s_.substr(pos_, end - pos_);
      check_text(value);
      if (!el->attrs.emplace(key, value).second) fail("duplicate attribute " + key);
      pos_ = end + 1;
    }
    for (;;) {
      const auto lt = s_.find('<', pos_);
      if (lt == std::string::npos) fail("unterminated element " + el->name);
      check_text(s_.substr(pos_, lt - pos_));
      pos_ = lt;
      if (starts("<!--")) {
        skip_misc();
        continue;
      }
      if (starts("</")) {
        pos_ += 2;
        if (name() != el->name) fail("mismatched closing tag for " + el->name);
        skip_space();
        if (!starts(">")) fail("expected '>'");
        ++pos_;
        return el;
      }
      el->children.push_back(element());
    }
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

// Root element, or nullopt-equivalent nullptr with the reason in error.
inline std::unique_ptr<Element> parse(const std::string& text, std::string* error = nullptr) {
  try {
    return Parser(text).document();
  } catch (const ParseError& e) {
    if (error) *error = e.what();
    return nullptr;
  }
}

}  // namespace xml
