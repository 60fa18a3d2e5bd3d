#include "kgsim/ntriples.hpp"

#include <cctype>
#include <optional>

namespace kgsim::ntriples {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }
  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }

  std::optional<Term> iri() {
    if (peek() != '<') return std::nullopt;
    const std::size_t close = text_.find('>', pos_ + 1);
    if (close == std::string_view::npos) return std::nullopt;
    std::string_view body = text_.substr(pos_ + 1, close - pos_ - 1);
    for (char c : body) {
      if (c == ' ' || c == '<' || c == '"' || c == '\t') return std::nullopt;
    }
    if (body.empty()) return std::nullopt;
    pos_ = close + 1;
    return Term{TermKind::iri, body};
  }

  std::optional<Term> blank_node() {
    if (text_.substr(pos_, 2) != "_:") return std::nullopt;
    std::size_t end = pos_ + 2;
    while (end < text_.size() && !is_space(text_[end])) ++end;
    // A label directly followed by the terminating dot: "_:b1." is not valid
    // N-Triples, but a trailing '.' belongs to the statement.
    if (end > pos_ + 2 && text_[end - 1] == '.' && end == text_.size()) --end;
    if (end == pos_ + 2) return std::nullopt;
    Term term{TermKind::blank_node, text_.substr(pos_, end - pos_)};
    pos_ = end;
    return term;
  }

  std::optional<Term> literal() {
    if (peek() != '"') return std::nullopt;
    const std::size_t start = pos_;
    std::size_t at = pos_ + 1;
    for (;;) {
      if (at >= text_.size()) return std::nullopt;
      if (text_[at] == '\\') {
        at += 2;
        continue;
      }
      if (text_[at] == '"') break;
      ++at;
    }
    ++at;
    if (at < text_.size() && text_[at] == '@') {
      ++at;
      const std::size_t tag = at;
      while (at < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[at])) || text_[at] == '-')) ++at;
      if (at == tag) return std::nullopt;
    } else if (text_.substr(at, 2) == "^^") {
      pos_ = at + 2;
      if (!iri()) return std::nullopt;
      at = pos_;
    }
    pos_ = at;
    return Term{TermKind::literal, text_.substr(start, at - start)};
  }

  bool expect(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

ParsedLine parse_line(std::string_view line) {
  Cursor cursor(line);
  cursor.skip_space();
  if (cursor.done() || cursor.peek() == '#') return {};

  ParsedLine malformed{LineKind::malformed, {}};

  auto subject = cursor.iri();
  if (!subject) subject = cursor.blank_node();
  if (!subject || !is_space(cursor.peek())) return malformed;
  cursor.skip_space();

  auto predicate = cursor.iri();
  if (!predicate || !is_space(cursor.peek())) return malformed;
  cursor.skip_space();

  auto object = cursor.iri();
  if (!object) object = cursor.blank_node();
  if (!object) object = cursor.literal();
  if (!object) return malformed;
  cursor.skip_space();

  if (!cursor.expect('.')) return malformed;
  cursor.skip_space();
  if (!cursor.done() && cursor.peek() != '#') return malformed;

  return {LineKind::triple, {*subject, *predicate, *object}};
}

}  // namespace kgsim::ntriples
