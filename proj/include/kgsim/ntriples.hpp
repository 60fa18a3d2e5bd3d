#pragma once

#include <string_view>

namespace kgsim::ntriples {

enum class TermKind { iri, blank_node, literal };

/// A term as it appears in the source. For IRIs `text` excludes the angle
/// brackets; for blank nodes it keeps the `_:` marker; for literals it is the
/// full token including quotes and any datatype or language suffix.
struct Term {
  TermKind kind = TermKind::iri;
  std::string_view text;
};

enum class LineKind { empty, triple, malformed };

struct Triple {
  Term subject;
  Term predicate;
  Term object;
};

struct ParsedLine {
  LineKind kind = LineKind::empty;
  Triple triple;
};

/// Parses one N-Triples line (without the trailing newline). Views point into
/// `line`. Blank lines and comment-only lines are `empty`.
ParsedLine parse_line(std::string_view line);

}  // namespace kgsim::ntriples
