#pragma once

#include <map>
#include <vector>

#include "uie/token.hpp"

namespace uie {

// Occurrence index over one context. Immutable and shareable; the matching
// state lives in SpanCursor values.
struct SpanTrie {
    TokenSequence context;
    std::map<TokenId, std::vector<int32_t>> occurrences;  // token -> ascending positions
};

// All context positions where the current partial span matches. A cursor with
// no active starts is dead: the partial span does not occur in the context.
//
// One step costs O(|active_starts|); the first step from the start cursor uses
// the occurrence index and costs O(occurrences(token)) instead of O(|context|).
struct SpanCursor {
    std::vector<int32_t> starts;  // ascending
    int32_t matched_len = 0;

    bool alive() const { return !starts.empty(); }
};

SpanTrie build_span_trie(const TokenSequence& context);

// Cursor matching the empty span at every position.
SpanCursor start_cursor(const SpanTrie& trie);

// Keeps only the starts whose next context token equals tok. A dead result
// signals that tok is not a legal continuation. Stepping a dead cursor is a
// contract violation.
SpanCursor step(const SpanTrie& trie, const SpanCursor& cursor, TokenId tok);

// Exactly { context[s + len] : s active, s + len < |context| }, ascending.
std::vector<TokenId> allowed_continuations(const SpanTrie& trie, const SpanCursor& cursor);

}  // namespace uie
