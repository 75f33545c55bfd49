#include "uie/span_index.hpp"

#include <algorithm>

#include "uie/error.hpp"

namespace uie {

SpanTrie build_span_trie(const TokenSequence& context) {
    if (context.empty()) throw DataError("span trie requires a non-empty context");
    SpanTrie trie;
    trie.context = context;
    for (size_t i = 0; i < context.size(); ++i) {
        trie.occurrences[context[i]].push_back(static_cast<int32_t>(i));
    }
    return trie;
}

SpanCursor start_cursor(const SpanTrie& trie) {
    SpanCursor c;
    c.matched_len = 0;
    c.starts.resize(trie.context.size());
    for (size_t i = 0; i < trie.context.size(); ++i) c.starts[i] = static_cast<int32_t>(i);
    return c;
}

SpanCursor step(const SpanTrie& trie, const SpanCursor& cursor, TokenId tok) {
    if (!cursor.alive()) throw ContractViolation("step on a dead span cursor");
    SpanCursor next;
    next.matched_len = cursor.matched_len + 1;
    if (cursor.matched_len == 0) {
        auto it = trie.occurrences.find(tok);
        if (it != trie.occurrences.end()) next.starts = it->second;
        return next;
    }
    const auto n = static_cast<int32_t>(trie.context.size());
    for (int32_t s : cursor.starts) {
        int32_t at = s + cursor.matched_len;
        if (at < n && trie.context[static_cast<size_t>(at)] == tok) next.starts.push_back(s);
    }
    return next;
}

std::vector<TokenId> allowed_continuations(const SpanTrie& trie, const SpanCursor& cursor) {
    std::vector<TokenId> out;
    const auto n = static_cast<int32_t>(trie.context.size());
    for (int32_t s : cursor.starts) {
        int32_t at = s + cursor.matched_len;
        if (at < n) out.push_back(trie.context[static_cast<size_t>(at)]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace uie
