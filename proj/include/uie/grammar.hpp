#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "uie/span_index.hpp"
#include "uie/token.hpp"
#include "uie/vocab.hpp"

namespace uie {

enum class Task { NER, RE, EE };

std::string task_name(Task t);
Task task_from_name(const std::string& name);

// Extraction task description: what the instruction may ask for.
struct Schema {
    Task task = Task::NER;
    std::vector<std::string> labels;                        // entity/relation/event types
    std::map<std::string, std::vector<std::string>> roles;  // event type -> roles (EE only)

    nlohmann::json to_json() const;
    static Schema from_json(const nlohmann::json& j);
    void validate() const;
};

// Allowed-next-token set over a fixed vocabulary.
class TokenMask {
public:
    TokenMask() = default;
    explicit TokenMask(int vocab_size);

    void add(TokenId id);
    bool contains(TokenId id) const;
    int count() const { return count_; }
    bool empty() const { return count_ == 0; }
    int vocab_size() const { return vocab_size_; }
    std::vector<TokenId> to_vector() const;  // ascending

private:
    std::vector<uint64_t> bits_;
    int vocab_size_ = 0;
    int count_ = 0;
};

namespace detail {
struct GrammarTables;
}

// One position of the output-format automaton. A compact value: copying a
// state forks an independent decode branch. The compiled tables behind it are
// immutable and shared.
struct GrammarState {
    enum class Mode : uint8_t {
        Start,           // expect '['
        ArrayFirst,      // ']' (empty result) or '{'
        ArrayNext,       // ',' (next object) or ']'
        Literal,         // forced token run
        InLabel,         // walking the label trie
        InRole,          // walking the role trie of the current event type
        InSpan,          // walking the span trie
        AfterSpan,       // NER span list: ',' or ']'
        AfterSpanList,   // NER object: ',' (another label) or '}'
        ArgsFirst,       // EE arguments: ']' or '{'
        ArgsNext,        // EE arguments: ',' or ']'
        Accept,          // absorbing
    };

    // Role of the span currently being generated; selects the continuation
    // after its closing quote.
    enum class SpanSlot : uint8_t { None, NerItem, ReSubject, ReObject, EeTrigger, EeArg };

    std::shared_ptr<const detail::GrammarTables> tables;
    Mode mode = Mode::Start;
    SpanSlot slot = SpanSlot::None;
    int32_t literal_id = -1;
    int32_t literal_pos = 0;
    int32_t trie_node = 0;        // InLabel / InRole cursor
    uint64_t used_labels = 0;     // label keys already emitted in the current object (NER)
    int32_t event_label = -1;     // label index of the current event object (EE)
    SpanCursor span;
};

const char* mode_name(GrammarState::Mode m);

// Compiles the schema's label tries and JSON scaffold against the vocabulary
// and fuses them with the span trie. Every label, role and scaffold piece must
// be tokenizable; the context must offer at least one quote-free span token.
GrammarState init_state(const Vocab& v, const Schema& schema, const SpanTrie& trie);

// Exact legal-next set. Never empty for a live state; calling it on an
// accepting state is a contract violation.
TokenMask allowed_tokens(const GrammarState& state);

// Deterministic successor. A disallowed token throws DataError carrying the
// state mode and the token — this is the enforcement point.
GrammarState advance(const GrammarState& state, TokenId tok);

// True iff a complete, schema-valid JSON value has been consumed.
bool is_accepting(const GrammarState& state);

// Convenience: walk a whole token sequence from an initial state.
// Throws where advance would; returns the final state.
GrammarState advance_all(GrammarState state, const TokenSequence& toks);

}  // namespace uie
