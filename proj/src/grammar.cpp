#include "uie/grammar.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "uie/error.hpp"

namespace uie {

std::string task_name(Task t) {
    switch (t) {
        case Task::NER: return "NER";
        case Task::RE: return "RE";
        case Task::EE: return "EE";
    }
    return "?";
}

Task task_from_name(const std::string& name) {
    if (name == "NER") return Task::NER;
    if (name == "RE") return Task::RE;
    if (name == "EE") return Task::EE;
    throw DataError("unknown task '" + name + "' (expected NER, RE or EE)");
}

static bool json_string_safe(const std::string& s) {
    return s.find('"') == std::string::npos && s.find('\\') == std::string::npos;
}

void Schema::validate() const {
    if (labels.empty()) throw DataError("schema has no labels");
    if (labels.size() > 64) throw DataError("schema has more than 64 labels");
    for (const std::string& l : labels) {
        if (l.empty()) throw DataError("schema label is empty");
        if (!json_string_safe(l)) throw DataError("label '" + l + "' contains '\"' or '\\'");
    }
    std::vector<std::string> sorted = labels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw DataError("schema labels are not distinct");
    }
    if (task != Task::EE) {
        if (!roles.empty()) throw DataError("roles are only valid for EE schemas");
        return;
    }
    for (const auto& [event, role_list] : roles) {
        if (std::find(labels.begin(), labels.end(), event) == labels.end()) {
            throw DataError("role map key '" + event + "' is not a schema label");
        }
        for (const std::string& r : role_list) {
            if (r.empty()) throw DataError("empty role under event '" + event + "'");
            if (!json_string_safe(r)) throw DataError("role '" + r + "' contains '\"' or '\\'");
        }
        std::vector<std::string> rs = role_list;
        std::sort(rs.begin(), rs.end());
        if (std::adjacent_find(rs.begin(), rs.end()) != rs.end()) {
            throw DataError("duplicate role under event '" + event + "'");
        }
    }
}

nlohmann::json Schema::to_json() const {
    nlohmann::json j{{"task", task_name(task)}, {"labels", labels}};
    if (task == Task::EE) j["roles"] = roles;
    return j;
}

Schema Schema::from_json(const nlohmann::json& j) {
    Schema s;
    try {
        s.task = task_from_name(j.at("task").get<std::string>());
        s.labels = j.at("labels").get<std::vector<std::string>>();
        if (j.contains("roles")) {
            s.roles = j.at("roles").get<std::map<std::string, std::vector<std::string>>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid schema json: ") + e.what());
    }
    s.validate();
    return s;
}

TokenMask::TokenMask(int vocab_size)
    : bits_(static_cast<size_t>((vocab_size + 63) / 64), 0), vocab_size_(vocab_size) {}

void TokenMask::add(TokenId id) {
    if (id < 0 || id >= vocab_size_) throw ContractViolation("token id outside mask range");
    uint64_t& word = bits_[static_cast<size_t>(id) >> 6];
    uint64_t bit = 1ULL << (id & 63);
    if (!(word & bit)) {
        word |= bit;
        ++count_;
    }
}

bool TokenMask::contains(TokenId id) const {
    if (id < 0 || id >= vocab_size_) return false;
    return (bits_[static_cast<size_t>(id) >> 6] >> (id & 63)) & 1;
}

std::vector<TokenId> TokenMask::to_vector() const {
    std::vector<TokenId> out;
    out.reserve(static_cast<size_t>(count_));
    for (TokenId id = 0; id < vocab_size_; ++id) {
        if (contains(id)) out.push_back(id);
    }
    return out;
}

const char* mode_name(GrammarState::Mode m) {
    using Mode = GrammarState::Mode;
    switch (m) {
        case Mode::Start: return "Start";
        case Mode::ArrayFirst: return "ArrayFirst";
        case Mode::ArrayNext: return "ArrayNext";
        case Mode::Literal: return "Literal";
        case Mode::InLabel: return "InLabel";
        case Mode::InRole: return "InRole";
        case Mode::InSpan: return "InSpan";
        case Mode::AfterSpan: return "AfterSpan";
        case Mode::AfterSpanList: return "AfterSpanList";
        case Mode::ArgsFirst: return "ArgsFirst";
        case Mode::ArgsNext: return "ArgsNext";
        case Mode::Accept: return "Accept";
    }
    return "?";
}

namespace detail {

struct TrieNode {
    std::map<TokenId, int32_t> children;
    int32_t complete = -1;  // index completing exactly at this node
    uint64_t below = 0;     // indices completing at or below this node
};

struct Trie {
    std::vector<TrieNode> nodes{TrieNode{}};

    void insert(const TokenSequence& seq, int32_t index, const std::string& what) {
        int32_t at = 0;
        for (TokenId tok : seq) {
            auto it = nodes[static_cast<size_t>(at)].children.find(tok);
            if (it == nodes[static_cast<size_t>(at)].children.end()) {
                nodes.push_back(TrieNode{});
                int32_t child = static_cast<int32_t>(nodes.size() - 1);
                nodes[static_cast<size_t>(at)].children.emplace(tok, child);
                at = child;
            } else {
                at = it->second;
            }
        }
        if (nodes[static_cast<size_t>(at)].complete >= 0) {
            throw DataError("two " + what + " strings tokenize identically");
        }
        nodes[static_cast<size_t>(at)].complete = index;
    }

    // Children are always created after their parent, so a reverse pass sees
    // every child before its parent.
    void finalize() {
        for (size_t i = nodes.size(); i-- > 0;) {
            TrieNode& n = nodes[i];
            n.below = n.complete >= 0 ? (1ULL << n.complete) : 0;
            for (const auto& [tok, child] : n.children) {
                n.below |= nodes[static_cast<size_t>(child)].below;
            }
        }
    }
};

struct Literal {
    TokenSequence toks;
    GrammarState::Mode then_mode = GrammarState::Mode::Accept;
    GrammarState::SpanSlot then_slot = GrammarState::SpanSlot::None;
    bool resets_object = false;  // entering a fresh top-level object
};

struct GrammarTables {
    Vocab vocab;
    Schema schema;
    SpanTrie span_trie;

    TokenId t_lbracket, t_rbracket, t_lbrace, t_rbrace, t_quote, t_colon, t_comma;

    Trie label_trie;
    std::vector<Trie> role_tries;      // per label index (EE)
    std::vector<bool> role_available;  // per label index (EE)
    uint64_t all_labels_mask = 0;

    std::vector<Literal> literals;
    int32_t lit_open_obj = -1;        // after '{' at ArrayFirst
    int32_t lit_open_obj_comma = -1;  // after ',' at ArrayNext
    int32_t lit_after_label = -1;     // after the label's closing quote
    int32_t lit_next_key = -1;        // NER: after ',' at AfterSpanList
    int32_t lit_span_open = -1;       // NER: after ',' at AfterSpan
    int32_t lit_re_object = -1;       // RE: after the subject span
    int32_t lit_close_obj = -1;       // '}' closing the top-level object
    int32_t lit_ee_args = -1;         // EE: after the trigger span
    int32_t lit_role = -1;            // EE: after '{' at ArgsFirst
    int32_t lit_role_comma = -1;      // EE: after ',' at ArgsNext
    int32_t lit_ee_span = -1;         // EE: after the role's closing quote
    int32_t lit_arg_close = -1;       // EE: '}' closing an argument object

    std::vector<bool> span_forbidden;  // token strings that may not appear inside a span
};

}  // namespace detail

using detail::GrammarTables;
using Mode = GrammarState::Mode;
using SpanSlot = GrammarState::SpanSlot;

static TokenSequence encode_or_fail(const Vocab& v, const std::string& text,
                                    const std::string& what) {
    try {
        return v.encode(text);
    } catch (const DataError& e) {
        throw DataError(what + " '" + text + "' is not tokenizable: " + e.what());
    }
}

static int32_t add_literal(GrammarTables& t, const std::string& text, Mode then_mode,
                           SpanSlot then_slot = SpanSlot::None, bool resets_object = false) {
    detail::Literal lit;
    lit.toks = encode_or_fail(t.vocab, text, "output scaffold");
    lit.then_mode = then_mode;
    lit.then_slot = then_slot;
    lit.resets_object = resets_object;
    t.literals.push_back(std::move(lit));
    return static_cast<int32_t>(t.literals.size() - 1);
}

GrammarState init_state(const Vocab& v, const Schema& schema, const SpanTrie& trie) {
    schema.validate();

    auto tables = std::make_shared<GrammarTables>();
    GrammarTables& t = *tables;
    t.vocab = v;
    t.schema = schema;
    t.span_trie = trie;

    t.t_lbracket = v.structural_id('[');
    t.t_rbracket = v.structural_id(']');
    t.t_lbrace = v.structural_id('{');
    t.t_rbrace = v.structural_id('}');
    t.t_quote = v.structural_id('"');
    t.t_colon = v.structural_id(':');
    t.t_comma = v.structural_id(',');

    // A span is a JSON string body, so tokens containing '"' or '\' can never
    // appear inside one (escapes are out of scope).
    t.span_forbidden.assign(static_cast<size_t>(v.size()), false);
    for (TokenId id = 0; id < v.size(); ++id) {
        if (!json_string_safe(v.token(id))) t.span_forbidden[static_cast<size_t>(id)] = true;
    }
    bool usable = false;
    for (TokenId tok : trie.context) {
        if (tok < 0 || tok >= v.size()) throw DataError("context token id out of range");
        if (!t.span_forbidden[static_cast<size_t>(tok)]) usable = true;
    }
    if (!usable) throw DataError("context has no usable span tokens");

    for (size_t i = 0; i < schema.labels.size(); ++i) {
        TokenSequence seq = encode_or_fail(v, schema.labels[i], "label");
        t.label_trie.insert(seq, static_cast<int32_t>(i), "label");
        t.all_labels_mask |= 1ULL << i;
    }
    t.label_trie.finalize();

    if (schema.task == Task::EE) {
        t.role_tries.resize(schema.labels.size());
        t.role_available.assign(schema.labels.size(), false);
        for (size_t i = 0; i < schema.labels.size(); ++i) {
            auto it = schema.roles.find(schema.labels[i]);
            if (it == schema.roles.end() || it->second.empty()) continue;
            for (size_t r = 0; r < it->second.size(); ++r) {
                TokenSequence seq = encode_or_fail(v, it->second[r], "role");
                t.role_tries[i].insert(seq, static_cast<int32_t>(r), "role");
            }
            t.role_tries[i].finalize();
            t.role_available[i] = true;
        }
    }

    switch (schema.task) {
        case Task::NER:
            t.lit_open_obj = add_literal(t, "\"", Mode::InLabel, SpanSlot::None, true);
            t.lit_open_obj_comma = add_literal(t, "{\"", Mode::InLabel, SpanSlot::None, true);
            t.lit_after_label = add_literal(t, ":[\"", Mode::InSpan, SpanSlot::NerItem);
            t.lit_next_key = add_literal(t, "\"", Mode::InLabel);
            t.lit_span_open = add_literal(t, "\"", Mode::InSpan, SpanSlot::NerItem);
            break;
        case Task::RE:
            t.lit_open_obj = add_literal(t, "\"relation\":\"", Mode::InLabel, SpanSlot::None, true);
            t.lit_open_obj_comma =
                add_literal(t, "{\"relation\":\"", Mode::InLabel, SpanSlot::None, true);
            t.lit_after_label = add_literal(t, ",\"subject\":\"", Mode::InSpan, SpanSlot::ReSubject);
            t.lit_re_object = add_literal(t, ",\"object\":\"", Mode::InSpan, SpanSlot::ReObject);
            t.lit_close_obj = add_literal(t, "}", Mode::ArrayNext);
            break;
        case Task::EE:
            t.lit_open_obj =
                add_literal(t, "\"event_type\":\"", Mode::InLabel, SpanSlot::None, true);
            t.lit_open_obj_comma =
                add_literal(t, "{\"event_type\":\"", Mode::InLabel, SpanSlot::None, true);
            t.lit_after_label = add_literal(t, ",\"trigger\":\"", Mode::InSpan, SpanSlot::EeTrigger);
            t.lit_ee_args = add_literal(t, ",\"arguments\":[", Mode::ArgsFirst);
            t.lit_role = add_literal(t, "\"role\":\"", Mode::InRole);
            t.lit_role_comma = add_literal(t, "{\"role\":\"", Mode::InRole);
            t.lit_ee_span = add_literal(t, ",\"span\":\"", Mode::InSpan, SpanSlot::EeArg);
            t.lit_arg_close = add_literal(t, "}", Mode::ArgsNext);
            t.lit_close_obj = add_literal(t, "}", Mode::ArrayNext);
            break;
    }

    GrammarState s;
    s.tables = std::move(tables);
    s.mode = Mode::Start;
    return s;
}

bool is_accepting(const GrammarState& state) { return state.mode == Mode::Accept; }

TokenMask allowed_tokens(const GrammarState& state) {
    if (!state.tables) throw ContractViolation("uninitialized grammar state");
    const GrammarTables& t = *state.tables;
    TokenMask mask(t.vocab.size());

    switch (state.mode) {
        case Mode::Start:
            mask.add(t.t_lbracket);
            break;
        case Mode::ArrayFirst:
            mask.add(t.t_rbracket);
            mask.add(t.t_lbrace);
            break;
        case Mode::ArrayNext:
            mask.add(t.t_comma);
            mask.add(t.t_rbracket);
            break;
        case Mode::Literal: {
            const detail::Literal& lit = t.literals[static_cast<size_t>(state.literal_id)];
            mask.add(lit.toks[static_cast<size_t>(state.literal_pos)]);
            break;
        }
        case Mode::InLabel: {
            uint64_t avail = t.schema.task == Task::NER ? (t.all_labels_mask & ~state.used_labels)
                                                        : t.all_labels_mask;
            const detail::TrieNode& node =
                t.label_trie.nodes[static_cast<size_t>(state.trie_node)];
            for (const auto& [tok, child] : node.children) {
                if (t.label_trie.nodes[static_cast<size_t>(child)].below & avail) mask.add(tok);
            }
            if (node.complete >= 0 && ((1ULL << node.complete) & avail)) mask.add(t.t_quote);
            break;
        }
        case Mode::InRole: {
            const detail::Trie& trie = t.role_tries[static_cast<size_t>(state.event_label)];
            const detail::TrieNode& node = trie.nodes[static_cast<size_t>(state.trie_node)];
            for (const auto& [tok, child] : node.children) mask.add(tok);
            if (node.complete >= 0) mask.add(t.t_quote);
            break;
        }
        case Mode::InSpan: {
            for (TokenId tok : allowed_continuations(t.span_trie, state.span)) {
                if (!t.span_forbidden[static_cast<size_t>(tok)]) mask.add(tok);
            }
            if (state.span.matched_len >= 1) mask.add(t.t_quote);
            break;
        }
        case Mode::AfterSpan:
            mask.add(t.t_comma);
            mask.add(t.t_rbracket);
            break;
        case Mode::AfterSpanList:
            mask.add(t.t_rbrace);
            if (state.used_labels != t.all_labels_mask) mask.add(t.t_comma);
            break;
        case Mode::ArgsFirst:
            mask.add(t.t_rbracket);
            if (t.role_available[static_cast<size_t>(state.event_label)]) mask.add(t.t_lbrace);
            break;
        case Mode::ArgsNext:
            mask.add(t.t_comma);
            mask.add(t.t_rbracket);
            break;
        case Mode::Accept:
            throw ContractViolation("allowed_tokens on an accepting state");
    }
    return mask;
}

static void enter_literal(GrammarState& s, int32_t lit_id) {
    s.mode = Mode::Literal;
    s.literal_id = lit_id;
    s.literal_pos = 0;
}

// Completes a forced run: applies the literal's target mode and resets the
// per-mode cursors it needs.
static void finish_literal(GrammarState& s) {
    const detail::Literal& lit = s.tables->literals[static_cast<size_t>(s.literal_id)];
    if (lit.resets_object) {
        s.used_labels = 0;
        s.event_label = -1;
    }
    s.mode = lit.then_mode;
    s.slot = lit.then_slot;
    s.literal_id = -1;
    s.literal_pos = 0;
    if (s.mode == Mode::InSpan) {
        s.span = start_cursor(s.tables->span_trie);
    } else if (s.mode == Mode::InLabel || s.mode == Mode::InRole) {
        s.trie_node = 0;
    }
}

GrammarState advance(const GrammarState& state, TokenId tok) {
    if (state.mode == Mode::Accept) {
        throw ContractViolation("advance on an accepting state");
    }
    if (!allowed_tokens(state).contains(tok)) {
        std::string tok_str = tok >= 0 && tok < state.tables->vocab.size()
                                  ? "'" + state.tables->vocab.token(tok) + "'"
                                  : "#" + std::to_string(tok);
        throw DataError(std::string("token ") + tok_str + " (id " + std::to_string(tok) +
                        ") is not allowed in mode " + mode_name(state.mode));
    }

    const GrammarTables& t = *state.tables;
    GrammarState s = state;

    switch (s.mode) {
        case Mode::Start:
            s.mode = Mode::ArrayFirst;
            break;
        case Mode::ArrayFirst:
            if (tok == t.t_rbracket) {
                s.mode = Mode::Accept;
            } else {
                enter_literal(s, t.lit_open_obj);
            }
            break;
        case Mode::ArrayNext:
            if (tok == t.t_rbracket) {
                s.mode = Mode::Accept;
            } else {
                enter_literal(s, t.lit_open_obj_comma);
            }
            break;
        case Mode::Literal:
            ++s.literal_pos;
            if (s.literal_pos ==
                static_cast<int32_t>(t.literals[static_cast<size_t>(s.literal_id)].toks.size())) {
                finish_literal(s);
            }
            break;
        case Mode::InLabel: {
            if (tok == t.t_quote) {
                int32_t label = t.label_trie.nodes[static_cast<size_t>(s.trie_node)].complete;
                if (t.schema.task == Task::NER) s.used_labels |= 1ULL << label;
                if (t.schema.task == Task::EE) s.event_label = label;
                enter_literal(s, t.lit_after_label);
            } else {
                s.trie_node =
                    t.label_trie.nodes[static_cast<size_t>(s.trie_node)].children.at(tok);
            }
            break;
        }
        case Mode::InRole: {
            const detail::Trie& trie = t.role_tries[static_cast<size_t>(s.event_label)];
            if (tok == t.t_quote) {
                enter_literal(s, t.lit_ee_span);
            } else {
                s.trie_node = trie.nodes[static_cast<size_t>(s.trie_node)].children.at(tok);
            }
            break;
        }
        case Mode::InSpan:
            if (tok == t.t_quote) {
                switch (s.slot) {
                    case SpanSlot::NerItem: s.mode = Mode::AfterSpan; break;
                    case SpanSlot::ReSubject: enter_literal(s, t.lit_re_object); break;
                    case SpanSlot::ReObject: enter_literal(s, t.lit_close_obj); break;
                    case SpanSlot::EeTrigger: enter_literal(s, t.lit_ee_args); break;
                    case SpanSlot::EeArg: enter_literal(s, t.lit_arg_close); break;
                    case SpanSlot::None:
                        throw ContractViolation("span slot missing in InSpan");
                }
                if (s.mode != Mode::Literal) s.slot = SpanSlot::None;
            } else {
                s.span = step(t.span_trie, s.span, tok);
            }
            break;
        case Mode::AfterSpan:
            if (tok == t.t_comma) {
                enter_literal(s, t.lit_span_open);
            } else {
                s.mode = Mode::AfterSpanList;
            }
            break;
        case Mode::AfterSpanList:
            if (tok == t.t_comma) {
                enter_literal(s, t.lit_next_key);
            } else {
                s.mode = Mode::ArrayNext;
            }
            break;
        case Mode::ArgsFirst:
            if (tok == t.t_lbrace) {
                enter_literal(s, t.lit_role);
            } else {
                enter_literal(s, t.lit_close_obj);
            }
            break;
        case Mode::ArgsNext:
            if (tok == t.t_comma) {
                enter_literal(s, t.lit_role_comma);
            } else {
                enter_literal(s, t.lit_close_obj);
            }
            break;
        case Mode::Accept:
            break;  // unreachable
    }
    return s;
}

GrammarState advance_all(GrammarState state, const TokenSequence& toks) {
    for (TokenId tok : toks) state = advance(state, tok);
    return state;
}

}  // namespace uie
