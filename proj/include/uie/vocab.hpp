#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "uie/token.hpp"

namespace uie {

// The JSON punctuation; each is always its own single-character token so the
// output-format automaton can work purely at token level.
inline constexpr std::array<char, 7> kStructuralChars = {'[', ']', '{', '}', '"', ':', ','};

inline constexpr std::string_view kBosToken = "<bos>";
inline constexpr std::string_view kEosToken = "<eos>";

// Deterministic toy tokenizer: dense ids, greedy longest-match encoding.
// Immutable after construction; safe to share across threads.
class Vocab {
public:
    int size() const { return static_cast<int>(tokens_.size()); }
    const std::string& token(TokenId id) const;
    std::optional<TokenId> find(std::string_view token) const;

    TokenId bos_id() const { return bos_id_; }
    TokenId eos_id() const { return eos_id_; }
    bool is_structural(TokenId id) const;
    TokenId structural_id(char c) const;

    // Greedy longest-match tokenization; decode(encode(s)) == s on covered text.
    // Throws DataError naming the position of the first uncovered character.
    TokenSequence encode(std::string_view text) const;
    // Concatenation of token strings. Throws DataError on an out-of-range id.
    std::string decode(const TokenSequence& seq) const;

    nlohmann::json to_json() const;
    static Vocab from_json(const nlohmann::json& j);

    friend Vocab build_vocab(const std::set<char>& alphabet,
                             const std::vector<std::string>& extra_tokens);

private:
    Vocab() = default;
    void index_tokens();  // rebuilds id map, structural set, max token length

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> id_of_;
    std::vector<bool> structural_;
    TokenId bos_id_ = -1;
    TokenId eos_id_ = -1;
    size_t max_token_len_ = 0;
};

// Tokens, in id order: structural characters, then the sorted alphabet, then
// extra tokens in the given order, then BOS and EOS. Alphabet characters that
// are structural are already covered; a duplicate extra token is an error.
Vocab build_vocab(const std::set<char>& alphabet, const std::vector<std::string>& extra_tokens = {});

// Distinct characters of a batch of strings, convenience for vocab assembly.
std::set<char> collect_chars(const std::vector<std::string>& texts);

}  // namespace uie
