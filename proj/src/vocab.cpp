#include "uie/vocab.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "uie/error.hpp"

namespace uie {

const std::string& Vocab::token(TokenId id) const {
    if (id < 0 || id >= size()) {
        throw DataError("token id " + std::to_string(id) + " out of range (|V| = " +
                        std::to_string(size()) + ")");
    }
    return tokens_[static_cast<size_t>(id)];
}

std::optional<TokenId> Vocab::find(std::string_view token) const {
    auto it = id_of_.find(std::string(token));
    if (it == id_of_.end()) return std::nullopt;
    return it->second;
}

bool Vocab::is_structural(TokenId id) const {
    return id >= 0 && id < size() && structural_[static_cast<size_t>(id)];
}

TokenId Vocab::structural_id(char c) const {
    auto it = id_of_.find(std::string(1, c));
    if (it == id_of_.end() || !structural_[static_cast<size_t>(it->second)]) {
        throw DataError(std::string("'") + c + "' is not a structural token");
    }
    return it->second;
}

TokenSequence Vocab::encode(std::string_view text) const {
    TokenSequence out;
    out.reserve(text.size());
    size_t pos = 0;
    while (pos < text.size()) {
        size_t cap = std::min(max_token_len_, text.size() - pos);
        TokenId match = -1;
        for (size_t len = cap; len >= 1; --len) {
            auto it = id_of_.find(std::string(text.substr(pos, len)));
            if (it != id_of_.end()) {
                match = it->second;
                pos += len;
                break;
            }
        }
        if (match < 0) {
            throw DataError("no token covers input at position " + std::to_string(pos) +
                            " ('" + std::string(text.substr(pos, 1)) + "')");
        }
        out.push_back(match);
    }
    return out;
}

std::string Vocab::decode(const TokenSequence& seq) const {
    std::string out;
    for (TokenId id : seq) out += token(id);
    return out;
}

void Vocab::index_tokens() {
    id_of_.clear();
    id_of_.reserve(tokens_.size());
    structural_.assign(tokens_.size(), false);
    max_token_len_ = 0;
    for (size_t i = 0; i < tokens_.size(); ++i) {
        const std::string& tok = tokens_[i];
        if (tok.empty()) throw DataError("empty token string at id " + std::to_string(i));
        auto [it, inserted] = id_of_.emplace(tok, static_cast<TokenId>(i));
        if (!inserted) throw DataError("duplicate token string '" + tok + "'");
        if (tok.size() == 1 &&
            std::find(kStructuralChars.begin(), kStructuralChars.end(), tok[0]) !=
                kStructuralChars.end()) {
            structural_[i] = true;
        }
        max_token_len_ = std::max(max_token_len_, tok.size());
    }
}

Vocab build_vocab(const std::set<char>& alphabet, const std::vector<std::string>& extra_tokens) {
    if (alphabet.empty()) throw DataError("vocabulary alphabet must be non-empty");

    Vocab v;
    for (char c : kStructuralChars) v.tokens_.emplace_back(1, c);
    for (char c : alphabet) {
        if (std::find(kStructuralChars.begin(), kStructuralChars.end(), c) !=
            kStructuralChars.end()) {
            continue;  // union with the structural set
        }
        v.tokens_.emplace_back(1, c);
    }
    for (const std::string& tok : extra_tokens) {
        if (std::find(v.tokens_.begin(), v.tokens_.end(), tok) != v.tokens_.end()) {
            throw DataError("duplicate token string '" + tok + "'");
        }
        v.tokens_.push_back(tok);
    }
    if (std::find(v.tokens_.begin(), v.tokens_.end(), std::string(kBosToken)) != v.tokens_.end() ||
        std::find(v.tokens_.begin(), v.tokens_.end(), std::string(kEosToken)) != v.tokens_.end()) {
        throw DataError("reserved token string collides with BOS/EOS");
    }
    v.bos_id_ = static_cast<TokenId>(v.tokens_.size());
    v.tokens_.emplace_back(kBosToken);
    v.eos_id_ = static_cast<TokenId>(v.tokens_.size());
    v.tokens_.emplace_back(kEosToken);
    v.index_tokens();
    return v;
}

std::set<char> collect_chars(const std::vector<std::string>& texts) {
    std::set<char> chars;
    for (const std::string& t : texts) {
        for (char c : t) chars.insert(c);
    }
    return chars;
}

nlohmann::json Vocab::to_json() const {
    return nlohmann::json{{"tokens", tokens_}, {"bos", bos_id_}, {"eos", eos_id_}};
}

Vocab Vocab::from_json(const nlohmann::json& j) {
    Vocab v;
    try {
        v.tokens_ = j.at("tokens").get<std::vector<std::string>>();
        v.bos_id_ = j.at("bos").get<TokenId>();
        v.eos_id_ = j.at("eos").get<TokenId>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid vocab json: ") + e.what());
    }
    if (v.bos_id_ < 0 || v.bos_id_ >= v.size() || v.eos_id_ < 0 || v.eos_id_ >= v.size() ||
        v.bos_id_ == v.eos_id_) {
        throw DataError("invalid vocab json: bad bos/eos ids");
    }
    v.index_tokens();
    return v;
}

}  // namespace uie
