#include "streamdec/vocabulary.hpp"

#include "streamdec/error.hpp"
#include "streamdec/text_format.hpp"

namespace streamdec {

Vocabulary::Vocabulary(std::vector<std::string> tokens, TokenId eos_id, std::string marker)
    : tokens_(std::move(tokens)), eos_id_(eos_id), marker_(std::move(marker)) {
    if (tokens_.empty()) throw Error("vocabulary is empty");
    if (eos_id_ < 0 || static_cast<std::size_t>(eos_id_) >= tokens_.size())
        throw Error("eos id " + std::to_string(eos_id_) + " outside vocabulary");
    if (marker_.empty()) throw Error("word boundary marker is empty");
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        const auto &tok = tokens_[i];
        if (tok.empty() || tok.find_first_of(" \t\r\n") != std::string::npos)
            throw Error("token " + std::to_string(i) + " is empty or contains whitespace");
        if (!index_.emplace(tok, static_cast<TokenId>(i)).second)
            throw Error("duplicate token '" + tok + "'");
    }
}

const std::string &Vocabulary::token(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
        throw Error("unknown token id " + std::to_string(id));
    return tokens_[static_cast<std::size_t>(id)];
}

bool Vocabulary::is_word_start(TokenId id) const {
    return token(id).starts_with(marker_);
}

TokenId Vocabulary::find(std::string_view tok) const {
    auto it = index_.find(std::string(tok));
    return it == index_.end() ? -1 : it->second;
}

Vocabulary Vocabulary::load(const std::filesystem::path &path) {
    auto text = read_file(path);
    std::vector<std::string> tokens;
    std::size_t line_no = 0;
    for (auto line : split(text, '\n')) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        if (split_whitespace(line).size() != 1)
            throw ParseError("expected a single token", line_no);
        tokens.emplace_back(line);
    }
    TokenId eos = -1;
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (tokens[i] == kEosToken) eos = static_cast<TokenId>(i);
    if (eos < 0) throw Error(path.string() + ": vocabulary has no " + std::string(kEosToken));
    return Vocabulary(std::move(tokens), eos);
}

std::string Vocabulary::serialize() const {
    std::string out;
    for (const auto &tok : tokens_) {
        out += tok;
        out += '\n';
    }
    return out;
}

std::vector<WordSpan> word_spans(const Vocabulary &vocab, std::span<const TokenId> tokens) {
    std::vector<WordSpan> spans;
    for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
        TokenId id = tokens[pos];
        if (id < 0 || static_cast<std::size_t>(id) >= vocab.size())
            throw Error("unknown token id " + std::to_string(id) + " at position " + std::to_string(pos));
        if (id == vocab.eos_id()) continue;
        std::string_view piece = vocab.token(id);
        bool starts = piece.starts_with(vocab.word_boundary_marker());
        if (starts) piece.remove_prefix(vocab.word_boundary_marker().size());
        if (starts || spans.empty()) {
            spans.push_back({std::string(piece), pos, pos});
        } else {
            spans.back().word += piece;
            spans.back().last_token = pos;
        }
    }
    // A bare marker token with nothing after it yields an empty word.
    std::erase_if(spans, [](const WordSpan &w) { return w.word.empty(); });
    return spans;
}

std::vector<std::string> tokens_to_words(const Vocabulary &vocab, std::span<const TokenId> tokens) {
    std::vector<std::string> words;
    for (auto &span : word_spans(vocab, tokens)) words.push_back(std::move(span.word));
    return words;
}

Vocabulary make_synthetic_vocabulary(std::size_t size) {
    static constexpr std::string_view consonants = "bdfgklmnprstvz";
    static constexpr std::string_view vowels = "aeiou";
    constexpr std::size_t syllables = consonants.size() * vowels.size();
    if (size < 3 || size > 1 + 2 * syllables)
        throw Error("synthetic vocabulary size must be in [3, " + std::to_string(1 + 2 * syllables) + "]");
    auto syllable = [](std::size_t i) {
        std::string s;
        s += consonants[i % consonants.size()];
        s += vowels[(i / consonants.size()) % vowels.size()];
        return s;
    };
    std::vector<std::string> tokens{std::string(kEosToken)};
    std::size_t start = 0, cont = 0;
    while (tokens.size() < size) {
        if (tokens.size() % 2 == 1)
            tokens.push_back(std::string(kWordMarker) + syllable(start++));
        else
            tokens.push_back(syllable(cont++));
    }
    return Vocabulary(std::move(tokens), 0);
}

} // namespace streamdec
