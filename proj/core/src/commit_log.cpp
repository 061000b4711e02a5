#include "streamdec/error.hpp"
#include "streamdec/pipeline.hpp"
#include "streamdec/text_format.hpp"

#include <map>

namespace streamdec {

namespace {

std::string join_tokens(const TokenSeq &tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(tokens[i]);
    }
    return out;
}

// Splits `key=value` and checks the key.
std::string_view field(std::string_view text, std::string_view key, std::size_t line) {
    if (!text.starts_with(key) || text.size() <= key.size() || text[key.size()] != '=')
        throw ParseError("expected field '" + std::string(key) + "'", line);
    return text.substr(key.size() + 1);
}

double number(std::string_view text, std::size_t line) {
    try {
        return parse_double(text);
    } catch (const ParseError &e) {
        throw ParseError(e.message(), line);
    }
}

} // namespace

std::string serialize_commit_log(const std::string &utt, const SessionResult &result) {
    if (utt.empty() || utt.find_first_of(" \t\n") != std::string::npos)
        throw Error("utterance id must be non-empty and free of whitespace");
    std::string out;
    for (const auto &c : result.commits) {
        out += "utt=" + utt;
        out += "\tcommit_wall_ms=" + format_double(c.commit_wall_ms);
        out += "\taudio_consumed_ms=" + format_double(c.audio_consumed_ms);
        out += "\tdetector=" + std::string(to_string(c.detector));
        out += "\ttokens=" + join_tokens(c.tokens);
        out += "\twords=" + join(c.words, " ");
        out += '\n';
    }
    out += "session\tutt=" + utt + "\taudio_duration_ms=" + format_double(result.audio_duration_ms) +
           "\tstep_compute_ms=";
    for (std::size_t i = 0; i < result.step_compute_ms.size(); ++i) {
        if (i) out += ' ';
        out += format_double(result.step_compute_ms[i]);
    }
    out += '\n';
    return out;
}

std::vector<LoggedSession> parse_commit_log(std::string_view text) {
    std::vector<LoggedSession> sessions;
    std::map<std::string, std::size_t> index;
    std::map<std::string, bool> closed;
    auto session_for = [&](const std::string &utt) -> SessionResult & {
        auto [it, inserted] = index.emplace(utt, sessions.size());
        if (inserted) sessions.push_back({utt, {}});
        return sessions[it->second].result;
    };

    std::size_t line_no = 0;
    for (auto line : split(text, '\n')) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) continue;
        auto fields = split(line, '\t');
        if (fields.front() == "session") {
            if (fields.size() != 4) throw ParseError("session record needs 4 fields", line_no);
            std::string utt(field(fields[1], "utt", line_no));
            auto &result = session_for(utt);
            if (closed[utt]) throw ParseError("duplicate session record for '" + utt + "'", line_no);
            closed[utt] = true;
            result.audio_duration_ms = number(field(fields[2], "audio_duration_ms", line_no), line_no);
            for (auto v : split_whitespace(field(fields[3], "step_compute_ms", line_no)))
                result.step_compute_ms.push_back(number(v, line_no));
            continue;
        }
        if (fields.size() != 6) throw ParseError("commit record needs 6 fields", line_no);
        std::string utt(field(fields[0], "utt", line_no));
        if (utt.empty()) throw ParseError("empty utterance id", line_no);
        if (closed[utt]) throw ParseError("commit after session record for '" + utt + "'", line_no);
        CommitRecord c;
        c.commit_wall_ms = number(field(fields[1], "commit_wall_ms", line_no), line_no);
        c.audio_consumed_ms = number(field(fields[2], "audio_consumed_ms", line_no), line_no);
        try {
            c.detector = parse_detector(field(fields[3], "detector", line_no));
        } catch (const ParseError &) {
            throw;
        } catch (const Error &e) {
            throw ParseError(e.what(), line_no);
        }
        for (auto t : split_whitespace(field(fields[4], "tokens", line_no))) {
            try {
                c.tokens.push_back(static_cast<TokenId>(parse_int(t)));
            } catch (const ParseError &e) {
                throw ParseError(e.message(), line_no);
            }
        }
        for (auto w : split_whitespace(field(fields[5], "words", line_no))) c.words.emplace_back(w);

        auto &result = session_for(utt);
        if (!result.commits.empty()) {
            const auto &prev = result.commits.back();
            if (c.audio_consumed_ms < prev.audio_consumed_ms)
                throw ParseError("audio_consumed_ms decreases", line_no);
            if (c.commit_wall_ms < prev.commit_wall_ms) throw ParseError("commit_wall_ms decreases", line_no);
        }
        result.final_tokens.insert(result.final_tokens.end(), c.tokens.begin(), c.tokens.end());
        result.final_words.insert(result.final_words.end(), c.words.begin(), c.words.end());
        result.commits.push_back(std::move(c));
    }
    for (auto &s : sessions) {
        if (!closed[s.utt] && !s.result.commits.empty())
            s.result.audio_duration_ms = s.result.commits.back().audio_consumed_ms;
    }
    return sessions;
}

std::vector<LoggedSession> replay_log(const std::filesystem::path &path) {
    try {
        return parse_commit_log(read_file(path));
    } catch (const ParseError &e) {
        throw ParseError(path.string() + ": " + e.message(), e.line());
    }
}

SessionResult replay_single(std::string_view text) {
    auto sessions = parse_commit_log(text);
    if (sessions.empty()) return {};
    if (sessions.size() > 1) throw Error("log holds more than one session");
    return std::move(sessions.front().result);
}

} // namespace streamdec
