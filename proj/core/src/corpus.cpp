#include "streamdec/corpus.hpp"

#include "streamdec/error.hpp"
#include "streamdec/text_format.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace streamdec {

std::vector<WordAlignment> parse_alignments(std::string_view text) {
    std::vector<WordAlignment> out;
    std::size_t line_no = 0;
    for (auto line : split(text, '\n')) {
        ++line_no;
        auto f = split_whitespace(line);
        if (f.empty() || f.front().starts_with('#')) continue;
        if (f.size() != 4) throw ParseError("expected `utt word start_s end_s`", line_no);
        WordAlignment a;
        a.utt = std::string(f[0]);
        a.word = std::string(f[1]);
        try {
            a.start_s = parse_double(f[2]);
            a.end_s = parse_double(f[3]);
        } catch (const ParseError &e) {
            throw ParseError(e.message(), line_no);
        }
        if (!(a.start_s >= 0.0 && a.start_s <= a.end_s) || !std::isfinite(a.end_s))
            throw ParseError("need 0 <= start_s <= end_s", line_no);
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<WordAlignment> load_alignments(const std::filesystem::path &path) {
    try {
        return parse_alignments(read_file(path));
    } catch (const ParseError &e) {
        throw ParseError(path.string() + ": " + e.message(), e.line());
    }
}

std::string serialize_alignments(std::span<const WordAlignment> alignments) {
    std::string out;
    for (const auto &a : alignments)
        out += a.utt + ' ' + a.word + ' ' + format_double(a.start_s) + ' ' + format_double(a.end_s) + '\n';
    return out;
}

References parse_references(std::string_view text) {
    References refs;
    std::size_t line_no = 0;
    for (auto line : split(text, '\n')) {
        ++line_no;
        auto f = split_whitespace(line);
        if (f.empty()) continue;
        std::vector<std::string> words(f.begin() + 1, f.end());
        if (!refs.emplace(std::string(f[0]), std::move(words)).second)
            throw ParseError("duplicate utterance '" + std::string(f[0]) + "'", line_no);
    }
    return refs;
}

References load_references(const std::filesystem::path &path) {
    try {
        return parse_references(read_file(path));
    } catch (const ParseError &e) {
        throw ParseError(path.string() + ": " + e.message(), e.line());
    }
}

std::string serialize_references(const References &refs) {
    std::string out;
    for (const auto &[utt, words] : refs) {
        out += utt;
        for (const auto &w : words) out += ' ' + w;
        out += '\n';
    }
    return out;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 failed");
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

std::filesystem::path save_corpus(const Corpus &corpus, const std::filesystem::path &dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir / "feats", ec);
    if (ec) throw Error("cannot create " + (dir / "feats").string() + ": " + ec.message());

    std::vector<std::pair<std::string, std::string>> files; // relative path, content
    files.emplace_back("vocab.txt", corpus.vocab.serialize());
    ScorerConfig cfg = corpus.scorer;
    cfg.vocab_path = "vocab.txt";
    files.emplace_back("scorer.cfg", cfg.serialize());
    References refs;
    std::vector<WordAlignment> alignments;
    for (const auto &u : corpus.utterances) {
        refs[u.id] = u.reference;
        alignments.insert(alignments.end(), u.alignment.begin(), u.alignment.end());
        files.emplace_back("feats/" + u.id + ".txt", u.stream.serialize());
    }
    files.emplace_back("references.txt", serialize_references(refs));
    files.emplace_back("alignments.txt", serialize_alignments(alignments));

    std::string manifest;
    for (const auto &[rel, content] : files) {
        write_file_atomic(dir / rel, content);
        manifest += sha256_hex(content) + "  " + rel + "\n";
    }
    auto manifest_path = dir / "manifest.txt";
    write_file_atomic(manifest_path, manifest);
    return manifest_path;
}

Corpus load_corpus(const std::filesystem::path &dir) {
    auto manifest = read_file(dir / "manifest.txt");
    std::vector<std::string> feature_files;
    std::size_t line_no = 0;
    for (auto line : split(manifest, '\n')) {
        ++line_no;
        auto f = split_whitespace(line);
        if (f.empty()) continue;
        if (f.size() != 2) throw ParseError("manifest: expected `<digest>  <path>`", line_no);
        std::string rel(f[1]);
        if (sha256_hex(read_file(dir / rel)) != f[0]) throw Error("manifest: digest mismatch for " + rel);
        if (rel.starts_with("feats/")) feature_files.push_back(rel);
    }
    auto loaded = load_scorer(dir / "scorer.cfg");
    auto refs = load_references(dir / "references.txt");
    auto alignments = load_alignments(dir / "alignments.txt");

    Corpus corpus{loaded.vocab, loaded.config, {}};
    for (const auto &rel : feature_files) {
        Utterance u{std::filesystem::path(rel).stem().string(), FeatureStream::load(dir / rel), {}, {}, {}};
        if (auto it = refs.find(u.id); it != refs.end()) u.reference = it->second;
        for (const auto &a : alignments)
            if (a.utt == u.id) u.alignment.push_back(a);
        corpus.utterances.push_back(std::move(u));
    }
    std::sort(corpus.utterances.begin(), corpus.utterances.end(),
              [](const Utterance &a, const Utterance &b) { return a.id < b.id; });
    return corpus;
}

} // namespace streamdec
