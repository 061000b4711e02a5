#include "streamdec/scorer_spec.hpp"

#include "streamdec/error.hpp"
#include "streamdec/text_format.hpp"

#include <cmath>
#include <map>

namespace streamdec {

void ScorerSpec::validate() const {
    if (kind == Kind::Synthetic) {
        if (synthetic.frames_per_token == 0) throw Error("scorer spec: frames_per_token must be positive");
        if (!(synthetic.noise_level >= 0.0 && synthetic.noise_level <= 1.0))
            throw Error("scorer spec: noise_level must be in [0, 1]");
        return;
    }
    if (members.empty()) throw Error("scorer spec: ensemble needs at least one member");
    if (weights.size() != members.size()) throw Error("scorer spec: one weight per member required");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw Error("scorer spec: weights must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error("scorer spec: weights must sum to 1");
    if (attention_member >= static_cast<int>(members.size()))
        throw Error("scorer spec: attention_member out of range");
    for (const auto &m : members) m.validate();
}

ScorerSpec uniform_ensemble(std::vector<ScorerSpec> members) {
    ScorerSpec spec;
    spec.kind = ScorerSpec::Kind::Ensemble;
    spec.weights.assign(members.size(), members.empty() ? 0.0 : 1.0 / static_cast<double>(members.size()));
    spec.members = std::move(members);
    return spec;
}

std::shared_ptr<const Scorer> build_scorer(const ScorerSpec &spec, const Vocabulary &vocab, std::size_t dim) {
    spec.validate();
    if (spec.kind == ScorerSpec::Kind::Synthetic)
        return std::make_shared<SyntheticScorer>(spec.synthetic, vocab.size(), vocab.eos_id(), dim);
    std::vector<std::shared_ptr<const Scorer>> members;
    for (const auto &m : spec.members) members.push_back(build_scorer(m, vocab, dim));
    return std::make_shared<EnsembleScorer>(std::move(members), spec.weights, spec.attention_member);
}

namespace {

using KeyValues = std::map<std::string, std::pair<std::string, std::size_t>>;

std::string get(const KeyValues &kv, const std::string &key, const std::string &fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second.first;
}

template <typename Fn>
auto with_line(const KeyValues &kv, const std::string &key, Fn &&fn) {
    try {
        return fn();
    } catch (const ParseError &e) {
        auto it = kv.find(key);
        throw ParseError(key + ": " + e.message(), it == kv.end() ? 0 : it->second.second);
    }
}

ScorerSpec parse_spec(const KeyValues &kv, const std::string &prefix, std::vector<std::string> &used) {
    auto key = [&](const char *k) {
        used.push_back(prefix + k);
        return prefix + k;
    };
    ScorerSpec spec;
    auto kind = get(kv, key("kind"), "synthetic");
    if (kind == "synthetic") {
        spec.kind = ScorerSpec::Kind::Synthetic;
        auto &p = spec.synthetic;
        auto integer = [&](const char *k, long long fallback) {
            auto name = key(k);
            return with_line(kv, name, [&] {
                auto it = kv.find(name);
                return it == kv.end() ? fallback : parse_int(it->second.first);
            });
        };
        auto unsigned64 = [&](const char *k) {
            auto name = key(k);
            return with_line(kv, name, [&] {
                auto it = kv.find(name);
                return it == kv.end() ? std::uint64_t{0} : parse_uint64(it->second.first);
            });
        };
        auto real = [&](const char *k, double fallback) {
            auto name = key(k);
            return with_line(kv, name, [&] {
                auto it = kv.find(name);
                return it == kv.end() ? fallback : parse_double(it->second.first);
            });
        };
        p.seed = unsigned64("seed");
        auto fpt = integer("frames_per_token", 8);
        if (fpt <= 0) throw ParseError(prefix + "frames_per_token must be positive", 0);
        p.frames_per_token = static_cast<std::size_t>(fpt);
        p.sharpness = real("sharpness", p.sharpness);
        p.prior_scale = real("prior_scale", p.prior_scale);
        p.derail = real("derail", p.derail);
        p.eos_margin = real("eos_margin", p.eos_margin);
        p.noise_level = real("noise_level", 0.0);
        p.noise_seed = unsigned64("noise_seed");
        p.noise_amplitude = real("noise_amplitude", p.noise_amplitude);
    } else if (kind == "ensemble") {
        spec.kind = ScorerSpec::Kind::Ensemble;
        spec.attention_member = static_cast<int>(with_line(kv, prefix + "attention_member", [&] {
            return parse_int(get(kv, key("attention_member"), "0"));
        }));
        for (std::size_t i = 0;; ++i) {
            auto member_prefix = prefix + "member." + std::to_string(i) + ".";
            bool present = false;
            for (auto it = kv.lower_bound(member_prefix); it != kv.end() && it->first.starts_with(member_prefix); ++it)
                present = true;
            if (!present) break;
            used.push_back(member_prefix + "weight");
            auto weight_key = member_prefix + "weight";
            if (!kv.contains(weight_key)) throw ParseError("missing " + weight_key, 0);
            spec.weights.push_back(with_line(kv, weight_key, [&] { return parse_double(kv.at(weight_key).first); }));
            spec.members.push_back(parse_spec(kv, member_prefix, used));
        }
    } else {
        auto it = kv.find(prefix + "kind");
        throw ParseError("unknown scorer kind '" + kind + "'", it == kv.end() ? 0 : it->second.second);
    }
    return spec;
}

void write_spec(const ScorerSpec &spec, const std::string &prefix, std::string &out) {
    auto line = [&](const std::string &k, const std::string &v) { out += prefix + k + "=" + v + "\n"; };
    if (spec.kind == ScorerSpec::Kind::Synthetic) {
        const auto &p = spec.synthetic;
        line("kind", "synthetic");
        line("seed", std::to_string(p.seed));
        line("frames_per_token", std::to_string(p.frames_per_token));
        line("sharpness", format_double(p.sharpness, 1));
        line("prior_scale", format_double(p.prior_scale, 1));
        line("derail", format_double(p.derail, 1));
        line("eos_margin", format_double(p.eos_margin, 1));
        line("noise_level", format_double(p.noise_level, 1));
        line("noise_seed", std::to_string(p.noise_seed));
        line("noise_amplitude", format_double(p.noise_amplitude, 1));
        return;
    }
    line("kind", "ensemble");
    line("attention_member", std::to_string(spec.attention_member));
    for (std::size_t i = 0; i < spec.members.size(); ++i) {
        auto member_prefix = prefix + "member." + std::to_string(i) + ".";
        out += member_prefix + "weight=" + format_double(spec.weights[i], 1) + "\n";
        write_spec(spec.members[i], member_prefix, out);
    }
}

} // namespace

ScorerConfig ScorerConfig::parse(std::string_view text) {
    KeyValues kv;
    std::size_t line_no = 0;
    for (auto line : split(text, '\n')) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key=value", line_no);
        auto k = std::string(trim(line.substr(0, eq)));
        auto v = std::string(trim(line.substr(eq + 1)));
        if (k.empty()) throw ParseError("empty key", line_no);
        if (!kv.emplace(k, std::make_pair(v, line_no)).second) throw ParseError("duplicate key '" + k + "'", line_no);
    }
    ScorerConfig cfg;
    std::vector<std::string> used{"dim", "vocab"};
    auto dim = with_line(kv, "dim", [&] { return parse_int(get(kv, "dim", "0")); });
    if (dim <= 0) throw ParseError("dim must be a positive integer", kv.contains("dim") ? kv.at("dim").second : 0);
    cfg.dim = static_cast<std::size_t>(dim);
    cfg.vocab_path = get(kv, "vocab", "");
    cfg.spec = parse_spec(kv, "", used);
    for (const auto &[k, v] : kv)
        if (std::find(used.begin(), used.end(), k) == used.end())
            throw ParseError("unknown key '" + k + "'", v.second);
    try {
        cfg.spec.validate();
    } catch (const Error &e) {
        throw ParseError(e.what(), 0);
    }
    return cfg;
}

ScorerConfig ScorerConfig::load(const std::filesystem::path &path) {
    try {
        return parse(read_file(path));
    } catch (const ParseError &e) {
        throw ParseError(path.string() + ": " + e.message(), e.line());
    }
}

std::string ScorerConfig::serialize() const {
    std::string out = "dim=" + std::to_string(dim) + "\n";
    if (!vocab_path.empty()) out += "vocab=" + vocab_path + "\n";
    write_spec(spec, "", out);
    return out;
}

LoadedScorer load_scorer(const std::filesystem::path &config_path) {
    auto cfg = ScorerConfig::load(config_path);
    if (cfg.vocab_path.empty()) throw Error(config_path.string() + ": no vocab path");
    std::filesystem::path vocab_path = cfg.vocab_path;
    if (vocab_path.is_relative()) vocab_path = config_path.parent_path() / vocab_path;
    auto vocab = Vocabulary::load(vocab_path);
    auto scorer = build_scorer(cfg.spec, vocab, cfg.dim);
    return {std::move(cfg), std::move(vocab), std::move(scorer)};
}

} // namespace streamdec
