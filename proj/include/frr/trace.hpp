#pragma once

// Activation dump format and token-sequence matching. A dump is a directory
// bundle: manifest.json plus one raw little-endian float32 matrix file per
// layer ("layer_NNN.f32", 4 magic bytes then row-major data). Bit-exact and
// writable from any ML stack.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace frr::trace {

inline constexpr char kMagic[4] = {'F', 'R', 'D', '1'};

struct FormatVersionMismatch : std::runtime_error {
    explicit FormatVersionMismatch(const std::string& what)
        : std::runtime_error("format version mismatch: " + what) {}
};
struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& what)
        : std::runtime_error("shape mismatch: " + what) {}
};
struct TruncatedFile : std::runtime_error {
    explicit TruncatedFile(const std::string& what)
        : std::runtime_error("truncated file: " + what) {}
};
struct OutOfRange : std::runtime_error {
    explicit OutOfRange(const std::string& what) : std::runtime_error("out of range: " + what) {}
};

struct ActivationDump {
    std::string model_name;
    int num_layers = 0;  // L_max; layers index 1..L_max, layer 0 optional embeddings
    int hidden_dim = 0;
    std::string capture_point;  // opaque free text
    std::vector<std::string> tokens;
    std::vector<int32_t> token_ids;
    std::map<int, std::vector<float>> layers;  // layer -> row-major [num_tokens x hidden_dim]

    int num_tokens() const { return static_cast<int>(tokens.size()); }

    std::span<const float> row(int layer, int pos) const {
        const auto& m = layers.at(layer);
        return {m.data() + static_cast<size_t>(pos) * hidden_dim,
                static_cast<size_t>(hidden_dim)};
    }

    void check_consistent() const {
        if (tokens.size() != token_ids.size())
            throw ShapeMismatch("tokens vs token_ids length");
        for (const auto& [l, m] : layers) {
            if (l < 0 || l > num_layers) throw ShapeMismatch("layer index out of range");
            if (m.size() != static_cast<size_t>(num_tokens()) * hidden_dim)
                throw ShapeMismatch("layer " + std::to_string(l) + " matrix size");
        }
    }

    bool operator==(const ActivationDump&) const = default;
};

namespace detail {

inline std::string layer_filename(int layer) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "layer_%03d.f32", layer);
    return buf;
}

// Token strings are arbitrary byte sequences (byte-level tokenizers emit raw
// high bytes), but JSON strings must be UTF-8. Each byte is stored as the
// codepoint U+0000..U+00FF, which round-trips any byte string losslessly.
inline std::string bytes_to_codepoints(const std::string& s) {
    std::string out;
    for (unsigned char c : s) {
        if (c < 0x80) {
            out += static_cast<char>(c);
        } else {
            out += static_cast<char>(0xC0 | (c >> 6));
            out += static_cast<char>(0x80 | (c & 0x3F));
        }
    }
    return out;
}

inline std::string codepoints_to_bytes(const std::string& s) {
    std::string out;
    for (size_t i = 0; i < s.size();) {
        unsigned char c = s[i];
        if (c < 0x80) {
            out += static_cast<char>(c);
            ++i;
        } else if ((c == 0xC2 || c == 0xC3) && i + 1 < s.size()) {
            out += static_cast<char>(((c & 0x03) << 6) | (static_cast<unsigned char>(s[i + 1]) & 0x3F));
            i += 2;
        } else {
            throw ShapeMismatch("token codepoint outside U+00FF");
        }
    }
    return out;
}

}  // namespace detail

inline void write_dump(const ActivationDump& dump, const std::filesystem::path& dir) {
    dump.check_consistent();
    std::filesystem::create_directories(dir);
    nlohmann::json tokens = nlohmann::json::array();
    for (const auto& t : dump.tokens) tokens.push_back(detail::bytes_to_codepoints(t));
    nlohmann::json manifest = {
        {"magic", "FRD1"},
        {"model_name", dump.model_name},
        {"num_layers", dump.num_layers},
        {"hidden_dim", dump.hidden_dim},
        {"capture_point", dump.capture_point},
        {"tokens", std::move(tokens)},
        {"token_ids", dump.token_ids},
        {"stored_layers", nlohmann::json::array()},
    };
    for (const auto& [l, m] : dump.layers) manifest["stored_layers"].push_back(l);
    {
        std::ofstream f(dir / "manifest.json");
        f << manifest.dump(2) << "\n";
    }
    for (const auto& [l, m] : dump.layers) {
        std::ofstream f(dir / detail::layer_filename(l), std::ios::binary);
        f.write(kMagic, 4);
        f.write(reinterpret_cast<const char*>(m.data()),
                static_cast<std::streamsize>(m.size() * sizeof(float)));
        if (!f) throw std::runtime_error("write failed: " + (dir / detail::layer_filename(l)).string());
    }
}

inline ActivationDump read_dump(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw TruncatedFile("missing manifest: " + dir.string());
    nlohmann::json manifest = nlohmann::json::parse(mf);
    if (manifest.value("magic", "") != "FRD1")
        throw FormatVersionMismatch("manifest magic: " + manifest.value("magic", "<absent>"));
    ActivationDump dump;
    dump.model_name = manifest.at("model_name").get<std::string>();
    dump.num_layers = manifest.at("num_layers").get<int>();
    dump.hidden_dim = manifest.at("hidden_dim").get<int>();
    dump.capture_point = manifest.value("capture_point", "");
    for (const auto& t : manifest.at("tokens"))
        dump.tokens.push_back(detail::codepoints_to_bytes(t.get<std::string>()));
    dump.token_ids = manifest.at("token_ids").get<std::vector<int32_t>>();
    if (dump.tokens.size() != dump.token_ids.size())
        throw ShapeMismatch("tokens vs token_ids length");
    const size_t expect = static_cast<size_t>(dump.tokens.size()) * dump.hidden_dim;
    for (const auto& lj : manifest.at("stored_layers")) {
        int layer = lj.get<int>();
        if (layer < 0 || layer > dump.num_layers)
            throw ShapeMismatch("stored layer index out of range");
        auto path = dir / detail::layer_filename(layer);
        std::ifstream f(path, std::ios::binary | std::ios::ate);
        if (!f) throw TruncatedFile("missing layer file: " + path.string());
        const auto size = static_cast<size_t>(f.tellg());
        if (size < 4) throw TruncatedFile(path.string());
        f.seekg(0);
        char magic[4];
        f.read(magic, 4);
        if (std::memcmp(magic, kMagic, 4) != 0)
            throw FormatVersionMismatch("layer file magic: " + path.string());
        if (size - 4 < expect * sizeof(float)) throw TruncatedFile(path.string());
        if (size - 4 != expect * sizeof(float))
            throw ShapeMismatch("layer file size: " + path.string());
        std::vector<float> m(expect);
        f.read(reinterpret_cast<char*>(m.data()),
               static_cast<std::streamsize>(expect * sizeof(float)));
        if (!f) throw TruncatedFile(path.string());
        dump.layers.emplace(layer, std::move(m));
    }
    dump.check_consistent();
    return dump;
}

struct TokenMatch {
    std::string word;            // the matched surface word
    std::vector<int> positions;  // match span, plus one preceding index when it exists
    int span_begin = 0;          // span without the preceding token: [span_begin, span_end)
    int span_end = 0;
};

namespace detail {

// Lowercase, with subword leading-space markers and whitespace removed.
// Covers plain space/tab, GPT-2 style U+0120 and SentencePiece U+2581.
inline std::string normalize_token(const std::string& tok) {
    std::string out;
    for (size_t i = 0; i < tok.size();) {
        unsigned char c = tok[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++i;
            continue;
        }
        if (c == 0xC4 && i + 1 < tok.size() && static_cast<unsigned char>(tok[i + 1]) == 0xA0) {
            i += 2;  // U+0120
            continue;
        }
        if (c == 0xE2 && i + 2 < tok.size() &&
            static_cast<unsigned char>(tok[i + 1]) == 0x96 &&
            static_cast<unsigned char>(tok[i + 2]) == 0x81) {
            i += 3;  // U+2581
            continue;
        }
        if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
        out += static_cast<char>(c);
        ++i;
    }
    return out;
}

}  // namespace detail

// Leftmost, non-overlapping, case-insensitive matches of token sequences
// whose concatenation (seam whitespace stripped) equals the surface word.
// Each match is extended one token left; the extension is dropped when the
// match starts at index 0. Only spans lying fully inside [lo, hi) count.
inline std::vector<TokenMatch> match_concept(const std::vector<std::string>& tokens,
                                             const std::string& surface_word, int lo, int hi) {
    const int n = static_cast<int>(tokens.size());
    if (lo < 0 || lo >= hi || hi > n) throw OutOfRange("match window");
    const std::string word = detail::normalize_token(surface_word);
    if (word.empty()) throw OutOfRange("empty surface word");

    std::vector<std::string> norm(tokens.size());
    for (size_t i = 0; i < tokens.size(); ++i) norm[i] = detail::normalize_token(tokens[i]);

    std::vector<TokenMatch> out;
    int i = lo;
    while (i < hi) {
        if (norm[i].empty() || word.compare(0, norm[i].size(), norm[i]) != 0) {
            ++i;
            continue;
        }
        std::string acc = norm[i];
        int j = i;
        bool matched = false;
        while (acc.size() < word.size() && j + 1 < hi) {
            ++j;
            acc += norm[j];
            if (word.compare(0, acc.size(), acc) != 0) break;
        }
        if (acc == word) matched = true;
        if (matched) {
            TokenMatch m;
            m.word = surface_word;
            m.span_begin = i;
            m.span_end = j + 1;
            if (i > 0) m.positions.push_back(i - 1);
            for (int p = i; p <= j; ++p) m.positions.push_back(p);
            out.push_back(std::move(m));
            i = j + 1;
        } else {
            ++i;
        }
    }
    return out;
}

inline std::vector<TokenMatch> match_concept(const ActivationDump& dump,
                                             const std::string& surface_word, int lo, int hi) {
    return match_concept(dump.tokens, surface_word, lo, hi);
}

// Half-open extraction window [T-w, T).
inline std::pair<int, int> window_of(int timestamp, int window) {
    if (window < 1 || timestamp < window) throw OutOfRange("window_of(T=" + std::to_string(timestamp) + ", w=" + std::to_string(window) + ")");
    return {timestamp - window, timestamp};
}

}  // namespace frr::trace
