#include <catch2/catch_amalgamated.hpp>

#include <cctype>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "frr/trace.hpp"

using namespace frr::trace;
namespace fs = std::filesystem;

namespace {

ActivationDump synthetic_dump(int n_tokens = 3, int layers = 2, int d = 4) {
    ActivationDump dump;
    dump.model_name = "synthetic";
    dump.num_layers = layers;
    dump.hidden_dim = d;
    dump.capture_point = "test";
    for (int i = 0; i < n_tokens; ++i) {
        dump.tokens.push_back("t" + std::to_string(i));
        dump.token_ids.push_back(i);
    }
    std::mt19937 rng(7);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    for (int l = 1; l <= layers; ++l) {
        std::vector<float> m(static_cast<size_t>(n_tokens) * d);
        for (auto& v : m) v = u(rng);
        dump.layers[l] = std::move(m);
    }
    return dump;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("frr-trace-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("dump round trip is bit-exact") {
    TempDir tmp;
    ActivationDump dump = synthetic_dump();
    write_dump(dump, tmp.path / "d");
    ActivationDump back = read_dump(tmp.path / "d");
    CHECK(back == dump);
}

TEST_CASE("manifest row count mismatch raises ShapeMismatch") {
    TempDir tmp;
    ActivationDump dump = synthetic_dump(4);
    write_dump(dump, tmp.path / "d");
    // claim 3 tokens while matrices hold 4 rows
    auto mpath = tmp.path / "d" / "manifest.json";
    nlohmann::json manifest = nlohmann::json::parse(std::ifstream(mpath));
    manifest["tokens"].erase(3);
    manifest["token_ids"].erase(3);
    std::ofstream(mpath) << manifest.dump();
    CHECK_THROWS_AS(read_dump(tmp.path / "d"), ShapeMismatch);
}

TEST_CASE("unknown magic bytes raise FormatVersionMismatch") {
    TempDir tmp;
    write_dump(synthetic_dump(), tmp.path / "d");
    {
        std::fstream f(tmp.path / "d" / "layer_001.f32",
                       std::ios::binary | std::ios::in | std::ios::out);
        f.write("XXXX", 4);
    }
    CHECK_THROWS_AS(read_dump(tmp.path / "d"), FormatVersionMismatch);
}

TEST_CASE("truncated layer file raises TruncatedFile") {
    TempDir tmp;
    write_dump(synthetic_dump(), tmp.path / "d");
    auto p = tmp.path / "d" / "layer_001.f32";
    fs::resize_file(p, fs::file_size(p) - 3);
    CHECK_THROWS_AS(read_dump(tmp.path / "d"), TruncatedFile);
}

TEST_CASE("a flipped byte in a matrix region changes exactly one float") {
    TempDir tmp;
    ActivationDump dump = synthetic_dump();
    write_dump(dump, tmp.path / "d");
    auto p = tmp.path / "d" / "layer_002.f32";
    {
        std::fstream f(p, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(4 + 5);  // past magic, inside float #1
        char b;
        f.seekg(4 + 5);
        f.read(&b, 1);
        b = static_cast<char>(b ^ 0x40);
        f.seekp(4 + 5);
        f.write(&b, 1);
    }
    ActivationDump back = read_dump(tmp.path / "d");
    int diffs = 0;
    for (size_t i = 0; i < dump.layers[2].size(); ++i) {
        float a = dump.layers[2][i], c = back.layers[2][i];
        if (std::memcmp(&a, &c, sizeof(float)) != 0) ++diffs;
    }
    CHECK(diffs == 1);
    CHECK(back.layers[1] == dump.layers[1]);
}

TEST_CASE("match_concept on the paper's example") {
    std::vector<std::string> tokens{"the", " att", "ack", " was"};
    auto ms = match_concept(tokens, "attack", 0, 4);
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].positions == std::vector<int>{0, 1, 2});
    CHECK(ms[0].span_begin == 1);
    CHECK(ms[0].span_end == 3);
}

TEST_CASE("match at index 0 keeps the match but drops the extension") {
    std::vector<std::string> tokens{"att", "ack", " x"};
    auto ms = match_concept(tokens, "attack", 0, 3);
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].positions == std::vector<int>{0, 1});
}

TEST_CASE("absent word yields empty list") {
    std::vector<std::string> tokens{"a", "b", "c"};
    CHECK(match_concept(tokens, "attack", 0, 3).empty());
}

TEST_CASE("window edge straddling drops the partial occurrence") {
    // three planted occurrences; the third straddles the window end
    std::vector<std::string> tokens{" att", "ack", ".", " att", "ack", ".", " att", "ack"};
    auto ms = match_concept(tokens, "attack", 0, 7);
    CHECK(ms.size() == 2);
}

TEST_CASE("case-insensitive and marker-stripping matching") {
    std::vector<std::string> tokens{"\xC4\xA0"
                                    "Att",
                                    "ACK"};
    auto ms = match_concept(tokens, "attack", 0, 2);
    REQUIRE(ms.size() == 1);
    // multi-word surface: seam whitespace is stripped
    std::vector<std::string> t2{" pick", " up"};
    CHECK(match_concept(t2, "pick up", 0, 2).size() == 1);
}

TEST_CASE("matches are deterministic, non-overlapping and text-faithful") {
    std::mt19937 rng(99);
    std::vector<std::string> alphabet{"at", "ta", "ck", " a", "t", "x", " attack", " "};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> tokens;
        int n = 5 + static_cast<int>(rng() % 30);
        for (int i = 0; i < n; ++i) tokens.push_back(alphabet[rng() % alphabet.size()]);
        auto a = match_concept(tokens, "attack", 0, n);
        auto b = match_concept(tokens, "attack", 0, n);
        REQUIRE(a.size() == b.size());
        int prev_end = -1;
        for (const auto& m : a) {
            CHECK(m.span_begin >= prev_end);
            prev_end = m.span_end;
            std::string cat;
            for (int p = m.span_begin; p < m.span_end; ++p) {
                for (char c : tokens[p])
                    if (c != ' ') cat += static_cast<char>(std::tolower(c));
            }
            CHECK(cat == "attack");
        }
    }
}

TEST_CASE("window_of") {
    CHECK(window_of(200, 100) == std::make_pair(100, 200));
    CHECK(window_of(100, 100) == std::make_pair(0, 100));
    CHECK_THROWS_AS(window_of(50, 100), OutOfRange);
    CHECK_THROWS_AS(window_of(10, 0), OutOfRange);
}
