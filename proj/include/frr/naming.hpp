#pragma once

// Mystery naming variants: bijective obfuscation maps from canonical
// actions/predicates to surface words, plus plan-text parsing back to
// canonical actions.

#include <array>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "frr/blocksworld.hpp"
#include "frr/concepts.hpp"

namespace frr::obf {

struct InvalidNaming : std::runtime_error {
    explicit InvalidNaming(const std::string& why) : std::runtime_error("invalid naming: " + why) {}
};
struct UnknownNaming : std::runtime_error {
    explicit UnknownNaming(int id)
        : std::runtime_error("unknown naming id: " + std::to_string(id)) {}
};

struct PlanParseError : std::runtime_error {
    enum class Kind { NoPlanBlock, UnknownActionWord, MalformedLine };
    Kind kind;
    std::string line;
    PlanParseError(Kind k, const std::string& l)
        : std::runtime_error(describe(k, l)), kind(k), line(l) {}

private:
    static std::string describe(Kind k, const std::string& l) {
        switch (k) {
            case Kind::NoPlanBlock:       return "no [PLAN]...[PLAN END] block";
            case Kind::UnknownActionWord: return "unknown action word in line: " + l;
            case Kind::MalformedLine:     return "malformed plan line: " + l;
        }
        return "plan parse error";
    }
};

class Naming {
public:
    Naming(int id, std::map<Concept, std::string> words) : id_(id), words_(std::move(words)) {
        for (Concept c : kAllConcepts)
            if (!words_.count(c)) throw InvalidNaming("missing word for " + concept_name(c));
        std::set<std::string> actions, predicates;
        for (const auto& [c, w] : words_) {
            if (w.empty()) throw InvalidNaming("empty surface word");
            auto& bucket = is_action(c) ? actions : predicates;
            if (!bucket.insert(lower(w)).second)
                throw InvalidNaming("duplicate surface word: " + w);
        }
        for (const auto& w : actions)
            if (predicates.count(w))
                throw InvalidNaming("word used for both an action and a predicate: " + w);
    }

    int id() const { return id_; }
    const std::string& word(Concept c) const { return words_.at(c); }
    const std::map<Concept, std::string>& words() const { return words_; }

    static std::string lower(std::string s) {
        for (char& c : s)
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        return s;
    }

private:
    int id_;
    std::map<Concept, std::string> words_;
};

// Canonical words double as the identity "naming" (id 0).
inline Naming identity_naming() {
    return Naming(0, {
        {Concept::PickUp, "pick up"},
        {Concept::PutDown, "put down"},
        {Concept::Stack, "stack"},
        {Concept::Unstack, "unstack"},
        {Concept::OnTable, "on the table"},
        {Concept::Clear, "clear"},
        {Concept::HandEmpty, "hand empty"},
        {Concept::Holding, "holding"},
        {Concept::On, "on top of"},
    });
}

inline constexpr int kNumBuiltinNamings = 20;

// Row order: pick-up, put-down, stack, unstack | ontable, clear, handempty, holding, on.
inline Naming builtin_naming(int id) {
    static const std::array<std::array<const char*, 9>, kNumBuiltinNamings> rows = {{
        {"attack", "succumb", "overcome", "feast", "planet", "province", "harmony", "craves", "pain"},
        {"illuminate", "silence", "distill", "divest", "aura", "essence", "nexus", "harmonizes", "pulse"},
        {"tltezi", "jchntg", "deesdu", "xavirm", "oxtslo", "adohre", "jqlyol", "gszswg", "ivbmyg"},
        {"swim", "fire", "deduct", "respond", "fever", "marble", "craving", "mines", "shadow"},
        {"whisper", "calculate", "orbit", "navigate", "crystal", "fountain", "autumn", "illuminates", "legend"},
        {"decode", "hibernate", "thunder", "quench", "prism", "hollow", "zenith", "echoes", "emblem"},
        {"explore", "ripen", "weave", "bloom", "fossil", "dialect", "equinox", "fractures", "symphony"},
        {"harvest", "ignite", "carve", "suspend", "nebula", "labyrinth", "mirage", "captivates", "cascade"},
        {"construct", "demolish", "reinforce", "collapse", "eclipse", "vintage", "paradox", "resonates", "twilight"},
        {"plant", "harvest", "nurture", "prune", "crystal", "puzzle", "vortex", "whispers", "cipher"},
        {"prosecute", "acquit", "testify", "appeal", "nebula", "molecule", "anthem", "silhouettes", "voltage"},
        {"broadcast", "receive", "encrypt", "decode", "horizon", "compass", "solstice", "orbits", "quantum"},
        {"whisper", "banish", "entangle", "unmask", "tethered", "unburdened", "hollow", "shrouds", "consuming"},
        {"question", "resolve", "interweave", "liberate", "echoing", "sovereign", "potential", "obscures", "contemplating"},
        {"summon", "dismiss", "fold", "unravel", "suspended", "timeless", "interval", "transcends", "enveloping"},
        {"open", "close", "connect", "disconnect", "paired", "single", "balanced", "matches", "mirrors"},
        {"chop", "serve", "season", "taste", "plated", "fresh", "kitchen", "simmering", "marinated"},
        {"release", "grasp", "separate", "combine", "floating", "occupied", "crowded", "repels", "avoids"},
        {"transcend", "sublimate", "actualize", "deconstruct", "phenomenal", "unmediated", "dialectical", "instantiates", "necessitates"},
        {"flixate", "grample", "chonder", "sprill", "morkled", "thristy", "plimmish", "vexates", "quorbles"},
    }};
    if (id < 1 || id > kNumBuiltinNamings) throw UnknownNaming(id);
    const auto& r = rows[static_cast<size_t>(id - 1)];
    return Naming(id, {
        {Concept::PickUp, r[0]}, {Concept::PutDown, r[1]}, {Concept::Stack, r[2]},
        {Concept::Unstack, r[3]}, {Concept::OnTable, r[4]}, {Concept::Clear, r[5]},
        {Concept::HandEmpty, r[6]}, {Concept::Holding, r[7]}, {Concept::On, r[8]},
    });
}

inline nlohmann::json naming_to_json(const Naming& n) {
    nlohmann::json actions, predicates;
    for (Concept c : kActionConcepts) actions[concept_name(c)] = n.word(c);
    for (Concept c : kPredicateConcepts) predicates[concept_name(c)] = n.word(c);
    return {{"id", n.id()}, {"actions", actions}, {"predicates", predicates}};
}

inline Naming naming_from_json(const nlohmann::json& j) {
    std::map<Concept, std::string> words;
    for (Concept c : kActionConcepts)
        words[c] = j.at("actions").at(concept_name(c)).get<std::string>();
    for (Concept c : kPredicateConcepts)
        words[c] = j.at("predicates").at(concept_name(c)).get<std::string>();
    return Naming(j.at("id").get<int>(), std::move(words));
}

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\r') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline std::string strip_punct(std::string tok) {
    auto is_punct = [](char c) {
        return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' ||
               c == ')' || c == '(' || c == '"' || c == '\'' || c == '*' || c == '`';
    };
    while (!tok.empty() && is_punct(tok.front())) tok.erase(tok.begin());
    while (!tok.empty() && is_punct(tok.back())) tok.pop_back();
    return tok;
}

}  // namespace detail

// Parses one plan line, e.g. "feast Block C from Block A" or
// "unstack Block C from on top of Block A". Case-insensitive; surrounding
// punctuation ignored; connectives "from", "from on top of" and "on top of"
// all accepted.
inline bw::Action parse_plan_line(const std::string& line, const Naming& naming) {
    std::vector<std::string> toks;
    for (auto& t : detail::split_ws(line)) {
        t = detail::strip_punct(Naming::lower(t));
        if (!t.empty()) toks.push_back(t);
    }
    if (toks.empty()) throw PlanParseError(PlanParseError::Kind::MalformedLine, line);

    // Longest surface word first so multi-word actions ("pick up") win.
    Concept action{};
    size_t consumed = 0;
    for (Concept c : kActionConcepts) {
        auto words = detail::split_ws(Naming::lower(naming.word(c)));
        if (words.size() > toks.size() || words.size() <= consumed) continue;
        bool match = true;
        for (size_t i = 0; i < words.size(); ++i)
            if (toks[i] != words[i]) { match = false; break; }
        if (match) {
            action = c;
            consumed = words.size();
        }
    }
    if (consumed == 0) throw PlanParseError(PlanParseError::Kind::UnknownActionWord, line);

    std::vector<int> args;
    size_t i = consumed;
    auto expect_block = [&]() {
        if (i >= toks.size() || toks[i] != "block" || i + 1 >= toks.size())
            throw PlanParseError(PlanParseError::Kind::MalformedLine, line);
        try {
            args.push_back(bw::block_from_label(toks[i + 1]));
        } catch (const std::invalid_argument&) {
            throw PlanParseError(PlanParseError::Kind::MalformedLine, line);
        }
        i += 2;
    };
    expect_block();
    if (i < toks.size()) {
        if (toks[i] == "from") {
            ++i;
            if (i + 2 < toks.size() && toks[i] == "on" && toks[i + 1] == "top" && toks[i + 2] == "of")
                i += 3;
        } else if (i + 2 < toks.size() && toks[i] == "on" && toks[i + 1] == "top" && toks[i + 2] == "of") {
            i += 3;
        } else {
            throw PlanParseError(PlanParseError::Kind::MalformedLine, line);
        }
        expect_block();
    }
    if (i != toks.size()) throw PlanParseError(PlanParseError::Kind::MalformedLine, line);

    const bool two_arg =
        action == Concept::Stack || action == Concept::Unstack;
    if (two_arg != (args.size() == 2))
        throw PlanParseError(PlanParseError::Kind::MalformedLine, line);
    switch (action) {
        case Concept::PickUp:  return bw::Action::pick_up(args[0]);
        case Concept::PutDown: return bw::Action::put_down(args[0]);
        case Concept::Stack:   return bw::Action::stack(args[0], args[1]);
        case Concept::Unstack: return bw::Action::unstack(args[0], args[1]);
        default: throw std::logic_error("non-action concept");
    }
}

// Extracts the LAST [PLAN]...[PLAN END] region and parses each nonempty line.
// Reasoning traces may contain draft plans; the final answer is last.
inline bw::Plan parse_plan(const std::string& text, const Naming& naming) {
    static const std::string open_tag = "[PLAN]";
    static const std::string close_tag = "[PLAN END]";
    size_t best_open = std::string::npos, best_close = std::string::npos;
    size_t from = 0;
    for (;;) {
        size_t o = text.find(open_tag, from);
        if (o == std::string::npos) break;
        size_t c = text.find(close_tag, o + open_tag.size());
        if (c == std::string::npos) break;
        best_open = o;
        best_close = c;
        from = c + close_tag.size();
    }
    if (best_open == std::string::npos)
        throw PlanParseError(PlanParseError::Kind::NoPlanBlock, "");
    std::string body =
        text.substr(best_open + open_tag.size(), best_close - best_open - open_tag.size());

    bw::Plan plan;
    std::string line;
    auto flush = [&]() {
        std::string trimmed = line;
        line.clear();
        size_t b = trimmed.find_first_not_of(" \t\r");
        if (b == std::string::npos) return;
        trimmed = trimmed.substr(b);
        plan.push_back(parse_plan_line(trimmed, naming));
    };
    for (char c : body) {
        if (c == '\n')
            flush();
        else
            line += c;
    }
    flush();
    return plan;
}

}  // namespace frr::obf
