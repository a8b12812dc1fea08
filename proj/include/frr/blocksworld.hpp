#pragma once

// STRIPS-style BlocksWorld: states, actions, plan verification, BFS solver and
// seeded puzzle generation. All types are immutable values; all operations are
// pure functions.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace frr::bw {

struct MalformedState : std::runtime_error {
    explicit MalformedState(const std::string& why) : std::runtime_error("malformed state: " + why) {}
};
struct Inapplicable : std::runtime_error {
    explicit Inapplicable(const std::string& why) : std::runtime_error("inapplicable: " + why) {}
};
struct SizeLimit : std::runtime_error {
    explicit SizeLimit(const std::string& why) : std::runtime_error("size limit: " + why) {}
};

inline std::string block_label(int id) {
    if (id < 0 || id >= 26) throw std::invalid_argument("block id out of range");
    return std::string(1, static_cast<char>('A' + id));
}

inline int block_from_label(const std::string& s) {
    if (s.size() != 1) throw std::invalid_argument("bad block label: " + s);
    char c = s[0];
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    if (c < 'A' || c > 'Z') throw std::invalid_argument("bad block label: " + s);
    return c - 'A';
}

struct Predicate {
    enum class Kind { Clear, HandEmpty, Holding, On, OnTable };
    Kind kind;
    int x = -1;  // first argument where applicable
    int y = -1;  // second argument (On only)

    static Predicate clear_(int x) { return {Kind::Clear, x, -1}; }
    static Predicate hand_empty() { return {Kind::HandEmpty, -1, -1}; }
    static Predicate holding(int x) { return {Kind::Holding, x, -1}; }
    static Predicate on(int x, int y) {
        if (x == y) throw std::invalid_argument("On(x,x) is not constructible");
        return {Kind::On, x, y};
    }
    static Predicate on_table(int x) { return {Kind::OnTable, x, -1}; }

    friend auto operator<=>(const Predicate&, const Predicate&) = default;
};

struct Action {
    enum class Type { PickUp, PutDown, Stack, Unstack };
    Type type;
    int x;
    int y = -1;  // Stack/Unstack only

    static Action pick_up(int x) { return {Type::PickUp, x, -1}; }
    static Action put_down(int x) { return {Type::PutDown, x, -1}; }
    static Action stack(int x, int y) {
        if (x == y) throw std::invalid_argument("stack(x,x)");
        return {Type::Stack, x, y};
    }
    static Action unstack(int x, int y) {
        if (x == y) throw std::invalid_argument("unstack(x,x)");
        return {Type::Unstack, x, y};
    }

    friend auto operator<=>(const Action&, const Action&) = default;
};

using Plan = std::vector<Action>;

// Compact canonical state: below[i] is the block that i rests on, kTable for
// the table, kHeld for the hand. Well-formedness is established on
// construction; predicates are derived views.
class State {
public:
    static constexpr int kTable = -1;
    static constexpr int kHeld = -2;

    State(int n_blocks, std::vector<int> below) : below_(std::move(below)) {
        if (n_blocks < 1 || static_cast<int>(below_.size()) != n_blocks)
            throw MalformedState("block count mismatch");
        validate();
    }

    // Builds a state from an explicit predicate set, checking every
    // well-formedness rule (hand consistency, unique support, Clear
    // consistency, acyclicity).
    static State from_predicates(int n_blocks, const std::vector<Predicate>& preds) {
        std::vector<int> below(static_cast<size_t>(n_blocks), kTable);
        std::vector<bool> placed(static_cast<size_t>(n_blocks), false);
        bool hand_empty_seen = false;
        int held = -1;
        auto check_block = [&](int b) {
            if (b < 0 || b >= n_blocks) throw MalformedState("block out of range");
        };
        for (const auto& p : preds) {
            switch (p.kind) {
                case Predicate::Kind::HandEmpty:
                    hand_empty_seen = true;
                    break;
                case Predicate::Kind::Holding:
                    check_block(p.x);
                    if (held >= 0) throw MalformedState("two Holding atoms");
                    held = p.x;
                    break;
                case Predicate::Kind::On:
                    check_block(p.x);
                    check_block(p.y);
                    if (placed[p.x]) throw MalformedState("block placed twice");
                    placed[p.x] = true;
                    below[p.x] = p.y;
                    break;
                case Predicate::Kind::OnTable:
                    check_block(p.x);
                    if (placed[p.x]) throw MalformedState("block placed twice");
                    placed[p.x] = true;
                    below[p.x] = kTable;
                    break;
                case Predicate::Kind::Clear:
                    check_block(p.x);
                    break;
            }
        }
        if (held >= 0) {
            if (hand_empty_seen) throw MalformedState("Holding and HandEmpty together");
            if (placed[held]) throw MalformedState("held block also placed");
            below[held] = kHeld;
            placed[held] = true;
        } else if (!hand_empty_seen) {
            throw MalformedState("HandEmpty absent with empty hand");
        }
        for (int b = 0; b < n_blocks; ++b)
            if (!placed[b]) throw MalformedState("block " + block_label(b) + " unplaced");
        State st(n_blocks, std::move(below));
        // Clear atoms must exactly match the derived clear set.
        std::vector<bool> declared(static_cast<size_t>(n_blocks), false);
        for (const auto& p : preds)
            if (p.kind == Predicate::Kind::Clear) declared[p.x] = true;
        for (int b = 0; b < n_blocks; ++b)
            if (declared[b] != st.clear(b))
                throw MalformedState("Clear(" + block_label(b) + ") inconsistent");
        return st;
    }

    int n_blocks() const { return static_cast<int>(below_.size()); }
    int below(int b) const { return below_[b]; }
    bool held(int b) const { return below_[b] == kHeld; }
    bool on_table(int b) const { return below_[b] == kTable; }
    bool on(int x, int y) const { return below_[x] == y; }
    bool hand_empty() const {
        return std::none_of(below_.begin(), below_.end(), [](int v) { return v == kHeld; });
    }
    std::optional<int> held_block() const {
        for (int b = 0; b < n_blocks(); ++b)
            if (held(b)) return b;
        return std::nullopt;
    }
    bool clear(int b) const {
        if (held(b)) return false;
        for (int o = 0; o < n_blocks(); ++o)
            if (below_[o] == b) return false;
        return true;
    }

    // Canonical order: Clear*, HandEmpty|Holding, On*, OnTable* (block order
    // within each group). This is also the prompt statement order.
    std::vector<Predicate> predicates() const {
        std::vector<Predicate> out;
        for (int b = 0; b < n_blocks(); ++b)
            if (clear(b)) out.push_back(Predicate::clear_(b));
        if (auto h = held_block())
            out.push_back(Predicate::holding(*h));
        else
            out.push_back(Predicate::hand_empty());
        for (int b = 0; b < n_blocks(); ++b)
            if (below_[b] >= 0) out.push_back(Predicate::on(b, below_[b]));
        for (int b = 0; b < n_blocks(); ++b)
            if (on_table(b)) out.push_back(Predicate::on_table(b));
        return out;
    }

    friend auto operator<=>(const State&, const State&) = default;

private:
    void validate() const {
        int n = n_blocks();
        int held_count = 0;
        for (int b = 0; b < n; ++b) {
            int u = below_[b];
            if (u == kHeld) {
                ++held_count;
            } else if (u != kTable) {
                if (u < 0 || u >= n || u == b) throw MalformedState("bad support");
            }
        }
        if (held_count > 1) throw MalformedState("more than one held block");
        for (int b = 0; b < n; ++b) {
            int seen = 0;
            for (int o = 0; o < n; ++o)
                if (below_[o] == b) ++seen;
            if (seen > 1) throw MalformedState("two blocks on one block");
            if (seen > 0 && below_[b] == kHeld)
                throw MalformedState("block resting on the held block");
        }
        // acyclicity of the support chains
        for (int b = 0; b < n; ++b) {
            int cur = b, steps = 0;
            while (cur >= 0) {
                cur = below_[cur];
                if (++steps > n) throw MalformedState("cyclic On relation");
            }
        }
    }

    std::vector<int> below_;
};

struct OnAtom {
    int x;
    int y;
    friend auto operator<=>(const OnAtom&, const OnAtom&) = default;
};
using Goal = std::vector<OnAtom>;

struct Puzzle {
    int n_blocks;
    State initial;
    Goal goal;
};

struct Verdict {
    enum class Outcome { Valid, InapplicableAt, GoalUnsatisfied };
    Outcome outcome;
    size_t step = 0;          // InapplicableAt only
    std::string reason;       // InapplicableAt only
    std::optional<State> final_state;  // present when all actions applied

    bool valid() const { return outcome == Outcome::Valid; }
};

inline void check_action_range(const State& s, const Action& a) {
    int n = s.n_blocks();
    if (a.x < 0 || a.x >= n) throw std::invalid_argument("action block out of range");
    if ((a.type == Action::Type::Stack || a.type == Action::Type::Unstack) &&
        (a.y < 0 || a.y >= n))
        throw std::invalid_argument("action block out of range");
}

inline bool is_applicable(const State& s, const Action& a) {
    check_action_range(s, a);
    switch (a.type) {
        case Action::Type::PickUp:
            return s.hand_empty() && s.on_table(a.x) && s.clear(a.x);
        case Action::Type::PutDown:
            return s.held(a.x);
        case Action::Type::Stack:
            return s.held(a.x) && s.clear(a.y);
        case Action::Type::Unstack:
            return s.hand_empty() && s.on(a.x, a.y) && s.clear(a.x);
    }
    return false;
}

inline std::string action_to_string(const Action& a);

inline State apply(const State& s, const Action& a) {
    if (!is_applicable(s, a))
        throw Inapplicable(action_to_string(a));
    std::vector<int> below(static_cast<size_t>(s.n_blocks()));
    for (int b = 0; b < s.n_blocks(); ++b) below[b] = s.below(b);
    switch (a.type) {
        case Action::Type::PickUp:
        case Action::Type::Unstack:
            below[a.x] = State::kHeld;
            break;
        case Action::Type::PutDown:
            below[a.x] = State::kTable;
            break;
        case Action::Type::Stack:
            below[a.x] = a.y;
            break;
    }
    return State(s.n_blocks(), std::move(below));
}

inline bool satisfies_goal(const State& s, const Goal& goal) {
    return std::all_of(goal.begin(), goal.end(),
                       [&](const OnAtom& g) { return s.on(g.x, g.y); });
}

inline Verdict verify_plan(const Puzzle& p, const Plan& plan) {
    State cur = p.initial;
    for (size_t i = 0; i < plan.size(); ++i) {
        if (!is_applicable(cur, plan[i]))
            return {Verdict::Outcome::InapplicableAt, i, action_to_string(plan[i]), std::nullopt};
        cur = apply(cur, plan[i]);
    }
    if (!satisfies_goal(cur, p.goal))
        return {Verdict::Outcome::GoalUnsatisfied, 0, "", cur};
    return {Verdict::Outcome::Valid, 0, "", cur};
}

inline std::vector<Action> all_actions(int n) {
    std::vector<Action> out;
    for (int x = 0; x < n; ++x) {
        out.push_back(Action::pick_up(x));
        out.push_back(Action::put_down(x));
        for (int y = 0; y < n; ++y) {
            if (x == y) continue;
            out.push_back(Action::stack(x, y));
            out.push_back(Action::unstack(x, y));
        }
    }
    return out;
}

inline constexpr int kMaxSolvableBlocks = 6;

// Shortest plan by breadth-first search over the full state space.
inline Plan bfs_solve(const Puzzle& p) {
    if (p.n_blocks > kMaxSolvableBlocks)
        throw SizeLimit("bfs_solve supports at most " + std::to_string(kMaxSolvableBlocks) + " blocks");
    if (satisfies_goal(p.initial, p.goal)) return {};
    const auto actions = all_actions(p.n_blocks);
    std::map<State, std::pair<State, Action>> parent;  // state -> (prev, action)
    std::deque<State> frontier{p.initial};
    std::map<State, bool> seen{{p.initial, true}};
    while (!frontier.empty()) {
        State cur = frontier.front();
        frontier.pop_front();
        for (const auto& a : actions) {
            if (!is_applicable(cur, a)) continue;
            State next = apply(cur, a);
            if (seen.count(next)) continue;
            seen[next] = true;
            parent.emplace(next, std::make_pair(cur, a));
            if (satisfies_goal(next, p.goal)) {
                Plan plan;
                State back = next;
                while (!(back == p.initial)) {
                    auto it = parent.find(back);
                    plan.push_back(it->second.second);
                    back = it->second.first;
                }
                std::reverse(plan.begin(), plan.end());
                return plan;
            }
            frontier.push_back(next);
        }
    }
    throw std::logic_error("BlocksWorld state space is connected; unreachable");
}

// All well-formed states for n blocks (held block allowed unless
// hand_empty_only). Candidate support assignments are filtered through the
// State validator.
inline std::vector<State> enumerate_states(int n, bool hand_empty_only = false) {
    if (n > kMaxSolvableBlocks) throw SizeLimit("enumeration bound exceeded");
    std::vector<State> out;
    std::vector<int> below(static_cast<size_t>(n), State::kTable);
    // each block: table, held, or on one of the others
    auto rec = [&](auto&& self, int b) -> void {
        if (b == n) {
            try {
                out.emplace_back(n, below);
            } catch (const MalformedState&) {
            }
            return;
        }
        below[b] = State::kTable;
        self(self, b + 1);
        if (!hand_empty_only) {
            below[b] = State::kHeld;
            self(self, b + 1);
        }
        for (int y = 0; y < n; ++y) {
            if (y == b) continue;
            below[b] = y;
            self(self, b + 1);
        }
        below[b] = State::kTable;
    };
    rec(rec, 0);
    return out;
}

// Deterministic puzzle generation: uniform well-formed hand-empty initial
// state, independent uniform full-tower goal, rejecting the trivially
// satisfied pair.
inline Puzzle generate_puzzle(int n_blocks, uint64_t seed) {
    if (n_blocks < 2 || n_blocks > kMaxSolvableBlocks)
        throw SizeLimit("generate_puzzle requires 2..6 blocks");
    const auto states = enumerate_states(n_blocks, /*hand_empty_only=*/true);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    for (;;) {
        State initial = states[rng() % states.size()];
        std::vector<int> order(static_cast<size_t>(n_blocks));
        for (int i = 0; i < n_blocks; ++i) order[i] = i;
        for (int i = n_blocks - 1; i > 0; --i)
            std::swap(order[i], order[rng() % static_cast<uint64_t>(i + 1)]);
        Goal goal;  // order[0] at the bottom
        for (int i = 1; i < n_blocks; ++i) goal.push_back({order[i], order[i - 1]});
        if (!satisfies_goal(initial, goal))
            return Puzzle{n_blocks, initial, goal};
    }
}

// ---- text and JSON forms ----

inline std::string action_canonical_word(Action::Type t) {
    switch (t) {
        case Action::Type::PickUp:  return "pick-up";
        case Action::Type::PutDown: return "put-down";
        case Action::Type::Stack:   return "stack";
        case Action::Type::Unstack: return "unstack";
    }
    throw std::logic_error("bad action type");
}

inline std::string action_to_string(const Action& a) {
    std::string s = action_canonical_word(a.type) + " " + block_label(a.x);
    if (a.type == Action::Type::Stack || a.type == Action::Type::Unstack)
        s += " " + block_label(a.y);
    return s;
}

inline Action action_from_string(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == ' ') {
            if (!cur.empty()) parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) parts.push_back(cur);
    if (parts.empty()) throw std::invalid_argument("empty action string");
    const std::string& w = parts[0];
    auto arg = [&](size_t i) {
        if (i >= parts.size()) throw std::invalid_argument("missing action argument: " + s);
        return block_from_label(parts[i]);
    };
    if (w == "pick-up") return Action::pick_up(arg(1));
    if (w == "put-down") return Action::put_down(arg(1));
    if (w == "stack") return Action::stack(arg(1), arg(2));
    if (w == "unstack") return Action::unstack(arg(1), arg(2));
    throw std::invalid_argument("unknown action word: " + w);
}

inline std::string predicate_to_string(const Predicate& p) {
    switch (p.kind) {
        case Predicate::Kind::Clear:     return "clear " + block_label(p.x);
        case Predicate::Kind::HandEmpty: return "hand-empty";
        case Predicate::Kind::Holding:   return "holding " + block_label(p.x);
        case Predicate::Kind::On:        return "on " + block_label(p.x) + " " + block_label(p.y);
        case Predicate::Kind::OnTable:   return "on-table " + block_label(p.x);
    }
    throw std::logic_error("bad predicate");
}

inline Predicate predicate_from_string(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == ' ') {
            if (!cur.empty()) parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) parts.push_back(cur);
    if (parts.empty()) throw std::invalid_argument("empty predicate string");
    const std::string& w = parts[0];
    auto arg = [&](size_t i) {
        if (i >= parts.size()) throw std::invalid_argument("missing predicate argument: " + s);
        return block_from_label(parts[i]);
    };
    if (w == "clear") return Predicate::clear_(arg(1));
    if (w == "hand-empty") return Predicate::hand_empty();
    if (w == "holding") return Predicate::holding(arg(1));
    if (w == "on") return Predicate::on(arg(1), arg(2));
    if (w == "on-table") return Predicate::on_table(arg(1));
    throw std::invalid_argument("unknown predicate word: " + w);
}

inline nlohmann::json state_to_json(const State& s) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : s.predicates()) arr.push_back(predicate_to_string(p));
    return arr;
}

inline nlohmann::json puzzle_to_json(const Puzzle& p) {
    nlohmann::json goal = nlohmann::json::array();
    for (const auto& g : p.goal)
        goal.push_back("on " + block_label(g.x) + " " + block_label(g.y));
    return {{"n_blocks", p.n_blocks}, {"init", state_to_json(p.initial)}, {"goal", goal}};
}

inline Puzzle puzzle_from_json(const nlohmann::json& j) {
    int n = j.at("n_blocks").get<int>();
    std::vector<Predicate> preds;
    for (const auto& s : j.at("init")) preds.push_back(predicate_from_string(s.get<std::string>()));
    Goal goal;
    for (const auto& s : j.at("goal")) {
        Predicate p = predicate_from_string(s.get<std::string>());
        if (p.kind != Predicate::Kind::On) throw std::invalid_argument("goal atoms must be On");
        if (p.x >= n || p.y >= n) throw std::invalid_argument("goal block out of range");
        goal.push_back({p.x, p.y});
    }
    return Puzzle{n, State::from_predicates(n, preds), goal};
}

inline nlohmann::json plan_to_json(const Plan& plan) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& a : plan) arr.push_back(action_to_string(a));
    return arr;
}

inline Plan plan_from_json(const nlohmann::json& j) {
    Plan plan;
    for (const auto& s : j) plan.push_back(action_from_string(s.get<std::string>()));
    return plan;
}

inline nlohmann::json verdict_to_json(const Verdict& v) {
    nlohmann::json j;
    switch (v.outcome) {
        case Verdict::Outcome::Valid:
            j["outcome"] = "valid";
            break;
        case Verdict::Outcome::InapplicableAt:
            j["outcome"] = "inapplicable";
            j["step"] = v.step;
            j["reason"] = v.reason;
            break;
        case Verdict::Outcome::GoalUnsatisfied:
            j["outcome"] = "goal-unsatisfied";
            break;
    }
    if (v.final_state) j["final"] = state_to_json(*v.final_state);
    return j;
}

}  // namespace frr::bw
