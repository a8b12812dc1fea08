#pragma once

// Prompt rendering for the standard and mystery templates. The standard
// template carries the fixed English rule prose; the mystery template
// generates its STRIPS-style rule text from a naming's surface words.

#include <string>
#include <vector>

#include "frr/blocksworld.hpp"
#include "frr/concepts.hpp"
#include "frr/naming.hpp"

namespace frr::obf {

enum class TemplateKind { Standard, Mystery };

struct PromptTemplate {
    TemplateKind kind = TemplateKind::Standard;
    // The source dataset's prompt uses the holding-word for the relational
    // atom and the on-word for the held atom (swapped relative to the naming
    // table's slot labels). True reproduces that prompt; false renders table
    // roles verbatim.
    bool relational_swap = true;
};

namespace detail {

inline std::string capitalize(std::string w) {
    if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
}

// Surface word for a canonical predicate slot under the template's
// relational convention.
inline std::string pred_word(const Naming& n, const PromptTemplate& t, Concept slot) {
    if (t.relational_swap) {
        if (slot == Concept::On) return n.word(Concept::Holding);
        if (slot == Concept::Holding) return n.word(Concept::On);
    }
    return n.word(slot);
}

}  // namespace detail

// The fixed 3-block example problem shown in every prompt.
inline bw::Puzzle example_puzzle() {
    using bw::Predicate;
    auto initial = bw::State::from_predicates(
        3, {Predicate::clear_(1), Predicate::clear_(2), Predicate::hand_empty(),
            Predicate::on(2, 0), Predicate::on_table(0), Predicate::on_table(1)});
    return bw::Puzzle{3, initial, {{0, 2}, {1, 0}}};
}

inline bw::Plan example_plan() {
    using bw::Action;
    return {Action::unstack(2, 0), Action::put_down(2), Action::pick_up(0),
            Action::stack(0, 2),  Action::pick_up(1),  Action::stack(1, 0)};
}

inline std::string render_action_line(const bw::Action& a, const Naming& naming,
                                      TemplateKind kind) {
    auto word = [&](Concept c) { return naming.word(c); };
    std::string x = "Block " + bw::block_label(a.x);
    if (kind == TemplateKind::Standard) {
        switch (a.type) {
            case bw::Action::Type::PickUp:  return word(Concept::PickUp) + " " + x;
            case bw::Action::Type::PutDown: return word(Concept::PutDown) + " " + x;
            case bw::Action::Type::Stack:
                return word(Concept::Stack) + " " + x + " on top of Block " + bw::block_label(a.y);
            case bw::Action::Type::Unstack:
                return word(Concept::Unstack) + " " + x + " from on top of Block " +
                       bw::block_label(a.y);
        }
    } else {
        switch (a.type) {
            case bw::Action::Type::PickUp:  return word(Concept::PickUp) + " " + x;
            case bw::Action::Type::PutDown: return word(Concept::PutDown) + " " + x;
            case bw::Action::Type::Stack:
                return word(Concept::Stack) + " " + x + " from Block " + bw::block_label(a.y);
            case bw::Action::Type::Unstack:
                return word(Concept::Unstack) + " " + x + " from Block " + bw::block_label(a.y);
        }
    }
    throw std::logic_error("bad action");
}

inline std::string render_plan(const bw::Plan& plan, const Naming& naming, TemplateKind kind) {
    std::string out = "[PLAN]\n";
    for (const auto& a : plan) out += render_action_line(a, naming, kind) + "\n";
    out += "[PLAN END]";
    return out;
}

inline std::string render_statement_atom(const bw::Predicate& p, const Naming& naming,
                                         const PromptTemplate& t) {
    std::string x = p.x >= 0 ? "Block " + bw::block_label(p.x) : "";
    if (t.kind == TemplateKind::Standard) {
        switch (p.kind) {
            case bw::Predicate::Kind::Clear:     return x + " is clear";
            case bw::Predicate::Kind::HandEmpty: return "the hand is empty";
            case bw::Predicate::Kind::Holding:   return "the hand is holding " + x;
            case bw::Predicate::Kind::On:
                return x + " is on top of Block " + bw::block_label(p.y);
            case bw::Predicate::Kind::OnTable:   return x + " is on the table";
        }
    } else {
        switch (p.kind) {
            case bw::Predicate::Kind::Clear:
                return detail::pred_word(naming, t, Concept::Clear) + " " + x;
            case bw::Predicate::Kind::HandEmpty:
                return detail::pred_word(naming, t, Concept::HandEmpty);
            case bw::Predicate::Kind::Holding:
                return detail::pred_word(naming, t, Concept::Holding) + " " + x;
            case bw::Predicate::Kind::On:
                return x + " " + detail::pred_word(naming, t, Concept::On) + " Block " +
                       bw::block_label(p.y);
            case bw::Predicate::Kind::OnTable:
                return detail::pred_word(naming, t, Concept::OnTable) + " " + x;
        }
    }
    throw std::logic_error("bad predicate");
}

// "[STATEMENT]" block: initial conditions plus goal line. The goal line
// punctuation differs between the two templates (the mystery prompt ends its
// goal sentence with a period).
inline std::string render_statement(const bw::Puzzle& p, const Naming& naming,
                                    const PromptTemplate& t) {
    std::string out = "[STATEMENT]\nAs initial conditions I have that, ";
    bool first = true;
    for (const auto& pred : p.initial.predicates()) {
        if (!first) out += ", ";
        first = false;
        out += render_statement_atom(pred, naming, t);
    }
    out += ".\nMy goal is to have that ";
    first = true;
    for (const auto& g : p.goal) {
        if (!first) out += " and ";
        first = false;
        out += render_statement_atom(bw::Predicate::on(g.x, g.y), naming, t);
    }
    if (t.kind == TemplateKind::Mystery) out += ".";
    return out;
}

inline std::string standard_scaffold_header() {
    return
        "I am playing with a set of blocks where I need to arrange the blocks into stacks. "
        "Here are the actions I can do\n"
        "\n"
        "Pick up a block\n"
        "Unstack a block from on top of another block\n"
        "Put down a block\n"
        "Stack a block on top of another block\n"
        "\n"
        "I have the following restrictions on my actions:\n"
        "I can only pick up or unstack one block at a time.\n"
        "I can only pick up or unstack a block if my hand is empty.\n"
        "I can only pick up a block if the block is on the table and the block is clear.\n"
        "A block is clear if the block has no other blocks on top of it and if the block is not picked up.\n"
        "I can only unstack a block from on top of another block if the block I am unstacking was really on top of the other block.\n"
        "I can only unstack a block from on top of another block if the block I am unstacking is clear.\n"
        "Once I pick up or unstack a block, I am holding the block.\n"
        "I can only put down a block that I am holding.\n"
        "I can only stack a block on top of another block if I am holding the block being stacked.\n"
        "I can only stack a block on top of another block if the block onto which I am stacking the block is clear.\n"
        "Once I put down or stack a block, my hand becomes empty.\n"
        "Once you stack a block on top of a second block, the second block is no longer clear.\n";
}

inline std::string mystery_scaffold_header(const Naming& n, const PromptTemplate& t) {
    auto A = [&](Concept c) { return detail::capitalize(n.word(c)); };
    auto P = [&](Concept c) { return detail::capitalize(detail::pred_word(n, t, c)); };
    const std::string pickup = A(Concept::PickUp), putdown = A(Concept::PutDown),
                      stack = A(Concept::Stack), unstack = A(Concept::Unstack);
    const std::string ontable = P(Concept::OnTable), clear = P(Concept::Clear),
                      handempty = P(Concept::HandEmpty), holding = P(Concept::Holding),
                      on = P(Concept::On);
    std::string out;
    out += "I am playing with a set of objects. Here are the actions I can do:\n";
    out += "   " + pickup + " object\n";
    out += "   " + unstack + " object from another object\n";
    out += "   " + putdown + " object\n";
    out += "   " + stack + " object from another object\n";
    out += "\n";
    out += "I have the following restrictions on my actions:\n";
    out += "    To perform " + pickup + " action, the following facts need to be true: " +
           clear + " object, " + ontable + " object, " + handempty + ".\n";
    out += "    Once " + pickup + " action is performed the following facts will be true: " +
           holding + " object.\n";
    out += "    Once " + pickup + " action is performed the following facts will be false: " +
           clear + " object, " + ontable + " object, " + handempty + ".\n";
    out += "    To perform " + putdown + " action, the following facts need to be true: " +
           holding + " object.\n";
    out += "    Once " + putdown + " action is performed the following facts will be true: " +
           clear + " object, " + ontable + " object, " + handempty + ".\n";
    out += "    Once " + putdown + " action is performed the following facts will be false: " +
           holding + " object.\n";
    out += "    To perform " + stack + " action, the following needs to be true: " + clear +
           " other object, " + holding + " object.\n";
    out += "    Once " + stack + " action is performed the following will be true: " + handempty +
           ", " + clear + " object, Object " + on + " other object.\n";
    out += "    Once " + stack + " action is performed the following will be false: " + clear +
           " other object, " + holding + " object.\n";
    out += "    To perform " + unstack + " action, the following needs to be true: Object " + on +
           " other object, " + clear + " object, " + handempty + ".\n";
    out += "    Once " + unstack + " action is performed the following will be true: " + holding +
           " object, " + clear + " other object.\n";
    // The source prompt has a stray comma after "false:" on this line.
    out += "    Once " + unstack + " action is performed the following will be false:, Object " +
           on + " other object, " + clear + " object, " + handempty + ".\n";
    return out;
}

// The scaffold-plus-example text (the fixed part of every prompt).
inline std::string render_example(const Naming& naming, const PromptTemplate& t) {
    const auto puzzle = example_puzzle();
    const auto plan = example_plan();
    std::string out;
    if (t.kind == TemplateKind::Standard) {
        out = standard_scaffold_header();
        out += "\nHere is an example problem:\n\n";
        out += render_statement(puzzle, naming, t);
        out += "\n\nMy plan is as follows:\n\n";
        out += render_plan(plan, naming, t.kind);
    } else {
        out = mystery_scaffold_header(naming, t);
        out += "\nHere is an example problem:\n";
        out += render_statement(puzzle, naming, t);
        out += "\nMy plan is as follows:\n";
        out += render_plan(plan, naming, t.kind);
    }
    return out;
}

// Full prompt: scaffold + example + target statement, ending with an open
// [PLAN] tag for the model to complete.
inline std::string render_prompt(const bw::Puzzle& puzzle, const Naming& naming,
                                 const PromptTemplate& t) {
    std::string out = render_example(naming, t);
    if (t.kind == TemplateKind::Standard) {
        out += "\n\n";
        out += render_statement(puzzle, naming, t);
        out += "\n\nMy plan is as follows:\n\n[PLAN]\n";
    } else {
        out += "\n\n";
        out += render_statement(puzzle, naming, t);
        out += "\nMy plan is as follows:\n[PLAN]\n";
    }
    return out;
}

}  // namespace frr::obf
