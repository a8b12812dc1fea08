#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "frr/naming.hpp"
#include "frr/prompt.hpp"

using namespace frr;
using namespace frr::obf;

namespace {

// Strips trailing whitespace per line so goldens compare modulo it.
std::string rstrip_lines(const std::string& s) {
    std::string out;
    std::istringstream in(s);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
            line.pop_back();
        if (!first) out += '\n';
        first = false;
        out += line;
    }
    return out;
}

const char* kStandardExample = R"(I am playing with a set of blocks where I need to arrange the blocks into stacks. Here are the actions I can do

Pick up a block
Unstack a block from on top of another block
Put down a block
Stack a block on top of another block

I have the following restrictions on my actions:
I can only pick up or unstack one block at a time.
I can only pick up or unstack a block if my hand is empty.
I can only pick up a block if the block is on the table and the block is clear.
A block is clear if the block has no other blocks on top of it and if the block is not picked up.
I can only unstack a block from on top of another block if the block I am unstacking was really on top of the other block.
I can only unstack a block from on top of another block if the block I am unstacking is clear.
Once I pick up or unstack a block, I am holding the block.
I can only put down a block that I am holding.
I can only stack a block on top of another block if I am holding the block being stacked.
I can only stack a block on top of another block if the block onto which I am stacking the block is clear.
Once I put down or stack a block, my hand becomes empty.
Once you stack a block on top of a second block, the second block is no longer clear.

Here is an example problem:

[STATEMENT]
As initial conditions I have that, Block B is clear, Block C is clear, the hand is empty, Block C is on top of Block A, Block A is on the table, Block B is on the table.
My goal is to have that Block A is on top of Block C and Block B is on top of Block A

My plan is as follows:

[PLAN]
unstack Block C from on top of Block A
put down Block C
pick up Block A
stack Block A on top of Block C
pick up Block B
stack Block B on top of Block A
[PLAN END])";

const char* kMysteryExample = R"(I am playing with a set of objects. Here are the actions I can do:
   Attack object
   Feast object from another object
   Succumb object
   Overcome object from another object

I have the following restrictions on my actions:
    To perform Attack action, the following facts need to be true: Province object, Planet object, Harmony.
    Once Attack action is performed the following facts will be true: Pain object.
    Once Attack action is performed the following facts will be false: Province object, Planet object, Harmony.
    To perform Succumb action, the following facts need to be true: Pain object.
    Once Succumb action is performed the following facts will be true: Province object, Planet object, Harmony.
    Once Succumb action is performed the following facts will be false: Pain object.
    To perform Overcome action, the following needs to be true: Province other object, Pain object.
    Once Overcome action is performed the following will be true: Harmony, Province object, Object Craves other object.
    Once Overcome action is performed the following will be false: Province other object, Pain object.
    To perform Feast action, the following needs to be true: Object Craves other object, Province object, Harmony.
    Once Feast action is performed the following will be true: Pain object, Province other object.
    Once Feast action is performed the following will be false:, Object Craves other object, Province object, Harmony.

Here is an example problem:
[STATEMENT]
As initial conditions I have that, province Block B, province Block C, harmony, Block C craves Block A, planet Block A, planet Block B.
My goal is to have that Block A craves Block C and Block B craves Block A.
My plan is as follows:
[PLAN]
feast Block C from Block A
succumb Block C
attack Block A
overcome Block A from Block C
attack Block B
overcome Block B from Block A
[PLAN END])";

}  // namespace

TEST_CASE("builtin namings load and match the tables") {
    CHECK(builtin_naming(1).word(Concept::PickUp) == "attack");
    CHECK(builtin_naming(3).word(Concept::PickUp) == "tltezi");
    CHECK(builtin_naming(10).word(Concept::Clear) == "puzzle");
    CHECK(builtin_naming(20).word(Concept::On) == "quorbles");
    for (int id = 1; id <= kNumBuiltinNamings; ++id) CHECK_NOTHROW(builtin_naming(id));
    CHECK_THROWS_AS(builtin_naming(0), UnknownNaming);
    CHECK_THROWS_AS(builtin_naming(21), UnknownNaming);
}

TEST_CASE("duplicate or overlapping surface words are rejected") {
    auto words = builtin_naming(1).words();
    words[Concept::PutDown] = "attack";  // duplicate action word
    CHECK_THROWS_AS(Naming(99, words), InvalidNaming);

    words = builtin_naming(1).words();
    words[Concept::Clear] = "attack";  // action word reused as predicate
    CHECK_THROWS_AS(Naming(99, words), InvalidNaming);
}

TEST_CASE("naming JSON round trip") {
    for (int id : {1, 3, 10, 20}) {
        Naming n = builtin_naming(id);
        Naming m = naming_from_json(naming_to_json(n));
        CHECK(m.id() == n.id());
        CHECK(m.words() == n.words());
    }
}

TEST_CASE("standard example renders byte-for-byte (modulo trailing whitespace)") {
    std::string got = render_example(identity_naming(), {TemplateKind::Standard});
    CHECK(rstrip_lines(got) == rstrip_lines(kStandardExample));
}

TEST_CASE("mystery 1 example renders byte-for-byte (modulo trailing whitespace)") {
    std::string got = render_example(builtin_naming(1), {TemplateKind::Mystery});
    CHECK(rstrip_lines(got) == rstrip_lines(kMysteryExample));
}

TEST_CASE("table-verbatim relational style is also available") {
    PromptTemplate t{TemplateKind::Mystery, /*relational_swap=*/false};
    std::string got = render_example(builtin_naming(1), t);
    // with the table roles verbatim the relational atom uses the on-word
    CHECK(got.find("Block C pain Block A") != std::string::npos);
    CHECK(got.find("Block C craves Block A") == std::string::npos);
}

TEST_CASE("render_prompt is deterministic and contains the example plan lines") {
    auto puzzle = example_puzzle();
    std::string a = render_prompt(puzzle, identity_naming(), {TemplateKind::Standard});
    std::string b = render_prompt(puzzle, identity_naming(), {TemplateKind::Standard});
    CHECK(a == b);
    CHECK(a.find("unstack Block C from on top of Block A") != std::string::npos);

    std::string m = render_prompt(puzzle, builtin_naming(1), {TemplateKind::Mystery});
    CHECK(m.find("feast Block C from Block A") != std::string::npos);
}

TEST_CASE("appendix mystery plan parses to the canonical plan") {
    bw::Plan plan = parse_plan(kMysteryExample, builtin_naming(1));
    CHECK(plan == example_plan());
}

TEST_CASE("appendix standard plan parses with the identity naming") {
    bw::Plan plan = parse_plan(kStandardExample, identity_naming());
    CHECK(plan == example_plan());
}

TEST_CASE("parse_plan picks the LAST delimited region") {
    std::string text = std::string("[PLAN]\nattack Block A\n[PLAN END]\n ... rethinking ...\n") +
                       "[PLAN]\nsuccumb Block A\n[PLAN END]\n";
    bw::Plan plan = parse_plan(text, builtin_naming(1));
    REQUIRE(plan.size() == 1);
    CHECK(plan[0] == bw::Action::put_down(0));
}

TEST_CASE("parse_plan error paths") {
    Naming n = builtin_naming(1);
    CHECK_THROWS_AS(parse_plan("no plan here", n), PlanParseError);
    try {
        parse_plan("nothing", n);
    } catch (const PlanParseError& e) {
        CHECK(e.kind == PlanParseError::Kind::NoPlanBlock);
    }
    try {
        parse_plan("[PLAN]\nfrobnicate Block A\n[PLAN END]", n);
        FAIL("expected throw");
    } catch (const PlanParseError& e) {
        CHECK(e.kind == PlanParseError::Kind::UnknownActionWord);
    }
    try {
        parse_plan("[PLAN]\nattack Block A from\n[PLAN END]", n);
        FAIL("expected throw");
    } catch (const PlanParseError& e) {
        CHECK(e.kind == PlanParseError::Kind::MalformedLine);
    }
    // wrong arity for a two-argument action
    try {
        parse_plan("[PLAN]\novercome Block A\n[PLAN END]", n);
        FAIL("expected throw");
    } catch (const PlanParseError& e) {
        CHECK(e.kind == PlanParseError::Kind::MalformedLine);
    }
}

TEST_CASE("parsing tolerates case and punctuation") {
    Naming n = builtin_naming(1);
    bw::Plan plan = parse_plan("[PLAN]\n  Attack Block a.\nOVERCOME Block A from Block B,\n[PLAN END]", n);
    REQUIRE(plan.size() == 2);
    CHECK(plan[0] == bw::Action::pick_up(0));
    CHECK(plan[1] == bw::Action::stack(0, 1));
}

TEST_CASE("round trip over every naming and action") {
    std::vector<bw::Action> actions = bw::all_actions(3);
    std::vector<Naming> namings{identity_naming()};
    for (int id = 1; id <= kNumBuiltinNamings; ++id) namings.push_back(builtin_naming(id));
    for (const auto& n : namings) {
        for (TemplateKind kind : {TemplateKind::Standard, TemplateKind::Mystery}) {
            if (n.id() == 0 && kind == TemplateKind::Mystery) continue;
            for (const auto& a : actions) {
                std::string line = render_action_line(a, n, kind);
                CHECK(parse_plan_line(line, n) == a);
            }
        }
    }
}

TEST_CASE("naming application never alters block labels") {
    for (int id = 1; id <= kNumBuiltinNamings; ++id) {
        std::string line = render_action_line(bw::Action::stack(0, 5), builtin_naming(id),
                                              TemplateKind::Mystery);
        CHECK(line.find("Block A") != std::string::npos);
        CHECK(line.find("Block F") != std::string::npos);
    }
}
