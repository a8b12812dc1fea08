#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace frr {

// The nine domain concepts: four actions and five predicates.
enum class Concept {
    PickUp,
    PutDown,
    Stack,
    Unstack,
    OnTable,
    Clear,
    HandEmpty,
    Holding,
    On,
};

inline constexpr std::array<Concept, 4> kActionConcepts = {
    Concept::PickUp, Concept::PutDown, Concept::Stack, Concept::Unstack};

inline constexpr std::array<Concept, 5> kPredicateConcepts = {
    Concept::OnTable, Concept::Clear, Concept::HandEmpty, Concept::Holding, Concept::On};

inline constexpr std::array<Concept, 9> kAllConcepts = {
    Concept::PickUp, Concept::PutDown, Concept::Stack,   Concept::Unstack, Concept::OnTable,
    Concept::Clear,  Concept::HandEmpty, Concept::Holding, Concept::On};

inline constexpr bool is_action(Concept c) {
    return c == Concept::PickUp || c == Concept::PutDown || c == Concept::Stack ||
           c == Concept::Unstack;
}

inline std::string concept_name(Concept c) {
    switch (c) {
        case Concept::PickUp:    return "pick-up";
        case Concept::PutDown:   return "put-down";
        case Concept::Stack:     return "stack";
        case Concept::Unstack:   return "unstack";
        case Concept::OnTable:   return "ontable";
        case Concept::Clear:     return "clear";
        case Concept::HandEmpty: return "handempty";
        case Concept::Holding:   return "holding";
        case Concept::On:        return "on";
    }
    throw std::logic_error("bad concept");
}

inline Concept concept_from_name(const std::string& s) {
    for (Concept c : kAllConcepts)
        if (concept_name(c) == s) return c;
    throw std::invalid_argument("unknown concept name: " + s);
}

}  // namespace frr
