#pragma once

// Intervention engine: norm-preserving positive steering, symbolic patching,
// negative steering and their controls, applied through a backend-agnostic
// hook contract.

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "frr/concepts.hpp"
#include "frr/trace.hpp"

namespace frr::steer {

struct DegenerateMix : std::runtime_error {
    DegenerateMix() : std::runtime_error("steer_update produced the zero vector") {}
};
struct MissingConcept : std::runtime_error {
    explicit MissingConcept(const std::string& why)
        : std::runtime_error("missing concept: " + why) {}
};
struct IncompleteConceptSet : std::runtime_error {
    explicit IncompleteConceptSet(const std::string& why)
        : std::runtime_error("incomplete concept set: " + why) {}
};
struct WindowBeyondTrace : std::runtime_error {
    explicit WindowBeyondTrace(const std::string& why)
        : std::runtime_error("window beyond trace: " + why) {}
};

enum class VectorKind { InNaming, CrossNaming, RandomMatchedNorm, Symbolic, Shuffled, Negative };
enum class OpMode { Interpolate, Replace, Subtract };

inline OpMode default_mode(VectorKind k) {
    switch (k) {
        case VectorKind::Symbolic: return OpMode::Replace;
        case VectorKind::Negative: return OpMode::Subtract;
        default: return OpMode::Interpolate;
    }
}

using ConceptVectors = std::map<Concept, Eigen::VectorXd>;

struct SteeringSpec {
    VectorKind kind = VectorKind::InNaming;
    OpMode mode = OpMode::Interpolate;
    double scale = 2.0 / 3.0;        // Appendix default
    int t_start = 1500, t_end = 2500;  // Appendix default window
    std::vector<int> layers;         // single layer for steering, range for patching
    ConceptVectors table;            // concept -> vector
    uint64_t seed = 0;               // random / shuffled kinds

    void validate(int hidden_dim) const {
        if (t_start < 0 || t_start >= t_end) throw std::invalid_argument("bad token window");
        if (layers.empty()) throw std::invalid_argument("layers empty");
        for (const auto& [c, v] : table)
            if (v.size() != hidden_dim)
                throw std::invalid_argument("vector dim mismatch for " + concept_name(c));
    }
};

// Eq. 4-5: interpolate toward v, then rescale to the original norm.
inline Eigen::VectorXd steer_update(const Eigen::VectorXd& h, const Eigen::VectorXd& v,
                                    double s) {
    Eigen::VectorXd mixed = s * h + (1.0 - s) * v;
    double nm = mixed.norm();
    if (nm == 0.0) throw DegenerateMix();
    return mixed * (h.norm() / nm);
}

namespace detail {

// Seeded derangement of `keys` (no fixed points).
template <typename K>
std::map<K, K> derangement(std::vector<K> keys, std::mt19937_64& rng) {
    if (keys.size() < 2) throw IncompleteConceptSet("derangement needs >= 2 elements");
    std::vector<K> perm = keys;
    for (;;) {
        for (size_t i = perm.size() - 1; i > 0; --i)
            std::swap(perm[i], perm[rng() % (i + 1)]);
        bool fixed = false;
        for (size_t i = 0; i < perm.size(); ++i)
            if (perm[i] == keys[i]) { fixed = true; break; }
        if (!fixed) break;
    }
    std::map<K, K> out;
    for (size_t i = 0; i < keys.size(); ++i) out[keys[i]] = perm[i];
    return out;
}

}  // namespace detail

// One consistent permutation (a derangement, separately within actions and
// within predicates) of a concept->vector table.
inline ConceptVectors shuffle_table(const ConceptVectors& table, uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0xda3e39cb94b95bdbULL);
    std::vector<Concept> actions, preds;
    for (const auto& [c, v] : table) (is_action(c) ? actions : preds).push_back(c);
    ConceptVectors out;
    for (auto* group : {&actions, &preds}) {
        if (group->empty()) continue;
        auto perm = detail::derangement(*group, rng);
        for (const auto& [from, to] : perm) out[from] = table.at(to);
    }
    return out;
}

// Builds the concept->vector table for a steering condition. For in-naming /
// cross-naming the centered representations pass through; random draws
// seeded Gaussians rescaled per concept to the reference norms; shuffled
// applies a consistent derangement.
inline ConceptVectors make_vectors(VectorKind kind, const ConceptVectors& reps, uint64_t seed) {
    switch (kind) {
        case VectorKind::InNaming:
        case VectorKind::CrossNaming:
        case VectorKind::Negative:
            return reps;
        case VectorKind::Shuffled:
            return shuffle_table(reps, seed);
        case VectorKind::RandomMatchedNorm: {
            std::mt19937_64 rng(seed ^ 0xa0761d6478bd642fULL);
            std::normal_distribution<double> gauss(0.0, 1.0);
            ConceptVectors out;
            for (const auto& [c, v] : reps) {
                Eigen::VectorXd g(v.size());
                for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = gauss(rng);
                double gn = g.norm();
                if (gn == 0.0) gn = 1.0;
                out[c] = g * (v.norm() / gn);
            }
            return out;
        }
        case VectorKind::Symbolic:
            throw std::invalid_argument("use build_symbolic for symbolic tables");
    }
    throw std::logic_error("bad vector kind");
}

// Eq. 6: r_symbolic[a] = class mean + s * centered cross-naming rep, with the
// mean taken over actions and predicates separately. Requires the complete
// concept class whenever any member of the class is present.
inline ConceptVectors build_symbolic(const ConceptVectors& cross, double s) {
    if (cross.empty()) throw IncompleteConceptSet("empty cross-naming table");
    Eigen::Index d = cross.begin()->second.size();
    auto class_mean = [&](bool actions) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
        int n = 0;
        for (const auto& [c, v] : cross) {
            if (is_action(c) != actions) continue;
            mean += v;
            ++n;
        }
        if (n) mean /= n;
        return mean;
    };
    bool has_actions = false, has_preds = false;
    for (const auto& [c, v] : cross) (is_action(c) ? has_actions : has_preds) = true;
    if (has_actions)
        for (Concept c : kActionConcepts)
            if (!cross.count(c)) throw IncompleteConceptSet(concept_name(c));
    if (has_preds)
        for (Concept c : kPredicateConcepts)
            if (!cross.count(c)) throw IncompleteConceptSet(concept_name(c));
    Eigen::VectorXd amean = class_mean(true), pmean = class_mean(false);
    ConceptVectors out;
    for (const auto& [c, v] : cross) out[c] = (is_action(c) ? amean : pmean) + s * v;
    return out;
}

// ---- hook contract ----

struct TouchSite {
    int layer;
    int pos;
    auto operator<=>(const TouchSite&) const = default;
};

// The backend calls begin_forward with the full current token list before
// each pass, then site(layer, pos, h) for every (layer, position) in scope;
// the callback may rewrite h in place.
struct GenerationHooks {
    std::function<void(const std::vector<std::string>& tokens)> begin_forward;
    std::function<void(int layer, int pos, std::span<float> h)> site;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual int hidden_dim() const = 0;
    virtual int num_layers() const = 0;
    virtual int context_limit() const = 0;
    virtual std::vector<std::string> tokenize(const std::string& text) const = 0;
    // Greedy generation; hooks may be null.
    virtual std::string generate(const std::string& prompt, int max_new,
                                 const GenerationHooks* hooks) = 0;
};

struct InterventionResult {
    std::string text;
    std::vector<TouchSite> touches;  // unique modified sites, sorted
};

namespace detail {

struct SessionState {
    std::vector<int> pos_to_concept;  // -1 = untouched; else index into concept order
    std::vector<Concept> order;
};

}  // namespace detail

// Runs one intervention session: matches concept occurrences inside the token
// window (rematched each forward pass as generation extends the sequence) and
// applies the spec's operation at every matched site on the spec's layers.
inline InterventionResult run_intervention(Backend& backend, const std::string& prefix,
                                           const SteeringSpec& spec,
                                           const std::map<Concept, std::string>& surface,
                                           int max_new) {
    spec.validate(backend.hidden_dim());
    if (spec.t_end > backend.context_limit())
        throw WindowBeyondTrace("t_end " + std::to_string(spec.t_end) + " > context limit");
    for (const auto& [c, v] : spec.table)
        if (!surface.count(c)) throw MissingConcept(concept_name(c));

    std::set<int> layer_set(spec.layers.begin(), spec.layers.end());
    detail::SessionState st;
    for (const auto& [c, v] : spec.table) st.order.push_back(c);
    std::set<TouchSite> touched;

    GenerationHooks hooks;
    hooks.begin_forward = [&](const std::vector<std::string>& tokens) {
        const int n = static_cast<int>(tokens.size());
        st.pos_to_concept.assign(n, -1);
        int lo = spec.t_start, hi = std::min(spec.t_end, n);
        if (lo >= hi) return;
        for (size_t ci = 0; ci < st.order.size(); ++ci) {
            const std::string& word = surface.at(st.order[ci]);
            for (const auto& m : trace::match_concept(tokens, word, lo, hi))
                for (int p = m.span_begin; p < m.span_end; ++p)
                    st.pos_to_concept[p] = static_cast<int>(ci);
        }
    };
    hooks.site = [&](int layer, int pos, std::span<float> h) {
        if (!layer_set.count(layer)) return;
        if (pos >= static_cast<int>(st.pos_to_concept.size())) return;
        int ci = st.pos_to_concept[pos];
        if (ci < 0) return;
        const Eigen::VectorXd& v = spec.table.at(st.order[ci]);
        Eigen::VectorXd hv(h.size());
        for (size_t i = 0; i < h.size(); ++i) hv[i] = h[i];
        Eigen::VectorXd out;
        switch (spec.mode) {
            case OpMode::Interpolate: out = steer_update(hv, v, spec.scale); break;
            case OpMode::Replace:     out = v; break;
            case OpMode::Subtract:    out = hv - v; break;
        }
        for (size_t i = 0; i < h.size(); ++i) h[i] = static_cast<float>(out[i]);
        touched.insert({layer, pos});
    };

    InterventionResult res;
    res.text = backend.generate(prefix, max_new, &hooks);
    res.touches.assign(touched.begin(), touched.end());
    return res;
}

// §4.1 positive steering: norm-preserving interpolation at a single layer.
inline InterventionResult apply_steering(Backend& backend, const std::string& prefix,
                                         const SteeringSpec& spec,
                                         const std::map<Concept, std::string>& surface,
                                         int max_new) {
    if (spec.layers.size() != 1) throw std::invalid_argument("steering uses a single layer");
    SteeringSpec s = spec;
    s.mode = OpMode::Interpolate;
    return run_intervention(backend, prefix, s, surface, max_new);
}

// §4.2 symbolic patching: full replacement across a contiguous layer range;
// control mode swaps in a deranged table with everything else identical.
inline InterventionResult apply_patching(Backend& backend, const std::string& prefix,
                                         SteeringSpec spec,
                                         const std::map<Concept, std::string>& surface,
                                         int max_new, bool shuffled_control) {
    spec.mode = OpMode::Replace;
    if (shuffled_control) spec.table = shuffle_table(spec.table, spec.seed);
    return run_intervention(backend, prefix, spec, surface, max_new);
}

// §4.3 negative steering: subtract converged centered representations.
inline InterventionResult apply_negative(Backend& backend, const std::string& prefix,
                                         SteeringSpec spec,
                                         const std::map<Concept, std::string>& surface,
                                         int max_new, bool shuffled_control) {
    spec.mode = OpMode::Subtract;
    if (shuffled_control) spec.table = shuffle_table(spec.table, spec.seed);
    return run_intervention(backend, prefix, spec, surface, max_new);
}

// ---- JSON forms ----

inline std::string vector_kind_name(VectorKind k) {
    switch (k) {
        case VectorKind::InNaming:          return "in-naming";
        case VectorKind::CrossNaming:       return "cross-naming";
        case VectorKind::RandomMatchedNorm: return "random-matched-norm";
        case VectorKind::Symbolic:          return "symbolic";
        case VectorKind::Shuffled:          return "shuffled";
        case VectorKind::Negative:          return "negative";
    }
    throw std::logic_error("bad kind");
}

inline VectorKind vector_kind_from_name(const std::string& s) {
    for (VectorKind k : {VectorKind::InNaming, VectorKind::CrossNaming,
                         VectorKind::RandomMatchedNorm, VectorKind::Symbolic,
                         VectorKind::Shuffled, VectorKind::Negative})
        if (vector_kind_name(k) == s) return k;
    throw std::invalid_argument("unknown vector kind: " + s);
}

inline nlohmann::json spec_to_json(const SteeringSpec& s) {
    nlohmann::json table;
    for (const auto& [c, v] : s.table) {
        std::vector<double> vals(v.data(), v.data() + v.size());
        table[concept_name(c)] = vals;
    }
    const char* mode = s.mode == OpMode::Interpolate ? "interpolate"
                     : s.mode == OpMode::Replace     ? "replace"
                                                     : "subtract";
    return {{"kind", vector_kind_name(s.kind)}, {"mode", mode},    {"scale", s.scale},
            {"t_start", s.t_start},             {"t_end", s.t_end}, {"layers", s.layers},
            {"seed", s.seed},                   {"table", table}};
}

inline SteeringSpec spec_from_json(const nlohmann::json& j) {
    SteeringSpec s;
    s.kind = vector_kind_from_name(j.at("kind").get<std::string>());
    std::string mode = j.value("mode", "");
    s.mode = mode.empty()          ? default_mode(s.kind)
             : mode == "interpolate" ? OpMode::Interpolate
             : mode == "replace"     ? OpMode::Replace
                                     : OpMode::Subtract;
    s.scale = j.value("scale", 2.0 / 3.0);
    s.t_start = j.at("t_start").get<int>();
    s.t_end = j.at("t_end").get<int>();
    s.layers = j.at("layers").get<std::vector<int>>();
    s.seed = j.value("seed", 0ULL);
    if (j.contains("table"))
        for (const auto& [name, vals] : j.at("table").items()) {
            auto v = vals.get<std::vector<double>>();
            s.table[concept_from_name(name)] =
                Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        }
    return s;
}

}  // namespace frr::steer
