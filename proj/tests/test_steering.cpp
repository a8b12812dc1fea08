#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "frr/steering.hpp"

using namespace frr;
using namespace frr::steer;

TEST_CASE("steer_update") {
    Eigen::VectorXd h = Eigen::Vector3d(3, 0, 4);
    Eigen::VectorXd v = Eigen::Vector3d(0, 2, 0);

    SECTION("s = 1 is the identity") {
        CHECK(steer_update(h, v, 1.0).isApprox(h, 1e-15));
    }

    SECTION("s = 0 replaces the direction but keeps the norm") {
        Eigen::VectorXd out = steer_update(h, v, 0.0);
        CHECK(out.isApprox(Eigen::Vector3d(0, 5, 0), 1e-12));
    }

    SECTION("norm is preserved over random triples") {
        std::mt19937_64 rng(11);
        std::normal_distribution<double> g(0.0, 1.0);
        std::uniform_real_distribution<double> su(-0.5, 1.5);
        for (int trial = 0; trial < 2000; ++trial) {
            Eigen::VectorXd a(8), b(8);
            for (int i = 0; i < 8; ++i) { a[i] = g(rng); b[i] = g(rng); }
            double s = su(rng);
            Eigen::VectorXd out;
            try {
                out = steer_update(a, b, s);
            } catch (const DegenerateMix&) {
                continue;
            }
            CHECK(out.norm() == Catch::Approx(a.norm()).epsilon(1e-10));
        }
    }

    SECTION("antipodal mix throws DegenerateMix") {
        CHECK_THROWS_AS(steer_update(h, -h, 0.5), DegenerateMix);
    }
}

TEST_CASE("make_vectors") {
    ConceptVectors reps;
    reps[Concept::PickUp] = Eigen::Vector3d(3, 4, 0);
    reps[Concept::PutDown] = Eigen::Vector3d(0, 0, 7);
    reps[Concept::On] = Eigen::Vector3d(1, 1, 1);
    reps[Concept::Clear] = Eigen::Vector3d(2, 2, 2);

    SECTION("in-naming, cross-naming and negative pass the table through") {
        for (VectorKind k : {VectorKind::InNaming, VectorKind::CrossNaming, VectorKind::Negative}) {
            auto out = make_vectors(k, reps, 5);
            for (const auto& [c, v] : reps) CHECK(out.at(c) == v);
        }
    }

    SECTION("random vectors match norms per concept and are seed-deterministic") {
        auto a = make_vectors(VectorKind::RandomMatchedNorm, reps, 42);
        auto b = make_vectors(VectorKind::RandomMatchedNorm, reps, 42);
        auto c = make_vectors(VectorKind::RandomMatchedNorm, reps, 43);
        bool any_diff = false;
        for (const auto& [k, v] : reps) {
            CHECK(a.at(k).norm() == Catch::Approx(v.norm()).epsilon(1e-12));
            CHECK(a.at(k) == b.at(k));
            if (!a.at(k).isApprox(c.at(k), 1e-9)) any_diff = true;
            CHECK_FALSE(a.at(k).isApprox(v, 1e-6));  // direction actually replaced
        }
        CHECK(any_diff);
    }

    SECTION("shuffled tables are derangements within each concept class") {
        for (uint64_t seed = 0; seed < 50; ++seed) {
            auto out = shuffle_table(reps, seed);
            REQUIRE(out.size() == reps.size());
            for (const auto& [c, v] : out) {
                CHECK_FALSE(v == reps.at(c));  // no fixed point
                // the assigned value comes from the same class
                bool from_same_class = false;
                for (const auto& [c2, v2] : reps)
                    if (is_action(c2) == is_action(c) && v2 == v) from_same_class = true;
                CHECK(from_same_class);
            }
        }
        auto x = shuffle_table(reps, 9), y = shuffle_table(reps, 9);
        for (const auto& [c, v] : x) CHECK(y.at(c) == v);
    }
}

TEST_CASE("build_symbolic") {
    ConceptVectors cross;
    for (Concept c : kActionConcepts)
        cross[c] = Eigen::Vector2d(static_cast<double>(c == Concept::PickUp), 1.0);

    SECTION("s = 0 collapses every action onto the class mean") {
        auto out = build_symbolic(cross, 0.0);
        Eigen::VectorXd mean = Eigen::Vector2d(0.25, 1.0);
        for (Concept c : kActionConcepts) CHECK(out.at(c).isApprox(mean, 1e-12));
    }

    SECTION("linear in s") {
        auto a = build_symbolic(cross, 1.0);
        auto b = build_symbolic(cross, 2.0);
        auto half = build_symbolic(cross, 0.5);
        for (Concept c : kActionConcepts) {
            Eigen::VectorXd mean = a.at(c) - cross.at(c);
            CHECK(b.at(c).isApprox(mean + 2.0 * cross.at(c), 1e-12));
            CHECK(half.at(c).isApprox(mean + 0.5 * cross.at(c), 1e-12));
        }
    }

    SECTION("an incomplete class is rejected") {
        ConceptVectors partial = cross;
        partial.erase(Concept::Stack);
        CHECK_THROWS_AS(build_symbolic(partial, 1.0), IncompleteConceptSet);
        CHECK_THROWS_AS(build_symbolic({}, 1.0), IncompleteConceptSet);
    }

    SECTION("predicates and actions use separate means") {
        ConceptVectors both = cross;
        for (Concept c : kPredicateConcepts) both[c] = Eigen::Vector2d(10, 10);
        auto out = build_symbolic(both, 1.0);
        // predicate mean is (10, 10); action entries are unaffected by it
        CHECK(out.at(Concept::On).isApprox(Eigen::Vector2d(20, 20), 1e-12));
        CHECK(out.at(Concept::PutDown).isApprox(Eigen::Vector2d(0.25, 1.0) +
                                                cross.at(Concept::PutDown), 1e-12));
    }
}

namespace {

// Fixed per-site values, one token per prompt character: enough to observe
// exactly which (layer, pos) cells an intervention rewrites.
class ScriptedBackend : public Backend {
public:
    ScriptedBackend(int d, int layers, int ctx) : d_(d), layers_(layers), ctx_(ctx) {}

    int hidden_dim() const override { return d_; }
    int num_layers() const override { return layers_; }
    int context_limit() const override { return ctx_; }

    std::vector<std::string> tokenize(const std::string& text) const override {
        std::vector<std::string> out;
        for (char c : text) out.emplace_back(1, c);
        return out;
    }

    Eigen::VectorXf base_value(int layer, int pos) const {
        Eigen::VectorXf v(d_);
        for (int i = 0; i < d_; ++i)
            v[i] = static_cast<float>(layer * 100 + pos * 10 + i + 1);
        return v;
    }

    std::string generate(const std::string& prompt, int /*max_new*/,
                         const GenerationHooks* hooks) override {
        auto tokens = tokenize(prompt);
        const int n = static_cast<int>(tokens.size());
        if (hooks && hooks->begin_forward) hooks->begin_forward(tokens);
        final_cells.clear();
        for (int l = 1; l <= layers_; ++l) {
            for (int p = 0; p < n; ++p) {
                Eigen::VectorXf v = base_value(l, p);
                if (hooks && hooks->site) hooks->site(l, p, {v.data(), static_cast<size_t>(d_)});
                final_cells[{l, p}] = v;
            }
        }
        return prompt;
    }

    std::map<std::pair<int, int>, Eigen::VectorXf> final_cells;

private:
    int d_, layers_, ctx_;
};

SteeringSpec basic_spec(OpMode mode, std::vector<int> layers, int d) {
    SteeringSpec s;
    s.mode = mode;
    s.t_start = 0;
    s.t_end = 50;
    s.layers = std::move(layers);
    s.table[Concept::PickUp] = Eigen::VectorXd::Constant(d, 1.0);
    return s;
}

const std::map<Concept, std::string> kSurface{{Concept::PickUp, "ab"},
                                              {Concept::PutDown, "cd"}};

}  // namespace

TEST_CASE("run_intervention touches exactly the matched span on the chosen layers") {
    ScriptedBackend be(4, 3, 64);
    SteeringSpec spec = basic_spec(OpMode::Replace, {2}, 4);
    auto res = run_intervention(be, "xxabyy", spec, kSurface, 0);
    // "ab" occupies positions 2..3; the left-extension token is not rewritten
    CHECK(res.touches == std::vector<TouchSite>{{2, 2}, {2, 3}});
    Eigen::VectorXf want = spec.table[Concept::PickUp].cast<float>();
    CHECK(be.final_cells.at({2, 2}) == want);
    CHECK(be.final_cells.at({2, 3}) == want);
    // untouched neighbours keep base values
    CHECK(be.final_cells.at({2, 1}) == be.base_value(2, 1));
    CHECK(be.final_cells.at({1, 2}) == be.base_value(1, 2));
    CHECK(be.final_cells.at({3, 3}) == be.base_value(3, 3));
}

TEST_CASE("interpolation at a hook site preserves the hidden-state norm") {
    ScriptedBackend be(4, 3, 64);
    SteeringSpec spec = basic_spec(OpMode::Interpolate, {1}, 4);
    spec.scale = 2.0 / 3.0;
    auto res = apply_steering(be, "ab", spec, kSurface, 0);
    REQUIRE_FALSE(res.touches.empty());
    for (const auto& t : res.touches) {
        CHECK(be.final_cells.at({t.layer, t.pos}).norm() ==
              Catch::Approx(be.base_value(t.layer, t.pos).norm()).epsilon(1e-5));
        CHECK_FALSE(be.final_cells.at({t.layer, t.pos}) == be.base_value(t.layer, t.pos));
    }
}

TEST_CASE("token window clips the intervention") {
    ScriptedBackend be(4, 3, 64);
    SteeringSpec spec = basic_spec(OpMode::Replace, {1, 2, 3}, 4);

    SECTION("window starting past the sequence touches nothing, text unchanged") {
        spec.t_start = 40;
        auto res = run_intervention(be, "xxabyy", spec, kSurface, 0);
        CHECK(res.touches.empty());
        CHECK(res.text == "xxabyy");
    }

    SECTION("occurrences straddling t_end are skipped") {
        spec.t_start = 0;
        spec.t_end = 3;  // cuts "ab" at position 2..3
        auto res = run_intervention(be, "xxabyy", spec, kSurface, 0);
        CHECK(res.touches.empty());
    }

    SECTION("an in-window occurrence before an out-of-window one still fires") {
        spec.t_start = 0;
        spec.t_end = 4;
        auto res = run_intervention(be, "abxaby", spec, kSurface, 0);
        CHECK(res.touches == std::vector<TouchSite>{{1, 0}, {1, 1}, {2, 0}, {2, 1}, {3, 0}, {3, 1}});
    }
}

TEST_CASE("run_intervention validation errors") {
    ScriptedBackend be(4, 3, 64);
    SteeringSpec spec = basic_spec(OpMode::Replace, {1}, 4);

    SECTION("t_end beyond the backend context limit") {
        spec.t_end = 1000;
        CHECK_THROWS_AS(run_intervention(be, "ab", spec, kSurface, 0), WindowBeyondTrace);
    }
    SECTION("table concept without a surface word") {
        spec.table[Concept::Stack] = Eigen::VectorXd::Zero(4);
        CHECK_THROWS_AS(run_intervention(be, "ab", spec, kSurface, 0), MissingConcept);
    }
    SECTION("empty layer list") {
        spec.layers.clear();
        CHECK_THROWS_AS(run_intervention(be, "ab", spec, kSurface, 0), std::invalid_argument);
    }
    SECTION("dimension mismatch") {
        spec.table[Concept::PickUp] = Eigen::VectorXd::Zero(5);
        CHECK_THROWS_AS(run_intervention(be, "ab", spec, kSurface, 0), std::invalid_argument);
    }
    SECTION("steering requires a single layer") {
        spec.layers = {1, 2};
        CHECK_THROWS_AS(apply_steering(be, "ab", spec, kSurface, 0), std::invalid_argument);
    }
}

TEST_CASE("shuffled patching equals matched patching when class vectors coincide") {
    ScriptedBackend a(4, 3, 64), b(4, 3, 64);
    SteeringSpec spec = basic_spec(OpMode::Replace, {1, 2}, 4);
    spec.table[Concept::PutDown] = spec.table[Concept::PickUp];  // both all-ones
    auto matched = apply_patching(a, "abcd", spec, kSurface, 0, false);
    auto shuffled = apply_patching(b, "abcd", spec, kSurface, 0, true);
    CHECK(matched.touches == shuffled.touches);
    for (const auto& t : matched.touches)
        CHECK(a.final_cells.at({t.layer, t.pos}) == b.final_cells.at({t.layer, t.pos}));
}

TEST_CASE("subtraction removes exactly the table vector") {
    ScriptedBackend be(4, 3, 64);
    SteeringSpec spec = basic_spec(OpMode::Subtract, {2}, 4);
    spec.table[Concept::PutDown] = Eigen::VectorXd::Constant(4, 2.0);
    auto res = apply_negative(be, "abcd", spec, kSurface, 0, false);
    REQUIRE_FALSE(res.touches.empty());
    for (const auto& t : res.touches) {
        Eigen::VectorXf base = be.base_value(t.layer, t.pos);
        Eigen::VectorXf got = be.final_cells.at({t.layer, t.pos});
        Eigen::VectorXf delta = base - got;
        bool is_one = delta.isApprox(Eigen::VectorXf::Constant(4, 1.0f), 1e-6);
        bool is_two = delta.isApprox(Eigen::VectorXf::Constant(4, 2.0f), 1e-6);
        CHECK((is_one || is_two));
    }
}

TEST_CASE("zero subtraction table leaves every cell untouched in value") {
    ScriptedBackend be(4, 3, 64);
    SteeringSpec spec = basic_spec(OpMode::Subtract, {1, 2, 3}, 4);
    spec.table[Concept::PickUp] = Eigen::VectorXd::Zero(4);
    auto res = run_intervention(be, "xxabyy", spec, kSurface, 0);
    CHECK_FALSE(res.touches.empty());  // sites are visited, but values survive
    for (int l = 1; l <= 3; ++l)
        for (int p = 0; p < 6; ++p)
            CHECK(be.final_cells.at({l, p}) == be.base_value(l, p));
}

TEST_CASE("default op mode per vector kind") {
    CHECK(default_mode(VectorKind::InNaming) == OpMode::Interpolate);
    CHECK(default_mode(VectorKind::CrossNaming) == OpMode::Interpolate);
    CHECK(default_mode(VectorKind::RandomMatchedNorm) == OpMode::Interpolate);
    CHECK(default_mode(VectorKind::Shuffled) == OpMode::Interpolate);
    CHECK(default_mode(VectorKind::Symbolic) == OpMode::Replace);
    CHECK(default_mode(VectorKind::Negative) == OpMode::Subtract);
}

TEST_CASE("steering spec JSON round trip") {
    SteeringSpec s;
    s.kind = VectorKind::Shuffled;
    s.mode = OpMode::Replace;
    s.scale = 0.25;
    s.t_start = 10;
    s.t_end = 20;
    s.layers = {3, 4, 5};
    s.seed = 77;
    s.table[Concept::On] = Eigen::Vector3d(1, -2, 3);
    SteeringSpec r = spec_from_json(spec_to_json(s));
    CHECK(r.kind == s.kind);
    CHECK(r.mode == s.mode);
    CHECK(r.scale == s.scale);
    CHECK(r.t_start == s.t_start);
    CHECK(r.t_end == s.t_end);
    CHECK(r.layers == s.layers);
    CHECK(r.seed == s.seed);
    CHECK(r.table.at(Concept::On) == s.table.at(Concept::On));

    nlohmann::json j = spec_to_json(s);
    j.erase("mode");
    CHECK(spec_from_json(j).mode == OpMode::Interpolate);  // shuffled default
}
