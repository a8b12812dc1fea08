#pragma once

// Representation extraction and geometry: window-averaged concept vectors,
// per-naming centering, cross-naming averaging, similarity curves and PCA.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "frr/concepts.hpp"
#include "frr/naming.hpp"
#include "frr/trace.hpp"

namespace frr::rep {

struct NoOccurrences : std::runtime_error {
    explicit NoOccurrences(const std::string& word)
        : std::runtime_error("no occurrences of \"" + word + "\" in batch window") {}
};
struct IncompleteConceptSet : std::runtime_error {
    explicit IncompleteConceptSet(const std::string& why)
        : std::runtime_error("incomplete concept set: " + why) {}
};
struct EmptySet : std::runtime_error {
    explicit EmptySet(const std::string& why) : std::runtime_error("empty set: " + why) {}
};
struct ZeroVector : std::runtime_error {
    ZeroVector() : std::runtime_error("cosine of zero vector") {}
};
struct DegenerateInput : std::runtime_error {
    explicit DegenerateInput(const std::string& why)
        : std::runtime_error("degenerate input: " + why) {}
};

// Appendix presets: the paper's body uses w=100, its hyperparameter appendix
// lists 200. Both are shipped; neither is canonical.
inline constexpr int kDefaultWindow = 100;
inline constexpr int kAppendixWindow = 200;
inline constexpr int kDefaultStride = 200;

struct ExtractionSpec {
    int layer = 1;
    int timestamp = 0;      // T, token position
    int window = kDefaultWindow;  // w

    void validate() const {
        if (window < 1) throw trace::OutOfRange("window must be >= 1");
        if (timestamp < window) throw trace::OutOfRange("timestamp must be >= window");
    }
};

enum class RepKind { Raw, Centered, CrossNaming, Symbolic };

struct ConceptRepresentation {
    Concept concept_;
    Eigen::VectorXd vec;
    RepKind kind = RepKind::Raw;
    int naming_id = -1;  // -1 for cross-naming
    ExtractionSpec spec;
    int num_sequences = 0;  // |S|
};

using Batch = std::vector<const trace::ActivationDump*>;

// Eq. 1: mean over matched sequences of per-sequence means of hidden states.
// Sequences are pooled across the whole batch (inner mean per sequence, outer
// mean over the pooled set).
inline ConceptRepresentation extract(const Batch& batch, const ExtractionSpec& spec,
                                     Concept a, const std::string& surface_word) {
    spec.validate();
    auto [lo, hi] = trace::window_of(spec.timestamp, spec.window);
    Eigen::VectorXd sum;
    int n_sequences = 0;
    for (const auto* dump : batch) {
        if (spec.layer < 0 || spec.layer > dump->num_layers || !dump->layers.count(spec.layer))
            throw trace::OutOfRange("layer " + std::to_string(spec.layer) + " not in dump");
        if (hi > dump->num_tokens()) continue;  // window beyond this trace
        for (const auto& m : trace::match_concept(*dump, surface_word, lo, hi)) {
            Eigen::VectorXd inner = Eigen::VectorXd::Zero(dump->hidden_dim);
            for (int p : m.positions) {
                auto row = dump->row(spec.layer, p);
                for (int k = 0; k < dump->hidden_dim; ++k) inner[k] += row[k];
            }
            inner /= static_cast<double>(m.positions.size());
            if (sum.size() == 0) sum = Eigen::VectorXd::Zero(inner.size());
            if (inner.size() != sum.size()) throw trace::ShapeMismatch("hidden dim across batch");
            sum += inner;
            ++n_sequences;
        }
    }
    if (n_sequences == 0) throw NoOccurrences(surface_word);
    ConceptRepresentation out;
    out.concept_ = a;
    out.vec = sum / static_cast<double>(n_sequences);
    out.kind = RepKind::Raw;
    out.spec = spec;
    out.num_sequences = n_sequences;
    return out;
}

using ConceptVectors = std::map<Concept, Eigen::VectorXd>;

// Eq. 2: subtract the unweighted concept-set mean. Actions and predicates are
// always centered within their own sets, never mixed.
inline ConceptVectors center(const ConceptVectors& reps) {
    if (reps.empty()) throw IncompleteConceptSet("no concepts");
    Eigen::Index d = reps.begin()->second.size();
    for (const auto& [c, v] : reps)
        if (v.size() != d) throw IncompleteConceptSet("dimension mismatch");
    Eigen::VectorXd action_mean = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd pred_mean = Eigen::VectorXd::Zero(d);
    int n_actions = 0, n_preds = 0;
    for (const auto& [c, v] : reps) {
        if (is_action(c)) {
            action_mean += v;
            ++n_actions;
        } else {
            pred_mean += v;
            ++n_preds;
        }
    }
    if (n_actions) action_mean /= n_actions;
    if (n_preds) pred_mean /= n_preds;
    ConceptVectors out;
    for (const auto& [c, v] : reps) out[c] = v - (is_action(c) ? action_mean : pred_mean);
    return out;
}

// Eq. 3: unweighted mean of centered in-naming representations over namings.
inline Eigen::VectorXd cross_naming_average(const std::map<int, Eigen::VectorXd>& by_naming) {
    if (by_naming.empty()) throw EmptySet("naming set");
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(by_naming.begin()->second.size());
    for (const auto& [n, v] : by_naming) {
        if (v.size() != sum.size()) throw IncompleteConceptSet("dimension mismatch");
        sum += v;
    }
    return sum / static_cast<double>(by_naming.size());
}

inline double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    double nu = u.norm(), nv = v.norm();
    if (nu == 0.0 || nv == 0.0) throw ZeroVector();
    double c = u.dot(v) / (nu * nv);
    return std::clamp(c, -1.0, 1.0);
}

// Extracts and centers the full concept table of one naming at (layer, T).
// Returns nullopt when any requested concept has no occurrences (the
// timestamp is skipped, not zero-filled).
inline std::optional<ConceptVectors> extract_centered_table(
    const Batch& batch, const ExtractionSpec& spec, const obf::Naming& naming,
    const std::vector<Concept>& concepts) {
    ConceptVectors raw;
    for (Concept c : concepts) {
        try {
            raw[c] = extract(batch, spec, c, naming.word(c)).vec;
        } catch (const NoOccurrences&) {
            return std::nullopt;
        }
    }
    return center(raw);
}

struct CurvePoint {
    int timestamp;
    Concept concept_;
    double same_sim;   // mean cosine with the corresponding reference concept
    double cross_sim;  // mean cosine with the other reference concepts
    int n_namings;     // namings contributing at this timestamp
};

// Convergence curves: at every multiple of `stride`, extract + center per
// naming, compare against a fixed reference table, and average over namings.
inline std::vector<CurvePoint> convergence_curve(
    const std::map<int, Batch>& batches_by_naming, const std::map<int, obf::Naming>& namings,
    const ConceptVectors& reference, int layer, int stride, int window) {
    if (stride < 1) throw trace::OutOfRange("stride must be >= 1");
    std::vector<Concept> concepts;
    for (const auto& [c, v] : reference) concepts.push_back(c);
    int max_tokens = 0;
    for (const auto& [nid, batch] : batches_by_naming)
        for (const auto* d : batch) max_tokens = std::max(max_tokens, d->num_tokens());

    std::vector<CurvePoint> out;
    for (int T = std::max(stride, window); T <= max_tokens; T += stride) {
        if (T < window) continue;
        std::map<Concept, std::pair<double, double>> sums;  // concept -> (same, cross)
        int contributing = 0;
        for (const auto& [nid, batch] : batches_by_naming) {
            ExtractionSpec spec{layer, T, window};
            auto table = extract_centered_table(batch, spec, namings.at(nid), concepts);
            if (!table) continue;
            ++contributing;
            for (Concept c : concepts) {
                double same = cosine((*table)[c], reference.at(c));
                double cross = 0.0;
                int n_cross = 0;
                for (Concept c2 : concepts) {
                    if (c2 == c || is_action(c2) != is_action(c)) continue;
                    cross += cosine((*table)[c], reference.at(c2));
                    ++n_cross;
                }
                auto& s = sums[c];
                s.first += same;
                s.second += n_cross ? cross / n_cross : 0.0;
            }
        }
        if (!contributing) continue;
        for (Concept c : concepts)
            out.push_back({T, c, sums[c].first / contributing, sums[c].second / contributing,
                           contributing});
    }
    return out;
}

struct PcaResult {
    Eigen::MatrixXd components;   // k x d, orthonormal rows
    Eigen::MatrixXd coordinates;  // n x k, projections of the centered points
    Eigen::VectorXd ratios;       // k explained-variance ratios, nonincreasing
    Eigen::VectorXd mean;         // d
};

// Mean-centered PCA via eigen-decomposition of the sample covariance.
// Component signs are fixed by making each component's largest-magnitude
// entry positive.
inline PcaResult pca_project(const std::vector<Eigen::VectorXd>& points, int k) {
    const int n = static_cast<int>(points.size());
    if (n < 2) throw DegenerateInput("need at least 2 points");
    const Eigen::Index d = points[0].size();
    if (k < 1 || k > std::min<Eigen::Index>(n - 1, d))
        throw trace::OutOfRange("k must be in [1, min(n-1, d)]");
    Eigen::MatrixXd X(n, d);
    for (int i = 0; i < n; ++i) {
        if (points[i].size() != d) throw IncompleteConceptSet("dimension mismatch");
        X.row(i) = points[i];
    }
    Eigen::VectorXd mean = X.colwise().mean();
    X.rowwise() -= mean.transpose();
    double total_var = X.squaredNorm() / (n - 1);
    if (total_var == 0.0) throw DegenerateInput("all points identical");
    Eigen::MatrixXd cov = X.transpose() * X / (n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");

    PcaResult out;
    out.components.resize(k, d);
    out.ratios.resize(k);
    out.mean = mean;
    for (int i = 0; i < k; ++i) {
        // eigenvalues come in ascending order
        Eigen::Index src = d - 1 - i;
        Eigen::VectorXd comp = es.eigenvectors().col(src);
        Eigen::Index arg;
        comp.cwiseAbs().maxCoeff(&arg);
        if (comp[arg] < 0) comp = -comp;
        out.components.row(i) = comp.transpose();
        out.ratios[i] = std::max(0.0, es.eigenvalues()[src]) / total_var;
    }
    out.coordinates = X * out.components.transpose();
    return out;
}

}  // namespace frr::rep
