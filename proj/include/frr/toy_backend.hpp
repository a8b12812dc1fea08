#pragma once

// A small seeded decoder-only transformer with byte-level vocabulary. Weights
// are fixed random draws; the point is a deterministic, hookable backend so
// every intervention path runs without an external model. Hidden states are
// exposed at the residual stream after each block.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "frr/steering.hpp"
#include "frr/trace.hpp"

namespace frr::toy {

struct ContextOverflow : std::runtime_error {
    explicit ContextOverflow(int n, int limit)
        : std::runtime_error("sequence length " + std::to_string(n) + " exceeds context limit " +
                             std::to_string(limit)) {}
};

struct ToyConfig {
    int vocab = 260;  // 256 bytes + BOS/EOS/PAD/UNK
    int layers = 8;
    int dim = 64;
    int heads = 4;
    int context = 4096;
    uint64_t seed = 0;

    void validate() const {
        if (vocab < 257 || layers < 1 || dim < 1 || heads < 1 || context < 1)
            throw std::invalid_argument("all toy dims must be >= 1 (vocab >= 257)");
        if (dim % heads != 0) throw std::invalid_argument("dim must be divisible by heads");
    }
};

inline constexpr int kBos = 256;

struct ForwardRecord {
    std::vector<Eigen::MatrixXf> layers;  // [layers+1] matrices of [n x dim]; index 0 = embeddings
    std::vector<std::string> tokens;
    std::vector<int32_t> token_ids;
};

inline trace::ActivationDump to_dump(const ForwardRecord& rec, const ToyConfig& cfg,
                                     const std::string& capture_point = "post-block residual") {
    trace::ActivationDump d;
    d.model_name = "toy-decoder-" + std::to_string(cfg.layers) + "x" + std::to_string(cfg.dim);
    d.num_layers = cfg.layers;
    d.hidden_dim = cfg.dim;
    d.capture_point = capture_point;
    d.tokens = rec.tokens;
    d.token_ids = rec.token_ids;
    for (size_t l = 0; l < rec.layers.size(); ++l) {
        const auto& m = rec.layers[l];
        std::vector<float> flat(static_cast<size_t>(m.rows()) * m.cols());
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                flat[static_cast<size_t>(r) * m.cols() + c] = m(r, c);
        d.layers.emplace(static_cast<int>(l), std::move(flat));
    }
    d.check_consistent();
    return d;
}

class ToyBackend final : public steer::Backend {
public:
    explicit ToyBackend(const ToyConfig& cfg) : cfg_(cfg) {
        cfg_.validate();
        std::mt19937_64 rng(cfg_.seed ^ 0x2545f4914f6cdd1dULL);
        std::normal_distribution<float> gauss(0.0f, 0.02f);
        auto fill = [&](Eigen::MatrixXf& m, int r, int c) {
            m.resize(r, c);
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < c; ++j) m(i, j) = gauss(rng);
        };
        fill(tok_emb_, cfg_.vocab, cfg_.dim);
        fill(pos_emb_, cfg_.context, cfg_.dim);
        blocks_.resize(cfg_.layers);
        for (auto& b : blocks_) {
            fill(b.wq, cfg_.dim, cfg_.dim);
            fill(b.wk, cfg_.dim, cfg_.dim);
            fill(b.wv, cfg_.dim, cfg_.dim);
            fill(b.wo, cfg_.dim, cfg_.dim);
            fill(b.w1, cfg_.dim, 4 * cfg_.dim);
            fill(b.b1, 1, 4 * cfg_.dim);
            fill(b.w2, 4 * cfg_.dim, cfg_.dim);
            fill(b.b2, 1, cfg_.dim);
        }
        fill(unemb_, cfg_.dim, cfg_.vocab);
    }

    const ToyConfig& config() const { return cfg_; }
    int hidden_dim() const override { return cfg_.dim; }
    int num_layers() const override { return cfg_.layers; }
    int context_limit() const override { return cfg_.context; }

    static std::string token_string(int id) {
        if (id < 256) return std::string(1, static_cast<char>(id));
        switch (id) {
            case kBos: return "<bos>";
            case 257:  return "<eos>";
            case 258:  return "<pad>";
            default:   return "<unk>";
        }
    }

    std::vector<int> encode(const std::string& text) const {
        std::vector<int> ids{kBos};
        for (unsigned char c : text) ids.push_back(c);
        return ids;
    }

    std::vector<std::string> tokenize(const std::string& text) const override {
        std::vector<std::string> toks;
        for (int id : encode(text)) toks.push_back(token_string(id));
        return toks;
    }

    // Full causal pass. Hooks, when present, fire once per (layer, position)
    // after each block; the replacement is used downstream and the record
    // captures post-hook states.
    std::pair<Eigen::VectorXf, ForwardRecord> forward(const std::vector<int>& ids,
                                                      const steer::GenerationHooks* hooks) const {
        const int n = static_cast<int>(ids.size());
        if (n > cfg_.context) throw ContextOverflow(n, cfg_.context);
        ForwardRecord rec;
        rec.token_ids.assign(ids.begin(), ids.end());
        for (int id : ids) rec.tokens.push_back(token_string(id));
        if (hooks && hooks->begin_forward) hooks->begin_forward(rec.tokens);

        Eigen::MatrixXf h(n, cfg_.dim);
        for (int i = 0; i < n; ++i)
            h.row(i) = tok_emb_.row(ids[i]) + pos_emb_.row(i);
        rec.layers.push_back(h);  // layer 0: embeddings

        const int hd = cfg_.dim / cfg_.heads;
        const float scale = 1.0f / std::sqrt(static_cast<float>(hd));
        for (int l = 0; l < cfg_.layers; ++l) {
            const auto& b = blocks_[l];
            Eigen::MatrixXf x = layer_norm(h);
            Eigen::MatrixXf q = x * b.wq, k = x * b.wk, v = x * b.wv;
            Eigen::MatrixXf attn(n, cfg_.dim);
            for (int head = 0; head < cfg_.heads; ++head) {
                auto qh = q.middleCols(head * hd, hd);
                auto kh = k.middleCols(head * hd, hd);
                auto vh = v.middleCols(head * hd, hd);
                for (int i = 0; i < n; ++i) {
                    Eigen::VectorXf scores(i + 1);
                    for (int j = 0; j <= i; ++j) scores[j] = qh.row(i).dot(kh.row(j)) * scale;
                    float mx = scores.maxCoeff();
                    Eigen::VectorXf w = (scores.array() - mx).exp();
                    w /= w.sum();
                    Eigen::RowVectorXf out = Eigen::RowVectorXf::Zero(hd);
                    for (int j = 0; j <= i; ++j) out += w[j] * vh.row(j);
                    attn.block(i, head * hd, 1, hd) = out;
                }
            }
            h += attn * b.wo;
            Eigen::MatrixXf y = layer_norm(h);
            Eigen::MatrixXf mid = (y * b.w1).rowwise() + b.b1.row(0);
            mid = mid.unaryExpr([](float t) { return 0.5f * t * (1.0f + std::tanh(0.79788456f * (t + 0.044715f * t * t * t))); });
            h += ((mid * b.w2).rowwise() + b.b2.row(0));
            if (hooks && hooks->site) {
                // layers are 1-indexed in the hook contract and the dump;
                // rows are copied out since MatrixXf is column-major
                for (int i = 0; i < n; ++i) {
                    Eigen::VectorXf tmp = h.row(i);
                    hooks->site(l + 1, i, {tmp.data(), static_cast<size_t>(cfg_.dim)});
                    h.row(i) = tmp;
                }
            }
            rec.layers.push_back(h);
        }
        Eigen::VectorXf last = layer_norm_row(h.row(n - 1));
        Eigen::VectorXf logits = unemb_.transpose() * last;
        return {logits, std::move(rec)};
    }

    // Greedy decoding over byte outputs; deterministic, lowest id wins ties.
    std::pair<std::string, ForwardRecord> generate_greedy(const std::string& prompt, int max_new,
                                                          const steer::GenerationHooks* hooks) const {
        std::vector<int> ids = encode(prompt);
        std::string out;
        ForwardRecord rec;
        if (max_new == 0) {
            auto [logits, r] = forward(ids, hooks);
            return {out, std::move(r)};
        }
        for (int step = 0; step < max_new; ++step) {
            auto [logits, r] = forward(ids, hooks);
            rec = std::move(r);
            int best = 0;
            float bv = logits[0];
            for (int i = 1; i < 256; ++i)
                if (logits[i] > bv) { bv = logits[i]; best = i; }
            ids.push_back(best);
            out += static_cast<char>(best);
        }
        // final record covers the full sequence including the last token
        auto [logits, r] = forward(ids, hooks);
        rec = std::move(r);
        return {out, std::move(rec)};
    }

    std::string generate(const std::string& prompt, int max_new,
                         const steer::GenerationHooks* hooks) override {
        return generate_greedy(prompt, max_new, hooks).first;
    }

private:
    struct Block {
        Eigen::MatrixXf wq, wk, wv, wo, w1, b1, w2, b2;
    };

    static Eigen::MatrixXf layer_norm(const Eigen::MatrixXf& x) {
        Eigen::MatrixXf out(x.rows(), x.cols());
        for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) = layer_norm_row(x.row(i));
        return out;
    }
    static Eigen::VectorXf layer_norm_row(const Eigen::RowVectorXf& r) {
        float mean = r.mean();
        Eigen::RowVectorXf c = r.array() - mean;
        float var = c.squaredNorm() / static_cast<float>(r.size());
        return (c / std::sqrt(var + 1e-5f)).transpose();
    }

    ToyConfig cfg_;
    Eigen::MatrixXf tok_emb_, pos_emb_, unemb_;
    std::vector<Block> blocks_;
};

}  // namespace frr::toy
