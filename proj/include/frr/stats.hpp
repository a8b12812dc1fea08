#pragma once

// One-sample, one-tailed t-tests over per-naming accuracy deltas, with a
// Student-t CDF built on the regularized incomplete beta function.

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace frr::stats {

struct TooFewSamples : std::runtime_error {
    TooFewSamples() : std::runtime_error("need at least 2 samples") {}
};
struct ZeroVariance : std::runtime_error {
    ZeroVariance() : std::runtime_error("all deltas identical (zero variance)") {}
};
struct KeyMismatch : std::runtime_error {
    explicit KeyMismatch(const std::string& why) : std::runtime_error("key mismatch: " + why) {}
};

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double betacf(double a, double b, double x) {
    constexpr double eps = 1e-15, tiny = 1e-300;
    constexpr int max_iter = 500;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double reg_incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("beta parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::betacf(a, b, x) / a;
    return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

// Student-t CDF. Absolute error well under 1e-8 for moderate df.
inline double t_cdf(int df, double t) {
    if (df < 1) throw std::invalid_argument("df must be >= 1");
    if (t == 0.0) return 0.5;
    double x = df / (df + t * t);
    double tail = 0.5 * reg_incomplete_beta(0.5 * df, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

struct DeltaSample {
    std::vector<double> values;  // per-naming accuracy improvements
};

struct TestResult {
    double mean;
    double se;
    double t;
    double p;  // one-tailed, H1: mean > 0
    int df;
};

inline TestResult one_sample_t(const DeltaSample& sample) {
    const int n = static_cast<int>(sample.values.size());
    if (n < 2) throw TooFewSamples();
    double mean = 0.0;
    for (double v : sample.values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : sample.values) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / (n - 1));
    if (sd == 0.0) throw ZeroVariance();
    double se = sd / std::sqrt(static_cast<double>(n));
    double t = mean / se;
    return {mean, se, t, 1.0 - t_cdf(n - 1, t), n - 1};
}

// Per-naming deltas: steered accuracy minus baseline accuracy.
inline DeltaSample summarize(const std::map<int, double>& baseline,
                             const std::map<int, double>& steered) {
    if (baseline.size() != steered.size()) throw KeyMismatch("condition sizes differ");
    DeltaSample out;
    for (const auto& [naming, acc] : steered) {
        auto it = baseline.find(naming);
        if (it == baseline.end()) throw KeyMismatch("naming " + std::to_string(naming));
        out.values.push_back(acc - it->second);
    }
    return out;
}

inline std::string significance_stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "ns";
}

}  // namespace frr::stats
