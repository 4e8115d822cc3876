#include "tedlearn/gesl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "tedlearn/util.hpp"

namespace tedlearn {

PairSet select_pairs(const Dataset& dataset, const Eigen::MatrixXd& dist) {
    const int n = static_cast<int>(dataset.size());
    if (dist.rows() != n || dist.cols() != n)
        throw std::invalid_argument("select_pairs: distance matrix shape mismatch");
    const auto ids = dataset.class_ids();
    if (dataset.class_names().size() < 2)
        throw std::invalid_argument("select_pairs: need at least two classes");

    PairSet pairs;
    for (int i = 0; i < n; ++i) {
        int best_pos = -1, best_neg = -1;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            if (ids[j] == ids[i]) {
                if (best_pos < 0 || dist(i, j) < dist(i, best_pos)) best_pos = j;
            } else {
                if (best_neg < 0 || dist(i, j) > dist(i, best_neg)) best_neg = j;
            }
        }
        if (best_pos < 0)
            throw std::invalid_argument("select_pairs: record " + std::to_string(i) +
                                        " has no same-class partner (singleton class)");
        pairs.positives.emplace_back(i, best_pos);
        pairs.negatives.emplace_back(i, best_neg);
    }
    return pairs;
}

namespace {

ScriptSummary pair_summary(const Tree& x, const Tree& y, const CostTable& c0,
                           GeslConfig::ScriptMode mode) {
    if (mode == GeslConfig::ScriptMode::AllCooptimal) return summarize_cooptimal(x, y, c0);
    EditScript script = backtrace_one(ted_dp(x, y, c0));
    return ScriptSummary{x.alphabet(), script_key_counts(script, x.alphabet())};
}

}  // namespace

PairSummaries reference_summaries(const Dataset& dataset, const PairSet& pairs,
                                  const CostTable& c0, GeslConfig::ScriptMode mode) {
    PairSummaries out;
    out.positives.resize(pairs.positives.size(), ScriptSummary{dataset.alphabet, {}});
    out.negatives.resize(pairs.negatives.size(), ScriptSummary{dataset.alphabet, {}});
    const std::size_t np = pairs.positives.size();
    parallel_for(np + pairs.negatives.size(), [&](std::size_t w) {
        const bool positive = w < np;
        auto [i, j] = positive ? pairs.positives[w] : pairs.negatives[w - np];
        auto& slot = positive ? out.positives[w] : out.negatives[w - np];
        slot = pair_summary(dataset.trees[i], dataset.trees[j], c0, mode);
    });
    return out;
}

double pseudo_distance(const ScriptSummary& summary, const CostTable& c) {
    return (summary.counts.array() * c.entries().array()).sum();
}

double gesl_loss(const std::vector<double>& positive_distances,
                 const std::vector<double>& negative_distances, const CostTable& c, double eta,
                 double beta, double gamma) {
    double total = beta * c.squared_norm();
    for (double d : positive_distances) total += hinge(d - eta);
    for (double d : negative_distances) total += hinge(gamma + eta - d);
    return total;
}

namespace {

struct SparseSummary {
    std::vector<std::tuple<int, int, double>> entries;

    explicit SparseSummary(const Eigen::MatrixXd& counts) {
        for (int r = 0; r < counts.rows(); ++r)
            for (int col = 0; col < counts.cols(); ++col)
                if (counts(r, col) != 0.0) entries.emplace_back(r, col, counts(r, col));
    }
    double dot(const Eigen::MatrixXd& m) const {
        double total = 0.0;
        for (auto [r, col, w] : entries) total += w * m(r, col);
        return total;
    }
    void add_to(Eigen::MatrixXd& m, double factor) const {
        for (auto [r, col, w] : entries) m(r, col) += factor * w;
    }
};

void project_metric_inplace(Eigen::MatrixXd& m) {
    m = m.cwiseMax(0.0).eval();
    m.diagonal().setZero();
    m = ((m + m.transpose()) / 2.0).eval();
    const int n = static_cast<int>(m.rows());
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = std::min(m(i, j), m(i, k) + m(k, j));
}

}  // namespace

GeslResult gesl_fit(const Dataset& dataset, const PairSet& pairs, const CostTable& c0,
                    const GeslConfig& config) {
    if (config.beta <= 0.0) throw std::invalid_argument("gesl_fit: beta must be > 0");
    if (config.margin_gamma <= 0.0) throw std::invalid_argument("gesl_fit: gamma must be > 0");
    if (!check_pseudometric(c0).is_pseudometric())
        throw std::invalid_argument("gesl_fit: the reference cost c0 must be a pseudo-metric");

    const PairSummaries summaries =
        reference_summaries(dataset, pairs, c0, config.script_mode);
    std::vector<SparseSummary> pos, neg;
    for (const auto& s : summaries.positives) pos.emplace_back(s.counts);
    for (const auto& s : summaries.negatives) neg.emplace_back(s.counts);

    const double beta = config.beta;
    const double gamma = config.margin_gamma;
    const double mu = 2.0 * beta;  // strong convexity of the regularizer

    Eigen::MatrixXd m = c0.entries();
    double eta = 0.0;
    Eigen::MatrixXd g(m.rows(), m.cols());

    Eigen::MatrixXd best_m = m;
    double best_eta = eta;
    double best_loss = std::numeric_limits<double>::infinity();

    std::vector<double> trace;
    const long record_every = std::max<long>(1, config.max_iters / 512);
    const long window = std::max<long>(1, config.max_iters / 8);
    double window_best = best_loss;
    bool converged = false;

    for (long k = 0; k < config.max_iters; ++k) {
        double loss = beta * m.squaredNorm();
        g = (2.0 * beta) * m;
        double g_eta = 0.0;
        for (const auto& s : pos) {
            const double z = s.dot(m) - eta;
            if (z > 0.0) {
                loss += z;
                s.add_to(g, 1.0);
                g_eta -= 1.0;
            }
        }
        for (const auto& s : neg) {
            const double z = gamma + eta - s.dot(m);
            if (z > 0.0) {
                loss += z;
                s.add_to(g, -1.0);
                g_eta += 1.0;
            }
        }
        if (loss < best_loss) {
            best_loss = loss;
            best_m = m;
            best_eta = eta;
        }
        if (k % record_every == 0) trace.push_back(best_loss);
        if (k % window == window - 1) {
            if (window_best - best_loss <= config.tolerance * std::max(1.0, std::abs(best_loss))) {
                converged = true;
            }
            window_best = best_loss;
        }

        const double step = config.step_scale * std::min(1.0, 2.0 / (mu * double(k + 1)));
        m -= step * g;
        eta -= step * g_eta;
        m = m.cwiseMax(0.0).eval();
        eta = std::clamp(eta, 0.0, gamma);
        if (config.enforce_metric) project_metric_inplace(m);
    }
    trace.push_back(best_loss);

    return GeslResult{CostTable(dataset.alphabet, best_m), best_eta, best_loss, std::move(trace),
                      converged};
}

std::string LossComparison::to_text() const {
    std::ostringstream out;
    out << "loss(pseudo distance, learned c)   = " << format_double(pseudo_loss, 12) << '\n'
        << "loss(true distance, learned c)     = " << format_double(true_loss, 12) << '\n'
        << "loss(dp distance, reference c0)    = " << format_double(baseline_loss, 12) << '\n'
        << "worsened vs pseudo:   " << (worsened_vs_pseudo() ? "yes" : "no") << '\n'
        << "worsened vs baseline: " << (worsened_vs_baseline() ? "yes" : "no") << '\n';
    return out.str();
}

LossComparison loss_comparison_report(const Dataset& dataset, const PairSet& pairs,
                                      const CostTable& c_learned, double eta,
                                      const CostTable& c0, const GeslConfig& config) {
    const PairSummaries summaries =
        reference_summaries(dataset, pairs, c0, config.script_mode);

    std::vector<double> pos_pseudo, neg_pseudo;
    for (const auto& s : summaries.positives) pos_pseudo.push_back(pseudo_distance(s, c_learned));
    for (const auto& s : summaries.negatives) neg_pseudo.push_back(pseudo_distance(s, c_learned));

    auto oracle = [&](const std::vector<std::pair<int, int>>& list, const CostTable& c) {
        std::vector<double> out;
        for (auto [i, j] : list) {
            const Tree& x = dataset.trees[i];
            const Tree& y = dataset.trees[j];
            out.push_back(true_distance_oracle(x, y, c, default_size_cap(x, y)));
        }
        return out;
    };
    std::vector<double> pos_true = oracle(pairs.positives, c_learned);
    std::vector<double> neg_true = oracle(pairs.negatives, c_learned);

    std::vector<double> pos_base, neg_base;
    for (auto [i, j] : pairs.positives)
        pos_base.push_back(ted_distance(dataset.trees[i], dataset.trees[j], c0));
    for (auto [i, j] : pairs.negatives)
        neg_base.push_back(ted_distance(dataset.trees[i], dataset.trees[j], c0));

    LossComparison report;
    report.pseudo_loss =
        gesl_loss(pos_pseudo, neg_pseudo, c_learned, eta, config.beta, config.margin_gamma);
    report.true_loss =
        gesl_loss(pos_true, neg_true, c_learned, eta, config.beta, config.margin_gamma);
    report.baseline_loss =
        gesl_loss(pos_base, neg_base, c0, eta, config.beta, config.margin_gamma);
    return report;
}

}  // namespace tedlearn
