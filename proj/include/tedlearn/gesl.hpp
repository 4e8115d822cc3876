#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tedlearn/ted.hpp"

namespace tedlearn {

/// Ordered record-index pairs: positives share a class, negatives differ.
struct PairSet {
    std::vector<std::pair<int, int>> positives;
    std::vector<std::pair<int, int>> negatives;
};

/// For each record: one positive (nearest same-class neighbor) and one
/// negative (furthest other-class record), ties broken by smaller index.
/// Throws if any record has no same-class partner or only one class exists.
PairSet select_pairs(const Dataset& dataset, const Eigen::MatrixXd& dist);

struct GeslConfig {
    enum class ScriptMode { Single, AllCooptimal };

    double beta = 0.1;
    double margin_gamma = std::log(2.0);
    ScriptMode script_mode = ScriptMode::Single;
    bool enforce_metric = false;
    // solver
    long max_iters = 400000;
    double step_scale = 1.0;  // multiplies the 2/(mu*(k+1)) schedule
    double tolerance = 1e-10; // best-loss improvement per check window
};

/// Reference summaries, one per pair, computed once under c0 and frozen.
struct PairSummaries {
    std::vector<ScriptSummary> positives;
    std::vector<ScriptSummary> negatives;
};

PairSummaries reference_summaries(const Dataset& dataset, const PairSet& pairs,
                                  const CostTable& c0, GeslConfig::ScriptMode mode);

/// d̃_c = ⟨counts, c⟩; linear in c.
double pseudo_distance(const ScriptSummary& summary, const CostTable& c);

/// E = β‖c‖² + Σ_P [d_p − η]₊ + Σ_N [γ + η − d_n]₊ over precomputed pair
/// distances.
double gesl_loss(const std::vector<double>& positive_distances,
                 const std::vector<double>& negative_distances, const CostTable& c, double eta,
                 double beta, double gamma);

struct GeslResult {
    CostTable cost;
    double eta;
    double final_loss;
    std::vector<double> loss_trace;  // best loss after each recorded step
    bool converged;
};

/// Projected subgradient minimization of gesl_loss over (c, η) with the
/// pseudo distances taken against summaries frozen under c0. Every iterate
/// satisfies c >= 0 and η ∈ [0, γ]; with enforce_metric every iterate also
/// passes check_pseudometric.
GeslResult gesl_fit(const Dataset& dataset, const PairSet& pairs, const CostTable& c0,
                    const GeslConfig& config);

enum class DistanceEvaluator { Pseudo, Dp, TrueOracle };

struct LossComparison {
    double pseudo_loss;    // d̃ with learned c
    double true_loss;      // true script distance with learned c
    double baseline_loss;  // DP distance with c0
    bool worsened_vs_pseudo() const { return true_loss > pseudo_loss; }
    bool worsened_vs_baseline() const { return true_loss > baseline_loss; }
    std::string to_text() const;
};

/// Evaluates the hinge objective at (c_learned, eta) under (a) the pseudo
/// edit distance, (b) the true script distance (shortest-path oracle), and
/// (c) the DP distance with c0. Oracle evaluation is exponential in tree
/// size; intended for small instances.
LossComparison loss_comparison_report(const Dataset& dataset, const PairSet& pairs,
                                      const CostTable& c_learned, double eta,
                                      const CostTable& c0, const GeslConfig& config);

}  // namespace tedlearn
