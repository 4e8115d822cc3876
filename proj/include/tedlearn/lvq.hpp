#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "tedlearn/gesl.hpp"
#include "tedlearn/ted.hpp"

namespace tedlearn {

/// One prototype record index per class (class order = Dataset::class_names).
struct PrototypeSet {
    std::vector<int> prototype;  // class id -> record index
};

/// Per class, the record minimizing the summed distance to its classmates;
/// ties by lower index.
PrototypeSet select_medoid_prototypes(const Dataset& dataset, const Eigen::MatrixXd& dist);

/// Σ μ_i with μ = (d⁺ − d⁻)/(d⁺ + d⁻) over scored records; d⁺/d⁻ are the
/// distances to the closest same-/other-class prototype. Records that are
/// themselves prototypes use the next-best same-class prototype if one
/// exists, else are skipped. d⁺ + d⁻ = 0 scores as μ = 0.
double glvq_loss(const Dataset& dataset, const PrototypeSet& prototypes,
                 const std::function<double(int record, int prototype)>& dist);

struct LvqConfig {
    enum class Mode { DirectCost, Embedding };
    enum class Head { Pseudo, TrueTed };

    Mode mode = Mode::Embedding;
    Head distance_head = Head::Pseudo;
    double learning_rate = 0.05;
    int max_iters = 100;
    bool enforce_metric = true;   // DirectCost only
    int embedding_dimension = 0;  // 0 = |alphabet|
    double tolerance = 1e-9;
};

struct LvqResult {
    CostTable cost;  // learned directly, or derived from the embedding
    std::optional<EmbeddingMatrix> embedding;
    double best_loss;
    std::vector<double> loss_trace;        // per epoch
    std::vector<double> best_trace;        // running best, non-increasing
    std::vector<bool> metric_ok_per_epoch; // audit of each epoch's cost
    bool converged;
};

/// Gradient descent on glvq_loss with medoid prototypes re-selected each
/// epoch. Pseudo head: distances are linear in c through summaries frozen
/// under the initial cost. TrueTed head: DP distances, differentiated through
/// the current co-optimal summary (refreshed each epoch). DirectCost mode
/// applies metric_projection after each step when enforce_metric is set;
/// Embedding mode is pseudo-metric by construction.
LvqResult lvq_fit(const Dataset& dataset, const LvqConfig& config,
                  std::optional<CostTable> init_cost = std::nullopt,
                  std::optional<EmbeddingMatrix> init_embedding = std::nullopt);

/// Leave-one-out k-nearest-neighbor error rate; majority vote, distance ties
/// by index, vote ties by earliest-ranked neighbor.
double knn_evaluate(const Dataset& dataset, const Eigen::MatrixXd& dist, int k);

}  // namespace tedlearn
