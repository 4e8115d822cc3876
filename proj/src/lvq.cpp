#include "tedlearn/lvq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "tedlearn/util.hpp"

namespace tedlearn {

PrototypeSet select_medoid_prototypes(const Dataset& dataset, const Eigen::MatrixXd& dist) {
    const int n = static_cast<int>(dataset.size());
    const auto ids = dataset.class_ids();
    const int classes = static_cast<int>(dataset.class_names().size());
    PrototypeSet protos;
    protos.prototype.assign(classes, -1);
    std::vector<double> best_sum(classes, std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i) {
        double total = 0.0;
        for (int j = 0; j < n; ++j)
            if (ids[j] == ids[i]) total += dist(i, j);
        if (total < best_sum[ids[i]]) {  // ties keep the earlier index
            best_sum[ids[i]] = total;
            protos.prototype[ids[i]] = i;
        }
    }
    return protos;
}

namespace {

struct ScoredRecord {
    int record;
    int proto_same;   // -1 when the record is its class's only prototype (skipped)
    int proto_other;
    double d_plus, d_minus;
    double mu;
};

std::vector<ScoredRecord> score_records(const Dataset& dataset, const PrototypeSet& protos,
                                        const std::function<double(int, int)>& dist) {
    const auto ids = dataset.class_ids();
    const int classes = static_cast<int>(protos.prototype.size());
    if (classes < 2) throw std::invalid_argument("glvq_loss: need at least two classes");
    std::vector<ScoredRecord> scored;
    for (int i = 0; i < static_cast<int>(dataset.size()); ++i) {
        const int ci = ids[i];
        int p_same = protos.prototype[ci];
        if (p_same == i) continue;  // no next-best same-class prototype to fall back to
        double d_plus = dist(i, p_same);
        int p_other = -1;
        double d_minus = std::numeric_limits<double>::infinity();
        for (int c = 0; c < classes; ++c) {
            if (c == ci || protos.prototype[c] < 0) continue;
            double d = dist(i, protos.prototype[c]);
            if (d < d_minus) {
                d_minus = d;
                p_other = protos.prototype[c];
            }
        }
        double denom = d_plus + d_minus;
        double mu = denom == 0.0 ? 0.0 : (d_plus - d_minus) / denom;
        scored.push_back({i, p_same, p_other, d_plus, d_minus, mu});
    }
    return scored;
}

}  // namespace

double glvq_loss(const Dataset& dataset, const PrototypeSet& prototypes,
                 const std::function<double(int record, int prototype)>& dist) {
    double total = 0.0;
    for (const auto& s : score_records(dataset, prototypes, dist)) total += s.mu;
    return total;
}

namespace {

// Chain rule from the summary-weighted distance to the embedding columns:
// d = Σ_{u,v} S(u,v)·‖a(u) − a(v)‖, gap pinned at the origin, subgradient 0
// at coincident vectors.
void accumulate_embedding_gradient(const Eigen::MatrixXd& summary, const EmbeddingMatrix& emb,
                                   double factor, Eigen::MatrixXd& grad) {
    const int gap = static_cast<int>(emb.alphabet->size());
    for (int u = 0; u <= gap; ++u) {
        for (int v = 0; v <= gap; ++v) {
            double w = summary(u, v);
            if (w == 0.0 || u == v) continue;
            Eigen::VectorXd diff = emb.vector_for(u) - emb.vector_for(v);
            double norm = diff.norm();
            if (norm == 0.0) continue;
            Eigen::VectorXd unit = diff / norm;
            if (u != gap) grad.col(u) += factor * w * unit;
            if (v != gap) grad.col(v) -= factor * w * unit;
        }
    }
}

}  // namespace

LvqResult lvq_fit(const Dataset& dataset, const LvqConfig& config,
                  std::optional<CostTable> init_cost,
                  std::optional<EmbeddingMatrix> init_embedding) {
    if (config.learning_rate <= 0.0)
        throw std::invalid_argument("lvq_fit: learning rate must be > 0");
    if (dataset.class_names().size() < 2)
        throw std::invalid_argument("lvq_fit: need at least two classes");
    const auto& alphabet = dataset.alphabet;
    const int n = static_cast<int>(dataset.size());

    const bool embedding_mode = config.mode == LvqConfig::Mode::Embedding;
    EmbeddingMatrix emb{alphabet, Eigen::MatrixXd()};
    Eigen::MatrixXd cost_entries;
    if (embedding_mode) {
        if (init_embedding) {
            emb = *init_embedding;
        } else {
            int dim = config.embedding_dimension;
            if (dim != 0 && dim != static_cast<int>(alphabet->size()))
                throw std::invalid_argument(
                    "lvq_fit: a non-default embedding dimension needs an explicit init");
            emb = simplex_init(alphabet);
        }
    } else {
        cost_entries = init_cost ? init_cost->entries()
                                 : CostTable::uniform(alphabet, 1.0).entries();
    }

    auto current_cost = [&]() {
        return embedding_mode ? cost_from_embedding(emb)
                              : CostTable(alphabet, cost_entries);
    };

    // Pseudo head: reference summaries are frozen under the initial cost.
    const CostTable reference_cost = current_cost();
    std::map<std::pair<int, int>, ScriptSummary> frozen_summaries;
    auto frozen_summary = [&](int i, int j) -> const ScriptSummary& {
        auto key = std::make_pair(i, j);
        auto it = frozen_summaries.find(key);
        if (it == frozen_summaries.end())
            it = frozen_summaries
                     .emplace(key, summarize_cooptimal(dataset.trees[i], dataset.trees[j],
                                                       reference_cost))
                     .first;
        return it->second;
    };

    LvqResult result{current_cost(), std::nullopt, std::numeric_limits<double>::infinity(),
                     {},          {},           {},
                     false};
    Eigen::MatrixXd best_params;  // embedding columns or cost entries
    double previous_loss = std::numeric_limits<double>::infinity();

    for (int epoch = 0; epoch < config.max_iters; ++epoch) {
        const CostTable cost = current_cost();
        result.metric_ok_per_epoch.push_back(check_pseudometric(cost, 1e-9).is_pseudometric());

        // distances under the configured head
        Eigen::MatrixXd dist(n, n);
        if (config.distance_head == LvqConfig::Head::Pseudo) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    dist(i, j) = i == j ? 0.0 : pseudo_distance(frozen_summary(i, j), cost);
        } else {
            dist = distance_matrix(dataset, cost);
        }

        PrototypeSet protos = select_medoid_prototypes(dataset, dist);
        auto scored = score_records(dataset, protos, [&](int i, int p) { return dist(i, p); });
        double loss = 0.0;
        for (const auto& s : scored) loss += s.mu;

        result.loss_trace.push_back(loss);
        if (loss < result.best_loss) {
            result.best_loss = loss;
            best_params = embedding_mode ? emb.vectors : cost_entries;
        }
        result.best_trace.push_back(result.best_loss);
        if (std::abs(previous_loss - loss) <= config.tolerance * std::max(1.0, std::abs(loss)))
            result.converged = true;
        previous_loss = loss;

        // the summary acting as (sub)gradient of each head distance
        auto grad_summary = [&](int i, int p) -> Eigen::MatrixXd {
            if (config.distance_head == LvqConfig::Head::Pseudo)
                return frozen_summary(i, p).counts;
            return summarize_cooptimal(dataset.trees[i], dataset.trees[p], cost).counts;
        };

        if (embedding_mode) {
            Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(emb.vectors.rows(), emb.vectors.cols());
            for (const auto& s : scored) {
                double denom = s.d_plus + s.d_minus;
                if (denom == 0.0) continue;
                double dmu_dplus = 2.0 * s.d_minus / (denom * denom);
                double dmu_dminus = -2.0 * s.d_plus / (denom * denom);
                accumulate_embedding_gradient(grad_summary(s.record, s.proto_same), emb,
                                              dmu_dplus, grad);
                if (s.proto_other >= 0)
                    accumulate_embedding_gradient(grad_summary(s.record, s.proto_other), emb,
                                                  dmu_dminus, grad);
            }
            emb.vectors -= config.learning_rate * grad;
        } else {
            Eigen::MatrixXd grad =
                Eigen::MatrixXd::Zero(cost_entries.rows(), cost_entries.cols());
            for (const auto& s : scored) {
                double denom = s.d_plus + s.d_minus;
                if (denom == 0.0) continue;
                double dmu_dplus = 2.0 * s.d_minus / (denom * denom);
                double dmu_dminus = -2.0 * s.d_plus / (denom * denom);
                grad += dmu_dplus * grad_summary(s.record, s.proto_same);
                if (s.proto_other >= 0)
                    grad += dmu_dminus * grad_summary(s.record, s.proto_other);
            }
            cost_entries -= config.learning_rate * grad;
            cost_entries = cost_entries.cwiseMax(0.0).eval();
            cost_entries.diagonal().setZero();
            if (config.enforce_metric) {
                CostTable projected = metric_projection(CostTable(alphabet, cost_entries));
                cost_entries = projected.entries();
            }
        }
    }

    if (best_params.size() > 0) {
        if (embedding_mode) {
            emb.vectors = best_params;
        } else {
            cost_entries = best_params;
        }
    }
    result.cost = current_cost();
    if (embedding_mode) result.embedding = emb;
    return result;
}

double knn_evaluate(const Dataset& dataset, const Eigen::MatrixXd& dist, int k) {
    const int n = static_cast<int>(dataset.size());
    if (k < 1 || k >= n) throw std::invalid_argument("knn_evaluate: need 1 <= k < #records");
    const auto ids = dataset.class_ids();
    const int classes = static_cast<int>(dataset.class_names().size());
    int wrong = 0;
    for (int i = 0; i < n; ++i) {
        std::vector<int> order;
        for (int j = 0; j < n; ++j)
            if (j != i) order.push_back(j);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            if (dist(i, a) != dist(i, b)) return dist(i, a) < dist(i, b);
            return a < b;
        });
        std::vector<int> votes(classes, 0);
        for (int r = 0; r < k; ++r) votes[ids[order[r]]] += 1;
        int best_votes = *std::max_element(votes.begin(), votes.end());
        int predicted = -1;
        for (int r = 0; r < k && predicted < 0; ++r)  // vote ties: earliest-ranked neighbor
            if (votes[ids[order[r]]] == best_votes) predicted = ids[order[r]];
        if (predicted != ids[i]) ++wrong;
    }
    return static_cast<double>(wrong) / n;
}

}  // namespace tedlearn
