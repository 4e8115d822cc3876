#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "tedlearn/trees.hpp"

namespace tedlearn {

/// Edit-cost table over (alphabet ∪ gap)²; rows index the replaced symbol,
/// columns the replacement. Entry (u, gap) prices deletion, (gap, v) insertion.
class CostTable {
public:
    CostTable(AlphabetPtr alphabet, Eigen::MatrixXd entries);

    /// Zero diagonal, `off_diagonal` everywhere else (gap row/column included).
    static CostTable uniform(AlphabetPtr alphabet, double off_diagonal);
    static CostTable zero(AlphabetPtr alphabet);

    double operator()(int u, int v) const { return entries_(u, v); }
    double& at(int u, int v) { return entries_(u, v); }
    const Eigen::MatrixXd& entries() const { return entries_; }
    Eigen::MatrixXd& entries() { return entries_; }
    const AlphabetPtr& alphabet() const { return alphabet_; }
    int extended_size() const { return static_cast<int>(entries_.rows()); }

    double squared_norm() const { return entries_.squaredNorm(); }
    bool has_negative_entries() const { return (entries_.array() < 0.0).any(); }

    /// Text format: header row/column of symbols then "-", 17 significant
    /// digits, whitespace separated. Bit-exact round trip.
    std::string to_text() const;
    static CostTable from_text(const std::string& text);
    void save(const std::string& path) const;
    static CostTable load(const std::string& path);

private:
    AlphabetPtr alphabet_;
    Eigen::MatrixXd entries_;
};

struct TriangleWitness {
    int x, y, z;
    double lhs, rhs;  // c(x,z) and c(x,y)+c(y,z)
};
struct SymmetryWitness {
    int x, y;
    double forward, backward;
};
struct ValueWitness {
    int x, y;
    double value;
};

/// Result of the exhaustive pseudo-metric audit. A property flag is false
/// iff at least one witness is recorded for it.
struct MetricAudit {
    bool nonnegative = true;
    bool self_identical = true;
    bool symmetric = true;
    bool triangle = true;
    std::vector<ValueWitness> negative_entries;
    std::vector<ValueWitness> nonzero_diagonal;
    std::vector<SymmetryWitness> asymmetric_pairs;
    std::vector<TriangleWitness> triangle_violations;

    bool is_pseudometric() const { return nonnegative && self_identical && symmetric && triangle; }
    std::string to_text(const Alphabet& alphabet) const;
};

/// O(n³) audit over alphabet ∪ gap; violations beyond `tol` are recorded
/// with witnesses.
MetricAudit check_pseudometric(const CostTable& c, double tol = 1e-12);

/// Clamp negatives to 0, zero the diagonal, symmetrize by averaging, then
/// all-pairs shortest-path closure. Output always passes check_pseudometric;
/// pseudo-metric inputs are fixed points.
CostTable metric_projection(const CostTable& c);

/// Columns of the returned U×U matrix have unit norm, unit pairwise distance,
/// and unit distance to the origin.
Eigen::MatrixXd simplex_matrix(int dimension);

/// One real vector per alphabet symbol; the gap maps to the origin and is
/// not stored.
struct EmbeddingMatrix {
    AlphabetPtr alphabet;
    Eigen::MatrixXd vectors;  // dimension x |alphabet|

    int dimension() const { return static_cast<int>(vectors.rows()); }
    Eigen::VectorXd vector_for(int symbol) const;  // gap -> zero

    std::string to_text() const;
    void save(const std::string& path) const;
};

/// Unit-simplex initialization over the full alphabet (U = |alphabet|).
EmbeddingMatrix simplex_init(AlphabetPtr alphabet);

/// c(x,y) = ||a(x) - a(y)||₂; a pseudo-metric by construction.
CostTable cost_from_embedding(const EmbeddingMatrix& embedding);

/// ½(1 - cos angle between Ωx and Ωy). Throws if either image is zero.
double cosine_cost(const Eigen::MatrixXd& omega, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y);

/// Closed-form gradient of cosine_cost with respect to Ω.
Eigen::MatrixXd cosine_cost_gradient(const Eigen::MatrixXd& omega, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& y);

/// Max elementwise |central difference - grad entry| at `point`.
double finite_diff_check(const std::function<double(const Eigen::MatrixXd&)>& f,
                         const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& grad,
                         const Eigen::MatrixXd& point, double step);

}  // namespace tedlearn
