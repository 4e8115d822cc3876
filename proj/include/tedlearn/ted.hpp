#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tedlearn/costs.hpp"
#include "tedlearn/trees.hpp"

namespace tedlearn {

/// Single node edit. Positions are preorder indices: source_node/target_node
/// refer to the original trees (-1 where not applicable); position/child_slot/
/// adopt_count address the intermediate forest at application time.
struct Edit {
    enum class Kind { Replace, Delete, Insert };
    Kind kind;
    int from_symbol;  // gap index for insert
    int to_symbol;    // gap index for delete
    int source_node = -1;
    int target_node = -1;
    // application coordinates
    int position = -1;     // replace/delete: node; insert: parent (-1 = top level)
    int child_slot = 0;    // insert only
    int adopt_count = 0;   // insert only
};

struct EditScript {
    std::vector<Edit> edits;
    std::size_t size() const { return edits.size(); }
};

double script_cost(const EditScript& script, const CostTable& c);

/// Intermediate states of script application are ordered forests (deleting a
/// multi-child root, or the last node, is legal).
using Forest = std::vector<Tree>;

/// Applies the script to a copy of `source`; throws on any inconsistent edit.
Forest apply_script(const Forest& source, const EditScript& script, const AlphabetPtr& alphabet);

/// True iff applying `script` to {x} yields exactly {y}.
bool script_transforms(const Tree& x, const EditScript& script, const Tree& y);

/// Tai mapping: matched (x-preorder, y-preorder) pairs preserving ancestor
/// and left-to-right order.
using Mapping = std::vector<std::pair<int, int>>;

/// Canonical script for a mapping: deletions and replacements in x-preorder,
/// then insertions in y-preorder, with application positions filled in.
EditScript script_from_mapping(const Tree& x, const Tree& y, const Mapping& mapping);

/// Per-key edit counts of one script (identity replacements included).
Eigen::MatrixXd script_key_counts(const EditScript& script, const AlphabetPtr& alphabet);

struct DistanceResult {
    double distance;
    bool negative_cost_warning;
    Tree source;
    Tree target;
    CostTable cost;
};

/// Zhang-Shasha keyroot dynamic program; O(|x|²·|y|²). Equals the minimal
/// script cost whenever c satisfies the triangle inequality, otherwise an
/// overestimate. Sets negative_cost_warning if any entry of c is negative
/// (the recurrence value is then not a distance).
DistanceResult ted_dp(const Tree& x, const Tree& y, const CostTable& c);

/// Distance only, no result object.
double ted_distance(const Tree& x, const Tree& y, const CostTable& c);

/// One co-optimal script; deterministic tie-break: replace before delete
/// before insert, then smaller preorder index.
EditScript backtrace_one(const DistanceResult& result);
Mapping backtrace_mapping(const DistanceResult& result);

/// Averaged edit-key counts over all co-optimal tree mappings. The inner
/// product of counts with c equals the DP distance.
struct ScriptSummary {
    AlphabetPtr alphabet;
    Eigen::MatrixXd counts;  // (n+1)x(n+1), row = replaced symbol
};

/// Requires c pseudo-metric (throws otherwise): co-optimality is only
/// meaningful when the DP value is the distance.
ScriptSummary summarize_cooptimal(const Tree& x, const Tree& y, const CostTable& c);

/// Number of distinct co-optimal tree mappings. Same precondition.
std::uint64_t count_cooptimal(const Tree& x, const Tree& y, const CostTable& c);

/// Exhaustive search over all Tai mappings; minimum cost plus every
/// minimizing script. Guarded: size(x)·size(y) must be <= 64.
std::pair<double, std::vector<EditScript>> enumerate_mappings_oracle(const Tree& x, const Tree& y,
                                                                     const CostTable& c);

/// Minimum script cost via best-first search over the space of forests of at
/// most `size_cap` nodes (edges = single edits weighted by c). Requires
/// c >= 0; throws if the cap disconnects x from y.
double true_distance_oracle(const Tree& x, const Tree& y, const CostTable& c, int size_cap);
inline int default_size_cap(const Tree& x, const Tree& y) {
    return std::max(x.size(), y.size()) + 1;
}

/// Full pairwise DP distance matrix; rows are sources (may be asymmetric).
Eigen::MatrixXd distance_matrix(const Dataset& dataset, const CostTable& c);

}  // namespace tedlearn
