#include "tedlearn/ted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "tedlearn/util.hpp"

namespace tedlearn {

namespace {

void require_same_alphabet(const Tree& x, const Tree& y, const CostTable& c) {
    if (!(*x.alphabet() == *y.alphabet()) || !(*x.alphabet() == *c.alphabet()))
        throw std::invalid_argument("trees and cost table must share one alphabet");
}

/* Postorder view of a tree, as used by the keyroot recurrences:
 *   lml[i]    postorder index of the leftmost leaf of the subtree rooted at i
 *   keyroots  for every distinct lml value, the largest node carrying it
 * A contiguous postorder interval [lo..hi] with lml[hi] >= lo is a forest.
 */
struct PostorderView {
    int size = 0;
    std::vector<int> pre_of_post;
    std::vector<int> post_of_pre;
    std::vector<int> labels;  // postorder
    std::vector<int> lml;
    std::vector<int> keyroots;

    explicit PostorderView(const Tree& t) : size(t.size()) {
        pre_of_post.resize(size);
        post_of_pre.resize(size);
        labels.resize(size);
        lml.resize(size);
        int counter = 0;
        number(t, 0, counter);
        std::vector<int> last_with_lml(size, -1);
        for (int i = 0; i < size; ++i) last_with_lml[lml[i]] = i;
        for (int i = 0; i < size; ++i)
            if (last_with_lml[lml[i]] == i) keyroots.push_back(i);
    }

    int number(const Tree& t, int pre_node, int& counter) {
        int first_leaf = -1;
        for (int child : t.children(pre_node)) {
            int child_post = number(t, child, counter);
            if (first_leaf < 0) first_leaf = lml[child_post];
        }
        int post = counter++;
        pre_of_post[post] = pre_node;
        post_of_pre[pre_node] = post;
        labels[post] = t.label(pre_node);
        lml[post] = first_leaf < 0 ? post : first_leaf;
        return post;
    }
};

/* Keyroot dynamic program over forest-distance tables.
 *
 * Cell (a, b) of the table for keyroot pair (k1, k2) holds the distance
 * between the forests x[lml(k1) .. lml(k1)+a-1] and y[lml(k2) .. lml(k2)+b-1].
 * treedist(i, j) is harvested at the cells where both spans are whole trees.
 *
 * The counting layer carries, per cell, the number of co-optimal Tai mappings
 * and the sum of their edit-key count matrices. The three recurrence options
 * overlap as mapping classes, so counting uses the disjoint split
 *     {(i,j) matched}  ⊎  {i unmatched}  ⊎  {j unmatched} \ {both unmatched}
 * The matched class needs the root-matched subtree optimum (rm/nrm/srm below),
 * which is strictly larger than treedist(i, j) whenever the subtree optimum
 * leaves a root unmatched; those mappings are already covered by the delete
 * and insert classes.
 */
template <bool WithCounts>
struct ZsEngine {
    const PostorderView& x;
    const PostorderView& y;
    const CostTable& c;
    int gap;
    int keys = 0;  // (n+1)^2 when counting

    Eigen::MatrixXd td;
    // root-matched subtree solutions (counting only)
    Eigen::MatrixXd rm, nrm;
    std::vector<double> srm;

    double distance = 0.0;
    double mapping_count = 0.0;
    Eigen::MatrixXd summary_sum;

    ZsEngine(const PostorderView& xv, const PostorderView& yv, const CostTable& cost)
        : x(xv), y(yv), c(cost), gap(cost.alphabet()->gap_index()) {
        td.setZero(x.size, y.size);
        if constexpr (WithCounts) {
            keys = c.extended_size() * c.extended_size();
            rm.setZero(x.size, y.size);
            nrm.setZero(x.size, y.size);
            srm.assign(static_cast<std::size_t>(x.size) * y.size * keys, 0.0);
            summary_sum.setZero(c.extended_size(), c.extended_size());
        }
    }

    int key_of(int u, int v) const { return u * c.extended_size() + v; }
    double* srm_at(int i, int j) {
        return srm.data() + (static_cast<std::size_t>(i) * y.size + j) * keys;
    }

    void run() {
        std::vector<double> fd, cnt, sum;
        for (int k1 : x.keyroots) {
            for (int k2 : y.keyroots) {
                const int lx = x.lml[k1], ly = y.lml[k2];
                const int sx = k1 - lx + 1, sy = k2 - ly + 1;
                const int cols = sy + 1;
                auto cell = [cols](int a, int b) { return a * cols + b; };

                fd.assign(static_cast<std::size_t>(sx + 1) * cols, 0.0);
                if constexpr (WithCounts) {
                    cnt.assign(fd.size(), 0.0);
                    sum.assign(fd.size() * keys, 0.0);
                    cnt[cell(0, 0)] = 1.0;
                }
                for (int a = 1; a <= sx; ++a) {
                    int i = lx + a - 1;
                    fd[cell(a, 0)] = fd[cell(a - 1, 0)] + c(x.labels[i], gap);
                    if constexpr (WithCounts) {
                        cnt[cell(a, 0)] = 1.0;
                        double* s = &sum[cell(a, 0) * static_cast<std::size_t>(keys)];
                        const double* p = &sum[cell(a - 1, 0) * static_cast<std::size_t>(keys)];
                        std::copy(p, p + keys, s);
                        s[key_of(x.labels[i], gap)] += 1.0;
                    }
                }
                for (int b = 1; b <= sy; ++b) {
                    int j = ly + b - 1;
                    fd[cell(0, b)] = fd[cell(0, b - 1)] + c(gap, y.labels[j]);
                    if constexpr (WithCounts) {
                        cnt[cell(0, b)] = 1.0;
                        double* s = &sum[cell(0, b) * static_cast<std::size_t>(keys)];
                        const double* p = &sum[cell(0, b - 1) * static_cast<std::size_t>(keys)];
                        std::copy(p, p + keys, s);
                        s[key_of(gap, y.labels[j])] += 1.0;
                    }
                }

                for (int a = 1; a <= sx; ++a) {
                    const int i = lx + a - 1;
                    const double del_cost = c(x.labels[i], gap);
                    for (int b = 1; b <= sy; ++b) {
                        const int j = ly + b - 1;
                        const double ins_cost = c(gap, y.labels[j]);
                        const bool tree_tree = x.lml[i] == lx && y.lml[j] == ly;

                        const double del_val = fd[cell(a - 1, b)] + del_cost;
                        const double ins_val = fd[cell(a, b - 1)] + ins_cost;
                        double match_val;
                        int ra = 0, rb = 0;  // prefix-forest cell for the block option
                        if (tree_tree) {
                            match_val = fd[cell(a - 1, b - 1)] + c(x.labels[i], y.labels[j]);
                        } else {
                            ra = x.lml[i] - lx;
                            rb = y.lml[j] - ly;
                            match_val = fd[cell(ra, rb)] + td(i, j);
                        }
                        const double best = std::min({del_val, ins_val, match_val});
                        fd[cell(a, b)] = best;

                        if constexpr (WithCounts) {
                            double n_here = 0.0;
                            double* s_here = &sum[cell(a, b) * static_cast<std::size_t>(keys)];
                            std::fill(s_here, s_here + keys, 0.0);
                            auto add = [&](int from_cell, double factor) {
                                const double* p =
                                    &sum[from_cell * static_cast<std::size_t>(keys)];
                                for (int k = 0; k < keys; ++k) s_here[k] += factor * p[k];
                            };
                            if (nearly_equal(del_val, best)) {
                                double n = cnt[cell(a - 1, b)];
                                n_here += n;
                                add(cell(a - 1, b), 1.0);
                                s_here[key_of(x.labels[i], gap)] += n;
                            }
                            if (nearly_equal(ins_val, best)) {
                                double n = cnt[cell(a, b - 1)];
                                n_here += n;
                                add(cell(a, b - 1), 1.0);
                                s_here[key_of(gap, y.labels[j])] += n;
                            }
                            const double both_val =
                                fd[cell(a - 1, b - 1)] + del_cost + ins_cost;
                            if (nearly_equal(both_val, best)) {
                                double n = cnt[cell(a - 1, b - 1)];
                                n_here -= n;
                                add(cell(a - 1, b - 1), -1.0);
                                s_here[key_of(x.labels[i], gap)] -= n;
                                s_here[key_of(gap, y.labels[j])] -= n;
                            }
                            if (tree_tree) {
                                const double root_val = fd[cell(a - 1, b - 1)] +
                                                        c(x.labels[i], y.labels[j]);
                                if (nearly_equal(root_val, best)) {
                                    double n = cnt[cell(a - 1, b - 1)];
                                    n_here += n;
                                    add(cell(a - 1, b - 1), 1.0);
                                    s_here[key_of(x.labels[i], y.labels[j])] += n;
                                }
                            } else {
                                const double root_val = fd[cell(ra, rb)] + rm(i, j);
                                if (nearly_equal(root_val, best)) {
                                    const double n_rest = cnt[cell(ra, rb)];
                                    const double n_sub = nrm(i, j);
                                    n_here += n_rest * n_sub;
                                    add(cell(ra, rb), n_sub);
                                    const double* ps = srm_at(i, j);
                                    for (int k = 0; k < keys; ++k)
                                        s_here[k] += n_rest * ps[k];
                                }
                            }
                            cnt[cell(a, b)] = n_here;
                        }

                        if (tree_tree) {
                            td(i, j) = best;
                            if constexpr (WithCounts) {
                                rm(i, j) =
                                    fd[cell(a - 1, b - 1)] + c(x.labels[i], y.labels[j]);
                                nrm(i, j) = cnt[cell(a - 1, b - 1)];
                                double* ps = srm_at(i, j);
                                const double* p =
                                    &sum[cell(a - 1, b - 1) * static_cast<std::size_t>(keys)];
                                std::copy(p, p + keys, ps);
                                ps[key_of(x.labels[i], y.labels[j])] += nrm(i, j);
                            }
                        }
                    }
                }

                if (k1 == x.size - 1 && k2 == y.size - 1) {
                    distance = fd[cell(sx, sy)];
                    if constexpr (WithCounts) {
                        mapping_count = cnt[cell(sx, sy)];
                        const double* s = &sum[cell(sx, sy) * static_cast<std::size_t>(keys)];
                        const int n = c.extended_size();
                        for (int u = 0; u < n; ++u)
                            for (int v = 0; v < n; ++v) summary_sum(u, v) = s[key_of(u, v)];
                    }
                }
            }
        }
    }
};

}  // namespace

double ted_distance(const Tree& x, const Tree& y, const CostTable& c) {
    require_same_alphabet(x, y, c);
    PostorderView xv(x), yv(y);
    ZsEngine<false> engine(xv, yv, c);
    engine.run();
    return engine.distance;
}

DistanceResult ted_dp(const Tree& x, const Tree& y, const CostTable& c) {
    return DistanceResult{ted_distance(x, y, c), c.has_negative_entries(), x, y, c};
}

namespace {

/* Memoized forest-distance recursion over postorder spans; used only for
 * backtracing one co-optimal mapping out of a DistanceResult. */
class SpanSolver {
public:
    SpanSolver(const Tree& xt, const Tree& yt, const CostTable& cost)
        : x_(xt), y_(yt), c_(cost), gap_(cost.alphabet()->gap_index()) {}

    double full_distance() { return fd(0, x_.size - 1, 0, y_.size - 1); }

    // postorder pairs, matched (i, j)
    std::vector<std::pair<int, int>> trace() {
        std::vector<std::pair<int, int>> mapping;
        walk(0, x_.size - 1, 0, y_.size - 1, mapping);
        return mapping;
    }

    const PostorderView& xview() const { return x_; }
    const PostorderView& yview() const { return y_; }

private:
    PostorderView x_, y_;
    const CostTable& c_;
    int gap_;
    std::unordered_map<std::uint64_t, double> memo_;

    static std::uint64_t pack(int a, int b, int c, int d) {
        return (std::uint64_t(std::uint16_t(a)) << 48) | (std::uint64_t(std::uint16_t(b)) << 32) |
               (std::uint64_t(std::uint16_t(c)) << 16) | std::uint64_t(std::uint16_t(d));
    }

    double fd(int lox, int hix, int loy, int hiy) {
        const bool xe = hix < lox, ye = hiy < loy;
        if (xe && ye) return 0.0;
        auto key = pack(lox, hix + 1, loy, hiy + 1);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        double value;
        if (ye) {
            value = fd(lox, hix - 1, loy, hiy) + c_(x_.labels[hix], gap_);
        } else if (xe) {
            value = fd(lox, hix, loy, hiy - 1) + c_(gap_, y_.labels[hiy]);
        } else {
            value = std::min(fd(lox, hix - 1, loy, hiy) + c_(x_.labels[hix], gap_),
                             fd(lox, hix, loy, hiy - 1) + c_(gap_, y_.labels[hiy]));
            if (x_.lml[hix] == lox && y_.lml[hiy] == loy) {
                value = std::min(value, fd(lox, hix - 1, loy, hiy - 1) +
                                            c_(x_.labels[hix], y_.labels[hiy]));
            } else {
                value = std::min(value, fd(lox, x_.lml[hix] - 1, loy, y_.lml[hiy] - 1) +
                                            fd(x_.lml[hix], hix, y_.lml[hiy], hiy));
            }
        }
        memo_.emplace(key, value);
        return value;
    }

    // Deterministic co-optimal choice: replace/block before delete before insert.
    void walk(int lox, int hix, int loy, int hiy, std::vector<std::pair<int, int>>& mapping) {
        const bool xe = hix < lox, ye = hiy < loy;
        if (xe && ye) return;
        if (ye) return walk(lox, hix - 1, loy, hiy, mapping);
        if (xe) return walk(lox, hix, loy, hiy - 1, mapping);
        const double best = fd(lox, hix, loy, hiy);
        if (x_.lml[hix] == lox && y_.lml[hiy] == loy) {
            const double match = fd(lox, hix - 1, loy, hiy - 1) +
                                 c_(x_.labels[hix], y_.labels[hiy]);
            if (nearly_equal(match, best)) {
                mapping.emplace_back(hix, hiy);
                return walk(lox, hix - 1, loy, hiy - 1, mapping);
            }
        } else {
            const double block = fd(lox, x_.lml[hix] - 1, loy, y_.lml[hiy] - 1) +
                                 fd(x_.lml[hix], hix, y_.lml[hiy], hiy);
            if (nearly_equal(block, best)) {
                walk(x_.lml[hix], hix, y_.lml[hiy], hiy, mapping);
                return walk(lox, x_.lml[hix] - 1, loy, y_.lml[hiy] - 1, mapping);
            }
        }
        if (nearly_equal(fd(lox, hix - 1, loy, hiy) + c_(x_.labels[hix], gap_), best))
            return walk(lox, hix - 1, loy, hiy, mapping);
        return walk(lox, hix, loy, hiy - 1, mapping);
    }
};

}  // namespace

Mapping backtrace_mapping(const DistanceResult& result) {
    SpanSolver solver(result.source, result.target, result.cost);
    if (!nearly_equal(solver.full_distance(), result.distance, 1e-9))
        throw std::logic_error("backtrace: span solver disagrees with the DP distance");
    auto post_pairs = solver.trace();
    Mapping mapping;
    mapping.reserve(post_pairs.size());
    for (auto [pi, pj] : post_pairs)
        mapping.emplace_back(solver.xview().pre_of_post[pi], solver.yview().pre_of_post[pj]);
    std::sort(mapping.begin(), mapping.end());
    return mapping;
}

EditScript backtrace_one(const DistanceResult& result) {
    return script_from_mapping(result.source, result.target, backtrace_mapping(result));
}

// ---------------------------------------------------------------------------
// Scripts and their application to forests.

namespace {

struct SNode {
    int label;
    int tag = -1;  // script_from_mapping bookkeeping: y-node identity
    std::vector<SNode> kids;
};
using SForest = std::vector<SNode>;

SNode snode_from_tree(const Tree& t, int node) {
    SNode n{t.label(node), -1, {}};
    for (int child : t.children(node)) n.kids.push_back(snode_from_tree(t, child));
    return n;
}

void collect_preorder(SNode& node, std::vector<SNode*>& out) {
    out.push_back(&node);
    for (auto& kid : node.kids) collect_preorder(kid, out);
}

std::vector<SNode*> preorder_nodes(SForest& forest) {
    std::vector<SNode*> out;
    for (auto& root : forest) collect_preorder(root, out);
    return out;
}

// parent of each preorder node within the forest, nullptr for roots
void collect_parents(SNode& node, SNode* parent, std::vector<std::pair<SNode*, SNode*>>& out) {
    out.emplace_back(&node, parent);
    for (auto& kid : node.kids) collect_parents(kid, &node, out);
}

struct Located {
    SNode* node;
    SNode* parent;  // nullptr for top level
    int slot;       // index within parent's kids or within the forest roots
    int position;   // forest-wide preorder index
};

Located locate(SForest& forest, int position) {
    std::vector<std::pair<SNode*, SNode*>> flat;
    for (auto& root : forest) collect_parents(root, nullptr, flat);
    if (position < 0 || position >= static_cast<int>(flat.size()))
        throw std::invalid_argument("script: node position " + std::to_string(position) +
                                    " out of range");
    auto [node, parent] = flat[position];
    int slot = 0;
    if (parent) {
        while (&parent->kids[slot] != node) ++slot;
    } else {
        while (&forest[slot] != node) ++slot;
    }
    return {node, parent, slot, position};
}

int forest_size(const SForest& forest) {
    int total = 0;
    std::function<void(const SNode&)> count = [&](const SNode& n) {
        ++total;
        for (const auto& kid : n.kids) count(kid);
    };
    for (const auto& root : forest) count(root);
    return total;
}

void apply_one(SForest& forest, const Edit& edit) {
    switch (edit.kind) {
        case Edit::Kind::Replace: {
            Located at = locate(forest, edit.position);
            if (at.node->label != edit.from_symbol)
                throw std::invalid_argument("script: replace source label mismatch");
            at.node->label = edit.to_symbol;
            break;
        }
        case Edit::Kind::Delete: {
            Located at = locate(forest, edit.position);
            if (at.node->label != edit.from_symbol)
                throw std::invalid_argument("script: delete label mismatch");
            std::vector<SNode> orphans = std::move(at.node->kids);
            auto& siblings = at.parent ? at.parent->kids : forest;
            siblings.erase(siblings.begin() + at.slot);
            siblings.insert(siblings.begin() + at.slot,
                            std::make_move_iterator(orphans.begin()),
                            std::make_move_iterator(orphans.end()));
            break;
        }
        case Edit::Kind::Insert: {
            std::vector<SNode>* siblings;
            if (edit.position < 0) {
                siblings = &forest;
            } else {
                Located at = locate(forest, edit.position);
                siblings = &at.node->kids;
            }
            if (edit.child_slot < 0 || edit.adopt_count < 0 ||
                edit.child_slot + edit.adopt_count > static_cast<int>(siblings->size()))
                throw std::invalid_argument("script: insert slot/adoption out of range");
            SNode fresh{edit.to_symbol, edit.target_node, {}};
            fresh.kids.assign(std::make_move_iterator(siblings->begin() + edit.child_slot),
                              std::make_move_iterator(siblings->begin() + edit.child_slot +
                                                      edit.adopt_count));
            siblings->erase(siblings->begin() + edit.child_slot,
                            siblings->begin() + edit.child_slot + edit.adopt_count);
            siblings->insert(siblings->begin() + edit.child_slot, std::move(fresh));
            break;
        }
    }
}

Tree tree_from_snode(const SNode& node, const AlphabetPtr& alphabet) {
    std::vector<int> labels, parents;
    std::function<void(const SNode&, int)> walk = [&](const SNode& n, int parent) {
        int self = static_cast<int>(labels.size());
        labels.push_back(n.label);
        parents.push_back(parent);
        for (const auto& kid : n.kids) walk(kid, self);
    };
    walk(node, -1);
    return Tree::build(std::move(labels), std::move(parents), alphabet);
}

SForest sforest_from(const Forest& forest) {
    SForest out;
    for (const auto& t : forest) out.push_back(snode_from_tree(t, 0));
    return out;
}

Forest forest_from(const SForest& forest, const AlphabetPtr& alphabet) {
    Forest out;
    for (const auto& root : forest) out.push_back(tree_from_snode(root, alphabet));
    return out;
}

}  // namespace

double script_cost(const EditScript& script, const CostTable& c) {
    double total = 0.0;
    for (const auto& edit : script.edits) total += c(edit.from_symbol, edit.to_symbol);
    return total;
}

Forest apply_script(const Forest& source, const EditScript& script, const AlphabetPtr& alphabet) {
    SForest state = sforest_from(source);
    for (const auto& edit : script.edits) apply_one(state, edit);
    return forest_from(state, alphabet);
}

bool script_transforms(const Tree& x, const EditScript& script, const Tree& y) {
    Forest result;
    try {
        result = apply_script({x}, script, x.alphabet());
    } catch (const std::invalid_argument&) {
        return false;
    }
    return result.size() == 1 && result[0] == y;
}

Eigen::MatrixXd script_key_counts(const EditScript& script, const AlphabetPtr& alphabet) {
    const auto n = static_cast<Eigen::Index>(alphabet->extended_size());
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);
    for (const auto& edit : script.edits) counts(edit.from_symbol, edit.to_symbol) += 1.0;
    return counts;
}

EditScript script_from_mapping(const Tree& x, const Tree& y, const Mapping& mapping) {
    const int gap = x.alphabet()->gap_index();
    std::vector<int> x_to_y(x.size(), -1), y_to_x(y.size(), -1);
    for (auto [xi, yj] : mapping) {
        if (x_to_y[xi] != -1 || y_to_x[yj] != -1)
            throw std::invalid_argument("mapping is not one-to-one");
        x_to_y[xi] = yj;
        y_to_x[yj] = xi;
    }

    // subtree end (exclusive) per y node, preorder
    std::vector<int> y_end(y.size());
    std::function<int(int)> fill_end = [&](int node) {
        int end = node + 1;
        for (int kid : y.children(node)) end = fill_end(kid);
        y_end[node] = end;
        return end;
    };
    fill_end(0);
    auto y_is_ancestor = [&](int anc, int node) { return anc <= node && node < y_end[anc]; };

    EditScript script;
    SForest state = {snode_from_tree(x, 0)};
    {  // tag with x identities for lookup during deletes/replaces
        auto nodes = preorder_nodes(state);
        for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i]->tag = static_cast<int>(i);
    }
    auto position_of_tag = [&](int tag) {
        auto nodes = preorder_nodes(state);
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i]->tag == tag) return static_cast<int>(i);
        throw std::logic_error("script_from_mapping: lost track of a node");
    };

    // deletions and replacements in x-preorder
    for (int xi = 0; xi < x.size(); ++xi) {
        if (x_to_y[xi] == -1) {
            Edit edit{Edit::Kind::Delete, x.label(xi), gap, xi, -1, position_of_tag(xi), 0, 0};
            script.edits.push_back(edit);
            apply_one(state, edit);
        }
    }
    // x tags are stable under deletes (tags live on nodes); retag to y ids now
    for (int xi = 0; xi < x.size(); ++xi) {
        int yj = x_to_y[xi];
        if (yj == -1) continue;
        int pos = position_of_tag(xi);
        Edit edit{Edit::Kind::Replace, x.label(xi), y.label(yj), xi, yj, pos, 0, 0};
        script.edits.push_back(edit);
        apply_one(state, edit);
        auto nodes = preorder_nodes(state);
        nodes[pos]->tag = y.size() + yj;  // shift to keep x/y tag spaces apart
    }

    // insertions in y-preorder; every present node now carries tag y.size()+yid
    auto present_position = [&](int yid) { return position_of_tag(y.size() + yid); };
    for (int yj = 0; yj < y.size(); ++yj) {
        if (y_to_x[yj] != -1) continue;
        int parent = y.parent(yj);
        std::vector<SNode>* siblings;
        int parent_position = -1;
        if (parent == -1) {
            siblings = &state;
        } else {
            parent_position = present_position(parent);
            auto nodes = preorder_nodes(state);
            siblings = &nodes[parent_position]->kids;
        }
        // adopted kids: current siblings whose y identity descends from yj
        int slot = -1, adopt = 0;
        int before = 0;
        for (std::size_t s = 0; s < siblings->size(); ++s) {
            int tag = (*siblings)[s].tag - y.size();
            if (y_is_ancestor(yj, tag)) {
                if (slot < 0) slot = static_cast<int>(s);
                ++adopt;
            } else if (slot < 0 && tag < yj) {
                ++before;
            }
        }
        if (slot < 0) slot = before;
        Edit edit{Edit::Kind::Insert, gap, y.label(yj), -1, yj, parent_position, slot, adopt};
        script.edits.push_back(edit);
        apply_one(state, edit);
        auto nodes = preorder_nodes(state);
        for (auto* n : nodes)
            if (n->tag == yj) n->tag = y.size() + yj;
    }
    return script;
}

// ---------------------------------------------------------------------------
// Co-optimal summaries.

namespace {

void require_pseudometric(const CostTable& c, const char* who) {
    if (!check_pseudometric(c).is_pseudometric())
        throw std::invalid_argument(std::string(who) +
                                    ": cost must be a pseudo-metric (run check_pseudometric)");
}

}  // namespace

ScriptSummary summarize_cooptimal(const Tree& x, const Tree& y, const CostTable& c) {
    require_same_alphabet(x, y, c);
    require_pseudometric(c, "summarize_cooptimal");
    PostorderView xv(x), yv(y);
    ZsEngine<true> engine(xv, yv, c);
    engine.run();
    if (engine.mapping_count <= 0.0)
        throw std::logic_error("summarize_cooptimal: no co-optimal mapping counted");
    return ScriptSummary{x.alphabet(), engine.summary_sum / engine.mapping_count};
}

std::uint64_t count_cooptimal(const Tree& x, const Tree& y, const CostTable& c) {
    require_same_alphabet(x, y, c);
    require_pseudometric(c, "count_cooptimal");
    PostorderView xv(x), yv(y);
    ZsEngine<true> engine(xv, yv, c);
    engine.run();
    const double n = engine.mapping_count;
    if (n < 0.5 || n >= 9.0e15 || std::abs(n - std::round(n)) > 1e-6)
        throw std::runtime_error("count_cooptimal: count is not an exactly representable integer");
    return static_cast<std::uint64_t>(std::llround(n));
}

// ---------------------------------------------------------------------------
// Oracles.

std::pair<double, std::vector<EditScript>> enumerate_mappings_oracle(const Tree& x, const Tree& y,
                                                                     const CostTable& c) {
    require_same_alphabet(x, y, c);
    if (x.size() * y.size() > 64)
        throw std::invalid_argument("enumerate_mappings_oracle: size guard exceeded (|x|*|y| > 64)");

    PostorderView xv(x), yv(y);
    const int gap = c.alphabet()->gap_index();

    // pairwise Tai conditions in (preorder, postorder) coordinates
    auto consistent = [&](int xi, int yj, int xi2, int yj2) {
        bool pre = (xi < xi2) == (yj < yj2);
        bool post = (xv.post_of_pre[xi] < xv.post_of_pre[xi2]) ==
                    (yv.post_of_pre[yj] < yv.post_of_pre[yj2]);
        return pre && post && xi != xi2 && yj != yj2;
    };

    std::vector<Mapping> complete;
    Mapping current;
    std::vector<char> y_used(y.size(), 0);
    std::function<void(int)> extend = [&](int xi) {
        if (xi == x.size()) {
            complete.push_back(current);
            return;
        }
        extend(xi + 1);  // xi unmatched
        for (int yj = 0; yj < y.size(); ++yj) {
            if (y_used[yj]) continue;
            bool ok = true;
            for (auto [pxi, pyj] : current) ok = ok && consistent(pxi, pyj, xi, yj);
            if (!ok) continue;
            current.emplace_back(xi, yj);
            y_used[yj] = 1;
            extend(xi + 1);
            y_used[yj] = 0;
            current.pop_back();
        }
    };
    extend(0);

    auto mapping_cost = [&](const Mapping& m) {
        std::vector<char> xm(x.size(), 0), ym(y.size(), 0);
        double total = 0.0;
        for (auto [xi, yj] : m) {
            xm[xi] = ym[yj] = 1;
            total += c(x.label(xi), y.label(yj));
        }
        for (int i = 0; i < x.size(); ++i)
            if (!xm[i]) total += c(x.label(i), gap);
        for (int j = 0; j < y.size(); ++j)
            if (!ym[j]) total += c(gap, y.label(j));
        return total;
    };

    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : complete) best = std::min(best, mapping_cost(m));
    std::vector<EditScript> scripts;
    for (const auto& m : complete)
        if (nearly_equal(mapping_cost(m), best)) scripts.push_back(script_from_mapping(x, y, m));
    return {best, std::move(scripts)};
}

namespace {

std::string snode_string(const SNode& n, const Alphabet& alphabet) {
    std::string out = alphabet.symbol(n.label);
    if (!n.kids.empty()) {
        out += '(';
        for (std::size_t i = 0; i < n.kids.size(); ++i) {
            if (i) out += ',';
            out += snode_string(n.kids[i], alphabet);
        }
        out += ')';
    }
    return out;
}

std::string sforest_key(const SForest& forest, const Alphabet& alphabet) {
    std::string out;
    for (std::size_t i = 0; i < forest.size(); ++i) {
        if (i) out += ';';
        out += snode_string(forest[i], alphabet);
    }
    return out;
}

// all (successor, edge weight) pairs from one forest state
void successors(const SForest& state, const CostTable& c, int size_cap,
                const std::function<void(SForest, double)>& emit) {
    const int symbols = static_cast<int>(c.alphabet()->size());
    const int gap = c.alphabet()->gap_index();
    const int total = forest_size(state);

    std::vector<int> labels;
    {
        std::function<void(const SNode&)> walk = [&](const SNode& n) {
            labels.push_back(n.label);
            for (const auto& kid : n.kids) walk(kid);
        };
        for (const auto& root : state) walk(root);
    }

    // relabel or delete any node
    for (int pos = 0; pos < total; ++pos) {
        const int old_label = labels[pos];
        for (int s = 0; s < symbols; ++s) {
            if (s == old_label) continue;
            SForest relabeled = state;
            locate(relabeled, pos).node->label = s;
            emit(std::move(relabeled), c(old_label, s));
        }
        SForest shrunk = state;
        Located target = locate(shrunk, pos);
        std::vector<SNode> orphans = std::move(target.node->kids);
        auto& siblings = target.parent ? target.parent->kids : shrunk;
        siblings.erase(siblings.begin() + target.slot);
        siblings.insert(siblings.begin() + target.slot, std::make_move_iterator(orphans.begin()),
                        std::make_move_iterator(orphans.end()));
        emit(std::move(shrunk), c(old_label, gap));
    }

    if (total + 1 > size_cap) return;

    // insert any symbol at any slot, adopting any consecutive run
    auto insert_under = [&](const std::vector<int>& path) {
        // path addresses a kid list: empty = top level
        for (int s = 0; s < symbols; ++s) {
            SForest base = state;
            std::vector<SNode>* siblings = &base;
            SNode* holder = nullptr;
            for (int step : path) {
                holder = &(*siblings)[step];
                siblings = &holder->kids;
            }
            const int width = static_cast<int>(siblings->size());
            for (int slot = 0; slot <= width; ++slot) {
                for (int adopt = 0; adopt + slot <= width; ++adopt) {
                    SForest copy = base;
                    std::vector<SNode>* sibs = &copy;
                    for (int step : path) sibs = &(*sibs)[step].kids;
                    SNode fresh{s, -1, {}};
                    fresh.kids.assign(std::make_move_iterator(sibs->begin() + slot),
                                      std::make_move_iterator(sibs->begin() + slot + adopt));
                    sibs->erase(sibs->begin() + slot, sibs->begin() + slot + adopt);
                    sibs->insert(sibs->begin() + slot, std::move(fresh));
                    emit(std::move(copy), c(gap, s));
                }
            }
        }
    };
    std::vector<std::vector<int>> kid_lists{{}};
    std::function<void(const SForest&, std::vector<int>)> walk_lists =
        [&](const SForest& nodes, std::vector<int> path) {
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                auto next = path;
                next.push_back(static_cast<int>(i));
                kid_lists.push_back(next);
                walk_lists(nodes[i].kids, next);
            }
        };
    walk_lists(state, {});
    for (const auto& path : kid_lists) insert_under(path);
}

}  // namespace

double true_distance_oracle(const Tree& x, const Tree& y, const CostTable& c, int size_cap) {
    require_same_alphabet(x, y, c);
    if (c.has_negative_entries())
        throw std::invalid_argument("true_distance_oracle: requires nonnegative costs");
    if (size_cap < std::max(x.size(), y.size()))
        throw std::invalid_argument("true_distance_oracle: size cap below input tree size");

    const Alphabet& alphabet = *c.alphabet();
    SForest start = {snode_from_tree(x, 0)};
    const std::string goal = sforest_key({snode_from_tree(y, 0)}, alphabet);

    std::unordered_map<std::string, double> dist;
    using Entry = std::pair<double, std::string>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    std::unordered_map<std::string, SForest> states;

    const std::string start_key = sforest_key(start, alphabet);
    dist[start_key] = 0.0;
    states[start_key] = std::move(start);
    queue.emplace(0.0, start_key);

    while (!queue.empty()) {
        auto [d, key] = queue.top();
        queue.pop();
        if (d > dist[key]) continue;
        if (key == goal) return d;
        const SForest state = states[key];
        successors(state, c, size_cap, [&](SForest next, double weight) {
            std::string next_key = sforest_key(next, alphabet);
            double nd = d + weight;
            auto it = dist.find(next_key);
            if (it == dist.end() || nd < it->second) {
                dist[next_key] = nd;
                states[next_key] = std::move(next);
                queue.emplace(nd, std::move(next_key));
            }
        });
    }
    throw std::runtime_error("true_distance_oracle: size cap " + std::to_string(size_cap) +
                             " disconnects the input trees");
}

Eigen::MatrixXd distance_matrix(const Dataset& dataset, const CostTable& c) {
    const std::size_t n = dataset.size();
    Eigen::MatrixXd d(n, n);
    std::vector<std::pair<int, int>> work;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            work.emplace_back(static_cast<int>(i), static_cast<int>(j));
    parallel_for(work.size(), [&](std::size_t w) {
        auto [i, j] = work[w];
        d(i, j) = i == j ? 0.0 : ted_distance(dataset.trees[i], dataset.trees[j], c);
    });
    return d;
}

}  // namespace tedlearn
