#include "tedlearn/verify.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tedlearn/util.hpp"

namespace tedlearn {

bool DemoReport::passed() const {
    for (const auto& [what, ok] : assertions)
        if (!ok) return false;
    return !assertions.empty();
}

std::string DemoReport::to_text() const {
    std::ostringstream out;
    out << "demo " << name << '\n';
    for (const auto& [label, value] : quantities)
        out << "  value  " << label << " = " << format_double(value, 12) << '\n';
    for (const auto& [what, ok] : assertions)
        out << "  assert " << what << " : " << (ok ? "pass" : "FAIL") << '\n';
    out << "  overall: " << (passed() ? "pass" : "FAIL") << '\n';
    return out.str();
}

namespace {

Tree parse(const std::string& text, const AlphabetPtr& alphabet) {
    return Tree::parse(text, alphabet);
}

}  // namespace

DemoReport dp_overestimation_demo() {
    DemoReport report;
    report.name = "dp_overestimation";

    auto alphabet = make_alphabet({"a", "b", "c"});
    CostTable cost = CostTable::uniform(alphabet, 1.0);
    const int a = 0, b = 1, c = 2;
    cost.at(a, c) = cost.at(c, a) = 0.3;
    cost.at(c, b) = cost.at(b, c) = 0.3;

    MetricAudit audit = check_pseudometric(cost);
    report.check("constructed cost violates the triangle inequality", !audit.triangle);
    report.check("constructed cost keeps symmetry and self-identity",
                 audit.symmetric && audit.self_identical && audit.nonnegative);

    Tree xa = parse("a", alphabet), xb = parse("b", alphabet);
    double dp_single = ted_dp(xa, xb, cost).distance;
    double oracle_single = true_distance_oracle(xa, xb, cost, 2);
    report.record("dp_single_node", dp_single);
    report.record("oracle_single_node", oracle_single);
    report.check("single node: dp value is 1.0", nearly_equal(dp_single, 1.0));
    report.check("single node: shortest-path value is 0.6", nearly_equal(oracle_single, 0.6));
    report.check("single node: dp overestimates", dp_single > oracle_single + 1e-12);

    Tree xac = parse("a(c)", alphabet), xbc = parse("b(c)", alphabet);
    double dp_two = ted_dp(xac, xbc, cost).distance;
    double oracle_two = true_distance_oracle(xac, xbc, cost, 3);
    report.record("dp_two_node", dp_two);
    report.record("oracle_two_node", oracle_two);
    report.check("a(c)/b(c): dp value is 1.0", nearly_equal(dp_two, 1.0));
    report.check("a(c)/b(c): shortest-path value is 0.6", nearly_equal(oracle_two, 0.6));
    report.check("a(c)/b(c): same 0.4 gap", nearly_equal(dp_two - oracle_two, 0.4));

    // metric control: close the violated triangle, the two routes agree
    CostTable control = cost;
    control.at(a, b) = control.at(b, a) = 0.6;
    report.check("control cost is a pseudo-metric", check_pseudometric(control).is_pseudometric());
    double dp_control = ted_dp(xa, xb, control).distance;
    double oracle_control = true_distance_oracle(xa, xb, control, 2);
    report.record("dp_control", dp_control);
    report.check("metric control: dp equals the oracle",
                 nearly_equal(dp_control, oracle_control));
    double dp_control_two = ted_dp(xac, xbc, control).distance;
    report.check("metric control on a(c)/b(c): dp equals the oracle",
                 nearly_equal(dp_control_two, true_distance_oracle(xac, xbc, control, 3)));
    return report;
}

DemoReport negativity_degeneracy_demo(double bound) {
    DemoReport report;
    report.name = "negativity_degeneracy";
    report.record("bound", bound);

    auto alphabet = make_alphabet({"x", "y"});
    const int x = 0, y = 1, gap = alphabet->gap_index();
    Eigen::MatrixXd entries(3, 3);
    entries << 0.0, -0.1, 0.05,
              -0.1,  0.0, 0.05,
              0.05, 0.05, 0.0;
    CostTable cost(alphabet, entries);

    const double cycle = cost(x, y) + cost(y, x);
    report.check("cost has a negative symmetric pair", cost(x, y) < 0.0 && cost(y, x) < 0.0);
    report.check("replace cycle strictly reduces cost", cycle < 0.0);
    if (cycle >= 0.0) return report;  // refuse: no degeneracy constructible

    Tree source = parse("x", alphabet), target = parse("y", alphabet);
    // base script: one replacement x -> y
    EditScript script;
    script.edits.push_back({Edit::Kind::Replace, x, y, 0, 0, 0, 0, 0});
    double base_cost = script_cost(script, cost);
    report.record("base_script_cost", base_cost);

    long cycles = 0;
    if (base_cost >= bound) {
        const double wrap = cost(gap, x) + cost(x, gap);
        cycles = static_cast<long>(std::floor((base_cost + wrap - bound) / -cycle)) + 1;
    }
    report.record("replace_cycles", static_cast<double>(cycles));
    if (cycles > 0) {
        // insert a fresh leaf next to the root, pump it, delete it again
        script.edits.push_back({Edit::Kind::Insert, gap, x, -1, -1, -1, 1, 0});
        for (long i = 0; i < cycles; ++i) {
            script.edits.push_back({Edit::Kind::Replace, x, y, -1, -1, 1, 0, 0});
            script.edits.push_back({Edit::Kind::Replace, y, x, -1, -1, 1, 0, 0});
        }
        script.edits.push_back({Edit::Kind::Delete, x, gap, -1, -1, 1, 0, 0});
    }

    double total = script_cost(script, cost);
    report.record("script_cost", total);
    report.check("script cost is below the bound", total < bound);
    report.check("script still transforms x into y", script_transforms(source, script, target));
    return report;
}

DemoReport self_identity_demo() {
    DemoReport report;
    report.name = "self_identity";

    auto alphabet = make_alphabet({"x"});
    Eigen::MatrixXd entries(2, 2);
    entries << 0.2, 1.0,
               1.0, 0.0;
    CostTable cost(alphabet, entries);
    MetricAudit audit = check_pseudometric(cost);
    report.check("triangle inequality holds", audit.triangle);
    report.check("self-identity is violated by construction", !audit.self_identical);

    Tree x = parse("x", alphabet);
    double d = ted_dp(x, x, cost).distance;
    report.record("d(x,x)", d);
    report.check("d(x,x) equals c(x,x) = 0.2", nearly_equal(d, 0.2));

    CostTable control = cost;
    control.at(0, 0) = 0.0;
    double d_control = ted_dp(x, x, control).distance;
    report.record("control d(x,x)", d_control);
    report.check("control with c(x,x)=0 gives 0", nearly_equal(d_control, 0.0));

    Tree xx = parse("x(x)", alphabet);
    double d_two = ted_dp(xx, xx, cost).distance;
    report.record("d(x(x),x(x))", d_two);
    report.check("two-node tree pays twice: 0.4", nearly_equal(d_two, 0.4));
    return report;
}

DemoReport symmetry_demo() {
    DemoReport report;
    report.name = "symmetry";

    auto alphabet = make_alphabet({"x", "y", "z"});
    CostTable cost = CostTable::uniform(alphabet, 1.0);
    cost.at(0, 1) = 0.3;  // c(x,y)
    cost.at(1, 0) = 0.7;  // c(y,x)
    MetricAudit audit = check_pseudometric(cost);
    report.check("triangle inequality holds", audit.triangle);
    report.check("symmetry is violated by construction", !audit.symmetric);

    Tree x = parse("x", alphabet), y = parse("y", alphabet);
    double forward = ted_dp(x, y, cost).distance;
    double backward = ted_dp(y, x, cost).distance;
    report.record("d(x,y)", forward);
    report.record("d(y,x)", backward);
    report.check("d(x,y) = 0.3", nearly_equal(forward, 0.3));
    report.check("d(y,x) = 0.7", nearly_equal(backward, 0.7));
    report.check("asymmetry propagates", forward < backward);

    CostTable control = cost;
    control.at(1, 0) = 0.3;
    report.check("symmetric control gives equal distances",
                 nearly_equal(ted_dp(x, y, control).distance,
                              ted_dp(y, x, control).distance));

    Tree xz = parse("x(z)", alphabet), yz = parse("y(z)", alphabet);
    double fwd_two = ted_dp(xz, yz, cost).distance;
    double bwd_two = ted_dp(yz, xz, cost).distance;
    report.record("d(x(z),y(z))", fwd_two);
    report.record("d(y(z),x(z))", bwd_two);
    report.check("gap preserved on larger trees",
                 nearly_equal(fwd_two, 0.3) && nearly_equal(bwd_two, 0.7));
    return report;
}

namespace {

// The four-record instance: trees 1(2), 2, 3, 3 with classes {1,1,2,2}.
Dataset worsening_dataset() {
    Dataset d;
    d.alphabet = make_alphabet({"1", "2", "3"});
    for (const char* text : {"1(2)", "2", "3", "3"})
        d.trees.push_back(Tree::parse(text, d.alphabet));
    d.labels = {"1", "1", "2", "2"};
    return d;
}

CostTable table_one_middle(const AlphabetPtr& alphabet) {
    const double h = std::log(2.0) / 2.0;
    Eigen::MatrixXd m(4, 4);
    m << 0, 0,     h,            0,
         0, 0,     std::log(2.0), h,
         h, 0,     0,            0,
         0, h,     0,            0;
    return CostTable(alphabet, m);
}

CostTable table_one_bottom(const AlphabetPtr& alphabet) {
    const double h = std::log(2.0) / 2.0;
    const double g = std::log(2.0);
    Eigen::MatrixXd m(4, 4);
    m << 0, 0, h, 0,
         0, 0, g, h,
         h, g, 0, h,
         0, h, h, 0;
    return CostTable(alphabet, m);
}

}  // namespace

DemoReport gesl_worsening_demo(double beta) {
    const double log2 = std::log(2.0);
    if (!(beta > 0.0 && beta < 1.0 / (5.0 * log2)))
        throw std::invalid_argument("gesl_worsening_demo: beta must lie in (0, 1/(5 log 2))");

    DemoReport report;
    report.name = "gesl_worsening";
    report.record("beta", beta);

    Dataset data = worsening_dataset();
    CostTable c0 = CostTable::uniform(data.alphabet, log2);
    Eigen::MatrixXd d0 = distance_matrix(data, c0);
    PairSet pairs = select_pairs(data, d0);

    const std::vector<std::pair<int, int>> expected_p = {{0, 1}, {1, 0}, {2, 3}, {3, 2}};
    const std::vector<std::pair<int, int>> expected_n = {{0, 2}, {1, 2}, {2, 0}, {3, 0}};
    report.check("selected pairs match the nearest/furthest rule",
                 pairs.positives == expected_p && pairs.negatives == expected_n);

    GeslConfig config;
    config.beta = beta;
    config.script_mode = GeslConfig::ScriptMode::Single;
    GeslResult fit = gesl_fit(data, pairs, c0, config);

    CostTable c1 = table_one_middle(data.alphabet);
    double fit_gap = (fit.cost.entries() - c1.entries()).cwiseAbs().maxCoeff();
    report.record("fit_max_abs_gap_vs_c1", fit_gap);
    report.record("fit_eta", fit.eta);
    report.check("single-script fit reaches the known optimum (5e-3)", fit_gap <= 5e-3);
    report.check("fitted eta is 0 (5e-3)", std::abs(fit.eta) <= 5e-3);

    MetricAudit audit = check_pseudometric(c1);
    report.check("learned cost is not symmetric", !audit.symmetric);
    report.check("learned cost violates the triangle inequality", !audit.triangle);

    LossComparison losses = loss_comparison_report(data, pairs, c1, 0.0, c0, config);
    const double expected_pseudo = 2.0 * beta * log2 * log2;
    const double expected_true = expected_pseudo + 4.0 * log2;
    const double expected_baseline = 12.0 * beta * log2 * log2 + 2.0 * log2;
    report.record("loss_pseudo_c1", losses.pseudo_loss);
    report.record("loss_true_c1", losses.true_loss);
    report.record("loss_dp_c0_eta0", losses.baseline_loss);
    report.check("pseudo loss = 2 beta log^2 2",
                 std::abs(losses.pseudo_loss - expected_pseudo) <= 1e-3);
    report.check("true loss = 2 beta log^2 2 + 4 log 2",
                 std::abs(losses.true_loss - expected_true) <= 1e-3);
    report.check("baseline loss = 12 beta log^2 2 + 2 log 2",
                 std::abs(losses.baseline_loss - expected_baseline) <= 1e-3);
    report.check("learning worsened the true loss vs the pseudo loss",
                 losses.worsened_vs_pseudo());
    report.check("learning worsened the true loss vs the default cost",
                 losses.worsened_vs_baseline());

    // zero-cost connectivity of the degenerate network
    double d12 = true_distance_oracle(data.trees[0], data.trees[1], c1, 3);
    double d13 = true_distance_oracle(data.trees[0], data.trees[2], c1, 3);
    double d23 = true_distance_oracle(data.trees[1], data.trees[2], c1, 3);
    report.record("network_d(x1,x2)", d12);
    report.record("network_d(x1,x3)", d13);
    report.record("network_d(x2,x3)", d23);
    report.check("degenerate network connects x1,x2,x3 at zero cost",
                 std::abs(d12) <= 1e-12 && std::abs(d13) <= 1e-12 && std::abs(d23) <= 1e-12);

    // all-scripts + metric-enforced variant
    GeslConfig remark = config;
    remark.script_mode = GeslConfig::ScriptMode::AllCooptimal;
    remark.enforce_metric = true;
    GeslResult fit2 = gesl_fit(data, pairs, c0, remark);
    CostTable c2 = table_one_bottom(data.alphabet);
    double fit2_gap = (fit2.cost.entries() - c2.entries()).cwiseAbs().maxCoeff();
    report.record("fit_max_abs_gap_vs_c2", fit2_gap);
    report.check("metric-enforced all-scripts fit reaches the known optimum (5e-3)",
                 fit2_gap <= 5e-3);
    report.check("metric-enforced table is a pseudo-metric",
                 check_pseudometric(fit2.cost, 1e-9).is_pseudometric());

    LossComparison losses2 = loss_comparison_report(data, pairs, c2, 0.0, c0, remark);
    const double expected_remark = 3.5 * beta * log2 * log2;
    report.record("loss_pseudo_c2", losses2.pseudo_loss);
    report.record("loss_true_c2", losses2.true_loss);
    report.check("remark variant: pseudo loss = 3.5 beta log^2 2",
                 std::abs(losses2.pseudo_loss - expected_remark) <= 1e-3);
    report.check("remark variant: pseudo and true losses coincide",
                 std::abs(losses2.pseudo_loss - losses2.true_loss) <= 1e-9);
    return report;
}

std::vector<std::string> demo_names() {
    return {"dp_overestimation", "negativity_degeneracy", "self_identity", "symmetry",
            "gesl_worsening"};
}

DemoReport run_demo(const std::string& name) {
    if (name == "dp_overestimation") return dp_overestimation_demo();
    if (name == "negativity_degeneracy") return negativity_degeneracy_demo(-10.0);
    if (name == "self_identity") return self_identity_demo();
    if (name == "symmetry") return symmetry_demo();
    if (name == "gesl_worsening") return gesl_worsening_demo(0.1);
    throw std::invalid_argument("unknown demo \"" + name + "\"");
}

}  // namespace tedlearn
