#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tedlearn/gesl.hpp"

namespace tedlearn {

/// Machine-checkable verdict of one constructive demonstration.
struct DemoReport {
    std::string name;
    std::vector<std::pair<std::string, double>> quantities;
    std::vector<std::pair<std::string, bool>> assertions;

    void record(const std::string& label, double value) { quantities.emplace_back(label, value); }
    void check(const std::string& description, bool ok) { assertions.emplace_back(description, ok); }
    bool passed() const;
    std::string to_text() const;
};

/// Triangle-violating cost: the DP value strictly exceeds the shortest-path
/// distance on both the single-node and two-node instances; a metric control
/// agrees exactly.
DemoReport dp_overestimation_demo();

/// A symmetric negative entry lets a valid script's cost drop below any
/// bound. Refuses (fails its guard assertion) on nonnegative costs.
DemoReport negativity_degeneracy_demo(double bound);

/// c(x,x) > 0 with the triangle inequality intact forces d(x,x) = c(x,x).
DemoReport self_identity_demo();

/// Asymmetric c with the triangle inequality intact yields asymmetric d.
DemoReport symmetry_demo();

/// Full learning pipeline on the four-tree instance: fits both the plain
/// single-script cost and the all-scripts metric-enforced variant, checks the
/// learned tables and every loss value, the strict worsening inequalities,
/// and the zero-cost connectivity of the degenerate network.
DemoReport gesl_worsening_demo(double beta);

std::vector<std::string> demo_names();

/// Runs a demo by name with its default parameters; throws on unknown names.
DemoReport run_demo(const std::string& name);

}  // namespace tedlearn
