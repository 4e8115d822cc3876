#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tedlearn::cli {

// Exit codes: 0 success/pass, 1 property failure, 2 usage or input error.
constexpr int kExitOk = 0;
constexpr int kExitPropertyFailure = 1;
constexpr int kExitUsage = 2;

struct DistOptions {
    std::string dataset_path;
    std::string cost;  // path, "default-log2", or "simplex"
    std::string out;
};
int cmd_dist(const DistOptions& opt, std::ostream& log);

struct LearnOptions {
    std::string dataset_path;
    std::string method;   // "gesl" | "lvq"
    std::string variant;  // G1 G2 G3 L1 L2
    double beta = 0.1;
    double gamma = 0.0;   // 0 = default log 2
    bool enforce_metric = false;
    std::uint64_t seed = 1;
    std::string out_dir;
    long max_iters = 0;   // 0 = method default
};
int cmd_learn(const LearnOptions& opt, std::ostream& log);

struct CheckMetricOptions {
    std::string cost_path;
};
int cmd_check_metric(const CheckMetricOptions& opt, std::ostream& log);

struct VerifyOptions {
    std::string which = "all";
    double beta = 0.1;
    double bound = -10.0;
};
int cmd_verify(const VerifyOptions& opt, std::ostream& log);

struct ExperimentOptions {
    std::string dataset_path;
    std::vector<std::string> variants;  // empty = all five
    int folds = 5;
    std::uint64_t seed = 1;
    std::string out_prefix;
    double beta = 0.1;
    int max_iters = 40;
};
int cmd_experiment(const ExperimentOptions& opt, std::ostream& log);

struct SimplexOptions {
    int dimension = 0;
};
int cmd_simplex(const SimplexOptions& opt, std::ostream& log);

struct GradcheckOptions {
    int dimension = 4;
    int trials = 50;
    double step = 1e-5;
    std::uint64_t seed = 1;
};
int cmd_gradcheck(const GradcheckOptions& opt, std::ostream& log);

}  // namespace tedlearn::cli
