#include "tedlearn/costs.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tedlearn/util.hpp"

namespace tedlearn {

CostTable::CostTable(AlphabetPtr alphabet, Eigen::MatrixXd entries)
    : alphabet_(std::move(alphabet)), entries_(std::move(entries)) {
    const auto n = static_cast<Eigen::Index>(alphabet_->extended_size());
    if (entries_.rows() != n || entries_.cols() != n)
        throw std::invalid_argument("cost table: expected a " + std::to_string(n) + "x" +
                                    std::to_string(n) + " matrix");
    if (!entries_.allFinite()) throw std::invalid_argument("cost table: non-finite entry");
}

CostTable CostTable::uniform(AlphabetPtr alphabet, double off_diagonal) {
    const auto n = static_cast<Eigen::Index>(alphabet->extended_size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, off_diagonal);
    m.diagonal().setZero();
    return CostTable(std::move(alphabet), std::move(m));
}

CostTable CostTable::zero(AlphabetPtr alphabet) {
    const auto n = static_cast<Eigen::Index>(alphabet->extended_size());
    return CostTable(std::move(alphabet), Eigen::MatrixXd::Zero(n, n));
}

std::string CostTable::to_text() const {
    std::ostringstream out;
    const int n = extended_size();
    out << "cost";
    for (int j = 0; j < n; ++j) out << ' ' << alphabet_->symbol(j);
    out << '\n';
    for (int i = 0; i < n; ++i) {
        out << alphabet_->symbol(i);
        for (int j = 0; j < n; ++j) out << ' ' << format_double(entries_(i, j));
        out << '\n';
    }
    return out.str();
}

CostTable CostTable::from_text(const std::string& text) {
    std::istringstream in(text);
    std::string head;
    if (!(in >> head) || head != "cost")
        throw std::runtime_error("cost table parse error: expected leading \"cost\" header");
    std::string line;
    std::getline(in, line);
    std::istringstream header(line);
    std::vector<std::string> columns;
    std::string token;
    while (header >> token) columns.push_back(token);
    if (columns.empty() || columns.back() != kGapToken)
        throw std::runtime_error("cost table parse error: header must end with \"-\"");
    columns.pop_back();
    auto alphabet = make_alphabet(columns);
    const int n = static_cast<int>(alphabet->extended_size());
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
        std::string row_symbol;
        if (!(in >> row_symbol)) throw std::runtime_error("cost table parse error: truncated rows");
        const std::string expected = alphabet->symbol(i);
        if (row_symbol != expected)
            throw std::runtime_error("cost table parse error: row header \"" + row_symbol +
                                     "\", expected \"" + expected + "\"");
        for (int j = 0; j < n; ++j) {
            if (!(in >> m(i, j)))
                throw std::runtime_error("cost table parse error: truncated row \"" + expected + "\"");
        }
    }
    return CostTable(std::move(alphabet), std::move(m));
}

void CostTable::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write cost table: " + path);
    out << to_text();
}

CostTable CostTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open cost table: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_text(buffer.str());
}

MetricAudit check_pseudometric(const CostTable& c, double tol) {
    MetricAudit audit;
    const int n = c.extended_size();
    for (int x = 0; x < n; ++x) {
        if (std::abs(c(x, x)) > tol) {
            audit.self_identical = false;
            audit.nonzero_diagonal.push_back({x, x, c(x, x)});
        }
        for (int y = 0; y < n; ++y) {
            if (c(x, y) < -tol) {
                audit.nonnegative = false;
                audit.negative_entries.push_back({x, y, c(x, y)});
            }
            if (x < y && std::abs(c(x, y) - c(y, x)) > tol) {
                audit.symmetric = false;
                audit.asymmetric_pairs.push_back({x, y, c(x, y), c(y, x)});
            }
            for (int z = 0; z < n; ++z) {
                double rhs = c(x, y) + c(y, z);
                if (c(x, z) > rhs + tol) {
                    audit.triangle = false;
                    audit.triangle_violations.push_back({x, z, y, c(x, z), rhs});
                }
            }
        }
    }
    return audit;
}

std::string MetricAudit::to_text(const Alphabet& alphabet) const {
    std::ostringstream out;
    auto sym = [&](int i) { return alphabet.symbol(i); };
    out << "non-negativity: " << (nonnegative ? "ok" : "violated") << '\n';
    for (const auto& w : negative_entries)
        out << "  c(" << sym(w.x) << "," << sym(w.y) << ") = " << format_double(w.value, 12) << '\n';
    out << "self-identity: " << (self_identical ? "ok" : "violated") << '\n';
    for (const auto& w : nonzero_diagonal)
        out << "  c(" << sym(w.x) << "," << sym(w.x) << ") = " << format_double(w.value, 12) << '\n';
    out << "symmetry: " << (symmetric ? "ok" : "violated") << '\n';
    for (const auto& w : asymmetric_pairs)
        out << "  c(" << sym(w.x) << "," << sym(w.y) << ") = " << format_double(w.forward, 12)
            << " vs c(" << sym(w.y) << "," << sym(w.x) << ") = " << format_double(w.backward, 12)
            << '\n';
    out << "triangle inequality: " << (triangle ? "ok" : "violated") << '\n';
    for (const auto& w : triangle_violations)
        out << "  c(" << sym(w.x) << "," << sym(w.y) << ") = " << format_double(w.lhs, 12)
            << " > c(" << sym(w.x) << "," << sym(w.z) << ") + c(" << sym(w.z) << "," << sym(w.y)
            << ") = " << format_double(w.rhs, 12) << '\n';
    out << "pseudo-metric: " << (is_pseudometric() ? "yes" : "no") << '\n';
    return out.str();
}

CostTable metric_projection(const CostTable& c) {
    Eigen::MatrixXd m = c.entries().cwiseMax(0.0);
    m.diagonal().setZero();
    m = ((m + m.transpose()) / 2.0).eval();
    const int n = static_cast<int>(m.rows());
    // shortest-path closure: largest pseudo-metric dominated by the table
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                m(i, j) = std::min(m(i, j), m(i, k) + m(k, j));
    return CostTable(c.alphabet(), std::move(m));
}

Eigen::MatrixXd simplex_matrix(int dimension) {
    if (dimension < 1) throw std::invalid_argument("simplex: dimension must be >= 1");
    const int u_max = dimension;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(u_max, u_max);
    Eigen::VectorXd rho = Eigen::VectorXd::Zero(u_max);
    for (int u = 1; u <= u_max; ++u) {
        for (int v = 1; v <= u - 1; ++v) a(v - 1, u - 1) = rho(v - 1);
        rho(u - 1) = 1.0 / std::sqrt(2.0 * u * (u + 1.0));
        a(u - 1, u - 1) = rho(u - 1) * (u + 1.0);
    }
    return a;
}

Eigen::VectorXd EmbeddingMatrix::vector_for(int symbol) const {
    if (symbol == static_cast<int>(vectors.cols())) return Eigen::VectorXd::Zero(vectors.rows());
    return vectors.col(symbol);
}

std::string EmbeddingMatrix::to_text() const {
    std::ostringstream out;
    out << "embedding";
    for (int j = 0; j < static_cast<int>(alphabet->extended_size()); ++j)
        out << ' ' << alphabet->symbol(j);
    out << '\n';
    for (int r = 0; r < vectors.rows(); ++r) {
        out << "dim" << r;
        for (int j = 0; j < vectors.cols(); ++j) out << ' ' << format_double(vectors(r, j));
        out << ' ' << format_double(0.0);  // gap column
        out << '\n';
    }
    return out.str();
}

void EmbeddingMatrix::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write embedding: " + path);
    out << to_text();
}

EmbeddingMatrix simplex_init(AlphabetPtr alphabet) {
    const int u = static_cast<int>(alphabet->size());
    return EmbeddingMatrix{std::move(alphabet), simplex_matrix(u)};
}

CostTable cost_from_embedding(const EmbeddingMatrix& embedding) {
    const int n = static_cast<int>(embedding.alphabet->extended_size());
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = (embedding.vector_for(i) - embedding.vector_for(j)).norm();
    return CostTable(embedding.alphabet, std::move(m));
}

namespace {
void require_nonzero_images(const Eigen::VectorXd& ox, const Eigen::VectorXd& oy) {
    if (ox.norm() == 0.0 || oy.norm() == 0.0)
        throw std::invalid_argument("cosine cost: Ω maps an argument to zero");
}
}  // namespace

double cosine_cost(const Eigen::MatrixXd& omega, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y) {
    Eigen::VectorXd ox = omega * x;
    Eigen::VectorXd oy = omega * y;
    require_nonzero_images(ox, oy);
    double s = ox.dot(oy) / (ox.norm() * oy.norm());
    return 0.5 * (1.0 - s);
}

Eigen::MatrixXd cosine_cost_gradient(const Eigen::MatrixXd& omega, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& y) {
    Eigen::VectorXd ox = omega * x;
    Eigen::VectorXd oy = omega * y;
    require_nonzero_images(ox, oy);
    const double nx = ox.norm();
    const double ny = oy.norm();
    const double s = ox.dot(oy) / (nx * ny);
    Eigen::MatrixXd numerator = ox * y.transpose() + oy * x.transpose() -
                                s * (ox * x.transpose() * (ny / nx) +
                                     oy * y.transpose() * (nx / ny));
    return -numerator / (2.0 * nx * ny);
}

double finite_diff_check(const std::function<double(const Eigen::MatrixXd&)>& f,
                         const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& grad,
                         const Eigen::MatrixXd& point, double step) {
    if (step <= 0.0) throw std::invalid_argument("finite_diff_check: step must be > 0");
    Eigen::MatrixXd g = grad(point);
    double max_err = 0.0;
    Eigen::MatrixXd probe = point;
    for (Eigen::Index i = 0; i < point.rows(); ++i) {
        for (Eigen::Index j = 0; j < point.cols(); ++j) {
            probe(i, j) = point(i, j) + step;
            double up = f(probe);
            probe(i, j) = point(i, j) - step;
            double down = f(probe);
            probe(i, j) = point(i, j);
            double central = (up - down) / (2.0 * step);
            max_err = std::max(max_err, std::abs(central - g(i, j)));
        }
    }
    return max_err;
}

}  // namespace tedlearn
