#include "optcd/quadrature.hpp"

#include "optcd/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>
#include <string>

namespace optcd::quadrature {
namespace {

// Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix of the
// orthogonal polynomial family, weights the squared first eigenvector components.
Rule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw NumericalFailure("quadrature: Jacobi eigensolver did not converge");
    }
    const auto n = diag.size();
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        rule.nodes[i] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[i] = v0 * v0;
        total += rule.weights[i];
    }
    for (double& w : rule.weights) w /= total;
    return rule;
}

Rule build_hermite(int n) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd off(n - 1);
    for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(static_cast<double>(k));
    return golub_welsch(diag, off);
}

Rule build_laguerre(int n) {
    Eigen::VectorXd diag(n);
    Eigen::VectorXd off(n - 1);
    for (int k = 0; k < n; ++k) diag(k) = 2.0 * k + 1.0;
    for (int k = 1; k < n; ++k) off(k - 1) = static_cast<double>(k);
    return golub_welsch(diag, off);
}

const Rule& cached(char family, int count, Rule (*build)(int)) {
    if (count < 1 || count > 512) {
        throw InvalidInput("quadrature: node count must be in 1..512, got " + std::to_string(count));
    }
    static std::mutex mu;
    static std::map<std::pair<char, int>, Rule> cache;
    std::lock_guard lock(mu);
    auto key = std::make_pair(family, count);
    auto it = cache.find(key);
    if (it == cache.end()) {
        Rule r = count == 1 ? Rule{{family == 'H' ? 0.0 : 1.0}, {1.0}} : build(count);
        it = cache.emplace(key, std::move(r)).first;
    }
    return it->second;
}

}  // namespace

const Rule& gauss_hermite(int count) { return cached('H', count, build_hermite); }

const Rule& gauss_laguerre(int count) { return cached('L', count, build_laguerre); }

}  // namespace optcd::quadrature
