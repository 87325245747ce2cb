#pragma once

#include <vector>

namespace optcd::quadrature {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;  // normalized to sum to 1
};

// Nodes/weights for E[f(Z)], Z ~ N(0, 1) (probabilists' Gauss-Hermite).
const Rule& gauss_hermite(int count);

// Nodes/weights for E[f(E)], E ~ Exp(1) (Gauss-Laguerre, alpha = 0).
const Rule& gauss_laguerre(int count);

}  // namespace optcd::quadrature
