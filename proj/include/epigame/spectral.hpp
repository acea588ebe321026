#pragma once

#include <stdexcept>

#include "epigame/linalg.hpp"

namespace epigame {

/// Perron pair of a non-negative irreducible matrix. `right` sums to one,
/// `left` is scaled so that left . right == 1.
struct PerronData {
    double rho = 0.0;
    Vec right;
    Vec left;
    double residual = 0.0;  // max-norm eigen-equation defect relative to rho
    int iterations = 0;
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what, double residual = 0.0)
        : std::runtime_error(what), last_residual(residual) {}
    double last_residual;
};

/// True iff the directed graph of nonzero entries is strongly connected.
/// Throws std::invalid_argument on negative entries.
bool is_irreducible(const Mat& m);

/// Power iteration on the shifted matrix M + eps*I (the shift breaks
/// periodicity without moving the Perron vectors). Targets an eigen-residual
/// below 1e-12; gives up after 1e5 iterations and throws NumericalError if
/// the best residual is still above 1e-10.
PerronData perron(const Mat& m);

/// d rho / d M_ij = left_i * right_j under the left.right = 1 normalization.
Mat rho_gradient(const Mat& m);

}  // namespace epigame
