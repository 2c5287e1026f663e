#include "dsmatch/generators.hpp"

#include <cmath>

#include "dsmatch/errors.hpp"
#include "dsmatch/group_space.hpp"

namespace dsmatch {

SymGraph gen_grid(int rows, int cols) {
    if (rows < 1 || cols < 1) throw PreconditionFailed("gen_grid: need rows, cols >= 1");
    const int n = rows * cols;
    Eigen::MatrixXd A(n, n);
    for (int r1 = 0; r1 < rows; ++r1)
        for (int c1 = 0; c1 < cols; ++c1)
            for (int r2 = 0; r2 < rows; ++r2)
                for (int c2 = 0; c2 < cols; ++c2) {
                    const double dr = r1 - r2, dc = c1 - c2;
                    A(r1 * cols + c1, r2 * cols + c2) = std::sqrt(dr * dr + dc * dc);
                }
    return SymGraph(std::move(A));
}

namespace {

Eigen::MatrixXd symmetric_noise(int n, double epsilon, Rng& rng) {
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = rng.normal();
    Eigen::MatrixXd D = 0.5 * (M + M.transpose());
    const double nrm = D.norm();
    if (epsilon == 0.0 || nrm == 0.0) return Eigen::MatrixXd::Zero(n, n);
    return D * (epsilon / nrm);
}

}  // namespace

NoisyPair gen_noisy_pair(const PermGroup& G, double epsilon, Rng& rng) {
    if (epsilon < 0.0) throw PreconditionFailed("gen_noisy_pair: epsilon must be >= 0");
    const GroupSpaceBasis basis = build_basis(G);
    const SymGraph base = sample_vg(basis, rng);
    const int n = G.degree();
    const Eigen::MatrixXd dA = symmetric_noise(n, epsilon, rng);
    const Eigen::MatrixXd dB = symmetric_noise(n, epsilon, rng);
    return NoisyPair{SymGraph(base.matrix() + dA), SymGraph(base.matrix() + dB)};
}

}  // namespace dsmatch
