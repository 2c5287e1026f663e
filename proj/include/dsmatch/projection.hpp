#ifndef DSMATCH_PROJECTION_HPP
#define DSMATCH_PROJECTION_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "dsmatch/dsopt.hpp"
#include "dsmatch/permutation.hpp"
#include "dsmatch/sym_graph.hpp"

namespace dsmatch {

// Permutation maximizing <S, P> (the closest permutation in Frobenius
// norm), found by the Hungarian assignment algorithm on cost -S.
// Deterministic: ties break by index order.
Permutation l2_project(const Eigen::MatrixXd& S);

// n - ||S||_F^2: nonnegative on doubly stochastic S, zero exactly at
// permutations.
double permutation_gap(const Eigen::MatrixXd& S);

// Extreme eigenvalues of the quadratic form S -> ||A S - S B||_F^2
// restricted to the subspace {S1 = 0, S^T 1 = 0}.
struct SpectralEndpoints {
    double lambda_min = 0.0;  // clamped at 0; the form is positive semidefinite
    double lambda_max = 0.0;
};

// Dense eigensolve on the (n-1)^2 dimensional projected operator; throws
// DimensionCap for n > max_n.
SpectralEndpoints spectral_endpoints(const SymGraph& A, const SymGraph& B, int max_n = 60);

// One stage of the convex-to-concave path.
struct PathStage {
    double a = 0.0;            // penalty weight of this stage
    double energy = 0.0;       // E(S_i, a_i) = ||A S - S B||^2 + a (n - ||S||^2)
    double kkt_residual = 0.0; // norm of the gradient projected on the feasible cone
    double perm_gap = 0.0;     // n - ||S_i||_F^2
    bool monotone = true;      // E(S_i, a_i) <= E(S_{i-1}, a_i) + 1e-10
    int inner_iterations = 0;
    Eigen::MatrixXd S;         // the stage iterate
};

struct PathReport {
    SpectralEndpoints endpoints;
    std::vector<PathStage> stages;
    Permutation final;      // l2_project of the last iterate
    double final_gap = 0.0; // perm_gap of the last iterate before rounding
    // Positive semidefiniteness of the stage-N Hessian on the minimal
    // Birkhoff face of the final iterate; skipped for large n.
    std::optional<bool> second_order_face;
};

struct PathOptions {
    int max_inner = 500;
    double grad_tol = 1e-9;
    bool refine_first = false;     // insert a0 + (aN - a0)/100 after a0
    bool enforce_monotone = true;  // revert stages that increase the energy
    double active_tol = 1e-7;      // entry threshold for active-set tests
    int second_order_max_n = 24;   // face Hessian check cap (0 disables)
    int endpoint_max_n = 60;       // forwarded to spectral_endpoints
    const Eigen::MatrixXd* init = nullptr;  // stage-0 start, default flat
};

// Convex-to-concave path for E(S, a) = ||A S - S B||^2 + a (n - ||S||^2):
// weights run from lambda_min to lambda_max * (1 + 1e-3) in `steps`
// uniform intervals, each stage locally minimized by projected gradient
// warm-started at the previous stage.  A warm start that is already a
// critical point of the new stage (routine on exactly invariant pairs) is
// first walked along the face's most concave direction to the face
// boundary.  The concave endpoint forces the final iterate to an extreme
// point, which is rounded by l2_project.
PathReport dspp_path(const SymGraph& A, const SymGraph& B, int steps,
                     const PathOptions& opts = {});

// C(i, j) = ||sorted row i of A - sorted row j of B||_2: a permutation
// invariant, zero whenever some isomorphism maps j to i.  Adding <C, S>
// to the relaxation energy removes spurious zero-energy points.
Eigen::MatrixXd invariant_costs(const SymGraph& A, const SymGraph& B);

}  // namespace dsmatch

#endif
