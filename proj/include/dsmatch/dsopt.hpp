#ifndef DSMATCH_DSOPT_HPP
#define DSMATCH_DSOPT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dsmatch/exactness.hpp"
#include "dsmatch/perm_group.hpp"
#include "dsmatch/sym_graph.hpp"

namespace dsmatch {

// Doubly stochastic matrix with an explicit feasibility tolerance:
// entries >= -feas_tol, every row and column sum within feas_tol of 1.
struct DSMatrix {
    Eigen::MatrixXd S;
    double feas_tol = 1e-8;

    int n() const { return static_cast<int>(S.rows()); }
    double feasibility_error() const;
    bool feasible() const { return feasibility_error() <= feas_tol; }

    // Validating constructor; throws InfeasibleState when out of tolerance.
    static DSMatrix checked(Eigen::MatrixXd S, double feas_tol = 1e-8);
};

// Euclidean projection onto the doubly stochastic polytope by Dykstra's
// alternating scheme between the sum-constraint affine set and the
// nonnegative orthant.  max_sweeps <= 0 means max(1000, 60*n).
Eigen::MatrixXd project_doubly_stochastic(const Eigen::MatrixXd& X, double tol = 1e-10,
                                          int max_sweeps = 0);

struct SolveOptions {
    int max_iter = 5000;
    double grad_tol = 1e-10;   // step-normalized movement (gradient mapping)
    double rel_tol = 1e-14;    // relative objective decrease, sustained
    double dykstra_tol = 1e-10;
    bool record_trace = false;
    const Eigen::MatrixXd* init = nullptr;  // default: flat matrix J/n
};

struct SolveResult {
    DSMatrix S;
    double energy = 0.0;  // ||A S - S B||_F at the returned point
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;  // filled when record_trace is set
};

// min ||A S - S B||_F^2 over doubly stochastic S, projected gradient with
// a backtracking (monotone) line search, Dykstra projection each step.
// Small problems (n <= 32) get an exact active-face finish afterwards; see
// face_refine below for why the first-order iterations alone are not enough.
SolveResult solve_relaxation(const SymGraph& A, const SymGraph& B,
                             const SolveOptions& opts = {});

// Same scheme for ||A S - S B||_F^2 + <C, S>, without the exact finish.
SolveResult solve_with_linear_term(const SymGraph& A, const SymGraph& B,
                                   const Eigen::MatrixXd& C, const SolveOptions& opts = {});

// Exact minimization of ||A X - X B||_F^2 - a*||X||_F^2 over the face of
// the doubly stochastic polytope spanned by the entries of S that exceed
// support_tol, by closed-form least squares in the nullspace of the sum
// constraints, repeated as entries hit zero and leave the face.  Finishes
// a first-order solve: projected gradient resolves the stiff directions in
// a few hundred steps but can crawl for tens of thousands along nearly
// flat ones, and those are exactly the directions rounding decisions live
// on.  The quadratic must stay convex on the face, so a may not exceed the
// smallest curvature of the energy there (a = 0 for the plain relaxation).
// Dense in the face dimension; meant for desk-scale n.
Eigen::MatrixXd face_refine(const SymGraph& A, const SymGraph& B, const Eigen::MatrixXd& S,
                            double a = 0.0, double support_tol = 1e-6);

// Block matrix with a flat 1/|class| block on each orbit class diagonal:
// the average of all automorphism matrices when the classes are the true
// orbits of the automorphism group.
Eigen::MatrixXd centroid_from_orbits(const OrbitPartition& orbits);

// Same matrix built without the group: classes are the level sets of the
// signature (split where consecutive sorted values gap by more than tol).
// Coincides exactly with centroid_from_orbits when the signature separates
// the orbits.
Eigen::MatrixXd centroid_from_signature(const SymGraph& A, double tol = 1e-9);

// Two-graph version: entry (i, j) is 1/|class| when row i of A and row j
// of B fall in the same signature class.  Throws PreconditionFailed when
// the class structures of the two signatures do not match.
Eigen::MatrixXd centroid_from_signatures(const SymGraph& A, const SymGraph& B,
                                         double tol = 1e-9);

enum class Barrier { entropy, log_barrier };

struct PenaltyOptions {
    Barrier barrier = Barrier::entropy;
    std::vector<double> alphas;  // default: 1, 1/2, ..., 2^-24
    int max_inner = 500;
    double inner_tol = 1e-9;
};

struct PenaltyResult {
    DSMatrix S;
    std::vector<double> alphas;
    std::vector<double> energies;  // ||A S - S B||_F after each stage
    int inner_iterations = 0;
};

// Warm-started path of strictly convex penalized problems
//   min ||A S - S B||^2 + alpha * F(S)
// with F the negative entropy or the log barrier.  For isomorphic inputs
// with discriminative signature the final iterate approaches the centroid.
PenaltyResult penalty_solve(const SymGraph& A, const SymGraph& B,
                            const PenaltyOptions& opts = {});

// A face of the zero-energy polytope: the point, its support, and the
// dimension of the affine space of constrained matrices through it.
struct FaceState {
    DSMatrix S;
    std::vector<std::uint8_t> support;  // row-major n*n; off-support entries are exact zeros
    int affine_dim = -1;

    bool on_support(int i, int j) const { return support[static_cast<std::size_t>(i) * S.S.cols() + j] != 0; }
};

// Cached affine description of V(support) = {R : R1 = 1, R^T 1 = 1,
// A R = R B, R zero off the support}: one feasible point plus an
// orthonormal direction basis, both supported on `entries`.
struct FaceBasis {
    int n = 0;
    std::vector<int> entries;           // row-major indices i*n+j of the support
    Eigen::MatrixXd S_ref;              // particular solution (may have tiny negatives)
    Eigen::MatrixXd dirs;               // |entries| x K direction coordinates
    std::vector<Eigen::MatrixXd> dir_mats;  // the K directions as matrices

    int dim() const { return static_cast<int>(dirs.cols()); }
};

// Builds the affine description of V on the given support via the Gram
// matrix of the constraint columns (assembled in closed form from A^2 and
// B^2, so the n^2-row constraint system is never materialized).
FaceBasis build_face_basis(const SymGraph& A, const SymGraph& B,
                           const std::vector<std::uint8_t>& support, double rank_tol = 1e-8);

// Direction basis of V(state.S); empty exactly when state.S is an extreme
// point of the polytope V intersect {S >= 0}.
std::vector<Eigen::MatrixXd> face_affine_space(const SymGraph& A, const SymGraph& B,
                                               const FaceState& state, double rank_tol = 1e-8);

struct FaceWalkOptions {
    double zero_tol = 1e-9;      // absolute entry snap threshold
    double rank_tol = 1e-8;
    double residual_tol = 1e-6;  // how far S0 may sit from V, relative
    const Eigen::MatrixXd* steer = nullptr;  // walk downhill for this linear objective
    const FaceBasis* cache = nullptr;        // reuse a precomputed V basis
};

// Walks from S0 to an extreme point of V intersect {S >= 0}: moves along a
// face direction until an entry hits zero, snaps it out of the support,
// re-solves the equality system on the smaller support, and repeats until
// the affine dimension is zero.  Support shrinks strictly every step.
FaceState pataki_extract(const SymGraph& A, const SymGraph& B, const Eigen::MatrixXd& S0,
                         const FaceWalkOptions& opts = {});

struct EnumerateOptions {
    double tol = 1e-8;       // permutation snap / residual tolerance
    double zero_tol = 1e-9;
    double rank_tol = 1e-8;
    double sig_tol = 1e-6;   // signature class separation
    std::uint64_t seed = 0;  // steering streams and the degenerate-step fallback
    int max_extractions = 200;
    bool check_preconditions = true;
};

struct EnumerationResult {
    std::vector<Permutation> isomorphisms;  // lexicographic order
    bool complete = false;  // centroid certified inside the hull of the list
    int extractions = 0;
    double membership_residual = 0.0;
};

// Extracts extreme points repeatedly, stepping backward through the
// centroid between extractions, until the centroid lies in the convex hull
// of the permutations found.  When every extreme point is a permutation
// this enumerates all isomorphisms between A and B.
EnumerationResult enumerate_isomorphisms(const SymGraph& A, const SymGraph& B,
                                         const EnumerateOptions& opts = {});

struct ExtremePointOptions {
    double linear_weight = 1e-3;  // linear term size relative to the quadratic scale
    int presolve_iters = 300;
    double zero_tol = 1e-9;
    double rank_tol = 1e-8;
    double sig_tol = 1e-6;
};

// Extreme point of the zero-energy polytope selected by a linear objective:
// a short penalized solve biases the start toward the <C, .>-optimal
// region, then a steered face walk lands exactly on an extreme point.
// Fractional outputs are legitimate results here, not errors.
FaceState random_objective_extreme_point(const SymGraph& A, const SymGraph& B,
                                         const Eigen::MatrixXd& C,
                                         const ExtremePointOptions& opts = {});

// True when every entry is within tol of {0, 1} with exactly one 1 per row
// and column; fills `images` with the column-action image array.
bool is_near_permutation(const Eigen::MatrixXd& S, double tol,
                         std::vector<int>* images = nullptr);

}  // namespace dsmatch

#endif
