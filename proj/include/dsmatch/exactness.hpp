#ifndef DSMATCH_EXACTNESS_HPP
#define DSMATCH_EXACTNESS_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "dsmatch/group_space.hpp"
#include "dsmatch/perm_group.hpp"
#include "dsmatch/rng.hpp"
#include "dsmatch/sym_graph.hpp"

namespace dsmatch {

// Row-sum vector s = A * 1.  Invariant under every automorphism of A, so
// constant on automorphism orbits.
Eigen::VectorXd signature(const SymGraph& A);

// True when the per-orbit signature values are pairwise separated by more
// than tol.  Requires s constant on each orbit within tol; throws
// InconsistentSignature otherwise.
bool is_discriminative(const Eigen::VectorXd& s, const OrbitPartition& orbits,
                       double tol = 1e-9);

struct Prop1Tols {
    double invariance_tol = 1e-8;  // relative, for membership of A in the fixed space
    double rank_tol = 1e-8;        // relative singular-value threshold
    double gap_tol = 1e-8;         // relative eigenvalue-gap threshold
    double sig_tol = 1e-9;         // signature separation
};

struct ExactnessReport {
    bool signature_discriminative = false;
    // Discriminative signatures confine every zero-energy relaxation
    // solution to the orbit-block support; that is what this flag records.
    bool weakly_exact = false;
    // First orbit r (in class order) whose off-diagonal blocks A_rj all
    // have full column rank and whose diagonal block has simple spectrum,
    // provided the signature is discriminative.
    std::optional<int> sufficient_orbit;
    std::vector<std::vector<int>> block_ranks;  // rank of A_rj per orbit pair
    std::vector<double> spectrum_gaps;          // min eigenvalue gap of A_rr per orbit
};

// Checks the sufficient conditions for the relaxation to recover exactly
// the convex hull of the automorphisms, blockwise over the orbit partition.
// Throws NotInvariant if A is not fixed by G.
ExactnessReport check_prop1(const SymGraph& A, const PermGroup& G,
                            const Prop1Tols& tols = {});

// Same checks against an externally supplied partition (used at scales
// where the group is unknown and orbit classes come from the signature).
ExactnessReport check_prop1_blocks(const SymGraph& A, const OrbitPartition& orbits,
                                   const Prop1Tols& tols = {});

// Linear system F vec(S) = b capturing all affine constraints on S:
//   rows 0..n-1:        row sums = 1
//   rows n..2n-1:       column sums = 1
//   rows 2n..2n+n^2-1:  A S - S B = 0, entry (i, j) at row 2n + i + j*n
//   remaining rows:     S_ij = 0 for every masked-out entry, in
//                       column-major order of (i, j)
// Columns index vec(S) column-major: S_ij sits at column i + j*n.
struct AffineSystem {
    Eigen::MatrixXd F;
    Eigen::VectorXd b;
};

AffineSystem affine_constraint_matrix(const SymGraph& A, const SymGraph& B,
                                      const SupportMask& mask);
inline AffineSystem affine_constraint_matrix(const SymGraph& A, const SupportMask& mask) {
    return affine_constraint_matrix(A, A, mask);
}

// sigma_min / sigma_max of F(A) restricted to the orthogonal complement of
// span{vec(P - I) : P in G}.  The kernel of F always contains that span;
// a strictly positive margin certifies it contains nothing else, i.e. the
// affine solution set is exactly the affine hull of the automorphisms.
double affine_exactness_margin(const SymGraph& A, const PermGroup& G);

inline bool affine_exactness_test(const SymGraph& A, const PermGroup& G,
                                  double tol = 1e-8) {
    return affine_exactness_margin(A, G) > tol;
}

enum class Tristate { yes, no, unknown };

std::string to_string(Tristate t);

// Whether every nonnegative point of the affine hull of the automorphisms
// lies in their convex hull.  Provable when some orbit is full (the free
// action lets convex coefficients be read off one column); otherwise not
// decided here.
Tristate condition_weird(const PermGroup& G);

enum class Verdict { generically_exact, always_fails, inconclusive };

std::string to_string(Verdict v);

struct GenericVerdict {
    Verdict verdict = Verdict::inconclusive;
    int trials = 0;
    int zero_evaluations = 0;  // samples where the affine margin test failed
    Tristate condition_weird_holds = Tristate::unknown;
    std::vector<double> min_singular_margins;  // per trial, in trial order
};

// Samples random invariant matrices and tests affine exactness on each.
// All pass + full orbit  -> generically_exact (the polytope's extreme
// points are exactly the automorphisms for generic instances).
// All fail               -> always_fails (the test is a polynomial
// condition; vanishing at every random sample pins it to zero).
// Anything else          -> inconclusive.
GenericVerdict classify_generic(const PermGroup& G, int trials, std::uint64_t seed,
                                double tol = 1e-8);

}  // namespace dsmatch

#endif
