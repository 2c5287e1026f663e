#ifndef DSMATCH_PERM_GROUP_HPP
#define DSMATCH_PERM_GROUP_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "dsmatch/permutation.hpp"

namespace dsmatch {

// Finite permutation group stored as the full element list, sorted
// lexicographically by image array (so element 0 need not be the identity,
// but for degree >= 1 the identity sorts first anyway only by accident;
// use contains()/identity lookups rather than positional assumptions).
class PermGroup {
  public:
    PermGroup() = default;

    // Sorts, dedupes and keeps the elements; caller promises closure.
    static PermGroup from_elements(int degree, std::vector<Permutation> elements);
    static PermGroup trivial(int n);

    int degree() const { return degree_; }
    int order() const { return static_cast<int>(elements_.size()); }
    const std::vector<Permutation>& elements() const { return elements_; }
    bool contains(const Permutation& p) const;

    // Exhaustive group-axiom check (closure under composition); O(|G|^2 log|G|).
    bool is_closed() const;

    friend bool operator==(const PermGroup& a, const PermGroup& b) = default;

  private:
    int degree_ = 0;
    std::vector<Permutation> elements_;
};

// Partition of {0..n-1} into orbit classes, sorted by smallest member.
struct OrbitPartition {
    std::vector<std::vector<int>> classes;
    std::vector<int> class_of;  // index into classes, per point

    int size() const { return static_cast<int>(classes.size()); }
};

// allowed(i, j) == true exactly when some group element maps j to i.
struct SupportMask {
    int n = 0;
    std::vector<std::uint8_t> allowed_;  // row-major n*n

    bool allowed(int i, int j) const { return allowed_[static_cast<std::size_t>(i) * n + j] != 0; }
    void set(int i, int j, bool v) { allowed_[static_cast<std::size_t>(i) * n + j] = v ? 1 : 0; }
    static SupportMask none(int n) { return SupportMask{n, std::vector<std::uint8_t>(static_cast<std::size_t>(n) * n, 0)}; }
    static SupportMask all(int n) { return SupportMask{n, std::vector<std::uint8_t>(static_cast<std::size_t>(n) * n, 1)}; }
    int count() const;
};

inline constexpr int kClosureDefaultMaxOrder = 10000;

// Product saturation of the generators (identity included); throws
// OrderExceeded if the element count passes max_order.
PermGroup closure(const std::vector<Permutation>& generators,
                  int max_order = kClosureDefaultMaxOrder);

// Every element squares to the identity.
bool is_reflection_group(const PermGroup& G);

OrbitPartition vertex_orbits(const PermGroup& G);

// Some vertex orbit has length exactly |G| (the action on it is free).
bool has_full_orbit(const PermGroup& G);

SupportMask support_mask(const PermGroup& G);
SupportMask support_mask(const std::vector<Permutation>& elements, int degree);

inline constexpr int kStabilizerClosureMaxDegree = 64;

// Largest group with the same invariant matrix space: all permutations
// preserving the pair-orbit coloring of G.  Backtracking over vertex
// images, pruned by iterated color refinement.  G is realizable as the
// full symmetry group of some matrix iff stabilizer_closure(G) == G.
PermGroup stabilizer_closure(const PermGroup& G,
                             int max_degree = kStabilizerClosureMaxDegree);

inline constexpr int kAutomorphismOracleMaxDegree = 12;

// Exact automorphism group of a symmetric matrix: all p with
// max_ij |A(p(i), p(j)) - A(i, j)| <= tol.  Exhaustive backtracking with
// sorted-row pruning; refuses degree > 12.
PermGroup automorphism_oracle(const Eigen::MatrixXd& A, double tol = 1e-9,
                              int max_degree = kAutomorphismOracleMaxDegree);

inline constexpr int kExhaustiveQapMaxDegree = 8;

struct QapResult {
    Permutation minimizer;
    double energy = 0.0;  // ||A P - P B||_F at the minimizer
};

// Global minimizer of ||A P - P B||_F over all n! permutations, ties broken
// toward the lexicographically smallest image array.  Refuses degree > 8.
QapResult exhaustive_qap(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         int max_degree = kExhaustiveQapMaxDegree);

// ---- parameterized group constructors ----

// Order-2 group generated by i -> n-1-i.  Odd n leaves the middle point
// fixed; the endpoint orbit {0, n-1} is free for every n >= 2.
PermGroup reversal_group(int n);

// Cyclic group of order k acting freely on n = k*copies points as
// disjoint k-cycles (block b occupies indices b*k .. b*k+k-1).
PermGroup cyclic_group(int k, int copies = 1);

// Dihedral group of order 2k acting on n = k*copies points: each block is a
// k-gon, rotated and reflected in lockstep.
PermGroup dihedral_group(int k, int copies = 1);

// Z2 x Z2 generated by the horizontal and vertical reflections of a
// rows x cols lattice (index r*cols + c); order 4 when rows, cols >= 2.
PermGroup grid_reflection_group(int rows, int cols);

// All n! permutations; refuses n > 8.
PermGroup symmetric_group(int n);

}  // namespace dsmatch

#endif
