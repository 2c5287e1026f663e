#ifndef DSMATCH_GROUP_SPACE_HPP
#define DSMATCH_GROUP_SPACE_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "dsmatch/perm_group.hpp"
#include "dsmatch/rng.hpp"
#include "dsmatch/sym_graph.hpp"

namespace dsmatch {

// Orbits of the group action on unordered index pairs {i, j}, i <= j
// (diagonal pairs included).  Classes are sorted by their lexicographically
// smallest representative.
struct PairOrbits {
    int n = 0;
    std::vector<std::vector<std::pair<int, int>>> classes;
    std::vector<int> class_of;  // row-major n*n, symmetric

    int size() const { return static_cast<int>(classes.size()); }
    int color(int i, int j) const { return class_of[static_cast<std::size_t>(i) * n + j]; }
};

PairOrbits pair_orbits(const PermGroup& G);

// Orthonormal basis (in the Frobenius inner product) of the space of
// symmetric matrices fixed by the group: one scaled pair-orbit indicator
// per class, in class order.
struct GroupSpaceBasis {
    PermGroup group;
    PairOrbits orbits;
    std::vector<Eigen::MatrixXd> basis;  // unit Frobenius norm each

    int dim() const { return static_cast<int>(basis.size()); }
};

GroupSpaceBasis build_basis(const PermGroup& G);

// Random invariant matrix: iid standard normal coefficients on the basis,
// normalized to the unit sphere and scaled.  Generic sample of the space.
SymGraph sample_vg(const GroupSpaceBasis& B, Rng& rng, double scale = 1.0);

// Invariant matrix whose signature separates the orbit classes: within
// class r (1-based, in class order) every entry is r / |class r|, zero
// across classes.  Row sums are then exactly r on class r.
SymGraph discriminative_witness(const PermGroup& G);

// Indicator of one orbit of the action on I_r x I_j (the orbit of the
// lexicographically smallest pair), returned as an |I_r| x |I_j| block.
// Requires the action on I_r to be free (|I_r| == |G|, else NotFullOrbit);
// the block then has exactly one 1 per row and full column rank |I_j|.
Eigen::MatrixXd full_rank_witness(const PermGroup& G, int r, int j);

}  // namespace dsmatch

#endif
