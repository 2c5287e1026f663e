#ifndef TESTS_RATIONAL_NULLSPACE_HPP
#define TESTS_RATIONAL_NULLSPACE_HPP

#include <gmpxx.h>

#include <vector>

#include "dsmatch/perm_group.hpp"

namespace oracle {

using RationalMatrix = std::vector<std::vector<mpq_class>>;

// Exact rank by fraction-exact Gaussian elimination.
int rational_rank(RationalMatrix M);

// Exact kernel dimension of the homogeneous matching system at A:
// directions D with D1 = 0, D^T 1 = 0, A D = D A and D zero outside the
// support mask of G, where A is the rational invariant matrix with
// coefficient coeffs[c] on pair-orbit class c of G.  The mask restriction
// matters: even for exact groups the unmasked commutant carries spectral
// directions that leave the support immediately and say nothing about the
// feasible polytope.
int matching_kernel_dim(const dsmatch::PermGroup& G, const std::vector<long>& coeffs);

// Exact dimension of span{ vec(P - I) : P in G }.
int difference_span_dim(const dsmatch::PermGroup& G);

}  // namespace oracle

#endif
