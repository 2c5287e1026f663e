#ifndef DSMATCH_GENERATORS_HPP
#define DSMATCH_GENERATORS_HPP

#include "dsmatch/perm_group.hpp"
#include "dsmatch/rng.hpp"
#include "dsmatch/sym_graph.hpp"

namespace dsmatch {

// Euclidean distance matrix of the rows x cols integer lattice; point
// (r, c) gets index r * cols + c.  For rows != cols (both >= 2) the
// automorphism group is the reflection product of order 4.
SymGraph gen_grid(int rows, int cols);

struct NoisyPair {
    SymGraph A;
    SymGraph B;
};

// A random invariant instance and its perturbed copy: A = B sampled from
// the invariant space of G (unit scale), then each side shifted by an
// independent symmetric Gaussian matrix rescaled to Frobenius norm exactly
// epsilon.
NoisyPair gen_noisy_pair(const PermGroup& G, double epsilon, Rng& rng);

}  // namespace dsmatch

#endif
