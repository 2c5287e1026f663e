#ifndef DSMATCH_SYM_GRAPH_HPP
#define DSMATCH_SYM_GRAPH_HPP

#include <Eigen/Dense>
#include <string>

#include "dsmatch/errors.hpp"

namespace dsmatch {

// Weighted undirected graph as its dense symmetric adjacency matrix.
// Construction rejects matrices that are asymmetric beyond sym_tol and
// symmetrizes exactly ((A + A^T) / 2) so downstream code can rely on
// bitwise A(i,j) == A(j,i).
class SymGraph {
  public:
    SymGraph() = default;
    explicit SymGraph(Eigen::MatrixXd A, double sym_tol = 1e-9);

    int n() const { return static_cast<int>(A_.rows()); }
    const Eigen::MatrixXd& matrix() const { return A_; }
    double operator()(int i, int j) const { return A_(i, j); }

  private:
    Eigen::MatrixXd A_;
};

// Text format: first line n, then n rows of n space-separated decimals.
SymGraph load_matrix(const std::string& path, double sym_tol = 1e-9);
void save_matrix(const std::string& path, const Eigen::MatrixXd& A);

}  // namespace dsmatch

#endif
