#ifndef DSMATCH_PERMUTATION_HPP
#define DSMATCH_PERMUTATION_HPP

#include <Eigen/Dense>
#include <compare>
#include <vector>

#include "dsmatch/errors.hpp"

namespace dsmatch {

// A permutation of {0..n-1} stored as its image array.  The matrix form
// acts on columns: P*e_j = e_{images[j]}, i.e. P(images[j], j) = 1.
// With that convention A and B = P^T A P satisfy A P = P B exactly.
class Permutation {
  public:
    Permutation() = default;
    explicit Permutation(std::vector<int> images);

    static Permutation identity(int n);

    int degree() const { return static_cast<int>(images_.size()); }
    int operator()(int j) const { return images_[j]; }
    const std::vector<int>& images() const { return images_; }

    bool is_identity() const;

    // Matrix composition: (*this) * rhs, so rhs acts first.
    Permutation compose(const Permutation& rhs) const;
    Permutation inverse() const;

    Eigen::MatrixXd matrix() const;

    friend bool operator==(const Permutation& a, const Permutation& b) = default;
    // Lexicographic order on image arrays; the canonical element order.
    friend std::strong_ordering operator<=>(const Permutation& a, const Permutation& b) {
        return a.images_ <=> b.images_;
    }

  private:
    std::vector<int> images_;
};

// B(i, j) = A(p(i), p(j)), i.e. B = P^T A P.  This is the relabeling of A
// for which A P = P B holds exactly, so p matches A against B.
Eigen::MatrixXd conjugate(const Eigen::MatrixXd& A, const Permutation& p);

// max_ij |A P - P B| without forming the products.
double conjugation_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            const Permutation& p);

}  // namespace dsmatch

#endif
