#include "dsmatch/permutation.hpp"

#include <algorithm>
#include <numeric>

namespace dsmatch {

Permutation::Permutation(std::vector<int> images) : images_(std::move(images)) {
    const int n = degree();
    std::vector<char> seen(n, 0);
    for (int v : images_) {
        if (v < 0 || v >= n || seen[v])
            throw DimensionMismatch("permutation image array is not a bijection on 0.." +
                                    std::to_string(n - 1));
        seen[v] = 1;
    }
}

Permutation Permutation::identity(int n) {
    std::vector<int> im(n);
    std::iota(im.begin(), im.end(), 0);
    return Permutation(std::move(im));
}

bool Permutation::is_identity() const {
    for (int j = 0; j < degree(); ++j)
        if (images_[j] != j) return false;
    return true;
}

Permutation Permutation::compose(const Permutation& rhs) const {
    if (degree() != rhs.degree())
        throw DimensionMismatch("composing permutations of different degree");
    std::vector<int> im(images_.size());
    for (int j = 0; j < degree(); ++j) im[j] = images_[rhs.images_[j]];
    return Permutation(std::move(im));
}

Permutation Permutation::inverse() const {
    std::vector<int> im(images_.size());
    for (int j = 0; j < degree(); ++j) im[images_[j]] = j;
    return Permutation(std::move(im));
}

Eigen::MatrixXd Permutation::matrix() const {
    const int n = degree();
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) P(images_[j], j) = 1.0;
    return P;
}

Eigen::MatrixXd conjugate(const Eigen::MatrixXd& A, const Permutation& p) {
    const int n = p.degree();
    if (A.rows() != n || A.cols() != n)
        throw DimensionMismatch("conjugate: matrix size does not match permutation degree");
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B(i, j) = A(p(i), p(j));
    return B;
}

double conjugation_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            const Permutation& p) {
    const int n = p.degree();
    if (A.rows() != n || B.rows() != n || A.cols() != n || B.cols() != n)
        throw DimensionMismatch("conjugation_residual: size mismatch");
    // (A P - P B)(i, j) = A(i, p(j)) - B(p^-1(i), j); scan as A(p(i), p(j)) - B(i, j).
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            worst = std::max(worst, std::abs(A(p(i), p(j)) - B(i, j)));
    return worst;
}

}  // namespace dsmatch
