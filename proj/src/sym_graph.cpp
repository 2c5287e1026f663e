#include "dsmatch/sym_graph.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dsmatch {

SymGraph::SymGraph(Eigen::MatrixXd A, double sym_tol) {
    if (A.rows() != A.cols())
        throw DimensionMismatch("SymGraph: matrix is not square");
    const double dev = (A - A.transpose()).cwiseAbs().maxCoeff();
    if (A.rows() > 0 && dev > sym_tol)
        throw NotInvariant("SymGraph: matrix is asymmetric beyond tolerance (deviation " +
                           std::to_string(dev) + ")");
    A_ = 0.5 * (A + A.transpose());
}

SymGraph load_matrix(const std::string& path, double sym_tol) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open matrix file: " + path);
    int n = -1;
    if (!(in >> n) || n < 0) throw IoError("matrix file has no valid size line: " + path);
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!(in >> A(i, j)))
                throw IoError("matrix file truncated at row " + std::to_string(i) + ": " + path);
    return SymGraph(std::move(A), sym_tol);
}

void save_matrix(const std::string& path, const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw DimensionMismatch("save_matrix: matrix is not square");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write matrix file: " + path);
    const int n = static_cast<int>(A.rows());
    out << n << "\n";
    char buf[64];
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", A(i, j));
            out << buf << (j + 1 == n ? "" : " ");
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace dsmatch
