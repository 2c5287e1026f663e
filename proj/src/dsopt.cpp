#include "dsmatch/dsopt.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace dsmatch {

double DSMatrix::feasibility_error() const {
    if (S.rows() == 0) return 0.0;
    double err = std::max(0.0, -S.minCoeff());
    err = std::max(err, (S.rowwise().sum().array() - 1.0).abs().maxCoeff());
    err = std::max(err, (S.colwise().sum().array() - 1.0).abs().maxCoeff());
    return err;
}

DSMatrix DSMatrix::checked(Eigen::MatrixXd S, double feas_tol) {
    if (S.rows() != S.cols()) throw DimensionMismatch("DSMatrix: matrix is not square");
    DSMatrix out{std::move(S), feas_tol};
    if (!out.feasible())
        throw InfeasibleState("DSMatrix: feasibility error " +
                              std::to_string(out.feasibility_error()) + " exceeds tolerance " +
                              std::to_string(feas_tol));
    return out;
}

namespace {

// Exact Euclidean projection onto {S : S1 = 1, S^T 1 = 1}.
Eigen::MatrixXd project_sum_affine(const Eigen::MatrixXd& X) {
    const int n = static_cast<int>(X.rows());
    const Eigen::VectorXd a = X.rowwise().sum();
    const Eigen::VectorXd b = X.colwise().sum();
    const double h = 0.5 * (1.0 - a.sum() / n);
    const Eigen::VectorXd u = (Eigen::VectorXd::Ones(n) - a).array() / n - h / n;
    const Eigen::VectorXd v = (Eigen::VectorXd::Ones(n) - b).array() / n - h / n;
    return X + u * Eigen::RowVectorXd::Ones(n) + Eigen::VectorXd::Ones(n) * v.transpose();
}

// Cheap upper estimate of the spectral norm of a symmetric matrix.
double spectral_norm_est(const Eigen::MatrixXd& A) {
    if (A.rows() == 0) return 0.0;
    Eigen::VectorXd x = Eigen::VectorXd::Ones(A.rows()).normalized();
    double nrm = 0.0;
    for (int it = 0; it < 20; ++it) {
        x = A * x;
        nrm = x.norm();
        if (nrm == 0.0) return 0.0;
        x /= nrm;
    }
    return nrm * 1.05 + 1e-300;
}

}  // namespace

Eigen::MatrixXd project_doubly_stochastic(const Eigen::MatrixXd& X, double tol, int max_sweeps) {
    if (X.rows() != X.cols())
        throw DimensionMismatch("project_doubly_stochastic: matrix is not square");
    const int n = static_cast<int>(X.rows());
    // Linear convergence with a geometry-dependent rate; far starts
    // routinely need a few hundred sweeps to reach 1e-10.
    if (max_sweeps <= 0) max_sweeps = std::max(1000, 60 * n);
    Eigen::MatrixXd y = X;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd y1, y2;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        y1 = project_sum_affine(y + p);
        p += y - y1;
        y2 = (y1 + q).cwiseMax(0.0);
        q += y1 - y2;
        const double gap = (y1 - y2).cwiseAbs().maxCoeff();
        y = y2;
        if (gap <= tol) break;
    }
    return y;
}

namespace {

struct PgProblem {
    std::function<double(const Eigen::MatrixXd&)> value;
    std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> grad;
    double lipschitz_hint = 1.0;
};

SolveResult pg_minimize(const PgProblem& prob, Eigen::MatrixXd S, const SolveOptions& opts) {
    SolveResult out;
    double f = prob.value(S);
    if (opts.record_trace) out.objective_trace.push_back(f);
    double eta = 1.0 / std::max(prob.lipschitz_hint, 1e-12);
    const double eta_cap = eta * 1024.0;
    int stall = 0;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        const Eigen::MatrixXd g = prob.grad(S);
        eta = std::min(eta * 2.0, eta_cap);
        Eigen::MatrixXd Snew;
        double fnew = f;
        double move2 = 0.0;
        bool accepted = false;
        while (eta > 1e-18 * eta_cap) {
            Snew = project_doubly_stochastic(S - eta * g, opts.dykstra_tol);
            fnew = prob.value(Snew);
            move2 = (Snew - S).squaredNorm();
            if (fnew <= f - 1e-4 * move2 / eta) {
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) {  // no feasible descent: stationary to working precision
            out.converged = true;
            break;
        }
        const double mapping = std::sqrt(move2) / eta;
        const double drop = f - fnew;
        S = std::move(Snew);
        f = fnew;
        if (opts.record_trace) out.objective_trace.push_back(f);
        if (mapping <= opts.grad_tol) {
            out.converged = true;
            ++it;
            break;
        }
        stall = drop <= opts.rel_tol * std::max(1.0, std::abs(f)) ? stall + 1 : 0;
        if (stall >= 5) {
            out.converged = true;
            ++it;
            break;
        }
    }
    out.iterations = it;
    out.S = DSMatrix::checked(std::move(S), 1e-8);
    return out;
}

}  // namespace

SolveResult solve_with_linear_term(const SymGraph& Ag, const SymGraph& Bg,
                                   const Eigen::MatrixXd& C, const SolveOptions& opts) {
    const int n = Ag.n();
    if (Bg.n() != n || C.rows() != n || C.cols() != n)
        throw DimensionMismatch("solve_with_linear_term: size mismatch");
    const Eigen::MatrixXd& A = Ag.matrix();
    const Eigen::MatrixXd& B = Bg.matrix();

    PgProblem prob;
    prob.value = [&](const Eigen::MatrixXd& S) {
        return (A * S - S * B).squaredNorm() + C.cwiseProduct(S).sum();
    };
    prob.grad = [&](const Eigen::MatrixXd& S) {
        const Eigen::MatrixXd R = A * S - S * B;
        return Eigen::MatrixXd(2.0 * (A * R - R * B) + C);
    };
    const double opn = spectral_norm_est(A) + spectral_norm_est(B);
    prob.lipschitz_hint = 2.0 * opn * opn + 1e-12;

    Eigen::MatrixXd S0 = opts.init ? *opts.init
                                   : Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    SolveResult out = pg_minimize(prob, std::move(S0), opts);
    out.energy = (A * out.S.S - out.S.S * B).norm();
    return out;
}

SolveResult solve_relaxation(const SymGraph& A, const SymGraph& B, const SolveOptions& opts) {
    SolveResult out = solve_with_linear_term(A, B, Eigen::MatrixXd::Zero(A.n(), A.n()), opts);
    if (A.n() <= 32) {
        // The tiny support floor lets the refine sweep up the slow-decaying
        // dust the first-order iterations leave behind, not just fix the
        // large flat components.
        Eigen::MatrixXd X = face_refine(A, B, out.S.S, 0.0, 1e-12);
        const double e = (A.matrix() * X - X * B.matrix()).norm();
        if (e < out.energy) {
            out.S = DSMatrix::checked(std::move(X), 1e-8);
            out.energy = e;
            if (out.energy <= 1e-10) out.converged = true;
        }
    }
    return out;
}

Eigen::MatrixXd face_refine(const SymGraph& Ag, const SymGraph& Bg, const Eigen::MatrixXd& S,
                            double a, double support_tol) {
    const int n = Ag.n();
    if (Bg.n() != n || S.rows() != n || S.cols() != n)
        throw DimensionMismatch("face_refine: size mismatch");
    const Eigen::MatrixXd& A = Ag.matrix();
    const Eigen::MatrixXd& B = Bg.matrix();

    auto value = [&](const Eigen::MatrixXd& X) {
        return (A * X - X * B).squaredNorm() - a * X.squaredNorm();
    };

    Eigen::MatrixXd X = S;
    double fX = value(X);
    // Each round either reaches the slice optimum or pins at least one
    // entry at zero, so the face strictly shrinks and the loop terminates.
    for (int round = 0; round < 2 * n * n; ++round) {
        std::vector<int> entries;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (X(i, j) > support_tol) entries.push_back(i * n + j);
        const int m = static_cast<int>(entries.size());

        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(2 * n, m);
        for (int e = 0; e < m; ++e) {
            E(entries[e] / n, e) = 1.0;
            E(n + entries[e] % n, e) = 1.0;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(E, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv(i) > 1e-10 * std::max(1.0, sv(0))) ++rank;
        const int K = m - rank;
        if (K == 0) break;

        const Eigen::MatrixXd N = svd.matrixV().rightCols(K);
        Eigen::VectorXd s0(m);
        for (int e = 0; e < m; ++e) s0(e) = X(entries[e] / n, entries[e] % n);
        std::vector<Eigen::MatrixXd> dirs(K);
        Eigen::MatrixXd M(n * n, K);
        for (int k = 0; k < K; ++k) {
            Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
            for (int e = 0; e < m; ++e) D(entries[e] / n, entries[e] % n) = N(e, k);
            const Eigen::MatrixXd R = A * D - D * B;
            M.col(k) = Eigen::Map<const Eigen::VectorXd>(R.data(), n * n);
            dirs[k] = std::move(D);
        }
        const Eigen::MatrixXd R0 = A * X - X * B;
        const Eigen::VectorXd rhs =
            a * (N.transpose() * s0) -
            M.transpose() * Eigen::Map<const Eigen::VectorXd>(R0.data(), n * n);
        Eigen::MatrixXd H = M.transpose() * M;
        H.diagonal().array() += 1e-12 - a;
        const Eigen::VectorXd u = H.ldlt().solve(rhs);
        if (!u.allFinite()) break;

        Eigen::MatrixXd Y = X;
        for (int k = 0; k < K; ++k) Y += u(k) * dirs[k];

        double t = 1.0;
        for (int e = 0; e < m; ++e) {
            const int i = entries[e] / n, j = entries[e] % n;
            if (Y(i, j) < 0.0) t = std::min(t, X(i, j) / (X(i, j) - Y(i, j)));
        }
        if (t < 1.0) {
            Y = X + t * (Y - X);
            for (int e = 0; e < m; ++e) {
                const int i = entries[e] / n, j = entries[e] % n;
                if (Y(i, j) < 0.0) Y(i, j) = 0.0;
            }
        }
        const double fY = value(Y);
        if (!(fY < fX - 1e-12 * std::abs(fX) - 1e-18)) break;
        X = std::move(Y);
        fX = fY;
        if (t >= 1.0) break;  // slice optimum reached and feasible
    }
    return X;
}

Eigen::MatrixXd centroid_from_orbits(const OrbitPartition& orbits) {
    const int n = static_cast<int>(orbits.class_of.size());
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    for (const auto& cls : orbits.classes) {
        const double v = 1.0 / static_cast<double>(cls.size());
        for (int i : cls)
            for (int j : cls) S(i, j) = v;
    }
    return S;
}

namespace {

// Splits sorted values into classes at gaps larger than tol; returns the
// class id per original index, with class ids ordered by ascending value.
std::vector<int> gap_classes(const Eigen::VectorXd& s, double tol, int* num_classes) {
    const int n = static_cast<int>(s.size());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return s(a) < s(b); });
    std::vector<int> cls(n, 0);
    int c = 0;
    for (int k = 0; k < n; ++k) {
        if (k > 0 && s(idx[k]) - s(idx[k - 1]) > tol) ++c;
        cls[idx[k]] = c;
    }
    if (num_classes) *num_classes = c + 1;
    return cls;
}

}  // namespace

Eigen::MatrixXd centroid_from_signature(const SymGraph& A, double tol) {
    const Eigen::VectorXd s = signature(A);
    const int n = A.n();
    int k = 0;
    const std::vector<int> cls = gap_classes(s, tol, &k);
    std::vector<int> count(k, 0);
    for (int v : cls) ++count[v];
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (cls[i] == cls[j]) S(i, j) = 1.0 / count[cls[i]];
    return S;
}

Eigen::MatrixXd centroid_from_signatures(const SymGraph& A, const SymGraph& B, double tol) {
    const int n = A.n();
    if (B.n() != n) throw DimensionMismatch("centroid_from_signatures: size mismatch");
    const Eigen::VectorXd sA = signature(A);
    const Eigen::VectorXd sB = signature(B);
    Eigen::VectorXd both(2 * n);
    both << sA, sB;
    int k = 0;
    const std::vector<int> cls = gap_classes(both, tol, &k);
    std::vector<int> countA(k, 0), countB(k, 0);
    for (int i = 0; i < n; ++i) ++countA[cls[i]];
    for (int j = 0; j < n; ++j) ++countB[cls[n + j]];
    for (int c = 0; c < k; ++c)
        if (countA[c] != countB[c])
            throw PreconditionFailed(
                "centroid_from_signatures: signature class sizes differ between the inputs "
                "(class " + std::to_string(c) + ": " + std::to_string(countA[c]) + " vs " +
                std::to_string(countB[c]) + ")");
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (cls[i] == cls[n + j]) S(i, j) = 1.0 / countA[cls[i]];
    return S;
}

namespace {

// Interior path solver shared by both barriers: damped Newton in the
// reduced coordinates D(a,b) = (e_a - e_n)(e_b - e_n)^T, which span the
// zero-row-sum zero-column-sum directions, with a fraction-to-the-boundary
// rule keeping the iterate strictly positive.  Entries driven against the
// boundary get their barrier derivatives evaluated at a small floor; the
// enormous floored curvature freezes them in place, which is exactly the
// intended active-set behavior.
DSMatrix penalty_newton(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const PenaltyOptions& opts, std::vector<double>& energies,
                        int& inner_total) {
    const int n = static_cast<int>(A.rows());
    const int K = (n - 1) * (n - 1);
    const bool entropy = opts.barrier == Barrier::entropy;
    const double floor = 1e-100;
    Eigen::MatrixXd S = Eigen::MatrixXd::Constant(n, n, 1.0 / n);

    auto scatter = [&](const Eigen::VectorXd& y) {
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
        for (int a = 0; a + 1 < n; ++a)
            for (int b = 0; b + 1 < n; ++b) {
                const double w = y(a * (n - 1) + b);
                D(a, b) += w;
                D(a, n - 1) -= w;
                D(n - 1, b) -= w;
                D(n - 1, n - 1) += w;
            }
        return D;
    };
    auto reduce = [&](const Eigen::MatrixXd& G) {
        Eigen::VectorXd y(K);
        for (int a = 0; a + 1 < n; ++a)
            for (int b = 0; b + 1 < n; ++b)
                y(a * (n - 1) + b) =
                    G(a, b) - G(a, n - 1) - G(n - 1, b) + G(n - 1, n - 1);
        return y;
    };
    auto value = [&](const Eigen::MatrixXd& X, double alpha) {
        if (X.minCoeff() <= 0.0) return std::numeric_limits<double>::infinity();
        const double fit = (A * X - X * B).squaredNorm();
        if (entropy) return fit + alpha * (X.array() * X.array().log()).sum();
        return fit - alpha * X.array().log().sum();
    };
    // Entrywise barrier derivatives at the floored iterate.
    auto barrier_grad = [&](const Eigen::MatrixXd& X) {
        const Eigen::ArrayXXd Xf = X.array().max(floor);
        if (entropy) return Eigen::MatrixXd(1.0 + Xf.log());
        return Eigen::MatrixXd(-Xf.inverse());
    };
    auto barrier_curv = [&](const Eigen::MatrixXd& X) {
        const Eigen::ArrayXXd Xf = X.array().max(floor);
        if (entropy) return Eigen::MatrixXd(Xf.inverse());
        return Eigen::MatrixXd(Xf.square().inverse());
    };

    for (double alpha : opts.alphas) {
        for (int it = 0; it < opts.max_inner; ++it) {
            ++inner_total;
            const Eigen::MatrixXd R = A * S - S * B;
            const Eigen::MatrixXd G = 2.0 * (A * R - R * B) + alpha * barrier_grad(S);
            const Eigen::VectorXd gy = reduce(G);
            if (gy.norm() <= opts.inner_tol * (1.0 + alpha)) break;

            // Reduced Newton system via K Hessian-vector products.
            Eigen::MatrixXd H(K, K);
            const Eigen::MatrixXd curv = barrier_curv(S);
            for (int c = 0; c < K; ++c) {
                Eigen::VectorXd e = Eigen::VectorXd::Zero(K);
                e(c) = 1.0;
                const Eigen::MatrixXd D = scatter(e);
                const Eigen::MatrixXd AD = A * D - D * B;
                const Eigen::MatrixXd HD =
                    2.0 * (A * AD - AD * B) + alpha * D.cwiseProduct(curv);
                H.col(c) = reduce(HD);
            }
            Eigen::VectorXd dy = H.ldlt().solve(-gy);
            Eigen::MatrixXd D = scatter(dy);
            if (!D.allFinite()) D = -scatter(gy);  // fall back to steepest descent

            // Fraction to the boundary, then backtracking.
            double tmax = 1.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (D(i, j) < 0.0) tmax = std::min(tmax, 0.99 * S(i, j) / -D(i, j));
            if (tmax <= 1e-14)
                throw BarrierDiverged("penalty_solve: interior step collapsed at alpha=" +
                                      std::to_string(alpha));
            double f = value(S, alpha);
            double t = tmax;
            bool accepted = false;
            while (t > 1e-16) {
                if (value(S + t * D, alpha) < f) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) break;
            S += t * D;
        }
        energies.push_back((A * S - S * B).norm());
    }
    return DSMatrix::checked(std::move(S), 1e-8);
}

}  // namespace

PenaltyResult penalty_solve(const SymGraph& Ag, const SymGraph& Bg, const PenaltyOptions& opts) {
    const int n = Ag.n();
    if (Bg.n() != n) throw DimensionMismatch("penalty_solve: size mismatch");
    PenaltyOptions o = opts;
    if (o.alphas.empty()) {
        double a = 1.0;
        for (int i = 0; i < 25; ++i, a *= 0.5) o.alphas.push_back(a);
    }
    for (double a : o.alphas)
        if (!(a > 0.0)) throw PreconditionFailed("penalty_solve: alphas must be positive");

    PenaltyResult out;
    out.alphas = o.alphas;
    int inner = 0;
    out.S = penalty_newton(Ag.matrix(), Bg.matrix(), o, out.energies, inner);
    out.inner_iterations = inner;
    return out;
}

bool is_near_permutation(const Eigen::MatrixXd& S, double tol, std::vector<int>* images) {
    const int n = static_cast<int>(S.rows());
    if (S.cols() != n) return false;
    std::vector<int> im(n, -1);
    std::vector<char> used(n, 0);
    for (int j = 0; j < n; ++j) {
        int one_row = -1;
        for (int i = 0; i < n; ++i) {
            const double v = S(i, j);
            if (std::abs(v - 1.0) <= tol) {
                if (one_row >= 0) return false;
                one_row = i;
            } else if (std::abs(v) > tol) {
                return false;
            }
        }
        if (one_row < 0 || used[one_row]) return false;
        used[one_row] = 1;
        im[j] = one_row;
    }
    if (images) *images = std::move(im);
    return true;
}

}  // namespace dsmatch
