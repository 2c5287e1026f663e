#include "dsmatch/projection.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "dsmatch/dsopt.hpp"
#include "dsmatch/errors.hpp"

namespace dsmatch {

Permutation l2_project(const Eigen::MatrixXd& S) {
    const int n = static_cast<int>(S.rows());
    if (S.cols() != n) throw DimensionMismatch("l2_project: matrix is not square");
    if (n == 0) return Permutation(std::vector<int>{});

    // Shortest augmenting path assignment (Jonker-Volgenant scheme) on
    // cost -S, 1-based with a virtual column 0.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = -S(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> images(n);
    for (int j = 1; j <= n; ++j) images[j - 1] = match[j] - 1;
    return Permutation(std::move(images));
}

double permutation_gap(const Eigen::MatrixXd& S) {
    return static_cast<double>(S.rows()) - S.squaredNorm();
}

namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
    Eigen::MatrixXd K(X.rows() * Y.rows(), X.cols() * Y.cols());
    for (int i = 0; i < X.rows(); ++i)
        for (int j = 0; j < X.cols(); ++j)
            K.block(i * Y.rows(), j * Y.cols(), Y.rows(), Y.cols()) = X(i, j) * Y;
    return K;
}

// Orthonormal basis of the complement of the all-ones vector.
Eigen::MatrixXd ones_complement(int n) {
    Eigen::MatrixXd col = Eigen::MatrixXd::Constant(n, 1, 1.0 / std::sqrt(double(n)));
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(col);
    Eigen::MatrixXd Q = qr.householderQ();
    return Q.rightCols(n - 1);
}

// Projected quadratic form of the energy on {S1 = 0, S^T 1 = 0}:
// with Q = I (x) A - B (x) I and Z = V1 (x) V1 this is (QZ)^T (QZ).
Eigen::MatrixXd projected_form(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    const Eigen::MatrixXd V1 = ones_complement(static_cast<int>(A.rows()));
    const Eigen::MatrixXd KZ = kron(V1, A * V1) - kron(B * V1, V1);
    return KZ.transpose() * KZ;
}

// Euclidean projection onto {D : D1 = 0, D^T 1 = 0}.
Eigen::MatrixXd center(const Eigen::MatrixXd& D) {
    const int n = static_cast<int>(D.rows());
    const Eigen::VectorXd r = D.rowwise().sum() / n;
    const Eigen::VectorXd c = D.colwise().sum() / n;
    const double s = r.sum() / n;
    return D - r * Eigen::RowVectorXd::Ones(n) - Eigen::VectorXd::Ones(n) * c.transpose() +
           Eigen::MatrixXd::Constant(n, n, s);
}

// Norm of the projection of -grad onto the cone of feasible directions at
// S: sum-preserving directions, nonnegative on the active (zero) entries.
// Zero exactly when the first-order condition holds.
double kkt_residual(const Eigen::MatrixXd& S, const Eigen::MatrixXd& grad, double active_tol) {
    const int n = static_cast<int>(S.rows());
    Eigen::MatrixXd y = -grad;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd y1, y2;
    for (int sweep = 0; sweep < 200; ++sweep) {
        y1 = center(y + p);
        p += y - y1;
        y2 = y1 + q;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (S(i, j) <= active_tol && y2(i, j) < 0.0) y2(i, j) = 0.0;
        q += y1 - y2;
        const double gap = (y1 - y2).cwiseAbs().maxCoeff();
        y = y2;
        if (gap <= 1e-12) break;
    }
    return y.norm();
}

}  // namespace

SpectralEndpoints spectral_endpoints(const SymGraph& Ag, const SymGraph& Bg, int max_n) {
    const int n = Ag.n();
    if (Bg.n() != n) throw DimensionMismatch("spectral_endpoints: size mismatch");
    if (n > max_n)
        throw DimensionCap("spectral_endpoints: n=" + std::to_string(n) +
                           " exceeds the dense-operator cap " + std::to_string(max_n));
    SpectralEndpoints out;
    if (n <= 1) return out;
    const Eigen::MatrixXd G = projected_form(Ag.matrix(), Bg.matrix());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    if (es.info() != Eigen::Success)
        throw PreconditionFailed("spectral_endpoints: eigendecomposition failed");
    out.lambda_min = std::max(0.0, es.eigenvalues().minCoeff());
    out.lambda_max = es.eigenvalues().maxCoeff();
    return out;
}

namespace {

double path_energy(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& S,
                   double a) {
    return (A * S - S * B).squaredNorm() + a * (S.rows() - S.squaredNorm());
}

struct StageOutcome {
    Eigen::MatrixXd S;
    int iterations = 0;
};

// Projected gradient with backtracking on E(., a), warm-started at S0.
StageOutcome minimize_stage(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            Eigen::MatrixXd S, double a, double lip, const PathOptions& opts) {
    StageOutcome out;
    double f = path_energy(A, B, S, a);
    double eta = 1.0 / std::max(lip + 2.0 * std::abs(a), 1e-12);
    const double eta_cap = eta * 1024.0;
    int it = 0;
    for (; it < opts.max_inner; ++it) {
        const Eigen::MatrixXd R = A * S - S * B;
        const Eigen::MatrixXd g = 2.0 * (A * R - R * B) - 2.0 * a * S;
        eta = std::min(eta * 2.0, eta_cap);
        bool accepted = false;
        Eigen::MatrixXd Snew;
        double fnew = f, move2 = 0.0;
        while (eta > 1e-18 * eta_cap) {
            Snew = project_doubly_stochastic(S - eta * g);
            fnew = path_energy(A, B, Snew, a);
            move2 = (Snew - S).squaredNorm();
            if (fnew <= f - 1e-4 * move2 / eta) {
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) break;
        const double mapping = std::sqrt(move2) / eta;
        S = std::move(Snew);
        f = fnew;
        if (mapping <= opts.grad_tol) {
            ++it;
            break;
        }
    }
    out.S = std::move(S);
    out.iterations = it;
    return out;
}

// Energy Hessian restricted to the minimal Birkhoff face of S: directions
// with zero row and column sums vanishing off the support of S.
struct FaceSlice {
    int K = 0;
    std::vector<Eigen::MatrixXd> dirs;  // orthonormal face directions
    Eigen::MatrixXd H;                  // K x K Hessian of E(., a) there
};

FaceSlice face_slice(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& S, double a, double active_tol) {
    const int n = static_cast<int>(S.rows());
    FaceSlice out;
    std::vector<int> entries;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (S(i, j) > active_tol) entries.push_back(i * n + j);
    const int m = static_cast<int>(entries.size());

    // Sum-constraint matrix on the support entries, then its nullspace.
    Eigen::MatrixXd E(2 * n, m);
    E.setZero();
    for (int e = 0; e < m; ++e) {
        E(entries[e] / n, e) = 1.0;
        E(n + entries[e] % n, e) = 1.0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(E, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-10 * std::max(1.0, sv(0))) ++rank;
    out.K = m - rank;
    if (out.K == 0) return out;
    const Eigen::MatrixXd N = svd.matrixV().rightCols(out.K);

    out.dirs.resize(out.K);
    for (int k = 0; k < out.K; ++k) {
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
        for (int e = 0; e < m; ++e) D(entries[e] / n, entries[e] % n) = N(e, k);
        out.dirs[k] = std::move(D);
    }
    out.H.resize(out.K, out.K);
    for (int k = 0; k < out.K; ++k) {
        const Eigen::MatrixXd Rk = A * out.dirs[k] - out.dirs[k] * B;
        for (int l = k; l < out.K; ++l) {
            const Eigen::MatrixXd Rl = A * out.dirs[l] - out.dirs[l] * B;
            const double h = 2.0 * (Rk.cwiseProduct(Rl).sum() -
                                    a * out.dirs[k].cwiseProduct(out.dirs[l]).sum());
            out.H(k, l) = h;
            out.H(l, k) = h;
        }
    }
    return out;
}

bool face_hessian_psd(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                      const Eigen::MatrixXd& S, double a, double active_tol) {
    const FaceSlice fs = face_slice(A, B, S, a, active_tol);
    if (fs.K == 0) return true;  // zero-dimensional face: nothing to check
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fs.H);
    return es.eigenvalues().minCoeff() >= -1e-8 * std::max(1.0, std::abs(es.eigenvalues().maxCoeff()));
}

// A warm start that is already a critical point of the stage energy gives
// the projected gradient nothing to bite on, even when the energy is
// strictly concave along the face (exactly invariant instances park every
// stage on the previous stage's limit this way).  Walk the most concave
// face direction to the face boundary in both senses and keep the better
// endpoint when it strictly improves; otherwise return S unchanged.
Eigen::MatrixXd ridge_hop(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& S, double a, double lip,
                          const PathOptions& opts) {
    const int n = static_cast<int>(S.rows());
    if (n > 48) return S;
    const double eta = 1.0 / std::max(lip + 2.0 * std::abs(a), 1e-12);
    const Eigen::MatrixXd R = A * S - S * B;
    const Eigen::MatrixXd g = 2.0 * (A * R - R * B) - 2.0 * a * S;
    // Loose trigger: the hop is only adopted on strict improvement, so a
    // false positive costs one small eigensolve.  Sub-1e-4 dust left by the
    // first-order iterations must not mask a genuinely stuck warm start.
    const double mapping = (project_doubly_stochastic(S - eta * g) - S).norm() / eta;
    if (mapping > 1e-4 * (1.0 + std::abs(a))) return S;

    const FaceSlice fs = face_slice(A, B, S, a, std::max(opts.active_tol, 1e-4));
    if (fs.K == 0) return S;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fs.H);
    const auto& ev = es.eigenvalues();
    if (ev(0) >= -1e-9 * std::max(1.0, std::abs(ev(fs.K - 1)))) return S;
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < fs.K; ++k) d += es.eigenvectors()(k, 0) * fs.dirs[k];

    Eigen::MatrixXd best = S;
    double fbest = path_energy(A, B, S, a);
    for (const double sgn : {1.0, -1.0}) {
        double t = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double de = sgn * d(i, j);
                if (de < 0.0 && S(i, j) > 0.0) t = std::min(t, S(i, j) / -de);
            }
        if (!std::isfinite(t) || t <= 0.0) continue;
        const Eigen::MatrixXd Y = (S + (sgn * t) * d).cwiseMax(0.0);
        const double fY = path_energy(A, B, Y, a);
        if (fY < fbest) {
            fbest = fY;
            best = Y;
        }
    }
    return best;
}

}  // namespace

PathReport dspp_path(const SymGraph& Ag, const SymGraph& Bg, int steps, const PathOptions& opts) {
    const int n = Ag.n();
    if (Bg.n() != n) throw DimensionMismatch("dspp_path: size mismatch");
    if (steps < 2) throw PreconditionFailed("dspp_path: need at least 2 schedule steps");
    const Eigen::MatrixXd& A = Ag.matrix();
    const Eigen::MatrixXd& B = Bg.matrix();

    PathReport rep;
    rep.endpoints = spectral_endpoints(Ag, Bg, opts.endpoint_max_n);
    const double a0 = rep.endpoints.lambda_min;
    const double aN = rep.endpoints.lambda_max * (1.0 + 1e-3);

    std::vector<double> schedule;
    schedule.push_back(a0);
    if (opts.refine_first && aN > a0) schedule.push_back(a0 + (aN - a0) / 100.0);
    for (int i = 1; i <= steps; ++i)
        schedule.push_back(a0 + (aN - a0) * static_cast<double>(i) / steps);

    const double lip = 4.0 * rep.endpoints.lambda_max + 1e-12;
    Eigen::MatrixXd S = opts.init ? *opts.init : Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    S = project_doubly_stochastic(S);

    bool first_stage = true;
    for (double a : schedule) {
        const bool stage0 = first_stage;
        first_stage = false;
        const double warm_energy = path_energy(A, B, S, a);
        const Eigen::MatrixXd start = ridge_hop(A, B, S, a, lip, opts);
        StageOutcome oc = minimize_stage(A, B, start, a, lip, opts);
        if (stage0 && n <= 32) {
            // The convex stage decides which flat direction every later
            // stage amplifies, so it has to be solved to optimality, not
            // just to a small gradient.  a0 is the smallest curvature over
            // the whole tangent space, hence valid on any face.
            const Eigen::MatrixXd refined = face_refine(Ag, Bg, oc.S, a);
            if (path_energy(A, B, refined, a) <= path_energy(A, B, oc.S, a)) oc.S = refined;
        }
        double energy = path_energy(A, B, oc.S, a);
        bool monotone = energy <= warm_energy + 1e-10;
        if (!monotone && opts.enforce_monotone) {
            oc.S = S;  // reject the stage, keep the warm start
            energy = warm_energy;
            monotone = true;
        }
        S = oc.S;

        PathStage st;
        st.a = a;
        st.energy = energy;
        st.perm_gap = permutation_gap(S);
        st.monotone = monotone;
        st.inner_iterations = oc.iterations;
        const Eigen::MatrixXd R = A * S - S * B;
        st.kkt_residual =
            kkt_residual(S, 2.0 * (A * R - R * B) - 2.0 * a * S, opts.active_tol);
        st.S = S;
        rep.stages.push_back(std::move(st));
    }

    rep.final_gap = permutation_gap(S);
    rep.final = l2_project(S);
    if (opts.second_order_max_n > 0 && n <= opts.second_order_max_n)
        rep.second_order_face = face_hessian_psd(A, B, S, schedule.back(), opts.active_tol);
    return rep;
}

Eigen::MatrixXd invariant_costs(const SymGraph& Ag, const SymGraph& Bg) {
    const int n = Ag.n();
    if (Bg.n() != n) throw DimensionMismatch("invariant_costs: size mismatch");
    const Eigen::MatrixXd& A = Ag.matrix();
    const Eigen::MatrixXd& B = Bg.matrix();
    std::vector<Eigen::VectorXd> la(n), lb(n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd ra = A.row(i);
        std::sort(ra.data(), ra.data() + n);
        la[i] = std::move(ra);
        Eigen::VectorXd rb = B.row(i);
        std::sort(rb.data(), rb.data() + n);
        lb[i] = std::move(rb);
    }
    Eigen::MatrixXd C(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) C(i, j) = (la[i] - lb[j]).norm();
    return C;
}

}  // namespace dsmatch
