#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "dsmatch/dsopt.hpp"
#include "dsmatch/rng.hpp"

namespace dsmatch {

namespace {

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

double constraint_scale(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    return 1.0 + spectral_norm_est(A) + spectral_norm_est(B);
}

Eigen::MatrixXd scatter(const std::vector<int>& entries, const Eigen::VectorXd& x, int n) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t e = 0; e < entries.size(); ++e) D(entries[e] / n, entries[e] % n) = x(e);
    return D;
}

Eigen::VectorXd gather(const std::vector<int>& entries, const Eigen::MatrixXd& X) {
    const int n = static_cast<int>(X.rows());
    Eigen::VectorXd x(entries.size());
    for (std::size_t e = 0; e < entries.size(); ++e) x(e) = X(entries[e] / n, entries[e] % n);
    return x;
}

// Residual of the face equations at D: commutation plus both sum
// constraints (homogeneous form).
double equation_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const Eigen::MatrixXd& D) {
    return std::sqrt((A * D - D * B).squaredNorm() + (D.rowwise().sum()).squaredNorm() +
                     (D.colwise().sum()).squaredNorm());
}

}  // namespace

FaceBasis build_face_basis(const SymGraph& Ag, const SymGraph& Bg,
                           const std::vector<std::uint8_t>& support, double rank_tol) {
    const int n = Ag.n();
    if (Bg.n() != n) throw DimensionMismatch("build_face_basis: size mismatch");
    if (support.size() != static_cast<std::size_t>(n) * n)
        throw DimensionMismatch("build_face_basis: support mask has the wrong size");
    const Eigen::MatrixXd& A = Ag.matrix();
    const Eigen::MatrixXd& B = Bg.matrix();

    FaceBasis fb;
    fb.n = n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (support[static_cast<std::size_t>(i) * n + j]) fb.entries.push_back(i * n + j);
    const int m = static_cast<int>(fb.entries.size());
    if (m == 0) throw InfeasibleState("build_face_basis: empty support");

    // Gram matrix of the constraint columns.  For support entries e = (r, c)
    // and f = (r', c') the inner product of their columns is
    //   [r == r'](1 + (B^2)(c, c')) + [c == c'](1 + (A^2)(r, r'))
    //   - 2 A(r, r') B(c, c'),
    // covering the row-sum, column-sum and commutation rows at once.
    const Eigen::MatrixXd A2 = A * A;
    const Eigen::MatrixXd B2 = B * B;
    Eigen::MatrixXd G(m, m);
    for (int e = 0; e < m; ++e) {
        const int re = fb.entries[e] / n, ce = fb.entries[e] % n;
        for (int f = e; f < m; ++f) {
            const int rf = fb.entries[f] / n, cf = fb.entries[f] % n;
            double g = -2.0 * A(re, rf) * B(ce, cf);
            if (re == rf) g += 1.0 + B2(ce, cf);
            if (ce == cf) g += 1.0 + A2(re, rf);
            G(e, f) = g;
            G(f, e) = g;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    if (es.info() != Eigen::Success)
        throw InfeasibleState("build_face_basis: eigendecomposition failed");
    const Eigen::VectorXd& lam = es.eigenvalues();  // ascending
    const Eigen::MatrixXd& U = es.eigenvectors();
    const double lam_max = std::max(lam(m - 1), 1e-300);
    const double cut = 1e-10 * lam_max;
    const double scale = constraint_scale(A, B);

    // Kernel candidates by eigenvalue, then each audited against the actual
    // equations (the Gram spectrum alone can blur a near-degenerate cut).
    std::vector<int> kernel_cols;
    for (int i = 0; i < m && lam(i) <= cut; ++i) {
        const Eigen::MatrixXd D = scatter(fb.entries, U.col(i), n);
        if (equation_residual(A, B, D) <= 100.0 * rank_tol * scale) kernel_cols.push_back(i);
    }
    fb.dirs.resize(m, static_cast<int>(kernel_cols.size()));
    for (std::size_t k = 0; k < kernel_cols.size(); ++k) {
        fb.dirs.col(static_cast<int>(k)) = U.col(kernel_cols[k]);
        fb.dir_mats.push_back(scatter(fb.entries, fb.dirs.col(static_cast<int>(k)), n));
    }

    // Min-norm particular solution of M x = b.  The right-hand side pulls
    // back to M^T b = 2 * ones on every support column, so the pseudo
    // inverse is a plain spectral sum.
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    const Eigen::VectorXd rhs = Eigen::VectorXd::Constant(m, 2.0);
    for (int i = 0; i < m; ++i)
        if (lam(i) > cut) x += (U.col(i).dot(rhs) / lam(i)) * U.col(i);
    fb.S_ref = scatter(fb.entries, x, n);

    const Eigen::MatrixXd R = fb.S_ref;
    const double ref_resid = std::sqrt((A * R - R * B).squaredNorm() +
                                       (R.rowwise().sum().array() - 1.0).matrix().squaredNorm() +
                                       (R.colwise().sum().array() - 1.0).matrix().squaredNorm());
    if (ref_resid > 1e-6 * scale * std::max(1.0, R.norm()))
        throw InfeasibleState(
            "build_face_basis: support admits no sum-normalized commuting matrix (residual " +
            std::to_string(ref_resid) + ")");
    return fb;
}

std::vector<Eigen::MatrixXd> face_affine_space(const SymGraph& A, const SymGraph& B,
                                               const FaceState& state, double rank_tol) {
    return build_face_basis(A, B, state.support, rank_tol).dir_mats;
}

FaceState pataki_extract(const SymGraph& Ag, const SymGraph& Bg, const Eigen::MatrixXd& S0,
                         const FaceWalkOptions& opts) {
    const int n = Ag.n();
    if (Bg.n() != n || S0.rows() != n || S0.cols() != n)
        throw DimensionMismatch("pataki_extract: size mismatch");
    const Eigen::MatrixXd& A = Ag.matrix();
    const Eigen::MatrixXd& B = Bg.matrix();
    const double scale = constraint_scale(A, B);

    FaceBasis local;
    const FaceBasis* fb = opts.cache;
    if (fb) {
        if (fb->n != n) throw DimensionMismatch("pataki_extract: cached basis has wrong size");
    } else {
        std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * n, 0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (S0(i, j) > opts.zero_tol) mask[static_cast<std::size_t>(i) * n + j] = 1;
        local = build_face_basis(Ag, Bg, mask, opts.rank_tol);
        fb = &local;
    }
    const int m = static_cast<int>(fb->entries.size());
    const int K = fb->dim();

    // Coordinates of S0 in the face: S = S_ref + dirs * y on the support.
    const Eigen::VectorXd sref = gather(fb->entries, fb->S_ref);
    const Eigen::VectorXd s0 = gather(fb->entries, S0);
    Eigen::VectorXd y = fb->dirs.transpose() * (s0 - sref);
    Eigen::VectorXd s = sref + fb->dirs * y;

    double off2 = 0.0;  // mass of S0 off the support
    {
        std::vector<char> on(static_cast<std::size_t>(n) * n, 0);
        for (int e : fb->entries) on[e] = 1;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (!on[static_cast<std::size_t>(i) * n + j]) off2 += S0(i, j) * S0(i, j);
    }
    const double dist = std::sqrt((s - s0).squaredNorm() + off2);
    if (dist > opts.residual_tol * scale * std::max(1.0, S0.norm()))
        throw InfeasibleState("pataki_extract: start point sits " + std::to_string(dist) +
                              " away from the face affine space");

    std::vector<char> inZ(m, 0);
    std::vector<int> Z;

    auto resolve = [&]() {
        for (int round = 0; round <= m + 1; ++round) {
            if (!Z.empty() && K > 0) {
                Eigen::MatrixXd E(static_cast<int>(Z.size()), K);
                Eigen::VectorXd target(static_cast<int>(Z.size()));
                for (std::size_t r = 0; r < Z.size(); ++r) {
                    E.row(static_cast<int>(r)) = fb->dirs.row(Z[r]);
                    target(static_cast<int>(r)) = -sref(Z[r]);
                }
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(E, Eigen::ComputeThinU | Eigen::ComputeThinV);
                svd.setThreshold(1e-12);
                y += svd.solve(target - E * y);  // min-norm correction, keeps walk progress
                const double err = (E * y - target).cwiseAbs().maxCoeff();
                if (err > std::max(10.0 * opts.zero_tol, 1e-10 * scale))
                    throw StalledFace("pataki_extract: pinned entries are inconsistent with "
                                      "the face equations");
            } else if (!Z.empty()) {
                for (int z : Z)
                    if (std::abs(sref(z)) > std::max(10.0 * opts.zero_tol, 1e-10 * scale))
                        throw StalledFace("pataki_extract: pinned entries are inconsistent with "
                                          "the face equations");
            }
            s = sref + fb->dirs * y;
            for (int z : Z) s(z) = 0.0;
            bool grew = false;
            for (int e = 0; e < m; ++e) {
                if (!inZ[e] && s(e) < opts.zero_tol) {
                    inZ[e] = 1;
                    Z.push_back(e);
                    grew = true;
                }
            }
            if (!grew) return;
        }
        throw StalledFace("pataki_extract: support did not stabilize");
    };

    resolve();

    Eigen::VectorXd cy;  // steering objective in direction coordinates
    if (opts.steer) {
        cy.resize(K);
        for (int k = 0; k < K; ++k) cy(k) = fb->dir_mats[k].cwiseProduct(*opts.steer).sum();
    }

    int affine_dim = 0;
    for (int step = 0; step <= m; ++step) {
        // Nullspace of the pinned rows: the directions still open on this face.
        Eigen::MatrixXd N;
        if (Z.empty()) {
            N = Eigen::MatrixXd::Identity(K, K);
        } else if (K > 0) {
            Eigen::MatrixXd E(static_cast<int>(Z.size()), K);
            for (std::size_t r = 0; r < Z.size(); ++r)
                E.row(static_cast<int>(r)) = fb->dirs.row(Z[r]);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(E, Eigen::ComputeFullV);
            const auto& sv = svd.singularValues();
            const double smax = sv.size() > 0 ? sv(0) : 0.0;
            const double thresh = opts.rank_tol * std::max(1.0, smax);
            int rank = 0;
            for (int i = 0; i < sv.size(); ++i)
                if (sv(i) > thresh) ++rank;
            N = svd.matrixV().rightCols(K - rank);
        } else {
            N.resize(0, 0);
        }
        affine_dim = static_cast<int>(N.cols());
        if (affine_dim == 0) break;

        Eigen::VectorXd dy;
        if (opts.steer) {
            const Eigen::VectorXd g = N.transpose() * cy;
            if (g.norm() > 1e-12 * (1.0 + cy.norm()))
                dy = -(N * g).normalized();
            else
                dy = N.col(0);
        } else {
            dy = N.col(0);
        }
        Eigen::VectorXd d = fb->dirs * dy;
        for (int z : Z) d(z) = 0.0;
        if (d.cwiseAbs().maxCoeff() <= 1e-13)
            throw StalledFace("pataki_extract: open direction vanished on the support");

        // Line search to the first entry hitting zero; flip if unbounded.
        auto boundary = [&](const Eigen::VectorXd& dd, int* arg) {
            double t = std::numeric_limits<double>::infinity();
            *arg = -1;
            for (int e = 0; e < m; ++e) {
                if (inZ[e] || dd(e) >= -1e-13) continue;
                const double te = std::max(s(e), 0.0) / -dd(e);
                if (te < t) {
                    t = te;
                    *arg = e;
                }
            }
            return t;
        };
        int arg = -1;
        double t = boundary(d, &arg);
        if (arg < 0) {
            dy = -dy;
            d = -d;
            t = boundary(d, &arg);
        }
        if (arg < 0) throw StalledFace("pataki_extract: direction never reaches the boundary");

        y += t * dy;
        s = sref + fb->dirs * y;
        for (int z : Z) s(z) = 0.0;
        if (!inZ[arg]) {
            inZ[arg] = 1;
            Z.push_back(arg);
        }
        resolve();
    }
    if (affine_dim != 0)
        throw StalledFace("pataki_extract: face dimension failed to reach zero");

    Eigen::MatrixXd Sout = Eigen::MatrixXd::Zero(n, n);
    std::vector<std::uint8_t> support(static_cast<std::size_t>(n) * n, 0);
    for (int e = 0; e < m; ++e) {
        if (inZ[e]) continue;
        const int idx = fb->entries[e];
        Sout(idx / n, idx % n) = std::max(s(e), 0.0);
        support[idx] = 1;
    }
    FaceState st;
    st.S = DSMatrix::checked(std::move(Sout));
    st.support = std::move(support);
    st.affine_dim = 0;
    return st;
}

EnumerationResult enumerate_isomorphisms(const SymGraph& Ag, const SymGraph& Bg,
                                         const EnumerateOptions& opts) {
    const int n = Ag.n();
    if (Bg.n() != n) throw DimensionMismatch("enumerate_isomorphisms: size mismatch");
    const Eigen::MatrixXd& A = Ag.matrix();
    const Eigen::MatrixXd& B = Bg.matrix();
    const double scale = constraint_scale(A, B);

    const Eigen::MatrixXd Sc = centroid_from_signatures(Ag, Bg, opts.sig_tol);

    if (opts.check_preconditions) {
        // Signature level sets stand in for the orbits; the rank and
        // spectrum conditions on those classes certify that every extreme
        // point of the zero-energy face is a permutation.
        const Eigen::VectorXd sa = signature(Ag);
        std::vector<int> cls(n);
        {
            std::vector<int> idx(n);
            for (int i = 0; i < n; ++i) idx[i] = i;
            std::sort(idx.begin(), idx.end(), [&](int a, int b) { return sa(a) < sa(b); });
            int c = 0;
            for (int k = 0; k < n; ++k) {
                if (k > 0 && sa(idx[k]) - sa(idx[k - 1]) > opts.sig_tol) ++c;
                cls[idx[k]] = c;
            }
        }
        OrbitPartition parts;
        parts.class_of = cls;
        parts.classes.resize(*std::max_element(cls.begin(), cls.end()) + 1);
        for (int i = 0; i < n; ++i) parts.classes[cls[i]].push_back(i);
        Prop1Tols tols;
        tols.sig_tol = opts.sig_tol;
        const ExactnessReport rep = check_prop1_blocks(Ag, parts, tols);
        if (!rep.sufficient_orbit)
            throw PreconditionFailed(
                "enumerate_isomorphisms: no signature class satisfies the rank and "
                "spectrum conditions; extreme points may be fractional");
    }

    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (Sc(i, j) > 0.0) mask[static_cast<std::size_t>(i) * n + j] = 1;
    const FaceBasis fb = build_face_basis(Ag, Bg, mask, opts.rank_tol);
    const int m = static_cast<int>(fb.entries.size());

    const Eigen::VectorXd sc_vec = gather(fb.entries, Sc);
    Eigen::MatrixXd Scur = Sc;

    EnumerationResult res;
    std::set<Permutation> found;
    std::vector<Eigen::VectorXd> perm_vecs;

    for (int ext = 0; ext < opts.max_extractions; ++ext) {
        Rng rng = Rng::stream(opts.seed, static_cast<std::uint64_t>(ext));
        Eigen::MatrixXd C(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) C(i, j) = rng.normal();

        FaceWalkOptions fw;
        fw.zero_tol = opts.zero_tol;
        fw.rank_tol = opts.rank_tol;
        fw.steer = &C;
        fw.cache = &fb;
        const FaceState st = pataki_extract(Ag, Bg, Scur, fw);
        res.extractions = ext + 1;

        std::vector<int> images;
        if (!is_near_permutation(st.S.S, opts.tol, &images)) {
            double frac = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    frac = std::max(frac, std::min(std::abs(st.S.S(i, j)),
                                                   std::abs(st.S.S(i, j) - 1.0)));
            throw NonPermutationExtreme(
                "enumerate_isomorphisms: extracted a fractional extreme point "
                "(largest deviation from {0,1}: " + std::to_string(frac) + ")");
        }
        Permutation p(std::move(images));
        if (conjugation_residual(A, B, p) > opts.tol * scale)
            throw InfeasibleState(
                "enumerate_isomorphisms: extreme permutation fails the matching equations");
        if (found.insert(p).second) perm_vecs.push_back(gather(fb.entries, p.matrix()));

        // Is the centroid already inside the hull of what we found?
        const int L = static_cast<int>(perm_vecs.size());
        Eigen::MatrixXd M(m + 1, L);
        for (int l = 0; l < L; ++l) {
            M.col(l).head(m) = perm_vecs[l];
            M(m, l) = 1.0;
        }
        Eigen::VectorXd rhs(m + 1);
        rhs.head(m) = sc_vec;
        rhs(m) = 1.0;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-12);
        const Eigen::VectorXd theta = svd.solve(rhs);
        res.membership_residual = (M * theta - rhs).norm();
        const double theta_min = theta.minCoeff();
        if (res.membership_residual <= opts.tol * (1.0 + rhs.norm()) &&
            theta_min >= -100.0 * opts.tol) {
            res.complete = true;
            break;
        }

        // Step backward through the current point, away from the latest
        // extreme point, to expose a different part of the polytope.
        const Eigen::VectorXd pv = gather(fb.entries, p.matrix());
        const Eigen::VectorXd scur_vec = gather(fb.entries, Scur);
        double t_lo = -std::numeric_limits<double>::infinity();
        for (int e = 0; e < m; ++e)
            if (pv(e) > scur_vec(e) + 1e-12)
                t_lo = std::max(t_lo, -scur_vec(e) / (pv(e) - scur_vec(e)));
        if (!std::isfinite(t_lo) || t_lo > -1e-10) {
            // Degenerate backward step: remix the hull with random weights.
            Rng mix = Rng::stream(opts.seed, (1ull << 32) + static_cast<std::uint64_t>(ext));
            Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
            double total = 0.0;
            for (const auto& pw : perm_vecs) {
                const double w = 0.1 + mix.uniform01();
                v += w * pw;
                total += w;
            }
            const double wc = 0.1 + mix.uniform01();
            v += wc * sc_vec;
            total += wc;
            Scur = scatter(fb.entries, v / total, n);
        } else {
            Eigen::VectorXd v = scur_vec + t_lo * (pv - scur_vec);
            v = v.cwiseMax(0.0);
            Scur = scatter(fb.entries, v, n);
        }
    }

    res.isomorphisms.assign(found.begin(), found.end());
    return res;
}

FaceState random_objective_extreme_point(const SymGraph& Ag, const SymGraph& Bg,
                                         const Eigen::MatrixXd& C,
                                         const ExtremePointOptions& opts) {
    const int n = Ag.n();
    if (Bg.n() != n || C.rows() != n || C.cols() != n)
        throw DimensionMismatch("random_objective_extreme_point: size mismatch");
    const Eigen::MatrixXd& A = Ag.matrix();
    const Eigen::MatrixXd& B = Bg.matrix();

    const Eigen::MatrixXd Sc = centroid_from_signatures(Ag, Bg, opts.sig_tol);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (Sc(i, j) > 0.0) mask[static_cast<std::size_t>(i) * n + j] = 1;
    const FaceBasis fb = build_face_basis(Ag, Bg, mask, opts.rank_tol);

    // Bias the start toward the <C, .>-optimal region with a short
    // penalized solve, then project back onto the face affine space.
    const double cn = C.norm();
    const double an = A.norm() + B.norm();
    const double delta = opts.linear_weight * an * an / std::max(cn, 1e-30);
    SolveOptions so;
    so.max_iter = opts.presolve_iters;
    so.grad_tol = 1e-12;
    so.init = &Sc;
    const Eigen::MatrixXd St = solve_with_linear_term(Ag, Bg, delta * C, so).S.S;

    const Eigen::VectorXd sref = gather(fb.entries, fb.S_ref);
    const Eigen::VectorXd y = fb.dirs.transpose() * (gather(fb.entries, St) - sref);
    Eigen::VectorXd s = sref + fb.dirs * y;
    const Eigen::VectorXd sc_vec = gather(fb.entries, Sc);

    // Blend toward the centroid just enough to clear the boundary so the
    // walk starts strictly inside the face.
    const double floor = 10.0 * opts.zero_tol;
    double beta = 0.0;
    for (int e = 0; e < s.size(); ++e)
        if (s(e) < floor && sc_vec(e) > s(e))
            beta = std::max(beta, (floor - s(e)) / (sc_vec(e) - s(e)));
    beta = std::min(beta, 1.0);
    if (beta > 0.0) s = (1.0 - beta) * s + beta * sc_vec;
    const Eigen::MatrixXd Sstart = scatter(fb.entries, s, n);

    FaceWalkOptions fw;
    fw.zero_tol = opts.zero_tol;
    fw.rank_tol = opts.rank_tol;
    fw.steer = &C;
    fw.cache = &fb;
    return pataki_extract(Ag, Bg, Sstart, fw);
}

}  // namespace dsmatch
