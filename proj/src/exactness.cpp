#include "dsmatch/exactness.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace dsmatch {

Eigen::VectorXd signature(const SymGraph& A) {
    return A.matrix().rowwise().sum();
}

bool is_discriminative(const Eigen::VectorXd& s, const OrbitPartition& orbits,
                       double tol) {
    std::vector<double> level(orbits.size());
    for (int c = 0; c < orbits.size(); ++c) {
        const auto& cls = orbits.classes[c];
        double lo = s(cls.front()), hi = lo;
        for (int v : cls) {
            lo = std::min(lo, s(v));
            hi = std::max(hi, s(v));
        }
        if (hi - lo > tol)
            throw InconsistentSignature(
                "signature varies by " + std::to_string(hi - lo) + " on orbit class " +
                std::to_string(c) + "; not an orbit-constant vector at this tolerance");
        level[c] = s(cls.front());
    }
    for (std::size_t a = 0; a < level.size(); ++a)
        for (std::size_t b = a + 1; b < level.size(); ++b)
            if (std::abs(level[a] - level[b]) <= tol) return false;
    return true;
}

ExactnessReport check_prop1_blocks(const SymGraph& A, const OrbitPartition& orbits,
                                   const Prop1Tols& tols) {
    const int k = orbits.size();
    ExactnessReport rep;
    rep.signature_discriminative = is_discriminative(signature(A), orbits, tols.sig_tol);
    rep.weakly_exact = rep.signature_discriminative;

    rep.block_ranks.assign(k, std::vector<int>(k, 0));
    rep.spectrum_gaps.assign(k, 0.0);

    auto block = [&](int r, int c) {
        const auto& Ir = orbits.classes[r];
        const auto& Ic = orbits.classes[c];
        Eigen::MatrixXd M(Ir.size(), Ic.size());
        for (std::size_t a = 0; a < Ir.size(); ++a)
            for (std::size_t b = 0; b < Ic.size(); ++b) M(a, b) = A(Ir[a], Ic[b]);
        return M;
    };

    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(block(r, c));
            const auto& sv = svd.singularValues();
            const double smax = sv.size() ? sv(0) : 0.0;
            int rank = 0;
            for (int t = 0; t < sv.size(); ++t)
                if (sv(t) > tols.rank_tol * smax && smax > 0.0) ++rank;
            rep.block_ranks[r][c] = rank;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block(r, r));
        const auto& ev = es.eigenvalues();
        double scale = std::max(1.0, std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1))));
        double gap = ev.size() > 1 ? ev(1) - ev(0) : scale;  // singleton block: trivially simple
        for (int t = 1; t + 1 < ev.size(); ++t) gap = std::min(gap, ev(t + 1) - ev(t));
        rep.spectrum_gaps[r] = gap / scale;
    }

    if (rep.signature_discriminative) {
        for (int r = 0; r < k && !rep.sufficient_orbit; ++r) {
            bool ok = rep.spectrum_gaps[r] > tols.gap_tol;
            for (int c = 0; c < k && ok; ++c) {
                if (c == r) continue;
                ok = rep.block_ranks[r][c] == static_cast<int>(orbits.classes[c].size());
            }
            if (ok) rep.sufficient_orbit = r;
        }
    }
    return rep;
}

ExactnessReport check_prop1(const SymGraph& A, const PermGroup& G, const Prop1Tols& tols) {
    if (A.n() != G.degree())
        throw DimensionMismatch("check_prop1: matrix size does not match group degree");
    const double scale = std::max(1.0, A.matrix().cwiseAbs().maxCoeff());
    for (const auto& p : G.elements()) {
        const double dev = conjugation_residual(A.matrix(), A.matrix(), p);
        if (dev > tols.invariance_tol * scale)
            throw NotInvariant("check_prop1: matrix moves under the group (deviation " +
                               std::to_string(dev) + ")");
    }
    return check_prop1_blocks(A, vertex_orbits(G), tols);
}

AffineSystem affine_constraint_matrix(const SymGraph& Ag, const SymGraph& Bg,
                                      const SupportMask& mask) {
    const int n = Ag.n();
    if (Bg.n() != n || mask.n != n)
        throw DimensionMismatch("affine_constraint_matrix: size mismatch");
    const Eigen::MatrixXd& A = Ag.matrix();
    const Eigen::MatrixXd& B = Bg.matrix();

    const int zeros = n * n - mask.count();
    const int rows = 2 * n + n * n + zeros;
    AffineSystem sys;
    sys.F = Eigen::MatrixXd::Zero(rows, n * n);
    sys.b = Eigen::VectorXd::Zero(rows);

    auto col = [n](int i, int j) { return i + j * n; };

    for (int i = 0; i < n; ++i) {  // row sums
        for (int j = 0; j < n; ++j) sys.F(i, col(i, j)) = 1.0;
        sys.b(i) = 1.0;
    }
    for (int j = 0; j < n; ++j) {  // column sums
        for (int i = 0; i < n; ++i) sys.F(n + j, col(i, j)) = 1.0;
        sys.b(n + j) = 1.0;
    }
    // (A S - S B)(i, j) = sum_k A(i, k) S(k, j) - sum_k S(i, k) B(k, j)
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int row = 2 * n + col(i, j);
            for (int k = 0; k < n; ++k) {
                sys.F(row, col(k, j)) += A(i, k);
                sys.F(row, col(i, k)) -= B(k, j);
            }
        }
    int row = 2 * n + n * n;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (!mask.allowed(i, j)) sys.F(row++, col(i, j)) = 1.0;
    return sys;
}

double affine_exactness_margin(const SymGraph& A, const PermGroup& G) {
    const int n = A.n();
    if (G.degree() != n)
        throw DimensionMismatch("affine_exactness_margin: group degree mismatch");
    const AffineSystem sys = affine_constraint_matrix(A, A, support_mask(G));

    // Orthonormal basis U0 of span{vec(P - I)}.
    Eigen::MatrixXd D(n * n, G.order());
    int c = 0;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    for (const auto& p : G.elements()) {
        Eigen::MatrixXd M = p.matrix() - I;
        D.col(c++) = Eigen::Map<Eigen::VectorXd>(M.data(), n * n);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> dsvd(D, Eigen::ComputeThinU);
    const auto& dsv = dsvd.singularValues();
    const double dmax = dsv.size() ? dsv(0) : 0.0;
    int r = 0;
    for (int t = 0; t < dsv.size(); ++t)
        if (dmax > 0.0 && dsv(t) > 1e-12 * dmax) ++r;

    Eigen::MatrixXd U1;
    if (r == 0) {
        U1 = Eigen::MatrixXd::Identity(n * n, n * n);
    } else {
        // Complete U0 to a full orthonormal basis; the complement columns
        // span the directions the kernel is not allowed to contain.
        Eigen::MatrixXd U0 = dsvd.matrixU().leftCols(r);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(U0);
        Eigen::MatrixXd Q = qr.householderQ();
        U1 = Q.rightCols(n * n - r);
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> msvd(sys.F * U1);
    const auto& sv = msvd.singularValues();
    if (sv.size() == 0) return 0.0;
    const double smax = sv(0);
    if (smax <= 0.0) return 0.0;
    return sv(sv.size() - 1) / smax;
}

std::string to_string(Tristate t) {
    switch (t) {
        case Tristate::yes: return "true";
        case Tristate::no: return "false";
        default: return "unknown";
    }
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::generically_exact: return "GenericallyExact";
        case Verdict::always_fails: return "AlwaysFails";
        default: return "Inconclusive";
    }
}

Tristate condition_weird(const PermGroup& G) {
    return has_full_orbit(G) ? Tristate::yes : Tristate::unknown;
}

GenericVerdict classify_generic(const PermGroup& G, int trials, std::uint64_t seed,
                                double tol) {
    if (trials < 1) throw PreconditionFailed("classify_generic: need at least one trial");
    const GroupSpaceBasis basis = build_basis(G);
    GenericVerdict out;
    out.trials = trials;
    out.condition_weird_holds = condition_weird(G);
    out.min_singular_margins.reserve(trials);
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(t));
        const SymGraph A = sample_vg(basis, rng, 1.0);
        const double margin = affine_exactness_margin(A, G);
        out.min_singular_margins.push_back(margin);
        if (!(margin > tol)) ++out.zero_evaluations;
    }
    if (out.zero_evaluations == 0 && out.condition_weird_holds == Tristate::yes)
        out.verdict = Verdict::generically_exact;
    else if (out.zero_evaluations == out.trials)
        out.verdict = Verdict::always_fails;
    else
        out.verdict = Verdict::inconclusive;
    return out;
}

}  // namespace dsmatch
