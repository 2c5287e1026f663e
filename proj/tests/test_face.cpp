#include "doctest.h"

#include <set>
#include <vector>

#include "dsmatch/dsopt.hpp"
#include "dsmatch/exactness.hpp"
#include "dsmatch/group_space.hpp"

using dsmatch::PermGroup;
using dsmatch::Permutation;
using dsmatch::SymGraph;

namespace {

Eigen::MatrixXd random_symmetric(int n, dsmatch::Rng& rng) {
    Eigen::MatrixXd X(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) X(i, j) = rng.normal();
    return 0.5 * (X + X.transpose());
}

// Materialized constraint matrix restricted to the support entries, built
// row by row; the slow reference the Gram shortcut must reproduce.
Eigen::MatrixXd support_system(const SymGraph& A, const SymGraph& B,
                               const std::vector<std::uint8_t>& support,
                               Eigen::VectorXd* rhs) {
    const int n = A.n();
    std::vector<int> entries;
    for (int e = 0; e < n * n; ++e)
        if (support[e]) entries.push_back(e);
    const int m = static_cast<int>(entries.size());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * n + n * n, m);
    for (int k = 0; k < m; ++k) {
        const int r = entries[k] / n, c = entries[k] % n;
        M(r, k) += 1.0;      // row sum r
        M(n + c, k) += 1.0;  // column sum c
        // (A S - S B)(i, j): S(r, c) appears with weight A(i, r) [j == c]
        // minus B(c, j) [i == r].
        for (int i = 0; i < n; ++i) M(2 * n + i * n + c, k) += A(i, r);
        for (int j = 0; j < n; ++j) M(2 * n + r * n + j, k) -= B(c, j);
    }
    if (rhs) {
        *rhs = Eigen::VectorXd::Zero(2 * n + n * n);
        rhs->head(2 * n).setOnes();
    }
    return M;
}

}  // namespace

TEST_CASE("face basis matches the materialized constraint system") {
    const PermGroup G = dsmatch::reversal_group(4);
    dsmatch::Rng rng(3);
    const SymGraph A = dsmatch::sample_vg(dsmatch::build_basis(G), rng);
    const dsmatch::SupportMask mask = dsmatch::support_mask(G);
    std::vector<std::uint8_t> support(16, 0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) support[i * 4 + j] = mask.allowed(i, j);

    const dsmatch::FaceBasis basis = dsmatch::build_face_basis(A, A, support);
    REQUIRE(basis.n == 4);
    REQUIRE(static_cast<int>(basis.entries.size()) == mask.count());

    Eigen::VectorXd rhs;
    const Eigen::MatrixXd M = support_system(A, A, support, &rhs);

    // The reference point solves the system.
    Eigen::VectorXd sref(basis.entries.size());
    for (std::size_t k = 0; k < basis.entries.size(); ++k) {
        const int e = basis.entries[k];
        sref(static_cast<int>(k)) = basis.S_ref(e / 4, e % 4);
    }
    CHECK((M * sref - rhs).norm() < 1e-7);

    // Every direction is in the kernel, unit norm, pairwise orthogonal.
    for (int a = 0; a < basis.dim(); ++a) {
        CHECK((M * basis.dirs.col(a)).norm() < 1e-6);
        CHECK(std::abs(basis.dirs.col(a).norm() - 1.0) < 1e-10);
        for (int b = a + 1; b < basis.dim(); ++b)
            CHECK(std::abs(basis.dirs.col(a).dot(basis.dirs.col(b))) < 1e-10);
    }

    // Dimension agrees with an SVD of the materialized system.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const Eigen::VectorXd sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) rank += sv(i) > 1e-8 * sv(0);
    CHECK(basis.dim() == static_cast<int>(basis.entries.size()) - rank);

    // Off-support entries of the reference point are exact zeros.
    for (int e = 0; e < 16; ++e)
        if (!support[e]) CHECK(basis.S_ref(e / 4, e % 4) == 0.0);

    // dir_mats mirror the coordinate columns.
    REQUIRE(static_cast<int>(basis.dir_mats.size()) == basis.dim());
    for (int a = 0; a < basis.dim(); ++a) {
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(4, 4);
        for (std::size_t k = 0; k < basis.entries.size(); ++k)
            D(basis.entries[k] / 4, basis.entries[k] % 4) = basis.dirs(static_cast<int>(k), a);
        CHECK((D - basis.dir_mats[a]).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("supports with no feasible point are rejected") {
    dsmatch::Rng rng(5);
    const Eigen::MatrixXd A = random_symmetric(3, rng);
    std::vector<std::uint8_t> support(9, 0);
    support[0] = 1;  // a single entry cannot satisfy both sum constraints
    CHECK_THROWS_AS(dsmatch::build_face_basis(SymGraph(A), SymGraph(A), support),
                    dsmatch::InfeasibleState);
}

TEST_CASE("identity-only support yields a zero-dimensional face at the identity") {
    dsmatch::Rng rng(7);
    const Eigen::MatrixXd A = random_symmetric(4, rng);
    std::vector<std::uint8_t> support(16, 0);
    for (int i = 0; i < 4; ++i) support[i * 4 + i] = 1;
    const dsmatch::FaceBasis basis = dsmatch::build_face_basis(SymGraph(A), SymGraph(A), support);
    CHECK(basis.dim() == 0);
    CHECK((basis.S_ref - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("face walk from the centroid lands on an automorphism") {
    const PermGroup G = dsmatch::reversal_group(6);
    dsmatch::Rng rng(11);
    const SymGraph A = dsmatch::sample_vg(dsmatch::build_basis(G), rng);
    const Eigen::MatrixXd Sc = dsmatch::centroid_from_orbits(dsmatch::vertex_orbits(G));

    const dsmatch::FaceState out = dsmatch::pataki_extract(A, A, Sc);
    CHECK(out.affine_dim == 0);
    std::vector<int> images;
    REQUIRE(dsmatch::is_near_permutation(out.S.S, 1e-7, &images));
    CHECK(G.contains(Permutation(images)));
    // Off-support entries are exact zeros.
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            if (!out.on_support(i, j)) CHECK(out.S.S(i, j) == 0.0);
}

TEST_CASE("steered walks pick the objective-optimal vertex") {
    const PermGroup G = dsmatch::reversal_group(6);
    dsmatch::Rng rng(13);
    const SymGraph A = dsmatch::sample_vg(dsmatch::build_basis(G), rng);
    const Eigen::MatrixXd Sc = dsmatch::centroid_from_orbits(dsmatch::vertex_orbits(G));

    // Favor the identity, then the reversal; the hull has just these two
    // vertices, so the steered walk must find each.
    for (const Permutation& want : G.elements()) {
        const Eigen::MatrixXd C = -want.matrix();
        dsmatch::FaceWalkOptions opts;
        opts.steer = &C;
        const dsmatch::FaceState out = dsmatch::pataki_extract(A, A, Sc, opts);
        std::vector<int> images;
        REQUIRE(dsmatch::is_near_permutation(out.S.S, 1e-7, &images));
        CHECK(Permutation(images) == want);
    }
}

TEST_CASE("face walk refuses points far from the zero-energy set") {
    dsmatch::Rng rng(17);
    const Eigen::MatrixXd A = random_symmetric(5, rng);
    Eigen::MatrixXd B = random_symmetric(5, rng);
    B *= 3.0;  // no doubly stochastic S has A S = S B here
    CHECK_THROWS_AS(
        dsmatch::pataki_extract(SymGraph(A), SymGraph(B),
                                Eigen::MatrixXd::Constant(5, 5, 0.2)),
        dsmatch::Error);
}

TEST_CASE("face affine space is empty exactly at extreme points") {
    const PermGroup G = dsmatch::reversal_group(4);
    dsmatch::Rng rng(19);
    const SymGraph A = dsmatch::sample_vg(dsmatch::build_basis(G), rng);
    const Eigen::MatrixXd Sc = dsmatch::centroid_from_orbits(dsmatch::vertex_orbits(G));

    const dsmatch::FaceState vertex = dsmatch::pataki_extract(A, A, Sc);
    CHECK(dsmatch::face_affine_space(A, A, vertex).empty());

    dsmatch::FaceState centroid_state{
        dsmatch::DSMatrix{Sc}, std::vector<std::uint8_t>(16, 0), -1};
    for (int e = 0; e < 16; ++e) centroid_state.support[e] = Sc(e / 4, e % 4) > 0.0;
    const auto dirs = dsmatch::face_affine_space(A, A, centroid_state);
    CHECK(dirs.size() == 1);  // segment between the two automorphisms
    for (const auto& D : dirs) {
        CHECK((A.matrix() * D - D * A.matrix()).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(D.rowwise().sum().cwiseAbs().maxCoeff() < 1e-7);
        CHECK(D.colwise().sum().cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("enumeration returns exactly the automorphism group") {
    dsmatch::Rng rng(23);
    for (const PermGroup& G : {dsmatch::reversal_group(4), dsmatch::reversal_group(6),
                               dsmatch::grid_reflection_group(2, 3)}) {
        const SymGraph A = dsmatch::sample_vg(dsmatch::build_basis(G), rng);
        const PermGroup truth = dsmatch::automorphism_oracle(A.matrix());
        dsmatch::EnumerateOptions opts;
        opts.seed = 7;
        const dsmatch::EnumerationResult res = dsmatch::enumerate_isomorphisms(A, A, opts);
        CHECK(res.complete);
        REQUIRE(res.isomorphisms.size() == static_cast<std::size_t>(truth.order()));
        for (std::size_t i = 0; i < res.isomorphisms.size(); ++i)
            CHECK(res.isomorphisms[i] == truth.elements()[i]);
        CHECK(res.membership_residual < 1e-8);
        CHECK(res.extractions >= truth.order());
    }
}

TEST_CASE("enumeration matches relabeled pairs") {
    const PermGroup G = dsmatch::reversal_group(5);
    dsmatch::Rng rng(29);
    const SymGraph A = dsmatch::sample_vg(dsmatch::build_basis(G), rng);
    const Permutation p({4, 1, 3, 0, 2});
    const SymGraph B(dsmatch::conjugate(A.matrix(), p));

    const dsmatch::EnumerationResult res = dsmatch::enumerate_isomorphisms(A, B);
    CHECK(res.complete);
    // Isomorphisms A -> B are Aut(A) composed with the relabeling.
    const PermGroup truth = dsmatch::automorphism_oracle(A.matrix());
    REQUIRE(res.isomorphisms.size() == static_cast<std::size_t>(truth.order()));
    for (const auto& q : res.isomorphisms) {
        CHECK(dsmatch::conjugation_residual(A.matrix(), B.matrix(), q) < 1e-7);
        CHECK(truth.contains(q.compose(p.inverse())));
    }
}

TEST_CASE("enumeration precondition rejects the free 3-cycle instance") {
    const PermGroup G = dsmatch::cyclic_group(3, 2);
    dsmatch::Rng rng(31);
    const SymGraph A = dsmatch::sample_vg(dsmatch::build_basis(G), rng);
    CHECK_THROWS_AS(dsmatch::enumerate_isomorphisms(A, A), dsmatch::PreconditionFailed);

    // Forcing past the check either trips on a fractional extreme point or
    // returns genuine automorphisms only; both are sound outcomes, and any
    // permutation it does report must really commute with A.
    dsmatch::EnumerateOptions opts;
    opts.check_preconditions = false;
    opts.max_extractions = 40;
    try {
        const dsmatch::EnumerationResult res = dsmatch::enumerate_isomorphisms(A, A, opts);
        for (const auto& q : res.isomorphisms)
            CHECK(dsmatch::conjugation_residual(A.matrix(), A.matrix(), q) < 1e-6);
    } catch (const dsmatch::NonPermutationExtreme&) {
        // expected on an instance whose polytope has fractional vertices
    }
}

TEST_CASE("objective-driven extraction is deterministic and feasible") {
    const PermGroup G = dsmatch::reversal_group(6);
    dsmatch::Rng rng(37);
    const SymGraph A = dsmatch::sample_vg(dsmatch::build_basis(G), rng);
    Eigen::MatrixXd C(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) C(i, j) = rng.normal();

    const dsmatch::FaceState a = dsmatch::random_objective_extreme_point(A, A, C);
    const dsmatch::FaceState b = dsmatch::random_objective_extreme_point(A, A, C);
    CHECK(a.affine_dim == 0);
    CHECK((a.S.S - b.S.S).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.S.feasibility_error() < 1e-8);
    CHECK((A.matrix() * a.S.S - a.S.S * A.matrix()).cwiseAbs().maxCoeff() < 1e-6);

    // With only two zero-energy vertices the output is one of them, and it
    // is the one the objective prefers.
    std::vector<int> images;
    REQUIRE(dsmatch::is_near_permutation(a.S.S, 1e-7, &images));
    const Permutation got(images);
    double best = 1e300;
    Permutation want;
    for (const auto& g : G.elements()) {
        const double v = (C.array() * g.matrix().array()).sum();
        if (v < best) {
            best = v;
            want = g;
        }
    }
    CHECK(got == want);
}
