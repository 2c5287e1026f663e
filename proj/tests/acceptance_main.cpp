// Acceptance suite: one self-contained check per shipped behavior, each with
// a pinned tolerance and a wall-clock budget.  Prints one PASS/FAIL line per
// criterion and exits with the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "dsmatch/dsopt.hpp"
#include "dsmatch/errors.hpp"
#include "dsmatch/exactness.hpp"
#include "dsmatch/experiments.hpp"
#include "dsmatch/generators.hpp"
#include "dsmatch/group_space.hpp"
#include "dsmatch/projection.hpp"
#include "rational_nullspace.hpp"

using dsmatch::PermGroup;
using dsmatch::Permutation;
using dsmatch::SymGraph;

namespace {

struct Criterion {
    std::string name;
    double budget_ms;
    std::function<void(std::vector<std::string>&)> run;
};

std::string source_dir() {
#ifdef DSMATCH_SOURCE_DIR
    return DSMATCH_SOURCE_DIR;
#else
    return ".";
#endif
}

PermGroup shipped_group(const std::string& stem) {
    return dsmatch::load_group_spec(source_dir() + "/groups/" + stem + ".json").group;
}

void expect(std::vector<std::string>& fails, bool ok, const std::string& what) {
    if (!ok) fails.push_back(what);
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double off_mask_mass(const Eigen::MatrixXd& S, const dsmatch::SupportMask& mask) {
    double m = 0.0;
    for (int i = 0; i < mask.n; ++i)
        for (int j = 0; j < mask.n; ++j)
            if (!mask.allowed(i, j)) m += std::abs(S(i, j));
    return m;
}

// Distance from S to the nearest member of the permutation list.
double nearest_perm_dist(const Eigen::MatrixXd& S, const std::vector<Permutation>& perms) {
    double best = 1e300;
    for (const auto& p : perms) best = std::min(best, (S - p.matrix()).norm());
    return best;
}

// ---- criterion bodies ----

void c1_counterexample(std::vector<std::string>& fails) {
    const dsmatch::CounterexampleReport rep = dsmatch::cmd_counterexample();
    expect(fails, rep.row_sums_constant, "row sums of the 3x3 example are not exactly 9");
    expect(fails, rep.flat_energy <= 1e-12,
           "flat matrix energy " + num(rep.flat_energy) + " > 1e-12");
    expect(fails, rep.aut_order == 1,
           "automorphism order " + std::to_string(rep.aut_order) + " != 1");
    expect(fails, rep.identity_distance <= 1e-6,
           "augmented solve is " + num(rep.identity_distance) + " from the identity (> 1e-6)");
}

void c2_weak_exactness(std::vector<std::string>& fails) {
    const std::vector<std::string> stems = {"trivial_n6", "pi3_n3", "z2_n10",
                                            "z2z2_grid34", "free_z3_n6"};
    for (const auto& stem : stems) {
        const PermGroup G = shipped_group(stem);
        expect(fails, G.degree() <= 12, stem + ": degree > 12");
        const dsmatch::GroupSpaceBasis basis = dsmatch::build_basis(G);
        const dsmatch::OrbitPartition orbits = dsmatch::vertex_orbits(G);
        const dsmatch::SupportMask mask = dsmatch::support_mask(G);
        int discriminative = 0;
        double worst_mass = 0.0;
        for (int t = 0; t < 100; ++t) {
            dsmatch::Rng rng = dsmatch::Rng::stream(101, t);
            const SymGraph A = dsmatch::sample_vg(basis, rng);
            if (dsmatch::is_discriminative(dsmatch::signature(A), orbits)) ++discriminative;
            dsmatch::SolveOptions so;
            so.grad_tol = 1e-12;
            const dsmatch::SolveResult res = dsmatch::solve_relaxation(A, A, so);
            worst_mass = std::max(worst_mass, off_mask_mass(res.S.S, mask));
        }
        expect(fails, discriminative >= 99,
               stem + ": only " + std::to_string(discriminative) + "/100 discriminative");
        expect(fails, worst_mass <= 1e-6,
               stem + ": off-support mass up to " + num(worst_mass) + " (> 1e-6)");
    }
}

void c3_convex_exactness(std::vector<std::string>& fails) {
    const PermGroup G = dsmatch::reversal_group(10);
    const dsmatch::GroupSpaceBasis basis = dsmatch::build_basis(G);
    const Eigen::MatrixXd Sc = dsmatch::centroid_from_orbits(dsmatch::vertex_orbits(G));
    int hits = 0;
    for (int t = 0; t < 100; ++t) {
        dsmatch::Rng rng = dsmatch::Rng::stream(103, t);
        const SymGraph A = dsmatch::sample_vg(basis, rng);
        try {
            const dsmatch::FaceState fs = dsmatch::pataki_extract(A, A, Sc);
            std::vector<int> images;
            if (!dsmatch::is_near_permutation(fs.S.S, 1e-6, &images)) continue;
            if (dsmatch::automorphism_oracle(A.matrix()).contains(Permutation(images))) ++hits;
        } catch (const dsmatch::Error&) {
        }
    }
    expect(fails, hits >= 99,
           "extraction landed on an oracle-verified automorphism in only " +
               std::to_string(hits) + "/100 trials");
}

void c4_classification(std::vector<std::string>& fails) {
    const auto verdict_of = [](const PermGroup& G) {
        return dsmatch::classify_generic(G, 20, 104).verdict;
    };
    expect(fails, verdict_of(dsmatch::reversal_group(10)) == dsmatch::Verdict::generically_exact,
           "reversal group on 10 points not classified GenericallyExact");
    expect(fails,
           verdict_of(dsmatch::grid_reflection_group(3, 4)) ==
               dsmatch::Verdict::generically_exact,
           "3x4 grid reflection group not classified GenericallyExact");
    const PermGroup z3 = dsmatch::cyclic_group(3, 2);
    expect(fails, verdict_of(z3) == dsmatch::Verdict::always_fails,
           "free 3-cycle group on 6 points not classified AlwaysFails");

    // Exact rational confirmation on one integer instance: the matching
    // kernel strictly exceeds the isomorphism difference span.
    std::vector<long> coeffs;
    dsmatch::Rng rng(105);
    const int n_classes = dsmatch::pair_orbits(z3).size();
    for (int i = 0; i < n_classes; ++i)
        coeffs.push_back(static_cast<long>(rng.below(23)) + 1 + 3 * i);
    const int ker = oracle::matching_kernel_dim(z3, coeffs);
    const int span = oracle::difference_span_dim(z3);
    expect(fails, ker > span,
           "rational oracle: kernel dim " + std::to_string(ker) +
               " does not exceed difference span dim " + std::to_string(span));
}

void c5_random_objective(std::vector<std::string>& fails) {
    const dsmatch::Table1Row z2 =
        dsmatch::table1_row("z2_n10", dsmatch::reversal_group(10), 100, 106, false);
    expect(fails, z2.permutations == 100,
           "convex-exact group: only " + std::to_string(z2.permutations) +
               "/100 extreme points were permutations");

    const dsmatch::Table1Row z3 =
        dsmatch::table1_row("free_z3_n6", dsmatch::cyclic_group(3, 2), 100, 106, false);
    expect(fails, z3.fractional >= 1, "free 3-cycle group: no fractional extreme point seen");
    expect(fails, z3.permutations > 50,
           "free 3-cycle group: only " + std::to_string(z3.permutations) +
               "/100 permutations (need > 50)");
}

void c6_grid_enumeration(std::vector<std::string>& fails) {
    const dsmatch::GridSymmetryReport rep = dsmatch::cmd_grid_symmetries(20, 25, 1, true);
    expect(fails, rep.complete, "20x25 enumeration did not certify completeness");
    expect(fails, rep.closed, "20x25 result list is not closed under composition");
    expect(fails, rep.perms.size() == 4,
           "20x25 grid returned " + std::to_string(rep.perms.size()) + " permutations, not 4");
    expect(fails, rep.wall_ms < 120000.0,
           "20x25 enumeration took " + num(rep.wall_ms / 1000.0) + " s (budget 120 s)");

    const dsmatch::GridSymmetryReport small = dsmatch::cmd_grid_symmetries(3, 4, 1, false);
    const PermGroup truth = dsmatch::automorphism_oracle(dsmatch::gen_grid(3, 4).matrix());
    bool same = small.perms.size() == static_cast<std::size_t>(truth.order());
    for (std::size_t i = 0; same && i < small.perms.size(); ++i)
        same = small.perms[i] == truth.elements()[i];
    expect(fails, same, "3x4 grid enumeration differs from the exhaustive oracle");
}

void c7_centroid_convergence(std::vector<std::string>& fails) {
    const PermGroup G = dsmatch::reversal_group(10);
    const dsmatch::GroupSpaceBasis basis = dsmatch::build_basis(G);
    const dsmatch::OrbitPartition orbits = dsmatch::vertex_orbits(G);
    const Eigen::MatrixXd Sc = dsmatch::centroid_from_orbits(orbits);

    dsmatch::Rng rng(107);
    const SymGraph A = dsmatch::sample_vg(basis, rng);
    const dsmatch::PenaltyResult res = dsmatch::penalty_solve(A, A);
    const double dist = (res.S.S - Sc).norm();
    expect(fails, dist <= 1e-3,
           "entropy path ended " + num(dist) + " from the orbit centroid (> 1e-3)");

    int exact = 0, usable = 0;
    for (int t = 0; t < 100; ++t) {
        dsmatch::Rng r = dsmatch::Rng::stream(107, t + 1);
        const SymGraph X = dsmatch::sample_vg(basis, r);
        if (!dsmatch::is_discriminative(dsmatch::signature(X), orbits)) continue;
        ++usable;
        if ((dsmatch::centroid_from_signature(X) - Sc).cwiseAbs().maxCoeff() == 0.0) ++exact;
    }
    expect(fails, usable >= 99, "only " + std::to_string(usable) + "/100 samples discriminative");
    expect(fails, exact == usable,
           std::to_string(exact) + "/" + std::to_string(usable) +
               " signature centroids matched the orbit centroid exactly");
}

void c8_spectral_endpoints(std::vector<std::string>& fails) {
    const PermGroup G = dsmatch::reversal_group(10);
    dsmatch::Rng rng(108);
    const SymGraph A = dsmatch::sample_vg(dsmatch::build_basis(G), rng);
    const dsmatch::SpectralEndpoints se = dsmatch::spectral_endpoints(A, A);
    expect(fails, se.lambda_min <= 1e-8,
           "lambda_min " + num(se.lambda_min) + " > 1e-8 on an automorphism-rich instance");

    // Independent check of strict concavity at the final weight: assemble
    // the projected quadratic form from scratch and bound its eigenvalues.
    const int n = 10;
    Eigen::MatrixXd constraints = Eigen::MatrixXd::Zero(2 * n, n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            constraints(i, i + j * n) = 1.0;
            constraints(n + j, i + j * n) = 1.0;
        }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraints, Eigen::ComputeFullV);
    const int k = (n - 1) * (n - 1);
    const Eigen::MatrixXd N = svd.matrixV().rightCols(k);
    std::vector<Eigen::MatrixXd> maps(k);
    for (int a = 0; a < k; ++a) {
        const Eigen::MatrixXd D = Eigen::Map<const Eigen::MatrixXd>(N.col(a).data(), n, n);
        maps[a] = A.matrix() * D - D * A.matrix();
    }
    Eigen::MatrixXd H(k, k);
    for (int a = 0; a < k; ++a)
        for (int b = a; b < k; ++b) {
            H(a, b) = (maps[a].array() * maps[b].array()).sum();
            H(b, a) = H(a, b);
        }
    const double aN = se.lambda_max * (1.0 + 1e-3);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        2.0 * (H - aN * Eigen::MatrixXd::Identity(k, k)));
    const double top = eig.eigenvalues().maxCoeff();
    expect(fails, top <= -1e-9,
           "projected Hessian at the final weight has eigenvalue " + num(top) + " > -1e-9");
}

void c9_dspp_noiseless(std::vector<std::string>& fails) {
    const PermGroup G = dsmatch::reversal_group(10);
    const dsmatch::GroupSpaceBasis basis = dsmatch::build_basis(G);
    int good = 0;
    double worst_offset = 0.0;
    for (int t = 0; t < 100; ++t) {
        dsmatch::Rng rng = dsmatch::Rng::stream(109, t);
        const SymGraph A = dsmatch::sample_vg(basis, rng);
        const PermGroup aut = dsmatch::automorphism_oracle(A.matrix());
        const std::vector<Permutation>& iso = aut.elements();
        dsmatch::PathOptions po;
        po.second_order_max_n = 0;
        po.endpoint_max_n = 60;
        const dsmatch::PathReport rep = dsmatch::dspp_path(A, A, 10, po);
        bool ok = true;
        for (std::size_t i = 1; i < rep.stages.size(); ++i) {
            const double d = nearest_perm_dist(rep.stages[i].S, iso);
            worst_offset = std::max(worst_offset, d);
            if (d > 1e-6) ok = false;
        }
        bool in_group = false;
        for (const auto& p : iso) in_group = in_group || p == rep.final;
        good += (ok && in_group) ? 1 : 0;
    }
    expect(fails, good >= 99,
           "path stayed on the isomorphism set in only " + std::to_string(good) +
               "/100 trials (worst stage offset " + num(worst_offset) + ")");
}

void c10_noise_sweep(std::vector<std::string>& fails) {
    dsmatch::ExperimentConfig cfg;  // defaults: n=8, 100 trials, both methods
    const dsmatch::NoiseExperimentResult res = dsmatch::cmd_noise_experiment(cfg);

    std::vector<double> exps;
    for (int k = 0; k < 10; ++k) exps.push_back(-3.0 + 3.0 * k / 9.0);
    const auto ratio_at = [&](const std::string& method, double eps) {
        for (const auto& c : res.cells)
            if (c.method == method && std::abs(c.epsilon - eps) < 1e-12 * std::max(1.0, eps))
                return c.ratio;
        return -1.0;
    };

    const double eps_lo = std::pow(10.0, exps.front());
    expect(fails, ratio_at("ds_l2", eps_lo) >= 0.95,
           "ds_l2 ratio at eps=1e-3 is " + num(ratio_at("ds_l2", eps_lo)) + " (< 0.95)");
    expect(fails, ratio_at("dspp", eps_lo) >= 0.95,
           "dspp ratio at eps=1e-3 is " + num(ratio_at("dspp", eps_lo)) + " (< 0.95)");

    double mean_l2 = 0.0, mean_pp = 0.0;
    for (int k = 5; k < 10; ++k) {
        const double eps = std::pow(10.0, exps[k]);
        mean_l2 += ratio_at("ds_l2", eps) / 5.0;
        mean_pp += ratio_at("dspp", eps) / 5.0;
    }
    expect(fails, mean_pp >= mean_l2,
           "upper-half mean ratio: dspp " + num(mean_pp) + " < ds_l2 " + num(mean_l2));

    const double eps_hi = std::pow(10.0, exps.back());
    const double gt = ratio_at("ground_truth", eps_hi);
    expect(fails, gt >= 0.0, "ground truth cell missing at the largest noise level");
    expect(fails, gt < 1.0,
           "ground truth ratio at eps=1 is " + num(gt) + "; noise never displaced the planted group");
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {"counterexample suite", 1000.0, c1_counterexample},
        {"weak exactness across shipped groups", 60000.0, c2_weak_exactness},
        {"convex exactness extraction (Z2, n=10)", 120000.0, c3_convex_exactness},
        {"generic exactness classification", 60000.0, c4_classification},
        {"random-objective extreme points", 300000.0, c5_random_objective},
        {"grid symmetry enumeration", 120000.0, c6_grid_enumeration},
        {"penalty path centroid convergence", 60000.0, c7_centroid_convergence},
        {"spectral endpoints and final-stage concavity", 30000.0, c8_spectral_endpoints},
        {"convex-to-concave path on noiseless instances", 300000.0, c9_dspp_noiseless},
        {"noise sweep retrieval ratios", 900000.0, c10_noise_sweep},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::vector<std::string> fails;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[i].run(fails);
        } catch (const std::exception& e) {
            fails.push_back(std::string("exception: ") + e.what());
        }
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        if (ms > criteria[i].budget_ms)
            fails.push_back("over budget: " + num(ms / 1000.0) + " s > " +
                            num(criteria[i].budget_ms / 1000.0) + " s");
        if (fails.empty()) {
            std::printf("[PASS] %2zu %s (%.1f s, budget %.0f s)\n", i + 1,
                        criteria[i].name.c_str(), ms / 1000.0, criteria[i].budget_ms / 1000.0);
        } else {
            ++failures;
            std::printf("[FAIL] %2zu %s (%.1f s, budget %.0f s)\n", i + 1,
                        criteria[i].name.c_str(), ms / 1000.0, criteria[i].budget_ms / 1000.0);
            for (const auto& f : fails) std::printf("       - %s\n", f.c_str());
        }
        std::fflush(stdout);
    }
    if (failures == 0)
        std::printf("all %zu criteria passed\n", criteria.size());
    else
        std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures;
}
