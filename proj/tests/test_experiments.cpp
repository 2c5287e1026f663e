#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>

#include "dsmatch/experiments.hpp"
#include "dsmatch/generators.hpp"

using dsmatch::PermGroup;
using dsmatch::Permutation;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/dsmatch_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("group spec files round-trip") {
    TempFile f("roundtrip.json");
    const PermGroup G = dsmatch::grid_reflection_group(2, 3);
    std::vector<Permutation> gens = {G.elements()[1], G.elements()[2]};
    dsmatch::save_group_spec(f.path, "grid23", 6, gens);

    const dsmatch::GroupSpec spec = dsmatch::load_group_spec(f.path);
    CHECK(spec.name == "grid23");
    CHECK(spec.group == G);
}

TEST_CASE("group spec name falls back to the file stem") {
    TempFile f("reversal4.json");
    write_text(f.path, R"({"n": 4, "generators": [[3, 2, 1, 0]]})");
    const dsmatch::GroupSpec spec = dsmatch::load_group_spec(f.path);
    CHECK(spec.name == "dsmatch_test_reversal4");
    CHECK(spec.group == dsmatch::reversal_group(4));
}

TEST_CASE("group spec loader rejects malformed input") {
    TempFile f("bad.json");

    write_text(f.path, "not json at all");
    CHECK_THROWS_AS(dsmatch::load_group_spec(f.path), dsmatch::IoError);

    write_text(f.path, R"({"generators": [[0, 1]]})");  // n missing
    CHECK_THROWS_AS(dsmatch::load_group_spec(f.path), dsmatch::IoError);

    write_text(f.path, R"({"n": 3, "generators": [[0, 1]]})");  // wrong degree
    CHECK_THROWS_AS(dsmatch::load_group_spec(f.path), dsmatch::IoError);

    write_text(f.path, R"({"n": 3, "generators": [[0, 0, 1]]})");  // not a bijection
    CHECK_THROWS_AS(dsmatch::load_group_spec(f.path), dsmatch::IoError);

    CHECK_THROWS_AS(dsmatch::load_group_spec("/tmp/dsmatch_no_such_file.json"),
                    dsmatch::IoError);
}

TEST_CASE("grid matrices are lattice distance matrices") {
    const dsmatch::SymGraph G2 = dsmatch::gen_grid(1, 2);
    CHECK(G2.n() == 2);
    CHECK(G2(0, 0) == 0.0);
    CHECK(G2(0, 1) == 1.0);

    const dsmatch::SymGraph G = dsmatch::gen_grid(2, 3);
    CHECK(G.n() == 6);
    // (0,0) to (1,2): sqrt(1 + 4).
    CHECK(G(0, 5) == doctest::Approx(std::sqrt(5.0)));
    CHECK(G(1, 4) == doctest::Approx(1.0));

    CHECK_THROWS_AS(dsmatch::gen_grid(0, 3), dsmatch::PreconditionFailed);
}

TEST_CASE("small grid automorphisms are the reflection group") {
    const dsmatch::SymGraph G = dsmatch::gen_grid(3, 4);
    const PermGroup aut = dsmatch::automorphism_oracle(G.matrix());
    CHECK(aut.order() == 4);
    CHECK(aut == dsmatch::stabilizer_closure(dsmatch::grid_reflection_group(3, 4)));
    CHECK(dsmatch::grid_expected_symmetries(3, 4) == 4);
    CHECK(dsmatch::grid_expected_symmetries(2, 2) == 8);
    CHECK(dsmatch::grid_expected_symmetries(1, 5) == 2);
    CHECK(dsmatch::grid_expected_symmetries(1, 1) == 1);
}

TEST_CASE("noisy pairs have exactly the requested perturbation size") {
    const PermGroup G = dsmatch::reversal_group(6);
    dsmatch::Rng rng(81);
    const dsmatch::NoisyPair clean = dsmatch::gen_noisy_pair(G, 0.0, rng);
    CHECK((clean.A.matrix() - clean.B.matrix()).cwiseAbs().maxCoeff() == 0.0);

    // Same seed at epsilon 0 exposes the invariant center; both sides of the
    // noisy pair must sit exactly 0.25 away from it in Frobenius norm.
    dsmatch::Rng r0(91), r1(91);
    const dsmatch::NoisyPair center = dsmatch::gen_noisy_pair(G, 0.0, r0);
    const dsmatch::NoisyPair noisy = dsmatch::gen_noisy_pair(G, 0.25, r1);
    CHECK((noisy.A.matrix() - center.A.matrix()).norm() ==
          doctest::Approx(0.25).epsilon(1e-12));
    CHECK((noisy.B.matrix() - center.A.matrix()).norm() ==
          doctest::Approx(0.25).epsilon(1e-12));
    CHECK((noisy.A.matrix() - noisy.B.matrix()).cwiseAbs().maxCoeff() > 0.0);

    CHECK_THROWS_AS(dsmatch::gen_noisy_pair(G, -1.0, rng), dsmatch::PreconditionFailed);
}

TEST_CASE("classify command accepts symmetry groups and rejects others") {
    const dsmatch::ClassifyOutcome oc =
        dsmatch::cmd_classify("z2", dsmatch::reversal_group(6), 15, 5);
    CHECK(oc.group == "z2");
    CHECK(oc.degree == 6);
    CHECK(oc.verdict.verdict == dsmatch::Verdict::generically_exact);
    CHECK(oc.exit_code == 0);

    // A free 3-cycle on 3 points shares its invariant space with all of S3.
    CHECK_THROWS_AS(dsmatch::cmd_classify("z3", dsmatch::cyclic_group(3, 1), 5, 5),
                    dsmatch::NotSymmetryGroup);

    const std::string json = dsmatch::classify_json(oc);
    CHECK(json.find("\"verdict\": \"GenericallyExact\"") != std::string::npos);
    CHECK(json.find("\"group\": \"z2\"") != std::string::npos);
    CHECK(json.back() == '\n');
}

TEST_CASE("table rows tally permutation and fractional extractions") {
    const dsmatch::Table1Row row =
        dsmatch::table1_row("z2", dsmatch::reversal_group(6), 12, 3, false);
    CHECK(row.group == "z2");
    CHECK(row.n == 6);
    CHECK(row.trials == 12);
    CHECK(row.permutations + row.fractional == 12);
    CHECK(row.permutations == 12);  // convex-exact group: never fractional
    CHECK(row.ratio == doctest::Approx(1.0));
    CHECK(row.mean_wall_ms == 0.0);

    const std::string csv = dsmatch::table1_csv({row});
    CHECK(csv.find("group,n,trials,permutations,fractional,ratio,mean_wall_ms") == 0);
    CHECK(csv.find("z2,6,12,12,0,1.000000,0.000") != std::string::npos);
}

TEST_CASE("grid symmetry enumeration on the oracle-checkable grid") {
    const dsmatch::GridSymmetryReport rep = dsmatch::cmd_grid_symmetries(3, 4, 1, false);
    CHECK(rep.rows == 3);
    CHECK(rep.cols == 4);
    CHECK(rep.n == 12);
    CHECK(rep.complete);
    CHECK(rep.closed);
    CHECK(rep.expected_order == 4);
    REQUIRE(rep.perms.size() == 4);
    const PermGroup truth = dsmatch::automorphism_oracle(dsmatch::gen_grid(3, 4).matrix());
    for (std::size_t i = 0; i < rep.perms.size(); ++i)
        CHECK(rep.perms[i] == truth.elements()[i]);

    const std::string json = dsmatch::grid_symmetries_json(rep);
    CHECK(json.find("\"complete\": true") != std::string::npos);
    CHECK(json.find("\"order\": 4") != std::string::npos);
}

TEST_CASE("noise experiment aggregates trials into cells") {
    dsmatch::ExperimentConfig cfg;
    cfg.seed = 9;
    cfg.trials = 4;
    cfg.sizes = {6};
    cfg.noise_exponents = {-3.0, 0.0};
    cfg.methods = {"ds_l2"};
    cfg.timing = false;
    const dsmatch::NoiseExperimentResult res = dsmatch::cmd_noise_experiment(cfg);

    // One cell per (epsilon, method) plus the ground-truth rows at n = 6 <= 8.
    REQUIRE(res.cells.size() == 4);
    for (const auto& cell : res.cells) {
        CHECK(cell.group == "z2_reversal");
        CHECK(cell.n == 6);
        CHECK(cell.trials == 4);
        CHECK(cell.ratio == doctest::Approx(cell.successes / 4.0));
        CHECK(cell.mean_wall_ms == 0.0);
    }
    CHECK(res.records.size() == 2 * 2 * 4);  // (method + ground truth) x eps x trials

    // Tiny noise: the method should succeed every time at n = 6.
    int low_eps_successes = -1;
    for (const auto& cell : res.cells)
        if (cell.method == "ds_l2" && std::abs(cell.epsilon - 1e-3) < 1e-15)
            low_eps_successes = cell.successes;
    CHECK(low_eps_successes == 4);

    // Determinism: identical config, identical CSV bytes.
    const std::string csv1 = dsmatch::noise_csv(res);
    const std::string csv2 = dsmatch::noise_csv(dsmatch::cmd_noise_experiment(cfg));
    CHECK(csv1 == csv2);
    CHECK(csv1.find("group,n,epsilon,method,trials,successes,ratio,mean_wall_ms") == 0);
}

TEST_CASE("noise experiment validates its configuration") {
    dsmatch::ExperimentConfig cfg;
    cfg.methods = {"no_such_method"};
    cfg.trials = 2;
    cfg.sizes = {4};
    cfg.noise_exponents = {-2.0};
    CHECK_THROWS_AS(dsmatch::cmd_noise_experiment(cfg), dsmatch::PreconditionFailed);

    cfg.methods = {"ds_l2"};
    cfg.sizes = {1};  // degenerate size
    CHECK_THROWS_AS(dsmatch::cmd_noise_experiment(cfg), dsmatch::PreconditionFailed);

    cfg.sizes = {4};
    cfg.trials = 0;
    CHECK_THROWS_AS(dsmatch::cmd_noise_experiment(cfg), dsmatch::PreconditionFailed);
}

TEST_CASE("counterexample suite recovers the identity") {
    const dsmatch::CounterexampleReport rep = dsmatch::cmd_counterexample();
    CHECK(rep.row_sums_constant);
    CHECK((rep.A0.rowwise().sum().array() == 9.0).all());
    CHECK(rep.flat_energy <= 1e-12);
    CHECK(rep.aut_order == 1);
    CHECK(rep.identity_distance <= 1e-6);
    CHECK(rep.identity_recovered);

    const std::string json = dsmatch::counterexample_json(rep);
    CHECK(json.find("\"identity_recovered\": true") != std::string::npos);
}
