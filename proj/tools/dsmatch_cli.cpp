#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dsmatch/dsopt.hpp"
#include "dsmatch/experiments.hpp"
#include "dsmatch/generators.hpp"
#include "dsmatch/projection.hpp"
#include "dsmatch/sym_graph.hpp"

namespace {

void emit(const std::string& text, const std::string& output) {
    if (output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(output);
    if (!out) throw dsmatch::IoError("cannot write " + output);
    out << text;
}

dsmatch::PermGroup make_group(const std::string& kind, int n, int k, int copies, int rows,
                              int cols) {
    if (kind == "reversal") return dsmatch::reversal_group(n);
    if (kind == "cyclic") return dsmatch::cyclic_group(k, copies);
    if (kind == "dihedral") return dsmatch::dihedral_group(k, copies);
    if (kind == "grid") return dsmatch::grid_reflection_group(rows, cols);
    if (kind == "symmetric") return dsmatch::symmetric_group(n);
    if (kind == "trivial") return dsmatch::PermGroup::trivial(n);
    throw dsmatch::PreconditionFailed("unknown group kind '" + kind + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Doubly stochastic relaxation toolkit for symmetric graph matching"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    int trials = 100;
    double tol = 1e-8;
    int max_iter = 5000;
    int schedule_steps = 10;
    std::string output;
    bool no_timing = false;
    app.add_option("--seed", seed, "master RNG seed")->capture_default_str();
    app.add_option("--trials", trials, "trial count")->capture_default_str();
    app.add_option("--tol", tol, "numeric tolerance")->capture_default_str();
    app.add_option("--max-iter", max_iter, "solver iteration cap")->capture_default_str();
    app.add_option("--schedule-steps", schedule_steps, "convex-to-concave schedule intervals")
        ->capture_default_str();
    app.add_option("--output", output, "write results to this file instead of stdout");
    app.add_flag("--no-timing", no_timing, "report zero wall times for byte-stable output");

    // classify
    auto* classify = app.add_subcommand(
        "classify", "generic exactness verdict for a symmetry group (exit 2 when inconclusive)");
    std::string group_file;
    classify->add_option("--group-file", group_file, "group spec JSON")->required();

    // table1
    auto* table1 = app.add_subcommand(
        "table1", "random-objective extreme point statistics per group (CSV)");
    std::vector<std::string> group_files;
    table1->add_option("--group-file", group_files, "group spec JSON (repeatable)")->required();

    // grid-symmetries
    auto* gridsym =
        app.add_subcommand("grid-symmetries", "enumerate all symmetries of a grid graph (JSON)");
    int rows = 3, cols = 4;
    gridsym->add_option("--rows", rows, "grid rows")->required();
    gridsym->add_option("--cols", cols, "grid cols")->required();

    // noise
    auto* noise =
        app.add_subcommand("noise", "retrieval-ratio noise sweep for ds_l2 and dspp (CSV)");
    std::vector<int> sizes{8};
    std::vector<std::string> methods{"ds_l2", "dspp"};
    std::vector<double> exponents;
    bool slow_gt = false;
    noise->add_option("--sizes", sizes, "instance sizes")->capture_default_str();
    noise->add_option("--method", methods, "methods to run (repeatable)")->capture_default_str();
    noise->add_option("--exponents", exponents, "noise exponents alpha, epsilon = 10^alpha");
    noise->add_flag("--slow-ground-truth", slow_gt,
                    "exhaustive ground truth at n=10 on a 10-trial subsample");

    // counterexample
    auto* counter = app.add_subcommand(
        "counterexample", "constant row-sum 3x3 suite: flat zero-energy point, invariant fix");

    // gen-grid
    auto* gengrid = app.add_subcommand("gen-grid", "write a grid distance matrix file");
    int grows = 3, gcols = 4;
    gengrid->add_option("--rows", grows, "grid rows")->required();
    gengrid->add_option("--cols", gcols, "grid cols")->required();

    // gen-group
    auto* gengroup = app.add_subcommand("gen-group", "write a group spec JSON");
    std::string kind, gname;
    int gn = 6, gk = 3, gcopies = 1, grrows = 3, grcols = 4;
    gengroup->add_option("--kind", kind, "reversal|cyclic|dihedral|grid|symmetric|trivial")
        ->required();
    gengroup->add_option("--n", gn, "degree (reversal, symmetric, trivial)");
    gengroup->add_option("--k", gk, "cycle length (cyclic, dihedral)");
    gengroup->add_option("--copies", gcopies, "disjoint copies (cyclic, dihedral)");
    gengroup->add_option("--rows", grrows, "grid rows (grid kind)");
    gengroup->add_option("--cols", grcols, "grid cols (grid kind)");
    gengroup->add_option("--name", gname, "group name stored in the spec");

    // match
    auto* match = app.add_subcommand("match", "match two graphs from matrix files (JSON)");
    std::string file_a, file_b, method = "ds_l2";
    match->add_option("--a", file_a, "matrix file for A")->required();
    match->add_option("--b", file_b, "matrix file for B")->required();
    match->add_option("--method", method, "ds_l2 or dspp")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*classify) {
            const dsmatch::GroupSpec spec = dsmatch::load_group_spec(group_file);
            const dsmatch::ClassifyOutcome oc =
                dsmatch::cmd_classify(spec.name, spec.group, trials, seed, tol);
            emit(dsmatch::classify_json(oc), output);
            return oc.exit_code;
        }
        if (*table1) {
            std::vector<dsmatch::Table1Row> rws;
            for (const auto& f : group_files) {
                const dsmatch::GroupSpec spec = dsmatch::load_group_spec(f);
                rws.push_back(
                    dsmatch::table1_row(spec.name, spec.group, trials, seed, !no_timing));
            }
            emit(dsmatch::table1_csv(rws), output);
            return 0;
        }
        if (*gridsym) {
            const dsmatch::GridSymmetryReport rep =
                dsmatch::cmd_grid_symmetries(rows, cols, seed, !no_timing);
            emit(dsmatch::grid_symmetries_json(rep), output);
            const bool ok = rep.complete && rep.closed &&
                            static_cast<int>(rep.perms.size()) == rep.expected_order;
            return ok ? 0 : 1;
        }
        if (*noise) {
            dsmatch::ExperimentConfig cfg;
            cfg.seed = seed;
            cfg.trials = trials;
            cfg.sizes = sizes;
            cfg.noise_exponents = exponents;
            cfg.methods = methods;
            cfg.schedule_steps = schedule_steps;
            cfg.max_iter = max_iter;
            cfg.slow_ground_truth = slow_gt;
            cfg.timing = !no_timing;
            emit(dsmatch::noise_csv(dsmatch::cmd_noise_experiment(cfg)), output);
            return 0;
        }
        if (*counter) {
            const dsmatch::CounterexampleReport rep = dsmatch::cmd_counterexample();
            emit(dsmatch::counterexample_json(rep), output);
            const bool ok = rep.row_sums_constant && rep.flat_energy <= 1e-12 &&
                            rep.aut_order == 1 && rep.identity_recovered;
            return ok ? 0 : 1;
        }
        if (*gengrid) {
            if (output.empty()) throw dsmatch::IoError("gen-grid requires --output");
            dsmatch::save_matrix(output, dsmatch::gen_grid(grows, gcols).matrix());
            return 0;
        }
        if (*gengroup) {
            if (output.empty()) throw dsmatch::IoError("gen-group requires --output");
            const dsmatch::PermGroup G = make_group(kind, gn, gk, gcopies, grrows, grcols);
            if (gname.empty()) gname = kind;
            dsmatch::save_group_spec(output, gname, G.degree(), G.elements());
            return 0;
        }
        if (*match) {
            const dsmatch::SymGraph A = dsmatch::load_matrix(file_a);
            const dsmatch::SymGraph B = dsmatch::load_matrix(file_b);
            dsmatch::Permutation P;
            if (method == "ds_l2") {
                dsmatch::SolveOptions so;
                so.max_iter = max_iter;
                P = dsmatch::l2_project(dsmatch::solve_relaxation(A, B, so).S.S);
            } else if (method == "dspp") {
                const dsmatch::PathReport rep = dsmatch::dspp_path(A, B, schedule_steps);
                P = rep.final;
            } else {
                throw dsmatch::PreconditionFailed("unknown method '" + method + "'");
            }
            const Eigen::MatrixXd Pm = P.matrix();
            const double energy = (A.matrix() * Pm - Pm * B.matrix()).norm();
            std::string text = "{\n  \"method\": \"" + method + "\",\n  \"energy\": " +
                               std::to_string(energy) + ",\n  \"permutation\": [";
            for (int j = 0; j < P.degree(); ++j)
                text += (j ? ", " : "") + std::to_string(P(j));
            text += "]\n}\n";
            emit(text, output);
            return 0;
        }
    } catch (const dsmatch::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
