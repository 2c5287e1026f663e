#include "dsmatch/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "dsmatch/dsopt.hpp"
#include "dsmatch/generators.hpp"
#include "dsmatch/group_space.hpp"
#include "dsmatch/projection.hpp"
#include "dsmatch/rng.hpp"

namespace dsmatch {

namespace {

using nlohmann::json;

double ms_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string file_stem(const std::string& path) {
    const std::size_t slash = path.find_last_of("/\\");
    const std::size_t start = slash == std::string::npos ? 0 : slash + 1;
    std::size_t dot = path.find_last_of('.');
    if (dot == std::string::npos || dot <= start) dot = path.size();
    return path.substr(start, dot - start);
}

}  // namespace

GroupSpec load_group_spec(const std::string& path, int max_order) {
    std::ifstream in(path);
    if (!in) throw IoError("load_group_spec: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("load_group_spec: " + path + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("n") || !j["n"].is_number_integer())
        throw IoError("load_group_spec: " + path + ": missing integer field 'n'");
    const int n = j["n"].get<int>();
    if (n < 1) throw IoError("load_group_spec: " + path + ": n must be >= 1");

    std::vector<Permutation> gens;
    if (j.contains("generators")) {
        if (!j["generators"].is_array())
            throw IoError("load_group_spec: " + path + ": 'generators' must be an array");
        for (const auto& g : j["generators"]) {
            if (!g.is_array())
                throw IoError("load_group_spec: " + path + ": generator is not an array");
            std::vector<int> images;
            for (const auto& v : g) {
                if (!v.is_number_integer())
                    throw IoError("load_group_spec: " + path + ": non-integer image");
                images.push_back(v.get<int>());
            }
            if (static_cast<int>(images.size()) != n)
                throw IoError("load_group_spec: " + path + ": generator length != n");
            try {
                gens.emplace_back(std::move(images));
            } catch (const Error& e) {
                throw IoError("load_group_spec: " + path + ": " + e.what());
            }
        }
    }
    GroupSpec spec;
    spec.name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>()
                                                            : file_stem(path);
    spec.group = gens.empty() ? PermGroup::trivial(n) : closure(gens, max_order);
    if (spec.group.degree() != n)
        throw IoError("load_group_spec: " + path + ": generator degree != n");
    return spec;
}

void save_group_spec(const std::string& path, const std::string& name, int degree,
                     const std::vector<Permutation>& generators) {
    json j;
    j["name"] = name;
    j["n"] = degree;
    j["generators"] = json::array();
    for (const auto& g : generators) j["generators"].push_back(g.images());
    std::ofstream out(path);
    if (!out) throw IoError("save_group_spec: cannot write " + path);
    out << j.dump(2) << '\n';
}

ClassifyOutcome cmd_classify(const std::string& name, const PermGroup& G, int trials,
                             std::uint64_t seed, double tol) {
    const PermGroup closed = stabilizer_closure(G);
    if (!(closed == G))
        throw NotSymmetryGroup("cmd_classify: group of order " + std::to_string(G.order()) +
                               " is not a full symmetry group (its stabilizer closure has order " +
                               std::to_string(closed.order()) + ")");
    ClassifyOutcome oc;
    oc.group = name;
    oc.degree = G.degree();
    oc.verdict = classify_generic(G, trials, seed, tol);
    oc.exit_code = oc.verdict.verdict == Verdict::inconclusive ? 2 : 0;
    return oc;
}

std::string classify_json(const ClassifyOutcome& oc) {
    json j;
    j["group"] = oc.group;
    j["n"] = oc.degree;
    j["verdict"] = to_string(oc.verdict.verdict);
    j["trials"] = oc.verdict.trials;
    j["zero_evaluations"] = oc.verdict.zero_evaluations;
    j["condition_weird"] = to_string(oc.verdict.condition_weird_holds);
    j["min_singular_margins"] = oc.verdict.min_singular_margins;
    return j.dump(2) + "\n";
}

Table1Row table1_row(const std::string& name, const PermGroup& G, int trials,
                     std::uint64_t seed, bool timing) {
    if (trials < 1) throw PreconditionFailed("table1_row: trials must be >= 1");
    Table1Row row;
    row.group = name;
    row.n = G.degree();
    row.trials = trials;
    const GroupSpaceBasis basis = build_basis(G);
    const int n = G.degree();
    double total_ms = 0.0;
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(t));
        const SymGraph A = sample_vg(basis, rng);
        Eigen::MatrixXd C(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) C(i, j) = rng.normal();
        const auto t0 = std::chrono::steady_clock::now();
        const FaceState fs = random_objective_extreme_point(A, A, C);
        if (timing) total_ms += ms_since(t0);
        if (is_near_permutation(fs.S.S, 1e-6, nullptr))
            ++row.permutations;
        else
            ++row.fractional;
    }
    row.ratio = static_cast<double>(row.permutations) / trials;
    row.mean_wall_ms = timing ? total_ms / trials : 0.0;
    return row;
}

std::string table1_csv(const std::vector<Table1Row>& rows) {
    std::ostringstream out;
    out << "group,n,trials,permutations,fractional,ratio,mean_wall_ms\n";
    for (const auto& r : rows)
        out << r.group << ',' << r.n << ',' << r.trials << ',' << r.permutations << ','
            << r.fractional << ',' << fmt("%.6f", r.ratio) << ','
            << fmt("%.3f", r.mean_wall_ms) << '\n';
    return out.str();
}

int grid_expected_symmetries(int rows, int cols) {
    if (rows == 1 && cols == 1) return 1;
    if (rows == 1 || cols == 1) return 2;
    return rows == cols ? 8 : 4;
}

GridSymmetryReport cmd_grid_symmetries(int rows, int cols, std::uint64_t seed, bool timing) {
    GridSymmetryReport rep;
    rep.rows = rows;
    rep.cols = cols;
    rep.n = rows * cols;
    rep.expected_order = grid_expected_symmetries(rows, cols);
    const SymGraph A = gen_grid(rows, cols);
    EnumerateOptions eo;
    eo.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    EnumerationResult res = enumerate_isomorphisms(A, A, eo);
    if (timing) rep.wall_ms = ms_since(t0);
    rep.perms = std::move(res.isomorphisms);
    rep.complete = res.complete;
    rep.extractions = res.extractions;
    const PermGroup H = PermGroup::from_elements(rep.n, rep.perms);
    rep.closed = H.order() == static_cast<int>(rep.perms.size()) && H.is_closed();
    return rep;
}

std::string grid_symmetries_json(const GridSymmetryReport& rep) {
    json j;
    j["rows"] = rep.rows;
    j["cols"] = rep.cols;
    j["n"] = rep.n;
    j["order"] = rep.perms.size();
    j["expected_order"] = rep.expected_order;
    j["closed"] = rep.closed;
    j["complete"] = rep.complete;
    j["extractions"] = rep.extractions;
    j["wall_ms"] = rep.wall_ms;
    j["permutations"] = json::array();
    for (const auto& p : rep.perms) j["permutations"].push_back(p.images());
    return j.dump(2) + "\n";
}

namespace {

struct MethodOutcome {
    Permutation P;
    double wall_ms = 0.0;
};

MethodOutcome run_method(const std::string& method, const SymGraph& A, const SymGraph& B,
                         const ExperimentConfig& cfg) {
    MethodOutcome mo;
    const auto t0 = std::chrono::steady_clock::now();
    if (method == "ds_l2") {
        SolveOptions so;
        so.max_iter = cfg.max_iter;
        const SolveResult sr = solve_relaxation(A, B, so);
        mo.P = l2_project(sr.S.S);
    } else if (method == "dspp") {
        PathOptions po;
        po.second_order_max_n = 0;  // not needed per trial
        const PathReport pr = dspp_path(A, B, cfg.schedule_steps, po);
        mo.P = pr.final;
    } else {
        throw PreconditionFailed("unknown method '" + method + "' (expected ds_l2 or dspp)");
    }
    if (cfg.timing) mo.wall_ms = ms_since(t0);
    return mo;
}

}  // namespace

NoiseExperimentResult cmd_noise_experiment(const ExperimentConfig& cfg) {
    if (cfg.trials < 1) throw PreconditionFailed("cmd_noise_experiment: trials must be >= 1");
    ExperimentConfig c = cfg;
    if (c.noise_exponents.empty())
        for (int k = 0; k < 10; ++k) c.noise_exponents.push_back(-3.0 + 3.0 * k / 9.0);
    for (double a : c.noise_exponents)
        if (!std::isfinite(a))
            throw PreconditionFailed("cmd_noise_experiment: noise exponents must be finite");
    for (const auto& m : c.methods)
        if (m != "ds_l2" && m != "dspp")
            throw PreconditionFailed("cmd_noise_experiment: unknown method '" + m + "'");
    for (int n : c.sizes)
        if (n < 2) throw PreconditionFailed("cmd_noise_experiment: sizes must be >= 2");

    NoiseExperimentResult res;
    const int ne = static_cast<int>(c.noise_exponents.size());
    for (std::size_t si = 0; si < c.sizes.size(); ++si) {
        const int n = c.sizes[si];
        const PermGroup G = reversal_group(n);
        const bool exhaustive_ok = n <= kExhaustiveQapMaxDegree;
        const bool slow_ok = c.slow_ground_truth && !exhaustive_ok && n <= 10;
        const int gt_trials = exhaustive_ok ? c.trials : (slow_ok ? std::min(10, c.trials) : 0);

        for (int ei = 0; ei < ne; ++ei) {
            const double eps = std::pow(10.0, c.noise_exponents[ei]);
            std::vector<int> successes(c.methods.size(), 0);
            std::vector<double> walls(c.methods.size(), 0.0);
            int gt_successes = 0;
            double gt_wall = 0.0;

            for (int t = 0; t < c.trials; ++t) {
                const std::uint64_t stream =
                    (static_cast<std::uint64_t>(si) * ne + ei) * c.trials + t;
                Rng rng = Rng::stream(c.seed, stream);
                const NoisyPair pair = gen_noisy_pair(G, eps, rng);

                if (t < gt_trials) {
                    const auto t0 = std::chrono::steady_clock::now();
                    const QapResult qr =
                        exhaustive_qap(pair.A.matrix(), pair.B.matrix(), std::max(n, 8));
                    if (c.timing) gt_wall += ms_since(t0);
                    const bool hit = G.contains(qr.minimizer);
                    gt_successes += hit ? 1 : 0;
                    TrialRecord tr;
                    tr.trial_index = t;
                    tr.n = n;
                    tr.epsilon = eps;
                    tr.method = "ground_truth";
                    tr.retrieved = qr.minimizer.images();
                    tr.retrieved_in_G = hit;
                    tr.energy = qr.energy;
                    res.records.push_back(std::move(tr));
                }

                for (std::size_t mi = 0; mi < c.methods.size(); ++mi) {
                    const MethodOutcome mo = run_method(c.methods[mi], pair.A, pair.B, c);
                    walls[mi] += mo.wall_ms;
                    const bool hit = G.contains(mo.P);
                    successes[mi] += hit ? 1 : 0;
                    TrialRecord tr;
                    tr.trial_index = t;
                    tr.n = n;
                    tr.epsilon = eps;
                    tr.method = c.methods[mi];
                    tr.retrieved = mo.P.images();
                    tr.retrieved_in_G = hit;
                    const Eigen::MatrixXd P = mo.P.matrix();
                    tr.energy = (pair.A.matrix() * P - P * pair.B.matrix()).norm();
                    tr.wall_ms = mo.wall_ms;
                    res.records.push_back(std::move(tr));
                }
            }

            for (std::size_t mi = 0; mi < c.methods.size(); ++mi) {
                NoiseCell cell;
                cell.group = "z2_reversal";
                cell.n = n;
                cell.epsilon = eps;
                cell.method = c.methods[mi];
                cell.trials = c.trials;
                cell.successes = successes[mi];
                cell.ratio = static_cast<double>(successes[mi]) / c.trials;
                cell.mean_wall_ms = c.timing ? walls[mi] / c.trials : 0.0;
                res.cells.push_back(std::move(cell));
            }
            if (gt_trials > 0) {
                NoiseCell cell;
                cell.group = "z2_reversal";
                cell.n = n;
                cell.epsilon = eps;
                cell.method = "ground_truth";
                cell.trials = gt_trials;
                cell.successes = gt_successes;
                cell.ratio = static_cast<double>(gt_successes) / gt_trials;
                cell.mean_wall_ms = c.timing ? gt_wall / gt_trials : 0.0;
                res.cells.push_back(std::move(cell));
            }
        }
    }
    return res;
}

std::string noise_csv(const NoiseExperimentResult& res) {
    std::ostringstream out;
    out << "group,n,epsilon,method,trials,successes,ratio,mean_wall_ms\n";
    for (const auto& c : res.cells)
        out << c.group << ',' << c.n << ',' << fmt("%.9g", c.epsilon) << ',' << c.method << ','
            << c.trials << ',' << c.successes << ',' << fmt("%.6f", c.ratio) << ','
            << fmt("%.3f", c.mean_wall_ms) << '\n';
    return out.str();
}

CounterexampleReport cmd_counterexample() {
    CounterexampleReport rep;
    Eigen::MatrixXd A0(3, 3);
    A0 << 6, 1, 2, 1, 5, 3, 2, 3, 4;
    rep.A0 = A0;
    rep.row_sums_constant = (A0.rowwise().sum().array() == 9.0).all();
    const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0);
    rep.flat_energy = (A0 * flat - flat * A0).norm();
    rep.aut_order = automorphism_oracle(A0).order();

    const SymGraph G0(A0);
    const Eigen::MatrixXd C = invariant_costs(G0, G0);
    SolveOptions so;
    so.max_iter = 20000;
    so.grad_tol = 1e-13;
    const SolveResult sr = solve_with_linear_term(G0, G0, C, so);
    rep.solution = sr.S.S;
    rep.identity_distance =
        (rep.solution - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff();
    rep.identity_recovered = rep.identity_distance <= 1e-6;
    return rep;
}

std::string counterexample_json(const CounterexampleReport& rep) {
    json j;
    auto dump = [](const Eigen::MatrixXd& M) {
        json rows = json::array();
        for (int i = 0; i < M.rows(); ++i) {
            json row = json::array();
            for (int k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    j["matrix"] = dump(rep.A0);
    j["row_sums_constant"] = rep.row_sums_constant;
    j["flat_energy"] = rep.flat_energy;
    j["aut_order"] = rep.aut_order;
    j["solution"] = dump(rep.solution);
    j["identity_distance"] = rep.identity_distance;
    j["identity_recovered"] = rep.identity_recovered;
    return j.dump(2) + "\n";
}

}  // namespace dsmatch
