#ifndef DSMATCH_EXPERIMENTS_HPP
#define DSMATCH_EXPERIMENTS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dsmatch/exactness.hpp"
#include "dsmatch/perm_group.hpp"
#include "dsmatch/sym_graph.hpp"

namespace dsmatch {

// ---- group spec files ----

struct GroupSpec {
    std::string name;
    PermGroup group;
};

// JSON file {"name": str?, "n": int, "generators": [[images], ...]};
// the group is the closure of the generators.  Name defaults to the file
// stem.  Malformed input raises IoError.
GroupSpec load_group_spec(const std::string& path, int max_order = kClosureDefaultMaxOrder);
void save_group_spec(const std::string& path, const std::string& name, int degree,
                     const std::vector<Permutation>& generators);

// ---- classification ----

struct ClassifyOutcome {
    std::string group;
    int degree = 0;
    GenericVerdict verdict;
    int exit_code = 0;  // 0 decided, 2 inconclusive
};

// Refuses groups that are not full symmetry groups (NotSymmetryGroup),
// then runs the randomized generic-exactness classifier.
ClassifyOutcome cmd_classify(const std::string& name, const PermGroup& G, int trials,
                             std::uint64_t seed, double tol = 1e-8);
std::string classify_json(const ClassifyOutcome& oc);

// ---- random-objective extreme point table ----

struct Table1Row {
    std::string group;
    int n = 0;
    int trials = 0;
    int permutations = 0;  // trials whose extreme point was a permutation
    int fractional = 0;
    double ratio = 0.0;
    double mean_wall_ms = 0.0;
};

// Per trial: sample an invariant instance, draw a Gaussian linear
// objective, extract the objective-selected extreme point of the
// zero-energy polytope and test it against {0,1} entries at 1e-6.
Table1Row table1_row(const std::string& name, const PermGroup& G, int trials,
                     std::uint64_t seed, bool timing = true);
std::string table1_csv(const std::vector<Table1Row>& rows);

// ---- grid symmetry enumeration ----

struct GridSymmetryReport {
    int rows = 0, cols = 0, n = 0;
    std::vector<Permutation> perms;
    bool closed = false;    // the list is a group under composition
    bool complete = false;  // enumeration certified itself finished
    int expected_order = 0;
    int extractions = 0;
    double wall_ms = 0.0;
};

// 1 for the single point, 2 for a path, 8 for a square, else 4.
int grid_expected_symmetries(int rows, int cols);

GridSymmetryReport cmd_grid_symmetries(int rows, int cols, std::uint64_t seed,
                                       bool timing = true);
std::string grid_symmetries_json(const GridSymmetryReport& rep);

// ---- noise sweep ----

struct ExperimentConfig {
    std::uint64_t seed = 1;
    int trials = 100;
    std::vector<int> sizes = {8};
    std::vector<double> noise_exponents;  // default: 10 uniform alpha in [-3, 0]
    std::vector<std::string> methods = {"ds_l2", "dspp"};
    int schedule_steps = 10;
    int max_iter = 5000;
    bool slow_ground_truth = false;  // exhaustive search at n = 10 on a subsample
    bool timing = true;              // false writes 0 wall times (byte-stable output)
};

struct TrialRecord {
    int trial_index = 0;
    int n = 0;
    double epsilon = 0.0;
    std::string method;
    std::vector<int> retrieved;
    bool retrieved_in_G = false;
    double energy = 0.0;  // ||A P - P B||_F of the rounded permutation
    double wall_ms = 0.0;
};

struct NoiseCell {
    std::string group;
    int n = 0;
    double epsilon = 0.0;
    std::string method;
    int trials = 0;
    int successes = 0;
    double ratio = 0.0;
    double mean_wall_ms = 0.0;
};

struct NoiseExperimentResult {
    std::vector<NoiseCell> cells;       // aggregated, the CSV content
    std::vector<TrialRecord> records;   // per-trial detail
};

// For each (n, epsilon): sample noisy pairs around a reversal-symmetric
// instance and measure how often each method returns a permutation of the
// planted group.  Exhaustive ground truth rows (method "ground_truth") are
// added where the exhaustive search is affordable.
NoiseExperimentResult cmd_noise_experiment(const ExperimentConfig& cfg);

// Fixed columns: group,n,epsilon,method,trials,successes,ratio,mean_wall_ms.
std::string noise_csv(const NoiseExperimentResult& res);

// ---- counterexample suite ----

struct CounterexampleReport {
    Eigen::MatrixXd A0;
    bool row_sums_constant = false;  // A0 * 1 == 9 * 1 exactly
    double flat_energy = 0.0;        // energy of the flat matrix J/3
    int aut_order = 0;               // |Aut(A0)| by the exhaustive oracle
    Eigen::MatrixXd solution;        // invariant-augmented relaxation output
    double identity_distance = 0.0;  // max-norm distance to the identity
    bool identity_recovered = false;
};

// The 3x3 matrix with constant row sums and trivial automorphisms: its
// plain relaxation admits the flat matrix at zero energy, while the
// invariant-cost augmented relaxation recovers the identity.
CounterexampleReport cmd_counterexample();
std::string counterexample_json(const CounterexampleReport& rep);

}  // namespace dsmatch

#endif
