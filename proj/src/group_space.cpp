#include "dsmatch/group_space.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace dsmatch {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

inline int pair_id(int n, int i, int j) { return i * n + j; }  // requires i <= j

}  // namespace

PairOrbits pair_orbits(const PermGroup& G) {
    const int n = G.degree();
    UnionFind uf(n * n);
    for (const auto& p : G.elements())
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                int a = p(i), b = p(j);
                if (a > b) std::swap(a, b);
                uf.unite(pair_id(n, i, j), pair_id(n, a, b));
            }

    PairOrbits out;
    out.n = n;
    out.class_of.assign(static_cast<std::size_t>(n) * n, -1);
    std::map<int, int> root_to_class;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            int r = uf.find(pair_id(n, i, j));
            auto [it, fresh] = root_to_class.try_emplace(r, out.size());
            if (fresh) out.classes.emplace_back();
            out.classes[it->second].emplace_back(i, j);
            out.class_of[pair_id(n, i, j)] = it->second;
            out.class_of[pair_id(n, j, i)] = it->second;
        }
    // Scanning (i, j) in lexicographic order and hanging union-find roots on
    // the smaller id makes class order = order of smallest representative.
    return out;
}

GroupSpaceBasis build_basis(const PermGroup& G) {
    const int n = G.degree();
    GroupSpaceBasis out;
    out.group = G;
    out.orbits = pair_orbits(G);
    out.basis.reserve(out.orbits.size());
    for (const auto& cls : out.orbits.classes) {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
        for (auto [i, j] : cls) {
            M(i, j) = 1.0;
            M(j, i) = 1.0;
        }
        M /= M.norm();
        out.basis.push_back(std::move(M));
    }
    return out;
}

SymGraph sample_vg(const GroupSpaceBasis& B, Rng& rng, double scale) {
    const int n = B.group.degree();
    Eigen::VectorXd x(B.dim());
    for (int p = 0; p < B.dim(); ++p) x(p) = rng.normal();
    const double nrm = x.norm();
    if (nrm > 0.0) x *= scale / nrm;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int p = 0; p < B.dim(); ++p) A += x(p) * B.basis[p];
    return SymGraph(std::move(A));
}

SymGraph discriminative_witness(const PermGroup& G) {
    const int n = G.degree();
    const OrbitPartition orbits = vertex_orbits(G);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int c = 0; c < orbits.size(); ++c) {
        const auto& cls = orbits.classes[c];
        const double v = static_cast<double>(c + 1) / static_cast<double>(cls.size());
        for (int i : cls)
            for (int j : cls) A(i, j) = v;
    }
    return SymGraph(std::move(A));
}

Eigen::MatrixXd full_rank_witness(const PermGroup& G, int r, int j) {
    const OrbitPartition orbits = vertex_orbits(G);
    if (r < 0 || r >= orbits.size() || j < 0 || j >= orbits.size())
        throw DimensionMismatch("full_rank_witness: orbit index out of range");
    const auto& Ir = orbits.classes[r];
    const auto& Ij = orbits.classes[j];
    if (static_cast<int>(Ir.size()) != G.order())
        throw NotFullOrbit("full_rank_witness: orbit " + std::to_string(r) +
                           " has length " + std::to_string(Ir.size()) +
                           ", group order is " + std::to_string(G.order()));
    // Positions within the (ascending) classes.
    std::vector<int> pos_r(G.degree(), -1), pos_j(G.degree(), -1);
    for (int a = 0; a < static_cast<int>(Ir.size()); ++a) pos_r[Ir[a]] = a;
    for (int b = 0; b < static_cast<int>(Ij.size()); ++b) pos_j[Ij[b]] = b;

    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(Ir.size(), Ij.size());
    const int s = Ir.front(), q = Ij.front();
    for (const auto& p : G.elements()) W(pos_r[p(s)], pos_j[p(q)]) = 1.0;
    return W;
}

}  // namespace dsmatch
