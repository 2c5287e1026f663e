#include "dsmatch/perm_group.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <set>

#include "dsmatch/group_space.hpp"

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

}  // namespace

PermGroup PermGroup::from_elements(int degree, std::vector<Permutation> elements) {
    for (const auto& p : elements)
        if (p.degree() != degree)
            throw DimensionMismatch("PermGroup: element degree mismatch");
    std::sort(elements.begin(), elements.end());
    elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
    if (elements.empty()) elements.push_back(Permutation::identity(degree));
    PermGroup G;
    G.degree_ = degree;
    G.elements_ = std::move(elements);
    return G;
}

PermGroup PermGroup::trivial(int n) {
    return from_elements(n, {Permutation::identity(n)});
}

bool PermGroup::contains(const Permutation& p) const {
    return std::binary_search(elements_.begin(), elements_.end(), p);
}

bool PermGroup::is_closed() const {
    if (!contains(Permutation::identity(degree_))) return false;
    for (const auto& a : elements_)
        for (const auto& b : elements_)
            if (!contains(a.compose(b))) return false;
    return true;
}

PermGroup closure(const std::vector<Permutation>& generators, int max_order) {
    if (generators.empty())
        throw DimensionMismatch("closure: need at least one generator to fix the degree");
    const int n = generators.front().degree();
    for (const auto& g : generators)
        if (g.degree() != n) throw DimensionMismatch("closure: generator degree mismatch");

    std::set<Permutation> seen;
    std::deque<Permutation> work;
    auto push = [&](Permutation p) {
        if (seen.insert(p).second) {
            if (static_cast<int>(seen.size()) > max_order)
                throw OrderExceeded("closure: group order exceeds cap " + std::to_string(max_order));
            work.push_back(std::move(p));
        }
    };
    push(Permutation::identity(n));
    for (const auto& g : generators) push(g);
    while (!work.empty()) {
        Permutation a = std::move(work.front());
        work.pop_front();
        for (const auto& g : generators) {
            push(a.compose(g));
            push(g.compose(a));
        }
    }
    return PermGroup::from_elements(n, {seen.begin(), seen.end()});
}

bool is_reflection_group(const PermGroup& G) {
    for (const auto& p : G.elements())
        if (!p.compose(p).is_identity()) return false;
    return true;
}

OrbitPartition vertex_orbits(const PermGroup& G) {
    const int n = G.degree();
    UnionFind uf(n);
    for (const auto& p : G.elements())
        for (int j = 0; j < n; ++j) uf.unite(j, p(j));

    OrbitPartition out;
    out.class_of.assign(n, -1);
    std::map<int, int> root_to_class;
    for (int v = 0; v < n; ++v) {
        int r = uf.find(v);
        auto [it, fresh] = root_to_class.try_emplace(r, out.size());
        if (fresh) out.classes.emplace_back();
        out.class_of[v] = it->second;
        out.classes[it->second].push_back(v);
    }
    // Roots are orbit minima and v ascends, so classes are already sorted
    // by smallest member and each class is ascending.
    return out;
}

bool has_full_orbit(const PermGroup& G) {
    for (const auto& cls : vertex_orbits(G).classes)
        if (static_cast<int>(cls.size()) == G.order()) return true;
    return false;
}

int SupportMask::count() const {
    int c = 0;
    for (auto v : allowed_) c += v != 0;
    return c;
}

SupportMask support_mask(const std::vector<Permutation>& elements, int degree) {
    SupportMask m = SupportMask::none(degree);
    for (const auto& p : elements)
        for (int j = 0; j < degree; ++j) m.set(p(j), j, true);
    return m;
}

SupportMask support_mask(const PermGroup& G) {
    return support_mask(G.elements(), G.degree());
}

namespace {

// Iterated refinement of vertex colors against a fixed edge coloring:
// two vertices keep the same color only while their multisets of
// (edge color, endpoint color) agree.  Standard 1-dimensional refinement;
// used purely as a pruning device, correctness rests on the pair checks
// in the backtracking below.
std::vector<int> refine_vertex_colors(const PairOrbits& po) {
    const int n = po.n;
    std::vector<int> color(n);
    for (int i = 0; i < n; ++i) color[i] = po.color(i, i);
    for (int round = 0; round < n; ++round) {
        std::map<std::vector<int>, int> sig_to_id;
        std::vector<int> next(n);
        for (int i = 0; i < n; ++i) {
            std::vector<int> sig;
            sig.reserve(2 * n);
            sig.push_back(color[i]);
            std::vector<std::pair<int, int>> nb;
            for (int k = 0; k < n; ++k)
                if (k != i) nb.emplace_back(po.color(i, k), color[k]);
            std::sort(nb.begin(), nb.end());
            for (auto& [e, c] : nb) {
                sig.push_back(e);
                sig.push_back(c);
            }
            auto [it, fresh] = sig_to_id.try_emplace(std::move(sig), static_cast<int>(sig_to_id.size()));
            next[i] = it->second;
        }
        bool changed = false;
        for (int i = 0; i < n; ++i) changed |= next[i] != color[i];
        color = std::move(next);
        if (!changed) break;
    }
    return color;
}

void color_backtrack(const PairOrbits& po, const std::vector<int>& vcolor, int depth,
                     std::vector<int>& image, std::vector<char>& used,
                     std::vector<Permutation>& out) {
    const int n = po.n;
    if (depth == n) {
        out.emplace_back(image);
        return;
    }
    for (int j = 0; j < n; ++j) {
        if (used[j] || vcolor[j] != vcolor[depth]) continue;
        if (po.color(depth, depth) != po.color(j, j)) continue;
        bool ok = true;
        for (int k = 0; k < depth && ok; ++k)
            ok = po.color(depth, k) == po.color(j, image[k]);
        if (!ok) continue;
        image[depth] = j;
        used[j] = 1;
        color_backtrack(po, vcolor, depth + 1, image, used, out);
        used[j] = 0;
    }
}

}  // namespace

PermGroup stabilizer_closure(const PermGroup& G, int max_degree) {
    const int n = G.degree();
    if (n > max_degree)
        throw DegreeTooLarge("stabilizer_closure: degree " + std::to_string(n) +
                             " exceeds cap " + std::to_string(max_degree));
    const PairOrbits po = pair_orbits(G);
    const std::vector<int> vcolor = refine_vertex_colors(po);
    std::vector<int> image(n, -1);
    std::vector<char> used(n, 0);
    std::vector<Permutation> found;
    color_backtrack(po, vcolor, 0, image, used, found);
    return PermGroup::from_elements(n, std::move(found));
}

namespace {

void aut_backtrack(const Eigen::MatrixXd& A, const std::vector<std::vector<double>>& sorted_rows,
                   double tol, int depth, std::vector<int>& image, std::vector<char>& used,
                   std::vector<Permutation>& out) {
    const int n = static_cast<int>(A.rows());
    if (depth == n) {
        out.emplace_back(image);
        return;
    }
    for (int j = 0; j < n; ++j) {
        if (used[j]) continue;
        if (std::abs(A(depth, depth) - A(j, j)) > tol) continue;
        bool ok = true;
        const auto& ra = sorted_rows[depth];
        const auto& rb = sorted_rows[j];
        for (int k = 0; k < n && ok; ++k) ok = std::abs(ra[k] - rb[k]) <= tol;
        for (int k = 0; k < depth && ok; ++k)
            ok = std::abs(A(depth, k) - A(j, image[k])) <= tol;
        if (!ok) continue;
        image[depth] = j;
        used[j] = 1;
        aut_backtrack(A, sorted_rows, tol, depth + 1, image, used, out);
        used[j] = 0;
    }
}

}  // namespace

PermGroup automorphism_oracle(const Eigen::MatrixXd& A, double tol, int max_degree) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n) throw DimensionMismatch("automorphism_oracle: matrix is not square");
    if (n > max_degree)
        throw DegreeTooLarge("automorphism_oracle: degree " + std::to_string(n) +
                             " exceeds cap " + std::to_string(max_degree));
    std::vector<std::vector<double>> sorted_rows(n);
    for (int i = 0; i < n; ++i) {
        sorted_rows[i].resize(n);
        for (int k = 0; k < n; ++k) sorted_rows[i][k] = A(i, k);
        std::sort(sorted_rows[i].begin(), sorted_rows[i].end());
    }
    std::vector<int> image(n, -1);
    std::vector<char> used(n, 0);
    std::vector<Permutation> found;
    aut_backtrack(A, sorted_rows, tol, 0, image, used, found);
    // The pair checks above already cover every index pair; keep a final
    // residual audit anyway since the group is used as ground truth.
    std::vector<Permutation> audited;
    for (auto& p : found)
        if (conjugation_residual(A, A, p) <= tol) audited.push_back(std::move(p));
    return PermGroup::from_elements(n, std::move(audited));
}

QapResult exhaustive_qap(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, int max_degree) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n || B.rows() != n || B.cols() != n)
        throw DimensionMismatch("exhaustive_qap: need two square matrices of equal size");
    if (n > max_degree)
        throw DegreeTooLarge("exhaustive_qap: degree " + std::to_string(n) + " exceeds cap " +
                             std::to_string(max_degree));
    std::vector<int> im(n);
    std::iota(im.begin(), im.end(), 0);
    std::vector<int> best_im;
    double best = -1.0;
    do {
        // ||A P - P B||_F^2 = sum_ij (A(p(i), p(j)) - B(i, j))^2
        double e2 = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double d = A(im[i], im[j]) - B(i, j);
                e2 += d * d;
            }
        if (best < 0.0 || e2 < best) {
            best = e2;
            best_im = im;
        }
    } while (std::next_permutation(im.begin(), im.end()));
    return QapResult{Permutation(best_im), std::sqrt(std::max(0.0, best))};
}

PermGroup reversal_group(int n) {
    std::vector<int> im(n);
    for (int i = 0; i < n; ++i) im[i] = n - 1 - i;
    return closure({Permutation(im)});
}

PermGroup cyclic_group(int k, int copies) {
    if (k < 1 || copies < 1) throw DimensionMismatch("cyclic_group: need k, copies >= 1");
    const int n = k * copies;
    std::vector<int> im(n);
    for (int b = 0; b < copies; ++b)
        for (int i = 0; i < k; ++i) im[b * k + i] = b * k + (i + 1) % k;
    return closure({Permutation(im)});
}

PermGroup dihedral_group(int k, int copies) {
    if (k < 1 || copies < 1) throw DimensionMismatch("dihedral_group: need k, copies >= 1");
    const int n = k * copies;
    std::vector<int> rot(n), refl(n);
    for (int b = 0; b < copies; ++b)
        for (int i = 0; i < k; ++i) {
            rot[b * k + i] = b * k + (i + 1) % k;
            refl[b * k + i] = b * k + (k - i) % k;
        }
    return closure({Permutation(rot), Permutation(refl)});
}

PermGroup grid_reflection_group(int rows, int cols) {
    if (rows < 1 || cols < 1) throw DimensionMismatch("grid_reflection_group: need rows, cols >= 1");
    const int n = rows * cols;
    std::vector<int> h(n), v(n);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            h[r * cols + c] = r * cols + (cols - 1 - c);
            v[r * cols + c] = (rows - 1 - r) * cols + c;
        }
    return closure({Permutation(h), Permutation(v)});
}

PermGroup symmetric_group(int n) {
    if (n > 8) throw DegreeTooLarge("symmetric_group: refusing n > 8");
    std::vector<int> im(n);
    std::iota(im.begin(), im.end(), 0);
    std::vector<Permutation> all;
    do all.emplace_back(im);
    while (std::next_permutation(im.begin(), im.end()));
    return PermGroup::from_elements(n, std::move(all));
}

}  // namespace dsmatch
