// Decompositions of bounded-degree targets into a sparse remainder F' and
// classes of isomorphic, pairwise-remote, minimally dense spots (properties
// P1-P5), plus the independent verifier that rechecks all five.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "perturb/graph.hpp"
#include "perturb/targets.hpp"

namespace perturb {

// ---------------------------------------------------------------------------
// Canonical forms for tiny graphs (dense spots have < 2*delta+2 vertices).
//
// The form is the lexicographically largest upper-triangle adjacency string
// over permutations that respect iterated-degree colour classes; prefix
// pruning keeps the search fast even for regular graphs.

namespace detail {

inline std::vector<int> wl_colors(const Graph& g) {
    int n = g.n();
    std::vector<int> color(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) color[static_cast<std::size_t>(v)] = g.degree(v);
    for (int round = 0; round < n; ++round) {
        std::vector<std::pair<std::vector<int>, int>> sig(static_cast<std::size_t>(n));
        for (int v = 0; v < n; ++v) {
            std::vector<int> s;
            s.push_back(color[static_cast<std::size_t>(v)]);
            for (int u : g.neighbors(v)) s.push_back(color[static_cast<std::size_t>(u)]);
            std::sort(s.begin() + 1, s.end());
            sig[static_cast<std::size_t>(v)] = {std::move(s), v};
        }
        std::vector<std::pair<std::vector<int>, int>> sorted = sig;
        std::sort(sorted.begin(), sorted.end());
        std::vector<int> next(static_cast<std::size_t>(n));
        int c = 0;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (i > 0 && sorted[i].first != sorted[i - 1].first) ++c;
            next[static_cast<std::size_t>(sorted[i].second)] = c;
        }
        if (next == color) break;
        color = std::move(next);
    }
    return color;
}

}  // namespace detail

// Canonical adjacency bitstring; equal strings iff isomorphic.
inline std::vector<std::uint8_t> canonical_form(const Graph& g) {
    int n = g.n();
    auto color = detail::wl_colors(g);
    // Position classes: vertices ordered by descending colour frequency rank;
    // any isomorphism-invariant order works, we sort colours descending.
    std::vector<int> verts(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) verts[static_cast<std::size_t>(i)] = i;
    std::sort(verts.begin(), verts.end(), [&](int a, int b) {
        if (color[static_cast<std::size_t>(a)] != color[static_cast<std::size_t>(b)])
            return color[static_cast<std::size_t>(a)] > color[static_cast<std::size_t>(b)];
        return a < b;
    });
    std::vector<int> class_of_pos(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) class_of_pos[static_cast<std::size_t>(i)] = color[static_cast<std::size_t>(verts[static_cast<std::size_t>(i)])];

    std::vector<std::uint8_t> best;  // bits of the upper triangle, row by row
    std::vector<int> placed;         // placed[i] = original vertex at position i
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    std::vector<std::uint8_t> cur;

    // `ahead` records that the current prefix is already strictly greater
    // than best; pruning on a smaller bit is sound only while prefixes match.
    auto rec = [&](auto&& self, int pos, bool ahead) -> void {
        if (pos == n) {
            if (best.empty() || cur > best) best = cur;
            return;
        }
        for (int v = 0; v < n; ++v) {
            if (used[static_cast<std::size_t>(v)]) continue;
            if (color[static_cast<std::size_t>(v)] != class_of_pos[static_cast<std::size_t>(pos)]) continue;
            std::size_t len0 = cur.size();
            for (int i = 0; i < pos; ++i)
                cur.push_back(g.has_edge(placed[static_cast<std::size_t>(i)], v) ? 1 : 0);
            bool viable = true;
            bool next_ahead = ahead;
            if (!best.empty() && !next_ahead) {
                for (std::size_t i = len0; i < cur.size(); ++i) {
                    if (cur[i] > best[i]) { next_ahead = true; break; }
                    if (cur[i] < best[i]) { viable = false; break; }
                }
            }
            if (viable) {
                used[static_cast<std::size_t>(v)] = 1;
                placed.push_back(v);
                self(self, pos + 1, next_ahead);
                placed.pop_back();
                used[static_cast<std::size_t>(v)] = 0;
            }
            cur.resize(len0);
        }
    };
    rec(rec, 0, false);
    // Prepend the colour-class sizes so different degree profiles never collide.
    std::vector<std::uint8_t> out;
    out.push_back(static_cast<std::uint8_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(class_of_pos[static_cast<std::size_t>(i)]));
    out.insert(out.end(), best.begin(), best.end());
    return out;
}

inline bool isomorphic(const Graph& a, const Graph& b) {
    if (a.n() != b.n() || a.edge_count() != b.edge_count()) return false;
    return canonical_form(a) == canonical_form(b);
}

// ---------------------------------------------------------------------------
// Decomposition types.

struct DenseClass {
    Graph iso_type;                          // shared structure of the members
    std::vector<std::vector<int>> members;   // vertex subsets of the target, sorted
    int s_h = 0;                             // member size
};

struct Decomposition {
    Graph target;
    int delta = 0;
    double epsilon_op = 0.1;
    std::vector<int> f_prime;                // sorted remainder vertex set
    std::vector<DenseClass> classes;
};

struct DecompositionReport {
    bool p1 = false;  // F' sparse
    bool p2 = false;  // members minimally dense
    bool p3 = false;  // members isomorphic within each class
    bool p4 = false;  // each class spans at most eps*n vertices
    bool p5 = false;  // members pairwise remote; all spots disjoint
    bool partition = false;
    std::string detail;
    bool pass() const { return p1 && p2 && p3 && p4 && p5 && partition; }
};

// ---------------------------------------------------------------------------
// Greedy decomposition.

namespace detail {

// Spot conflict for P5: spots clash when their closed neighbourhoods meet
// (shared vertex, an edge between them, or a common neighbour).
inline std::vector<std::uint64_t> ball_mask(const Graph& g, const std::vector<int>& vs) {
    std::size_t words = static_cast<std::size_t>((g.n() + 63) / 64);
    std::vector<std::uint64_t> mask(words, 0);
    auto set = [&](int v) { mask[static_cast<std::size_t>(v >> 6)] |= std::uint64_t(1) << (v & 63); };
    for (int v : vs) {
        set(v);
        for (int u : g.neighbors(v)) set(u);
    }
    return mask;
}

inline bool masks_intersect(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] & b[i]) return true;
    return false;
}

}  // namespace detail

// Greedy extraction of minimally dense spots (smallest vertex count first,
// lexicographic tie-break), isomorphism grouping, then class splitting until
// both the eps*n class budget (P4) and remoteness (P5) hold per class.
inline Decomposition decompose(const Graph& f, int delta, double epsilon_op) {
    if (max_degree(f) > delta)
        throw std::invalid_argument("decompose: target max degree exceeds delta");
    int n = f.n();
    std::vector<char> allowed(static_cast<std::size_t>(n), 1);
    std::vector<std::vector<int>> spots;

    while (true) {
        std::vector<int> found = detail::find_dense_subset(f, allowed, delta, true);
        if (found.empty()) break;
        for (int v : found) allowed[static_cast<std::size_t>(v)] = 0;
        spots.push_back(std::move(found));
    }

    // Group extracted spots by canonical form, preserving extraction order.
    std::vector<std::pair<std::vector<std::uint8_t>, std::vector<int>>> groups;  // form -> spot ids
    for (std::size_t i = 0; i < spots.size(); ++i) {
        auto form = canonical_form(induced_subgraph(f, spots[i]));
        bool placed = false;
        for (auto& [gform, ids] : groups)
            if (gform == form) { ids.push_back(static_cast<int>(i)); placed = true; break; }
        if (!placed) groups.push_back({std::move(form), {static_cast<int>(i)}});
    }

    Decomposition dec;
    dec.target = f;
    dec.delta = delta;
    dec.epsilon_op = epsilon_op;
    double budget = epsilon_op * n + 1e-9;

    std::vector<std::vector<std::uint64_t>> balls;
    balls.reserve(spots.size());
    for (auto& s : spots) balls.push_back(detail::ball_mask(f, s));

    for (auto& [form, ids] : groups) {
        std::vector<DenseClass> classes_of_type;
        std::vector<std::vector<int>> class_spot_ids;
        for (int id : ids) {
            int sz = static_cast<int>(spots[static_cast<std::size_t>(id)].size());
            if (static_cast<double>(sz) > budget) {
                std::ostringstream os;
                os << "decompose: a dense spot of size " << sz << " exceeds the class budget eps*n = "
                   << epsilon_op * n;
                throw std::invalid_argument(os.str());
            }
            bool placed = false;
            for (std::size_t c = 0; c < classes_of_type.size(); ++c) {
                long long total = 0;
                for (auto& m : classes_of_type[c].members) total += static_cast<long long>(m.size());
                if (static_cast<double>(total + sz) > budget) continue;
                bool remote = true;
                for (int other : class_spot_ids[c])
                    if (detail::masks_intersect(balls[static_cast<std::size_t>(id)],
                                                balls[static_cast<std::size_t>(other)])) {
                        remote = false;
                        break;
                    }
                if (!remote) continue;
                classes_of_type[c].members.push_back(spots[static_cast<std::size_t>(id)]);
                class_spot_ids[c].push_back(id);
                placed = true;
                break;
            }
            if (!placed) {
                DenseClass cls;
                cls.iso_type = induced_subgraph(f, spots[static_cast<std::size_t>(id)]);
                cls.s_h = sz;
                cls.members.push_back(spots[static_cast<std::size_t>(id)]);
                classes_of_type.push_back(std::move(cls));
                class_spot_ids.push_back({id});
            }
        }
        for (auto& c : classes_of_type) dec.classes.push_back(std::move(c));
    }

    for (int v = 0; v < n; ++v)
        if (allowed[static_cast<std::size_t>(v)]) dec.f_prime.push_back(v);
    return dec;
}

// Independent recomputation of P1-P5 plus the partition property.
inline DecompositionReport verify(const Decomposition& dec) {
    DecompositionReport rep;
    const Graph& f = dec.target;
    int n = f.n();
    std::ostringstream detail_os;

    // Partition: every vertex in exactly one of f_prime / class members.
    std::vector<int> owner(static_cast<std::size_t>(n), 0);
    for (int v : dec.f_prime) ++owner[static_cast<std::size_t>(v)];
    for (auto& cls : dec.classes)
        for (auto& m : cls.members)
            for (int v : m) ++owner[static_cast<std::size_t>(v)];
    rep.partition = true;
    for (int v = 0; v < n; ++v)
        if (owner[static_cast<std::size_t>(v)] != 1) {
            rep.partition = false;
            detail_os << "partition: vertex " << v << " covered " << owner[static_cast<std::size_t>(v)]
                      << " times; ";
            break;
        }

    // P1: gamma(F') <= (delta+1)/2.
    if (dec.f_prime.size() < 3) {
        rep.p1 = true;
    } else {
        Graph fp = induced_subgraph(f, dec.f_prime);
        rep.p1 = !detail::exceeds_gamma_threshold(fp, dec.delta);
        if (!rep.p1) detail_os << "P1: remainder has a dense subgraph; ";
    }

    // P2: every member minimally dense.
    rep.p2 = true;
    for (auto& cls : dec.classes)
        for (auto& m : cls.members) {
            if (m.size() < 3 || !is_minimally_dense(induced_subgraph(f, m), dec.delta)) {
                rep.p2 = false;
                detail_os << "P2: member {";
                for (int v : m) detail_os << v << " ";
                detail_os << "} not minimally dense; ";
                break;
            }
        }

    // P3: members isomorphic to the class type.
    rep.p3 = true;
    for (auto& cls : dec.classes) {
        auto type_form = canonical_form(cls.iso_type);
        for (auto& m : cls.members) {
            if (static_cast<int>(m.size()) != cls.s_h ||
                canonical_form(induced_subgraph(f, m)) != type_form) {
                rep.p3 = false;
                detail_os << "P3: class member size/type mismatch; ";
                break;
            }
        }
    }

    // P4: class vertex totals within eps*n.
    rep.p4 = true;
    for (std::size_t c = 0; c < dec.classes.size(); ++c) {
        long long total = 0;
        for (auto& m : dec.classes[c].members) total += static_cast<long long>(m.size());
        if (static_cast<double>(total) > dec.epsilon_op * n + 1e-9) {
            rep.p4 = false;
            detail_os << "P4: class " << c << " spans " << total << " > eps*n; ";
        }
    }

    // P5: all spots disjoint; within a class no edges between members and no
    // shared neighbours.
    rep.p5 = true;
    {
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        for (auto& cls : dec.classes)
            for (auto& m : cls.members)
                for (int v : m) {
                    if (seen[static_cast<std::size_t>(v)]) {
                        rep.p5 = false;
                        detail_os << "P5: spots overlap at vertex " << v << "; ";
                    }
                    seen[static_cast<std::size_t>(v)] = 1;
                }
    }
    for (std::size_t c = 0; rep.p5 && c < dec.classes.size(); ++c) {
        auto& members = dec.classes[c].members;
        std::vector<std::vector<std::uint64_t>> balls;
        for (auto& m : members) balls.push_back(detail::ball_mask(f, m));
        for (std::size_t i = 0; i < members.size() && rep.p5; ++i)
            for (std::size_t j = i + 1; j < members.size(); ++j)
                if (detail::masks_intersect(balls[i], balls[j])) {
                    rep.p5 = false;
                    detail_os << "P5: class " << c << " members " << i << "," << j
                              << " adjacent or sharing a neighbour; ";
                    break;
                }
    }

    rep.detail = detail_os.str();
    return rep;
}

// ---------------------------------------------------------------------------
// JSON serialization (structured audit document).

inline nlohmann::ordered_json to_json(const Decomposition& dec) {
    nlohmann::ordered_json j;
    j["n"] = dec.target.n();
    j["delta"] = dec.delta;
    j["epsilon_op"] = dec.epsilon_op;
    j["f_prime"] = dec.f_prime;
    auto& classes = j["classes"] = nlohmann::ordered_json::array();
    for (auto& cls : dec.classes) {
        nlohmann::ordered_json cj;
        cj["s_h"] = cls.s_h;
        auto& edges = cj["iso_type_edges"] = nlohmann::ordered_json::array();
        for (auto& [u, v] : cls.iso_type.edges()) edges.push_back({u, v});
        cj["members"] = cls.members;
        classes.push_back(std::move(cj));
    }
    auto rep = verify(dec);
    j["verdicts"] = {{"P1", rep.p1}, {"P2", rep.p2}, {"P3", rep.p3},
                     {"P4", rep.p4}, {"P5", rep.p5}, {"partition", rep.partition},
                     {"pass", rep.pass()}};
    return j;
}

}  // namespace perturb
