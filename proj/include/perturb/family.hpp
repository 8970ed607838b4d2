// Suitable families of almost-spanning subgraphs: the single path-power
// factor F* for cycle powers (with its connector-site layout), or the
// decomposition-backed family that covers F' and all but a per-class slack
// budget of the dense spots.

#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "perturb/decomposition.hpp"
#include "perturb/graph.hpp"
#include "perturb/targets.hpp"

namespace perturb {

enum class FamilyKind {
    path_power,      // single F*: path-power blocks cut out of the cycle power
    decomposed,      // F' plus dense-spot classes with slack budgets
    complete_cover,  // single member F* = F (no absorption slack)
};

// One connection site between consecutive path-power blocks; vertices are
// target-side indices in cycle order, u_tuple ends block i, v_tuple starts
// the next block.
struct ConnectorSite {
    std::vector<int> u_star;
    std::vector<int> w_star;
    std::vector<int> v_star;
};

struct FamilyDescriptor {
    FamilyKind kind = FamilyKind::complete_cover;
    Graph target;
    double epsilon_op = 0.1;

    // path_power
    PathFactorPlan plan;
    std::vector<std::vector<int>> blocks;   // target vertices per block, path order
    std::vector<ConnectorSite> sites;
    std::vector<int> fstar_vertices;        // sorted; all vertices for complete_cover

    // decomposed
    Decomposition dec;
    std::vector<long long> slack;           // per class
    int type_count = 0;                     // distinct iso types = dense round count
    std::vector<int> class_round;           // per class, in [0, type_count)
};

inline FamilyDescriptor complete_cover_family(Graph f, double eps_op = 0.1) {
    FamilyDescriptor fam;
    fam.kind = FamilyKind::complete_cover;
    fam.target = std::move(f);
    fam.epsilon_op = eps_op;
    for (int v = 0; v < fam.target.n(); ++v) fam.fstar_vertices.push_back(v);
    return fam;
}

// Searches block lengths near m0 for a plan with t <= s and the uncovered
// count within eps_op * n.
inline std::optional<PathFactorPlan> find_feasible_plan(int n, int k, int m0, int ell,
                                                        double eps_op) {
    if (ell < 2 * k + 2) return std::nullopt;
    std::vector<int> candidates;
    candidates.push_back(m0);
    for (int d = 1; d <= n; ++d) {
        if (m0 + d + ell <= n) candidates.push_back(m0 + d);
        if (m0 - d >= 2 * k) candidates.push_back(m0 - d);
        if (m0 + d + ell > n && m0 - d < 2 * k) break;
    }
    for (int m : candidates) {
        if (m < 2 * k || m + ell > n) continue;
        try {
            return path_factor_plan(n, k, m, ell, eps_op);
        } catch (const std::invalid_argument&) {
        }
    }
    return std::nullopt;
}

// Family for a cycle power from a plan: blocks laid out in cycle order with
// l-gaps, one connector site per gap (cyclically).
inline FamilyDescriptor path_power_family(const TargetSpec& spec, const PathFactorPlan& plan,
                                          double eps_op) {
    FamilyDescriptor fam;
    fam.kind = FamilyKind::path_power;
    fam.target = realize(spec);
    fam.epsilon_op = eps_op;
    fam.plan = plan;
    int k = plan.k;
    int pos = 0;
    for (int b = 0; b < plan.s; ++b) {
        int len = b < plan.t ? plan.m + 1 : plan.m;
        std::vector<int> block;
        for (int i = 0; i < len; ++i) block.push_back(pos + i);
        pos += len + plan.ell;
        fam.blocks.push_back(std::move(block));
    }
    for (int b = 0; b < plan.s; ++b) {
        ConnectorSite site;
        const auto& blk = fam.blocks[static_cast<std::size_t>(b)];
        const auto& nxt = fam.blocks[static_cast<std::size_t>((b + 1) % plan.s)];
        for (int i = k; i >= 1; --i) site.u_star.push_back(blk[blk.size() - static_cast<std::size_t>(i)]);
        int gap_start = blk.back() + 1;
        for (int i = 0; i < plan.ell; ++i) site.w_star.push_back(gap_start + i);
        for (int i = 0; i < k; ++i) site.v_star.push_back(nxt[static_cast<std::size_t>(i)]);
        fam.sites.push_back(std::move(site));
    }
    for (auto& blk : fam.blocks)
        for (int v : blk) fam.fstar_vertices.push_back(v);
    std::sort(fam.fstar_vertices.begin(), fam.fstar_vertices.end());
    if (static_cast<double>(fam.target.n() - static_cast<int>(fam.fstar_vertices.size())) >
        eps_op * fam.target.n() + 1e-9)
        throw std::invalid_argument("path_power_family: member smaller than (1-eps)n");
    return fam;
}

// Family for a decomposition: per-class slack floor(eps*n / (s_h^2 * T)) where
// T counts distinct iso types. A zero budget for a nonempty class is an error
// (eps_op too small at this n).
inline FamilyDescriptor decomposed_family(Graph f, Decomposition dec, double eps_op) {
    FamilyDescriptor fam;
    fam.kind = FamilyKind::decomposed;
    fam.target = std::move(f);
    fam.epsilon_op = eps_op;
    int n = fam.target.n();

    // Distinct types, in order of first appearance.
    std::vector<std::vector<std::uint8_t>> type_forms;
    fam.class_round.clear();
    for (auto& cls : dec.classes) {
        auto form = canonical_form(cls.iso_type);
        int round = -1;
        for (std::size_t i = 0; i < type_forms.size(); ++i)
            if (type_forms[i] == form) { round = static_cast<int>(i); break; }
        if (round < 0) {
            round = static_cast<int>(type_forms.size());
            type_forms.push_back(std::move(form));
        }
        fam.class_round.push_back(round);
    }
    fam.type_count = static_cast<int>(type_forms.size());

    for (auto& cls : dec.classes) {
        long long b = static_cast<long long>(
            eps_op * n / (static_cast<double>(cls.s_h) * cls.s_h * std::max(1, fam.type_count)));
        if (b <= 0 && !cls.members.empty()) {
            std::ostringstream os;
            os << "suitable_family: slack budget 0 for a class with s_h=" << cls.s_h
               << " (eps_op=" << eps_op << " too small at n=" << n << ")";
            throw std::invalid_argument(os.str());
        }
        fam.slack.push_back(b);
    }
    fam.dec = std::move(dec);
    return fam;
}

// Degree bound the decomposition runs under: the target's maximum degree,
// lifted to the block size for factors so that whole blocks are the dense
// spots (a K_r block is minimally dense exactly at delta = r).
inline int family_delta(const TargetSpec& spec, const Graph& f) {
    int d = std::max(1, max_degree(f));
    if (spec.kind == TargetKind::h_factor) d = std::max(d, spec.h.n());
    return d;
}

// The spec'd constructor: powers take the plan route, bounded-degree targets
// take the decomposition route. Throws when the preconditions fail; callers
// that want a graceful fallback use make_family below.
inline FamilyDescriptor suitable_family(const TargetSpec& spec, double eps_op, int m_default = 20,
                                        int ell_default = 0) {
    if (spec.kind == TargetKind::ham_power && spec.k >= 2) {
        int ell = spec.ell > 0 ? spec.ell : (ell_default > 0 ? ell_default : 2 * spec.k + 2);
        int m = spec.m > 0 ? spec.m : m_default;
        PathFactorPlan plan = path_factor_plan(spec.n, spec.k, m, ell, eps_op);
        return path_power_family(spec, plan, eps_op);
    }
    Graph f = realize(spec);
    Decomposition dec = decompose(f, family_delta(spec, f), eps_op);
    return decomposed_family(f, std::move(dec), eps_op);
}

// Pipeline-facing constructor: adapts the block length for powers and falls
// back to the complete-cover family when no slack-positive family exists at
// this n (the run then has no absorption headroom but remains viable).
inline FamilyDescriptor make_family(const TargetSpec& spec, double eps_op, int m_default = 20,
                                    int ell_default = 0) {
    if (spec.kind == TargetKind::ham_power && spec.k >= 2) {
        int ell = spec.ell > 0 ? spec.ell : (ell_default > 0 ? ell_default : 2 * spec.k + 2);
        int m = spec.m > 0 ? spec.m : m_default;
        auto plan = find_feasible_plan(spec.n, spec.k, m, ell, eps_op);
        if (plan) return path_power_family(spec, *plan, eps_op);
        return complete_cover_family(realize(spec), eps_op);
    }
    Graph f = realize(spec);
    try {
        Decomposition dec = decompose(f, family_delta(spec, f), eps_op);
        return decomposed_family(std::move(f), std::move(dec), eps_op);
    } catch (const std::invalid_argument&) {
        return complete_cover_family(std::move(f), eps_op);
    }
}

}  // namespace perturb
