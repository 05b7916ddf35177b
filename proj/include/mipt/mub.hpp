#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "mipt/pauli.hpp"

namespace mipt {

// Partition of the 4^n - 1 non-trivial Pauli strings into 2^n + 1 groups of
// 2^n - 1 pairwise-commuting strings (a mutually unbiased basis family).
struct MubPartition {
    int n = 0;
    std::vector<std::vector<PauliString>> groups;
    std::vector<bool> separable_flags;

    // A group is fully separable when each qubit carries at most one distinct
    // non-identity letter across the group; its joint eigenbasis is then a
    // product basis and needs no entangling gates to measure.
    static bool is_separable(const std::vector<PauliString>& group) {
        if (group.empty()) return true;
        int n = group.front().n;
        for (int q = 0; q < n; ++q) {
            char seen = 'I';
            for (const auto& p : group) {
                char l = p.letter(q);
                if (l == 'I') continue;
                if (seen == 'I')
                    seen = l;
                else if (seen != l)
                    return false;
            }
        }
        return true;
    }

    std::string to_table() const {
        std::ostringstream os;
        for (std::size_t g = 0; g < groups.size(); ++g)
            for (const auto& p : groups[g]) os << g << '\t' << p.word() << '\n';
        return os.str();
    }

    static MubPartition from_table(const std::string& text) {
        MubPartition part;
        std::istringstream is(text);
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos) throw std::invalid_argument("bad MUB table line");
            std::size_t g = std::stoul(line.substr(0, tab));
            PauliString p = PauliString::from_word(line.substr(tab + 1));
            part.n = p.n;
            if (part.groups.size() <= g) part.groups.resize(g + 1);
            part.groups[g].push_back(p);
        }
        part.separable_flags.clear();
        for (const auto& g : part.groups) part.separable_flags.push_back(is_separable(g));
        return part;
    }
};

namespace detail {

struct MubSearch {
    int n;
    std::size_t group_size;  // 2^n - 1
    std::vector<PauliString> all;
    std::vector<char> covered;  // indexed by x | (z << n)
    std::vector<std::vector<PauliString>> found;

    std::size_t key(const PauliString& p) const { return p.x | (std::size_t(p.z) << n); }

    void mark(const std::vector<PauliString>& group, char v) {
        for (const auto& p : group) covered[key(p)] = v;
    }

    bool cover() {
        const PauliString* seed = nullptr;
        for (const auto& p : all) {
            if (!covered[key(p)]) {
                seed = &p;
                break;
            }
        }
        if (!seed) return true;
        std::vector<PauliString> span{*seed};
        return extend(span);
    }

    // Grow the commuting subgroup `span` (non-identity elements, sorted) by
    // canonical generators until it has 2^n - 1 elements, then recurse into
    // the cover. Each subgroup is visited once: a new generator must be the
    // minimum of the coset it adds.
    bool extend(std::vector<PauliString>& span) {
        if (span.size() == group_size) {
            std::vector<PauliString> group = span;
            std::sort(group.begin(), group.end());
            mark(group, 1);
            found.push_back(group);
            if (cover()) return true;
            found.pop_back();
            mark(group, 0);
            return false;
        }

        // candidate elements: uncovered, outside span, commuting with all of
        // span, with the whole added coset uncovered
        std::vector<PauliString> cands;
        for (const auto& c : all) {
            if (covered[key(c)]) continue;
            bool in_span = false, ok = true;
            for (const auto& h : span) {
                if (h == c) in_span = true;
                if (!commutes(h, c)) {
                    ok = false;
                    break;
                }
            }
            if (in_span || !ok) continue;
            for (const auto& h : span) {
                PauliString prod = c.times(h);
                if (covered[key(prod)]) {
                    ok = false;
                    break;
                }
            }
            if (ok) cands.push_back(c);
        }
        if (span.size() + cands.size() < group_size) return false;  // prune

        for (const auto& c : cands) {
            // canonical: c must be the smallest element of its coset c*span
            bool canonical = true;
            for (const auto& h : span) {
                if (c.times(h) < c) {
                    canonical = false;
                    break;
                }
            }
            if (!canonical) continue;
            std::vector<PauliString> next = span;
            next.push_back(c);
            for (const auto& h : span) next.push_back(c.times(h));
            std::sort(next.begin(), next.end());
            if (extend(next)) return true;
        }
        return false;
    }
};

}  // namespace detail

// Deterministic MUB partition by pruned clique-cover search over the Pauli
// commutation graph. The three qubit-wise families {I,X}^n, {I,Y}^n, {I,Z}^n
// are fixed first; the rest is found by depth-first search seeded at the
// lexicographically smallest uncovered string.
inline MubPartition enumerate_mubs(int n) {
    if (n < 1 || n > 5) throw std::invalid_argument("enumerate_mubs: n must be in [1,5]");

    detail::MubSearch search;
    search.n = n;
    search.group_size = (std::size_t(1) << n) - 1;
    search.all = all_nontrivial_paulis(n);
    search.covered.assign(std::size_t(1) << (2 * n), 0);

    MubPartition part;
    part.n = n;
    for (char axis : {'X', 'Y', 'Z'}) {
        std::vector<PauliString> family;
        for (const auto& p : search.all) {
            bool pure = !p.is_identity();
            for (int q = 0; q < n && pure; ++q) {
                char l = p.letter(q);
                if (l != 'I' && l != axis) pure = false;
            }
            if (pure) family.push_back(p);
        }
        search.mark(family, 1);
        part.groups.push_back(std::move(family));
    }

    if (!search.cover())
        throw std::runtime_error("enumerate_mubs: clique cover search failed");
    for (auto& g : search.found) part.groups.push_back(std::move(g));
    for (const auto& g : part.groups)
        part.separable_flags.push_back(MubPartition::is_separable(g));
    return part;
}

}  // namespace mipt
