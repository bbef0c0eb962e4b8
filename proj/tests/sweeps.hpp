#pragma once

// Randomized property checks and exhaustive oracle sweeps, shared by the unit tests and
// the acceptance runner. Each returns a tally instead of asserting so callers decide how
// to report.

#include "homotopy_ledger/extension.hpp"
#include "homotopy_ledger/presented_group.hpp"
#include "oracles.hpp"

#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace sweep {

using hl::CanonicalGroup;
using hl::IntMatrix;
using hl::Integer;

struct Tally {
    std::string name;
    long trials = 0;
    long failures = 0;
    std::string first_failure;

    void fail(const std::string& why) {
        if (failures++ == 0)
            first_failure = why;
    }
    bool ok() const { return trials > 0 && failures == 0; }
};

inline long uniform(std::mt19937_64& rng, long lo, long hi) {
    return std::uniform_int_distribution<long>(lo, hi)(rng);
}

inline IntMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, long span) {
    IntMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            m(i, j) = uniform(rng, -span, span);
    return m;
}

/// Product of random elementary operations, so determinant ±1 by construction.
inline IntMatrix random_unimodular(std::mt19937_64& rng, std::size_t n) {
    IntMatrix u = IntMatrix::identity(n);
    if (n == 0)
        return u;
    for (int k = 0; k < 3 * static_cast<int>(n); ++k) {
        std::size_t i = uniform(rng, 0, n - 1), j = uniform(rng, 0, n - 1);
        IntMatrix e = IntMatrix::identity(n);
        if (i == j)
            e(i, i) = -1;
        else
            e(i, j) = uniform(rng, -3, 3);
        u = e * u;
    }
    return u;
}

inline CanonicalGroup random_finite_group(std::mt19937_64& rng, int max_summands = 4) {
    static const long primes[] = {2, 3, 5, 7};
    std::vector<hl::PrimePower> pp;
    int k = uniform(rng, 0, max_summands);
    for (int i = 0; i < k; ++i)
        pp.push_back({static_cast<hl::Prime>(primes[uniform(rng, 0, 3)]), static_cast<unsigned>(uniform(rng, 1, 3))});
    return CanonicalGroup::make(0, pp);
}

inline CanonicalGroup random_group(std::mt19937_64& rng) {
    CanonicalGroup t = random_finite_group(rng, 3);
    return CanonicalGroup::make(uniform(rng, 0, 2), t.torsion());
}

inline std::string show(const IntMatrix& m) {
    std::ostringstream os;
    os << m;
    return os.str();
}

/// SNF: positive invariants in a divisibility chain, a valid diagonalization, and
/// invariance under random unimodular changes of basis.
inline Tally snf_properties(std::mt19937_64& rng, int count) {
    Tally t{"SNF divisibility chain and unimodular invariance"};
    for (int k = 0; k < count; ++k, ++t.trials) {
        std::size_t r = uniform(rng, 1, 5), c = uniform(rng, 1, 5);
        IntMatrix m = random_matrix(rng, r, c, uniform(rng, 1, 30));
        if (uniform(rng, 0, 4) == 0 && r > 1)
            for (std::size_t j = 0; j < c; ++j)
                m(r - 1, j) = m(0, j) * 2;
        auto s = hl::smith_normal_form(m);
        bool chain = true;
        for (std::size_t i = 0; i < s.invariants.size(); ++i) {
            chain = chain && s.invariants[i] > 0;
            if (i + 1 < s.invariants.size())
                chain = chain && s.invariants[i + 1] % s.invariants[i] == 0;
        }
        IntMatrix d(r, c);
        for (std::size_t i = 0; i < s.invariants.size(); ++i)
            d(i, i) = s.invariants[i];
        bool diag = s.left * m * s.right == d && s.left * s.left_inverse == IntMatrix::identity(r) &&
                    s.right * s.right_inverse == IntMatrix::identity(c);
        IntMatrix moved = random_unimodular(rng, r) * m * random_unimodular(rng, c);
        bool invariant = hl::smith_normal_form(moved).invariants == s.invariants;
        if (!chain || !diag || !invariant)
            t.fail("matrix " + show(m) + (chain ? "" : " breaks the chain") + (diag ? "" : " bad transforms") +
                   (invariant ? "" : " changes under a basis change"));
    }
    return t;
}

/// |dom| = |ker|·|im| and |cod| = |im|·|coker| for random well-defined maps of finite groups.
inline Tally hom_order_multiplicativity(std::mt19937_64& rng, int count) {
    Tally t{"order multiplicativity |dom| = |ker|·|im|"};
    auto named = [](const CanonicalGroup& g, const char* stem) {
        std::vector<std::string> names;
        for (std::size_t i = 0; i < g.free_rank() + g.torsion().size(); ++i)
            names.push_back(stem + std::to_string(i));
        return hl::PresentedGroup::from_canonical(g, names);
    };
    for (int k = 0; k < count; ++k, ++t.trials) {
        auto dom = named(random_finite_group(rng), "x");
        auto cod = named(random_finite_group(rng), "y");
        IntMatrix m = random_matrix(rng, cod.generator_count(), dom.generator_count(), 12);
        // Scale column j so the image of x_j is killed by the order of x_j.
        for (std::size_t j = 0; j < dom.generator_count(); ++j) {
            hl::IntVector e(dom.generator_count(), 0);
            e[j] = 1;
            Integer dj = *dom.element_order(e);
            hl::IntVector col = m.column(j);
            Integer o = *cod.element_order(col);
            Integer scale = o / hl::gcd(o, dj);
            for (std::size_t i = 0; i < cod.generator_count(); ++i)
                m(i, j) *= scale;
        }
        try {
            auto f = hl::GroupHom::make(dom, cod, m);
            Integer d = hl::order(dom.canonical()).value, c = hl::order(cod.canonical()).value;
            Integer ker = hl::order(hl::kernel(f).canonical()).value;
            Integer im = hl::order(hl::image(f).canonical()).value;
            Integer cok = hl::order(hl::cokernel(f).canonical()).value;
            if (d != ker * im || c != im * cok)
                t.fail(to_descriptor(dom.canonical()) + " -> " + to_descriptor(cod.canonical()) + " by " + show(m) +
                       ": ker " + ker.str() + ", im " + im.str() + ", coker " + cok.str());
        } catch (const std::exception& ex) {
            t.fail(std::string("construction failed: ") + ex.what());
        }
    }
    return t;
}

/// order(g) = ∏ order(g_(p)) and localizing at P keeps exactly the P-components.
inline Tally localization_multiplicativity(std::mt19937_64& rng, int count) {
    Tally t{"localization multiplicativity"};
    for (int k = 0; k < count; ++k, ++t.trials) {
        CanonicalGroup g = random_finite_group(rng, 5);
        Integer prod = 1;
        std::vector<CanonicalGroup> parts;
        for (hl::Prime p : g.primes()) {
            CanonicalGroup c = hl::p_component(g, p);
            prod *= hl::order(c).value;
            parts.push_back(c.with_locality(hl::Locality::global()));
        }
        bool ok = prod == hl::order(g).value && hl::direct_sum(parts) == g;
        std::vector<hl::Prime> at;
        for (hl::Prime p : {2u, 3u, 5u, 7u})
            if (uniform(rng, 0, 1))
                at.push_back(p);
        if (!at.empty()) {
            Integer expect = 1;
            for (hl::Prime p : at)
                expect *= hl::order(hl::p_component(g, p)).value;
            ok = ok && hl::order(hl::localize(g, at)).value == expect;
        }
        if (!ok)
            t.fail("group " + to_descriptor(g));
    }
    return t;
}

inline Tally direct_sum_laws(std::mt19937_64& rng, int count) {
    Tally t{"direct_sum commutativity and associativity"};
    for (int k = 0; k < count; ++k, ++t.trials) {
        CanonicalGroup a = random_group(rng), b = random_group(rng), c = random_group(rng);
        using hl::direct_sum;
        bool comm = direct_sum({a, b}) == direct_sum({b, a});
        bool assoc = direct_sum({direct_sum({a, b}), c}) == direct_sum({a, direct_sum({b, c})});
        bool unit = direct_sum({a, CanonicalGroup::trivial()}) == a;
        if (!comm || !assoc || !unit)
            t.fail(to_descriptor(a) + ", " + to_descriptor(b) + ", " + to_descriptor(c));
    }
    return t;
}

/// middle_candidates against the subgroup/quotient oracle for every (a, c) with |a||c| ≤ limit.
inline Tally middles_against_oracle(int limit) {
    Tally t{"middle_candidates = brute-force oracle"};
    for (int na = 1; na <= limit; ++na)
        for (int nc = 1; na * nc <= limit; ++nc)
            for (const auto& a : hl::enumerate_abelian_groups(na))
                for (const auto& c : hl::enumerate_abelian_groups(nc)) {
                    ++t.trials;
                    auto fast = hl::middle_candidates(a, c);
                    auto slow = oracle::brute_force_middles(a, c);
                    auto by_name = [](const auto& x, const auto& y) { return to_descriptor(x) < to_descriptor(y); };
                    std::sort(fast.begin(), fast.end(), by_name);
                    std::sort(slow.begin(), slow.end(), by_name);
                    if (fast != slow)
                        t.fail("a = " + to_descriptor(a) + ", c = " + to_descriptor(c));
                }
    return t;
}

/// ext_group(Z_m, Z_n) against the carry-cocycle count for m, n ≤ limit.
inline Tally ext_against_oracle(int limit) {
    Tally t{"ext_group(Z_m,Z_n) = cocycle-count oracle"};
    for (int m = 1; m <= limit; ++m)
        for (int n = 1; n <= limit; ++n) {
            ++t.trials;
            CanonicalGroup e = hl::ext_group(CanonicalGroup::cyclic(m), CanonicalGroup::cyclic(n));
            CanonicalGroup want = CanonicalGroup::cyclic(oracle::carry_cocycle_ext_order(m, n));
            if (e != want)
                t.fail("m = " + std::to_string(m) + ", n = " + std::to_string(n) + ": got " + to_descriptor(e));
        }
    return t;
}

} // namespace sweep
