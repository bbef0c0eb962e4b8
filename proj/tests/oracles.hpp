#pragma once

// Brute-force oracles used only by the tests. They share no code with the extension
// solver beyond the canonical group type and the enumeration of isomorphism classes.

#include "homotopy_ledger/canonical_group.hpp"

#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <vector>

namespace oracle {

using hl::CanonicalGroup;

/// Z_{m1} x ... x Z_{mk} as flat indices with an addition table.
class TupleGroup {
public:
    explicit TupleGroup(std::vector<int> moduli) : moduli_(std::move(moduli)) {
        n_ = 1;
        for (int m : moduli_)
            n_ *= m;
        table_.assign(static_cast<std::size_t>(n_) * n_, 0);
        for (int x = 0; x < n_; ++x)
            for (int y = 0; y < n_; ++y) {
                int out = 0, stride = 1, a = x, b = y;
                for (int m : moduli_) {
                    out += ((a % m + b % m) % m) * stride;
                    a /= m;
                    b /= m;
                    stride *= m;
                }
                table_[static_cast<std::size_t>(x) * n_ + y] = out;
            }
    }

    static TupleGroup of(const CanonicalGroup& g) {
        std::vector<int> moduli;
        for (const auto& pp : g.torsion())
            moduli.push_back(static_cast<int>(pp.value()));
        return TupleGroup(moduli);
    }

    int size() const { return n_; }
    int add(int x, int y) const { return table_[static_cast<std::size_t>(x) * n_ + y]; }
    int times(int k, int x) const {
        int out = 0;
        for (int i = 0; i < k; ++i)
            out = add(out, x);
        return out;
    }
    int neg(int x) const { return times(n_ - 1, x); }

private:
    std::vector<int> moduli_;
    int n_ = 1;
    std::vector<int> table_;
};

using Bits = std::vector<bool>;

inline std::vector<Bits> all_subgroups(const TupleGroup& g) {
    Bits zero(g.size(), false);
    zero[0] = true;
    std::set<Bits> found{zero};
    std::vector<Bits> frontier{zero};
    while (!frontier.empty()) {
        std::vector<Bits> next;
        for (const auto& h : frontier)
            for (int x = 0; x < g.size(); ++x) {
                if (h[x])
                    continue;
                // h + <x> is the subgroup generated by h and x.
                std::vector<int> cyc{0};
                for (int y = x; y != 0; y = g.add(y, x))
                    cyc.push_back(y);
                Bits s(g.size(), false);
                for (int u = 0; u < g.size(); ++u)
                    if (h[u])
                        for (int v : cyc)
                            s[g.add(u, v)] = true;
                if (found.insert(s).second)
                    next.push_back(s);
            }
        frontier = std::move(next);
    }
    return {found.begin(), found.end()};
}

inline std::vector<int> prime_divisors(int n) {
    std::vector<int> out;
    for (int p = 2; p <= n; ++p)
        if (n % p == 0) {
            out.push_back(p);
            while (n % p == 0)
                n /= p;
        }
    return out;
}

// Rebuilds a p-group type from N_k = |{x : p^k x = 0}|: the number of cyclic factors of
// order >= p^k is log_p(N_k / N_{k-1}).
inline std::vector<hl::PrimePower> type_from_counts(int p, const std::vector<long>& counts) {
    std::vector<int> at_least;
    for (std::size_t k = 1; k < counts.size(); ++k) {
        long ratio = counts[k] / counts[k - 1];
        int r = 0;
        while (ratio > 1) {
            ratio /= p;
            ++r;
        }
        if (r == 0)
            break;
        at_least.push_back(r);
    }
    std::vector<hl::PrimePower> out;
    for (std::size_t k = 0; k < at_least.size(); ++k) {
        int exactly = at_least[k] - (k + 1 < at_least.size() ? at_least[k + 1] : 0);
        for (int i = 0; i < exactly; ++i)
            out.push_back({static_cast<hl::Prime>(p), static_cast<unsigned>(k + 1)});
    }
    return out;
}

inline CanonicalGroup classify_sub(const TupleGroup& g, const Bits& h) {
    std::vector<hl::PrimePower> torsion;
    for (int p : prime_divisors(g.size())) {
        std::vector<long> counts{1};
        for (int pk = p; pk <= g.size(); pk *= p) {
            long c = 0;
            for (int x = 0; x < g.size(); ++x)
                c += h[x] && g.times(pk, x) == 0;
            counts.push_back(c);
        }
        auto t = type_from_counts(p, counts);
        torsion.insert(torsion.end(), t.begin(), t.end());
    }
    return CanonicalGroup::make(0, torsion);
}

inline CanonicalGroup classify_quotient(const TupleGroup& g, const Bits& h) {
    long hn = 0;
    for (bool b : h)
        hn += b;
    std::vector<hl::PrimePower> torsion;
    for (int p : prime_divisors(g.size())) {
        std::vector<long> counts{1};
        for (int pk = p; pk <= g.size(); pk *= p) {
            long c = 0;
            for (int x = 0; x < g.size(); ++x)
                c += h[g.times(pk, x)];
            counts.push_back(c / hn);
        }
        auto t = type_from_counts(p, counts);
        torsion.insert(torsion.end(), t.begin(), t.end());
    }
    return CanonicalGroup::make(0, torsion);
}

using Profile = std::set<std::pair<CanonicalGroup, CanonicalGroup>>;

/// Every (subgroup type, quotient type) pair realized inside g; memoized per group.
inline const Profile& subgroup_profile(const CanonicalGroup& g) {
    static std::map<CanonicalGroup, Profile> cache;
    auto it = cache.find(g);
    if (it != cache.end())
        return it->second;
    TupleGroup t = TupleGroup::of(g);
    Profile profile;
    for (const auto& h : all_subgroups(t))
        profile.insert({classify_sub(t, h), classify_quotient(t, h)});
    return cache.emplace(g, std::move(profile)).first->second;
}

/// All G of order |a||c| with some subgroup ≅ a whose quotient is ≅ c.
inline std::vector<CanonicalGroup> brute_force_middles(const CanonicalGroup& a, const CanonicalGroup& c) {
    const auto n = hl::order(a).value * hl::order(c).value;
    std::vector<CanonicalGroup> out;
    for (const auto& g : hl::enumerate_abelian_groups(n))
        if (subgroup_profile(g).count({a, c}))
            out.push_back(g);
    return out;
}

/// Ext(Z_m, Z_n) through carry cocycles f_a(i,j) = a·[i+j >= m]: every class is a multiple
/// of [f_1], so Ext is cyclic of order n / #{a : f_a is a coboundary}.
inline long carry_cocycle_ext_order(int m, int n) {
    long coboundaries = 0;
    for (int a = 0; a < n; ++a) {
        auto f = [&](int i, int j) { return i + j >= m ? a : 0; };
        bool found = false;
        for (int t = 0; t < n && !found; ++t) {
            // f = δg with g(0) = 0, g(1) = t, g(i+1) = g(1) + g(i) - f(1, i).
            std::vector<int> g(m, 0);
            if (m > 1)
                g[1] = t;
            for (int i = 1; i + 1 < m; ++i)
                g[i + 1] = ((g[1] + g[i] - f(1, i)) % n + n) % n;
            bool ok = true;
            for (int i = 0; i < m && ok; ++i)
                for (int j = 0; j < m && ok; ++j)
                    ok = ((g[i] + g[j] - g[(i + j) % m] - f(i, j)) % n + n) % n == 0;
            found = ok;
        }
        coboundaries += found;
    }
    return n / coboundaries;
}

struct CohomologySummary {
    long order = 0;
    long exponent = 0;
};

/// Symmetric 2-cocycles C x C -> Z_n modulo coboundaries, by exhaustive enumeration.
inline CohomologySummary symmetric_cocycle_classes(const TupleGroup& c, int n) {
    const int N = c.size();
    std::vector<std::pair<int, int>> slots;
    for (int x = 1; x < N; ++x)
        for (int y = x; y < N; ++y)
            slots.push_back({x, y});
    auto index = [&](int x, int y) {
        if (x > y)
            std::swap(x, y);
        for (std::size_t s = 0; s < slots.size(); ++s)
            if (slots[s].first == x && slots[s].second == y)
                return static_cast<int>(s);
        return -1;
    };
    auto value = [&](const std::vector<int>& f, int x, int y) { return x == 0 || y == 0 ? 0 : f[index(x, y)]; };
    auto is_cocycle = [&](const std::vector<int>& f) {
        for (int x = 0; x < N; ++x)
            for (int y = 0; y < N; ++y)
                for (int z = 0; z < N; ++z)
                    if ((value(f, x, y) + value(f, c.add(x, y), z) - value(f, y, z) - value(f, x, c.add(y, z))) % n)
                        return false;
        return true;
    };

    std::set<std::vector<int>> coboundaries;
    std::vector<int> g(N, 0);
    long total_g = 1;
    for (int i = 1; i < N; ++i)
        total_g *= n;
    for (long code = 0; code < total_g; ++code) {
        long k = code;
        for (int i = 1; i < N; ++i) {
            g[i] = static_cast<int>(k % n);
            k /= n;
        }
        std::vector<int> f(slots.size());
        for (std::size_t s = 0; s < slots.size(); ++s) {
            auto [x, y] = slots[s];
            f[s] = ((g[x] + g[y] - g[c.add(x, y)]) % n + n) % n;
        }
        coboundaries.insert(f);
    }

    std::vector<std::vector<int>> cocycles;
    std::vector<int> f(slots.size(), 0);
    long total_f = 1;
    for (std::size_t s = 0; s < slots.size(); ++s)
        total_f *= n;
    for (long code = 0; code < total_f; ++code) {
        long k = code;
        for (auto& v : f) {
            v = static_cast<int>(k % n);
            k /= n;
        }
        if (is_cocycle(f))
            cocycles.push_back(f);
    }

    CohomologySummary out;
    out.order = static_cast<long>(cocycles.size() / coboundaries.size());
    out.exponent = 1;
    for (const auto& z : cocycles) {
        long k = 1;
        std::vector<int> multiple = z;
        while (!coboundaries.count(multiple)) {
            ++k;
            for (std::size_t s = 0; s < multiple.size(); ++s)
                multiple[s] = (multiple[s] + z[s]) % n;
        }
        out.exponent = std::lcm(out.exponent, k);
    }
    return out;
}

} // namespace oracle
