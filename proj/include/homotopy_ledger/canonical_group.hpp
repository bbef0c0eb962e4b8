#pragma once

#include "homotopy_ledger/errors.hpp"
#include "homotopy_ledger/int_matrix.hpp"
#include "homotopy_ledger/locality.hpp"
#include "homotopy_ledger/smith.hpp"

#include <algorithm>
#include <cctype>
#include <compare>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hl {

struct PrimePower {
    Prime p = 2;
    unsigned e = 1;

    Integer value() const {
        Integer v = 1;
        for (unsigned i = 0; i < e; ++i)
            v *= p;
        return v;
    }

    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

// Primes ascending, exponents descending within a prime.
inline bool canonical_before(const PrimePower& a, const PrimePower& b) {
    if (a.p != b.p)
        return a.p < b.p;
    return a.e > b.e;
}

/// Prime factorization by trial division; n must be positive.
inline std::vector<PrimePower> factorize(Integer n) {
    if (n <= 0)
        throw std::invalid_argument("factorize: nonpositive argument");
    std::vector<PrimePower> out;
    auto strip = [&](Prime p) {
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e)
            out.push_back({p, e});
    };
    strip(2);
    for (Prime d = 3; Integer(d) * d <= n; d += 2)
        strip(d);
    if (n > 1) {
        if (n > Integer(std::numeric_limits<Prime>::max()))
            throw std::overflow_error("factorize: prime factor exceeds 64 bits");
        out.push_back({static_cast<Prime>(n), 1});
    }
    return out;
}

struct GroupOrder {
    bool infinite = false;
    Integer value = 1;

    friend bool operator==(const GroupOrder&, const GroupOrder&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const GroupOrder& o) {
    return o.infinite ? os << "inf" : os << o.value;
}

/// Isomorphism-class representative: free rank, primary torsion, locality.
/// Field equality coincides with isomorphism.
class CanonicalGroup {
public:
    CanonicalGroup() = default;

    static CanonicalGroup make(std::size_t free_rank, std::vector<PrimePower> torsion,
                               Locality locality = Locality::global()) {
        for (const auto& pp : torsion) {
            if (pp.e == 0 || !is_prime(pp.p))
                throw std::invalid_argument("CanonicalGroup: torsion entry is not a prime power");
            if (!locality.admits(pp.p))
                throw LocalityMismatch("CanonicalGroup: torsion prime " + std::to_string(pp.p) +
                                       " outside locality " + locality.to_string());
        }
        std::sort(torsion.begin(), torsion.end(), canonical_before);
        CanonicalGroup g;
        g.free_rank_ = free_rank;
        g.torsion_ = std::move(torsion);
        g.locality_ = std::move(locality);
        return g;
    }

    static CanonicalGroup trivial(Locality locality = Locality::global()) {
        return make(0, {}, std::move(locality));
    }
    static CanonicalGroup free(std::size_t rank, Locality locality = Locality::global()) {
        return make(rank, {}, std::move(locality));
    }
    /// Z/n split into primary parts; n = 0 gives Z, n = 1 gives 0.
    static CanonicalGroup cyclic(const Integer& n, Locality locality = Locality::global()) {
        if (n < 0)
            throw std::invalid_argument("CanonicalGroup::cyclic: negative order");
        if (n == 0)
            return free(1, std::move(locality));
        std::vector<PrimePower> torsion;
        for (const auto& pp : factorize(n))
            if (locality.admits(pp.p))
                torsion.push_back(pp);
        return make(0, std::move(torsion), std::move(locality));
    }

    std::size_t free_rank() const { return free_rank_; }
    const std::vector<PrimePower>& torsion() const { return torsion_; }
    const Locality& locality() const { return locality_; }

    bool is_finite() const { return free_rank_ == 0; }
    bool is_trivial() const { return free_rank_ == 0 && torsion_.empty(); }

    /// Torsion primes, ascending and distinct.
    std::vector<Prime> primes() const {
        std::vector<Prime> out;
        for (const auto& pp : torsion_)
            if (out.empty() || out.back() != pp.p)
                out.push_back(pp.p);
        return out;
    }

    CanonicalGroup torsion_part() const { return make(0, torsion_, locality_); }
    CanonicalGroup with_locality(Locality l) const { return make(free_rank_, torsion_, std::move(l)); }

    /// Exponent of the torsion subgroup (1 when torsion-free).
    Integer exponent() const {
        std::map<Prime, unsigned> top;
        for (const auto& pp : torsion_)
            top[pp.p] = std::max(top[pp.p], pp.e);
        Integer out = 1;
        for (const auto& [p, e] : top)
            out *= PrimePower{p, e}.value();
        return out;
    }

    friend bool operator==(const CanonicalGroup&, const CanonicalGroup&) = default;

    friend std::strong_ordering operator<=>(const CanonicalGroup& a, const CanonicalGroup& b) {
        if (auto c = a.locality_ <=> b.locality_; c != 0)
            return c;
        if (auto c = a.free_rank_ <=> b.free_rank_; c != 0)
            return c;
        const std::size_t n = std::min(a.torsion_.size(), b.torsion_.size());
        for (std::size_t i = 0; i < n; ++i) {
            const auto& x = a.torsion_[i];
            const auto& y = b.torsion_[i];
            if (x.p != y.p)
                return x.p <=> y.p;
            if (x.e != y.e)
                return y.e <=> x.e;
        }
        return a.torsion_.size() <=> b.torsion_.size();
    }

private:
    std::size_t free_rank_ = 0;
    std::vector<PrimePower> torsion_;
    Locality locality_;
};

inline bool is_isomorphic(const CanonicalGroup& g, const CanonicalGroup& h) { return g == h; }

inline GroupOrder order(const CanonicalGroup& g) {
    if (!g.is_finite())
        return {true, 0};
    Integer v = 1;
    for (const auto& pp : g.torsion())
        v *= pp.value();
    return {false, v};
}

/// Invariant factors d1 | d2 | ... of the torsion subgroup.
inline IntVector invariant_factors(const CanonicalGroup& g) {
    std::map<Prime, std::vector<unsigned>> by_prime;
    for (const auto& pp : g.torsion())
        by_prime[pp.p].push_back(pp.e);
    std::size_t length = 0;
    for (const auto& [p, es] : by_prime)
        length = std::max(length, es.size());
    IntVector out(length, Integer(1));
    for (const auto& [p, es] : by_prime)
        for (std::size_t i = 0; i < es.size(); ++i)
            out[length - 1 - i] *= PrimePower{p, es[i]}.value();
    return out;
}

struct Normalized {
    CanonicalGroup group;
    std::vector<PrimePower> discarded;
};

inline Normalized normalize_detailed(std::size_t generators, const IntMatrix& relations,
                                     const Locality& locality = Locality::global()) {
    if (relations.rows() > 0 && relations.cols() != generators)
        throw std::invalid_argument("normalize: relation width " + std::to_string(relations.cols()) +
                                    " does not match " + std::to_string(generators) + " generators");
    SmithForm snf = smith_normal_form(relations);
    Normalized out;
    std::vector<PrimePower> torsion;
    for (const auto& d : snf.invariants) {
        if (d == 1)
            continue;
        for (const auto& pp : factorize(d)) {
            if (locality.admits(pp.p))
                torsion.push_back(pp);
            else
                out.discarded.push_back(pp);
        }
    }
    std::sort(out.discarded.begin(), out.discarded.end(), canonical_before);
    out.group = CanonicalGroup::make(generators - snf.rank(), std::move(torsion), locality);
    return out;
}

inline CanonicalGroup normalize(std::size_t generators, const IntMatrix& relations,
                                const Locality& locality = Locality::global()) {
    return normalize_detailed(generators, relations, locality).group;
}

/// A diagonal presentation of g: one generator per summand.
inline std::pair<std::size_t, IntMatrix> presentation_of(const CanonicalGroup& g) {
    const std::size_t n = g.free_rank() + g.torsion().size();
    IntMatrix rel(g.torsion().size(), n);
    for (std::size_t i = 0; i < g.torsion().size(); ++i)
        rel(i, g.free_rank() + i) = g.torsion()[i].value();
    return {n, rel};
}

inline CanonicalGroup direct_sum(std::span<const CanonicalGroup> parts) {
    if (parts.empty())
        return CanonicalGroup::trivial();
    const Locality& loc = parts.front().locality();
    std::size_t rank = 0;
    std::vector<PrimePower> torsion;
    for (const auto& g : parts) {
        if (g.locality() != loc)
            throw LocalityMismatch("direct_sum: localities " + loc.to_string() + " and " +
                                   g.locality().to_string() + " differ");
        rank += g.free_rank();
        torsion.insert(torsion.end(), g.torsion().begin(), g.torsion().end());
    }
    return CanonicalGroup::make(rank, std::move(torsion), loc);
}

inline CanonicalGroup direct_sum(std::initializer_list<CanonicalGroup> parts) {
    return direct_sum(std::span<const CanonicalGroup>(parts.begin(), parts.size()));
}

inline CanonicalGroup localize(const CanonicalGroup& g, std::vector<Prime> primes) {
    Locality target = Locality::at(std::move(primes));
    if (!g.locality().covers(target))
        throw LocalityMismatch("localize: " + target.to_string() + " is not contained in " +
                               g.locality().to_string());
    std::vector<PrimePower> torsion;
    for (const auto& pp : g.torsion())
        if (target.admits(pp.p))
            torsion.push_back(pp);
    return CanonicalGroup::make(g.free_rank(), std::move(torsion), std::move(target));
}

inline CanonicalGroup localize(const CanonicalGroup& g, const Locality& target) {
    if (target.is_global()) {
        if (!g.locality().is_global())
            throw LocalityMismatch("localize: cannot globalize a localized group");
        return g;
    }
    return localize(g, target.primes());
}

/// The p-primary torsion, tagged as localized at p.
inline CanonicalGroup p_component(const CanonicalGroup& g, Prime p) {
    if (!is_prime(p))
        throw std::invalid_argument("p_component: " + std::to_string(p) + " is not prime");
    std::vector<PrimePower> torsion;
    for (const auto& pp : g.torsion())
        if (pp.p == p)
            torsion.push_back(pp);
    return CanonicalGroup::make(0, std::move(torsion), Locality::at({p}));
}

/// Partitions of n, each listed in nonincreasing order, partitions in reverse lexicographic order.
inline std::vector<std::vector<unsigned>> partitions(unsigned n) {
    std::vector<std::vector<unsigned>> out;
    std::vector<unsigned> current;
    auto rec = [&](auto&& self, unsigned remaining, unsigned cap) -> void {
        if (remaining == 0) {
            out.push_back(current);
            return;
        }
        for (unsigned part = std::min(remaining, cap); part >= 1; --part) {
            current.push_back(part);
            self(self, remaining - part, part);
            current.pop_back();
        }
    };
    rec(rec, n, n);
    return out;
}

inline constexpr std::uint64_t default_enumeration_bound = 4096;

/// Every abelian group of order n, canonically sorted.
inline std::vector<CanonicalGroup> enumerate_abelian_groups(const Integer& n,
                                                            std::uint64_t bound = default_enumeration_bound) {
    if (n < 1)
        throw std::invalid_argument("enumerate_abelian_groups: order must be positive");
    if (n > bound)
        throw BoundExceeded("enumerate_abelian_groups: order " + n.str() + " exceeds bound " +
                            std::to_string(bound));
    std::vector<std::vector<PrimePower>> choices{{}};
    for (const auto& pp : factorize(n)) {
        std::vector<std::vector<PrimePower>> next;
        for (const auto& prefix : choices)
            for (const auto& part : partitions(pp.e)) {
                auto t = prefix;
                for (unsigned e : part)
                    t.push_back({pp.p, e});
                next.push_back(std::move(t));
            }
        choices = std::move(next);
    }
    std::vector<CanonicalGroup> out;
    out.reserve(choices.size());
    for (auto& t : choices)
        out.push_back(CanonicalGroup::make(0, std::move(t)));
    std::sort(out.begin(), out.end());
    return out;
}

// Descriptor grammar: terms "Z", "Z<n>", "Z<n>^<k>", "0" joined by '+', optional "@{p,...}".

inline std::string to_descriptor(const CanonicalGroup& g) {
    std::string out;
    auto add = [&](const std::string& term) {
        if (!out.empty())
            out += '+';
        out += term;
    };
    for (std::size_t i = 0; i < g.free_rank(); ++i)
        add("Z");
    for (const auto& pp : g.torsion())
        add("Z" + pp.value().str());
    if (out.empty())
        out = "0";
    if (!g.locality().is_global())
        out += '@' + g.locality().to_string();
    return out;
}

inline std::ostream& operator<<(std::ostream& os, const CanonicalGroup& g) { return os << to_descriptor(g); }

namespace detail {

class DescriptorParser {
public:
    explicit DescriptorParser(std::string_view text) : text_(text) {}

    CanonicalGroup parse() {
        std::size_t rank = 0;
        std::vector<Integer> cyclic_orders;
        skip_space();
        if (at_end())
            fail("empty descriptor");
        for (;;) {
            term(rank, cyclic_orders);
            skip_space();
            if (peek() == '+') {
                ++pos_;
                continue;
            }
            break;
        }
        Locality loc;
        if (peek() == '@') {
            ++pos_;
            loc = locality();
        }
        skip_space();
        if (!at_end())
            fail("unexpected character");
        std::vector<PrimePower> torsion;
        for (const auto& n : cyclic_orders)
            for (const auto& pp : factorize(n))
                if (loc.admits(pp.p))
                    torsion.push_back(pp);
        return CanonicalGroup::make(rank, std::move(torsion), loc);
    }

private:
    void term(std::size_t& rank, std::vector<Integer>& orders) {
        skip_space();
        if (peek() == '0') {
            ++pos_;
            return;
        }
        if (peek() != 'Z')
            fail("expected 'Z' or '0'");
        ++pos_;
        std::optional<Integer> n;
        if (std::isdigit(static_cast<unsigned char>(peek()))) {
            n = number();
            if (*n == 0)
                fail("cyclic order must be positive");
        }
        Integer times = 1;
        if (peek() == '^') {
            ++pos_;
            times = number();
        }
        for (Integer i = 0; i < times; ++i) {
            if (n)
                orders.push_back(*n);
            else
                ++rank;
        }
    }

    Locality locality() {
        if (peek() != '{')
            fail("expected '{' after '@'");
        ++pos_;
        std::vector<Prime> primes;
        for (;;) {
            skip_space();
            primes.push_back(static_cast<Prime>(number()));
            skip_space();
            if (peek() == ',') {
                ++pos_;
                continue;
            }
            if (peek() == '}') {
                ++pos_;
                break;
            }
            fail("expected ',' or '}'");
        }
        try {
            return Locality::at(std::move(primes));
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }

    Integer number() {
        if (!std::isdigit(static_cast<unsigned char>(peek())))
            fail("expected digit");
        Integer v = 0;
        while (std::isdigit(static_cast<unsigned char>(peek())))
            v = v * 10 + (text_[pos_++] - '0');
        return v;
    }

    char peek() const { return at_end() ? '\0' : text_[pos_]; }
    bool at_end() const { return pos_ >= text_.size(); }
    void skip_space() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw DescriptorError("descriptor \"" + std::string(text_) + "\" at offset " + std::to_string(pos_) +
                              ": " + what);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline CanonicalGroup parse_descriptor(std::string_view text) { return detail::DescriptorParser(text).parse(); }

} // namespace hl
