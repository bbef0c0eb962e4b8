#pragma once

#include "homotopy_ledger/canonical_group.hpp"

#include <cstdint>
#include <deque>
#include <set>
#include <vector>

namespace hl {

/// A finite abelian group as tuples with componentwise modular addition. Elements are
/// indexed in mixed radix over the cyclic factors of the canonical form.
class ExplicitGroup {
public:
    using Element = std::uint32_t;
    using Subset = std::vector<bool>;

    explicit ExplicitGroup(const CanonicalGroup& g, std::uint64_t bound = default_enumeration_bound) : group_(g) {
        if (!g.is_finite())
            throw std::invalid_argument("realize_explicit: group " + to_descriptor(g) + " is infinite");
        GroupOrder o = order(g);
        if (o.value > bound)
            throw BoundExceeded("realize_explicit: order " + o.value.str() + " exceeds bound " + std::to_string(bound));
        size_ = 1;
        for (const auto& pp : g.torsion()) {
            auto m = static_cast<Element>(pp.value());
            stride_.push_back(size_);
            moduli_.push_back(m);
            size_ *= m;
        }
    }

    const CanonicalGroup& canonical() const { return group_; }
    Element size() const { return size_; }
    const std::vector<Element>& moduli() const { return moduli_; }

    std::vector<Element> digits(Element x) const {
        std::vector<Element> d(moduli_.size());
        for (std::size_t i = 0; i < moduli_.size(); ++i)
            d[i] = (x / stride_[i]) % moduli_[i];
        return d;
    }

    Element from_digits(const std::vector<Element>& d) const {
        Element x = 0;
        for (std::size_t i = 0; i < moduli_.size(); ++i)
            x += (d[i] % moduli_[i]) * stride_[i];
        return x;
    }

    Element add(Element x, Element y) const {
        Element out = 0;
        for (std::size_t i = 0; i < moduli_.size(); ++i) {
            Element a = (x / stride_[i]) % moduli_[i];
            Element b = (y / stride_[i]) % moduli_[i];
            out += ((a + b) % moduli_[i]) * stride_[i];
        }
        return out;
    }

    Element multiple(std::uint64_t k, Element x) const {
        Element out = 0;
        for (std::size_t i = 0; i < moduli_.size(); ++i) {
            std::uint64_t a = (x / stride_[i]) % moduli_[i];
            out += static_cast<Element>((a * (k % moduli_[i])) % moduli_[i]) * stride_[i];
        }
        return out;
    }

    std::uint64_t order_of(Element x) const {
        std::uint64_t k = 1;
        for (Element y = x; y != 0; y = add(y, x))
            ++k;
        return k;
    }

    /// Least t >= 1 with t*x in h.
    std::uint64_t order_modulo(Element x, const Subset& h) const {
        std::uint64_t t = 1;
        for (Element y = x; !h[y]; y = add(y, x))
            ++t;
        return t;
    }

    Subset trivial_subgroup() const {
        Subset s(size_, false);
        s[0] = true;
        return s;
    }

    Subset cyclic_subgroup(Element x) const {
        Subset s = trivial_subgroup();
        for (Element y = x; y != 0; y = add(y, x))
            s[y] = true;
        return s;
    }

    /// Subgroup generated by h and x.
    Subset join(const Subset& h, Element x) const {
        Subset out(size_, false);
        std::vector<Element> multiples{0};
        for (Element y = x; y != 0; y = add(y, x))
            multiples.push_back(y);
        for (Element e = 0; e < size_; ++e)
            if (h[e])
                for (Element m : multiples)
                    out[add(e, m)] = true;
        return out;
    }

    /// {k*h : h in subset}.
    Subset scaled(const Subset& h, std::uint64_t k) const {
        Subset out(size_, false);
        for (Element e = 0; e < size_; ++e)
            if (h[e])
                out[multiple(k, e)] = true;
        return out;
    }

    /// Every subgroup, found by closing under single-element joins from the trivial subgroup.
    std::vector<Subset> subgroups() const {
        std::set<Subset> seen{trivial_subgroup()};
        std::deque<Subset> queue{trivial_subgroup()};
        while (!queue.empty()) {
            Subset s = std::move(queue.front());
            queue.pop_front();
            for (Element x = 1; x < size_; ++x) {
                if (s[x])
                    continue;
                Subset t = join(s, x);
                if (seen.insert(t).second)
                    queue.push_back(std::move(t));
            }
        }
        return {seen.begin(), seen.end()};
    }

    static std::uint64_t count(const Subset& s) {
        std::uint64_t n = 0;
        for (bool b : s)
            n += b;
        return n;
    }

    /// Isomorphism type of a subgroup, read off from the counts #{x : p^k x = 0}.
    CanonicalGroup classify(const Subset& h) const {
        return classify_by_counts([&](std::uint64_t pk) {
            std::uint64_t n = 0;
            for (Element e = 0; e < size_; ++e)
                n += h[e] && multiple(pk, e) == 0;
            return n;
        });
    }

    /// Isomorphism type of G/h, read off from #{x : p^k x in h} / |h|.
    CanonicalGroup classify_quotient(const Subset& h) const {
        const std::uint64_t hn = count(h);
        return classify_by_counts([&](std::uint64_t pk) {
            std::uint64_t n = 0;
            for (Element e = 0; e < size_; ++e)
                n += h[multiple(pk, e)];
            return n / hn;
        });
    }

private:
    template <class Counter>
    CanonicalGroup classify_by_counts(Counter&& count_killed) const {
        std::vector<PrimePower> torsion;
        for (Prime p : group_.primes()) {
            // conj[k-1] = number of cyclic factors of order at least p^k.
            std::vector<unsigned> conj;
            std::uint64_t prev = 1;
            std::uint64_t pk = 1;
            for (;;) {
                pk *= p;
                std::uint64_t n = count_killed(pk);
                unsigned parts = 0;
                for (std::uint64_t r = n / prev; r > 1; r /= p)
                    ++parts;
                if (parts == 0)
                    break;
                conj.push_back(parts);
                prev = n;
            }
            // Conjugate back: factor i has exponent #{k : conj[k] > i}.
            unsigned factors = conj.empty() ? 0 : conj.front();
            for (unsigned i = 0; i < factors; ++i) {
                unsigned e = 0;
                for (unsigned c : conj)
                    e += c > i;
                torsion.push_back({p, e});
            }
        }
        return CanonicalGroup::make(0, std::move(torsion), group_.locality());
    }

    CanonicalGroup group_;
    std::vector<Element> moduli_;
    std::vector<Element> stride_;
    Element size_ = 1;
};

inline ExplicitGroup realize_explicit(const CanonicalGroup& g, std::uint64_t bound = default_enumeration_bound) {
    return ExplicitGroup(g, bound);
}

} // namespace hl
