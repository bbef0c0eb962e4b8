#pragma once

#include "homotopy_ledger/errors.hpp"

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

namespace hl {

using Prime = std::uint64_t;

inline bool is_prime(std::uint64_t n) {
    if (n < 2)
        return false;
    if (n % 2 == 0)
        return n == 2;
    for (std::uint64_t d = 3; d <= n / d; d += 2)
        if (n % d == 0)
            return false;
    return true;
}

/// Either the integers themselves (global) or the localization at a nonempty prime set.
class Locality {
public:
    Locality() = default;

    static Locality global() { return Locality(); }

    static Locality at(std::vector<Prime> primes) {
        if (primes.empty())
            throw std::invalid_argument("Locality: empty prime set");
        std::sort(primes.begin(), primes.end());
        if (std::adjacent_find(primes.begin(), primes.end()) != primes.end())
            throw std::invalid_argument("Locality: duplicate prime");
        for (Prime p : primes)
            if (!is_prime(p))
                throw std::invalid_argument("Locality: " + std::to_string(p) + " is not prime");
        Locality l;
        l.primes_ = std::move(primes);
        return l;
    }

    bool is_global() const { return primes_.empty(); }
    const std::vector<Prime>& primes() const { return primes_; }

    /// Whether torsion at p survives in this locality.
    bool admits(Prime p) const {
        return is_global() || std::binary_search(primes_.begin(), primes_.end(), p);
    }

    /// True when every prime kept by `other` is also kept here.
    bool covers(const Locality& other) const {
        if (is_global())
            return true;
        if (other.is_global())
            return false;
        return std::includes(primes_.begin(), primes_.end(), other.primes_.begin(), other.primes_.end());
    }

    std::string to_string() const {
        if (is_global())
            return "global";
        std::ostringstream os;
        os << '{';
        for (std::size_t i = 0; i < primes_.size(); ++i)
            os << (i ? "," : "") << primes_[i];
        os << '}';
        return os.str();
    }

    friend bool operator==(const Locality&, const Locality&) = default;
    friend auto operator<=>(const Locality& a, const Locality& b) {
        if (a.is_global() != b.is_global())
            return a.is_global() ? std::strong_ordering::less : std::strong_ordering::greater;
        return a.primes_ <=> b.primes_;
    }

private:
    std::vector<Prime> primes_;
};

inline Locality intersect(const Locality& a, const Locality& b) {
    if (a.is_global())
        return b;
    if (b.is_global())
        return a;
    std::vector<Prime> common;
    std::set_intersection(a.primes().begin(), a.primes().end(), b.primes().begin(), b.primes().end(),
                          std::back_inserter(common));
    if (common.empty())
        throw LocalityMismatch("disjoint localities " + a.to_string() + " and " + b.to_string());
    return Locality::at(std::move(common));
}

} // namespace hl
