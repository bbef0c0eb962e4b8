#pragma once

#include "homotopy_ledger/canonical_group.hpp"
#include "homotopy_ledger/explicit_group.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hl {

struct Ambiguous : std::runtime_error {
    Ambiguous(const std::string& what, std::vector<CanonicalGroup> survivors)
        : std::runtime_error(what), survivors(std::move(survivors)) {}
    std::vector<CanonicalGroup> survivors;
};

struct Contradiction : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline Locality common_locality(const CanonicalGroup& a, const CanonicalGroup& c, const char* who) {
    if (a.locality() != c.locality())
        throw LocalityMismatch(std::string(who) + ": localities " + a.locality().to_string() + " and " +
                               c.locality().to_string() + " differ");
    return a.locality();
}

inline std::map<Prime, std::vector<unsigned>> partitions_by_prime(const CanonicalGroup& g) {
    std::map<Prime, std::vector<unsigned>> out;
    for (const auto& pp : g.torsion())
        out[pp.p].push_back(pp.e);
    return out;
}

// Whether the skew shape lambda/mu admits a Littlewood-Richardson tableau of content nu.
class LittlewoodRichardson {
public:
    LittlewoodRichardson(std::vector<unsigned> lambda, std::vector<unsigned> mu, std::vector<unsigned> nu)
        : lambda_(std::move(lambda)), mu_(std::move(mu)), nu_(std::move(nu)) {
        mu_.resize(lambda_.size(), 0);
    }

    bool positive() {
        unsigned total_l = 0, total_m = 0, total_n = 0;
        for (unsigned x : lambda_)
            total_l += x;
        for (unsigned x : mu_)
            total_m += x;
        for (unsigned x : nu_)
            total_n += x;
        if (total_l != total_m + total_n)
            return false;
        for (std::size_t i = 0; i < lambda_.size(); ++i)
            if (mu_[i] > lambda_[i])
                return false;
        if (mu_.size() > lambda_.size())
            return false;
        for (std::size_t i = 0; i < lambda_.size(); ++i)
            for (unsigned j = mu_[i]; j < lambda_[i]; ++j)
                cells_.push_back({i, j});
        // Reverse reading order: rows top to bottom, each row right to left.
        std::stable_sort(cells_.begin(), cells_.end(), [](const Cell& a, const Cell& b) {
            return a.row != b.row ? a.row < b.row : a.col > b.col;
        });
        fill_.assign(lambda_.size(), std::vector<unsigned>(lambda_.empty() ? 0 : lambda_[0], 0));
        used_.assign(nu_.size(), 0);
        return search(0);
    }

private:
    struct Cell {
        std::size_t row;
        unsigned col;
    };

    bool search(std::size_t k) {
        if (k == cells_.size())
            return true;
        const Cell c = cells_[k];
        for (unsigned v = 1; v <= nu_.size(); ++v) {
            if (used_[v - 1] >= nu_[v - 1])
                continue;
            // Lattice condition on the reverse reading word.
            if (v > 1 && used_[v - 2] <= used_[v - 1])
                continue;
            // Rows weakly increase left to right.
            if (c.col + 1 < lambda_[c.row] && fill_[c.row][c.col + 1] != 0 && v > fill_[c.row][c.col + 1])
                continue;
            // Columns strictly increase downward.
            if (c.row > 0 && c.col >= mu_[c.row - 1] && c.col < lambda_[c.row - 1] && v <= fill_[c.row - 1][c.col])
                continue;
            fill_[c.row][c.col] = v;
            ++used_[v - 1];
            if (search(k + 1))
                return true;
            --used_[v - 1];
            fill_[c.row][c.col] = 0;
        }
        return false;
    }

    std::vector<unsigned> lambda_, mu_, nu_;
    std::vector<Cell> cells_;
    std::vector<std::vector<unsigned>> fill_;
    std::vector<unsigned> used_;
};

} // namespace detail

/// Ext^1(c, a) from Ext(Z_m, Z_n) = Z_gcd(m,n), Ext(Z_m, Z) = Z_m, Ext(Z, -) = 0.
inline CanonicalGroup ext_group(const CanonicalGroup& c, const CanonicalGroup& a) {
    Locality loc = detail::common_locality(a, c, "ext_group");
    std::vector<PrimePower> torsion;
    for (const auto& x : c.torsion()) {
        for (const auto& y : a.torsion())
            if (x.p == y.p)
                torsion.push_back({x.p, std::min(x.e, y.e)});
        for (std::size_t i = 0; i < a.free_rank(); ++i)
            torsion.push_back(x);
    }
    return CanonicalGroup::make(0, std::move(torsion), loc);
}

/// Hom(a, b) from Hom(Z, Z) = Z, Hom(Z, Z_n) = Z_n, Hom(Z_m, Z) = 0, Hom(Z_m, Z_n) = Z_gcd(m,n).
inline CanonicalGroup hom_group(const CanonicalGroup& a, const CanonicalGroup& b) {
    Locality loc = detail::common_locality(a, b, "hom_group");
    std::vector<PrimePower> torsion;
    for (std::size_t i = 0; i < a.free_rank(); ++i)
        torsion.insert(torsion.end(), b.torsion().begin(), b.torsion().end());
    for (const auto& x : a.torsion())
        for (const auto& y : b.torsion())
            if (x.p == y.p)
                torsion.push_back({x.p, std::min(x.e, y.e)});
    return CanonicalGroup::make(a.free_rank() * b.free_rank(), std::move(torsion), loc);
}

/// Every middle group G admitting a subgroup isomorphic to a with quotient isomorphic to c.
inline std::vector<CanonicalGroup> middle_candidates(const CanonicalGroup& a, const CanonicalGroup& c,
                                                     std::uint64_t bound = default_enumeration_bound) {
    Locality loc = detail::common_locality(a, c, "middle_candidates");
    if (!a.is_finite())
        throw std::invalid_argument("middle_candidates: subgroup " + to_descriptor(a) + " must be finite");
    Integer n = order(a).value * order(c.torsion_part()).value;
    if (n > bound)
        throw BoundExceeded("middle_candidates: order " + n.str() + " exceeds bound " + std::to_string(bound));

    auto pa = detail::partitions_by_prime(a);
    auto pc = detail::partitions_by_prime(c);
    std::set<Prime> primes;
    for (const auto& [p, _] : pa)
        primes.insert(p);
    for (const auto& [p, _] : pc)
        primes.insert(p);

    std::vector<std::vector<PrimePower>> choices{{}};
    for (Prime p : primes) {
        const auto& mu = pa[p];
        const auto& nu = pc[p];
        unsigned total = 0;
        for (unsigned x : mu)
            total += x;
        for (unsigned x : nu)
            total += x;
        std::vector<std::vector<PrimePower>> next;
        for (const auto& lambda : partitions(total)) {
            if (!detail::LittlewoodRichardson(lambda, mu, nu).positive())
                continue;
            for (const auto& prefix : choices) {
                auto t = prefix;
                for (unsigned e : lambda)
                    t.push_back({p, e});
                next.push_back(std::move(t));
            }
        }
        choices = std::move(next);
    }
    std::vector<CanonicalGroup> out;
    for (auto& t : choices)
        out.push_back(CanonicalGroup::make(c.free_rank(), std::move(t), loc));
    std::sort(out.begin(), out.end());
    return out;
}

/// An element x of the given order whose image in G/H has order image_order
/// (default: the exponent of the quotient); with hits_sub_at = k, also k*x is a nonzero element of H.
struct ElementOrder {
    std::uint64_t order = 1;
    std::optional<std::uint64_t> image_order;
    std::optional<std::uint64_t> hits_sub_at;
};
struct Splits {};
struct NonSplit {};
/// Some admissible H has G / (multiple * H) isomorphic to expect.
struct CokernelShape {
    CanonicalGroup expect;
    std::uint64_t multiple = 1;
};
/// Externally justified choice of the middle group.
struct AxiomCitation {
    std::string text;
    CanonicalGroup selects;
};

using WitnessKind = std::variant<ElementOrder, Splits, NonSplit, CokernelShape, AxiomCitation>;

struct Witness {
    WitnessKind kind;
    std::string cite;
    bool external = false;
};

struct ExtensionProblem {
    CanonicalGroup sub;
    CanonicalGroup quotient;
    std::vector<Witness> witnesses;
};

inline std::string describe(const Witness& w) {
    return std::visit(
        [](const auto& k) -> std::string {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, ElementOrder>) {
                std::string s = "ElementOrder(" + std::to_string(k.order);
                if (k.image_order)
                    s += ", image " + std::to_string(*k.image_order);
                if (k.hits_sub_at)
                    s += ", hits sub at " + std::to_string(*k.hits_sub_at);
                return s + ")";
            } else if constexpr (std::is_same_v<K, Splits>) {
                return "Splits";
            } else if constexpr (std::is_same_v<K, NonSplit>) {
                return "NonSplit";
            } else if constexpr (std::is_same_v<K, CokernelShape>) {
                return "CokernelShape(" + to_descriptor(k.expect) + ", multiple " + std::to_string(k.multiple) + ")";
            } else {
                return "AxiomCitation(" + k.text + " selects " + to_descriptor(k.selects) + ")";
            }
        },
        w.kind);
}

namespace detail {

// Subgroups H of g isomorphic to a with g/H isomorphic to c.
inline std::vector<ExplicitGroup::Subset> admissible_subgroups(const ExplicitGroup& g, const CanonicalGroup& a,
                                                               const CanonicalGroup& c) {
    std::vector<ExplicitGroup::Subset> out;
    const Integer na = order(a).value;
    for (auto& h : g.subgroups()) {
        if (ExplicitGroup::count(h) != na)
            continue;
        if (g.classify(h) != a || g.classify_quotient(h) != c)
            continue;
        out.push_back(std::move(h));
    }
    return out;
}

inline bool element_order_holds(const ExplicitGroup& g, const std::vector<ExplicitGroup::Subset>& subs,
                                const ElementOrder& w, const CanonicalGroup& c) {
    const std::uint64_t image_order =
        w.image_order ? *w.image_order : static_cast<std::uint64_t>(c.exponent());
    for (const auto& h : subs)
        for (ExplicitGroup::Element x = 0; x < g.size(); ++x) {
            if (g.order_of(x) != w.order || g.order_modulo(x, h) != image_order)
                continue;
            if (w.hits_sub_at) {
                auto y = g.multiple(*w.hits_sub_at, x);
                if (y == 0 || !h[y])
                    continue;
            }
            return true;
        }
    return false;
}

inline bool cokernel_shape_holds(const ExplicitGroup& g, const std::vector<ExplicitGroup::Subset>& subs,
                                 const CokernelShape& w) {
    for (const auto& h : subs) {
        auto kh = g.scaled(h, w.multiple);
        if (g.classify_quotient(kh) == w.expect)
            return true;
    }
    return false;
}

} // namespace detail

struct FilterStep {
    std::string witness;
    std::string cite;
    bool external = false;
    std::vector<CanonicalGroup> kept;
};

struct Resolution {
    CanonicalGroup group;
    std::vector<CanonicalGroup> candidates;
    std::vector<FilterStep> filters;
    std::vector<std::string> external_citations;
};

/// Applies each witness as an independent predicate on the candidates and returns the unique survivor.
inline Resolution resolve(const ExtensionProblem& p, std::uint64_t bound = default_enumeration_bound) {
    Resolution r;
    for (const auto& w : p.witnesses)
        if (w.external)
            r.external_citations.push_back(w.cite.empty() ? describe(w) : w.cite);
    if (p.sub.is_trivial() || p.quotient.is_trivial()) {
        detail::common_locality(p.sub, p.quotient, "resolve");
        r.group = p.sub.is_trivial() ? p.quotient : p.sub;
        r.candidates = {r.group};
        return r;
    }
    r.candidates = middle_candidates(p.sub, p.quotient, bound);
    const CanonicalGroup split = direct_sum({p.sub, p.quotient});

    std::vector<bool> alive(r.candidates.size(), true);
    for (const auto& w : p.witnesses) {
        FilterStep step{describe(w), w.cite, w.external, {}};
        for (std::size_t i = 0; i < r.candidates.size(); ++i) {
            const CanonicalGroup& g = r.candidates[i];
            bool keep = std::visit(
                [&](const auto& k) -> bool {
                    using K = std::decay_t<decltype(k)>;
                    if constexpr (std::is_same_v<K, Splits>) {
                        return g == split;
                    } else if constexpr (std::is_same_v<K, NonSplit>) {
                        return g != split;
                    } else if constexpr (std::is_same_v<K, AxiomCitation>) {
                        return g == k.selects;
                    } else {
                        if (!g.is_finite())
                            throw std::invalid_argument("resolve: " + describe(w) +
                                                        " needs a finite extension problem");
                        ExplicitGroup eg(g, bound);
                        auto subs = detail::admissible_subgroups(eg, p.sub, p.quotient);
                        if constexpr (std::is_same_v<K, ElementOrder>)
                            return detail::element_order_holds(eg, subs, k, p.quotient);
                        else
                            return detail::cokernel_shape_holds(eg, subs, k);
                    }
                },
                w.kind);
            if (keep)
                step.kept.push_back(g);
            alive[i] = alive[i] && keep;
        }
        r.filters.push_back(std::move(step));
    }

    std::vector<CanonicalGroup> survivors;
    for (std::size_t i = 0; i < r.candidates.size(); ++i)
        if (alive[i])
            survivors.push_back(r.candidates[i]);
    if (survivors.empty()) {
        std::string what = "no candidate survives the witnesses:";
        for (const auto& f : r.filters)
            what += " " + f.witness + " keeps " + std::to_string(f.kept.size()) + ";";
        throw Contradiction(what);
    }
    if (survivors.size() > 1) {
        std::string what = "ambiguous extension, survivors:";
        for (const auto& s : survivors)
            what += " " + to_descriptor(s);
        throw Ambiguous(what, std::move(survivors));
    }
    r.group = survivors.front();
    return r;
}

} // namespace hl
