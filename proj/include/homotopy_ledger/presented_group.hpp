#pragma once

#include "homotopy_ledger/canonical_group.hpp"

#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace hl {

namespace detail {

// Largest divisor of d made of primes admitted by the locality.
inline Integer local_part(const Integer& d, const Locality& loc) {
    if (loc.is_global())
        return abs_value(d);
    Integer out = 1;
    for (const auto& pp : factorize(abs_value(d)))
        if (loc.admits(pp.p))
            out *= pp.value();
    return out;
}

inline std::string combination_name(const std::vector<std::string>& names, const IntVector& coeffs) {
    std::string out;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const Integer& c = coeffs[i];
        if (c == 0)
            continue;
        if (out.empty())
            out += c < 0 ? "-" : "";
        else
            out += c < 0 ? "-" : "+";
        Integer a = abs_value(c);
        if (a != 1)
            out += a.str() + "·";
        out += names[i];
    }
    return out.empty() ? "0" : out;
}

// Flip v so that its first nonzero entry is positive; returns whether it flipped.
inline bool make_leading_positive(IntVector& v) {
    for (const auto& x : v)
        if (x != 0) {
            if (x > 0)
                return false;
            for (auto& y : v)
                y = -y;
            return true;
        }
    return false;
}

} // namespace detail

/// Named generators modulo integer relations, in a given locality.
///
/// A localized group is stored through an integral model whose torsion is exactly the
/// local torsion: each invariant factor is replaced by its local part. Membership and
/// zero tests on the model are then exact statements about the localized group.
class PresentedGroup {
public:
    PresentedGroup() : PresentedGroup(make({}, IntMatrix(0, 0))) {}

    static PresentedGroup make(std::vector<std::string> names, const IntMatrix& relations,
                               Locality locality = Locality::global()) {
        const std::size_t n = names.size();
        if (relations.rows() > 0 && relations.cols() != n)
            throw std::invalid_argument("PresentedGroup: relation width does not match generator count");
        std::set<std::string> seen;
        for (const auto& name : names)
            if (!seen.insert(name).second)
                throw std::invalid_argument("PresentedGroup: duplicate generator name '" + name + "'");

        PresentedGroup g{Raw{}};
        g.names_ = std::move(names);
        g.relations_ = relations.rows() == 0 ? IntMatrix(0, n) : relations;
        g.locality_ = std::move(locality);

        SmithForm snf = smith_normal_form(g.relations_);
        std::vector<IntVector> rows;
        for (std::size_t i = 0; i < snf.rank(); ++i) {
            Integer d = detail::local_part(snf.invariants[i], g.locality_);
            IntVector r = snf.right_inverse.row(i);
            for (auto& x : r)
                x *= d;
            rows.push_back(std::move(r));
        }
        g.model_ = IntMatrix::from_rows(rows, n);
        g.canonical_ = normalize(n, g.model_, g.locality_);
        g.cache_ = std::make_shared<const SmithForm>(smith_normal_form(g.model_));
        return g;
    }

    /// Diagonal presentation of a canonical group with the given names (one per summand).
    static PresentedGroup from_canonical(const CanonicalGroup& c, std::vector<std::string> names) {
        auto [n, rel] = presentation_of(c);
        if (names.size() != n)
            throw std::invalid_argument("PresentedGroup::from_canonical: need " + std::to_string(n) + " names");
        return make(std::move(names), rel, c.locality());
    }

    const std::vector<std::string>& names() const { return names_; }
    std::size_t generator_count() const { return names_.size(); }
    const IntMatrix& relations() const { return relations_; }
    const IntMatrix& model_relations() const { return model_; }
    const Locality& locality() const { return locality_; }
    const CanonicalGroup& canonical() const { return canonical_; }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name)
                return i;
        throw std::out_of_range("generator '" + name + "' not in group");
    }

    /// Whether the integer coordinate vector v represents zero.
    bool is_zero(const IntVector& v) const {
        if (v.size() != names_.size())
            throw std::invalid_argument("PresentedGroup::is_zero: length mismatch");
        const SmithForm& s = *cache_;
        IntVector w = s.right.left_multiply(v);
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (i < s.rank()) {
                if (w[i] % s.invariants[i] != 0)
                    return false;
            } else if (w[i] != 0) {
                return false;
            }
        }
        return true;
    }

    /// Order of the element with coordinates v; nullopt when infinite.
    std::optional<Integer> element_order(const IntVector& v) const {
        const SmithForm& s = *cache_;
        IntVector w = s.right.left_multiply(v);
        Integer ord = 1;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] == 0)
                continue;
            if (i >= s.rank())
                return std::nullopt;
            Integer d = s.invariants[i];
            Integer g = gcd(w[i], d);
            Integer k = d / g;
            ord = ord / gcd(ord, k) * k;
        }
        return ord;
    }

    std::string element_name(const IntVector& v) const { return detail::combination_name(names_, v); }

    friend bool operator==(const PresentedGroup& a, const PresentedGroup& b) {
        return a.names_ == b.names_ && a.relations_ == b.relations_ && a.locality_ == b.locality_;
    }

private:
    struct Raw {};
    explicit PresentedGroup(Raw) {}

    std::vector<std::string> names_;
    IntMatrix relations_;
    IntMatrix model_;
    Locality locality_;
    CanonicalGroup canonical_;
    std::shared_ptr<const SmithForm> cache_;
};

inline std::ostream& operator<<(std::ostream& os, const PresentedGroup& g) {
    os << g.canonical() << " <";
    for (std::size_t i = 0; i < g.names().size(); ++i)
        os << (i ? ", " : "") << g.names()[i];
    return os << '>';
}

/// Homomorphism given by the images of domain generators; matrix is codomain x domain.
class GroupHom {
public:
    static GroupHom make(PresentedGroup domain, PresentedGroup codomain, IntMatrix matrix) {
        if (domain.locality() != codomain.locality())
            throw LocalityMismatch("GroupHom: domain locality " + domain.locality().to_string() +
                                   " differs from codomain locality " + codomain.locality().to_string());
        const std::size_t n = domain.generator_count();
        const std::size_t m = codomain.generator_count();
        if (matrix.rows() == 0 && matrix.cols() == 0)
            matrix = IntMatrix(m, n);
        if (matrix.rows() != m || matrix.cols() != n)
            throw std::invalid_argument("GroupHom: matrix is " + std::to_string(matrix.rows()) + "x" +
                                        std::to_string(matrix.cols()) + ", expected " + std::to_string(m) + "x" +
                                        std::to_string(n));
        const IntMatrix& rel = domain.model_relations();
        for (std::size_t r = 0; r < rel.rows(); ++r) {
            IntVector image = matrix.right_multiply(rel.row(r));
            if (!codomain.is_zero(image))
                throw NotWellDefined("relation " + domain.element_name(rel.row(r)) + " = 0 maps to " +
                                     codomain.element_name(image) + ", which is nonzero");
        }
        GroupHom f;
        f.domain_ = std::move(domain);
        f.codomain_ = std::move(codomain);
        f.matrix_ = std::move(matrix);
        return f;
    }

    static GroupHom zero(PresentedGroup domain, PresentedGroup codomain) {
        IntMatrix m(codomain.generator_count(), domain.generator_count());
        return make(std::move(domain), std::move(codomain), std::move(m));
    }

    static GroupHom identity(const PresentedGroup& g) {
        return make(g, g, IntMatrix::identity(g.generator_count()));
    }

    const PresentedGroup& domain() const { return domain_; }
    const PresentedGroup& codomain() const { return codomain_; }
    const IntMatrix& matrix() const { return matrix_; }

    IntVector apply(const IntVector& x) const { return matrix_.right_multiply(x); }

    bool is_zero() const {
        for (std::size_t j = 0; j < matrix_.cols(); ++j)
            if (!codomain_.is_zero(matrix_.column(j)))
                return false;
        return true;
    }

private:
    GroupHom() = default;

    PresentedGroup domain_;
    PresentedGroup codomain_;
    IntMatrix matrix_;
};

inline GroupHom compose(const GroupHom& g, const GroupHom& f) {
    if (!(f.codomain() == g.domain()))
        throw std::invalid_argument("compose: codomain of first map is not the domain of second");
    return GroupHom::make(f.domain(), g.codomain(), g.matrix() * f.matrix());
}

namespace detail {

// A subgroup or quotient realized with a minimal presentation plus the matrix linking
// its generators to the ambient group (rows: new generators, cols: ambient generators
// for subgroups; rows: ambient generators, cols: new generators for quotients).
struct Realized {
    PresentedGroup group;
    IntMatrix link;
};

// Subgroup of Z^n / rowspan(rel) generated by the rows of gens.
inline Realized subgroup(const IntMatrix& gens, const IntMatrix& rel, const std::vector<std::string>& ambient_names,
                         const Locality& loc) {
    const std::size_t k = gens.rows();
    const std::size_t n = ambient_names.size();
    IntMatrix stacked = gens.rows() == 0 ? IntMatrix(0, n) : gens;
    stacked = stacked.stacked(rel.rows() == 0 ? IntMatrix(0, n) : rel);
    IntMatrix lk = left_kernel(stacked);
    IntMatrix sub_rel = lk.column_block(0, k);
    SmithForm snf = smith_normal_form(sub_rel);

    std::vector<std::string> names;
    std::vector<IntVector> link_rows;
    std::vector<Integer> orders;
    for (std::size_t i = 0; i < k; ++i) {
        Integer d = i < snf.rank() ? local_part(snf.invariants[i], loc) : Integer(0);
        if (d == 1)
            continue;
        IntVector coords = gens.left_multiply(snf.right_inverse.row(i));
        make_leading_positive(coords);
        names.push_back(combination_name(ambient_names, coords));
        link_rows.push_back(std::move(coords));
        orders.push_back(d);
    }
    // Disambiguate names that collide after reduction.
    for (std::size_t i = 0; i < names.size(); ++i)
        for (std::size_t j = i + 1; j < names.size(); ++j)
            if (names[j] == names[i])
                names[j] += "#" + std::to_string(j);
    std::vector<IntVector> rel_rows;
    for (std::size_t i = 0; i < orders.size(); ++i)
        if (orders[i] != 0) {
            IntVector row(orders.size());
            row[i] = orders[i];
            rel_rows.push_back(std::move(row));
        }
    return {PresentedGroup::make(std::move(names), IntMatrix::from_rows(rel_rows, orders.size()), loc),
            IntMatrix::from_rows(link_rows, n)};
}

// Quotient Z^m / rowspan(rel) with projection from the ambient coordinates.
inline Realized quotient(const IntMatrix& rel, const std::vector<std::string>& ambient_names, const Locality& loc) {
    const std::size_t m = ambient_names.size();
    SmithForm snf = smith_normal_form(rel.rows() == 0 ? IntMatrix(0, m) : rel);
    std::vector<std::string> names;
    std::vector<std::size_t> kept;
    std::vector<bool> flipped;
    std::vector<Integer> orders;
    for (std::size_t i = 0; i < m; ++i) {
        Integer d = i < snf.rank() ? local_part(snf.invariants[i], loc) : Integer(0);
        if (d == 1)
            continue;
        IntVector rep = snf.right_inverse.row(i);
        flipped.push_back(make_leading_positive(rep));
        kept.push_back(i);
        orders.push_back(d);
        names.push_back("[" + combination_name(ambient_names, rep) + "]");
    }
    IntMatrix proj(kept.size(), m);
    for (std::size_t a = 0; a < kept.size(); ++a)
        for (std::size_t c = 0; c < m; ++c)
            proj(a, c) = flipped[a] ? Integer(-snf.right(c, kept[a])) : snf.right(c, kept[a]);
    std::vector<IntVector> rel_rows;
    for (std::size_t i = 0; i < orders.size(); ++i)
        if (orders[i] != 0) {
            IntVector row(orders.size());
            row[i] = orders[i];
            rel_rows.push_back(std::move(row));
        }
    return {PresentedGroup::make(std::move(names), IntMatrix::from_rows(rel_rows, orders.size()), loc),
            std::move(proj)};
}

// Rows generating the preimage lattice of the kernel of f in domain coordinates.
inline IntMatrix kernel_generators(const GroupHom& f) {
    const std::size_t n = f.domain().generator_count();
    const IntMatrix& rb = f.codomain().model_relations();
    IntMatrix stacked = f.matrix().transpose();
    if (stacked.rows() == 0)
        stacked = IntMatrix(0, f.codomain().generator_count());
    stacked = stacked.stacked(rb);
    if (stacked.cols() == 0)
        return IntMatrix::identity(n);
    return left_kernel(stacked).column_block(0, n);
}

} // namespace detail

/// Kernel as a subgroup, with its inclusion into the domain.
inline GroupHom kernel_inclusion(const GroupHom& f) {
    const auto& a = f.domain();
    auto r = detail::subgroup(detail::kernel_generators(f), a.model_relations(), a.names(), a.locality());
    return GroupHom::make(r.group, a, r.link.transpose());
}

inline GroupHom image_inclusion(const GroupHom& f) {
    const auto& b = f.codomain();
    auto r = detail::subgroup(f.matrix().transpose(), b.model_relations(), b.names(), b.locality());
    return GroupHom::make(r.group, b, r.link.transpose());
}

inline GroupHom cokernel_projection(const GroupHom& f) {
    const auto& b = f.codomain();
    IntMatrix rel = b.model_relations().stacked(f.matrix().transpose());
    auto r = detail::quotient(rel, b.names(), b.locality());
    return GroupHom::make(b, r.group, std::move(r.link));
}

inline PresentedGroup kernel(const GroupHom& f) { return kernel_inclusion(f).domain(); }
inline PresentedGroup image(const GroupHom& f) { return image_inclusion(f).domain(); }
inline PresentedGroup cokernel(const GroupHom& f) { return cokernel_projection(f).codomain(); }

struct ExactFragment {
    std::vector<PresentedGroup> terms;
    std::vector<GroupHom> maps;
};

struct JunctionVerdict {
    std::size_t term = 0;
    bool composite_zero = false;
    bool kernel_in_image = false;
    CanonicalGroup image;
    CanonicalGroup kernel;
    std::string detail;

    bool ok() const { return composite_zero && kernel_in_image; }
};

struct ExactnessReport {
    std::vector<JunctionVerdict> junctions;
    bool order_checked = false;
    bool order_ok = true;
    std::string structure_error;
    std::string order_detail;

    bool exact() const {
        if (!structure_error.empty() || !order_ok)
            return false;
        for (const auto& j : junctions)
            if (!j.ok())
                return false;
        return true;
    }
};

/// im(maps[i-1]) == ker(maps[i]) at every interior term, by double inclusion.
inline ExactnessReport check_exact(const ExactFragment& frag) {
    ExactnessReport report;
    if (frag.maps.size() + 1 != frag.terms.size()) {
        report.structure_error = "fragment needs one more term than maps";
        return report;
    }
    for (std::size_t i = 0; i < frag.maps.size(); ++i)
        if (!(frag.maps[i].domain() == frag.terms[i]) || !(frag.maps[i].codomain() == frag.terms[i + 1])) {
            report.structure_error = "map " + std::to_string(i) + " does not connect terms " + std::to_string(i) +
                                     " and " + std::to_string(i + 1);
            return report;
        }

    for (std::size_t t = 1; t + 1 < frag.terms.size(); ++t) {
        const GroupHom& in = frag.maps[t - 1];
        const GroupHom& out = frag.maps[t];
        const PresentedGroup& b = frag.terms[t];
        JunctionVerdict v;
        v.term = t;

        IntMatrix comp = out.matrix() * in.matrix();
        v.composite_zero = true;
        for (std::size_t j = 0; j < comp.cols(); ++j)
            if (!frag.terms[t + 1].is_zero(comp.column(j))) {
                v.composite_zero = false;
                v.detail = "composite is nonzero on " + in.domain().names()[j];
                break;
            }

        // ker / (ker ∩ im) is computed as the image of the kernel in B / im.
        IntMatrix ker_gens = detail::kernel_generators(out);
        IntMatrix enlarged = b.model_relations().stacked(in.matrix().transpose());
        auto residue = detail::subgroup(ker_gens, enlarged, b.names(), b.locality());
        v.kernel_in_image = residue.group.canonical().is_trivial();
        if (!v.kernel_in_image && v.detail.empty())
            v.detail = "kernel exceeds image by " + to_descriptor(residue.group.canonical());
        v.image = image(in).canonical();
        v.kernel = kernel(out).canonical();
        report.junctions.push_back(std::move(v));
    }

    if (frag.terms.size() == 5 && frag.terms.front().canonical().is_trivial() &&
        frag.terms.back().canonical().is_trivial()) {
        GroupOrder a = order(frag.terms[1].canonical());
        GroupOrder b = order(frag.terms[2].canonical());
        GroupOrder c = order(frag.terms[3].canonical());
        if (!a.infinite && !b.infinite && !c.infinite) {
            report.order_checked = true;
            report.order_ok = b.value == a.value * c.value;
            std::ostringstream os;
            os << "|B| = " << b.value << ", |A|·|C| = " << a.value * c.value;
            report.order_detail = os.str();
        }
    }
    return report;
}

} // namespace hl
