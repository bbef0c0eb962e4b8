#pragma once

#include "homotopy_ledger/canonical_group.hpp"
#include "homotopy_ledger/presented_group.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace hl {

/// Malformed JSON or schema mismatch; the message carries the file and position.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A table entry violating a structural invariant; the message names the key.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A (space, degree) or expected-result key that is not in the store.
struct MissingEntry : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TableGenerator {
    std::string name;
    std::optional<Integer> order; // nullopt = infinite order
    std::optional<Prime> prime;

    bool operator==(const TableGenerator&) const = default;
};

struct TableRelation {
    std::string lhs;
    std::string rhs;
    std::string cite;

    bool operator==(const TableRelation&) const = default;
};

struct TableEntry {
    std::string space;
    int degree = 0;
    CanonicalGroup group;
    std::vector<TableGenerator> generators;
    std::vector<TableRelation> relations;
    std::string cite;

    std::string key() const { return space + " n=" + std::to_string(degree); }
    bool operator==(const TableEntry&) const = default;
};

struct Table {
    std::string space;
    /// Primes whose components are fully named by the generators of every entry.
    std::vector<Prime> generator_primes;
    std::string cite;
    std::map<int, TableEntry> entries;

    bool operator==(const Table&) const = default;
};

/// An expected result: a self-map group row, or a row of the localized component tables.
struct ExpectedRow {
    std::string theorem;
    std::string space;
    int n = 0;
    CanonicalGroup group;
    std::map<Prime, CanonicalGroup> primary_parts;
    std::vector<TableGenerator> generators;
    std::vector<Prime> generator_primes;
    std::string cite;

    std::string key() const { return "theorem " + theorem + " " + space + " n=" + std::to_string(n); }
    bool operator==(const ExpectedRow&) const = default;
};

/// Odd-primary splitting of a space into spheres: the groups [Σⁿ X, X] away from
/// local_primes are sums of π_{d+n}(S^s) over cells d and sphere factors s.
struct Splitting {
    std::string space;
    std::vector<Prime> local_primes;
    std::vector<int> spheres;
    std::vector<int> cells;

    bool operator==(const Splitting&) const = default;
};

struct Finding {
    std::string key;
    std::string message;
};

class TableStore {
public:
    std::map<std::string, Table> tables;
    std::vector<ExpectedRow> expected;
    std::vector<Splitting> splittings;

    const TableEntry& lookup(const std::string& space, int n) const {
        auto t = tables.find(space);
        if (t == tables.end())
            throw MissingEntry("no table for space " + space + " (wanted n=" + std::to_string(n) + ")");
        auto e = t->second.entries.find(n);
        if (e == t->second.entries.end())
            throw MissingEntry("no entry " + space + " n=" + std::to_string(n));
        return e->second;
    }

    const Table& table(const std::string& space) const {
        auto t = tables.find(space);
        if (t == tables.end())
            throw MissingEntry("no table for space " + space);
        return t->second;
    }

    const ExpectedRow& expected_row(const std::string& theorem, const std::string& space, int n) const {
        for (const auto& r : expected)
            if (r.theorem == theorem && r.space == space && r.n == n)
                return r;
        throw MissingEntry("no expected result for theorem " + theorem + " " + space + " n=" + std::to_string(n));
    }

    const Splitting& splitting(const std::string& space) const {
        for (const auto& s : splittings)
            if (s.space == space)
                return s;
        throw MissingEntry("no splitting declared for " + space);
    }

    /// The entry localized at loc, presented on its named generators. Components at primes
    /// without names get placeholder generators "<space>:Z<q>#k".
    PresentedGroup presented(const std::string& space, int n, const Locality& loc = Locality::global()) const {
        const TableEntry& e = lookup(space, n);
        const CanonicalGroup g = localize(e.group, loc);
        std::vector<std::string> names;
        IntVector diag;
        std::size_t free_named = 0;
        for (const auto& gen : e.generators)
            if (!gen.order && free_named < g.free_rank()) {
                names.push_back(gen.name);
                diag.push_back(0);
                ++free_named;
            }
        for (std::size_t i = free_named; i < g.free_rank(); ++i) {
            names.push_back(space + ":Z#" + std::to_string(i + 1));
            diag.push_back(0);
        }
        const auto& named_primes = table(space).generator_primes;
        for (Prime p : g.primes()) {
            bool named = std::find(named_primes.begin(), named_primes.end(), p) != named_primes.end();
            if (named) {
                for (const auto& gen : e.generators)
                    if (gen.order && gen.prime == p) {
                        names.push_back(gen.name);
                        diag.push_back(*gen.order);
                    }
                continue;
            }
            std::map<std::string, int> seen;
            for (const auto& pp : g.torsion())
                if (pp.p == p) {
                    std::string base = space + ":Z" + pp.value().str();
                    names.push_back(base + "#" + std::to_string(++seen[base]));
                    diag.push_back(pp.value());
                }
        }
        IntMatrix rel = IntMatrix::diagonal(diag);
        return PresentedGroup::make(std::move(names), rel, loc);
    }
};

// ---------------------------------------------------------------------------------------
// JSON codec

namespace detail {

using nlohmann::json;

inline std::string where(const std::string& file, const json::json_pointer& ptr) {
    return file + ":" + (ptr.empty() ? std::string("/") : ptr.to_string());
}

template <class T>
T field(const json& j, const char* name, const std::string& file, const json::json_pointer& ptr) {
    if (!j.is_object() || !j.contains(name))
        throw ParseError(where(file, ptr) + ": missing field '" + name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const json::exception& ex) {
        throw ParseError(where(file, ptr / name) + ": " + ex.what());
    }
}

inline CanonicalGroup group_from_json(const json& j, const std::string& file, const json::json_pointer& ptr) {
    try {
        if (j.is_string())
            return parse_descriptor(j.get<std::string>());
        std::size_t free_rank = j.value("free_rank", std::size_t{0});
        std::vector<PrimePower> torsion;
        for (const auto& t : j.value("torsion", json::array())) {
            if (!t.is_array() || t.size() != 2)
                throw ParseError(where(file, ptr / "torsion") + ": torsion terms are [p, e] pairs");
            torsion.push_back({t[0].get<Prime>(), t[1].get<unsigned>()});
        }
        std::vector<Prime> primes = j.value("locality", std::vector<Prime>{});
        return CanonicalGroup::make(free_rank, std::move(torsion),
                                    primes.empty() ? Locality::global() : Locality::at(primes));
    } catch (const ParseError&) {
        throw;
    } catch (const json::exception& ex) {
        throw ParseError(where(file, ptr) + ": " + ex.what());
    } catch (const std::exception& ex) {
        throw ParseError(where(file, ptr) + ": " + ex.what());
    }
}

inline json group_to_json(const CanonicalGroup& g) {
    json j;
    j["free_rank"] = g.free_rank();
    json t = json::array();
    for (const auto& pp : g.torsion())
        t.push_back({pp.p, pp.e});
    j["torsion"] = t;
    if (!g.locality().is_global())
        j["locality"] = g.locality().primes();
    return j;
}

inline std::vector<TableGenerator> generators_from_json(const json& arr, const std::string& file,
                                                        const json::json_pointer& ptr) {
    std::vector<TableGenerator> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& g = arr[i];
        auto gp = ptr / i;
        TableGenerator gen;
        gen.name = field<std::string>(g, "name", file, gp);
        const json& ord = g.contains("order") ? g.at("order") : json();
        if (ord.is_string() && ord.get<std::string>() == "inf")
            gen.order = std::nullopt;
        else if (ord.is_number_integer() && ord.get<long long>() > 0)
            gen.order = Integer(ord.get<long long>());
        else
            throw ParseError(where(file, gp / "order") + ": order must be a positive integer or \"inf\"");
        if (g.contains("prime") && !g.at("prime").is_null()) {
            if (!g.at("prime").is_number_unsigned())
                throw ParseError(where(file, gp / "prime") + ": prime must be an integer or null");
            gen.prime = g.at("prime").get<Prime>();
        }
        out.push_back(std::move(gen));
    }
    return out;
}

inline json generators_to_json(const std::vector<TableGenerator>& gens) {
    json arr = json::array();
    for (const auto& g : gens) {
        json j;
        j["name"] = g.name;
        j["order"] = g.order ? json(static_cast<long long>(*g.order)) : json("inf");
        j["prime"] = g.prime ? json(*g.prime) : json(nullptr);
        arr.push_back(j);
    }
    return arr;
}

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(path.string() + ": cannot open");
    try {
        return json::parse(in);
    } catch (const json::parse_error& ex) {
        throw ParseError(path.string() + ": byte " + std::to_string(ex.byte) + ": " + ex.what());
    }
}

// Invariants every entry must satisfy; an empty result means the entry is sound.
inline std::vector<std::string> entry_violations(const TableEntry& e, const std::vector<Prime>& generator_primes) {
    std::vector<std::string> out;
    std::size_t infinite = 0;
    for (const auto& g : e.generators) {
        if (!g.order) {
            ++infinite;
            if (g.prime)
                out.push_back("generator '" + g.name + "' has infinite order but a component prime");
            continue;
        }
        if (!g.prime) {
            out.push_back("generator '" + g.name + "' of finite order needs a component prime");
            continue;
        }
        auto f = factorize(*g.order);
        if (f.size() != 1 || f[0].p != *g.prime) {
            out.push_back("generator '" + g.name + "' order " + g.order->str() + " is not a power of " +
                          std::to_string(*g.prime));
            continue;
        }
        Integer exp = p_component(e.group, *g.prime).exponent();
        if (exp % *g.order != 0)
            out.push_back("generator '" + g.name + "' order " + g.order->str() + " does not divide the exponent " +
                          exp.str() + " of its " + std::to_string(*g.prime) + "-component");
    }
    if (infinite > e.group.free_rank())
        out.push_back(std::to_string(infinite) + " generators of infinite order exceed free rank " +
                      std::to_string(e.group.free_rank()));
    else if (infinite > 0 && infinite != e.group.free_rank())
        out.push_back("free part only partly named");
    for (Prime p : generator_primes) {
        std::vector<PrimePower> named;
        for (const auto& g : e.generators)
            if (g.order && g.prime == p)
                named.push_back(factorize(*g.order).front());
        CanonicalGroup sum = CanonicalGroup::make(0, named, Locality::at({p}));
        CanonicalGroup component = p_component(e.group, p);
        if (sum != component)
            out.push_back("named " + std::to_string(p) + "-generators span " + to_descriptor(sum) + " but the " +
                          std::to_string(p) + "-component is " + to_descriptor(component));
    }
    return out;
}

} // namespace detail

inline TableEntry parse_entry(const nlohmann::json& j, const std::string& space, const std::string& default_cite,
                              const std::string& file, const nlohmann::json::json_pointer& ptr) {
    TableEntry e;
    e.space = space;
    e.degree = detail::field<int>(j, "n", file, ptr);
    e.group = detail::group_from_json(j, file, ptr);
    e.generators =
        detail::generators_from_json(j.value("generators", nlohmann::json::array()), file, ptr / "generators");
    const auto rels = j.value("relations", nlohmann::json::array());
    for (std::size_t i = 0; i < rels.size(); ++i)
        e.relations.push_back({detail::field<std::string>(rels[i], "lhs", file, ptr / "relations" / i),
                               detail::field<std::string>(rels[i], "rhs", file, ptr / "relations" / i),
                               rels[i].value("cite", std::string())});
    e.cite = j.value("cite", default_cite);
    return e;
}

/// Parses one table document. Structural problems (duplicate degrees or generator names)
/// always throw; with strict set, entry invariants throw too instead of waiting for
/// validate_store.
inline Table parse_table(const nlohmann::json& j, const std::string& file, bool strict = true) {
    using nlohmann::json;
    Table t;
    json::json_pointer root;
    t.space = detail::field<std::string>(j, "space", file, root);
    t.cite = j.value("cite", std::string());
    t.generator_primes = j.value("generator_primes", std::vector<Prime>{});
    const json entries = detail::field<json>(j, "entries", file, root);
    if (!entries.is_array())
        throw ParseError(detail::where(file, root / "entries") + ": entries must be an array");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        TableEntry e = parse_entry(entries[i], t.space, t.cite, file, root / "entries" / i);
        std::set<std::string> names;
        for (const auto& g : e.generators)
            if (!names.insert(g.name).second)
                throw ValidationError(e.key() + ": duplicate generator name '" + g.name + "'");
        if (strict) {
            auto v = detail::entry_violations(e, t.generator_primes);
            if (!v.empty())
                throw ValidationError(e.key() + ": " + v.front());
        }
        int n = e.degree;
        if (!t.entries.emplace(n, std::move(e)).second)
            throw ValidationError(t.space + " n=" + std::to_string(n) + ": duplicate degree");
    }
    return t;
}

inline nlohmann::json table_to_json(const Table& t) {
    using nlohmann::json;
    json j;
    j["space"] = t.space;
    j["cite"] = t.cite;
    j["generator_primes"] = t.generator_primes;
    json entries = json::array();
    for (const auto& [n, e] : t.entries) {
        json je = detail::group_to_json(e.group);
        je["n"] = n;
        je["generators"] = detail::generators_to_json(e.generators);
        json rels = json::array();
        for (const auto& r : e.relations)
            rels.push_back({{"lhs", r.lhs}, {"rhs", r.rhs}, {"cite", r.cite}});
        je["relations"] = rels;
        je["cite"] = e.cite;
        entries.push_back(je);
    }
    j["entries"] = entries;
    return j;
}

inline void parse_expected(const nlohmann::json& j, const std::string& file, TableStore& store) {
    using nlohmann::json;
    json::json_pointer root;
    const json results = detail::field<json>(j, "results", file, root);
    for (std::size_t i = 0; i < results.size(); ++i) {
        const json& r = results[i];
        auto ptr = root / "results" / i;
        ExpectedRow row;
        row.theorem = detail::field<std::string>(r, "theorem", file, ptr);
        row.space = detail::field<std::string>(r, "space", file, ptr);
        row.n = detail::field<int>(r, "n", file, ptr);
        if (!r.contains("group"))
            throw ParseError(detail::where(file, ptr) + ": missing field 'group'");
        row.group = detail::group_from_json(r.at("group"), file, ptr / "group");
        const json parts = r.value("primary_parts", json::object());
        for (const auto& [key, part] : parts.items()) {
            Prime p = 0;
            try {
                p = std::stoull(key);
            } catch (const std::exception&) {
                throw ParseError(detail::where(file, ptr / "primary_parts") + ": key '" + key + "' is not a prime");
            }
            row.primary_parts[p] = detail::group_from_json(part, file, ptr / "primary_parts" / key);
        }
        row.generators = detail::generators_from_json(r.value("generators", json::array()), file, ptr / "generators");
        row.generator_primes = r.value("generator_primes", std::vector<Prime>{});
        row.cite = r.value("cite", std::string());
        for (const auto& other : store.expected)
            if (other.theorem == row.theorem && other.space == row.space && other.n == row.n)
                throw ValidationError(row.key() + ": duplicate expected result");
        store.expected.push_back(std::move(row));
    }
    const json splits = j.value("splittings", json::array());
    for (std::size_t i = 0; i < splits.size(); ++i) {
        auto ptr = root / "splittings" / i;
        store.splittings.push_back({detail::field<std::string>(splits[i], "space", file, ptr),
                                    detail::field<std::vector<Prime>>(splits[i], "local_primes", file, ptr),
                                    detail::field<std::vector<int>>(splits[i], "spheres", file, ptr),
                                    detail::field<std::vector<int>>(splits[i], "cells", file, ptr)});
    }
}

inline nlohmann::json expected_to_json(const TableStore& store) {
    using nlohmann::json;
    json results = json::array();
    for (const auto& r : store.expected) {
        json j;
        j["theorem"] = r.theorem;
        j["space"] = r.space;
        j["n"] = r.n;
        j["group"] = detail::group_to_json(r.group);
        json parts = json::object();
        for (const auto& [p, g] : r.primary_parts)
            parts[std::to_string(p)] = detail::group_to_json(g);
        j["primary_parts"] = parts;
        j["generators"] = detail::generators_to_json(r.generators);
        j["generator_primes"] = r.generator_primes;
        j["cite"] = r.cite;
        results.push_back(j);
    }
    json splits = json::array();
    for (const auto& s : store.splittings)
        splits.push_back(
            {{"space", s.space}, {"local_primes", s.local_primes}, {"spheres", s.spheres}, {"cells", s.cells}});
    return {{"results", results}, {"splittings", splits}};
}

/// Loads every *.json file in dir: documents with "space" are tables, documents with
/// "results" hold expected results and sphere splittings.
inline TableStore load_tables(const std::filesystem::path& dir, bool strict = true) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw ParseError(dir.string() + ": not a directory");
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(dir))
        if (f.path().extension() == ".json")
            files.push_back(f.path());
    std::sort(files.begin(), files.end());
    TableStore store;
    for (const auto& f : files) {
        nlohmann::json j = detail::read_json_file(f);
        if (j.is_object() && j.contains("results")) {
            parse_expected(j, f.string(), store);
            continue;
        }
        Table t = parse_table(j, f.string(), strict);
        std::string space = t.space;
        if (!store.tables.emplace(space, std::move(t)).second)
            throw ValidationError(space + ": table defined twice (" + f.string() + ")");
    }
    return store;
}

/// Writes the store back as one JSON document per table plus expected.json.
inline void save_tables(const TableStore& store, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& [space, t] : store.tables) {
        std::string file;
        for (char c : space)
            if (std::isalnum(static_cast<unsigned char>(c)))
                file += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        std::ofstream(dir / (file + ".json")) << table_to_json(t).dump(2) << "\n";
    }
    std::ofstream(dir / "expected.json") << expected_to_json(store).dump(2) << "\n";
}

/// ⊕ over cells d and spheres s of π_{d+n}(S^s), restricted to primes outside the local set.
inline CanonicalGroup sphere_product_part(const TableStore& store, const Splitting& s, int n) {
    std::vector<CanonicalGroup> parts;
    for (int d : s.cells)
        for (int dim : s.spheres) {
            const CanonicalGroup& g = store.lookup("S" + std::to_string(dim), d + n).group;
            std::vector<PrimePower> kept;
            for (const auto& pp : g.torsion())
                if (std::find(s.local_primes.begin(), s.local_primes.end(), pp.p) == s.local_primes.end())
                    kept.push_back(pp);
            parts.push_back(CanonicalGroup::make(g.free_rank(), kept));
        }
    return direct_sum(parts);
}

/// Part of g at primes outside the given set, with the free rank kept.
inline CanonicalGroup away_from(const CanonicalGroup& g, const std::vector<Prime>& primes) {
    std::vector<PrimePower> kept;
    for (const auto& pp : g.torsion())
        if (std::find(primes.begin(), primes.end(), pp.p) == primes.end())
            kept.push_back(pp);
    return CanonicalGroup::make(g.free_rank(), kept);
}

/// Cross-checks the store. Missing sphere entries needed by a splitting propagate as
/// MissingEntry, since they mean the transcription is incomplete.
inline std::vector<Finding> validate_store(const TableStore& store) {
    std::vector<Finding> out;
    for (const auto& [space, t] : store.tables)
        for (const auto& [n, e] : t.entries)
            for (auto& msg : detail::entry_violations(e, t.generator_primes))
                out.push_back({e.key(), std::move(msg)});

    for (const auto& row : store.expected) {
        if (!row.primary_parts.empty()) {
            std::vector<CanonicalGroup> parts{CanonicalGroup::free(row.group.free_rank())};
            for (const auto& [p, part] : row.primary_parts) {
                if (part.free_rank() != 0 || part.primes() != std::vector<Prime>{p})
                    out.push_back({row.key(), "declared " + std::to_string(p) + "-primary part " + to_descriptor(part) +
                                                  " is not a " + std::to_string(p) + "-group"});
                parts.push_back(part.with_locality(Locality::global()));
            }
            CanonicalGroup sum = direct_sum(parts).with_locality(row.group.locality());
            if (sum != row.group)
                out.push_back({row.key(), "primary parts recombine to " + to_descriptor(sum) + ", row says " +
                                              to_descriptor(row.group)});
        }
        if (!row.generators.empty()) {
            TableEntry as_entry{row.space, row.n, row.group, row.generators, {}, row.cite};
            for (auto& msg : detail::entry_violations(as_entry, row.generator_primes))
                out.push_back({row.key(), std::move(msg)});
        }
    }

    for (const auto& row : store.expected) {
        if (row.theorem != "1")
            continue;
        for (const auto& s : store.splittings) {
            if (s.space != row.space)
                continue;
            CanonicalGroup spheres = sphere_product_part(store, s, row.n);
            CanonicalGroup away = away_from(row.group, s.local_primes);
            if (spheres != away)
                out.push_back({row.key(), "part away from " + Locality::at(s.local_primes).to_string() + " is " +
                                              to_descriptor(away) + " but the sphere product gives " +
                                              to_descriptor(spheres)});
        }
        for (const auto& other : store.expected) {
            if (other.space != row.space || other.n != row.n || other.theorem == "1")
                continue;
            if (other.group.locality().is_global())
                continue;
            CanonicalGroup local = localize(row.group, other.group.locality());
            if (local != other.group)
                out.push_back({other.key(), "theorem 1 row localizes to " + to_descriptor(local) + ", table says " +
                                                to_descriptor(other.group)});
        }
    }
    return out;
}

} // namespace hl
