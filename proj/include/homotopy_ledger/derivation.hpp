#pragma once

#include "homotopy_ledger/extension.hpp"
#include "homotopy_ledger/presented_group.hpp"
#include "homotopy_ledger/tables.hpp"

#include "json.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace hl {

/// A step refers to an id that no earlier step defines.
struct DanglingReference : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The step reference graph has a cycle.
struct CyclicReference : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StepFailure : std::runtime_error {
    StepFailure(std::string step_id, std::string what)
        : std::runtime_error("step '" + step_id + "': " + what), step(std::move(step_id)), detail(std::move(what)) {}
    std::string step;
    std::string detail;
};

inline const std::set<std::string>& step_kinds() {
    static const std::set<std::string> kinds{"DefineGroup", "DefineMap",  "Kernel",         "Cokernel",
                                             "Image",       "CheckExact", "SesResolve",     "SplitSum",
                                             "LocalizeAssemble", "Axiom", "Assert"};
    return kinds;
}

struct Step {
    std::string id;
    std::string kind;
    std::string cite;
    nlohmann::json spec;
    std::vector<std::string> refs;
};

/// Final comparison of a step's group against an expected result, or a literal group.
struct FinalAssert {
    std::string theorem;
    std::string space;
    int n = 0;
    std::string from;
    std::optional<CanonicalGroup> expect;
};

struct DerivationScript {
    std::string name;
    std::string description;
    std::vector<Step> steps;
    std::vector<FinalAssert> asserts;
};

namespace detail {

inline void collect_refs(const nlohmann::json& spec, const char* key, std::vector<std::string>& out) {
    if (!spec.contains(key))
        return;
    const auto& v = spec.at(key);
    auto base = [](const std::string& s) { return s.substr(0, s.find('.')); };
    if (v.is_string())
        out.push_back(base(v.get<std::string>()));
    else if (v.is_array())
        for (const auto& x : v)
            if (x.is_string())
                out.push_back(base(x.get<std::string>()));
}

inline std::vector<std::string> step_refs(const nlohmann::json& s) {
    std::vector<std::string> out;
    for (const char* key : {"requires", "from", "to", "map", "maps", "into", "zero_by", "sub", "quotient", "bracket",
                            "local", "target", "selected_by"})
        collect_refs(s, key, out);
    for (const auto& w : s.value("witnesses", nlohmann::json::array())) {
        collect_refs(w, "axiom", out);
        collect_refs(w, "expect_step", out);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace detail

/// Parses and reference-checks a script document.
inline DerivationScript parse_script(const nlohmann::json& j, const std::string& file) {
    using nlohmann::json;
    json::json_pointer root;
    DerivationScript script;
    script.name = detail::field<std::string>(j, "name", file, root);
    script.description = j.value("description", std::string());
    const json steps = detail::field<json>(j, "steps", file, root);
    if (!steps.is_array())
        throw ParseError(detail::where(file, root / "steps") + ": steps must be an array");

    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        auto ptr = root / "steps" / i;
        Step s;
        s.id = detail::field<std::string>(steps[i], "id", file, ptr);
        s.kind = detail::field<std::string>(steps[i], "kind", file, ptr);
        s.cite = detail::field<std::string>(steps[i], "cite", file, ptr);
        if (!step_kinds().count(s.kind))
            throw ParseError(detail::where(file, ptr / "kind") + ": unknown step kind '" + s.kind + "'");
        if (s.id.find('.') != std::string::npos)
            throw ParseError(detail::where(file, ptr / "id") + ": step ids may not contain '.'");
        if (!position.emplace(s.id, i).second)
            throw ParseError(detail::where(file, ptr / "id") + ": duplicate step id '" + s.id + "'");
        s.spec = steps[i];
        s.refs = detail::step_refs(steps[i]);
        script.steps.push_back(std::move(s));
    }

    // Unknown ids are dangling; a reference to the step itself or a later one is either
    // part of a cycle or a forward reference, and both are rejected.
    for (const auto& s : script.steps)
        for (const auto& r : s.refs)
            if (!position.count(r))
                throw DanglingReference(file + ": step '" + s.id + "' refers to unknown id '" + r + "'");
    std::map<std::string, int> state;
    std::vector<std::string> path;
    std::function<void(const std::string&)> visit = [&](const std::string& id) {
        state[id] = 1;
        path.push_back(id);
        for (const auto& r : script.steps[position[id]].refs) {
            if (state[r] == 1) {
                std::string cycle;
                for (auto it = std::find(path.begin(), path.end(), r); it != path.end(); ++it)
                    cycle += *it + " -> ";
                throw CyclicReference(file + ": reference cycle " + cycle + r);
            }
            if (state[r] == 0)
                visit(r);
        }
        path.pop_back();
        state[id] = 2;
    };
    for (const auto& s : script.steps)
        if (state[s.id] == 0)
            visit(s.id);
    for (const auto& s : script.steps)
        for (const auto& r : s.refs)
            if (position[r] >= position[s.id])
                throw DanglingReference(file + ": step '" + s.id + "' refers to '" + r + "', which is defined later");

    const json asserts = j.value("asserts", json::array());
    bool any_assert = false;
    for (const auto& s : script.steps)
        any_assert = any_assert || s.kind == "Assert";
    for (std::size_t i = 0; i < asserts.size(); ++i) {
        auto ptr = root / "asserts" / i;
        FinalAssert a;
        a.space = detail::field<std::string>(asserts[i], "space", file, ptr);
        a.n = detail::field<int>(asserts[i], "n", file, ptr);
        a.from = detail::field<std::string>(asserts[i], "from", file, ptr);
        a.theorem = asserts[i].value("theorem", std::string());
        if (asserts[i].contains("expect"))
            a.expect = detail::group_from_json(asserts[i].at("expect"), file, ptr / "expect");
        if (a.theorem.empty() && !a.expect)
            throw ParseError(detail::where(file, ptr) + ": an assert needs a theorem key or an expect group");
        if (!position.count(a.from))
            throw DanglingReference(file + ": assert on " + a.space + " n=" + std::to_string(a.n) +
                                    " refers to unknown step '" + a.from + "'");
        script.asserts.push_back(std::move(a));
        any_assert = true;
    }
    if (!any_assert)
        throw ParseError(file + ": a script needs at least one assert");
    return script;
}

inline DerivationScript load_script(const std::filesystem::path& path) {
    return parse_script(detail::read_json_file(path), path.string());
}

/// Scripts in dir whose file stem matches the glob, sorted by name.
inline std::vector<DerivationScript> load_scripts(const std::filesystem::path& dir, const std::string& glob = "*") {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw ParseError(dir.string() + ": not a directory");
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(dir))
        if (f.path().extension() == ".json" && fnmatch(glob.c_str(), f.path().stem().string().c_str(), 0) == 0)
            files.push_back(f.path());
    std::sort(files.begin(), files.end());
    std::vector<DerivationScript> out;
    for (const auto& f : files)
        out.push_back(load_script(f));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return out;
}

// ---------------------------------------------------------------------------------------
// Reports

struct StepReport {
    std::string id;
    std::string kind;
    std::string cite;
    bool ok = false;
    std::optional<CanonicalGroup> group;
    std::vector<std::string> trace;
    std::vector<std::string> requires_;
    std::vector<std::string> witnesses;
};

struct AxiomRecord {
    std::string id;
    std::string statement;
    std::string cite;
    bool external = true;
};

struct Comparison {
    std::string label;
    std::string theorem;
    std::string space;
    int n = 0;
    std::string from;
    std::optional<CanonicalGroup> expected;
    std::optional<CanonicalGroup> computed;
    bool ok = false;
};

struct DerivationReport {
    std::string script;
    std::vector<StepReport> steps;
    std::vector<AxiomRecord> axioms;
    std::vector<Comparison> comparisons;
    std::optional<StepFailure> failure;

    bool passed() const {
        if (failure)
            return false;
        for (const auto& s : steps)
            if (!s.ok)
                return false;
        for (const auto& c : comparisons)
            if (!c.ok)
                return false;
        return true;
    }
};

struct RunOptions {
    std::uint64_t bound = default_enumeration_bound;
};

namespace detail {

struct Value {
    std::optional<PresentedGroup> presented;
    std::optional<CanonicalGroup> group;
    std::optional<GroupHom> map;
    std::optional<AxiomRecord> axiom;
};

inline std::string show(const PresentedGroup& g) {
    std::ostringstream os;
    os << g;
    return os.str();
}

class Runner {
public:
    Runner(const TableStore& store, RunOptions opt) : store_(store), opt_(opt) {}

    DerivationReport run(const DerivationScript& script) {
        DerivationReport report;
        report.script = script.name;
        for (const auto& step : script.steps) {
            StepReport sr{step.id, step.kind, step.cite, false, std::nullopt, {}, {}, {}};
            sr.requires_ = step.spec.value("requires", std::vector<std::string>{});
            current_ = &sr;
            try {
                execute(step, sr);
                auto it = env_.find(step.id);
                if (it != env_.end() && it->second.group)
                    sr.group = it->second.group;
                if (step.kind != "Assert")
                    sr.ok = true;
                report.steps.push_back(sr);
                if (step.kind == "Axiom")
                    report.axioms.push_back(*env_.at(step.id).axiom);
            } catch (const StepFailure& f) {
                sr.trace.push_back("FAILED: " + f.detail);
                report.steps.push_back(sr);
                report.failure = f;
                return report;
            } catch (const std::exception& ex) {
                sr.trace.push_back(std::string("FAILED: ") + ex.what());
                report.steps.push_back(sr);
                report.failure = StepFailure(step.id, ex.what());
                return report;
            }
        }
        for (const auto& a : script.asserts) {
            Comparison c;
            c.theorem = a.theorem;
            c.space = a.space;
            c.n = a.n;
            c.from = a.from;
            c.label = (a.theorem.empty() ? std::string("literal") : "theorem " + a.theorem) + " " + a.space +
                      " n=" + std::to_string(a.n);
            try {
                c.expected = a.expect ? *a.expect : store_.expected_row(a.theorem, a.space, a.n).group;
            } catch (const MissingEntry&) {
            }
            const auto& v = env_.at(a.from);
            c.computed = v.group;
            c.ok = c.expected && c.computed && *c.expected == *c.computed;
            report.comparisons.push_back(std::move(c));
        }
        return report;
    }

private:
    void note(std::string line) { current_->trace.push_back(std::move(line)); }

    [[noreturn]] void fail(const Step& s, const std::string& what) { throw StepFailure(s.id, what); }

    const Value& lookup(const Step& s, const std::string& ref) {
        auto it = env_.find(ref);
        if (it == env_.end())
            fail(s, "no value named '" + ref + "'");
        return it->second;
    }

    const PresentedGroup& presented(const Step& s, const std::string& ref) {
        const Value& v = lookup(s, ref);
        if (!v.presented)
            fail(s, "'" + ref + "' is not a presented group");
        return *v.presented;
    }

    const CanonicalGroup& group(const Step& s, const std::string& ref) {
        const Value& v = lookup(s, ref);
        if (!v.group)
            fail(s, "'" + ref + "' is not a group");
        return *v.group;
    }

    const GroupHom& hom(const Step& s, const std::string& ref) {
        const Value& v = lookup(s, ref);
        if (!v.map)
            fail(s, "'" + ref + "' is not a map");
        return *v.map;
    }

    const AxiomRecord& axiom(const Step& s, const std::string& ref) {
        const Value& v = lookup(s, ref);
        if (!v.axiom)
            fail(s, "'" + ref + "' is not an axiom");
        return *v.axiom;
    }

    std::string str(const Step& s, const char* key) {
        if (!s.spec.contains(key) || !s.spec.at(key).is_string())
            fail(s, std::string("missing string field '") + key + "'");
        return s.spec.at(key).get<std::string>();
    }

    Locality locality_field(const Step& s, const char* key) {
        auto primes = s.spec.value(key, std::vector<Prime>{});
        return primes.empty() ? Locality::global() : Locality::at(primes);
    }

    void put_group(const std::string& id, PresentedGroup g) {
        Value v;
        v.group = g.canonical();
        v.presented = std::move(g);
        env_[id] = std::move(v);
    }

    void put_map(const std::string& id, GroupHom f) {
        Value v;
        v.map = std::move(f);
        env_[id] = std::move(v);
    }

    void check_requires(const Step& s) {
        for (const auto& r : s.spec.value("requires", std::vector<std::string>{})) {
            const Value& v = lookup(s, r);
            if (v.axiom)
                note("uses axiom " + r + ": " + v.axiom->statement);
        }
    }

    void execute(const Step& s, StepReport& sr) {
        check_requires(s);
        if (s.kind == "Axiom")
            return do_axiom(s);
        if (s.kind == "DefineGroup")
            return do_define_group(s);
        if (s.kind == "DefineMap")
            return do_define_map(s);
        if (s.kind == "Kernel" || s.kind == "Cokernel" || s.kind == "Image")
            return do_derived_group(s);
        if (s.kind == "CheckExact")
            return do_check_exact(s);
        if (s.kind == "SesResolve")
            return do_ses(s, sr);
        if (s.kind == "SplitSum")
            return do_split_sum(s);
        if (s.kind == "LocalizeAssemble")
            return do_assemble(s);
        if (s.kind == "Assert")
            return do_assert(s, sr);
        fail(s, "unknown kind " + s.kind);
    }

    void do_axiom(const Step& s) {
        Value v;
        v.axiom = AxiomRecord{s.id, str(s, "statement"), s.cite, s.spec.value("external", true)};
        note("axiom: " + v.axiom->statement + (v.axiom->external ? " [external]" : ""));
        env_[s.id] = std::move(v);
    }

    void do_define_group(const Step& s) {
        Locality loc = locality_field(s, "localize");
        if (s.spec.contains("table")) {
            const auto& t = s.spec.at("table");
            std::string space = t.at("space").get<std::string>();
            int n = t.at("n").get<int>();
            PresentedGroup g = store_.presented(space, n, loc);
            if (s.spec.contains("names")) {
                // Renames placeholder generators, e.g. the sphere generators of Toda's tables.
                std::vector<std::string> names = g.names();
                for (const auto& [from, to] : s.spec.at("names").items()) {
                    auto it = std::find(names.begin(), names.end(), from);
                    if (it == names.end())
                        fail(s, "no generator '" + from + "' to rename in " + show(g));
                    *it = to.get<std::string>();
                }
                g = PresentedGroup::make(std::move(names), g.relations(), g.locality());
            }
            note("π_" + std::to_string(n) + "(" + space + ")" + (loc.is_global() ? "" : " at " + loc.to_string()) +
                 " = " + show(g));
            return put_group(s.id, std::move(g));
        }
        if (s.spec.contains("group")) {
            CanonicalGroup c = group_from_json(s.spec.at("group"), s.id, nlohmann::json::json_pointer());
            if (!loc.is_global())
                c = localize(c, loc);
            auto names = s.spec.value("generators", std::vector<std::string>{});
            if (names.empty())
                for (std::size_t i = 0; i < presentation_of(c).first; ++i)
                    names.push_back(s.id + "#" + std::to_string(i + 1));
            PresentedGroup g = PresentedGroup::from_canonical(c, names);
            note("literal group " + show(g));
            return put_group(s.id, std::move(g));
        }
        auto names = s.spec.value("generators", std::vector<std::string>{});
        auto rows = s.spec.value("relations", std::vector<std::vector<long long>>{});
        std::vector<IntVector> rel;
        for (const auto& r : rows)
            rel.push_back(IntVector(r.begin(), r.end()));
        PresentedGroup g = PresentedGroup::make(names, IntMatrix::from_rows(rel, names.size()), loc);
        note("presented group " + show(g));
        put_group(s.id, std::move(g));
    }

    IntMatrix images_matrix(const Step& s, const nlohmann::json& images, const PresentedGroup& dom,
                            const PresentedGroup& cod) {
        IntMatrix m(cod.generator_count(), dom.generator_count());
        for (const auto& [src, img] : images.items()) {
            std::size_t col = 0;
            try {
                col = dom.index_of(src);
            } catch (const std::exception&) {
                fail(s, "domain has no generator '" + src + "'");
            }
            auto set = [&](const std::string& name, long long k) {
                try {
                    m(cod.index_of(name), col) += k;
                } catch (const std::exception&) {
                    fail(s, "codomain has no generator '" + name + "'");
                }
            };
            if (img.is_string())
                set(img.get<std::string>(), 1);
            else if (img.is_object())
                for (const auto& [name, k] : img.items())
                    set(name, k.get<long long>());
            else if (!(img.is_number_integer() && img.get<long long>() == 0))
                fail(s, "image of '" + src + "' must be a generator name, a combination, or 0");
        }
        return m;
    }

    std::string describe_map(const GroupHom& f) {
        std::string out;
        for (std::size_t j = 0; j < f.domain().generator_count(); ++j) {
            IntVector col = f.matrix().column(j);
            out += (j ? ", " : "") + f.domain().names()[j] + " ↦ " +
                   (f.codomain().is_zero(col) ? std::string("0") : f.codomain().element_name(col));
        }
        return out.empty() ? "(no generators)" : out;
    }

    void do_define_map(const Step& s) {
        const PresentedGroup& dom = presented(s, str(s, "from"));
        const PresentedGroup& cod = presented(s, str(s, "to"));
        if (dom.locality() != cod.locality())
            fail(s, "locality " + dom.locality().to_string() + " of the domain differs from " +
                        cod.locality().to_string());
        const std::string name = s.spec.value("name", s.id);
        if (s.spec.value("forced", false)) {
            CanonicalGroup h = hom_group(dom.canonical(), cod.canonical());
            if (!h.is_trivial())
                fail(s, "map is not forced: Hom(" + to_descriptor(dom.canonical()) + ", " +
                            to_descriptor(cod.canonical()) + ") = " + to_descriptor(h));
            note(name + " = 0, forced since Hom(" + to_descriptor(dom.canonical()) + ", " +
                 to_descriptor(cod.canonical()) + ") = 0");
            return put_map(s.id, GroupHom::zero(dom, cod));
        }
        if (s.spec.contains("alternatives")) {
            const std::string chosen = str(s, "select");
            const std::string by = str(s, "selected_by");
            const AxiomRecord& ax = axiom(s, by);
            std::optional<GroupHom> picked;
            for (const auto& alt : s.spec.at("alternatives")) {
                std::string label = alt.at("label").get<std::string>();
                GroupHom f = GroupHom::make(dom, cod, images_matrix(s, alt.at("images"), dom, cod));
                note("alternative '" + label + "': " + describe_map(f));
                if (label == chosen)
                    picked = std::move(f);
            }
            if (!picked)
                fail(s, "selected alternative '" + chosen + "' is not listed");
            note("dichotomy resolved to '" + chosen + "' by " + by + ": " + ax.statement);
            return put_map(s.id, std::move(*picked));
        }
        IntMatrix m(cod.generator_count(), dom.generator_count());
        if (s.spec.contains("images"))
            m = images_matrix(s, s.spec.at("images"), dom, cod);
        else if (s.spec.contains("matrix")) {
            auto rows = s.spec.at("matrix").get<std::vector<std::vector<long long>>>();
            std::vector<IntVector> r;
            for (const auto& row : rows)
                r.push_back(IntVector(row.begin(), row.end()));
            m = IntMatrix::from_rows(r, dom.generator_count());
        }
        GroupHom f = GroupHom::make(dom, cod, m);
        note(name + ": " + describe_map(f));
        put_map(s.id, std::move(f));
    }

    void do_derived_group(const Step& s) {
        if (s.spec.contains("map")) {
            const GroupHom& f = hom(s, str(s, "map"));
            if (s.kind == "Kernel") {
                GroupHom inc = kernel_inclusion(f);
                note("kernel = " + show(inc.domain()));
                put_group(s.id, inc.domain());
                put_map(s.id + ".inclusion", std::move(inc));
            } else if (s.kind == "Image") {
                GroupHom inc = image_inclusion(f);
                note("image = " + show(inc.domain()));
                put_group(s.id, inc.domain());
                put_map(s.id + ".inclusion", std::move(inc));
            } else {
                GroupHom proj = cokernel_projection(f);
                note("cokernel = " + show(proj.codomain()));
                put_group(s.id, proj.codomain());
                put_map(s.id + ".projection", std::move(proj));
            }
            return;
        }
        // A map known to vanish by an axiom, with an unspecified other end.
        const std::string zero_by = str(s, "zero_by");
        const AxiomRecord& ax = axiom(s, zero_by);
        if (s.kind == "Kernel" && s.spec.contains("from")) {
            const PresentedGroup& g = presented(s, str(s, "from"));
            note("map out of " + to_descriptor(g.canonical()) + " vanishes by " + zero_by + " (" + ax.statement +
                 "), so the kernel is everything");
            put_group(s.id, g);
            put_map(s.id + ".inclusion", GroupHom::identity(g));
        } else if (s.kind == "Cokernel" && s.spec.contains("into")) {
            const PresentedGroup& g = presented(s, str(s, "into"));
            note("map into " + to_descriptor(g.canonical()) + " vanishes by " + zero_by + " (" + ax.statement +
                 "), so the cokernel is everything");
            put_group(s.id, g);
            put_map(s.id + ".projection", GroupHom::identity(g));
        } else {
            fail(s, s.kind + " needs 'map', or 'zero_by' with " + (s.kind == "Kernel" ? "'from'" : "'into'"));
        }
    }

    void do_check_exact(const Step& s) {
        ExactFragment frag;
        auto ids = s.spec.value("maps", std::vector<std::string>{});
        if (ids.empty())
            fail(s, "CheckExact needs maps");
        for (const auto& id : ids)
            frag.maps.push_back(hom(s, id));
        if (s.spec.value("zero_left", false)) {
            const auto& first = frag.maps.front().domain();
            frag.maps.insert(frag.maps.begin(),
                             GroupHom::zero(PresentedGroup::make({}, IntMatrix(0, 0), first.locality()), first));
        }
        if (s.spec.value("zero_right", false)) {
            const auto& last = frag.maps.back().codomain();
            frag.maps.push_back(GroupHom::zero(last, PresentedGroup::make({}, IntMatrix(0, 0), last.locality())));
        }
        frag.terms.push_back(frag.maps.front().domain());
        for (const auto& f : frag.maps)
            frag.terms.push_back(f.codomain());
        std::string row;
        for (std::size_t i = 0; i < frag.terms.size(); ++i)
            row += (i ? " → " : "") + to_descriptor(frag.terms[i].canonical());
        note("row " + row);
        ExactnessReport r = check_exact(frag);
        if (!r.structure_error.empty())
            fail(s, r.structure_error);
        for (const auto& j : r.junctions)
            if (!j.ok())
                fail(s, "not exact at term " + std::to_string(j.term) + ": " + j.detail);
        if (r.order_checked)
            note("order check " + r.order_detail + (r.order_ok ? "" : " FAILS"));
        if (!r.exact())
            fail(s, "order check failed: " + r.order_detail);
        note("exact at every interior term");
    }

    Witness witness_from(const Step& s, const nlohmann::json& w) {
        const std::string kind = w.at("kind").get<std::string>();
        Witness out;
        out.cite = w.value("cite", std::string());
        out.external = w.value("external", false);
        if (w.contains("axiom")) {
            const AxiomRecord& ax = axiom(s, w.at("axiom").get<std::string>());
            out.external = out.external || ax.external;
            if (out.cite.empty())
                out.cite = ax.id + ": " + ax.statement + " (" + ax.cite + ")";
        }
        if (kind == "ElementOrder") {
            ElementOrder k;
            k.order = w.at("order").get<std::uint64_t>();
            if (w.contains("image_order"))
                k.image_order = w.at("image_order").get<std::uint64_t>();
            if (w.contains("hits_sub_at"))
                k.hits_sub_at = w.at("hits_sub_at").get<std::uint64_t>();
            out.kind = k;
        } else if (kind == "Splits") {
            out.kind = Splits{};
        } else if (kind == "NonSplit") {
            out.kind = NonSplit{};
        } else if (kind == "CokernelShape") {
            CokernelShape k;
            if (w.contains("expect_step"))
                k.expect = group(s, w.at("expect_step").get<std::string>());
            else
                k.expect = group_from_json(w.at("expect"), s.id, nlohmann::json::json_pointer());
            k.multiple = w.value("multiple", std::uint64_t{1});
            out.kind = k;
        } else if (kind == "AxiomCitation") {
            if (!w.contains("axiom"))
                fail(s, "AxiomCitation witness needs an axiom");
            AxiomCitation k;
            k.text = w.at("axiom").get<std::string>();
            k.selects = group_from_json(w.at("selects"), s.id, nlohmann::json::json_pointer());
            out.kind = k;
            out.external = true;
        } else {
            fail(s, "unknown witness kind '" + kind + "'");
        }
        return out;
    }

    // A side known only through a bound ("quotient_of" or "subgroup_of" a computed group)
    // is determined only when that group is trivial.
    void check_bound(const Step& s, const char* side, const char* expected_bound) {
        const std::string key = std::string(side) + "_bound";
        if (!s.spec.contains(key))
            return;
        const std::string bound = s.spec.at(key).get<std::string>();
        if (bound != expected_bound)
            fail(s, key + " must be '" + expected_bound + "'");
        const std::string ref = str(s, side);
        if (!group(s, ref).is_trivial())
            fail(s, std::string("the ") + side + " is only known as a " + (bound == "quotient_of" ? "quotient" : "subgroup") +
                        " of " + to_descriptor(group(s, ref)) + ", which does not determine it");
        note(std::string(side) + " is a " + (bound == "quotient_of" ? "quotient" : "subgroup") + " of " + ref +
             " = 0, hence 0");
    }

    void do_ses(const Step& s, StepReport& sr) {
        ExtensionProblem p;
        check_bound(s, "sub", "quotient_of");
        check_bound(s, "quotient", "subgroup_of");
        p.sub = group(s, str(s, "sub"));
        p.quotient = group(s, str(s, "quotient"));
        for (const auto& w : s.spec.value("witnesses", nlohmann::json::array()))
            p.witnesses.push_back(witness_from(s, w));
        note("0 → " + to_descriptor(p.sub) + " → ? → " + to_descriptor(p.quotient) + " → 0");
        Resolution r;
        try {
            r = resolve(p, opt_.bound);
        } catch (const Ambiguous& ex) {
            fail(s, ex.what());
        } catch (const Contradiction& ex) {
            fail(s, ex.what());
        }
        std::string cands;
        for (const auto& c : r.candidates)
            cands += (cands.empty() ? "" : ", ") + to_descriptor(c);
        note("candidates: " + cands);
        for (const auto& f : r.filters) {
            std::string kept;
            for (const auto& c : f.kept)
                kept += (kept.empty() ? "" : ", ") + to_descriptor(c);
            note("witness " + f.witness + (f.external ? " [external]" : "") + (f.cite.empty() ? "" : ": " + f.cite) +
                 " keeps {" + kept + "}");
            sr.witnesses.push_back(f.witness);
        }
        if (r.filters.empty())
            for (const auto& w : p.witnesses)
                sr.witnesses.push_back(describe(w));
        GroupOrder a = order(p.sub), c = order(p.quotient), b = order(r.group);
        if (!a.infinite && !c.infinite && (b.infinite || b.value != a.value * c.value))
            fail(s, "conservation violated: |middle| = " + b.value.str() + " but |sub|·|quotient| = " +
                        Integer(a.value * c.value).str());
        if (s.spec.contains("order")) {
            Integer want = s.spec.at("order").get<long long>();
            if (b.infinite || b.value != want)
                fail(s, "expected order " + want.str() + ", got " + to_descriptor(r.group));
        }
        note("resolved: " + to_descriptor(r.group));
        Value v;
        v.group = r.group;
        // A degenerate sequence is an isomorphism, so the nontrivial side keeps its names.
        const Value& sub = lookup(s, str(s, "sub"));
        const Value& quot = lookup(s, str(s, "quotient"));
        if (p.quotient.is_trivial() && sub.presented)
            v.presented = sub.presented;
        else if (p.sub.is_trivial() && quot.presented)
            v.presented = quot.presented;
        env_[s.id] = std::move(v);
    }

    void do_split_sum(const Step& s) {
        const auto& top = s.spec.at("top");
        std::string space = top.at("space").get<std::string>();
        int n = top.at("n").get<int>();
        const CanonicalGroup& bracket = group(s, str(s, "bracket"));
        CanonicalGroup pi = localize(store_.lookup(space, n).group, bracket.locality());
        CanonicalGroup sum = direct_sum({pi, bracket});
        note("π_" + std::to_string(n) + "(" + space + ") " + to_descriptor(pi) + " ⊕ bracket " + to_descriptor(bracket) +
             " = " + to_descriptor(sum));
        Value v;
        v.group = sum;
        env_[s.id] = std::move(v);
    }

    void do_assemble(const Step& s) {
        const std::string space = str(s, "space");
        const int n = s.spec.at("n").get<int>();
        const Splitting& sp = store_.splitting(space);
        if (s.spec.contains("local_primes") && s.spec.at("local_primes").get<std::vector<Prime>>() != sp.local_primes)
            fail(s, "local primes differ from the declared splitting of " + space);
        const Locality local = Locality::at(sp.local_primes);
        auto ids = s.spec.value("local", std::vector<std::string>{});
        if (ids.empty())
            fail(s, "LocalizeAssemble needs local parts");
        std::vector<CanonicalGroup> parts;
        for (const auto& id : ids)
            parts.push_back(group(s, id));
        if (parts.size() == 1 && parts[0].locality().is_global()) {
            parts[0] = localize(parts[0], local);
            note("localized " + ids[0] + " at " + local.to_string() + ": " + to_descriptor(parts[0]));
        }
        std::set<Prime> covered;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (parts[i].locality().is_global() || !local.covers(parts[i].locality()))
                fail(s, "part " + ids[i] + " has locality " + parts[i].locality().to_string() + ", outside " +
                            local.to_string());
            for (Prime p : parts[i].locality().primes())
                if (!covered.insert(p).second)
                    fail(s, "prime " + std::to_string(p) + " is covered twice");
        }
        if (covered.size() != sp.local_primes.size())
            fail(s, "local parts do not cover " + local.to_string());

        CanonicalGroup spheres = sphere_product_part(store_, sp, n);
        std::string cells;
        for (int d : sp.cells)
            for (int dim : sp.spheres)
                cells += (cells.empty() ? "" : " ⊕ ") + std::string("π") + std::to_string(d + n) + "(S" +
                         std::to_string(dim) + ")";
        note("away from " + local.to_string() + ": " + cells + " = " + to_descriptor(spheres));
        std::vector<PrimePower> torsion = spheres.torsion();
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (parts[i].free_rank() != spheres.free_rank())
                fail(s, "free rank " + std::to_string(parts[i].free_rank()) + " of " + ids[i] +
                            " disagrees with the sphere product's " + std::to_string(spheres.free_rank()));
            torsion.insert(torsion.end(), parts[i].torsion().begin(), parts[i].torsion().end());
        }
        CanonicalGroup total = CanonicalGroup::make(spheres.free_rank(), std::move(torsion));
        note("assembled " + to_descriptor(total));
        Value v;
        v.group = total;
        env_[s.id] = std::move(v);
    }

    void do_assert(const Step& s, StepReport& sr) {
        CanonicalGroup got = group(s, str(s, "target"));
        if (s.spec.contains("at"))
            got = localize(got, Locality::at(s.spec.at("at").get<std::vector<Prime>>()));
        CanonicalGroup want;
        if (s.spec.contains("expect"))
            want = group_from_json(s.spec.at("expect"), s.id, nlohmann::json::json_pointer());
        else if (s.spec.contains("expect_result")) {
            const auto& k = s.spec.at("expect_result");
            want = store_.expected_row(k.at("theorem").get<std::string>(), k.at("space").get<std::string>(),
                                       k.at("n").get<int>())
                       .group;
        } else {
            fail(s, "Assert needs 'expect' or 'expect_result'");
        }
        sr.group = got;
        sr.ok = got == want;
        std::string label = s.spec.value("label", std::string());
        note((label.empty() ? std::string() : label + ": ") + to_descriptor(got) + (sr.ok ? " = " : " ≠ ") +
             to_descriptor(want) + (sr.ok ? "" : "  MISMATCH"));
        Value v;
        v.group = got;
        env_[s.id] = std::move(v);
    }

    const TableStore& store_;
    RunOptions opt_;
    std::map<std::string, Value> env_;
    StepReport* current_ = nullptr;
};

} // namespace detail

/// Executes the steps in order. Failures stop the run and are recorded in the report.
inline DerivationReport run(const DerivationScript& script, const TableStore& store, RunOptions opt = {}) {
    return detail::Runner(store, opt).run(script);
}

/// Ordered narrative of a report: steps, citations, groups, witnesses and axioms.
inline std::string explain(const DerivationReport& r) {
    std::ostringstream os;
    os << "== " << r.script << (r.passed() ? "  [pass]" : "  [FAIL]") << "\n";
    for (const auto& s : r.steps) {
        os << (s.ok ? "  ok   " : "  FAIL ") << s.id << " (" << s.kind << ")";
        if (s.group)
            os << " -> " << to_descriptor(*s.group);
        os << "\n       cite: " << s.cite << "\n";
        for (const auto& line : s.trace)
            os << "       " << line << "\n";
    }
    if (r.failure)
        os << "  stopped at step '" << r.failure->step << "': " << r.failure->detail << "\n";
    for (const auto& c : r.comparisons)
        os << (c.ok ? "  ok   " : "  FAIL ") << c.label << ": computed "
           << (c.computed ? to_descriptor(*c.computed) : std::string("?")) << ", expected "
           << (c.expected ? to_descriptor(*c.expected) : std::string("(missing)")) << "\n";
    if (!r.axioms.empty()) {
        os << "  externally justified:\n";
        for (const auto& a : r.axioms)
            os << "    " << a.id << (a.external ? " [external]" : "") << ": " << a.statement << "; " << a.cite << "\n";
    }
    return os.str();
}

inline nlohmann::json report_to_json(const DerivationReport& r) {
    using nlohmann::json;
    json steps = json::array();
    for (const auto& s : r.steps)
        steps.push_back({{"id", s.id},
                         {"kind", s.kind},
                         {"cite", s.cite},
                         {"ok", s.ok},
                         {"group", s.group ? json(to_descriptor(*s.group)) : json(nullptr)},
                         {"trace", s.trace},
                         {"requires", s.requires_},
                         {"witnesses", s.witnesses}});
    json axioms = json::array();
    for (const auto& a : r.axioms)
        axioms.push_back({{"id", a.id}, {"statement", a.statement}, {"cite", a.cite}, {"external", a.external}});
    json comps = json::array();
    for (const auto& c : r.comparisons)
        comps.push_back({{"label", c.label},
                         {"theorem", c.theorem},
                         {"space", c.space},
                         {"n", c.n},
                         {"from", c.from},
                         {"expected", c.expected ? json(to_descriptor(*c.expected)) : json(nullptr)},
                         {"computed", c.computed ? json(to_descriptor(*c.computed)) : json(nullptr)},
                         {"ok", c.ok}});
    json failure = r.failure ? json{{"step", r.failure->step}, {"detail", r.failure->detail}} : json(nullptr);
    return {{"script", r.script}, {"passed", r.passed()}, {"failure", failure},
            {"steps", steps},     {"axioms", axioms},     {"comparisons", comps}};
}

// ---------------------------------------------------------------------------------------
// Suites

/// Axiom ids each script is allowed to use, keyed by script name.
using AxiomManifest = std::map<std::string, std::vector<std::string>>;

inline AxiomManifest load_manifest(const std::filesystem::path& path) {
    auto j = detail::read_json_file(path);
    try {
        return j.get<AxiomManifest>();
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path.string() + ": " + ex.what());
    }
}

struct SuiteReport {
    std::vector<DerivationReport> reports;
    std::vector<std::string> unasserted;
    std::vector<std::string> manifest_mismatches;

    bool passed() const {
        if (!unasserted.empty() || !manifest_mismatches.empty())
            return false;
        for (const auto& r : reports)
            if (!r.passed())
                return false;
        return true;
    }
};

struct SuiteOptions {
    RunOptions run;
    bool fail_fast = false;
    /// Require every self-map group key to be asserted, not only those of spaces touched.
    bool require_all = false;
    std::optional<AxiomManifest> manifest;
};

inline SuiteReport run_suite(const std::vector<DerivationScript>& scripts, const TableStore& store,
                             const SuiteOptions& opt = {}) {
    SuiteReport suite;
    std::set<std::tuple<std::string, std::string, int>> asserted;
    std::set<std::string> spaces;
    for (const auto& script : scripts) {
        suite.reports.push_back(run(script, store, opt.run));
        const auto& rep = suite.reports.back();
        for (const auto& c : rep.comparisons)
            if (c.ok && (c.theorem == "1" || c.theorem == "2")) {
                asserted.insert({c.theorem, c.space, c.n});
                spaces.insert(c.space);
            }
        if (opt.manifest) {
            std::vector<std::string> used;
            for (const auto& a : rep.axioms)
                used.push_back(a.id);
            std::sort(used.begin(), used.end());
            auto it = opt.manifest->find(script.name);
            std::vector<std::string> listed = it == opt.manifest->end() ? std::vector<std::string>{} : it->second;
            std::sort(listed.begin(), listed.end());
            if (used != listed) {
                std::string u, l;
                for (const auto& x : used)
                    u += (u.empty() ? "" : ", ") + x;
                for (const auto& x : listed)
                    l += (l.empty() ? "" : ", ") + x;
                suite.manifest_mismatches.push_back(script.name + ": uses {" + u + "} but the manifest lists {" + l +
                                                    "}");
            }
        }
        if (opt.fail_fast && !rep.passed())
            break;
    }
    for (const auto& row : store.expected) {
        if (row.theorem != "1" && row.theorem != "2")
            continue;
        if (!opt.require_all && !spaces.count(row.space))
            continue;
        if (!asserted.count({row.theorem, row.space, row.n}))
            suite.unasserted.push_back(row.key());
    }
    return suite;
}

inline nlohmann::json suite_to_json(const SuiteReport& s) {
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& r : s.reports)
        reports.push_back(report_to_json(r));
    return {{"passed", s.passed()},
            {"reports", reports},
            {"unasserted", s.unasserted},
            {"manifest_mismatches", s.manifest_mismatches}};
}

inline std::string suite_to_text(const SuiteReport& s) {
    std::string out;
    for (const auto& r : s.reports)
        out += explain(r);
    for (const auto& k : s.unasserted)
        out += "unasserted expected result: " + k + "\n";
    for (const auto& m : s.manifest_mismatches)
        out += "axiom manifest mismatch: " + m + "\n";
    out += s.passed() ? "suite: pass\n" : "suite: FAIL\n";
    return out;
}

/// The SU(3) and Sp(2) groups with a row per n and a column per space, then G2,
/// the named intermediate asserts and the axiom ledger.
inline std::string suite_to_markdown(const SuiteReport& s) {
    std::map<std::pair<std::string, int>, const Comparison*> cell;
    for (const auto& r : s.reports)
        for (const auto& c : r.comparisons)
            if (c.theorem == "1" || c.theorem == "2")
                cell[{c.space, c.n}] = &c;
    auto show = [&](const std::string& space, int n) -> std::string {
        auto it = cell.find({space, n});
        if (it == cell.end())
            return "not checked";
        const Comparison& c = *it->second;
        return "`" + (c.computed ? to_descriptor(*c.computed) : std::string("?")) + "` " + (c.ok ? "✓" : "✗");
    };
    std::ostringstream os;
    os << "# Derivation report\n\n";
    os << "## SU(3) and Sp(2)\n\n| n | π_n map_*(SU(3),SU(3)) | π_n map_*(Sp(2),Sp(2)) |\n|---|---|---|\n";
    for (int n = 1; n <= 8; ++n)
        os << "| " << n << " | " << show("SU(3)", n) << " | " << show("Sp(2)", n) << " |\n";
    os << "\n## G2\n\nπ_1 map_*(G2,G2): " << show("G2", 1) << "\n";
    os << "\n## Intermediate asserts\n\n| script | assert | group | result |\n|---|---|---|---|\n";
    for (const auto& r : s.reports)
        for (const auto& st : r.steps)
            if (st.kind == "Assert")
                os << "| " << r.script << " | " << st.id << " | `"
                   << (st.group ? to_descriptor(*st.group) : std::string("?")) << "` | " << (st.ok ? "✓" : "✗")
                   << " |\n";
    os << "\n## Axiom ledger (externally justified facts)\n\n| script | id | statement | citation |\n|---|---|---|---|\n";
    for (const auto& r : s.reports)
        for (const auto& a : r.axioms)
            os << "| " << r.script << " | " << a.id << (a.external ? "" : " (notation)") << " | " << a.statement
               << " | " << a.cite << " |\n";
    for (const auto& r : s.reports)
        if (r.failure)
            os << "\n**" << r.script << " stopped at `" << r.failure->step << "`:** " << r.failure->detail << "\n";
    for (const auto& k : s.unasserted)
        os << "\n**Unasserted:** " << k << "\n";
    for (const auto& m : s.manifest_mismatches)
        os << "\n**Manifest mismatch:** " << m << "\n";
    os << "\n**Suite: " << (s.passed() ? "pass" : "FAIL") << "**\n";
    return os.str();
}

} // namespace hl
