#include "homotopy_ledger/derivation.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace hl;
using nlohmann::json;

namespace {

const std::filesystem::path data_dir = HOMOTOPY_LEDGER_DATA_DIR;

const TableStore& store() {
    static const TableStore s = load_tables(data_dir / "tables");
    return s;
}

json script_json(const std::string& name) {
    std::ifstream in(data_dir / "scripts" / (name + ".json"));
    return json::parse(in);
}

DerivationReport run_named(const std::string& name) {
    return run(load_script(data_dir / "scripts" / (name + ".json")), store());
}

json tiny(json steps) {
    return {{"name", "tiny"}, {"steps", std::move(steps)}, {"asserts", json::array()}};
}

json define(const std::string& id, const std::string& group) {
    return {{"id", id}, {"kind", "DefineGroup"}, {"cite", "literal"}, {"group", group}, {"generators", json::array()}};
}

json check(const std::string& id, const std::string& target, const std::string& expect) {
    return {{"id", id}, {"kind", "Assert"}, {"cite", "literal"}, {"target", target}, {"expect", expect}};
}

const StepReport& step_of(const DerivationReport& r, const std::string& id) {
    for (const auto& s : r.steps)
        if (s.id == id)
            return s;
    throw std::runtime_error("no step " + id);
}

} // namespace

TEST(Parse, DanglingReference) {
    EXPECT_THROW(parse_script(tiny({check("a", "nowhere", "Z2")}), "t"), DanglingReference);
}

TEST(Parse, ForwardReferenceIsRejected) {
    EXPECT_THROW(parse_script(tiny({check("a", "g", "Z2"), define("g", "Z2")}), "t"), DanglingReference);
}

TEST(Parse, CycleIsRejected) {
    json a = check("a", "b", "Z2");
    json b = check("b", "a", "Z2");
    EXPECT_THROW(parse_script(tiny({a, b}), "t"), CyclicReference);
    json self = check("s", "s", "Z2");
    EXPECT_THROW(parse_script(tiny({self}), "t"), CyclicReference);
}

TEST(Parse, StructuralErrors) {
    EXPECT_THROW(parse_script(tiny({define("g", "Z2")}), "t"), ParseError);
    EXPECT_THROW(parse_script(tiny({define("g", "Z2"), define("g", "Z4"), check("a", "g", "Z2")}), "t"), ParseError);
    json odd = define("g", "Z2");
    odd["kind"] = "Guess";
    EXPECT_THROW(parse_script(tiny({odd}), "t"), ParseError);
}

TEST(Run, TinyScript) {
    auto r = run(parse_script(tiny({define("g", "Z2+Z4"), check("a", "g", "Z4+Z2")}), "t"), store());
    EXPECT_TRUE(r.passed()) << explain(r);
}

TEST(Suite, ShippedScriptsPassWithManifest) {
    SuiteOptions opt;
    opt.manifest = load_manifest(data_dir / "axioms_manifest.json");
    opt.require_all = true;
    auto suite = run_suite(load_scripts(data_dir / "scripts"), store(), opt);
    EXPECT_TRUE(suite.passed()) << suite_to_text(suite);
    EXPECT_EQ(suite.reports.size(), 17u);
    EXPECT_TRUE(suite.unasserted.empty());
}

// Literal values of the computed groups.
TEST(Suite, SelfMapCellsFromLiterals) {
    auto total = [](const DerivationReport& r) { return *step_of(r, "total").group; };
    EXPECT_EQ(total(run_named("sp2_n4")), parse_descriptor("Z+Z2+Z16+Z3+Z5+Z7"));
    EXPECT_EQ(total(run_named("sp2_n7")), parse_descriptor("Z8+Z32+Z2+Z9+Z5+Z5+Z5+Z7"));
    EXPECT_EQ(total(run_named("g2")), parse_descriptor("Z2+Z2"));
    EXPECT_EQ(*step_of(run_named("su3_n5"), "cw").group, parse_descriptor("Z8@{2}"));
}

TEST(Suite, GlobSelectsSortedSubset) {
    auto su3 = load_scripts(data_dir / "scripts", "su3_*");
    ASSERT_EQ(su3.size(), 8u);
    for (std::size_t i = 0; i + 1 < su3.size(); ++i)
        EXPECT_LT(su3[i].name, su3[i + 1].name);
    auto suite = run_suite(su3, store());
    EXPECT_TRUE(suite.passed()) << suite_to_text(suite);
}

TEST(Suite, RequireAllReportsMissingKeys) {
    SuiteOptions opt;
    opt.require_all = true;
    auto suite = run_suite(load_scripts(data_dir / "scripts", "su3_*"), store(), opt);
    EXPECT_FALSE(suite.passed());
    bool g2_missing = false;
    for (const auto& k : suite.unasserted)
        g2_missing = g2_missing || k == "theorem 2 G2 n=1";
    EXPECT_TRUE(g2_missing);
    opt.require_all = false;
    EXPECT_TRUE(run_suite(load_scripts(data_dir / "scripts", "su3_*"), store(), opt).passed());
}

TEST(Suite, ManifestMismatchIsDetected) {
    SuiteOptions opt;
    opt.manifest = load_manifest(data_dir / "axioms_manifest.json");
    auto& su3_n5 = (*opt.manifest)["su3_n5"];
    su3_n5.erase(std::find(su3_n5.begin(), su3_n5.end(), "ax_hk"));
    auto suite = run_suite(load_scripts(data_dir / "scripts", "su3_n5"), store(), opt);
    EXPECT_FALSE(suite.passed());
    ASSERT_EQ(suite.manifest_mismatches.size(), 1u);
    EXPECT_NE(suite.manifest_mismatches[0].find("ax_hk"), std::string::npos);
}

TEST(Report, Deterministic) {
    auto scripts = load_scripts(data_dir / "scripts");
    auto a = suite_to_json(run_suite(scripts, store())).dump();
    auto b = suite_to_json(run_suite(scripts, store())).dump();
    EXPECT_EQ(a, b);
    EXPECT_EQ(suite_to_markdown(run_suite(scripts, store())), suite_to_markdown(run_suite(scripts, store())));
}

// Recomputed from the report: |middle| = |sub|·|quotient| for every finite SES step.
TEST(Report, ConservationInEverySesStep) {
    int checked = 0;
    for (const auto& script : load_scripts(data_dir / "scripts")) {
        auto r = run(script, store());
        for (const auto& s : script.steps) {
            if (s.kind != "SesResolve")
                continue;
            auto mid = *step_of(r, s.id).group;
            auto sub = *step_of(r, s.spec.at("sub").get<std::string>()).group;
            auto quot = *step_of(r, s.spec.at("quotient").get<std::string>()).group;
            if (s.spec.contains("sub_bound"))
                EXPECT_TRUE(sub.is_trivial()) << script.name << "/" << s.id;
            if (s.spec.contains("quotient_bound"))
                EXPECT_TRUE(quot.is_trivial()) << script.name << "/" << s.id;
            if (s.spec.contains("sub_bound"))
                sub = CanonicalGroup::trivial(sub.locality());
            if (s.spec.contains("quotient_bound"))
                quot = CanonicalGroup::trivial(quot.locality());
            if (!sub.is_finite() || !quot.is_finite())
                continue;
            EXPECT_EQ(order(mid).value, order(sub).value * order(quot).value) << script.name << "/" << s.id;
            ++checked;
        }
    }
    EXPECT_GT(checked, 20);
}

TEST(Report, AssertVerdictsDriveOverallPass) {
    json j = script_json("su3_n4");
    for (auto& s : j["steps"])
        if (s["id"] == "cw_gold")
            s["expect"] = "Z2@{2}";
    auto r = run(parse_script(j, "mutated"), store());
    EXPECT_FALSE(r.passed());
    EXPECT_FALSE(r.failure);
    EXPECT_FALSE(step_of(r, "cw_gold").ok);
    EXPECT_TRUE(step_of(r, "total").ok);
}

TEST(Explain, DichotomyTraceNamesTheAxiom) {
    auto text = explain(run_named("su3_n6"));
    EXPECT_NE(text.find("[ν₅η₈²]∘η₁₀ = 0"), std::string::npos);
    EXPECT_NE(text.find("alternative 'double'"), std::string::npos);
    EXPECT_NE(text.find("dichotomy resolved to 'zero'"), std::string::npos);
    EXPECT_NE(text.find("cw_gold (Assert) -> Z4@{2}"), std::string::npos);
}

TEST(Explain, OtherBranchOfTheDichotomyGivesZ2) {
    json j = script_json("su3_n6");
    for (auto& s : j["steps"])
        if (s["id"] == "eta10")
            s["select"] = "double";
    auto r = run(parse_script(j, "mutated"), store());
    EXPECT_FALSE(r.passed());
    EXPECT_EQ(*step_of(r, "cw").group, parse_descriptor("Z2@{2}"));
}

TEST(Explain, BothOmegaMapsVanishAndTheBracketSplits) {
    auto r = run_named("sp2_n8");
    auto text = explain(r);
    EXPECT_NE(text.find("(Σ⁹ω)^*: i_*μ₃ ↦ 0, i_*η₃ε₃ ↦ 0"), std::string::npos);
    EXPECT_NE(text.find("(Σ⁸ω)^*: i_*ε₃ ↦ 0"), std::string::npos);
    EXPECT_NE(text.find("witness Splits"), std::string::npos);
    EXPECT_EQ(*step_of(r, "cw").group, parse_descriptor("Z2+Z2"));
}

TEST(Explain, G2Ledger) {
    auto r = run_named("g2");
    EXPECT_TRUE(r.passed());
    auto text = explain(r);
    EXPECT_NE(text.find("η²σ ≠ 0"), std::string::npos);
    std::vector<std::string> ids;
    for (const auto& a : r.axioms) {
        ids.push_back(a.id);
        EXPECT_TRUE(a.external) << a.id;
        EXPECT_FALSE(a.cite.empty()) << a.id;
    }
    for (const char* needed : {"ax_1stem", "ax_bs", "ax_eta2sigma"})
        EXPECT_NE(std::find(ids.begin(), ids.end(), needed), ids.end()) << needed;
}

TEST(Failure, PartialReportSurvives) {
    json j = script_json("su3_n5");
    for (auto& s : j["steps"])
        if (s["id"] == "cw")
            s.erase("witnesses");
    auto r = run(parse_script(j, "mutated"), store());
    ASSERT_TRUE(r.failure);
    EXPECT_EQ(r.failure->step, "cw");
    EXPECT_NE(r.failure->detail.find("Z8"), std::string::npos);
    EXPECT_TRUE(step_of(r, "sub").ok);
    EXPECT_TRUE(step_of(r, "quot").ok);
    EXPECT_FALSE(step_of(r, "cw").ok);
    auto js = report_to_json(r);
    EXPECT_EQ(js["failure"]["step"], "cw");
    EXPECT_FALSE(js["passed"].get<bool>());
}

TEST(Failure, MissingTableEntryIsAStepFailure) {
    json steps = {{{"id", "p"}, {"kind", "DefineGroup"}, {"cite", "t"}, {"table", {{"space", "SU(3)"}, {"n", 99}}}},
                  check("a", "p", "0")};
    auto r = run(parse_script(tiny(steps), "t"), store());
    ASSERT_TRUE(r.failure);
    EXPECT_EQ(r.failure->step, "p");
}
