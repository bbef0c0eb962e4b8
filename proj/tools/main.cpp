#include "homotopy_ledger/homotopy_ledger.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_config = 2;

struct CliConfig {
    fs::path tables_dir;
    fs::path scripts_dir;
    std::string format = "text";
    std::uint64_t bound = hl::default_enumeration_bound;
    bool fail_fast = false;
    std::string manifest;
};

/// Configuration problems that map to exit status 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_dir(const fs::path& p, const char* what) {
    if (!fs::is_directory(p))
        throw ConfigError(std::string(what) + " directory " + p.string() + " does not exist");
}

std::string join(const std::vector<hl::CanonicalGroup>& gs, const char* sep) {
    std::string out;
    for (const auto& g : gs)
        out += (out.empty() ? "" : sep) + hl::to_descriptor(g);
    return out;
}

json descriptors(const std::vector<hl::CanonicalGroup>& gs) {
    json out = json::array();
    for (const auto& g : gs)
        out.push_back(hl::to_descriptor(g));
    return out;
}

int cmd_validate(const CliConfig& cfg) {
    require_dir(cfg.tables_dir, "tables");
    auto store = hl::load_tables(cfg.tables_dir);
    auto findings = hl::validate_store(store);
    if (cfg.format == "json") {
        json out = json::array();
        for (const auto& f : findings)
            out.push_back({{"key", f.key}, {"message", f.message}});
        std::cout << json{{"passed", findings.empty()}, {"findings", out}}.dump(2) << "\n";
    } else {
        const char* bullet = cfg.format == "markdown" ? "- " : "";
        if (cfg.format == "markdown")
            std::cout << "# Table validation\n\n";
        for (const auto& f : findings)
            std::cout << bullet << f.key << ": " << f.message << "\n";
        std::cout << bullet << "validate: " << (findings.empty() ? "pass" : "FAIL") << " (" << store.tables.size()
                  << " tables, " << store.expected.size() << " expected rows, " << findings.size() << " findings)\n";
    }
    return findings.empty() ? exit_pass : exit_fail;
}

int cmd_check(const CliConfig& cfg, const std::string& glob) {
    require_dir(cfg.tables_dir, "tables");
    require_dir(cfg.scripts_dir, "scripts");
    auto store = hl::load_tables(cfg.tables_dir);
    auto scripts = hl::load_scripts(cfg.scripts_dir, glob);
    if (scripts.empty())
        throw ConfigError("no scripts in " + cfg.scripts_dir.string() + " match '" + glob + "'");

    hl::SuiteOptions opt;
    opt.run.bound = cfg.bound;
    opt.fail_fast = cfg.fail_fast;
    opt.require_all = glob == "*";
    fs::path manifest = cfg.manifest;
    if (cfg.manifest.empty())
        manifest = cfg.scripts_dir.parent_path() / "axioms_manifest.json";
    if (!cfg.manifest.empty() || fs::exists(manifest)) {
        // A partial run is checked only against the manifest entries of the scripts it ran.
        auto full = hl::load_manifest(manifest);
        hl::AxiomManifest subset;
        for (const auto& s : scripts)
            if (auto it = full.find(s.name); it != full.end())
                subset.insert(*it);
        opt.manifest = std::move(subset);
    }
    auto suite = hl::run_suite(scripts, store, opt);

    if (cfg.format == "json")
        std::cout << hl::suite_to_json(suite).dump(2) << "\n";
    else if (cfg.format == "markdown")
        std::cout << hl::suite_to_markdown(suite);
    else
        std::cout << hl::suite_to_text(suite);
    if (cfg.format != "text")
        for (const auto& r : suite.reports)
            if (!r.passed())
                std::cerr << hl::explain(r);
    return suite.passed() ? exit_pass : exit_fail;
}

int cmd_oracle(const CliConfig& cfg, const std::string& what, const std::vector<std::string>& args) {
    auto need = [&](std::size_t n) {
        if (args.size() != n)
            throw ConfigError("oracle " + what + " takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s"));
    };
    std::vector<hl::CanonicalGroup> result;
    if (what == "ext") {
        need(2);
        result.push_back(hl::ext_group(hl::parse_descriptor(args[0]), hl::parse_descriptor(args[1])));
    } else if (what == "middles") {
        need(2);
        result = hl::middle_candidates(hl::parse_descriptor(args[0]), hl::parse_descriptor(args[1]), cfg.bound);
    } else {
        need(1);
        hl::Integer n;
        try {
            n = hl::Integer(args[0]);
        } catch (const std::exception&) {
            throw ConfigError("oracle enum needs a positive integer, got '" + args[0] + "'");
        }
        if (n < 1)
            throw ConfigError("oracle enum needs a positive integer, got '" + args[0] + "'");
        if (n > cfg.bound)
            throw hl::BoundExceeded("oracle enum: order " + n.str() + " exceeds bound " + std::to_string(cfg.bound));
        result = hl::enumerate_abelian_groups(n);
    }
    if (cfg.format == "json")
        std::cout << json{{"oracle", what}, {"args", args}, {"result", descriptors(result)}}.dump(2) << "\n";
    else
        std::cout << join(result, what == "enum" ? "; " : ", ") << "\n";
    return exit_pass;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finitely generated abelian groups, homotopy tables and derivation checks"};
    app.require_subcommand(1);

    CliConfig cfg;
    std::string tables = (fs::path(HOMOTOPY_LEDGER_DATA_DIR) / "tables").string();
    std::string scripts = (fs::path(HOMOTOPY_LEDGER_DATA_DIR) / "scripts").string();
    app.add_option("--tables", tables, "table store directory")->envname("HOMOTOPY_LEDGER_TABLES");
    app.add_option("--scripts", scripts, "derivation script directory");
    app.add_option("--format", cfg.format, "report format")->check(CLI::IsMember({"json", "text", "markdown"}));
    app.add_option("--bound", cfg.bound, "enumeration bound for extension problems")
        ->check(CLI::Range(std::uint64_t{64}, std::uint64_t{1} << 40));
    app.add_flag("--fail-fast", cfg.fail_fast, "stop at the first failing script");
    app.add_option("--manifest", cfg.manifest, "axiom manifest (default: axioms_manifest.json beside the scripts)");

    auto* validate = app.add_subcommand("validate", "cross-check the table store");
    std::string glob = "*";
    auto* check = app.add_subcommand("check", "run derivation scripts whose names match a glob");
    check->add_option("glob", glob, "script name glob");
    std::string what;
    std::vector<std::string> args;
    auto* oracle = app.add_subcommand("oracle", "ext C A | middles A C | enum N");
    oracle->add_option("what", what)->required()->check(CLI::IsMember({"ext", "middles", "enum"}));
    oracle->add_option("args", args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_pass : exit_config;
    }
    cfg.tables_dir = tables;
    cfg.scripts_dir = scripts;

    try {
        if (validate->parsed())
            return cmd_validate(cfg);
        if (check->parsed())
            return cmd_check(cfg, glob);
        if (oracle->parsed())
            return cmd_oracle(cfg, what, args);
    } catch (const hl::MissingEntry& e) {
        std::cerr << "missing entry: " << e.what() << "\n";
        return exit_config;
    } catch (const hl::ValidationError& e) {
        std::cerr << "invalid table: " << e.what() << "\n";
        return exit_config;
    } catch (const hl::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return exit_config;
    } catch (const hl::DanglingReference& e) {
        std::cerr << "dangling reference: " << e.what() << "\n";
        return exit_config;
    } catch (const hl::CyclicReference& e) {
        std::cerr << "cyclic reference: " << e.what() << "\n";
        return exit_config;
    } catch (const hl::DescriptorError& e) {
        std::cerr << "bad group descriptor: " << e.what() << "\n";
        return exit_config;
    } catch (const hl::BoundExceeded& e) {
        std::cerr << "bound exceeded: " << e.what() << "\n";
        return exit_config;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_fail;
    }
    return exit_config;
}
