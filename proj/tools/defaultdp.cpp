#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "defaultdp/json_io.hpp"
#include "defaultdp/oracle.hpp"
#include "defaultdp/solver.hpp"

namespace {

constexpr int kExitSat = 10;
constexpr int kExitUnsat = 20;
constexpr int kExitError = 1;
constexpr int kExitDisagree = 2;

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::uint64_t seedFromEnvironment() {
    if (const char* env = std::getenv("DEFAULTDP_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::runtime_error("DEFAULTDP_SEED is not an integer");
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace defaultdp;

    CLI::App app{"Stable default set solver via dynamic programming on tree decompositions"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 0;
    std::string heuristicName = "min-fill";
    int jobs = 1;
    int maxOracleVars = 16;
    bool seedGiven = false;
    auto* seedOpt = app.add_option("--seed", seed, "pipeline seed (default: DEFAULTDP_SEED or 0)");
    app.add_option("--heuristic", heuristicName, "elimination heuristic: min-fill | min-degree")
        ->check(CLI::IsMember({"min-fill", "min-degree"}));
    app.add_option("--jobs", jobs, "worker threads for the table pass")->check(CLI::PositiveNumber);
    app.add_option("--max-oracle-vars", maxOracleVars, "variable cap for the brute-force oracle");

    std::string path;
    std::size_t limit = 0;
    bool limitGiven = false;
    std::string format = "dot";

    CLI::App* cmdDecide = app.add_subcommand("decide", "decide stable extension existence");
    cmdDecide->add_option("file", path, "theory file")->required();

    CLI::App* cmdEnumerate = app.add_subcommand("enumerate", "enumerate stable default sets");
    cmdEnumerate->add_option("file", path, "theory file")->required();
    auto* limitOpt = cmdEnumerate->add_option("--limit", limit, "emit at most N solutions");

    CLI::App* cmdCount = app.add_subcommand("count", "count stable default sets");
    cmdCount->add_option("file", path, "theory file")->required();

    CLI::App* cmdVerify = app.add_subcommand("verify", "cross-validate against the oracle");
    cmdVerify->add_option("file", path, "theory file")->required();

    CLI::App* cmdTd = app.add_subcommand("td", "emit the labeled tree decomposition");
    cmdTd->add_option("file", path, "theory file")->required();
    cmdTd->add_option("--format", format, "dot | json")->check(CLI::IsMember({"dot", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help() << "\n";
        return kExitError;
    }
    limitGiven = limitOpt->count() > 0;
    seedGiven = seedOpt->count() > 0;

    try {
        if (!seedGiven) seed = seedFromEnvironment();
        SolveConfig config;
        config.heuristic = heuristicFromName(heuristicName);
        config.seed = seed;
        config.jobs = jobs;

        DefaultTheory theory = parseTheory(readFile(path));

        if (cmdDecide->parsed()) {
            const bool sat = decideExt(theory, config);
            std::cout << (sat ? "SAT" : "UNSAT") << "\n";
            return sat ? kExitSat : kExitUnsat;
        }

        if (cmdEnumerate->parsed()) {
            Pipeline p = runPipeline(theory, config);
            const bool sat = rootAccepts(p.rootTable());
            auto sets = enumerateStableSets(
                p, theory, limitGiven ? std::optional<std::size_t>(limit) : std::nullopt);
            for (const auto& s : sets) std::cout << solutionToJson(theory, s).dump() << "\n";
            std::cerr << "count=" << sets.size() << "\n";
            return sat ? kExitSat : kExitUnsat;
        }

        if (cmdCount->parsed()) {
            std::cout << countStableSets(theory, config) << "\n";
            return 0;
        }

        if (cmdVerify->parsed()) {
            OracleLimits limits;
            limits.maxVariables = maxOracleVars;
            OracleReport report = crossValidate(theory, limits);
            auto dpSets = enumerateStableSets(theory, config);
            std::sort(dpSets.begin(), dpSets.end());
            bool dpMatches = dpSets == report.stableSets;
            json out = oracleReportToJson(report);
            out["dp_sets"] = setListToJson(dpSets);
            out["dp_matches_oracle"] = dpMatches;
            std::cout << out.dump(2) << "\n";
            return (report.agree && dpMatches) ? 0 : kExitDisagree;
        }

        if (cmdTd->parsed()) {
            Pipeline p;
            p.graph = semiPrimalGraph(theory);
            p.td = buildTd(p.graph, eliminationOrder(p.graph, config.heuristic, config.seed));
            p.ltd = makePrettyLtd(p.td, theory);
            if (format == "json")
                std::cout << ltdToJson(p.ltd, theory).dump(2) << "\n";
            else
                std::cout << toDot(p.ltd, theory);
            std::cerr << "width=" << width(p.ltd.tree) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
