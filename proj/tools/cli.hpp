// cli.hpp
// Command dispatch for the hardysim tool. Kept in a header so the tests can
// drive it with in-memory streams.
//
// Exit codes: 0 success, 2 usage error, 1 internal invariant violation.

#pragma once

#include "hardysim/io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hardysim::cli {

using io::Json;

struct UsageError : Error {
    using Error::Error;
};

enum class Format { Table, Json };

/// Everything a run can be configured with, from flags or a JSON file.
struct ScenarioConfig {
    std::string scenario;
    std::string foliation = "both";
    std::string coupling = "monotone";
    std::optional<std::vector<std::string>> kept;
    std::optional<bell::AngleQuad> quad;
    bool scan = false;
    bool erased_vs_kept = false;
    bool forbid_counterfactual = false;
    Format format = Format::Table;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    std::size_t resolution = 20;
};

inline const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{"contexts", "bohm", "agents", "memory", "chsh"};
    return names;
}

inline void validate(const ScenarioConfig& c) {
    bool known = false;
    for (const auto& n : scenario_names()) known = known || n == c.scenario;
    if (!known) throw UsageError("unknown scenario '" + c.scenario + "'");
    if (c.samples.has_value() != c.seed.has_value())
        throw UsageError("--seed is required exactly when --samples is given");
    if (c.samples && c.scenario != "bohm") throw UsageError("sampling is only available for bohm");
    if (c.foliation != "F" && c.foliation != "Fprime" && c.foliation != "both")
        throw UsageError("invalid foliation '" + c.foliation + "'");
    if (c.coupling != "monotone" && c.coupling != "independent")
        throw UsageError("invalid coupling '" + c.coupling + "'");
    if (c.kept)
        for (const auto& a : *c.kept)
            if (a != "F" && a != "Fbar") throw UsageError("invalid agent '" + a + "'");
    if (c.resolution < 2) throw UsageError("resolution must be at least 2");
}

inline bell::AngleQuad parse_quad(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("malformed angle '" + item + "'");
        }
        if (!std::isfinite(v.back())) throw UsageError("malformed angle '" + item + "'");
    }
    if (v.size() != 4) throw UsageError("--quad needs four comma-separated angles a,a',b,b'");
    return {v[0], v[1], v[2], v[3]};
}

inline ScenarioConfig config_from_json(const Json& j) {
    ScenarioConfig c;
    try {
        c.scenario = j.at("scenario").get<std::string>();
        if (j.contains("foliation")) c.foliation = j["foliation"].get<std::string>();
        if (j.contains("coupling")) c.coupling = j["coupling"].get<std::string>();
        if (j.contains("kept")) c.kept = j["kept"].get<std::vector<std::string>>();
        if (j.contains("quad")) {
            const auto q = j["quad"].get<std::vector<double>>();
            if (q.size() != 4) throw UsageError("quad needs four angles");
            c.quad = bell::AngleQuad{q[0], q[1], q[2], q[3]};
        }
        if (j.contains("scan")) c.scan = j["scan"].get<bool>();
        if (j.contains("erased_vs_kept")) c.erased_vs_kept = j["erased_vs_kept"].get<bool>();
        if (j.contains("forbid_counterfactual"))
            c.forbid_counterfactual = j["forbid_counterfactual"].get<bool>();
        if (j.contains("format")) {
            const auto f = j["format"].get<std::string>();
            if (f != "table" && f != "json") throw UsageError("invalid format '" + f + "'");
            c.format = f == "json" ? Format::Json : Format::Table;
        }
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("samples")) c.samples = j["samples"].get<std::size_t>();
        if (j.contains("resolution")) c.resolution = j["resolution"].get<std::size_t>();
    } catch (const Json::exception& e) {
        throw UsageError(std::string("bad config: ") + e.what());
    }
    return c;
}

namespace detail {

inline void check_sums(const qcore::OutcomeDistribution& d) {
    if (std::fabs(d.total() - 1.0) > kTolerance)
        throw InvariantError("table " + d.key(0) + "... does not sum to 1");
}

inline std::string context_name(const qcore::Context& c) {
    std::string s = "(";
    for (std::size_t k = 0; k < c.size(); ++k) s += (k ? "," : "") + c[k].name();
    return s + ")";
}

inline void print_table(std::ostream& out, const qcore::OutcomeDistribution& d,
                        const std::string& indent = "  ") {
    for (std::size_t i = 0; i < d.size(); ++i)
        out << indent << std::left << std::setw(14) << d.key(i) << io::pretty(d[i]) << "\n";
}

inline std::string origin_text(const bohm::ConfigDistribution& d) {
    std::string s;
    for (const auto& [cfg, p] : d) {
        if (!s.empty()) s += ", ";
        s += cfg.str() + ":" + (io::rational(p) ? *io::rational(p) : io::decimal(p));
    }
    return "{" + s + "}";
}

inline void print_tree(std::ostream& out, const bohm::TrajectorySet& set) {
    out << "trajectories, foliation " << bohm::to_string(set.foliation) << ", "
        << bohm::to_string(set.coupling) << " coupling, context " << set.context.name() << "\n";
    const auto initial = bohm::initial_distribution();
    for (const auto& [cfg, w0] : initial) {
        if (w0 <= 0) continue;
        out << "  " << cfg.str() << "  " << io::pretty(w0) << "\n";
        for (const auto& p : set.paths) {
            if (!(p.initial == cfg)) continue;
            std::string indent = "    ";
            for (const auto& e : p.events) {
                out << indent << qcore::to_string(e.system) << " " << e.from.str() << " -> "
                    << e.to.str() << "\n";
                indent += "  ";
            }
            out << indent << "=> " << p.final.str() << "  " << io::pretty(p.weight) << "\n";
        }
    }
}

inline int cmd_contexts(const ScenarioConfig& c, std::ostream& out) {
    std::vector<qcore::OutcomeDistribution> tables;
    for (const auto& ctx : hardy::all_contexts()) tables.push_back(hardy::context_table(ctx));
    for (const auto& t : tables) check_sums(t);
    if (c.format == Format::Json) {
        Json j;
        j["contexts"] = Json::object();
        for (std::size_t k = 0; k < tables.size(); ++k)
            j["contexts"][hardy::all_contexts()[k].name()] = io::to_json(tables[k]);
        out << j.dump(2) << "\n";
        return 0;
    }
    for (std::size_t k = 0; k < tables.size(); ++k) {
        out << "context " << hardy::all_contexts()[k].name() << "\n";
        print_table(out, tables[k]);
    }
    return 0;
}

inline int cmd_bohm(const ScenarioConfig& c, std::ostream& out) {
    const bohm::TransportCoupling coupling(io::parse_coupling(c.coupling));
    std::vector<bohm::Foliation> foliations;
    if (c.foliation == "both")
        foliations = {bohm::Foliation::F, bohm::Foliation::Fprime};
    else
        foliations = {io::parse_foliation(c.foliation)};

    const bohm::HiddenConfig hardy_outcome{qcore::label::okbar, qcore::label::ok};
    const auto born = hardy::context_table(hardy::kWbarW);
    Json j;
    j["sets"] = Json::array();
    for (auto f : foliations) {
        const auto set = bohm::evolve(f, coupling);
        const auto marginal = set.final_marginal();
        for (std::size_t i = 0; i < born.size(); ++i)
            if (std::fabs(marginal[i] - born[i]) > kTolerance)
                throw InvariantError("equivariance violated for " + born.key(i));
        const auto origin = bohm::origin_of(set, hardy_outcome);
        if (c.format == Format::Json) {
            Json sj = io::to_json(set);
            sj["origin_okbar_ok"] = io::to_json(origin);
            j["sets"].push_back(sj);
        } else {
            print_tree(out, set);
            out << "origin of " << hardy_outcome.str() << " under " << bohm::to_string(f) << ": "
                << origin_text(origin) << "\n";
        }
        if (c.samples) {
            const auto report = bohm::sample(hardy::kWbarW, f, coupling, *c.seed, *c.samples);
            if (c.format == Format::Json) {
                Json counts = Json::object();
                for (const auto& [k, n] : report.counts) counts[k] = n;
                j["sets"].back()["samples"] = {
                    {"seed", report.seed}, {"n", report.samples}, {"counts", counts}};
            } else {
                out << "sampled " << report.samples << " runs (seed " << report.seed << ")\n";
                for (const auto& p : set.paths) {
                    const auto it = report.counts.find(p.key());
                    const std::size_t n = it == report.counts.end() ? 0 : it->second;
                    out << "  " << std::left << std::setw(56) << p.key() << " enumerated "
                        << io::decimal(p.weight).substr(0, 10) << "  sampled "
                        << static_cast<double>(n) / static_cast<double>(report.samples) << "\n";
                }
            }
        }
    }
    if (foliations.size() == 2) {
        const auto report = bohm::compare_foliations(coupling);
        if (c.format == Format::Json) {
            j["comparison"] = io::to_json(report);
        } else {
            bool any_differs = false;
            for (const auto& o : report.outcomes) any_differs = any_differs || o.differs;
            out << "comparison: origins " << (any_differs ? "differ" : "agree") << "; marginals "
                << (report.marginals_identical ? "identical" : "differ") << "\n";
            for (const auto& o : report.outcomes)
                out << "  " << o.outcome.str() << "  F " << origin_text(o.origin_F) << "  Fprime "
                    << origin_text(o.origin_Fprime) << (o.differs ? "  [differs]" : "") << "\n";
        }
    }
    if (c.format == Format::Json) out << j.dump(2) << "\n";
    return 0;
}

inline int cmd_agents(const ScenarioConfig& c, std::ostream& out) {
    epistemic::TraceOptions options;
    options.allow_counterfactual_composition = !c.forbid_counterfactual;
    const auto report = epistemic::run_trace({}, options);
    if (c.format == Format::Json) {
        out << io::to_json(report).dump(2) << "\n";
        return 0;
    }
    for (const auto& s : report.statements) {
        out << std::left << std::setw(10) << s.id << std::setw(24)
            << epistemic::to_string(s.classification) << (s.derived ? "derived   " : "not used  ")
            << s.author << ": " << s.proposition << "   [assumed " << s.assumed_context
            << ", actual " << s.actual_context << "]";
        if (s.backing) out << "  backing P=" << io::pretty(*s.backing);
        out << "\n";
    }
    if (report.contradiction) {
        out << "contradiction at " << report.contradiction->statement << ": composed prediction "
            << io::pretty(report.contradiction->composed) << ", actual P(okbar,ok) "
            << io::pretty(report.contradiction->actual) << "\n";
        out << "counterfactual statements responsible:";
        for (const auto& id : report.counterfactual_set) out << " " << id;
        out << "\n";
    } else {
        out << "no contradiction\n";
    }
    return 0;
}

inline int cmd_memory(const ScenarioConfig& c, std::ostream& out) {
    using memory::Agent;
    const auto psi = hardy::hardy_state();
    std::vector<std::vector<Agent>> cases;
    if (c.kept) {
        std::vector<Agent> k;
        for (const auto& a : *c.kept) k.push_back(a == "F" ? Agent::F : Agent::Fbar);
        cases = {{}, k};
    } else {
        cases = {{}, {Agent::F}, {Agent::Fbar}, {Agent::F, Agent::Fbar}};
    }

    std::vector<io::RunSummary> runs;
    for (const auto& kept : cases) {
        if (kept.empty())
            runs.push_back(io::summarize(memory::erase_all(psi, {Agent::Fbar, Agent::F})));
        else
            runs.push_back(io::summarize(memory::record_and_keep(psi, kept)));
    }
    for (const auto& r : runs)
        for (const auto& [name, t] : r.tables) check_sums(t);

    if (c.format == Format::Json) {
        Json j;
        j["runs"] = Json::array();
        for (const auto& r : runs) j["runs"].push_back(io::to_json(r));
        out << j.dump(2) << "\n";
        return 0;
    }
    const std::string wbarw = hardy::kWbarW.name();
    out << "(Wbar,W) table per memory treatment\n";
    out << "  " << std::left << std::setw(14) << "outcome";
    for (const auto& r : runs) {
        std::string head = r.coherent ? "erased" : "kept";
        std::string who;
        for (const auto& a : r.coherent ? r.erased : r.agents) who += (who.empty() ? "" : ",") + a;
        if (r.coherent && who.empty()) head = "pristine";
        out << std::setw(28) << (head + (who.empty() ? "" : " {" + who + "}"));
    }
    out << "\n";
    for (std::size_t i = 0; i < 4; ++i) {
        std::string key;
        for (const auto& [name, t] : runs.front().tables)
            if (name == wbarw) key = t.key(i);
        out << "  " << std::setw(14) << key;
        for (const auto& r : runs)
            for (const auto& [name, t] : r.tables)
                if (name == wbarw) out << std::setw(28) << io::pretty(t[i]);
        out << "\n";
    }
    return 0;
}

inline int cmd_chsh(const ScenarioConfig& c, std::ostream& out) {
    const bell::AngleQuad quad = c.quad.value_or(bell::optimal_quad());
    Json j;
    if (c.scan || !c.erased_vs_kept) {
        const auto model = bell::LHVModel::observer_independent_facts();
        const bell::CorrelationFn lhv = [&](double a, double b) {
            return bell::lhv_correlation(model, a, b);
        };
        const double s_quantum = bell::chsh(bell::quantum_correlation, quad);
        const double s_lhv = bell::chsh(lhv, quad);
        if (c.format == Format::Json) {
            j["quad"] = io::to_json(quad);
            j["S_quantum"] = s_quantum;
            j["S_lhv"] = s_lhv;
        } else {
            out << "quad (a, a', b, b') = (" << quad.a << ", " << quad.a_prime << ", " << quad.b
                << ", " << quad.b_prime << ")\n";
            out << "  S quantum " << std::setprecision(9) << s_quantum << "   (Tsirelson 2*sqrt2 = "
                << bell::kTsirelson << ")\n";
            out << "  S lhv     " << s_lhv << "   (local bound 2)\n";
        }
        if (c.scan) {
            const auto report = bell::chsh_report(quad, c.resolution);
            const auto qscan = bell::grid_scan(bell::quantum_correlation, c.resolution);
            if (c.format == Format::Json) {
                j = io::to_json(report);
                j["S_quantum_max"] = qscan.max;
            } else {
                out << "scan over a " << c.resolution << "^4 grid with local refinement\n";
                out << "  max S lhv     " << report.S_lhv_max << "\n";
                out << "  max S quantum " << qscan.max << "\n";
            }
        }
    }
    if (c.erased_vs_kept) {
        const auto r = bell::erased_vs_kept_chsh(c.resolution);
        if (c.format == Format::Json) {
            j["erased_vs_kept"] = io::to_json(r);
        } else {
            out << "friends' records erased: S = " << std::setprecision(9) << r.S_erased << "\n";
            out << "friends' records kept:   max S = " << r.S_kept_max
                << ", E(0,0) = " << r.kept_aligned
                << ", max |E_kept - E_lhv| = " << r.kept_vs_lhv_gap << "\n";
        }
    }
    if (c.format == Format::Json) out << j.dump(2) << "\n";
    return 0;
}

}  // namespace detail

inline int dispatch(const ScenarioConfig& c, std::ostream& out) {
    validate(c);
    if (c.scenario == "contexts") return detail::cmd_contexts(c, out);
    if (c.scenario == "bohm") return detail::cmd_bohm(c, out);
    if (c.scenario == "agents") return detail::cmd_agents(c, out);
    if (c.scenario == "memory") return detail::cmd_memory(c, out);
    return detail::cmd_chsh(c, out);
}

/// Parses argv-style arguments (without the program name) and runs.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hardy / Wigner's-friend simulator", "hardysim"};
    app.require_subcommand(0, 1);

    std::string format = "table";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    std::string config_path;
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"table", "json"}));
    app.add_option("--seed", seed, "Seed for sampling");
    app.add_option("--samples", samples, "Number of sampled trajectories");
    app.add_option("--config", config_path, "JSON scenario file")->check(CLI::ExistingFile);

    auto* contexts = app.add_subcommand("contexts", "Outcome tables of the four contexts");

    std::string foliation = "both", coupling = "monotone";
    auto* bohm_cmd = app.add_subcommand("bohm", "Hidden-variable trajectory sets");
    bohm_cmd->add_option("--foliation", foliation, "F, Fprime or both");
    bohm_cmd->add_option("--coupling", coupling, "monotone or independent");

    bool forbid = false;
    auto* agents = app.add_subcommand("agents", "Replay of the agents' reasoning");
    agents->add_flag("--forbid-counterfactual", forbid, "Only context-valid statements may compose");

    std::vector<std::string> keep;
    auto* memory_cmd = app.add_subcommand("memory", "Erased versus kept friend memories");
    memory_cmd->add_option("--keep", keep, "Agents whose records are kept (F, Fbar)")->delimiter(',');

    std::string quad_text;
    bool scan = false, evk = false;
    std::size_t resolution = 20;
    auto* chsh_cmd = app.add_subcommand("chsh", "CHSH values, quantum versus local model");
    chsh_cmd->add_option("--quad", quad_text, "a,a',b,b' in radians");
    chsh_cmd->add_flag("--scan", scan, "Grid scan for the maximum S");
    chsh_cmd->add_flag("--erased-vs-kept", evk, "Compare erased and kept friend records");
    chsh_cmd->add_option("--resolution", resolution, "Grid points per angle");

    // globals are accepted after the subcommand too
    for (auto* sub : {contexts, bohm_cmd, agents, memory_cmd, chsh_cmd}) {
        sub->fallthrough();
    }

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);

        ScenarioConfig c;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            Json j;
            try {
                j = Json::parse(in);
            } catch (const Json::exception& e) {
                throw UsageError(std::string("bad config: ") + e.what());
            }
            c = config_from_json(j);
        }
        for (auto* sub : app.get_subcommands()) {
            if (!c.scenario.empty() && c.scenario != sub->get_name())
                throw UsageError("subcommand does not match config scenario");
            c.scenario = sub->get_name();
        }
        if (c.scenario.empty()) throw UsageError("a subcommand is required\n" + app.help());

        if (app.count("--format")) c.format = format == "json" ? Format::Json : Format::Table;
        if (seed) c.seed = seed;
        if (samples) c.samples = samples;
        if (bohm_cmd->count("--foliation")) c.foliation = foliation;
        if (bohm_cmd->count("--coupling")) c.coupling = coupling;
        if (forbid) c.forbid_counterfactual = true;
        if (memory_cmd->count("--keep")) c.kept = keep;
        if (chsh_cmd->count("--quad")) c.quad = parse_quad(quad_text);
        if (scan) c.scan = true;
        if (evk) c.erased_vs_kept = true;
        if (chsh_cmd->count("--resolution")) c.resolution = resolution;
        return dispatch(c, out);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return 2;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const InvariantError& e) {
        err << "invariant violation: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace hardysim::cli
