#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pomdp_ltl/bpi.hpp"
#include "pomdp_ltl/chain.hpp"
#include "pomdp_ltl/controller.hpp"
#include "pomdp_ltl/harness.hpp"
#include "pomdp_ltl/model.hpp"
#include "pomdp_ltl/product.hpp"
#include "pomdp_ltl/rabin.hpp"

namespace {

using namespace pomdp_ltl;

struct CommonArgs {
    std::string model_file;
    std::string dra_file;
    std::string builtin;
    bool prune = true;
};

void add_common(CLI::App* cmd, CommonArgs* args, bool need_model = true) {
    auto* m = cmd->add_option("--model", args->model_file, "labeled POMDP file");
    if (need_model) m->required();
    cmd->add_option("--dra", args->dra_file, "Rabin automaton file");
    cmd->add_option("--builtin", args->builtin,
                    "builtin automaton name (case1 = eventually-always b & never c, "
                    "case2 = infinitely-often a & b, never c)");
    cmd->add_flag("--prune,!--no-prune", args->prune,
                  "drop unreachable product states (default on)");
}

void add_bpi(CLI::App* cmd, bpi::BpiConfig* cfg) {
    cmd->add_option("--n-max", cfg->n_max, "I-state budget");
    cmd->add_option("--n-new", cfg->n_new, "I-states added per escape step");
    cmd->add_option("--beta", cfg->beta, "discount factor");
    cmd->add_option("--eps-feas", cfg->eps_feas, "feasibility residual bound");
    cmd->add_option("--eps-improve", cfg->eps_improve, "improvement threshold");
    cmd->add_option("--max-iterations", cfg->max_iterations, "outer iteration cap");
    cmd->add_option("--rabin-index", cfg->rabin_index, "acceptance pair index");
    cmd->add_option("--bilinear-cap", cfg->bilinear_max_products,
                    "product-count cap for the relaxed improvement program");
}

rabin::Dra load_dra(const CommonArgs& args) {
    if (!args.builtin.empty()) return rabin::builtin_dra(args.builtin);
    if (args.dra_file.empty())
        throw CLI::ValidationError("--dra or --builtin is required");
    return rabin::parse_dra_file(args.dra_file);
}

void write_or_print(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

controller::Sfsc load_sfsc(const std::string& path, const model::LabeledPomdp& m) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return controller::parse_sfsc(in, m.actions, m.observations);
}

int cmd_validate(const CommonArgs& args) {
    model::LabeledPomdp m = model::parse_pomdp_file(args.model_file);
    auto violations = model::validate_pomdp(m);
    for (const auto& v : violations)
        std::cout << v.where << ": " << v.message << " (deviation "
                  << format_double(v.deviation) << ")\n";
    if (!args.dra_file.empty() || !args.builtin.empty()) {
        rabin::Dra dra = load_dra(args);
        for (const auto& problem : rabin::validate_dra(dra))
            std::cout << "dra: " << problem << "\n";
    }
    if (violations.empty()) std::cout << "model ok: " << m.n_states() << " states\n";
    return violations.empty() ? 0 : 1;
}

int cmd_product(const CommonArgs& args, const std::string& out) {
    model::LabeledPomdp m = model::parse_pomdp_file(args.model_file);
    product::ProductPomdp p = product::build_product(m, load_dra(args), args.prune);
    write_or_print(out, product::serialize_product(p));
    return 0;
}

int cmd_analyze(const CommonArgs& args, const std::string& sfsc_file) {
    model::LabeledPomdp m = model::parse_pomdp_file(args.model_file);
    product::ProductPomdp p = product::build_product(m, load_dra(args), args.prune);
    controller::Sfsc c = load_sfsc(sfsc_file, m);
    chain::GlobalChain plain =
        chain::build_global_chain(p, c, chain::GlobalChain::Kind::plain);
    chain::FeasibleSetsReport rep = chain::phi_feasible_sets(plain, p);
    std::cout << "global chain: " << plain.n() << " states, "
              << rep.decomposition.classes.size() << " classes\n";
    for (size_t i = 0; i < rep.decomposition.classes.size(); ++i)
        std::cout << "  class " << i << ": " << rep.decomposition.classes[i].size()
                  << " states, "
                  << (rep.decomposition.recurrent[i] ? "recurrent" : "transient")
                  << (rep.feasible[i] ? ", objective-feasible" : "") << ", reach "
                  << format_double(rep.class_reach(static_cast<int>(i))) << "\n";
    std::cout << "satisfaction probability: " << format_double(rep.satisfaction)
              << "\n";
    bpi::BpiConfig cfg;
    bpi::FeasibilityInfo fi = bpi::feasibility_info(p, c, cfg);
    std::cout << "feasibility residual: " << format_double(fi.residual)
              << (fi.vacuous ? " (no reachable steady Repeat state)" : "") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sFSC synthesis for labeled POMDPs with Rabin objectives"};
    app.set_config("--config", "", "key=value config file");
    app.require_subcommand(1);

    CommonArgs common;
    bpi::BpiConfig bpi_cfg;
    harness::SimConfig sim_cfg;
    std::string sfsc_file, seed_file, out_file, csv_file;
    int n_tr = 1, n_ss = 1, case_id = 1, rows = -1;

    auto* validate = app.add_subcommand("validate", "check a model (and automaton)");
    add_common(validate, &common);

    auto* product_cmd = app.add_subcommand("product", "build the product POMDP");
    add_common(product_cmd, &common);
    product_cmd->add_option("-o,--out", out_file, "output file (default stdout)");

    auto* analyze = app.add_subcommand("analyze", "closed-loop chain analytics");
    add_common(analyze, &common);
    analyze->add_option("--sfsc", sfsc_file, "controller file")->required();

    auto* seed_cmd =
        app.add_subcommand("seed-controller", "search for a feasible controller");
    add_common(seed_cmd, &common);
    add_bpi(seed_cmd, &bpi_cfg);
    seed_cmd->add_option("--n-tr", n_tr, "transient I-states");
    seed_cmd->add_option("--n-ss", n_ss, "steady I-states");
    seed_cmd->add_option("-o,--out", out_file, "output controller file");

    auto* synth = app.add_subcommand("synth", "bounded policy iteration");
    add_common(synth, &common);
    add_bpi(synth, &bpi_cfg);
    synth->add_option("--seed-sfsc", seed_file, "seed controller file")->required();
    synth->add_option("-o,--out", out_file, "output controller file");
    synth->add_option("--csv", csv_file, "iteration series CSV file");

    auto* simulate = app.add_subcommand("simulate", "closed-loop Monte Carlo");
    add_common(simulate, &common);
    simulate->add_option("--sfsc", sfsc_file, "controller file")->required();
    simulate->add_option("--horizon", sim_cfg.horizon, "steps per trace");
    simulate->add_option("--traces", sim_cfg.n_traces, "number of traces");
    simulate->add_option("--rng-seed", sim_cfg.seed, "pseudorandom seed");
    simulate->add_option("--goal-cell", sim_cfg.goal_cell, "goal model state index");
    simulate->add_option("--bad-cell", sim_cfg.bad_cell, "bad model state index");
    simulate->add_option("--deadline", sim_cfg.goal_deadline, "goal deadline step");

    auto* case_study = app.add_subcommand("case-study", "grid-world benchmark runs");
    case_study->add_option("--id", case_id, "1 or 2")->required();
    case_study->add_option("--rows", rows, "grid rows (default 2 for id 1, 3 for 2)");
    add_bpi(case_study, &bpi_cfg);
    case_study->add_option("--traces", sim_cfg.n_traces, "traces per evaluation");
    case_study->add_option("--rng-seed", sim_cfg.seed, "pseudorandom seed");
    case_study->add_option("--csv", csv_file, "iteration series CSV file");
    case_study->add_option("-o,--out", out_file, "output controller file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(common);
        if (product_cmd->parsed()) return cmd_product(common, out_file);
        if (analyze->parsed()) return cmd_analyze(common, sfsc_file);
        if (seed_cmd->parsed()) {
            model::LabeledPomdp m = model::parse_pomdp_file(common.model_file);
            product::ProductPomdp p =
                product::build_product(m, load_dra(common), common.prune);
            bpi::SeedResult res =
                bpi::find_initial_controller(p, n_tr, n_ss, bpi_cfg);
            for (const auto& a : res.attempts)
                std::cout << "tried |G^tr|=" << a.n_tr << " |G^ss|=" << a.n_ss
                          << ": residual " << format_double(a.residual)
                          << ", objective " << format_double(a.objective)
                          << (a.feasible ? " (feasible)" : "") << "\n";
            if (!res.found) {
                std::cout << "no feasible controller found\n";
                return 1;
            }
            write_or_print(out_file,
                           controller::serialize_sfsc(res.sfsc, m.actions,
                                                      m.observations));
            return 0;
        }
        if (synth->parsed()) {
            model::LabeledPomdp m = model::parse_pomdp_file(common.model_file);
            product::ProductPomdp p =
                product::build_product(m, load_dra(common), common.prune);
            controller::Sfsc seed = load_sfsc(seed_file, m);
            bpi::BpiReport report = bpi::run_bpi(p, seed, bpi_cfg);
            std::cout << bpi::report_csv(report);
            std::cout << "satisfaction probability: "
                      << format_double(report.satisfaction) << "\n";
            if (!csv_file.empty()) write_or_print(csv_file, bpi::report_csv(report));
            if (!out_file.empty())
                write_or_print(out_file,
                               controller::serialize_sfsc(report.controller, m.actions,
                                                          m.observations));
            return 0;
        }
        if (simulate->parsed()) {
            model::LabeledPomdp m = model::parse_pomdp_file(common.model_file);
            rabin::Dra dra = load_dra(common);
            controller::Sfsc c = load_sfsc(sfsc_file, m);
            harness::SimStats st = harness::simulate(m, dra, c, sim_cfg);
            std::cout << "traces: " << st.n_traces << "\n"
                      << "reach goal by step " << sim_cfg.goal_deadline << ": "
                      << format_double(st.reach_goal) << "\n"
                      << "hit bad cell: " << format_double(st.hit_bad) << "\n"
                      << "Repeat tail frequency: "
                      << format_double(st.repeat_tail_freq) << "\n";
            return 0;
        }
        if (case_study->parsed()) {
            harness::CaseStudyConfig cfg;
            cfg.id = case_id;
            cfg.rows = rows;
            cfg.bpi = bpi_cfg;
            cfg.sim = sim_cfg;
            harness::CaseStudyResult res = harness::run_case_study(cfg);
            std::cout << res.series_csv;
            std::cout << "seed reach-by-" << cfg.sim.goal_deadline << ": "
                      << format_double(res.seed_stats.reach_goal) << "\n"
                      << "final reach-by-" << cfg.sim.goal_deadline << ": "
                      << format_double(res.final_stats.reach_goal) << "\n"
                      << "final Repeat tail frequency: "
                      << format_double(res.final_stats.repeat_tail_freq) << "\n"
                      << "satisfaction probability: "
                      << format_double(res.report.satisfaction) << "\n";
            if (!csv_file.empty()) write_or_print(csv_file, res.series_csv);
            if (!out_file.empty())
                write_or_print(out_file, controller::serialize_sfsc(
                                             res.report.controller, res.model.actions,
                                             res.model.observations));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
