// Command-line front end: trains the actor-critic comparison conditions,
// runs the synthetic-stream tracking benchmark, and aggregates run output.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tsoft/harness.hpp"

namespace {

using namespace tsoft;

UpdateRule rule_from_flags(const std::string& kind, double tau, double nu,
                           double sigma_sq_init, int period) {
    switch (rule_kind_from_string(kind)) {
    case UpdateRule::Kind::none: return UpdateRule::none();
    case UpdateRule::Kind::hard: return UpdateRule::hard(period);
    case UpdateRule::Kind::soft: return UpdateRule::soft(tau);
    case UpdateRule::Kind::tsoft: return UpdateRule::tsoft(tau, nu, sigma_sq_init);
    }
    return UpdateRule::none();
}

// "none" | "hard:PERIOD" | "soft:TAU" | "tsoft:TAU:NU[:SIGMA_SQ_INIT]"
UpdateRule rule_from_spec(const std::string& spec) {
    const auto parts = split(spec, ':');
    if (parts[0] == "none" && parts.size() == 1) return UpdateRule::none();
    if (parts[0] == "hard" && parts.size() == 2)
        return UpdateRule::hard(static_cast<int>(parse_long(parts[1])));
    if (parts[0] == "soft" && parts.size() == 2)
        return UpdateRule::soft(parse_double(parts[1]));
    if (parts[0] == "tsoft" && (parts.size() == 3 || parts.size() == 4))
        return UpdateRule::tsoft(parse_double(parts[1]), parse_double(parts[2]),
                                 parts.size() == 4 ? parse_double(parts[3]) : 1e8);
    throw ParameterError("bad rule spec: '" + spec + "'");
}

std::vector<int> parse_hidden(const std::string& s) {
    std::vector<int> hidden;
    for (const auto& tok : split(s, ','))
        if (!trim(tok).empty()) hidden.push_back(static_cast<int>(parse_long(trim(tok))));
    return hidden;
}

int cmd_train(const ExperimentConfig& cfg) {
    const auto records = run_experiment(cfg);
    std::cout << "condition " << condition_string(cfg) << ": " << records.size()
              << " seeds -> " << cfg.out_dir << "\n";
    const auto stats = diff_report([&] {
        std::vector<SummaryRow> rows;
        for (const auto& r : records)
            rows.push_back(SummaryRow{r.condition, r.seed, r.score, r.final_diff});
        return rows;
    }());
    for (const auto& s : stats)
        std::cout << "  median score " << format_double(s.median_score)
                  << ", mean final diff " << format_double(s.mean_final_diff) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"t-soft target-network update experiments"};
    app.require_subcommand(1);

    // train ------------------------------------------------------------
    auto* train = app.add_subcommand("train", "train one condition over a seed range");
    std::string env = "balance", rule_kind, seeds_text = "0..19", out_dir, config_file;
    std::string hidden_text = "32,32", activation_text = "tanh";
    double tau = 0.3, nu = tsoft::kInfinity, sigma_init = 1e8;
    double gamma = 0.99, alpha = 5e-4, grad_clip = 0.0;
    int episodes = 0, period = 100, eval_episodes = 50, diag_every = 0, jobs = 0;
    bool stochastic_eval = false, sigma_gate = false;

    train->add_option("--env", env, "balance | swingup")
        ->check(CLI::IsMember({"balance", "swingup"}));
    train->add_option("--rule", rule_kind, "none | hard | soft | tsoft")
        ->check(CLI::IsMember({"none", "hard", "soft", "tsoft"}));
    train->add_option("--tau", tau, "nominal smoothness (soft, tsoft)");
    train->add_option("--nu", nu, "degrees of freedom (tsoft); inf allowed");
    train->add_option("--sigma-init", sigma_init, "initial per-subset scale (tsoft)");
    train->add_option("--period", period, "copy period in steps (hard)");
    train->add_option("--seeds", seeds_text, "a..b inclusive, or comma list");
    train->add_option("--episodes", episodes, "training episodes (default: per-task)");
    train->add_option("--out", out_dir, "output directory");
    train->add_option("--gamma", gamma, "discount factor");
    train->add_option("--alpha", alpha, "SGD learning rate");
    train->add_option("--grad-clip", grad_clip, "gradient norm clip (0 = off)");
    train->add_option("--hidden", hidden_text, "hidden layer sizes, comma list");
    train->add_option("--activation", activation_text, "tanh | swish")
        ->check(CLI::IsMember({"tanh", "swish"}));
    train->add_option("--eval-episodes", eval_episodes, "episodes in the final evaluation");
    train->add_flag("--stochastic-eval", stochastic_eval, "sample actions during evaluation");
    train->add_flag("--sigma-gate", sigma_gate, "advance the scale EMA with the gated step");
    train->add_option("--diag-every", diag_every, "record t-soft diagnostics every N steps");
    train->add_option("--jobs", jobs, "worker threads (0 = hardware)");
    train->add_option("--config", config_file, "key=value config file; flags override");

    // bench-stream -------------------------------------------------------
    auto* bench = app.add_subcommand("bench-stream",
                                     "tracking error of update rules on a noisy ramp");
    StreamSpec stream;
    std::string bench_rules = "soft:0.3,tsoft:0.3:1";
    std::string bench_seeds = "0..19", bench_out;
    bench->add_option("--length", stream.length, "stream length");
    bench->add_option("--ramp-slope", stream.ramp_slope, "signal slope per step");
    bench->add_option("--noise-sigma", stream.noise_sigma, "Gaussian noise scale");
    bench->add_option("--outlier-rate", stream.outlier_rate, "spike probability per step");
    bench->add_option("--outlier-scale", stream.outlier_scale,
                      "spike amplitude in noise sigmas");
    bench->add_option("--rules", bench_rules,
                      "comma list of rule specs, e.g. soft:0.3,tsoft:0.3:1");
    bench->add_option("--seeds", bench_seeds, "a..b inclusive, or comma list");
    bench->add_option("--out", bench_out, "output CSV file (default: stdout)");

    // report -------------------------------------------------------------
    auto* report = app.add_subcommand("report", "aggregate summary.csv files per condition");
    std::string report_in, report_out;
    report->add_option("--in", report_in, "directory tree containing run outputs")
        ->required();
    report->add_option("--out", report_out, "report CSV file (default: <in>/report.csv)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            ExperimentConfig cfg;
            if (!config_file.empty()) {
                std::ifstream in(config_file);
                if (!in) throw std::runtime_error("cannot open config: " + config_file);
                std::ostringstream ss;
                ss << in.rdbuf();
                cfg = config_from_kv(ss.str());
            }
            if (train->count("--env") || config_file.empty()) cfg.env = env;
            if (train->count("--rule"))
                cfg.rule = rule_from_flags(rule_kind, tau, nu, sigma_init, period);
            else if (config_file.empty())
                throw ParameterError("train: --rule is required (or use --config)");
            if (train->count("--gamma") || config_file.empty()) cfg.gamma = gamma;
            if (train->count("--alpha") || config_file.empty()) cfg.alpha = alpha;
            if (train->count("--grad-clip"))
                cfg.grad_clip = grad_clip > 0.0 ? std::optional<double>(grad_clip)
                                                : std::nullopt;
            if (train->count("--episodes")) cfg.episodes = episodes;
            else if (config_file.empty()) cfg.episodes = (cfg.env == "swingup") ? 300 : 150;
            if (train->count("--seeds") || config_file.empty())
                cfg.seeds = parse_seeds(seeds_text);
            if (train->count("--hidden") || config_file.empty())
                cfg.hidden = parse_hidden(hidden_text);
            if (train->count("--activation") || config_file.empty())
                cfg.activation = activation_from_string(activation_text);
            if (train->count("--eval-episodes") || config_file.empty())
                cfg.eval_episodes = eval_episodes;
            if (train->count("--stochastic-eval")) cfg.greedy_eval = !stochastic_eval;
            if (train->count("--sigma-gate")) cfg.sigma_update_uses_gate = sigma_gate;
            if (train->count("--diag-every") || config_file.empty())
                cfg.diag_every = diag_every;
            if (train->count("--jobs") || config_file.empty()) cfg.jobs = jobs;
            if (train->count("--out") || config_file.empty()) cfg.out_dir = out_dir;
            return cmd_train(cfg);
        }
        if (*bench) {
            std::vector<UpdateRule> rules;
            for (const auto& spec : split(bench_rules, ','))
                rules.push_back(rule_from_spec(std::string(trim(spec))));
            const auto results =
                synthetic_benchmark(stream, rules, parse_seeds(bench_seeds));
            const std::string csv = bench_to_csv(results);
            if (bench_out.empty())
                std::cout << csv;
            else
                write_text_file(bench_out, csv);
            return 0;
        }
        if (*report) {
            const auto rows = read_summaries_under(report_in);
            const auto stats = diff_report(rows);
            const std::string csv = report_to_csv(stats);
            const std::string out_path =
                report_out.empty() ? (std::filesystem::path(report_in) / "report.csv").string()
                                   : report_out;
            write_text_file(out_path, csv);
            std::cout << csv;
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
