#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tsoft/envs.hpp"
#include "tsoft/errors.hpp"
#include "tsoft/rl.hpp"
#include "tsoft/target_update.hpp"
#include "tsoft/text.hpp"

namespace tsoft {

// ---------------------------------------------------------------------------
// small numeric helpers
// ---------------------------------------------------------------------------

inline double median(std::vector<double> v) {
    if (v.empty()) throw ParameterError("median: empty input");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(const std::vector<double>& v) {
    if (v.empty()) throw ParameterError("mean: empty input");
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

// sample standard deviation; 0 for a single observation
inline double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

// Run fn(0..n-1) on a small worker pool. Results must be written to
// pre-sized slots so output order is independent of scheduling.
template <class Fn>
void parallel_for_index(std::size_t n, unsigned jobs, Fn&& fn) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// experiment configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    std::string env = "balance";
    UpdateRule rule;
    double gamma = 0.99;
    double alpha = 5e-4;
    std::optional<double> grad_clip;
    int episodes = 150;
    std::vector<std::uint64_t> seeds;
    std::string out_dir;
    std::vector<int> hidden = {32, 32};
    Activation activation = Activation::tanh;
    int eval_episodes = 50;
    bool greedy_eval = true; // mean actions during evaluation
    bool sigma_update_uses_gate = false;
    int diag_every = 0; // 0 = no per-step diagnostics file
    int jobs = 0;       // 0 = hardware concurrency

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline void validate(const ExperimentConfig& cfg) {
    if (cfg.env != "balance" && cfg.env != "swingup")
        throw ParameterError("unknown environment: '" + cfg.env + "'");
    if (cfg.seeds.empty()) throw ParameterError("config: seeds must be non-empty");
    if (cfg.episodes < 1) throw ParameterError("config: episodes must be >= 1");
    if (cfg.eval_episodes < 1) throw ParameterError("config: eval_episodes must be >= 1");
    if (!(cfg.gamma >= 0.0) || cfg.gamma >= 1.0)
        throw ParameterError("config: gamma must be in [0,1)");
    if (!(cfg.alpha > 0.0)) throw ParameterError("config: alpha must be > 0");
    if (cfg.hidden.empty()) throw ParameterError("config: hidden layer list must be non-empty");
    for (int h : cfg.hidden)
        if (h < 1) throw ParameterError("config: hidden sizes must be positive");
    if (cfg.diag_every < 0) throw ParameterError("config: diag_every must be >= 0");
    if (cfg.jobs < 0) throw ParameterError("config: jobs must be >= 0");
    // re-run the rule validations
    switch (cfg.rule.kind) {
    case UpdateRule::Kind::none: break;
    case UpdateRule::Kind::hard: (void)UpdateRule::hard(cfg.rule.period); break;
    case UpdateRule::Kind::soft: (void)UpdateRule::soft(cfg.rule.tau); break;
    case UpdateRule::Kind::tsoft:
        (void)UpdateRule::tsoft(cfg.rule.tau, cfg.rule.nu, cfg.rule.sigma_sq_init);
        break;
    }
}

// "env:rule", the label under which runs are aggregated.
inline std::string condition_string(const ExperimentConfig& cfg) {
    return cfg.env + ":" + rule_to_string(cfg.rule);
}

inline std::string rule_kind_to_string(UpdateRule::Kind k) {
    switch (k) {
    case UpdateRule::Kind::none: return "none";
    case UpdateRule::Kind::hard: return "hard";
    case UpdateRule::Kind::soft: return "soft";
    case UpdateRule::Kind::tsoft: return "tsoft";
    }
    return "none";
}

inline UpdateRule::Kind rule_kind_from_string(std::string_view s) {
    if (s == "none") return UpdateRule::Kind::none;
    if (s == "hard") return UpdateRule::Kind::hard;
    if (s == "soft") return UpdateRule::Kind::soft;
    if (s == "tsoft") return UpdateRule::Kind::tsoft;
    throw ParameterError("unknown rule: '" + std::string(s) + "'");
}

// Flat key=value form; writing then parsing reproduces the exact config.
inline std::string config_to_kv(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "env=" << cfg.env << '\n';
    out << "rule=" << rule_kind_to_string(cfg.rule.kind) << '\n';
    out << "period=" << cfg.rule.period << '\n';
    out << "tau=" << format_double(cfg.rule.tau) << '\n';
    out << "nu=" << format_double(cfg.rule.nu) << '\n';
    out << "sigma_sq_init=" << format_double(cfg.rule.sigma_sq_init) << '\n';
    out << "gamma=" << format_double(cfg.gamma) << '\n';
    out << "alpha=" << format_double(cfg.alpha) << '\n';
    out << "grad_clip=" << (cfg.grad_clip ? format_double(*cfg.grad_clip) : "none") << '\n';
    out << "episodes=" << cfg.episodes << '\n';
    out << "seeds=";
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
        out << (i ? "," : "") << cfg.seeds[i];
    out << '\n';
    out << "hidden=";
    for (std::size_t i = 0; i < cfg.hidden.size(); ++i)
        out << (i ? "," : "") << cfg.hidden[i];
    out << '\n';
    out << "activation=" << activation_to_string(cfg.activation) << '\n';
    out << "eval_episodes=" << cfg.eval_episodes << '\n';
    out << "greedy_eval=" << (cfg.greedy_eval ? 1 : 0) << '\n';
    out << "sigma_gate=" << (cfg.sigma_update_uses_gate ? 1 : 0) << '\n';
    out << "diag_every=" << cfg.diag_every << '\n';
    out << "jobs=" << cfg.jobs << '\n';
    out << "out_dir=" << cfg.out_dir << '\n';
    return out.str();
}

inline ExperimentConfig config_from_kv(std::string_view text) {
    ExperimentConfig cfg;
    cfg.seeds.clear();
    for (const auto& raw_line : split(text, '\n')) {
        const std::string_view line = trim(raw_line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParameterError("config: expected key=value, got '" + std::string(line) + "'");
        const std::string key{trim(line.substr(0, eq))};
        const std::string value{trim(line.substr(eq + 1))};

        if (key == "env") cfg.env = value;
        else if (key == "rule") cfg.rule.kind = rule_kind_from_string(value);
        else if (key == "period") cfg.rule.period = static_cast<int>(parse_long(value));
        else if (key == "tau") cfg.rule.tau = parse_double(value);
        else if (key == "nu") cfg.rule.nu = parse_double(value);
        else if (key == "sigma_sq_init") cfg.rule.sigma_sq_init = parse_double(value);
        else if (key == "gamma") cfg.gamma = parse_double(value);
        else if (key == "alpha") cfg.alpha = parse_double(value);
        else if (key == "grad_clip")
            cfg.grad_clip = value == "none" ? std::nullopt
                                            : std::optional<double>(parse_double(value));
        else if (key == "episodes") cfg.episodes = static_cast<int>(parse_long(value));
        else if (key == "seeds") {
            cfg.seeds.clear();
            for (const auto& tok : split(value, ','))
                if (!trim(tok).empty())
                    cfg.seeds.push_back(static_cast<std::uint64_t>(parse_long(trim(tok))));
        } else if (key == "hidden") {
            cfg.hidden.clear();
            for (const auto& tok : split(value, ','))
                if (!trim(tok).empty())
                    cfg.hidden.push_back(static_cast<int>(parse_long(trim(tok))));
        } else if (key == "activation") cfg.activation = activation_from_string(value);
        else if (key == "eval_episodes") cfg.eval_episodes = static_cast<int>(parse_long(value));
        else if (key == "greedy_eval") cfg.greedy_eval = parse_long(value) != 0;
        else if (key == "sigma_gate") cfg.sigma_update_uses_gate = parse_long(value) != 0;
        else if (key == "diag_every") cfg.diag_every = static_cast<int>(parse_long(value));
        else if (key == "jobs") cfg.jobs = static_cast<int>(parse_long(value));
        else if (key == "out_dir") cfg.out_dir = value;
        else throw ParameterError("config: unknown key '" + key + "'");
    }
    return cfg;
}

// "a..b" (inclusive) or a comma-separated list.
inline std::vector<std::uint64_t> parse_seeds(std::string_view text) {
    std::vector<std::uint64_t> seeds;
    const auto range = std::string_view(text).find("..");
    if (range != std::string_view::npos) {
        const long long a = parse_long(trim(text.substr(0, range)));
        const long long b = parse_long(trim(text.substr(range + 2)));
        if (a < 0 || b < a) throw ParameterError("bad seed range: '" + std::string(text) + "'");
        for (long long s = a; s <= b; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
        return seeds;
    }
    for (const auto& tok : split(text, ','))
        if (!trim(tok).empty()) seeds.push_back(static_cast<std::uint64_t>(parse_long(trim(tok))));
    if (seeds.empty()) throw ParameterError("no seeds in '" + std::string(text) + "'");
    return seeds;
}

// ---------------------------------------------------------------------------
// one trial (one seed)
// ---------------------------------------------------------------------------

struct RunRecord {
    std::uint64_t seed = 0;
    std::string condition;
    std::vector<double> returns;  // per training episode
    std::vector<int> steps;       // per training episode
    std::vector<double> diffs;    // mean_abs_diff after each training episode
    std::vector<double> eval_returns;
    double score = 0.0;      // median of eval returns
    double final_diff = 0.0; // mean_abs_diff after training
};

struct TrialResult {
    RunRecord record;
    std::string curves_csv;
    std::string diag_csv; // empty unless t-soft diagnostics were recorded
    ParamSet critic_params;
    ParamSet target_params;
};

namespace detail {

// seed streams within one trial
inline constexpr std::uint64_t kStreamAgent = 0;
inline constexpr std::uint64_t kStreamActions = 1;
inline constexpr std::uint64_t kStreamEval = 2;
inline constexpr std::uint64_t kStreamEpisodeBase = 100;
inline constexpr std::uint64_t kStreamEvalEpisodeBase = 1000000;

inline double run_eval_episode(Env& env, const Agent& agent, std::uint64_t reset_seed,
                               Rng* sample_rng) {
    std::vector<double> s = env.reset(reset_seed);
    double ret = 0.0;
    for (;;) {
        const std::vector<double> a =
            sample_rng ? policy_sample(agent.policy, s, *sample_rng)
                       : policy_mean_action(agent.policy, s);
        const StepResult sr = env.step(a);
        ret += sr.r;
        s = sr.s_next;
        if (sr.terminal || sr.truncated) break;
    }
    return ret;
}

} // namespace detail

inline TrialResult run_single_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
    Env env(cfg.env);
    const EnvSpec spec = env.spec();

    AgentConfig agent_cfg;
    agent_cfg.hidden = cfg.hidden;
    agent_cfg.activation = cfg.activation;
    agent_cfg.gamma = cfg.gamma;
    agent_cfg.alpha = cfg.alpha;
    agent_cfg.grad_clip = cfg.grad_clip;
    agent_cfg.rule = cfg.rule;
    agent_cfg.sigma_update_uses_gate = cfg.sigma_update_uses_gate;
    Agent agent = make_agent(spec.state_dim, spec.action_dim, agent_cfg,
                             mix_seed(seed, detail::kStreamAgent));
    Rng action_rng(mix_seed(seed, detail::kStreamActions));

    TrialResult out;
    out.record.seed = seed;
    out.record.condition = condition_string(cfg);

    std::ostringstream curves;
    curves << "episode,return,steps,mean_abs_diff\n";
    std::ostringstream diag;
    const bool record_diag =
        cfg.rule.kind == UpdateRule::Kind::tsoft && cfg.diag_every > 0;
    if (record_diag) diag << "step,subset,delta_sq,w,tau_i\n";

    long global_step = 0;
    for (int e = 0; e < cfg.episodes; ++e) {
        std::vector<double> s = env.reset(mix_seed(seed, detail::kStreamEpisodeBase + e));
        double ret = 0.0;
        int t = 0;
        for (;;) {
            const std::vector<double> a = policy_sample(agent.policy, s, action_rng);
            const StepResult sr = env.step(a);
            const Transition tr{s, a, sr.r, sr.s_next, sr.terminal};
            const StepDiag d = agent_step(agent, tr);
            ++global_step;
            ++t;
            ret += sr.r;
            if (record_diag && global_step % cfg.diag_every == 0)
                for (std::size_t i = 0; i < d.tsoft.size(); ++i)
                    diag << global_step << ',' << agent.critic.params.subsets[i].name << ','
                         << format_double(d.tsoft[i].delta_sq) << ','
                         << format_double(d.tsoft[i].weight) << ','
                         << format_double(d.tsoft[i].gate) << '\n';
            s = sr.s_next;
            if (sr.terminal || sr.truncated) break;
        }
        const double diff = mean_abs_diff(agent.critic.params, agent.target);
        out.record.returns.push_back(ret);
        out.record.steps.push_back(t);
        out.record.diffs.push_back(diff);
        curves << (e + 1) << ',' << format_double(ret) << ',' << t << ','
               << format_double(diff) << '\n';
    }

    out.record.final_diff = mean_abs_diff(agent.critic.params, agent.target);

    Rng eval_rng(mix_seed(seed, detail::kStreamEval));
    for (int j = 0; j < cfg.eval_episodes; ++j) {
        const std::uint64_t rs = mix_seed(seed, detail::kStreamEvalEpisodeBase + j);
        out.record.eval_returns.push_back(detail::run_eval_episode(
            env, agent, rs, cfg.greedy_eval ? nullptr : &eval_rng));
    }
    out.record.score = median(out.record.eval_returns);

    out.curves_csv = curves.str();
    if (record_diag) out.diag_csv = diag.str();
    out.critic_params = std::move(agent.critic.params);
    out.target_params = std::move(agent.target);
    return out;
}

// ---------------------------------------------------------------------------
// experiment runner
// ---------------------------------------------------------------------------

inline std::string summary_to_csv(const std::vector<RunRecord>& records) {
    std::ostringstream out;
    out << "condition,seed,score,final_diff\n";
    for (const auto& r : records)
        out << r.condition << ',' << r.seed << ',' << format_double(r.score) << ','
            << format_double(r.final_diff) << '\n';
    return out.str();
}

// Trains every seed (worker pool, merged in seed order) and persists
// curves_<seed>.csv, diag_<seed>.csv when recorded, final critic/target
// snapshots, summary.csv and config.txt.
inline std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    if (cfg.out_dir.empty()) throw ParameterError("config: out_dir must be set");

    const std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    write_text_file(dir / "config.txt", config_to_kv(cfg));

    std::vector<TrialResult> trials(cfg.seeds.size());
    parallel_for_index(cfg.seeds.size(), static_cast<unsigned>(cfg.jobs),
                       [&](std::size_t i) { trials[i] = run_single_trial(cfg, cfg.seeds[i]); });

    std::vector<RunRecord> records;
    records.reserve(trials.size());
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const std::string seed_str = std::to_string(cfg.seeds[i]);
        write_text_file(dir / ("curves_" + seed_str + ".csv"), trials[i].curves_csv);
        if (!trials[i].diag_csv.empty())
            write_text_file(dir / ("diag_" + seed_str + ".csv"), trials[i].diag_csv);
        save_params(dir / ("critic_" + seed_str + ".params"), trials[i].critic_params);
        save_params(dir / ("target_" + seed_str + ".params"), trials[i].target_params);
        records.push_back(std::move(trials[i].record));
    }
    write_text_file(dir / "summary.csv", summary_to_csv(records));
    return records;
}

// ---------------------------------------------------------------------------
// synthetic stream benchmark
// ---------------------------------------------------------------------------

// A slow ramp with additive Gaussian noise; a fixed fraction of steps is
// replaced by large symmetric spikes.
struct StreamSpec {
    double ramp_slope = 0.01;
    double noise_sigma = 1.0;
    double outlier_rate = 0.01;
    double outlier_scale = 50.0; // spike amplitude in units of noise_sigma
    int length = 2000;

    friend bool operator==(const StreamSpec&, const StreamSpec&) = default;
};

struct TrackResult {
    std::string rule;
    std::uint64_t seed = 0;
    double tracking_error = 0.0; // time-averaged |phi - signal|
};

inline void validate(const StreamSpec& spec) {
    if (spec.length < 1) throw ParameterError("stream: length must be >= 1");
    if (!(spec.noise_sigma >= 0.0)) throw ParameterError("stream: noise_sigma must be >= 0");
    if (!(spec.outlier_rate >= 0.0) || spec.outlier_rate > 1.0)
        throw ParameterError("stream: outlier_rate must be in [0,1]");
    if (!(spec.outlier_scale >= 0.0)) throw ParameterError("stream: outlier_scale must be >= 0");
    if (!std::isfinite(spec.ramp_slope)) throw ParameterError("stream: bad ramp_slope");
}

// Tracks the noiseless ramp with a scalar target "network" driven by each
// rule; every rule sees the identical stream for a given seed.
inline std::vector<TrackResult> synthetic_benchmark(const StreamSpec& spec,
                                                    const std::vector<UpdateRule>& rules,
                                                    const std::vector<std::uint64_t>& seeds) {
    validate(spec);
    if (rules.empty()) throw ParameterError("bench: rules must be non-empty");
    if (seeds.empty()) throw ParameterError("bench: seeds must be non-empty");

    std::vector<TrackResult> results;
    results.reserve(rules.size() * seeds.size());
    for (const std::uint64_t seed : seeds) {
        Rng rng(mix_seed(seed, 7));
        std::vector<double> signal(static_cast<std::size_t>(spec.length));
        std::vector<double> stream(static_cast<std::size_t>(spec.length));
        for (int t = 0; t < spec.length; ++t) {
            signal[static_cast<std::size_t>(t)] = spec.ramp_slope * (t + 1);
            double noise = spec.noise_sigma * rng.normal();
            if (rng.uniform() < spec.outlier_rate) {
                const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
                noise = sign * spec.outlier_scale * spec.noise_sigma;
            }
            stream[static_cast<std::size_t>(t)] = signal[static_cast<std::size_t>(t)] + noise;
        }

        for (const UpdateRule& rule : rules) {
            ParamSet phi{{ParamSubset{"x", {0.0}}}};
            ParamSet theta = phi;
            TSoftState state;
            if (rule.kind == UpdateRule::Kind::tsoft)
                state = make_tsoft_state(rule.tau, rule.nu, rule.sigma_sq_init, 1);
            double err_acc = 0.0;
            for (int t = 0; t < spec.length; ++t) {
                theta.subsets[0].values[0] = stream[static_cast<std::size_t>(t)];
                switch (rule.kind) {
                case UpdateRule::Kind::none: hard_update(phi, theta); break;
                case UpdateRule::Kind::hard:
                    if ((t + 1) % rule.period == 0) hard_update(phi, theta);
                    break;
                case UpdateRule::Kind::soft: soft_update(phi, theta, rule.tau); break;
                case UpdateRule::Kind::tsoft: tsoft_update(state, theta, phi); break;
                }
                err_acc += std::abs(phi.subsets[0].values[0] -
                                    signal[static_cast<std::size_t>(t)]);
            }
            results.push_back(
                TrackResult{rule_to_string(rule), seed, err_acc / spec.length});
        }
    }
    return results;
}

inline std::string bench_to_csv(const std::vector<TrackResult>& results) {
    std::ostringstream out;
    out << "rule,seed,tracking_error\n";
    for (const auto& r : results)
        out << r.rule << ',' << r.seed << ',' << format_double(r.tracking_error) << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct SummaryRow {
    std::string condition;
    std::uint64_t seed = 0;
    double score = 0.0;
    double final_diff = 0.0;
};

inline std::vector<SummaryRow> parse_summary_csv(std::string_view text) {
    const auto lines = split(text, '\n');
    if (lines.empty() || trim(lines[0]) != "condition,seed,score,final_diff")
        throw ParameterError("summary: bad header");
    std::vector<SummaryRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto fields = split(trim(lines[i]), ',');
        if (fields.size() != 4)
            throw ParameterError("summary: bad row '" + lines[i] + "'");
        rows.push_back(SummaryRow{fields[0], static_cast<std::uint64_t>(parse_long(fields[1])),
                                  parse_double(fields[2]), parse_double(fields[3])});
    }
    return rows;
}

inline std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_summary_csv(ss.str());
}

// All summary.csv files under a directory tree, in sorted path order.
inline std::vector<SummaryRow> read_summaries_under(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().filename() == "summary.csv")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<SummaryRow> rows;
    for (const auto& f : files) {
        auto r = read_summary_csv(f);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    return rows;
}

struct ConditionStats {
    std::string condition;
    int n = 0;
    double mean_final_diff = 0.0;
    double sd_final_diff = 0.0;
    double mean_score = 0.0;
    double median_score = 0.0;
};

// Per-condition aggregate of the final main-vs-target differences (and the
// evaluation scores, for convenience). Conditions keep first-seen order.
inline std::vector<ConditionStats> diff_report(const std::vector<SummaryRow>& rows) {
    if (rows.empty()) throw ParameterError("diff_report: no summary rows");
    std::vector<std::string> order;
    std::map<std::string, std::vector<const SummaryRow*>> by_condition;
    for (const auto& r : rows) {
        auto [it, inserted] = by_condition.try_emplace(r.condition);
        if (inserted) order.push_back(r.condition);
        it->second.push_back(&r);
    }
    std::vector<ConditionStats> stats;
    for (const auto& cond : order) {
        std::vector<double> diffs, scores;
        for (const SummaryRow* r : by_condition[cond]) {
            diffs.push_back(r->final_diff);
            scores.push_back(r->score);
        }
        stats.push_back(ConditionStats{cond, static_cast<int>(diffs.size()), mean(diffs),
                                       sample_sd(diffs), mean(scores), median(scores)});
    }
    return stats;
}

inline std::string report_to_csv(const std::vector<ConditionStats>& stats) {
    std::ostringstream out;
    out << "condition,n,mean_final_diff,sd_final_diff,mean_score,median_score\n";
    for (const auto& s : stats)
        out << s.condition << ',' << s.n << ',' << format_double(s.mean_final_diff) << ','
            << format_double(s.sd_final_diff) << ',' << format_double(s.mean_score) << ','
            << format_double(s.median_score) << '\n';
    return out.str();
}

} // namespace tsoft
