#include "fdilab_cli/app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "fdilab/attack.hpp"
#include "fdilab/estimation.hpp"
#include "fdilab/grid_model.hpp"
#include "fdilab/linalg.hpp"
#include "fdilab/matrix_io.hpp"

#ifndef FDILAB_DATA_DIR
#define FDILAB_DATA_DIR "."
#endif

namespace fdilab::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

template <class Range>
std::string join(const Range& items, const char* sep = " ") {
    std::ostringstream out;
    bool first = true;
    for (const auto& x : items) {
        out << (first ? "" : sep) << x;
        first = false;
    }
    return out.str();
}

/// Ordered key=value file written next to each run's outputs.
class Summary {
public:
    void set(const std::string& key, const std::string& value) {
        for (auto& kv : rows_)
            if (kv.first == key) {
                kv.second = value;
                return;
            }
        rows_.emplace_back(key, value);
    }
    void set(const std::string& key, double value) { set(key, num(value)); }
    void set(const std::string& key, int value) { set(key, std::to_string(value)); }
    void set(const std::string& key, bool value) { set(key, std::string(value ? "yes" : "no")); }
    void set(const std::string& key, const char* value) { set(key, std::string(value)); }

    void write(const fs::path& path) const {
        std::ofstream f(path);
        if (!f) throw InputError("cannot write " + path.string());
        for (const auto& [k, v] : rows_) f << k << '=' << v << '\n';
    }
    void print(std::ostream& out) const {
        for (const auto& [k, v] : rows_) out << "  " << k << ": " << v << '\n';
    }

private:
    std::vector<std::pair<std::string, std::string>> rows_;
};

std::map<std::string, std::string> read_summary(const fs::path& path) {
    std::map<std::string, std::string> out;
    std::ifstream f(path);
    std::string line;
    while (std::getline(f, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory " + dir.string());
}

struct LoadedCase {
    GridCase grid;
    JacobianSet jac;
};

LoadedCase load(const CommonOptions& common) {
    LoadedCase lc;
    lc.grid = load_case(resolve_case_path(common.case_path));
    lc.jac = build_jacobian(lc.grid);
    return lc;
}

CMatrix read_measurements(const fs::path& path, const JacobianSet& jac) {
    const ComplexMatrixSeries series = read_matrix_csv(path);
    if (series.values.cols() != jac.n())
        throw InputError(path.string() + " has " + std::to_string(series.values.cols()) +
                         " channels, the case defines " + std::to_string(jac.n()));
    if (series.labels != jac.index.labels())
        throw InputError(path.string() + ": channel labels do not match the case");
    return series.values;
}

CMatrix simulate_measurements(const LoadedCase& lc, TrajectoryConfig cfg, std::uint64_t seed) {
    cfg.seed = seed;
    const CMatrix X = generate_state_trajectory(lc.grid, lc.jac, cfg);
    return measure(X, lc.jac, cfg.noise_sigma, seed);
}

std::string bdd_word(const BddReport& r) { return r.flagged ? "flagged" : "passed"; }

std::set<int> parse_controlled(const std::vector<std::string>& tokens, const JacobianSet& jac) {
    std::set<int> out;
    for (const auto& raw : tokens) {
        for (const auto& piece : split(raw, ',')) {
            const std::string tok = trim(piece);
            if (tok.empty()) continue;
            if (tok.rfind("pmu", 0) == 0) {
                BusId b = 0;
                try {
                    b = std::stoi(tok.substr(3));
                } catch (const std::exception&) {
                    throw InputError("bad controlled entry '" + tok + "'");
                }
                const auto chans = jac.index.channels_of_pmu(b);
                if (chans.empty()) throw InputError("bus " + std::to_string(b) + " has no PMU");
                out.insert(chans.begin(), chans.end());
                continue;
            }
            const auto idx = jac.index.find(Channel::parse(tok));
            if (!idx) throw InputError("channel " + tok + " is not measured");
            out.insert(*idx);
        }
    }
    return out;
}

} // namespace

fs::path resolve_case_path(const std::string& name) {
    if (name.empty()) throw InputError("no case given");
    const fs::path direct(name);
    if (fs::exists(direct)) return direct;
    const fs::path data(FDILAB_DATA_DIR);
    for (const fs::path& cand : {data / name, data / (name + ".grid")})
        if (fs::exists(cand)) return cand;
    throw InputError("case file not found: " + name);
}

std::vector<double> parse_lambda_sweep(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw InputError("lambda sweep must look like lo:hi:steps");
    try {
        return lambda_grid(std::stod(parts[0]), std::stod(parts[1]), std::stoi(parts[2]));
    } catch (const std::invalid_argument&) {
        throw InputError("lambda sweep must look like lo:hi:steps");
    }
}

int cmd_validate(const ValidateArgs& args, std::ostream& out) {
    const LoadedCase lc = load(args.common);
    const ObservabilityReport rep = check_observability(lc.jac);
    out << "case: " << resolve_case_path(args.common.case_path).string() << '\n';
    out << "n=" << lc.jac.n() << " p=" << lc.jac.p() << " k=" << lc.jac.k() << '\n';
    out << "pmus: " << join(lc.grid.pmu_buses()) << '\n';
    out << "zibs: " << join(lc.grid.zib_buses()) << '\n';
    out << "channels: " << join(lc.jac.index.labels()) << '\n';
    out << rep.summary() << '\n';
    return rep.observable_with_zib ? kOk : kInputError;
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
    const LoadedCase lc = load(args.common);
    TrajectoryConfig cfg = args.trajectory;
    cfg.seed = args.common.seed;
    const Trajectory traj = generate_trajectory(lc.grid, lc.jac, cfg);
    const CMatrix W = measure(traj.X, lc.jac, cfg.noise_sigma, cfg.seed);

    const fs::path dir = args.common.out;
    ensure_dir(dir);
    write_matrix_csv(dir / "X.csv", {traj.X, state_labels(lc.jac.p())});
    write_matrix_csv(dir / "W.csv", {W, lc.jac.index.labels()});

    const auto sv = singular_value_profile(W);
    {
        std::ofstream f(dir / "singular_values.csv");
        f << "index,value\n";
        char buf[64];
        for (std::size_t i = 0; i < sv.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", sv[i]);
            f << i + 1 << ',' << buf << '\n';
        }
    }
    const double cutoff = sv.empty() ? 0.0 : 1e-6 * sv.front();
    const auto dominant = std::count_if(sv.begin(), sv.end(), [&](double s) { return s > cutoff; });

    Summary s;
    s.set("case", args.common.case_path);
    s.set("seed", std::to_string(cfg.seed));
    s.set("N", cfg.N);
    s.set("channels", lc.jac.n());
    s.set("buses", lc.jac.p());
    s.set("noise_sigma", cfg.noise_sigma);
    s.set("dominant_singular_values", static_cast<int>(dominant));
    s.set("max_zib_violation",
          lc.jac.k() > 0 ? (traj.X * lc.jac.A.transpose()).cwiseAbs().maxCoeff() : 0.0);
    s.write(dir / "simulate_summary.txt");
    out << "simulated " << cfg.N << " x " << lc.jac.n() << " measurements into " << dir.string() << '\n';
    s.print(out);
    return kOk;
}

int cmd_attack(const AttackArgs& args, std::ostream& out) {
    const LoadedCase lc = load(args.common);
    const JacobianSet& jac = lc.jac;
    const fs::path dir = args.common.out;

    CMatrix W;
    if (args.measurements.empty()) {
        TrajectoryConfig cfg = args.trajectory;
        W = simulate_measurements(lc, cfg, args.common.seed);
    } else {
        W = read_measurements(args.measurements, jac);
    }

    AttackSpec spec;
    if (args.multiplicative) {
        if (args.bus == 0) throw InputError("a multiplicative attack needs --bus");
        spec = craft_multiplicative_attack(jac, args.bus, std::polar(args.gain, args.phase));
    } else {
        if (args.targets.empty()) throw InputError("an additive attack needs --targets");
        const std::set<int> controlled = parse_controlled(args.controlled, jac);
        const std::set<BusId> targets(args.targets.begin(), args.targets.end());
        spec = craft_additive_attack(jac, controlled, targets, args.magnitude,
                                     static_cast<int>(W.rows()));
    }

    const CMatrix X_hat = estimate_states(W, jac);
    const CMatrix W_bar = apply_attack(W, jac, spec);
    const UnobservabilityReport unobs = verify_unobservability(spec, jac, X_hat);

    BddConfig bcfg;
    bcfg.noise_sigma = args.noise_sigma;
    bcfg.alpha = args.alpha;
    const BddReport conv = conventional_bdd(W_bar, jac, bcfg);
    const BddReport enh = enhanced_bdd(W_bar, jac, bcfg);
    const int rank_w = linalg::numerical_rank(W);
    const int rank_wbar = linalg::numerical_rank(W_bar);

    ensure_dir(dir);
    write_matrix_csv(dir / "W.csv", {W, jac.index.labels()});
    write_matrix_csv(dir / "Wbar.csv", {W_bar, jac.index.labels()});
    write_attack_spec(dir / "attack.spec", spec, jac);

    Summary s;
    s.set("case", args.common.case_path);
    s.set("seed", std::to_string(args.common.seed));
    s.set("kind", to_string(spec.kind));
    s.set("targets", join(spec.targets));
    if (args.multiplicative) {
        s.set("phase", args.phase);
        s.set("gain", args.gain);
    } else {
        s.set("magnitude", args.magnitude);
    }
    std::vector<std::string> ctrl;
    for (int c : spec.controlled) ctrl.push_back(jac.index.entries[static_cast<std::size_t>(c)].label());
    s.set("controlled", join(ctrl));
    s.set("unobservable", unobs.unobservable);
    s.set("unobservability", unobs.summary(jac));
    s.set("conventional_bdd", bdd_word(conv));
    s.set("enhanced_bdd", bdd_word(enh));
    s.set("rank_W", rank_w);
    s.set("rank_Wbar", rank_wbar);
    s.set("rank_preserved", rank_w == rank_wbar);
    s.write(dir / "attack_summary.txt");
    out << to_string(spec.kind) << " attack on bus(es) " << join(spec.targets) << " written to "
        << dir.string() << '\n';
    s.print(out);
    return kOk;
}

int cmd_detect(const DetectArgs& args, std::ostream& out, std::ostream& err) {
    const LoadedCase lc = load(args.common);
    const JacobianSet& jac = lc.jac;
    const fs::path dir = args.common.out;

    fs::path input = args.measurements;
    if (input.empty()) {
        input = dir / "Wbar.csv";
        if (!fs::exists(input)) input = dir / "W.csv";
    }
    if (!fs::exists(input)) throw InputError("measurement file not found: " + input.string());
    const CMatrix W = read_measurements(input, jac);

    const std::string& sel = args.detectors;
    if (sel != "all" && sel != "conventional" && sel != "enhanced" && sel != "lrd")
        throw InputError("unknown detector selection '" + sel + "'");
    const bool run_conv = sel == "all" || sel == "conventional";
    const bool run_enh = sel == "all" || sel == "enhanced";
    const bool run_lrd = sel == "all" || sel == "lrd";
    const std::vector<double> sweep =
        args.lambda_sweep.empty() ? std::vector<double>{} : parse_lambda_sweep(args.lambda_sweep);
    args.lrd.validate();

    ensure_dir(dir);
    Summary s;
    s.set("case", args.common.case_path);
    s.set("input", input.filename().string());

    BddConfig bcfg;
    bcfg.noise_sigma = args.noise_sigma;
    bcfg.alpha = args.alpha;
    if (run_conv) {
        const BddReport r = conventional_bdd(W, jac, bcfg);
        write_bdd_csv(dir / "bdd_conventional.csv", r);
        s.set("conventional_bdd", bdd_word(r));
        s.set("conventional_flagged_rows", static_cast<int>(r.flagged_rows.size()));
    }
    if (run_enh) {
        const BddReport r = enhanced_bdd(W, jac, bcfg);
        write_bdd_csv(dir / "bdd_enhanced.csv", r);
        s.set("enhanced_bdd", bdd_word(r));
        s.set("enhanced_flagged_rows", static_cast<int>(r.flagged_rows.size()));
    }
    if (run_lrd) {
        const LrdResult r = solve_lrd(W, jac, args.lrd);
        write_matrix_csv(dir / "W_hat.csv", {r.W_hat, jac.index.labels()});
        write_matrix_csv(dir / "C_hat.csv", {r.C_hat, state_labels(jac.p())});
        write_lrd_trace_csv(dir / "lrd_trace.csv", r);
        write_column_norms_csv(dir / "column_norms.csv", r);
        {
            std::ofstream f(dir / "support.txt");
            f << "state " << join(r.detected_state_support) << '\n';
            std::vector<std::string> chans;
            for (int c : r.detected_measurement_support)
                chans.push_back(jac.index.entries[static_cast<std::size_t>(c)].label());
            f << "measurement " << join(chans) << '\n';
        }
        s.set("lambda", args.lrd.lambda);
        s.set("lrd_support", r.detected_state_support.empty() ? std::string("none")
                                                              : join(r.detected_state_support));
        s.set("lrd_l12_norm", r.l12_norm);
        s.set("lrd_objective", r.objective);
        s.set("lrd_iterations", r.iterations);
        s.set("lrd_converged", r.converged);
        if (!r.converged) {
            err << "warning: LRD solver stopped after " << r.iterations
                << " iterations without meeting the tolerances\n";
            s.set("warning", "lrd solver did not converge");
        }
        if (!sweep.empty()) {
            const auto pts = lambda_sweep(W, jac.H_bar, sweep, args.lrd);
            write_lambda_sweep_csv(dir / "lambda_sweep.csv", pts);
            s.set("lambda_sweep", args.lambda_sweep);
        }
    }
    s.write(dir / "detect_summary.txt");
    out << "detection on " << input.string() << '\n';
    s.print(out);
    return kOk;
}

int cmd_report(const ReportArgs& args, std::ostream& out) {
    const fs::path dir = args.common.out;
    if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir.string());

    std::vector<fs::path> runs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory()) runs.push_back(entry.path());
    std::sort(runs.begin(), runs.end());

    const std::vector<std::string> header = {"run",          "attack",       "targets",
                                             "conventional", "enhanced",     "lrd_support",
                                             "lrd_l12_norm", "gaps"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& run : runs) {
        const bool has_attack = fs::exists(run / "attack_summary.txt");
        const bool has_detect = fs::exists(run / "detect_summary.txt");
        if (!has_attack && !has_detect) continue;
        const auto a = read_summary(run / "attack_summary.txt");
        const auto d = read_summary(run / "detect_summary.txt");
        auto get = [](const std::map<std::string, std::string>& m, const std::string& k) {
            const auto it = m.find(k);
            return it == m.end() ? std::string("-") : it->second;
        };
        std::vector<std::string> gaps;
        if (!has_attack) gaps.push_back("attack_summary");
        if (!has_detect) gaps.push_back("detect_summary");
        std::string conv = get(d, "conventional_bdd");
        if (conv == "-") conv = get(a, "conventional_bdd");
        std::string enh = get(d, "enhanced_bdd");
        if (enh == "-") enh = get(a, "enhanced_bdd");
        rows.push_back({run.filename().string(), has_attack ? get(a, "kind") : "none",
                        get(a, "targets"), conv, enh, get(d, "lrd_support"), get(d, "lrd_l12_norm"),
                        gaps.empty() ? "-" : join(gaps, ";")});
    }

    {
        std::ofstream f(dir / "report.csv");
        if (!f) throw InputError("cannot write " + (dir / "report.csv").string());
        f << join(header, ",") << '\n';
        for (const auto& r : rows) f << join(r, ",") << '\n';
    }

    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i)
            out << std::left << std::setw(static_cast<int>(width[i]) + 2) << r[i];
        out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return kOk;
}

namespace {

void add_common(CLI::App* sub, CommonOptions& c) {
    sub->add_option("--case", c.case_path, "Case file or bundled case name")->capture_default_str();
    sub->add_option("--out", c.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
}

void add_trajectory(CLI::App* sub, TrajectoryConfig& t) {
    sub->add_option("--samples", t.N, "Number of time instants N")->capture_default_str();
    sub->add_option("--sample-rate", t.sample_rate, "Samples per second")->capture_default_str();
    sub->add_option("--onset", t.disturbance_onset, "First disturbed instant (1-based)")
        ->capture_default_str();
    sub->add_option("--variance-scale", t.variance_scale, "Disturbance variance scale")
        ->capture_default_str();
    sub->add_option("--decay-base", t.decay_base, "Disturbance variance decay base")
        ->capture_default_str();
    sub->add_option("--modes", t.num_modes, "Number of disturbance modes")->capture_default_str();
    sub->add_option("--noise-sigma", t.noise_sigma, "Measurement noise standard deviation")
        ->capture_default_str();
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"fdilab: unobservable false data injection attacks on PMU state estimation"};
    app.set_config("--manifest", "", "Experiment manifest (INI or TOML)");
    app.require_subcommand(1);

    ValidateArgs va;
    SimulateArgs sa;
    AttackArgs aa;
    DetectArgs da;
    ReportArgs ra;

    auto* validate = app.add_subcommand("validate", "Check a case file and its observability");
    add_common(validate, va.common);
    validate->add_option("case_file", va.common.case_path, "Case file (same as --case)");

    auto* simulate = app.add_subcommand("simulate", "Generate synthetic PMU measurements");
    add_common(simulate, sa.common);
    add_trajectory(simulate, sa.trajectory);

    auto* attack = app.add_subcommand("attack", "Craft and apply an unobservable attack");
    add_common(attack, aa.common);
    auto* mult = attack->add_flag("--mult", aa.multiplicative, "Multiplicative attack F = diag(.., c, ..)");
    auto* add = attack->add_flag("--add", "Additive attack (default)");
    mult->excludes(add);
    attack->add_option("--bus", aa.bus, "Bus attacked by the multiplicative attack");
    attack->add_option("--phase", aa.phase, "Phase of c in radians")->capture_default_str();
    attack->add_option("--gain", aa.gain, "Magnitude of c")->capture_default_str();
    attack->add_option("--targets", aa.targets, "Target buses of the additive attack")->delimiter(',');
    attack->add_option("--controlled", aa.controlled, "Controlled channels: pmuN or labels like I4-3")
        ->delimiter(',');
    attack->add_option("--magnitude", aa.magnitude, "Additive perturbation magnitude")
        ->capture_default_str();
    attack->add_option("--measurements", aa.measurements, "Input W.csv (simulated when omitted)");
    attack->add_option("--alpha", aa.alpha, "BDD false-alarm rate")->capture_default_str();
    attack->add_option("--bdd-noise-sigma", aa.noise_sigma, "Noise sigma assumed by the BDDs")
        ->capture_default_str();
    add_trajectory(attack, aa.trajectory);

    auto* detect = app.add_subcommand("detect", "Run the BDDs and the LRD detector");
    add_common(detect, da.common);
    detect->add_option("--measurements", da.measurements, "Input matrix (default <out>/Wbar.csv or <out>/W.csv)");
    detect->add_option("--detectors", da.detectors, "conventional, enhanced, lrd or all")
        ->capture_default_str();
    detect->add_option("--lambda", da.lrd.lambda, "LRD weight lambda")->capture_default_str();
    detect->add_option("--rho", da.lrd.rho, "ADMM penalty")->capture_default_str();
    detect->add_option("--max-iter", da.lrd.max_iter, "ADMM iteration cap")->capture_default_str();
    detect->add_option("--tol", da.lrd.tol_primal, "Relative primal and dual tolerance")
        ->capture_default_str()
        ->each([&](const std::string& v) { da.lrd.tol_dual = std::stod(v); });
    detect->add_option("--support-threshold", da.lrd.support_threshold,
                       "Fraction of the largest column norm that counts as attacked")
        ->capture_default_str();
    detect->add_option("--lambda-sweep", da.lambda_sweep, "lo:hi:steps");
    detect->add_option("--alpha", da.alpha, "BDD false-alarm rate")->capture_default_str();
    detect->add_option("--noise-sigma", da.noise_sigma, "Noise sigma assumed by the BDDs")
        ->capture_default_str();

    auto* report = app.add_subcommand("report", "Tabulate all runs below --out");
    add_common(report, ra.common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    try {
        if (*validate) return cmd_validate(va, out);
        if (*simulate) return cmd_simulate(sa, out);
        if (*attack) return cmd_attack(aa, out);
        if (*detect) return cmd_detect(da, out, err);
        if (*report) return cmd_report(ra, out);
    } catch (const InfeasibleAttack& e) {
        err << "infeasible: " << e.what() << '\n';
        return kInfeasibleAttack;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kNumericalFailure;
    }
    return kInputError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.push_back("fdilab");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace fdilab::cli
