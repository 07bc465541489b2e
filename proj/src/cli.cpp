#include "asym/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>

#include "asym/plot.hpp"
#include "asym/random.hpp"
#include "asym/suite.hpp"

namespace asym::cli {

namespace {

using io::Json;
using Index = Eigen::Index;

ValidationError config_error(const std::string& key, const std::string& what) {
    return ValidationError("config." + key + ": " + what);
}

double get_real(const Json& cfg, const std::string& key, double fallback) {
    if (!cfg.contains(key)) return fallback;
    if (!cfg[key].is_number()) throw config_error(key, "expected a number");
    return cfg[key].get<double>();
}

std::size_t get_count(const Json& cfg, const std::string& key, std::size_t fallback) {
    if (!cfg.contains(key)) return fallback;
    if (!cfg[key].is_number_unsigned()) throw config_error(key, "expected a non-negative integer");
    return cfg[key].get<std::size_t>();
}

bool get_flag(const Json& cfg, const std::string& key, bool fallback) {
    if (!cfg.contains(key)) return fallback;
    if (!cfg[key].is_boolean()) throw config_error(key, "expected true or false");
    return cfg[key].get<bool>();
}

std::vector<double> get_reals(const Json& cfg, const std::string& key, std::vector<double> fallback) {
    if (!cfg.contains(key)) return fallback;
    const Json& a = cfg[key];
    if (!a.is_array() || a.empty()) throw config_error(key, "expected a non-empty array of numbers");
    std::vector<double> v;
    for (const auto& x : a) {
        if (!x.is_number()) throw config_error(key, "expected a non-empty array of numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

/// Runs a parser on config[key], prefixing errors that lack a field path.
template <class F>
auto parse_field(const Json& cfg, const std::string& key, F&& parse) {
    try {
        return parse(cfg[key], "config." + key);
    } catch (const Error& e) {
        const std::string what = e.what();
        if (what.rfind("config.", 0) == 0) throw;
        throw config_error(key, what);
    }
}

DensityMatrix get_state(const Json& cfg, const std::string& key, const DensityMatrix& fallback) {
    return cfg.contains(key) ? parse_field(cfg, key, io::state_from_json) : fallback;
}

Hamiltonian get_hamiltonian(const Json& cfg, const std::string& key, const Hamiltonian& fallback) {
    return cfg.contains(key) ? parse_field(cfg, key, io::hamiltonian_from_json) : fallback;
}

GroupAction get_group(const Json& cfg, const std::string& key, const GroupAction& fallback) {
    return cfg.contains(key) ? parse_field(cfg, key, io::group_from_json) : fallback;
}

Hamiltonian qubit_hamiltonian() { return Hamiltonian::diagonal({0.0, 1.0}); }

DensityMatrix plus_state() { return DensityMatrix::pure(ComplexVector::Ones(2) / std::sqrt(2.0)); }

/// Swap of two tensor factors of a product space, as a permutation matrix.
ComplexMatrix factor_swap(const std::vector<std::size_t>& dims, std::size_t a, std::size_t b) {
    const std::size_t n = product(dims);
    ComplexMatrix u = ComplexMatrix::Zero(static_cast<Index>(n), static_cast<Index>(n));
    std::vector<std::size_t> digits(dims.size()), swapped_dims(dims);
    std::swap(swapped_dims[a], swapped_dims[b]);
    for (std::size_t idx = 0; idx < n; ++idx) {
        std::size_t rest = idx;
        for (std::size_t k = dims.size(); k-- > 0;) {
            digits[k] = rest % dims[k];
            rest /= dims[k];
        }
        std::swap(digits[a], digits[b]);
        std::size_t target = 0;
        for (std::size_t k = 0; k < dims.size(); ++k) target = target * swapped_dims[k] + digits[k];
        u(static_cast<Index>(target), static_cast<Index>(idx)) = 1.0;
    }
    return u;
}

struct Run {
    std::string command;
    Json config;
    SuiteOptions options;
    bool strict = false;
    ArtifactWriter writer;
    std::ostream& out;

    Tolerances tolerances() const {
        Tolerances t;
        t.feasible = options.tol_feasible;
        t.infeasible = options.tol_infeasible;
        return t;
    }

    int finish(const Json& summary, const std::string& line, int code = kExitOk) {
        const auto manifest = writer.write_manifest(command, config, summary);
        out << command << ": " << line << " [" << manifest.string() << "]\n";
        return code;
    }
};

// ---------------------------------------------------------------- commands

int cmd_fisher(Run& run) {
    const Json& c = run.config;
    const DensityMatrix rho = get_state(c, "state", plus_state());
    const Hamiltonian h = get_hamiltonian(c, "hamiltonian", qubit_hamiltonian());
    const double value = qfi(rho, h);
    const Json result{{"qfi", value}, {"dim", rho.dim()}, {"coherence_magnitude", coherence_magnitude(rho, h)}};
    run.writer.write("fisher.json", io::dump(result));
    return run.finish(result, "I_F = " + std::to_string(value));
}

int cmd_frameness(Run& run) {
    const Json& c = run.config;
    const DensityMatrix rho = get_state(c, "state", plus_state());
    const GroupAction g = get_group(c, "group", GroupAction::time_translation(qubit_hamiltonian()));
    const double value = rel_entropy_frameness(g, rho);
    const Json result{{"relative_entropy_frameness", value}, {"dim", rho.dim()}};
    run.writer.write("frameness.json", io::dump(result));
    return run.finish(result, "S(rho || twirl(rho)) = " + std::to_string(value));
}

int cmd_twirl(Run& run) {
    const Json& c = run.config;
    const DensityMatrix rho = get_state(c, "state", plus_state());
    const GroupAction g = get_group(c, "group", GroupAction::time_translation(qubit_hamiltonian()));
    const DensityMatrix tw = twirl_state(g, rho);
    const double asym_in = (tw.matrix() - rho.matrix()).norm();
    const PredicateResult sym = is_symmetric(g, tw.matrix(), 1e-9);
    const Json result{{"input", io::to_json(rho.matrix())},
                      {"twirled", io::to_json(tw.matrix())},
                      {"input_distance_to_twirl", asym_in},
                      {"twirled_symmetric", sym.holds},
                      {"twirled_symmetry_residual", sym.residual}};
    run.writer.write("twirl.json", io::dump(result));
    return run.finish(Json{{"input_distance_to_twirl", asym_in}, {"twirled_symmetric", sym.holds}},
                      "||twirl(rho) - rho||_F = " + std::to_string(asym_in));
}

ChoiChannel channel_from_config(const Json& spec, const GroupAction& in, const GroupAction& out, Rng& rng) {
    io::require_object(spec, "config.channel");
    io::require_fields(spec, {"choi", "dim_in", "dim_out", "unitary", "random"}, "config.channel");
    if (spec.contains("unitary")) return ChoiChannel::from_unitary(io::matrix_from_json(spec["unitary"], "config.channel.unitary"));
    if (spec.contains("choi")) {
        const ComplexMatrix choi = io::matrix_from_json(spec["choi"], "config.channel.choi");
        return ChoiChannel(choi, get_count(spec, "dim_in", in.dim()), get_count(spec, "dim_out", out.dim()));
    }
    if (spec.contains("random")) {
        const std::string kind = spec["random"].is_string() ? spec["random"].get<std::string>() : "";
        if (kind == "covariant") return random_covariant_channel(in, out, rng);
        if (kind == "generic") return random_channel(in.dim(), out.dim(), rng);
        throw config_error("channel.random", "expected \"covariant\" or \"generic\"");
    }
    throw config_error("channel", "one of 'choi', 'unitary' or 'random' is required");
}

int cmd_covariance(Run& run) {
    const Json& c = run.config;
    const GroupAction base = get_group(c, "group", GroupAction::time_translation(qubit_hamiltonian()));
    const GroupAction in = get_group(c, "group_in", base);
    const GroupAction out = get_group(c, "group_out", base);
    Rng rng = trial_rng(run.options.seed, 0, 0);
    const Json spec = c.contains("channel") ? c["channel"] : Json{{"random", "covariant"}};
    const ChoiChannel ch = channel_from_config(spec, in, out, rng);
    const double tol = get_real(c, "tol", 1e-9);
    const PredicateResult res = is_covariant(ch, in, out, tol);
    const ChoiChannel tw = twirl_channel(in, out, ch);
    const Json result{{"covariant", res.holds},
                      {"residual", res.residual},
                      {"tol", tol},
                      {"twirl_distance", (tw.choi() - ch.choi()).norm()},
                      {"twirled_choi", io::to_json(tw.choi())}};
    run.writer.write("covariance.json", io::dump(result));
    return run.finish(Json{{"covariant", res.holds}, {"residual", res.residual}},
                      std::string(res.holds ? "covariant" : "not covariant") + ", residual " + std::to_string(res.residual));
}

FeasibilityProblem problem_from_config(const Run& run) {
    const Json& c = run.config;
    const GroupAction base = get_group(c, "group", GroupAction::time_translation(qubit_hamiltonian()));
    const GroupAction gr = get_group(c, "group_r", base);
    const GroupAction gs = get_group(c, "group_s", base);
    const DensityMatrix rho_r = get_state(c, "rho_r", plus_state());
    const DensityMatrix rho_s = get_state(c, "rho_s", DensityMatrix::basis(2, 0));
    SystemTarget target = CoherenceTarget{0.1, 0, 1};
    if (c.contains("target")) {
        const Json& t = c["target"];
        io::require_object(t, "config.target");
        io::require_fields(t, {"coherence", "row", "col", "state"}, "config.target");
        if (t.contains("state")) {
            if (t.size() != 1) throw config_error("target", "'state' cannot be combined with coherence fields");
            target = io::state_from_json(t["state"], "config.target.state");
        } else {
            target = CoherenceTarget{get_real(t, "coherence", 0.0), get_count(t, "row", 0), get_count(t, "col", 1)};
        }
    }
    FeasibilityProblem p{gr, gs, rho_r, rho_s, target, get_real(c, "slack", 0.0), run.tolerances()};
    p.product_output = get_flag(c, "product_output", false);
    p.tol.max_iterations = get_count(c, "max_iterations", p.tol.max_iterations);
    p.tol.newton = get_flag(c, "newton", p.tol.newton);
    return p;
}

const std::initializer_list<std::string_view> kProblemKeys{"group", "group_r", "group_s", "rho_r", "rho_s", "target",
                                                           "slack", "product_output", "max_iterations", "newton"};

int cmd_feasibility(Run& run) {
    const FeasibilityProblem p = problem_from_config(run);
    const FeasibilityReport rep = dykstra_feasibility(p);
    Json result = io::to_json(rep);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < rep.residual_history.size(); ++k) rows.push_back({static_cast<double>(k + 1), rep.residual_history[k]});
    run.writer.write("feasibility.json", io::dump(result));
    run.writer.write("residuals.csv", io::to_csv({"iteration", "residual"}, rows));
    const bool undecided = rep.status == FeasibilityStatus::Undecided;
    const Json summary{{"status", to_string(rep.status)}, {"iterations", rep.iterations}, {"gap_estimate", rep.gap_estimate}};
    return run.finish(summary,
                      std::string(to_string(rep.status)) + " after " + std::to_string(rep.iterations) + " iterations, gap " +
                          std::to_string(rep.gap_estimate),
                      undecided && run.strict ? kExitUndecided : kExitOk);
}

int cmd_scan(Run& run) {
    const Json& c = run.config;
    FeasibilityProblem p = problem_from_config(run);
    if (!std::holds_alternative<CoherenceTarget>(p.target)) throw config_error("target", "scan needs a coherence target");
    const std::vector<double> slacks = get_reals(c, "slacks", {0.0, 0.05, 0.1, 0.25, 0.5, 1.0});
    ScanOptions so;
    so.rounds = get_count(c, "rounds", so.rounds);
    so.lower = get_real(c, "lower", so.lower);
    so.upper = get_real(c, "upper", so.upper);
    const std::vector<ScanPoint> points = max_coherence_scan(p, slacks, so);
    Json arr = Json::array();
    std::vector<std::vector<double>> rows;
    plot::Series best{"verified c*", {}, {}}, upper{"upper bracket", {}, {}};
    std::size_t undecided = 0;
    for (const auto& pt : points) {
        arr.push_back(io::to_json(pt));
        rows.push_back({pt.slack, pt.best, pt.upper, static_cast<double>(pt.undecided), static_cast<double>(pt.solves)});
        best.x.push_back(pt.slack);
        best.y.push_back(pt.best);
        upper.x.push_back(pt.slack);
        upper.y.push_back(pt.upper);
        undecided += pt.undecided;
    }
    run.writer.write("scan.json", io::dump(Json{{"points", arr}}));
    run.writer.write("scan.csv", io::to_csv({"slack", "best", "upper", "undecided", "solves"}, rows));
    run.writer.write("scan.svg", plot::render_svg({best, upper}, {"maximal broadcast coherence", "reference slack", "coherence"}));
    return run.finish(Json{{"points", arr}},
                      "c*(" + std::to_string(points.back().slack) + ") >= " + std::to_string(points.back().best) + ", " +
                          std::to_string(undecided) + " undecided solves",
                      undecided > 0 && run.strict ? kExitUndecided : kExitOk);
}

int cmd_ki(Run& run) {
    const Json& c = run.config;
    std::vector<DensityMatrix> family;
    if (c.contains("family") && c.contains("orbit")) throw config_error("family", "give either 'family' or 'orbit'");
    if (c.contains("family")) {
        if (!c["family"].is_array() || c["family"].empty()) throw config_error("family", "expected a non-empty array of states");
        for (std::size_t k = 0; k < c["family"].size(); ++k)
            family.push_back(io::state_from_json(c["family"][k], "config.family[" + std::to_string(k) + "]"));
    } else {
        const Json orbit = c.contains("orbit") ? c["orbit"] : Json::object();
        io::require_object(orbit, "config.orbit");
        io::require_fields(orbit, {"state", "group", "grid"}, "config.orbit");
        const DensityMatrix rho = get_state(orbit, "state", plus_state());
        const GroupAction g = get_group(orbit, "group", GroupAction::time_translation(qubit_hamiltonian()));
        family = orbit_family(g, rho, get_count(orbit, "grid", 16));
    }
    KiConfig cfg;
    cfg.seed = run.options.seed;
    std::optional<KIDecomposition> dec;
    if (c.contains("channel")) {
        const std::size_t d = family.front().dim();
        const Json& spec = c["channel"];
        io::require_object(spec, "config.channel");
        io::require_fields(spec, {"choi", "unitary"}, "config.channel");
        const ChoiChannel ch = spec.contains("unitary")
                                   ? ChoiChannel::from_unitary(io::matrix_from_json(spec["unitary"], "config.channel.unitary"))
                                   : ChoiChannel(io::matrix_from_json(spec.at("choi"), "config.channel.choi"), d, d);
        dec = ki_for_invariant_family(ch, family, cfg);
    } else {
        dec = ki_for_family(family, cfg);
    }
    const SpectrumReport spectrum = spectrum_constancy_check(family, *dec);
    Json blocks = Json::array();
    for (const auto& b : dec->blocks) blocks.push_back(Json::array({b.dim_j, b.dim_k}));
    run.writer.write("ki.json", io::dump(Json{{"decomposition", io::to_json(*dec)}, {"spectrum", io::to_json(spectrum)}}));
    return run.finish(Json{{"blocks", blocks}, {"reconstruction_residual", dec->reconstruction_residual}, {"spectrum_constant", spectrum.constant}},
                      std::to_string(dec->blocks.size()) + " blocks, reconstruction residual " +
                          std::to_string(dec->reconstruction_residual));
}

int cmd_aberg(Run& run) {
    const Json& c = run.config;
    std::vector<std::size_t> dims;
    for (double d : get_reals(c, "dims", {4, 8, 16, 32, 64})) {
        if (d < 2 || d != std::floor(d)) throw config_error("dims", "entries must be integers >= 2");
        dims.push_back(static_cast<std::size_t>(d));
    }
    if (c.contains("boundary") && !c["boundary"].is_string()) throw config_error("boundary", "expected \"cyclic\" or \"reflecting\"");
    const LadderBoundary boundary = parse_boundary(c.value("boundary", std::string("reflecting")));
    const std::size_t uses = get_count(c, "uses", 10);
    std::optional<std::pair<std::size_t, std::size_t>> window;
    if (c.contains("window")) {
        const auto w = get_reals(c, "window", {});
        if (w.size() != 2 || w[0] < 0 || w[1] < w[0]) throw config_error("window", "expected [begin, end] with begin <= end");
        window = {static_cast<std::size_t>(w[0]), static_cast<std::size_t>(w[1])};
    }
    Json runs = Json::array();
    std::vector<plot::Series> series;
    std::string csv = "dimension,use,coherence,purity,shift_expectation,leakage\n";
    std::string line;
    for (std::size_t d : dims) {
        LadderConfig cfg;
        cfg.dimension = d;
        cfg.boundary = boundary;
        cfg.uses = uses;
        cfg.window_begin = window ? window->first : d / 4;
        cfg.window_end = window ? window->second : 3 * d / 4 - 1;
        if (c.contains("seed_unitary")) cfg.seed_unitary = io::matrix_from_json(c["seed_unitary"], "config.seed_unitary");
        const LadderTrace t = aberg_run(cfg);
        runs.push_back(Json{{"dimension", d},
                            {"window", Json::array({cfg.window_begin, cfg.window_end})},
                            {"min_coherence", t.min_coherence()},
                            {"trace", io::to_json(t)}});
        plot::Series s{"D = " + std::to_string(d), {}, t.coherence};
        std::vector<std::vector<double>> rows;
        for (std::size_t n = 0; n < t.size(); ++n) {
            s.x.push_back(static_cast<double>(n + 1));
            rows.push_back({static_cast<double>(d), static_cast<double>(n + 1), t.coherence[n], t.purity[n], t.shift_expectation[n], t.leakage[n]});
        }
        const std::string body = io::to_csv({"dimension", "use", "coherence", "purity", "shift_expectation", "leakage"}, rows);
        csv += body.substr(body.find('\n') + 1);
        series.push_back(std::move(s));
        line += (line.empty() ? "" : ", ") + ("D=" + std::to_string(d) + " min " + std::to_string(t.min_coherence()));
    }
    run.writer.write("aberg.json", io::dump(Json{{"boundary", to_string(boundary)}, {"runs", runs}}));
    run.writer.write("aberg.csv", csv);
    run.writer.write("aberg.svg", plot::render_svg(series, {"output coherence per use", "use", "|<0|rho_S|1>|"}));
    Json summary = Json::array();
    for (const auto& r : runs) summary.push_back(Json{{"dimension", r["dimension"]}, {"min_coherence", r["min_coherence"]}});
    return run.finish(Json{{"runs", summary}}, line);
}

int cmd_clock(Run& run) {
    const Json& c = run.config;
    const std::vector<double> alphas = get_reals(c, "alphas", {1, 2, 3, 4});
    std::vector<double> times;
    if (c.contains("times") && c["times"].is_array()) {
        times = get_reals(c, "times", {});
    } else {
        const std::size_t count = get_count(c, "times", 16);
        if (count == 0) throw config_error("times", "count must be positive");
        for (std::size_t k = 0; k < count; ++k) times.push_back(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count));
    }
    const std::vector<Complex> za(alphas.begin(), alphas.end());
    const auto rows = classical_limit_experiment(za, times);
    Json arr = Json::array();
    std::vector<std::vector<double>> table;
    std::vector<plot::Series> series;
    bool decreasing = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        arr.push_back(io::to_json(r));
        table.push_back({alphas[i], static_cast<double>(r.cutoff), r.score, r.closed_form_score, r.closed_form_error});
        plot::Series s{"alpha = " + std::to_string(alphas[i]).substr(0, 4), times, {}};
        for (Index k = 0; k < r.overlaps.cols(); ++k) s.y.push_back(r.overlaps(0, k));
        series.push_back(std::move(s));
        if (i > 0) decreasing = decreasing && r.score < rows[i - 1].score;
    }
    run.writer.write("clock.json", io::dump(Json{{"times", times}, {"rows", arr}}));
    run.writer.write("clock.csv", io::to_csv({"alpha", "cutoff", "score", "closed_form_score", "closed_form_error"}, table));
    run.writer.write("clock.svg", plot::render_svg(series, {"clock state overlap with t = 0", "t", "overlap"}));
    Json scores = Json::array();
    for (const auto& r : rows) scores.push_back(r.score);
    return run.finish(Json{{"scores", scores}, {"strictly_decreasing", decreasing}},
                      std::string("distinguishability scores ") + (decreasing ? "strictly decreasing" : "not monotone") + " in alpha");
}

int cmd_permutation(Run& run) {
    const std::size_t n = get_count(run.config, "n", 3);
    if (n < 2) throw config_error("n", "must be at least 2");
    const GroupAction perm = GroupAction::permutation(n);
    const ChoiChannel ch = permutation_broadcast_channel(n);
    const double covariance = is_covariant(ch, tensor(perm, perm), 1e-12).residual;
    const DensityMatrix mixed = DensityMatrix::maximally_mixed(n);
    double broadcast = 0.0, marginal = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const ComplexMatrix rj = DensityMatrix::basis(n, j).matrix();
        const DensityMatrix outj = apply_channel(ch, tensor(DensityMatrix::basis(n, j), mixed));
        broadcast = std::max(broadcast, (outj.matrix() - kron(rj, rj)).norm());
        marginal = std::max(marginal, (marginals(outj, n, n).marginal_r.matrix() - rj).norm());
    }
    const bool ok = covariance <= 1e-12 && broadcast <= 1e-12 && marginal <= 1e-12;
    const Json summary{{"n", n}, {"covariance_residual", covariance}, {"broadcast_error", broadcast}, {"r_marginal_error", marginal}, {"verified", ok}};
    Json result = summary;
    result["choi_diagonal"] = Json::array();
    for (Index k = 0; k < ch.choi().rows(); ++k) result["choi_diagonal"].push_back(ch.choi()(k, k).real());
    run.writer.write("permutation.json", io::dump(result));
    return run.finish(summary, ok ? "exact broadcast verified" : "broadcast check failed", ok ? kExitOk : kExitValidation);
}

ComplexMatrix named_unitary(const Json& spec, std::size_t d_s, std::size_t d_a, const std::string& key) {
    if (spec.is_string()) {
        const std::string name = spec.get<std::string>();
        if (name == "identity") return identity(d_s * d_a);
        if (name == "swap") {
            if (d_s != d_a) throw config_error(key, "swap needs equal dimensions");
            return factor_swap({d_s, d_a}, 0, 1);
        }
        throw config_error(key, "unknown unitary '" + name + "'");
    }
    if (spec.is_object() && spec.contains("partial_swap")) {
        io::require_fields(spec, {"partial_swap"}, "config." + key);
        if (d_s != 2 || d_a != 2) throw config_error(key, "partial_swap is defined on two qubits");
        const double th = spec["partial_swap"].get<double>();
        ComplexMatrix u = identity(4);
        u(1, 1) = u(2, 2) = std::cos(th);
        u(1, 2) = u(2, 1) = Complex(0.0, -std::sin(th));
        return u;
    }
    return io::matrix_from_json(spec, "config." + key);
}

int cmd_thermal(Run& run) {
    const Json& c = run.config;
    const Hamiltonian hs = get_hamiltonian(c, "h_s", qubit_hamiltonian());
    const Hamiltonian ha = get_hamiltonian(c, "h_a", hs);
    const double beta = get_real(c, "beta", 1.0);
    const ComplexMatrix u = named_unitary(c.contains("unitary") ? c["unitary"] : Json("swap"), hs.dim(), ha.dim(), "unitary");
    const ChoiChannel ch = thermal_operation(u, hs, ha, beta);
    const PredicateResult gibbs = is_gibbs_preserving(ch, hs, beta, 1e-9);
    const PredicateResult cov = is_covariant(ch, GroupAction::time_translation(hs), 1e-9);
    const Json summary{{"gibbs_preserving", gibbs.holds}, {"gibbs_residual", gibbs.residual}, {"covariant", cov.holds}, {"covariance_residual", cov.residual}};
    Json result = summary;
    result["choi"] = io::to_json(ch.choi());
    run.writer.write("thermal.json", io::dump(result));
    return run.finish(summary, "Gibbs residual " + std::to_string(gibbs.residual) + ", covariance residual " + std::to_string(cov.residual));
}

int cmd_battery(Run& run) {
    const Json& c = run.config;
    const Hamiltonian hr = get_hamiltonian(c, "h_r", qubit_hamiltonian());
    const Hamiltonian hb = get_hamiltonian(c, "h_b", Hamiltonian::diagonal({0.0}));
    const Hamiltonian hs = get_hamiltonian(c, "h_s", hr);
    const DensityMatrix battery = get_state(c, "battery", DensityMatrix::basis(hb.dim(), 0));
    const DensityMatrix rho_r = get_state(c, "rho_r", plus_state());
    const DensityMatrix rho_s = get_state(c, "rho_s", DensityMatrix::basis(hs.dim(), 0));
    ComplexMatrix u;
    const Json spec = c.contains("unitary") ? c["unitary"] : Json("exchange");
    if (spec.is_string() && spec.get<std::string>() == "exchange") {
        if (hr.dim() != hs.dim()) throw config_error("unitary", "exchange needs equal R and S dimensions");
        u = factor_swap({hr.dim(), hb.dim(), hs.dim()}, 0, 2);
    } else if (spec.is_string() && spec.get<std::string>() == "identity") {
        u = identity(hr.dim() * hb.dim() * hs.dim());
    } else {
        u = io::matrix_from_json(spec, "config.unitary");
    }
    const BatteryReport rep = battery_disturbance_demo(u, hr, hb, hs, battery, rho_r, rho_s);

    // Randomised energy-conserving interactions on three qubits with the battery in its ground state.
    const std::size_t trials = get_count(c, "trials", 100);
    const Hamiltonian hq = qubit_hamiltonian();
    const Hamiltonian h3 = combined(combined(hq, hq), hq);
    std::size_t violations = 0, coherent = 0;
    double least_disturbance = INFINITY;
    for (std::size_t i = 0; i < trials; ++i) {
        Rng rng = trial_rng(run.options.seed, 20, i);
        const ComplexMatrix v = random_energy_conserving_unitary(h3.energies(), rng);
        const DensityMatrix r = random_density(2, rng);
        const DensityMatrix s = random_incoherent(hq, rng);
        const BatteryReport t = battery_disturbance_demo(v, hq, hq, hq, DensityMatrix::basis(2, 0), r, s);
        if (t.coherence_out > 1e-3) {
            ++coherent;
            least_disturbance = std::min(least_disturbance, t.disturbance);
            if (t.disturbance < 1e-6) ++violations;
        }
    }
    const Json random_json{{"trials", trials},
                           {"coherent_outputs", coherent},
                           {"violations", violations},
                           {"least_disturbance_with_coherence", std::isfinite(least_disturbance) ? Json(least_disturbance) : Json(nullptr)}};
    const Json summary{{"demo", io::to_json(rep)}, {"random", random_json}};
    run.writer.write("battery.json", io::dump(summary));
    const bool ok = rep.consistent && violations == 0;
    return run.finish(summary,
                      "coherence_out " + std::to_string(rep.coherence_out) + ", disturbance " + std::to_string(rep.disturbance) +
                          ", " + std::to_string(violations) + " violations in " + std::to_string(trials) + " random trials",
                      ok ? kExitOk : kExitValidation);
}

int cmd_suite(Run& run) {
    const auto start = std::chrono::steady_clock::now();
    const SuiteRun result = run_suite(run.options, run.writer.root(), [&](const CriterionResult& r) {
        run.out << "criterion " << r.id << " " << (r.pass ? "PASS" : "FAIL") << ": " << r.name << " (" << r.summary << ")\n";
        run.out.flush();
    });
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    // Wall time is kept out of the manifest so that repeated runs stay byte-identical.
    io::write_file(run.writer.root() / "timing.json", io::dump(Json{{"wall_seconds", wall}}));
    std::string failed;
    for (const auto& r : result.results)
        if (!r.pass) failed += (failed.empty() ? "" : ", ") + std::to_string(r.id) + " (" + r.name + ")";
    run.out << "suite: " << (failed.empty() ? "all criteria passed" : "failing criteria: " + failed) << " [" << result.manifest.string()
            << "]\n";
    return failed.empty() ? kExitOk : kExitCriteriaFailed;
}

struct CommandSpec {
    std::string name;
    std::string description;
    std::vector<std::string_view> keys;
    std::function<int(Run&)> handler;
};

std::vector<CommandSpec> command_table() {
    std::vector<std::string_view> problem(kProblemKeys);
    std::vector<std::string_view> scan = problem;
    scan.insert(scan.end(), {"slacks", "rounds", "lower", "upper"});
    return {
        {"fisher", "Quantum Fisher information of a state under a Hamiltonian", {"state", "hamiltonian"}, cmd_fisher},
        {"frameness", "Relative entropy of frameness", {"state", "group"}, cmd_frameness},
        {"twirl", "Group average of a state", {"state", "group"}, cmd_twirl},
        {"covariance", "Covariance check of a channel", {"channel", "group", "group_in", "group_out", "tol"}, cmd_covariance},
        {"feasibility", "Broadcasting feasibility solve", problem, cmd_feasibility},
        {"scan", "Maximal broadcast coherence against reference slack", scan, cmd_scan},
        {"ki", "Block decomposition of a family of states", {"family", "orbit", "channel"}, cmd_ki},
        {"aberg", "Repeated coherence extraction from a finite ladder", {"dims", "boundary", "uses", "window", "seed_unitary"}, cmd_aberg},
        {"clock", "Distinguishability of coherent clock states", {"alphas", "times"}, cmd_clock},
        {"permutation", "Measure-and-prepare broadcast for the symmetric group", {"n"}, cmd_permutation},
        {"thermal", "Thermal operation from an energy-conserving unitary", {"unitary", "h_s", "h_a", "beta"}, cmd_thermal},
        {"battery", "Coherence transfer through a battery and its disturbance of R",
         {"unitary", "h_r", "h_b", "h_s", "battery", "rho_r", "rho_s", "trials"}, cmd_battery},
        {"suite", "Run every acceptance criterion and write a manifest", {}, cmd_suite},
    };
}

Json load_config(const std::string& path) {
    if (path.empty()) return Json::object();
    const std::string text = io::read_file(path);
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ValidationError("config: " + path + ": " + e.what());
    }
    io::require_object(j, "config");
    return j;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Coherence broadcasting and asymmetry toolkit", "asym"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tool_version()));

    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol_feas, tol_infeas;
    bool strict = false;
    app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory (default asym-out/<command>)");
    app.add_option("--seed", seed, "Root seed");
    app.add_flag("--strict", strict, "Exit 2 on Undecided feasibility verdicts");
    app.add_option("--tol-feas", tol_feas, "Residual below which a solve is Feasible");
    app.add_option("--tol-infeas", tol_infeas, "Stalled residual above which a solve is infeasible");

    // Per-command parameter flags; they override the config file.
    Json overrides = Json::object();
    std::size_t perm_n = 0, clock_times = 0, aberg_uses = 0, scan_rounds = 0, feas_iters = 0, ki_grid = 0, battery_trials = 0;
    std::vector<double> clock_alphas, scan_slacks;
    std::vector<std::size_t> aberg_dims;
    std::string aberg_boundary;
    double thermal_beta = 0.0;

    const auto table = command_table();
    std::map<std::string, CLI::App*> subs;
    for (const auto& spec : table) {
        CLI::App* sub = app.add_subcommand(spec.name, spec.description);
        sub->fallthrough();
        subs[spec.name] = sub;
    }
    auto* o_n = subs["permutation"]->add_option("--n", perm_n, "Number of levels");
    auto* o_alphas = subs["clock"]->add_option("--alphas", clock_alphas, "Coherent amplitudes")->delimiter(',');
    auto* o_times = subs["clock"]->add_option("--times", clock_times, "Number of equally spaced times in [0, 2pi)");
    auto* o_dims = subs["aberg"]->add_option("--dims", aberg_dims, "Ladder dimensions")->delimiter(',');
    auto* o_boundary = subs["aberg"]->add_option("--boundary", aberg_boundary, "cyclic or reflecting");
    auto* o_uses = subs["aberg"]->add_option("--uses", aberg_uses, "Uses per run");
    auto* o_slacks = subs["scan"]->add_option("--slacks", scan_slacks, "Reference slack grid")->delimiter(',');
    auto* o_rounds = subs["scan"]->add_option("--rounds", scan_rounds, "Bisection rounds");
    auto* o_iters = subs["feasibility"]->add_option("--max-iterations", feas_iters, "Iteration cap");
    auto* o_grid = subs["ki"]->add_option("--grid", ki_grid, "Orbit sample count");
    auto* o_beta = subs["thermal"]->add_option("--beta", thermal_beta, "Inverse temperature");
    auto* o_trials = subs["battery"]->add_option("--trials", battery_trials, "Random interaction trials");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << tool_version() << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    const CommandSpec* spec = nullptr;
    for (const auto& s : table)
        if (subs.at(s.name)->parsed()) spec = &s;

    try {
        Json config = load_config(config_path);
        if (config.contains("command") && config["command"] != spec->name)
            throw config_error("command", "config is for '" + config["command"].dump() + "', not '" + spec->name + "'");
        std::vector<std::string_view> allowed{"command", "seed", "tol_feas", "tol_infeas"};
        allowed.insert(allowed.end(), spec->keys.begin(), spec->keys.end());
        for (const auto& [key, value] : config.items())
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                throw config_error(key, "unknown field for '" + spec->name + "'");

        if (o_n->count()) config["n"] = perm_n;
        if (o_alphas->count()) config["alphas"] = clock_alphas;
        if (o_times->count()) config["times"] = clock_times;
        if (o_dims->count()) config["dims"] = aberg_dims;
        if (o_boundary->count()) config["boundary"] = aberg_boundary;
        if (o_uses->count()) config["uses"] = aberg_uses;
        if (o_slacks->count()) config["slacks"] = scan_slacks;
        if (o_rounds->count()) config["rounds"] = scan_rounds;
        if (o_iters->count()) config["max_iterations"] = feas_iters;
        if (o_grid->count()) {
            if (config.contains("family")) throw config_error("orbit", "--grid applies to orbit families only");
            if (!config.contains("orbit")) config["orbit"] = Json::object();
            config["orbit"]["grid"] = ki_grid;
        }
        if (o_beta->count()) config["beta"] = thermal_beta;
        if (o_trials->count()) config["trials"] = battery_trials;

        SuiteOptions options;
        options.seed = seed ? *seed : get_count(config, "seed", kDefaultSeed);
        options.tol_feasible = tol_feas ? *tol_feas : get_real(config, "tol_feas", options.tol_feasible);
        options.tol_infeasible = tol_infeas ? *tol_infeas : get_real(config, "tol_infeas", options.tol_infeasible);
        if (!(options.tol_feasible > 0) || !(options.tol_infeasible > options.tol_feasible))
            throw ValidationError("tolerances: need 0 < tol_feas < tol_infeas");
        config["command"] = spec->name;
        config["seed"] = options.seed;
        config["tol_feas"] = options.tol_feasible;
        config["tol_infeas"] = options.tol_infeasible;

        const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path("asym-out") / spec->name : std::filesystem::path(out_dir);
        Run run{spec->name, config, options, strict, ArtifactWriter(dir), out};
        return spec->handler(run);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const Json::exception& e) {
        err << "error: config: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

int run_command(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_command(args, std::cout, std::cerr);
}

}  // namespace asym::cli
