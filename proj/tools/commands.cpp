#include "commands.hpp"

#include "fragtail/acceptance.hpp"
#include "fragtail/asymptotics.hpp"
#include "fragtail/errors.hpp"
#include "fragtail/identities.hpp"
#include "fragtail/laplace.hpp"
#include "fragtail/measure_io.hpp"
#include "fragtail/psi.hpp"
#include "fragtail/simulate.hpp"
#include "fragtail/stats.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace fragtail::cli {

void write_json(std::ostream& out, const Json& j)
{
    if (j.is_object()) {
        out << '{';
        bool first = true;
        for (const auto& [k, v] : j.items()) {
            out << (first ? "" : ", ") << Json(k).dump() << ": ";
            write_json(out, v);
            first = false;
        }
        out << '}';
    } else if (j.is_array()) {
        out << '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
            out << (i ? ", " : "");
            write_json(out, j[i]);
        }
        out << ']';
    } else {
        out << j.dump();
    }
}

std::string to_line(const Json& j)
{
    std::ostringstream s;
    write_json(s, j);
    return s.str();
}

namespace {

constexpr double default_cutoff = 0x1p-16;

std::string g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json load_json_file(const std::string& path, const char* what)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(std::string("cannot open ") + what + " file: " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("malformed ") + what + " file " + path + ": " + e.what());
    }
}

struct MeasureArgs {
    std::string path;
    std::optional<double> gamma;

    void add_to(CLI::App* sub)
    {
        sub->add_option("--measure", path, "measure spec JSON")->required();
        sub->add_option("--gamma", gamma, "override the stable index of a stable measure");
    }

    DislocationSpec load(Json& echo) const
    {
        auto doc = nlohmann::json::parse(load_json_file(path, "measure").dump());
        if (gamma) {
            if (doc.value("family", "") != "stable")
                throw ConfigError("--gamma applies to stable measures only");
            doc["params"]["gamma"] = *gamma;
        }
        auto spec = measure_from_json(doc);
        echo["measure_file"] = path;
        echo["measure"] = Json::parse(measure_to_json(spec).dump());
        return spec;
    }
};

AlphaIndex resolve_alpha(const DislocationSpec& spec, std::optional<double> alpha, bool natural_default, Json& echo)
{
    if (!alpha && natural_default)
        alpha = natural_alpha(spec);
    if (!alpha) {
        if (natural_default)
            throw ConfigError("--alpha is required for family " + spec.family_id());
        alpha = -1.0;
    }
    AlphaIndex a(*alpha);
    echo["alpha"] = a.value();
    return a;
}

Json shape_json(const TailShape& s)
{
    Json terms = Json::array();
    for (const auto& e : s.exp_terms)
        terms.push_back(Json::array({e.coefficient, e.power}));
    return {{"poly_exponent", s.poly_exponent}, {"exp_terms", terms}, {"validity", s.validity}};
}

TailShape shape_from_json(const Json& j)
{
    TailShape s;
    try {
        s.poly_exponent = j.at("poly_exponent").get<double>();
        for (const auto& t : j.at("exp_terms")) {
            if (t.is_array())
                s.exp_terms.push_back({t.at(0).get<double>(), t.at(1).get<double>()});
            else
                s.exp_terms.push_back({t.at("coefficient").get<double>(), t.at("power").get<double>()});
        }
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("bad shape document: ") + e.what());
    }
    s.normalize();
    s.validate();
    return s;
}

void emit(const Json& config, Json body)
{
    Json out = {{"config", config}};
    for (auto& [k, v] : body.items())
        out[k] = v;
    std::cout << to_line(out) << '\n';
}

// Output stream that is stdout for "-" and a file otherwise.
struct Sink {
    std::ofstream file;
    std::ostream* out = &std::cout;

    explicit Sink(const std::string& path)
    {
        if (path == "-")
            return;
        file.open(path, std::ios::binary);
        if (!file)
            throw ConfigError("cannot write " + path);
        out = &file;
    }
};

std::vector<double> read_csv_column(const std::string& path, const std::string& column)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open samples file: " + path);
    std::string line;
    std::optional<std::size_t> col;
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');)
            cells.push_back(c);
        if (!col) {
            for (std::size_t i = 0; i < cells.size(); ++i)
                if (cells[i] == column)
                    col = i;
            if (!col && cells.size() == 1)
                col = 0;
            if (!col)
                throw ConfigError("column " + column + " not found in " + path);
            continue;
        }
        if (*col >= cells.size())
            throw ConfigError("short row in " + path);
        char* end = nullptr;
        const double v = std::strtod(cells[*col].c_str(), &end);
        if (end == cells[*col].c_str())
            throw ConfigError("non-numeric value '" + cells[*col] + "' in " + path);
        values.push_back(v);
    }
    if (values.empty())
        throw ConfigError("no samples in " + path);
    return values;
}

template <class F>
void bind(CLI::App* sub, std::function<int()>& action, F run)
{
    sub->callback([&action, run] { action = run; });
}

void add_phi(CLI::App& app, std::function<int()>& action)
{
    auto* sub = app.add_subcommand("phi", "Laplace exponent phi(x) of a measure");
    auto m = std::make_shared<MeasureArgs>();
    auto x = std::make_shared<double>();
    m->add_to(sub);
    sub->add_option("--x", *x)->required();
    bind(sub, action, [m, x] {
        Json cfg = {{"verb", "phi"}};
        const PhiEvaluator eval(m->load(cfg));
        cfg["x"] = *x;
        cfg["rel_tol"] = eval.rel_tol();
        const auto v = eval.phi_detailed(*x);
        emit(cfg, {{"value", v.value}, {"method", to_string(eval.method())}, {"abs_error", v.abs_error}});
        return 0;
    });
}

void add_hcheck(CLI::App& app, std::function<int()>& action)
{
    auto* sub = app.add_subcommand("hcheck", "Elasticity x phi'(x)/phi(x) on a log grid");
    auto m = std::make_shared<MeasureArgs>();
    auto xmax = std::make_shared<double>();
    auto grid = std::make_shared<std::size_t>(200);
    auto delta = std::make_shared<double>(0.01);
    m->add_to(sub);
    sub->add_option("--xmax", *xmax)->required();
    sub->add_option("--grid", *grid, "grid points")->capture_default_str();
    sub->add_option("--delta", *delta, "margin below 1")->capture_default_str();
    bind(sub, action, [=] {
        Json cfg = {{"verb", "hcheck"}};
        const PhiEvaluator eval(m->load(cfg));
        cfg["xmax"] = *xmax;
        cfg["grid"] = *grid;
        cfg["delta"] = *delta;
        const auto h = check_hypothesis_H(eval, *xmax, *grid, *delta);
        emit(cfg, {{"pass", h.pass}, {"tail_sup", h.tail_sup}, {"grid", h.grid}, {"ratio", h.ratio}});
        return 0;
    });
}

void add_psi(CLI::App& app, std::function<int()>& action)
{
    auto* sub = app.add_subcommand("psi", "Inverse psi of x -> x/phi(x)");
    auto m = std::make_shared<MeasureArgs>();
    auto x = std::make_shared<double>();
    m->add_to(sub);
    sub->add_option("--x", *x)->required();
    bind(sub, action, [m, x] {
        Json cfg = {{"verb", "psi"}};
        const PsiSolver solver{PhiEvaluator(m->load(cfg))};
        cfg["x"] = *x;
        cfg["rel_tol"] = solver.rel_tol();
        emit(cfg, {{"psi", solver.psi(*x)}, {"psi_prime", solver.psi_prime(*x)}, {"residual", solver.residual(*x)},
                   {"x_psi", solver.x_psi()}});
        return 0;
    });
}

TailShape shape_for_mode(const DislocationSpec& spec, AlphaIndex alpha, const std::string& mode)
{
    return mode == "lemma9" ? lemma9_tail_shape(phi_expansion(spec), alpha) : example_tail_shape(spec, alpha);
}

void add_tail(CLI::App& app, std::function<int()>& action)
{
    auto* sub = app.add_subcommand("tail", "Tail of the extinction time at t");
    auto m = std::make_shared<MeasureArgs>();
    auto alpha = std::make_shared<std::optional<double>>();
    auto t = std::make_shared<double>();
    auto mode = std::make_shared<std::string>("theorem1");
    auto t0 = std::make_shared<std::optional<double>>();
    m->add_to(sub);
    sub->add_option("--alpha", *alpha, "self-similarity index; defaults to the family's own");
    sub->add_option("--t", *t)->required();
    sub->add_option("--mode", *mode)->check(CLI::IsMember({"theorem1", "lemma9", "example"}))->capture_default_str();
    sub->add_option("--t0", *t0, "lower limit of the integral");
    bind(sub, action, [=] {
        Json cfg = {{"verb", "tail"}, {"mode", *mode}};
        const auto spec = m->load(cfg);
        const AlphaIndex a = resolve_alpha(spec, *alpha, true, cfg);
        cfg["t"] = *t;
        if (*mode == "theorem1") {
            const PsiSolver solver{PhiEvaluator(spec)};
            const auto v = theorem1_rhs(solver, a, *t, *t0);
            cfg["t0"] = v.t0;
            const auto val = v.value();
            emit(cfg, {{"log_value", v.log_value()},
                       {"value_or_null", val ? Json(*val) : Json(nullptr)},
                       {"shape", nullptr},
                       {"t0", v.t0}});
            return 0;
        }
        cfg["t0"] = nullptr;
        const auto s = shape_for_mode(spec, a, *mode);
        const double lv = s.log_value(*t);
        const double v = std::exp(lv);
        emit(cfg, {{"log_value", lv},
                   {"value_or_null", v > 0.0 && std::isfinite(v) ? Json(v) : Json(nullptr)},
                   {"shape", shape_json(s)},
                   {"t0", nullptr}});
        return 0;
    });
}

void add_shape(CLI::App& app, std::function<int()>& action)
{
    auto* sub = app.add_subcommand("shape", "Closed tail shape up to a constant");
    auto m = std::make_shared<MeasureArgs>();
    auto alpha = std::make_shared<std::optional<double>>();
    auto mode = std::make_shared<std::string>("example");
    m->add_to(sub);
    sub->add_option("--alpha", *alpha, "self-similarity index; defaults to the family's own");
    sub->add_option("--mode", *mode)->check(CLI::IsMember({"lemma9", "example"}))->capture_default_str();
    bind(sub, action, [=] {
        Json cfg = {{"verb", "shape"}, {"mode", *mode}};
        const auto spec = m->load(cfg);
        const AlphaIndex a = resolve_alpha(spec, *alpha, !spec.is_finite(), cfg);
        emit(cfg, {{"shape", shape_json(shape_for_mode(spec, a, *mode))}});
        return 0;
    });
}

struct CascadeArgs {
    std::optional<double> alpha;
    double cutoff = default_cutoff;
    std::vector<double> checkpoints;
    std::uint64_t seed = 0;
    std::uint64_t max_events = std::uint64_t(1) << 32;

    void add_to(CLI::App* sub)
    {
        sub->add_option("--alpha", alpha, "self-similarity index (default -1)");
        sub->add_option("--cutoff", cutoff, "fragments below this mass are not expanded")->capture_default_str();
        sub->add_option("--checkpoints", checkpoints, "t1,t2,...")->delimiter(',');
        sub->add_option("--seed", seed)->capture_default_str();
        sub->add_option("--max-events", max_events)->capture_default_str();
    }

    CascadeConfig resolve(const DislocationSpec& spec, Json& echo) const
    {
        CascadeConfig c;
        c.alpha = resolve_alpha(spec, alpha, false, echo);
        c.cutoff = cutoff;
        c.checkpoints = checkpoints;
        c.seed = seed;
        c.max_events = max_events;
        c.validate();
        echo["cutoff"] = cutoff;
        echo["checkpoints"] = checkpoints;
        echo["seed"] = seed;
        echo["max_events"] = max_events;
        return c;
    }
};

void add_simulate(CLI::App& app, std::function<int()>& action)
{
    auto* sub = app.add_subcommand("simulate", "Cascade runs as CSV");
    auto m = std::make_shared<MeasureArgs>();
    auto c = std::make_shared<CascadeArgs>();
    auto runs = std::make_shared<std::uint64_t>(1000);
    auto out = std::make_shared<std::string>("-");
    auto threads = std::make_shared<unsigned>(worker_threads());
    m->add_to(sub);
    c->add_to(sub);
    sub->add_option("--runs", *runs)->capture_default_str();
    sub->add_option("--out", *out, "CSV path, - for stdout")->capture_default_str();
    sub->add_option("--threads", *threads)->check(CLI::PositiveNumber);
    bind(sub, action, [=] {
        Json cfg = {{"verb", "simulate"}};
        const auto spec = m->load(cfg);
        const CascadeSimulator sim(spec, c->resolve(spec, cfg));
        cfg["runs"] = *runs;
        cfg["zeta_rms"] = sim.zeta_rms();
        Sink sink(*out);
        std::ostream& os = *sink.out;
        os << "# config " << to_line(cfg) << '\n' << "run_id,extinction_est,trunc_error_bound";
        for (double t : c->checkpoints)
            for (const char* col : {"F1", "S1", "S2", "tag1", "tag2"})
                os << ',' << col << '@' << g17(t);
        os << ",t_sep\n";

        // Rows are formatted per chunk and written in run order, so output never depends on the thread count.
        constexpr std::uint64_t chunk = 4096;
        std::vector<std::string> rows(chunk);
        std::vector<double> bounds(chunk);
        double max_bound = 0.0;
        for (std::uint64_t first = 0; first < *runs; first += chunk) {
            const std::uint64_t n = std::min(chunk, *runs - first);
            for_each_run(sim, first, n, [&](std::uint64_t i, CascadeRun&& r) {
                std::string row = std::to_string(i) + ',' + g17(r.extinction_est) + ',' + g17(r.trunc_error_bound);
                for (std::size_t k = 0; k < r.checkpoints.size(); ++k) {
                    const auto& cp = r.checkpoints[k];
                    for (double v : {cp.F1, cp.S1, cp.S2, r.tags.tags[0].mass[k], r.tags.tags[1].mass[k]})
                        row += ',' + g17(v);
                }
                row += ',' + g17(r.tags.separation_time) + '\n';
                rows[i - first] = std::move(row);
                bounds[i - first] = r.trunc_error_bound;
            }, *threads);
            for (std::uint64_t k = 0; k < n; ++k) {
                os << rows[k];
                max_bound = std::max(max_bound, bounds[k]);
            }
        }
        os.flush();
        if (*out != "-")
            emit(cfg, {{"out", *out}, {"runs", *runs}, {"max_trunc_error_bound", max_bound}});
        return 0;
    });
}

void add_zeta_tag(CLI::App& app, std::function<int()>& action)
{
    auto* sub = app.add_subcommand("zeta-tag", "Extinction times of the tagged lineage");
    auto m = std::make_shared<MeasureArgs>();
    auto alpha = std::make_shared<std::optional<double>>();
    auto n = std::make_shared<std::uint64_t>(10000);
    auto tol = std::make_shared<double>(1e-6);
    auto seed = std::make_shared<std::uint64_t>(0);
    auto out = std::make_shared<std::string>("-");
    auto threads = std::make_shared<unsigned>(worker_threads());
    m->add_to(sub);
    sub->add_option("--alpha", *alpha, "self-similarity index (default -1)");
    sub->add_option("--n", *n)->capture_default_str();
    sub->add_option("--tol", *tol, "stop once the lineage mass^|alpha| falls below this")->capture_default_str();
    sub->add_option("--seed", *seed)->capture_default_str();
    sub->add_option("--out", *out, "CSV path, - for stdout")->capture_default_str();
    sub->add_option("--threads", *threads)->check(CLI::PositiveNumber);
    bind(sub, action, [=] {
        Json cfg = {{"verb", "zeta-tag"}};
        const auto spec = m->load(cfg);
        const AlphaIndex a = resolve_alpha(spec, *alpha, false, cfg);
        cfg["n"] = *n;
        cfg["tol"] = *tol;
        cfg["seed"] = *seed;
        const ZetaTagSampler sampler(spec, a, *tol);
        const auto samples = sample_zeta_tags(sampler, *seed, *n, *threads);
        Sink sink(*out);
        std::ostream& os = *sink.out;
        os << "# config " << to_line(cfg) << '\n' << "sample_id,value,truncated_mean_bound,steps,killed\n";
        std::vector<double> values;
        double max_bound = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& s = samples[i];
            os << i << ',' << g17(s.value) << ',' << g17(s.truncated_mean_bound) << ',' << s.steps << ','
               << (s.killed ? 1 : 0) << '\n';
            values.push_back(s.value);
            max_bound = std::max(max_bound, s.truncated_mean_bound);
        }
        os.flush();
        if (*out != "-") {
            const double target = 1.0 / sampler.phi_at_abs_alpha();
            const auto t = mean_test(values, target);
            emit(cfg, {{"out", *out},
                       {"mean", t.mean_x},
                       {"stderr", t.stderr_diff},
                       {"target", target},
                       {"z", t.z},
                       {"max_truncated_mean_bound", max_bound}});
        }
        return 0;
    });
}

void add_fit(CLI::App& app, std::function<int()>& action)
{
    auto* sub = app.add_subcommand("fit", "Fit a tail shape to an empirical survival curve");
    auto samples = std::make_shared<std::string>();
    auto column = std::make_shared<std::string>("extinction_est");
    auto shape = std::make_shared<std::string>();
    auto window = std::make_shared<std::vector<double>>(std::vector<double>{1e-3, 0.2});
    auto points = std::make_shared<std::size_t>(40);
    sub->add_option("--samples", *samples, "CSV file")->required();
    sub->add_option("--column", *column)->capture_default_str();
    sub->add_option("--shape", *shape, "shape JSON {poly_exponent, exp_terms: [[c, p], ...]}")->required();
    sub->add_option("--window", *window, "p_lo,p_hi")->delimiter(',')->expected(2);
    sub->add_option("--points", *points)->capture_default_str();
    bind(sub, action, [=] {
        const auto& w = *window;
        if (!(w.size() == 2 && w[0] > 0.0 && w[0] < w[1] && w[1] < 1.0))
            throw ConfigError("--window must be p_lo,p_hi with 0 < p_lo < p_hi < 1");
        const auto s = shape_from_json(load_json_file(*shape, "shape"));
        const auto x = read_csv_column(*samples, *column);
        Json cfg = {{"verb", "fit"}, {"samples", *samples}, {"column", *column}, {"shape", shape_json(s)},
                    {"window", w},   {"points", *points},   {"n", x.size()}};
        const auto curve = survival_curve(x, window_grid(x, w[0], w[1], *points));
        const auto f = shape_fit(curve, s, w[0], w[1]);
        emit(cfg, {{"fitted_constant", f.fitted_constant},
                   {"max_abs_residual", f.max_abs_residual},
                   {"t", f.t},
                   {"residuals", f.residuals}});
        return 0;
    });
}

Json paired_json(const PairedTest& p, double t)
{
    return {{"t", t},       {"mean_x", p.mean_x}, {"mean_y", p.mean_y}, {"diff", p.diff},
            {"stderr_diff", p.stderr_diff}, {"z", finite_or_null(p.z)}, {"pass", p.pass}};
}

void add_identity(CLI::App& app, std::function<int()>& action)
{
    auto* sub = app.add_subcommand("identity", "Exact-in-law identity check on simulated cascades");
    auto suite = std::make_shared<std::string>();
    auto m = std::make_shared<MeasureArgs>();
    auto c = std::make_shared<CascadeArgs>();
    auto runs = std::make_shared<std::uint64_t>(10000);
    sub->add_option("--suite", *suite)->required()->check(CLI::IsMember({"eq10", "eq13", "s2", "joint"}));
    m->add_to(sub);
    c->add_to(sub);
    sub->add_option("--runs", *runs)->capture_default_str();
    bind(sub, action, [=] {
        Json cfg = {{"verb", "identity"}, {"suite", *suite}};
        const auto spec = m->load(cfg);
        const auto cc = c->resolve(spec, cfg);
        cfg["runs"] = *runs;
        const auto rep = run_identity_suite(*suite, spec, cc, *runs);
        Json paired = Json::array();
        for (std::size_t i = 0; i < rep.paired.size(); ++i)
            paired.push_back(paired_json(rep.paired[i], rep.t[i]));
        Json body = {{"suite", rep.suite}, {"pass", rep.pass}, {"t", rep.t}, {"paired", paired}};
        if (rep.ks) {
            body["ks"] = {{"statistic", rep.ks->statistic}, {"critical", rep.ks->critical},
                          {"pass_1pct", rep.ks->pass_1pct}};
            body["p_hat_at_t"] = rep.p_hat_at_t;
        }
        emit(cfg, body);
        return 0;
    });
}

void add_verify(CLI::App& app, std::function<int()>& action)
{
    auto* sub = app.add_subcommand("verify", "Run the acceptance criteria");
    auto opts = std::make_shared<AcceptanceOptions>();
    opts->threads = worker_threads();
    sub->add_option("--seed", opts->seed)->capture_default_str();
    sub->add_option("--threads", opts->threads)->check(CLI::PositiveNumber);
    sub->add_option("--only", opts->only, "criterion ids, e.g. 1,4,7")->delimiter(',')->check(CLI::Range(1, 13));
    bind(sub, action, [opts] {
        const Json cfg = {{"verb", "verify"}, {"seed", opts->seed}, {"threads", opts->threads}, {"only", opts->only}};
        std::cout << "# config " << to_line(cfg) << std::endl;
        const auto results = run_acceptance(*opts, std::cout);
        std::size_t passed = 0;
        for (const auto& r : results)
            passed += r.pass;
        std::cout << passed << '/' << results.size() << " criteria passed" << std::endl;
        return passed == results.size() ? 0 : 3;
    });
}

} // namespace

void register_commands(CLI::App& app, std::function<int()>& action)
{
    add_phi(app, action);
    add_hcheck(app, action);
    add_psi(app, action);
    add_tail(app, action);
    add_shape(app, action);
    add_simulate(app, action);
    add_zeta_tag(app, action);
    add_fit(app, action);
    add_identity(app, action);
    add_verify(app, action);
    app.require_subcommand(1);
}

} // namespace fragtail::cli
