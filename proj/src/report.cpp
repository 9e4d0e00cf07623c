#include "twistframe/report.hpp"

#include "twistframe/parallel.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>

namespace twistframe::cli {

namespace fs = std::filesystem;

ordered_json Config::to_json() const {
    ordered_json j;
    j["phase_half_width"] = phase_half_width;
    j["phase_per_unit"] = phase_per_unit;
    j["phase_midpoint"] = phase_midpoint;
    j["t_half_width"] = t_half_width;
    j["t_per_unit"] = t_per_unit;
    j["m_radius"] = m_radius;
    j["r_radius"] = r_radius;
    j["l_max"] = l_max;
    j["k_max"] = k_max;
    j["m_max"] = m_max;
    j["division_eps"] = division_eps;
    j["condition_c_threshold"] = condition_c_threshold;
    j["radii"] = radii;
    j["out_dir"] = out_dir;
    j["threads"] = threads;
    j["timing"] = timing;
    return j;
}

Config Config::from_json(const ordered_json& j) {
    Config c;
    auto get = [&](const char* key, auto& slot) {
        if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
    };
    get("phase_half_width", c.phase_half_width);
    get("phase_per_unit", c.phase_per_unit);
    get("phase_midpoint", c.phase_midpoint);
    get("t_half_width", c.t_half_width);
    get("t_per_unit", c.t_per_unit);
    get("m_radius", c.m_radius);
    get("r_radius", c.r_radius);
    get("l_max", c.l_max);
    get("k_max", c.k_max);
    get("m_max", c.m_max);
    get("division_eps", c.division_eps);
    get("condition_c_threshold", c.condition_c_threshold);
    get("radii", c.radii);
    get("out_dir", c.out_dir);
    get("threads", c.threads);
    get("timing", c.timing);
    return c;
}

ordered_json Report::to_json() const {
    ordered_json j;
    j["command"] = command;
    j["config"] = config.to_json();
    j["results"] = ordered_json::array();
    for (const auto& r : results) {
        ordered_json row;
        row["name"] = r.name;
        row["value"] = r.value;
        row["tol"] = r.tol;
        row["provenance"] = r.provenance;
        j["results"].push_back(row);
    }
    j["verdicts"] = ordered_json::array();
    for (const auto& v : verdicts) {
        ordered_json row;
        row["name"] = v.name;
        row["status"] = v.status;
        j["verdicts"].push_back(row);
    }
    j["files"] = files;
    if (seconds) {
        j["seconds"] = *seconds;
    } else {
        j["seconds"] = nullptr;
    }
    return j;
}

void write_json_file(const fs::path& path, const ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

void write_weight_csv(const fs::path& path, const spectral::WeightSamples& w) {
    auto out = open_out(path);
    out << "xi,w\n";
    for (int j = 0; j < w.grid.n; ++j) {
        out << fmt(w.grid.point(j)) << "," << fmt(w.values[j]) << "\n";
    }
}

void write_g_csv(const fs::path& path, const heisenberg::GSamples& g) {
    auto out = open_out(path);
    out << "lambda,re,im\n";
    for (std::size_t j = 0; j < g.values.size(); ++j) {
        out << fmt(g.lambda[j]) << "," << fmt(g.values[j].real()) << ","
            << fmt(g.values[j].imag()) << "\n";
    }
}

void write_gram_csv(const fs::path& path, const twisted::GramSection& g) {
    auto out = open_out(path);
    out << "i,j,re,im\n";
    for (std::size_t i = 0; i < g.dim(); ++i) {
        for (std::size_t j = 0; j < g.dim(); ++j) {
            out << i << "," << j << "," << fmt(g.at(i, j).real()) << ","
                << fmt(g.at(i, j).imag()) << "\n";
        }
    }
}

void write_kernel_csv(const fs::path& path, const weyl::KernelMatrix& k) {
    auto out = open_out(path);
    out << "xi,eta,re,im\n";
    for (int i = 0; i < k.xi_grid.count(); ++i) {
        for (int j = 0; j < k.eta_grid.count(); ++j) {
            out << fmt(k.xi_grid.point(i)) << "," << fmt(k.eta_grid.point(j))
                << "," << fmt(k.at(i, j).real()) << "," << fmt(k.at(i, j).imag())
                << "\n";
        }
    }
}

void write_kernel_sidecar(const fs::path& path, const weyl::KernelMatrix& k) {
    ordered_json j;
    auto grid_json = [](const AxisGrid& g) {
        ordered_json gj;
        gj["half_width"] = g.half_width();
        gj["per_unit"] = g.samples_per_unit();
        gj["midpoint"] = g.midpoint();
        gj["count"] = g.count();
        return gj;
    };
    j["xi_grid"] = grid_json(k.xi_grid);
    j["eta_grid"] = grid_json(k.eta_grid);
    j["lambda"] = k.lambda;
    j["analytic_model"] = k.model != nullptr;
    write_json_file(path, j);
}

SampledFunction make_generator(const std::string& name, const Config& cfg) {
    const bool indicator_like = name != "gaussian";
    AxisGrid ax = make_grid(cfg.phase_half_width, cfg.phase_per_unit,
                            cfg.phase_midpoint && indicator_like);
    GridSpec spec = phase_plane_spec(ax, ax);
    if (name == "unit-square") {
        return sample_separable(
            {Factor1D::indicator(0, 1), Factor1D::indicator(0, 1)}, spec);
    }
    if (name == "rect") {
        return sample_separable(
            {Factor1D::indicator(0, 2), Factor1D::indicator(0, 1)}, spec);
    }
    if (name == "gaussian") {
        return sample_separable(
            {Factor1D::gaussian(kPi), Factor1D::gaussian(kPi)}, spec);
    }
    if (name == "comb") {
        auto square = sample_separable(
            {Factor1D::indicator(0, 1), Factor1D::indicator(0, 1)}, spec);
        twisted::CoefficientField c;
        c.set({0, 0}, 1.0);
        c.set({1, 0}, 1.0);
        return twisted::synthesize(c, square);
    }
    throw CLI::ValidationError(
        "--phi", "unknown generator '" + name +
                      "' (choose unit-square, rect, gaussian, comb)");
}

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start =
        std::chrono::steady_clock::now();
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start)
            .count();
    }
};

int finish(Report& rep, const Timer& timer, int code) {
    if (rep.config.timing) rep.seconds = timer.elapsed();
    const fs::path dir(rep.config.out_dir);
    fs::create_directories(dir);
    const fs::path report_path = dir / "report.json";
    write_json_file(report_path, rep.to_json());
    std::printf("%s: %s\n", rep.command.c_str(),
                code == 0 ? "ok" : (code == 2 ? "refused" : "error"));
    for (const auto& v : rep.verdicts) {
        std::printf("  %s: %s\n", v.name.c_str(), v.status.c_str());
    }
    std::printf("  report: %s\n", report_path.string().c_str());
    return code;
}

int cmd_weight(Report& rep, const std::string& phi_name,
               const std::string& csv_name) {
    Timer timer;
    auto phi = make_generator(phi_name, rep.config);
    auto k = weyl::weyl_kernel(phi, 1.0);
    auto w = spectral::weight_function(k, rep.config.m_radius);
    const fs::path dir(rep.config.out_dir);
    fs::create_directories(dir);
    write_weight_csv(dir / csv_name, w);
    rep.files.push_back(csv_name);
    const double n2 = phi.norm_sq();
    rep.results.push_back({"weight_integral", w.integral(),
                           w.tail_bound + 1e-2 * n2, "lattice-sum"});
    rep.results.push_back({"generator_norm_sq", n2, 0.0, "quadrature"});
    rep.results.push_back({"weight_min", w.min_value(), 0.0, "lattice-sum"});
    rep.results.push_back({"weight_max", w.max_value(), 0.0, "lattice-sum"});
    rep.results.push_back({"tail_bound", w.tail_bound, 0.0, "decay-estimate"});
    const bool mass_ok =
        std::abs(w.integral() - n2) <= w.tail_bound + 1e-2 * n2;
    rep.verdicts.push_back({"mass-identity", mass_ok ? "pass" : "fail"});
    return finish(rep, timer, 0);
}

int cmd_condition_c(Report& rep, const std::string& phi_name) {
    Timer timer;
    auto phi = make_generator(phi_name, rep.config);
    auto k = weyl::weyl_kernel(phi, 1.0);
    auto cc = spectral::condition_c_residual(k, rep.config.l_max,
                                             rep.config.m_radius);
    ordered_json rows = ordered_json::array();
    for (const auto& r : cc.rows) {
        ordered_json row;
        row["l"] = r.l;
        row["residual"] = r.sup_residual;
        row["threshold"] = cc.threshold;
        row["verdict"] = r.sup_residual <= cc.threshold ? "ok" : "violated";
        rows.push_back(row);
    }
    const fs::path dir(rep.config.out_dir);
    fs::create_directories(dir);
    write_json_file(dir / "condition_c.json", rows);
    rep.files.push_back("condition_c.json");
    rep.results.push_back({"max_residual", cc.max_residual(), cc.threshold,
                           "lattice-sum"});
    rep.results.push_back({"tail_bound", cc.tail_bound, 0.0, "decay-estimate"});
    rep.verdicts.push_back(
        {"condition-c", cc.satisfied ? "satisfied" : "violated"});
    return finish(rep, timer, 0);
}

int cmd_gram(Report& rep, const std::string& phi_name, int radius) {
    Timer timer;
    auto phi = make_generator(phi_name, rep.config);
    auto g = twisted::gram_matrix(phi, radius, twisted::GramBuild::translated);
    const fs::path dir(rep.config.out_dir);
    fs::create_directories(dir);
    write_gram_csv(dir / "gram.csv", g);
    ordered_json summary;
    summary["radius"] = g.radius;
    summary["dim"] = g.dim();
    summary["lambda_min"] = g.lambda_min;
    summary["lambda_max"] = g.lambda_max;
    summary["sigma_min"] = g.sigma_min;
    write_json_file(dir / "gram_summary.json", summary);
    rep.files.push_back("gram.csv");
    rep.files.push_back("gram_summary.json");
    rep.results.push_back({"lambda_min", g.lambda_min, 0.0, "eigensolve"});
    rep.results.push_back({"lambda_max", g.lambda_max, 0.0, "eigensolve"});
    rep.results.push_back({"sigma_min", g.sigma_min, 0.0, "eigensolve"});
    return finish(rep, timer, 0);
}

int cmd_dual(Report& rep, const std::string& phi_name) {
    Timer timer;
    auto phi = make_generator(phi_name, rep.config);
    auto k = weyl::weyl_kernel(phi, 1.0);
    auto w = spectral::weight_function(k, rep.config.m_radius);
    auto res = spectral::canonical_dual(phi, w, rep.config.division_eps);
    rep.results.push_back({"weight_min", w.min_value(), 0.0, "lattice-sum"});
    rep.results.push_back(
        {"reciprocal_estimate", res.probe.estimates.back(), 0.0, "quadrature"});
    if (res.refused) {
        rep.verdicts.push_back({"canonical-dual", "refused"});
        rep.verdicts.push_back(
            {"reciprocal-integrability",
             res.probe.finite ? "finite" : "divergent"});
        rep.results.push_back({"diagnostic_flag", 1.0, 0.0, res.diagnostic});
        return finish(rep, timer, 2);
    }
    const double dev = frames::biorthogonality_check(*res.dual, phi, 3);
    auto wd = spectral::weight_function(*res.dual_kernel, rep.config.m_radius);
    const fs::path dir(rep.config.out_dir);
    fs::create_directories(dir);
    write_weight_csv(dir / "dual_weight.csv", wd);
    rep.files.push_back("dual_weight.csv");
    rep.results.push_back({"biorthogonality_deviation", dev, 1e-2, "quadrature"});
    rep.verdicts.push_back({"canonical-dual", "constructed"});
    rep.verdicts.push_back({"reciprocal-integrability", "finite"});
    rep.verdicts.push_back(
        {"biorthogonality", dev <= 1e-2 ? "pass" : "fail"});
    return finish(rep, timer, 0);
}

int cmd_probe(Report& rep, const std::string& phi_name) {
    Timer timer;
    auto phi = make_generator(phi_name, rep.config);
    auto k = weyl::weyl_kernel(phi, 1.0);
    auto w = spectral::weight_function(k, rep.config.m_radius);
    auto cc = spectral::condition_c_residual(k, rep.config.l_max,
                                             rep.config.m_radius);
    auto bessel =
        frames::bessel_bound_estimate(phi, rep.config.radii, w, cc.satisfied);
    auto indep = frames::independence_probe(phi, rep.config.radii, w);
    auto recip = spectral::reciprocal_probe(w);

    const fs::path dir(rep.config.out_dir);
    fs::create_directories(dir);
    auto out = open_out(dir / "probe.csv");
    out << "radius,lambda_min,lambda_max,sigma_min\n";
    for (std::size_t i = 0; i < bessel.radii.size(); ++i) {
        out << bessel.radii[i] << "," << fmt(bessel.lambda_min[i]) << ","
            << fmt(bessel.lambda_max[i]) << "," << fmt(indep.sigma_min[i]) << "\n";
    }
    out.close();
    rep.files.push_back("probe.csv");
    rep.results.push_back({"sup_weight", bessel.sup_w, 0.0, "lattice-sum"});
    rep.results.push_back({"inf_weight", bessel.inf_w, 0.0, "lattice-sum"});
    rep.results.push_back(
        {"lambda_max_final", bessel.lambda_max.back(), 1e-2, "eigensolve"});
    rep.results.push_back(
        {"sigma_min_final", indep.sigma_min.back(), 0.0, "eigensolve"});
    rep.verdicts.push_back({"bessel", bessel.verdict});
    rep.verdicts.push_back({"independence", indep.verdict});
    rep.verdicts.push_back(
        {"reciprocal-integrability", recip.finite ? "finite" : "divergent"});
    return finish(rep, timer, 0);
}

int cmd_h_g(Report& rep, int example, int kk, int ll) {
    Timer timer;
    auto phi = heisenberg::example_factory(example);
    auto cert = heisenberg::verify_scaling_plancherel(phi, {0.25, 0.5});
    if (!cert.verified) {
        rep.verdicts.push_back({"scaling-plancherel", "failed"});
        return finish(rep, timer, 2);
    }
    auto g = heisenberg::G_function(phi, kk, ll, cert, 64, rep.config.r_radius);
    const fs::path dir(rep.config.out_dir);
    fs::create_directories(dir);
    write_g_csv(dir / "g.csv", g);
    ordered_json meta;
    meta["k"] = g.k;
    meta["l"] = g.l;
    meta["r_radius"] = g.r_radius;
    meta["tail_bound"] = g.tail_bound;
    meta["route"] = "reduced";
    write_json_file(dir / "g_meta.json", meta);
    rep.files.push_back("g.csv");
    rep.files.push_back("g_meta.json");
    rep.results.push_back({"g_min", g.min_real(), 0.0, "lattice-sum"});
    rep.results.push_back({"g_max", g.max_real(), 0.0, "lattice-sum"});
    rep.results.push_back({"g_integral", g.integral_real(), 1e-2, "quadrature"});
    rep.verdicts.push_back({"scaling-plancherel", "verified"});
    return finish(rep, timer, 0);
}

int cmd_h_condition_c(Report& rep, int example) {
    Timer timer;
    auto phi = heisenberg::example_factory(example);
    auto cc = heisenberg::condition_c_residual_h(
        phi, rep.config.k_max, rep.config.l_max, rep.config.m_max,
        rep.config.condition_c_threshold);
    rep.results.push_back(
        {"max_residual", cc.max_residual, cc.threshold, "quadrature"});
    if (example == 6) {
        rep.results.push_back({"step_factor_tail_mass", step_decay_tail_mass(3),
                               0.0, "closed-form"});
    }
    rep.verdicts.push_back(
        {"condition-c", cc.satisfied ? "satisfied" : "violated"});
    return finish(rep, timer, 0);
}

int cmd_h_dual(Report& rep, int example) {
    Timer timer;
    auto phi = heisenberg::example_factory(example);
    auto cert = heisenberg::verify_scaling_plancherel(phi, {0.25, 0.5});
    if (!cert.verified) {
        rep.verdicts.push_back({"scaling-plancherel", "failed"});
        return finish(rep, timer, 2);
    }
    auto res = heisenberg::canonical_dual_h(phi, cert, rep.config.division_eps);
    rep.results.push_back({"g00_min", res.g00.values.empty()
                                          ? 0.0
                                          : res.g00.min_real(),
                           0.0, "lattice-sum"});
    if (res.refused) {
        rep.verdicts.push_back({"canonical-dual", "refused"});
        rep.results.push_back({"diagnostic_flag", 1.0, 0.0, res.diagnostic});
        return finish(rep, timer, 2);
    }
    double dev = 0.0;
    for (int k = -2; k <= 2; ++k) {
        for (int l = -2; l <= 2; ++l) {
            for (int m = -2; m <= 2; ++m) {
                const cplx ip = heisenberg::inner_product_h(
                    heisenberg::left_translate(*res.dual, {k, l, m}), phi);
                const cplx expect = (k == 0 && l == 0 && m == 0) ? 1.0 : 0.0;
                dev = std::max(dev, std::abs(ip - expect));
            }
        }
    }
    rep.results.push_back({"biorthogonality_deviation", dev, 1e-3, "quadrature"});
    rep.verdicts.push_back({"canonical-dual", "constructed"});
    rep.verdicts.push_back({"biorthogonality", dev <= 1e-3 ? "pass" : "fail"});
    return finish(rep, timer, 0);
}

int cmd_reproduce(Report& rep, const std::string& target) {
    Timer timer;
    int example = 0;
    if (target.rfind("example-", 0) == 0) {
        example = std::atoi(target.c_str() + 8);
    }
    if (example < 1 || example > 6) {
        throw CLI::ValidationError("reproduce",
                                   "expected example-1 .. example-6");
    }
    auto phi = heisenberg::example_factory(example);
    auto cc = heisenberg::condition_c_residual_h(
        phi, rep.config.k_max, rep.config.l_max, rep.config.m_max,
        rep.config.condition_c_threshold);
    rep.results.push_back(
        {"condition_c_residual", cc.max_residual, cc.threshold, "quadrature"});
    if (example == 2) {
        const cplx v = heisenberg::lattice_autocorrelation(phi, {0, 0, 1});
        rep.results.push_back(
            {"autocorrelation_001", v.real(), 1e-4, "quadrature"});
    }
    if (example == 5) {
        const cplx v = heisenberg::lattice_autocorrelation(phi, {1, 0, 0});
        rep.results.push_back(
            {"autocorrelation_200", v.real(), 1e-2, "quadrature"});
    }
    rep.verdicts.push_back(
        {"condition-c", cc.satisfied ? "satisfied" : "violated"});
    return finish(rep, timer, 0);
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"twistframe: twisted shift-invariant space diagnostics"};
    app.require_subcommand(1);
    app.fallthrough(true);

    std::string config_path;
    std::string out_dir;
    int threads = -1;
    bool timing = false;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out-dir", out_dir, "output directory");
    app.add_option("--threads", threads, "worker thread count");
    app.add_flag("--timing", timing, "record wall-clock in the report");

    std::string phi_name = "unit-square";
    int m_radius = -1, l_max = -1, radius = 2, example = 1, g_k = 0, g_l = 0;
    double eps = -1.0;
    std::string repro_target;

    auto* weight = app.add_subcommand("weight", "weight function w on the torus");
    weight->add_option("--phi", phi_name, "generator name");
    weight->add_option("--M", m_radius, "lattice sum radius");
    std::string weight_csv = "weight.csv";
    weight->add_option("--out", weight_csv, "weight CSV filename");

    auto* ccmd = app.add_subcommand("condition-c", "off-diagonal periodization residuals");
    ccmd->add_option("--phi", phi_name);
    ccmd->add_option("--M", m_radius);
    ccmd->add_option("--l-max", l_max);

    auto* gram = app.add_subcommand("gram", "Gram section of twisted translates");
    gram->add_option("--phi", phi_name);
    gram->add_option("--radius", radius);

    auto* dual = app.add_subcommand("dual", "canonical dual construction");
    dual->add_option("--phi", phi_name);
    dual->add_option("--eps", eps, "division threshold");

    auto* probe = app.add_subcommand("probe", "Bessel/independence section probes");
    probe->add_option("--phi", phi_name);

    auto* hg = app.add_subcommand("heisenberg-g", "bracket G^phi_{k,l} samples");
    hg->add_option("--example", example)->check(CLI::Range(1, 6));
    hg->add_option("--k", g_k);
    hg->add_option("--l", g_l);

    auto* hcc = app.add_subcommand("heisenberg-condition-c",
                                   "lattice autocorrelation residuals");
    hcc->add_option("--example", example)->check(CLI::Range(1, 6));

    auto* hdual = app.add_subcommand("heisenberg-dual", "canonical dual on the group");
    hdual->add_option("--example", example)->check(CLI::Range(1, 6));

    auto* repro = app.add_subcommand("reproduce", "worked examples end to end");
    repro->add_option("target", repro_target, "example-1 .. example-6")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    Config cfg;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                std::fprintf(stderr, "cannot read config %s\n", config_path.c_str());
                return 1;
            }
            cfg = Config::from_json(ordered_json::parse(in));
        }
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (threads >= 1) cfg.threads = threads;
        if (threads < 0 && cfg.threads <= 0) cfg.threads = default_thread_count();
        if (timing) cfg.timing = true;
        // module-internal data-parallel loops read the thread cap from the
        // environment
        setenv("TWISTFRAME_THREADS", std::to_string(cfg.threads).c_str(), 1);
        if (m_radius >= 1) cfg.m_radius = m_radius;
        if (l_max >= 1) cfg.l_max = l_max;
        if (eps > 0.0) cfg.division_eps = eps;

        Report rep;
        rep.config = cfg;
        if (weight->parsed()) {
            rep.command = "weight";
            return cmd_weight(rep, phi_name, weight_csv);
        }
        if (ccmd->parsed()) {
            rep.command = "condition-c";
            return cmd_condition_c(rep, phi_name);
        }
        if (gram->parsed()) {
            rep.command = "gram";
            return cmd_gram(rep, phi_name, radius);
        }
        if (dual->parsed()) {
            rep.command = "dual";
            return cmd_dual(rep, phi_name);
        }
        if (probe->parsed()) {
            rep.command = "probe";
            return cmd_probe(rep, phi_name);
        }
        if (hg->parsed()) {
            rep.command = "heisenberg-g";
            return cmd_h_g(rep, example, g_k, g_l);
        }
        if (hcc->parsed()) {
            rep.command = "heisenberg-condition-c";
            return cmd_h_condition_c(rep, example);
        }
        if (hdual->parsed()) {
            rep.command = "heisenberg-dual";
            return cmd_h_dual(rep, example);
        }
        if (repro->parsed()) {
            rep.command = "reproduce";
            return cmd_reproduce(rep, repro_target);
        }
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}

}  // namespace twistframe::cli
