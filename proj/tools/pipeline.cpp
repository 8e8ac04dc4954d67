#include "pipeline.hpp"

#include <filesystem>
#include <iostream>
#include <random>

#include "svg.hpp"

namespace fs = std::filesystem;

namespace ob::cli {

json default_config() {
    return json::parse(R"({
  "out": "ob_out",
  "seed": 1,
  "threads": 1,
  "plot": false,
  "strict_calibration": false,
  "profile": {"b": 30, "s0": 0.98, "s2": 0.05, "convention": "consistent", "kset": [1, 7]},
  "spectrum": {"kmax": 21, "grid_n": 240, "grid_l": 1.0, "full_closure": false},
  "p": null,
  "control": {"method": "projected", "T": null, "T_scale": 1.0},
  "target": {"preset": "contraction", "x0": null, "K": null, "M": null, "f": null},
  "realize": {"xi": 1e-3, "xi_ladder": [1e-1, 1e-2, 1e-3], "horizon": 50, "ladder_horizon": 200,
              "lyap_horizon": 1e5, "lyap_dt": 0.05, "tol": 1e-9, "dt_out": 0.05}
})");
}

void apply_override(json& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw Error("config", "override must look like key.path=value: " + assignment);
    const std::string key = assignment.substr(0, eq), val = assignment.substr(eq + 1);
    json* node = &cfg;
    size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw Error("config", "empty path component in " + key);
        if (!node->is_object()) throw Error("config", "cannot descend into non-object at " + part);
        node = &(*node)[part];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    json v = json::parse(val, nullptr, false);
    *node = v.is_discarded() ? json(val) : v;
}

namespace {

template <class T>
T get(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error("config", std::string("missing or mistyped key '") + key + "'");
    }
}

std::string path(const RunConfig& c, const std::string& name) { return (fs::path(c.out) / name).string(); }

void ensure_out(const RunConfig& c) {
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec || !fs::is_directory(c.out)) throw Error("config", "output directory is not writable: " + c.out);
}

TemperatureProfile load_profile(const RunConfig& c) {
    return profile_from_json(read_json(path(c, "profile.json"), "run the 'spectrum' stage first"));
}

WavenumberSet wavenumbers(const RunConfig& c) { return extended_set(c.p); }

ReductionBasis basis_for(const RunConfig& c, const TemperatureProfile& prof, const WavenumberSet& ws) {
    Grid g = make_grid(c.grid_n, prof.params().h, c.grid_l);
    return reduction_basis(kernel_basis(ws.full, prof, g, c.threads), prof.params());
}

QuadField raw_target(const RunConfig& c) {
    const json& t = c.raw.at("target");
    const std::string preset = t.at("preset").get<std::string>();
    if (preset == "lorenz") return lorenz_field();
    if (preset == "contraction") return contraction_field(c.p);
    QuadField q(c.p);
    q.K = tensor_from_json(t.at("K"));
    q.M = mat_from_json(t.at("M"));
    q.f = vec_from_json(t.at("f"));
    if (q.K.n != c.p || q.M.rows() != c.p || q.M.cols() != c.p || q.f.size() != c.p)
        throw Error("config", "explicit target sizes must all equal p");
    return q;
}

Vec target_x0(const RunConfig& c) {
    const json& x = c.raw.at("target").at("x0");
    if (!x.is_null()) {
        Vec v = vec_from_json(x);
        if (v.size() != c.p) throw Error("config", "target.x0 must have p entries");
        return v;
    }
    if (c.target == "lorenz") return Vec((Vec(3) << 1, 1, 20).finished());
    return Vec::Constant(c.p, 0.1);
}

}  // namespace

RunConfig make_run_config(const json& cfg) {
    RunConfig c;
    c.raw = cfg;
    c.out = get<std::string>(cfg, "out");
    c.seed = get<unsigned>(cfg, "seed");
    c.threads = get<int>(cfg, "threads");
    c.plot = get<bool>(cfg, "plot");
    c.strict_calibration = get<bool>(cfg, "strict_calibration");
    if (c.threads < 1) throw Error("config", "threads must be at least 1");

    const json& pr = cfg.at("profile");
    c.b = get<double>(pr, "b");
    c.s0 = get<double>(pr, "s0");
    c.s2 = get<double>(pr, "s2");
    const auto conv = get<std::string>(pr, "convention");
    if (conv != "consistent" && conv != "literal") throw Error("config", "profile.convention must be consistent|literal");
    c.convention = conv == "literal" ? CuConvention::Literal : CuConvention::Consistent;
    c.kset = get<std::vector<int>>(pr, "kset");
    derive_scales(c.b, c.s0, c.s2, c.convention);  // validates b, s0, s2
    for (int k : c.kset)
        if (k < 1) throw Error("config", "profile.kset entries must be positive");

    const json& sp = cfg.at("spectrum");
    c.kmax = get<int>(sp, "kmax");
    c.grid_n = get<int>(sp, "grid_n");
    c.grid_l = get<double>(sp, "grid_l");
    c.full_closure = get<bool>(sp, "full_closure");
    if (c.kmax < 1 || c.grid_n < 16 || !(c.grid_l > 0)) throw Error("config", "spectrum settings out of range");

    c.target = cfg.at("target").at("preset").get<std::string>();
    if (c.target != "lorenz" && c.target != "contraction" && c.target != "explicit")
        throw Error("config", "unknown target preset '" + c.target + "' (lorenz, contraction, explicit)");
    int ptarget = 0;
    if (c.target == "lorenz") ptarget = 3;
    if (c.target == "explicit") {
        const json& M = cfg.at("target").at("M");
        if (!M.is_array()) throw Error("config", "explicit target needs target.K, target.M and target.f");
        ptarget = static_cast<int>(M.size());
    }
    const json& pj = cfg.at("p");
    if (pj.is_null()) {
        c.p = ptarget ? ptarget : 2;
    } else {
        c.p = pj.get<int>();
        if (ptarget && c.p != ptarget)
            throw Error("config", "p = " + std::to_string(c.p) + " does not match the target dimension " +
                                      std::to_string(ptarget));
    }
    if (c.p < 1 || c.p > 12) throw Error("config", "p must lie in [1, 12]");

    c.control_method = control_method_from_string(get<std::string>(cfg.at("control"), "method"));

    const json& r = cfg.at("realize");
    c.realize.xi = get<double>(r, "xi");
    c.realize.xi_ladder = get<std::vector<double>>(r, "xi_ladder");
    c.realize.horizon = get<double>(r, "horizon");
    c.realize.ladder_horizon = get<double>(r, "ladder_horizon");
    c.realize.lyap_horizon = get<double>(r, "lyap_horizon");
    c.realize.lyap_dt = get<double>(r, "lyap_dt");
    c.realize.integ.tol = get<double>(r, "tol");
    c.realize.integ.dt_out = get<double>(r, "dt_out");
    c.realize.seed = c.seed;
    c.realize.threads = c.threads;
    if (!(c.realize.xi > 0) || !(c.realize.horizon > 0) || !(c.realize.ladder_horizon > 0) ||
        !(c.realize.lyap_horizon >= 0) || !(c.realize.lyap_dt > 0) || !(c.realize.integ.tol > 0) ||
        !(c.realize.integ.dt_out > 0))
        throw Error("config", "realize tolerances, steps and horizons must be positive");
    for (double x : c.realize.xi_ladder)
        if (!(x > 0)) throw Error("config", "xi_ladder entries must be positive");
    return c;
}

void cmd_spectrum(const RunConfig& c) {
    ensure_out(c);
    ScaleParams sp = derive_scales(c.b, c.s0, c.s2, c.convention);
    CalibrationResult cal = calibrate_offsets(c.kset, sp);
    json cj = to_json(cal);
    std::vector<double> d = cal.d;
    if (!cal.ok()) {
        d.assign(c.kset.size(), 0.0);
        cj["offsets_used"] = d;
        std::cerr << "warning [profile] offset calibration " << cj["status"].get<std::string>() << ": " << cal.message
                  << "\n";
    } else {
        cj["offsets_used"] = d;
    }
    cj["kset"] = c.kset;
    write_json(path(c, "calibration.json"), cj);
    if (!cal.ok() && c.strict_calibration)
        throw Error("profile", "offset calibration failed and strict_calibration is set");

    TemperatureProfile prof = make_profile(sp, designed_polynomial(c.kset, d, sp));
    write_json(path(c, "profile.json"), to_json(prof));
    Grid g = make_grid(c.grid_n, sp.h, c.grid_l);
    write_text(path(c, "profile.csv"), profile_csv(prof, g));

    SpectrumOptions so;
    so.pencil_kmax = c.kmax;
    so.pencil_n = c.grid_n;
    so.grid_l = c.grid_l;
    so.full_closure = c.full_closure;
    so.threads = c.threads;
    SpectrumReport rep = spectrum_report(c.kset, c.kmax, prof, so);
    write_text(path(c, "spectrum.csv"), spectrum_csv(rep));
    json sj;
    sj["gap"] = rep.gap;
    sj["kernelResidual"] = rep.kernelResidual;
    sj["tol"] = rep.tol;
    sj["pass"] = rep.pass();
    write_json(path(c, "spectrum_summary.json"), sj);

    for (int k : c.kset) {
        Pencil pc = assemble_pencil(k, prof, g);
        write_text(path(c, "mode_k" + std::to_string(k) + ".csv"), mode_csv(leading_mode(k, pc, g), g));
    }

    svg::Series pen{{}, {}, "#1f77b4", true, "pencil"}, sca{{}, {}, "#d62728", true, "scalar"};
    for (const auto& r : rep.records) {
        if (r.lambda_pencil) pen.x.push_back(r.k), pen.y.push_back(r.lambda_pencil->real());
        if (r.lambda_scalar) sca.x.push_back(r.k), sca.y.push_back(r.lambda_scalar->real());
    }
    write_text(path(c, "spectrum.svg"), svg::plot({pen, sca}, "Spectrum", "k", "Re lambda", true));
    std::cout << "spectrum: kernelResidual " << rep.kernelResidual << ", gap " << rep.gap << "\n";
}

void cmd_reduce(const RunConfig& c) {
    ensure_out(c);
    TemperatureProfile prof = load_profile(c);
    WavenumberSet ws = wavenumbers(c);
    ReductionBasis rb = basis_for(c, prof, ws);
    ReducedSystem rs;
    rs.N = ws.N();
    rs.kset = ws.full;
    rs.K = compute_K(rb);
    rs.M = Mat::Zero(rs.N, rs.N);  // u1 absent
    rs.f = Vec::Zero(rs.N);
    rs.R0 = 1;
    write_json(path(c, "reduced_system.json"), to_json(rs));

    SparsityReport sr = sparsity_report(rs.K, rs.kset);
    const double thr = 1e-3 * sr.max_resonant;
    json tri = json::array();
    for (int i = 0; i < rs.N; ++i)
        for (int j = 0; j < rs.N; ++j)
            for (int l = j; l < rs.N; ++l)
                if (std::abs(rs.K(i, j, l)) > thr)
                    tri.push_back({{"i", i}, {"j", j}, {"l", l}, {"k", {rs.kset[i], rs.kset[j], rs.kset[l]}},
                                   {"K", rs.K(i, j, l)},
                                   {"resonant", is_resonant(rs.kset[i], rs.kset[j], rs.kset[l])}});
    json sj;
    sj["max_resonant"] = sr.max_resonant;
    sj["max_nonresonant"] = sr.max_nonresonant;
    sj["ratio"] = sr.ratio();
    sj["threshold"] = thr;
    sj["above_threshold"] = tri;
    write_json(path(c, "sparsity.json"), sj);
    std::cout << "reduce: N " << rs.N << ", sparsity ratio " << sr.ratio() << "\n";
}

void cmd_control(const RunConfig& c) {
    ensure_out(c);
    ReducedSystem rs = reduced_system_from_json(
        read_json(path(c, "reduced_system.json"), "run the 'reduce' stage first"));
    TemperatureProfile prof = load_profile(c);
    WavenumberSet ws = wavenumbers(c);
    if (rs.kset != ws.full) throw Error("control", "reduced_system.json was built for a different p; rerun 'reduce'");
    ReductionBasis rb = basis_for(c, prof, ws);

    const json& tj = c.raw.at("control").at("T");
    Mat T;
    if (tj.is_null()) {
        std::mt19937_64 rng(c.seed);
        std::normal_distribution<double> nd;
        const double s = c.raw.at("control").at("T_scale").get<double>();
        T.resize(rs.N, rs.N);
        for (int i = 0; i < rs.N; ++i)
            for (int j = 0; j < rs.N; ++j) T(i, j) = s * nd(rng);
    } else {
        T = mat_from_json(tj);
        if (T.rows() != rs.N || T.cols() != rs.N) throw Error("config", "control.T must be N x N");
    }
    ControlSolution cs = synthesize_u1(T, rb, c.control_method);
    cs.gamma = prof.params().gamma;
    cs.u0 = default_u0(prof, rb.grid);
    Mat M = compute_M(cs.profiles, rb);
    json j = to_json(cs, rb.grid);
    j["achieved_M"] = mat_to_json(M);
    const double tn = T.norm();
    j["relative_error"] = tn > 0 ? (M - T).norm() / tn : M.norm();
    write_json(path(c, "control_solution.json"), j);
    G1Field g = g1_from_u1(cs.profiles, rb.grid, prof, cs.u0, cs.gamma);
    write_text(path(c, "u1.csv"), field_csv(g, rb.grid, 64, false));
    write_text(path(c, "g1.csv"), field_csv(g, rb.grid, 64, true));
    std::cout << "control: method " << to_string(cs.method) << ", relative error "
              << j["relative_error"].get<double>() << "\n";
}

void cmd_realize(const RunConfig& c) {
    ensure_out(c);
    ReducedSystem rs = reduced_system_from_json(
        read_json(path(c, "reduced_system.json"), "run the 'reduce' stage first"));
    WavenumberSet ws = wavenumbers(c);
    if (rs.kset != ws.full)
        throw Error("realize", "reduced_system.json has N = " + std::to_string(rs.N) + " but p = " +
                                   std::to_string(c.p) + " needs N = " + std::to_string(ws.N()) + "; rerun 'reduce'");
    RescaleOptions ro;
    ro.seed = c.seed;
    TargetField t = rescale_into_ball(raw_target(c), target_x0(c), ro);
    write_json(path(c, "target.json"), to_json(t));
    RealizationReport rep = realize_target(t, rs.K, ws, c.realize);
    write_json(path(c, "realization_report.json"), to_json(rep));
    write_text(path(c, "trajectory_target.csv"), trajectory_csv(rep.target_traj));
    write_text(path(c, "trajectory_realized.csv"), trajectory_csv(rep.realized_traj));
    if (c.plot) {
        auto proj = [](const Trajectory& tr, int a, int b2, const char* col, const char* lab) {
            svg::Series s;
            s.color = col;
            s.label = lab;
            for (const auto& x : tr.x)
                if (x.size() > std::max(a, b2)) s.x.push_back(x[a]), s.y.push_back(x[b2]);
            return s;
        };
        const int q = std::min(c.p, 3);
        for (int a = 0; a < q; ++a)
            for (int b2 = a + 1; b2 < q; ++b2) {
                const std::string nm = "phase_Y" + std::to_string(a + 1) + "Y" + std::to_string(b2 + 1) + ".svg";
                write_text(path(c, nm),
                           svg::plot({proj(rep.target_traj, a, b2, "#999999", "target"),
                                      proj(rep.realized_traj, a, b2, "#1f77b4", "realized")},
                                     "Slow dynamics", "Y" + std::to_string(a + 1), "Y" + std::to_string(b2 + 1)));
            }
    }
    std::cout << "realize: supError " << rep.supError << ", manifoldResidual " << rep.manifoldResidual.sup;
    if (!rep.lyapunovTarget.empty())
        std::cout << ", LLE target " << rep.lyapunovTarget[0] << " realized " << rep.lyapunovRealized[0];
    std::cout << "\n";
}

}  // namespace ob::cli
