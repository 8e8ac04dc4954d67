#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ob/io.hpp"

namespace ob {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json vec_to_json(const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Vec vec_from_json(const json& j) {
    Vec v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

json mat_to_json(const Mat& M) {
    json a = json::array();
    for (int i = 0; i < M.rows(); ++i) a.push_back(vec_to_json(M.row(i).transpose()));
    return a;
}

Mat mat_from_json(const json& j) {
    const int r = static_cast<int>(j.size());
    const int c = r ? static_cast<int>(j[0].size()) : 0;
    Mat M(r, c);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(j[i].size()) != c) throw Error("io", "ragged matrix in JSON");
        for (int k = 0; k < c; ++k) M(i, k) = j[i][k].get<double>();
    }
    return M;
}

json tensor_to_json(const Tensor3& K) {
    json a = json::array();
    for (int i = 0; i < K.n; ++i) {
        json b = json::array();
        for (int j = 0; j < K.n; ++j) {
            json c = json::array();
            for (int l = 0; l < K.n; ++l) c.push_back(K(i, j, l));
            b.push_back(c);
        }
        a.push_back(b);
    }
    return a;
}

Tensor3 tensor_from_json(const json& j) {
    const int n = static_cast<int>(j.size());
    Tensor3 K(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(j[i].size()) != n) throw Error("io", "K tensor is not cubic");
        for (int a = 0; a < n; ++a) {
            if (static_cast<int>(j[i][a].size()) != n) throw Error("io", "K tensor is not cubic");
            for (int l = 0; l < n; ++l) K(i, a, l) = j[i][a][l].get<double>();
        }
    }
    return K;
}

json to_json(const TemperatureProfile& p) {
    const auto& s = p.params();
    const auto& d = p.poly();
    json j;
    j["b"] = s.b;
    j["s0"] = s.s0;
    j["s2"] = s.s2;
    j["nu"] = s.nu;
    j["h"] = s.h;
    j["C_U"] = s.C_U;
    j["coeffs"] = d.coeffs;
    j["offsets"] = d.offsets;
    j["targetQ"] = d.targetQ;
    j["degree"] = d.degree;
    j["convention"] = s.convention == CuConvention::Literal ? "literal" : "consistent";
    j["beta1_log_abs"] = p.log_abs_beta1();
    return j;
}

TemperatureProfile profile_from_json(const json& j) {
    try {
        const double b = j.at("b").get<double>();
        const auto conv = j.value("convention", std::string("consistent")) == "literal" ? CuConvention::Literal
                                                                                          : CuConvention::Consistent;
        const double nu = j.value("nu", 0.0);
        const double nu_default = std::pow(b, 10);
        ScaleParams s = derive_scales(b, j.at("s0").get<double>(), j.at("s2").get<double>(), conv,
                                      std::abs(nu - nu_default) <= 1e-12 * nu_default ? 0.0 : nu);
        DesignPolynomial d;
        d.coeffs = j.at("coeffs").get<std::vector<double>>();
        d.offsets = j.value("offsets", std::vector<double>{});
        d.targetQ = j.value("targetQ", std::vector<double>{});
        d.degree = j.value("degree", static_cast<int>(d.coeffs.size()) - 1);
        return make_profile(s, d);
    } catch (const json::exception& e) {
        throw Error("io", std::string("malformed profile JSON: ") + e.what());
    }
}

json to_json(const CalibrationResult& c) {
    json j;
    j["status"] = c.ok() ? std::string("converged")
                         : (c.status == CalibrationStatus::OutOfRegime ? "out_of_regime" : "infeasible");
    j["offsets"] = c.d;
    j["residual"] = c.residual;
    j["iterations"] = c.iterations;
    j["message"] = c.message;
    return j;
}

json to_json(const ReducedSystem& r) {
    json j;
    j["N"] = r.N;
    j["kset"] = r.kset;
    j["K"] = tensor_to_json(r.K);
    j["M"] = mat_to_json(r.M);
    j["f"] = vec_to_json(r.f);
    j["R0"] = r.R0;
    return j;
}

ReducedSystem reduced_system_from_json(const json& j) {
    try {
        ReducedSystem r;
        r.N = j.at("N").get<int>();
        r.kset = j.at("kset").get<std::vector<int>>();
        r.K = tensor_from_json(j.at("K"));
        r.M = mat_from_json(j.at("M"));
        r.f = vec_from_json(j.at("f"));
        r.R0 = j.value("R0", 1.0);
        if (r.K.n != r.N || r.M.rows() != r.N || r.f.size() != r.N || static_cast<int>(r.kset.size()) != r.N)
            throw Error("io", "reduced system sizes disagree with N");
        return r;
    } catch (const json::exception& e) {
        throw Error("io", std::string("malformed reduced_system JSON: ") + e.what());
    }
}

json to_json(const ControlSolution& c, const Grid& grid) {
    json j;
    j["T"] = mat_to_json(c.targetT);
    j["method"] = to_string(c.method);
    json prof = json::object();
    for (const auto& [n, v] : c.profiles.entries) {
        json rows = json::array();
        for (int i = 0; i < grid.n; ++i) rows.push_back({grid.y[i], v[i]});
        prof[std::to_string(n)] = rows;
    }
    j["profiles"] = prof;
    j["u0"] = c.u0;
    j["gamma"] = c.gamma;
    j["max_moment_error"] = c.max_moment_error;
    j["max_boundary_residual"] = c.max_boundary_residual;
    return j;
}

json to_json(const RealizationReport& r) {
    json j;
    j["supError"] = r.supError;
    j["manifoldResidual"] = r.manifoldResidual.sup;
    j["manifoldResidualMean"] = r.manifoldResidual.mean;
    j["lyapunovTarget"] = r.lyapunovTarget;
    j["lyapunovRealized"] = r.lyapunovRealized;
    j["xi"] = r.xi;
    j["p"] = r.p;
    j["N"] = r.N;
    j["ballRadius"] = r.ballRadius;
    j["leadingDiscrepancy"] = r.leadingDiscrepancy;
    json lad = json::array();
    for (const auto& e : r.ladder)
        lad.push_back({{"xi", e.xi},
                       {"manifoldResidual", e.manifold.sup},
                       {"fieldDiscrepancy", e.discrepancy.empirical},
                       {"c", e.c},
                       {"tube", e.tube}});
    j["ladder"] = lad;
    return j;
}

json to_json(const TargetField& t) {
    json j;
    j["p"] = t.p;
    j["K"] = tensor_to_json(t.W.K);
    j["M"] = mat_to_json(t.W.M);
    j["f"] = vec_to_json(t.W.f);
    j["ballRadius"] = t.ballRadius;
    j["cutoff"] = {{"active", t.cutoff.active}, {"r0", t.cutoff.r0}, {"r1", t.cutoff.r1}, {"kappa", t.cutoff.kappa}};
    j["center"] = vec_to_json(t.center);
    j["scale"] = t.scale;
    j["tau"] = t.tau;
    j["identity"] = t.identity;
    return j;
}

TargetField target_from_json(const json& j) {
    try {
        TargetField t;
        t.p = j.at("p").get<int>();
        t.W = QuadField(t.p);
        t.W.K = tensor_from_json(j.at("K"));
        t.W.M = mat_from_json(j.at("M"));
        t.W.f = vec_from_json(j.at("f"));
        t.ballRadius = j.at("ballRadius").get<double>();
        const auto& c = j.at("cutoff");
        t.cutoff.active = c.at("active").get<bool>();
        t.cutoff.r0 = c.at("r0").get<double>();
        t.cutoff.r1 = c.at("r1").get<double>();
        t.cutoff.kappa = c.at("kappa").get<double>();
        t.center = vec_from_json(j.at("center"));
        t.scale = j.at("scale").get<double>();
        t.tau = j.at("tau").get<double>();
        t.identity = j.at("identity").get<bool>();
        return t;
    } catch (const json::exception& e) {
        throw Error("io", std::string("malformed target JSON: ") + e.what());
    }
}

json read_json(const std::string& path, const std::string& hint) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open " + path + (hint.empty() ? "" : "; " + hint));
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error("io", path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot write " + path);
    out << text;
    if (!out) throw Error("io", "write failed for " + path);
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string profile_csv(const TemperatureProfile& p, const Grid& grid) {
    std::ostringstream o;
    o << "y,U\n";
    for (int i = 0; i < grid.n; ++i) o << fmt(grid.y[i]) << ',' << fmt(p.U(grid.y[i])) << '\n';
    return o.str();
}

std::string spectrum_csv(const SpectrumReport& r) {
    std::ostringstream o;
    o << "k,Re_lambda,Im_lambda,method,in_kernel_set\n";
    auto row = [&](int k, cplx l, const char* m, bool in) {
        o << k << ',' << fmt(l.real()) << ',' << fmt(l.imag()) << ',' << m << ',' << (in ? 1 : 0) << '\n';
    };
    for (const auto& rec : r.records) {
        if (rec.lambda_pencil) row(rec.k, *rec.lambda_pencil, "pencil", rec.in_kernel_set);
        if (rec.lambda_scalar) row(rec.k, *rec.lambda_scalar, "scalar", rec.in_kernel_set);
        if (rec.lambda_full) row(rec.k, *rec.lambda_full, "scalar_full", rec.in_kernel_set);
    }
    return o.str();
}

std::string mode_csv(const EigenMode& m, const Grid& grid) {
    std::ostringstream o;
    o << "y,Re_psi,Im_psi,Re_w,Im_w\n";
    for (int i = 0; i < grid.n; ++i)
        o << fmt(grid.y[i]) << ',' << fmt(m.psi[i].real()) << ',' << fmt(m.psi[i].imag()) << ','
          << fmt(m.w[i].real()) << ',' << fmt(m.w[i].imag()) << '\n';
    return o.str();
}

std::string field_csv(const G1Field& g, const Grid& grid, int nx, bool g1) {
    std::ostringstream o;
    o << "x,y,value\n";
    for (int a = 0; a < nx; ++a) {
        const double x = 2 * M_PI * a / nx;
        for (int i = 0; i < grid.n; ++i) {
            const double y = grid.y[i];
            o << fmt(x) << ',' << fmt(y) << ',' << fmt(g1 ? g.g1(x, y) : g.u1(x, y)) << '\n';
        }
    }
    return o.str();
}

std::string trajectory_csv(const Trajectory& t) {
    std::ostringstream o;
    o << 't';
    const int n = t.x.empty() ? 0 : static_cast<int>(t.x[0].size());
    for (int i = 1; i <= n; ++i) o << ",X_" << i;
    o << '\n';
    for (size_t q = 0; q < t.t.size(); ++q) {
        o << fmt(t.t[q]);
        for (int i = 0; i < n; ++i) o << ',' << fmt(t.x[q][i]);
        o << '\n';
    }
    return o.str();
}

}  // namespace ob
