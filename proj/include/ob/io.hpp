#pragma once

#include <string>

#include <json.hpp>

#include "ob/control.hpp"
#include "ob/realize.hpp"
#include "ob/reduction.hpp"
#include "ob/spectral.hpp"

namespace ob {

using json = nlohmann::ordered_json;

// {b, s0, s2, nu, h, C_U, coeffs[], offsets[]} plus the convention and the
// design target needed to rebuild the profile exactly.
json to_json(const TemperatureProfile& p);
TemperatureProfile profile_from_json(const json& j);

json to_json(const CalibrationResult& c);
json to_json(const ReducedSystem& r);
ReducedSystem reduced_system_from_json(const json& j);
json to_json(const ControlSolution& c, const Grid& grid);
json to_json(const RealizationReport& r);
json to_json(const TargetField& t);
TargetField target_from_json(const json& j);

// Tensor3 as nested arrays [i][j][l]
json tensor_to_json(const Tensor3& K);
Tensor3 tensor_from_json(const json& j);
json mat_to_json(const Mat& M);
Mat mat_from_json(const json& j);
json vec_to_json(const Vec& v);
Vec vec_from_json(const json& j);

// File helpers. Errors carry the stage tag "io".
json read_json(const std::string& path, const std::string& hint = "");
void write_json(const std::string& path, const json& j);
void write_text(const std::string& path, const std::string& text);

// CSV writers; numbers use %.17g so reruns are byte-identical.
std::string fmt(double v);
std::string profile_csv(const TemperatureProfile& p, const Grid& grid);                 // y,U
std::string spectrum_csv(const SpectrumReport& r);  // k,Re_lambda,Im_lambda,method,in_kernel_set
std::string mode_csv(const EigenMode& m, const Grid& grid);                             // y,Re_psi,Im_psi,Re_w,Im_w
std::string field_csv(const G1Field& g, const Grid& grid, int nx, bool g1);             // x,y,value
std::string trajectory_csv(const Trajectory& t);                                        // t,X_1..X_N

}  // namespace ob
