#include <algorithm>
#include <cmath>
#include <limits>

#include "ob/spectral.hpp"

namespace ob {

SpectrumReport spectrum_report(const std::vector<int>& kset, int kmax, const TemperatureProfile& profile,
                               const SpectrumOptions& opt) {
    const auto& p = profile.params();
    const double bound = opt.apriori_c1 * p.h * p.r * p.b;
    SpectrumReport rep;
    rep.records.resize(kmax);
    Grid grid = make_grid(opt.pencil_n, p.h, opt.grid_l);
    ScalarOptions lead = opt.scalar;
    lead.closure = Closure::Leading;
    ScalarOptions full = opt.scalar;
    full.closure = Closure::Full;

    parallel_for(kmax, opt.threads, [&](int idx) {
        const int k = idx + 1;
        SpectrumRecord rec;
        rec.k = k;
        rec.in_kernel_set = std::find(kset.begin(), kset.end(), k) != kset.end();
        if (k >= bound) {
            rec.apriori_gapped = true;
            rep.records[idx] = rec;
            return;
        }
        try {
            rec.lambda_scalar = find_root_z(k, profile, lead).lambda;
            if (opt.full_closure) rec.lambda_full = find_root_z(k, profile, full).lambda;
            if (k <= opt.pencil_kmax) {
                Pencil pc = assemble_pencil(k, profile, grid);
                CVec lam = pencil_eigenvalues(pc, opt.modes.shift);
                if (lam.size() > 0) rec.lambda_pencil = refine_eigenvalue(pc, lam[0]);
            }
        } catch (const Error& e) {
            throw Error("spectral", "k = " + std::to_string(k) + ": " + e.what());
        }
        rep.records[idx] = rec;
    });

    rep.gap = std::numeric_limits<double>::infinity();
    rep.kernelResidual = 0;
    for (const auto& rec : rep.records) {
        if (rec.apriori_gapped || !rec.lambda_scalar) continue;
        if (rec.in_kernel_set)
            rep.kernelResidual = std::max(rep.kernelResidual, std::abs(*rec.lambda_scalar));
        else
            rep.gap = std::min(rep.gap, -rec.lambda_scalar->real());
    }
    return rep;
}

}  // namespace ob
