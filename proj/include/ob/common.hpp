#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace ob {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

// Errors carry the pipeline stage that raised them so the CLI can report it.
class Error : public std::runtime_error {
public:
    Error(std::string stage, const std::string& what)
        : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

// Dense rank-3 tensor stored as n*n*n, index (i,j,l).
struct Tensor3 {
    int n = 0;
    std::vector<double> a;

    Tensor3() = default;
    explicit Tensor3(int n_) : n(n_), a(static_cast<size_t>(n_) * n_ * n_, 0.0) {}
    double& operator()(int i, int j, int l) { return a[(static_cast<size_t>(i) * n + j) * n + l]; }
    double operator()(int i, int j, int l) const { return a[(static_cast<size_t>(i) * n + j) * n + l]; }
    double max_abs() const {
        double m = 0;
        for (double v : a) m = std::max(m, std::abs(v));
        return m;
    }
};

// Runs f(i) for i in [0, count) on up to `threads` workers. Results must be
// written by index, which keeps the output independent of scheduling.
template <class F>
void parallel_for(int count, int threads, F&& f);

}  // namespace ob

#include "ob/detail/parallel.hpp"
