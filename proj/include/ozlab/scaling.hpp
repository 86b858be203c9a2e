#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ozlab {

// asymptotic reference forms for the non-intersection / return analysis
double psi_d(int d, double n);                 // 1/n, 1/log(n+1)^2, 1
double phi_d(int d, double n);                 // n^{-(d-1)/2} psi_d(n)
double even_even_prefactor(int d, double n);   // n^2, (n log n)^2, n^{d-1}

struct PowerFit {
    double exponent = 0;
    double constant = 0;
    double exponent_stderr = 0;
    double residual_rms = 0;
};

// least squares on log-log; exact on pure power laws
PowerFit fit_power(const std::vector<double>& ns, const std::vector<double>& ys);

struct RateFit {
    double rate = 0;        // rho in y = C n^{-alpha} e^{-rho n}
    double power = 0;       // alpha
    double log_const = 0;   // log C
    double rate_stderr = 0;
    double residual_rms = 0;
};

// Fits log y = log C - rho n - alpha log n. With pinned_power the power is
// fixed and only (C, rho) are estimated. Optional weights apply to the
// log-scale residuals (w_i = 1/sigma_i).
RateFit fit_rate(const std::vector<double>& ns, const std::vector<double>& ys,
                 std::optional<double> pinned_power = std::nullopt,
                 const std::vector<double>& weights = {});

struct RatioRange {
    double min_ratio = 0;
    double max_ratio = 0;
    double spread() const { return min_ratio > 0 ? max_ratio / min_ratio : 0; }
};

RatioRange bounded_ratio(const std::vector<double>& ns, const std::vector<double>& ys,
                         const std::function<double(double)>& reference);

struct ScalingReport {
    std::string series_id;
    std::string model_form;
    double window_lo = 0;
    double window_hi = 0;
    std::map<std::string, double> params;
    double residual = 0;
    bool pass = false;
    std::string note;
};

std::string reports_to_json(const std::vector<ScalingReport>& reports,
                            const std::vector<std::string>& config_echo = {});

// indices of (ns, ys) falling inside [lo, hi] with positive values required
std::vector<int> window_indices(const std::vector<double>& ns, double lo, double hi);

}  // namespace ozlab
