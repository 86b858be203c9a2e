#include "ozlab/scaling.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace ozlab {

double psi_d(int d, double n) {
    if (d == 2) return 1.0 / n;
    if (d == 3) return 1.0 / (std::log(n + 1) * std::log(n + 1));
    return 1.0;
}

double phi_d(int d, double n) { return std::pow(n, -(d - 1) / 2.0) * psi_d(d, n); }

double even_even_prefactor(int d, double n) {
    if (d == 2) return n * n;
    if (d == 3) return n * n * std::log(n) * std::log(n);
    return std::pow(n, d - 1);
}

namespace {

void check_positive(const std::vector<double>& ns, const std::vector<double>& ys) {
    if (ns.size() != ys.size()) throw std::invalid_argument("series length mismatch");
    if (ns.size() < 2) throw std::invalid_argument("need at least 2 points");
    for (double y : ys)
        if (!(y > 0)) throw std::invalid_argument("series must be strictly positive");
    for (double n : ns)
        if (!(n > 0)) throw std::invalid_argument("abscissae must be strictly positive");
}

}  // namespace

PowerFit fit_power(const std::vector<double>& ns, const std::vector<double>& ys) {
    check_positive(ns, ys);
    if (ns.size() < 4) throw std::invalid_argument("power fit needs at least 4 points");
    const int m = static_cast<int>(ns.size());
    Eigen::MatrixXd x(m, 2);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = std::log(ns[i]);
        b(i) = std::log(ys[i]);
    }
    Eigen::VectorXd sol = (x.transpose() * x).ldlt().solve(x.transpose() * b);
    Eigen::VectorXd res = b - x * sol;
    double sigma2 = res.squaredNorm() / std::max(1, m - 2);
    Eigen::MatrixXd cov = sigma2 * (x.transpose() * x).inverse();

    PowerFit fit;
    fit.constant = std::exp(sol(0));
    fit.exponent = sol(1);
    fit.exponent_stderr = std::sqrt(cov(1, 1));
    fit.residual_rms = std::sqrt(res.squaredNorm() / m);
    return fit;
}

RateFit fit_rate(const std::vector<double>& ns, const std::vector<double>& ys,
                 std::optional<double> pinned_power, const std::vector<double>& weights) {
    check_positive(ns, ys);
    const int m = static_cast<int>(ns.size());
    const int cols = pinned_power ? 2 : 3;
    if (m < cols) throw std::invalid_argument("rate fit needs more points than parameters");
    Eigen::MatrixXd x(m, cols);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
        double w = weights.empty() ? 1.0 : weights[i];
        x(i, 0) = w;
        x(i, 1) = -w * ns[i];
        if (!pinned_power) x(i, 2) = -w * std::log(ns[i]);
        b(i) = w * (std::log(ys[i]) + (pinned_power ? *pinned_power * std::log(ns[i]) : 0.0));
    }
    Eigen::MatrixXd xtx = x.transpose() * x;
    if (!(xtx.fullPivLu().isInvertible()))
        throw std::invalid_argument("degenerate design matrix in rate fit");
    Eigen::VectorXd sol = xtx.ldlt().solve(x.transpose() * b);
    Eigen::VectorXd res = b - x * sol;
    double sigma2 = res.squaredNorm() / std::max(1, m - cols);
    Eigen::MatrixXd cov = sigma2 * xtx.inverse();

    RateFit fit;
    fit.log_const = sol(0);
    fit.rate = sol(1);
    fit.power = pinned_power ? *pinned_power : sol(2);
    fit.rate_stderr = std::sqrt(cov(1, 1));
    fit.residual_rms = std::sqrt(res.squaredNorm() / m);
    return fit;
}

RatioRange bounded_ratio(const std::vector<double>& ns, const std::vector<double>& ys,
                         const std::function<double(double)>& reference) {
    check_positive(ns, ys);
    RatioRange range{std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t i = 0; i < ns.size(); ++i) {
        double ref = reference(ns[i]);
        if (!(ref > 0)) throw std::invalid_argument("reference must be strictly positive");
        double r = ys[i] / ref;
        range.min_ratio = std::min(range.min_ratio, r);
        range.max_ratio = std::max(range.max_ratio, r);
    }
    return range;
}

std::vector<int> window_indices(const std::vector<double>& ns, double lo, double hi) {
    std::vector<int> idx;
    for (std::size_t i = 0; i < ns.size(); ++i)
        if (ns[i] >= lo && ns[i] <= hi) idx.push_back(static_cast<int>(i));
    return idx;
}

std::string reports_to_json(const std::vector<ScalingReport>& reports,
                            const std::vector<std::string>& config_echo) {
    nlohmann::json root;
    root["config"] = config_echo;
    auto& list = root["reports"];
    list = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json item;
        item["series_id"] = r.series_id;
        item["model_form"] = r.model_form;
        item["window"] = {r.window_lo, r.window_hi};
        item["params"] = r.params;
        item["residual"] = r.residual;
        item["pass"] = r.pass;
        item["note"] = r.note;
        list.push_back(item);
    }
    return root.dump(2);
}

}  // namespace ozlab
