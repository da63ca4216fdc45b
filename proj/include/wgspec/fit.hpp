#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Damped Gauss-Newton least squares with box constraints, plus the exhaustive
// grid search used to cross-check it. Model functions are y = f(x; p) with a
// flat parameter vector; named access goes through ParamSpec/FitResult.

namespace wgspec {

struct Spectrum {
    enum class XKind { detuning, voltage };

    std::vector<double> x;       // strictly increasing
    std::vector<double> y;
    std::vector<double> sigma;   // empty = unit weights, else > 0 per point
    XKind x_kind = XKind::detuning;

    std::size_t size() const { return x.size(); }
    bool has_sigma() const { return !sigma.empty(); }
    void validate() const;       // throws std::invalid_argument
};

struct ParamSpec {
    std::string name;
    double init = 0.0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    bool frozen = false;
};

struct FitConfig {
    int max_iterations = 200;
    double chi2_rel_tol = 1e-10;    // relative chi^2 change for convergence
    double param_rel_tol = 1e-8;    // relative parameter step for convergence

    // per-parameter overrides applied on top of a model's defaults
    std::map<std::string, std::pair<double, double>> bounds;
    std::set<std::string> frozen;
    std::map<std::string, double> initial;

    // x intervals excluded from the residuals (closed intervals [lo, hi])
    std::vector<std::pair<double, double>> mask_windows;

    void validate() const;
    void apply_overrides(std::vector<ParamSpec>& params) const;
    bool masked(double x) const;
};

struct FitResult {
    std::vector<std::string> names;
    std::vector<double> params;
    Eigen::MatrixXd covariance;          // zero rows/cols for frozen parameters
    double chi_squared = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> residuals;       // y - model over all points, masked included
    std::vector<double> chi2_history;    // chi^2 after each accepted step (non-increasing)
    std::vector<std::string> warnings;

    std::size_t index(std::string_view name) const;
    double value(std::string_view name) const;
    double uncertainty(std::string_view name) const;  // sqrt of covariance diagonal
};

using ModelFn = std::function<double(double x, std::span<const double> p)>;

// Weighted Levenberg-Marquardt minimization of sum w_i (y_i - f(x_i; p))^2.
// Non-convergence yields converged = false, never an exception; an exactly
// degenerate Jacobian throws naming the parameters involved.
FitResult fit_curve(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& sigma, std::vector<ParamSpec> params,
                    const ModelFn& model, const FitConfig& config = {});

FitResult fit_curve(const Spectrum& spectrum, std::vector<ParamSpec> params,
                    const ModelFn& model, const FitConfig& config = {});

struct GridAxis {
    std::string name;
    std::vector<double> values;
};

struct GridSearchResult {
    std::vector<std::string> names;   // full parameter list, axis values substituted
    std::vector<double> params;
    double chi_squared = 0.0;
    std::size_t flat_index = 0;       // ties resolved toward the lowest flat index
};

// Exhaustive chi^2 minimization over the Cartesian grid; base supplies the
// fixed values of parameters not on an axis.
GridSearchResult grid_search(const Spectrum& spectrum, std::vector<ParamSpec> base,
                             const std::vector<GridAxis>& axes, const ModelFn& model,
                             const FitConfig& config = {});

}  // namespace wgspec
