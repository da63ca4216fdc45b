#include "wgspec/fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wgspec {

void Spectrum::validate() const {
    if (x.size() != y.size())
        throw std::invalid_argument("Spectrum: x and y lengths differ");
    if (has_sigma() && sigma.size() != x.size())
        throw std::invalid_argument("Spectrum: sigma length differs from data");
    if (x.size() < 8)
        throw std::invalid_argument("Spectrum: needs at least 8 points, got " +
                                    std::to_string(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
            throw std::invalid_argument("Spectrum: non-finite sample at index " +
                                        std::to_string(i));
        if (i > 0 && x[i] <= x[i - 1])
            throw std::invalid_argument("Spectrum: x must be strictly increasing at index " +
                                        std::to_string(i));
        if (has_sigma() && (!std::isfinite(sigma[i]) || sigma[i] <= 0.0))
            throw std::invalid_argument("Spectrum: sigma must be positive at index " +
                                        std::to_string(i));
    }
}

void FitConfig::validate() const {
    if (max_iterations < 1) throw std::invalid_argument("FitConfig: max_iterations must be >= 1");
    if (!(chi2_rel_tol > 0.0) || !(param_rel_tol > 0.0))
        throw std::invalid_argument("FitConfig: tolerances must be positive");
    for (const auto& [name, b] : bounds)
        if (!(b.first < b.second))
            throw std::invalid_argument("FitConfig: bounds for '" + name + "' are not ordered");
    for (const auto& w : mask_windows)
        if (!(w.first <= w.second))
            throw std::invalid_argument("FitConfig: mask window is not ordered");
}

void FitConfig::apply_overrides(std::vector<ParamSpec>& params) const {
    for (auto& p : params) {
        if (auto it = bounds.find(p.name); it != bounds.end()) {
            p.lower = it->second.first;
            p.upper = it->second.second;
        }
        if (auto it = initial.find(p.name); it != initial.end()) p.init = it->second;
        if (frozen.count(p.name)) p.frozen = true;
    }
}

bool FitConfig::masked(double x) const {
    for (const auto& w : mask_windows)
        if (x >= w.first && x <= w.second) return true;
    return false;
}

std::size_t FitResult::index(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    throw std::out_of_range("FitResult: no parameter named '" + std::string(name) + "'");
}

double FitResult::value(std::string_view name) const { return params[index(name)]; }

double FitResult::uncertainty(std::string_view name) const {
    const auto i = static_cast<Eigen::Index>(index(name));
    return std::sqrt(std::max(0.0, covariance(i, i)));
}

namespace {

double clamp_to(const ParamSpec& spec, double v) {
    return std::clamp(v, spec.lower, spec.upper);
}

struct Workspace {
    std::vector<std::size_t> used;        // unmasked point indices
    std::vector<double> weight_sqrt;      // sqrt(w_i) on used points
};

double chi_squared_at(const std::vector<double>& x, const std::vector<double>& y,
                      const Workspace& ws, const ModelFn& model,
                      std::span<const double> p) {
    double chi2 = 0.0;
    for (std::size_t k = 0; k < ws.used.size(); ++k) {
        const std::size_t i = ws.used[k];
        const double r = ws.weight_sqrt[k] * (y[i] - model(x[i], p));
        chi2 += r * r;
    }
    return chi2;
}

// Weighted Jacobian (rows = used points, cols = free parameters) by forward
// differences with step max(1e-6 |p|, 1e-9), stepping inward at a bound.
Eigen::MatrixXd jacobian(const std::vector<double>& x, const Workspace& ws,
                         const ModelFn& model, const std::vector<ParamSpec>& specs,
                         const std::vector<std::size_t>& free_idx, std::vector<double> p,
                         const std::vector<double>& f0) {
    const auto n = static_cast<Eigen::Index>(ws.used.size());
    const auto k = static_cast<Eigen::Index>(free_idx.size());
    Eigen::MatrixXd jac(n, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        const std::size_t j = free_idx[static_cast<std::size_t>(c)];
        double step = std::max(1e-6 * std::abs(p[j]), 1e-9);
        if (p[j] + step > specs[j].upper) step = -step;
        const double saved = p[j];
        p[j] = saved + step;
        for (Eigen::Index r = 0; r < n; ++r) {
            const std::size_t i = ws.used[static_cast<std::size_t>(r)];
            const double fi = model(x[i], p);
            jac(r, c) = ws.weight_sqrt[static_cast<std::size_t>(r)] *
                        (fi - f0[static_cast<std::size_t>(r)]) / step;
        }
        p[j] = saved;
    }
    return jac;
}

void check_degeneracy(const Eigen::MatrixXd& jac, const std::vector<ParamSpec>& specs,
                      const std::vector<std::size_t>& free_idx) {
    const Eigen::Index k = jac.cols();
    std::vector<double> norms(static_cast<std::size_t>(k));
    for (Eigen::Index c = 0; c < k; ++c) {
        norms[static_cast<std::size_t>(c)] = jac.col(c).norm();
        if (norms[static_cast<std::size_t>(c)] == 0.0)
            throw std::runtime_error("singular Jacobian: parameter '" +
                                     specs[free_idx[static_cast<std::size_t>(c)]].name +
                                     "' has no effect on the model");
    }
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = a + 1; b < k; ++b) {
            const double cosab = std::abs(jac.col(a).dot(jac.col(b))) /
                                 (norms[static_cast<std::size_t>(a)] *
                                  norms[static_cast<std::size_t>(b)]);
            if (cosab > 1.0 - 1e-12)
                throw std::runtime_error(
                    "singular Jacobian: parameters '" +
                    specs[free_idx[static_cast<std::size_t>(a)]].name + "' and '" +
                    specs[free_idx[static_cast<std::size_t>(b)]].name + "' are degenerate");
        }
    }
}

}  // namespace

FitResult fit_curve(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& sigma, std::vector<ParamSpec> params,
                    const ModelFn& model, const FitConfig& config) {
    config.validate();
    config.apply_overrides(params);
    if (x.size() != y.size()) throw std::invalid_argument("fit_curve: x and y lengths differ");
    if (!sigma.empty() && sigma.size() != x.size())
        throw std::invalid_argument("fit_curve: sigma length differs from data");

    Workspace ws;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (config.masked(x[i])) continue;
        ws.used.push_back(i);
        ws.weight_sqrt.push_back(sigma.empty() ? 1.0 : 1.0 / sigma[i]);
    }

    std::vector<std::size_t> free_idx;
    for (std::size_t j = 0; j < params.size(); ++j)
        if (!params[j].frozen) free_idx.push_back(j);

    if (ws.used.size() < free_idx.size())
        throw std::invalid_argument("fit_curve: fewer usable points than free parameters");

    std::vector<double> p(params.size());
    for (std::size_t j = 0; j < params.size(); ++j)
        p[j] = params[j].frozen ? params[j].init : clamp_to(params[j], params[j].init);

    FitResult out;
    for (const auto& s : params) out.names.push_back(s.name);

    const auto n_used = ws.used.size();
    const auto k_free = free_idx.size();

    double chi2 = chi_squared_at(x, y, ws, model, p);
    out.chi2_history.push_back(chi2);

    double lambda = 1e-3;
    constexpr double lambda_max = 1e13;
    bool converged = false;
    int iter = 0;

    std::vector<double> f0(n_used);
    Eigen::MatrixXd jac;

    for (; iter < config.max_iterations && !converged && k_free > 0; ++iter) {
        for (std::size_t r = 0; r < n_used; ++r) f0[r] = model(x[ws.used[r]], p);
        jac = jacobian(x, ws, model, params, free_idx, p, f0);
        if (iter == 0) check_degeneracy(jac, params, free_idx);

        Eigen::VectorXd rw(static_cast<Eigen::Index>(n_used));
        for (std::size_t r = 0; r < n_used; ++r)
            rw(static_cast<Eigen::Index>(r)) = ws.weight_sqrt[r] * (y[ws.used[r]] - f0[r]);

        const Eigen::MatrixXd a = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * rw;
        Eigen::VectorXd diag = a.diagonal().cwiseMax(1e-30);

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd damped = a;
            damped.diagonal() += lambda * diag;
            const Eigen::VectorXd delta = damped.ldlt().solve(g);

            std::vector<double> p_try = p;
            double max_rel_step = 0.0;
            for (std::size_t c = 0; c < k_free; ++c) {
                const std::size_t j = free_idx[c];
                p_try[j] = clamp_to(params[j], p[j] + delta(static_cast<Eigen::Index>(c)));
                max_rel_step = std::max(max_rel_step, std::abs(p_try[j] - p[j]) /
                                                          std::max(std::abs(p[j]), 1e-12));
            }

            const double chi2_try = chi_squared_at(x, y, ws, model, p_try);
            if (chi2_try <= chi2) {
                const double drop = chi2 - chi2_try;
                p = p_try;
                chi2 = chi2_try;
                out.chi2_history.push_back(chi2);
                lambda = std::max(lambda / 10.0, 1e-14);
                accepted = true;
                if (drop <= config.chi2_rel_tol * std::max(chi2, 1e-300) ||
                    max_rel_step < config.param_rel_tol)
                    converged = true;
            } else {
                if (max_rel_step < config.param_rel_tol) {
                    // proposal indistinguishable from the current point
                    converged = true;
                    accepted = true;
                } else {
                    lambda *= 10.0;
                    if (lambda > lambda_max) {
                        out.warnings.push_back("damping limit reached without improvement");
                        accepted = true;
                        iter = config.max_iterations;  // bail out, flagged below
                    }
                }
            }
        }
    }

    if (k_free == 0) converged = true;
    out.converged = converged;
    out.iterations = std::min(iter, config.max_iterations);
    out.params = p;
    out.chi_squared = chi2;

    out.residuals.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out.residuals[i] = y[i] - model(x[i], p);

    // covariance from the Jacobian at the optimum; unit-weight fits are scaled
    // by the reduced chi^2 so reported sigmas match the residual scatter
    out.covariance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(params.size()),
                                           static_cast<Eigen::Index>(params.size()));
    if (k_free > 0) {
        for (std::size_t r = 0; r < n_used; ++r) f0[r] = model(x[ws.used[r]], p);
        jac = jacobian(x, ws, model, params, free_idx, p, f0);
        const Eigen::MatrixXd a = jac.transpose() * jac;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (lu.isInvertible()) {
            Eigen::MatrixXd cov_free = lu.inverse();
            if (sigma.empty() && n_used > k_free)
                cov_free *= chi2 / static_cast<double>(n_used - k_free);
            for (std::size_t ci = 0; ci < k_free; ++ci)
                for (std::size_t cj = 0; cj < k_free; ++cj)
                    out.covariance(static_cast<Eigen::Index>(free_idx[ci]),
                                   static_cast<Eigen::Index>(free_idx[cj])) =
                        cov_free(static_cast<Eigen::Index>(ci), static_cast<Eigen::Index>(cj));
        } else {
            out.warnings.push_back("covariance not available: normal matrix singular at optimum");
        }
    }
    return out;
}

FitResult fit_curve(const Spectrum& spectrum, std::vector<ParamSpec> params,
                    const ModelFn& model, const FitConfig& config) {
    spectrum.validate();
    return fit_curve(spectrum.x, spectrum.y, spectrum.sigma, std::move(params), model, config);
}

GridSearchResult grid_search(const Spectrum& spectrum, std::vector<ParamSpec> base,
                             const std::vector<GridAxis>& axes, const ModelFn& model,
                             const FitConfig& config) {
    spectrum.validate();
    config.validate();
    if (axes.empty()) throw std::invalid_argument("grid_search: no axes given");
    for (const auto& ax : axes)
        if (ax.values.empty())
            throw std::invalid_argument("grid_search: axis '" + ax.name + "' is empty");

    std::vector<std::size_t> axis_param(axes.size());
    for (std::size_t a = 0; a < axes.size(); ++a) {
        auto it = std::find_if(base.begin(), base.end(),
                               [&](const ParamSpec& s) { return s.name == axes[a].name; });
        if (it == base.end())
            throw std::invalid_argument("grid_search: unknown axis parameter '" + axes[a].name +
                                        "'");
        axis_param[a] = static_cast<std::size_t>(it - base.begin());
    }

    std::vector<std::size_t> used;
    std::vector<double> wsq;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        if (config.masked(spectrum.x[i])) continue;
        used.push_back(i);
        wsq.push_back(spectrum.has_sigma() ? 1.0 / spectrum.sigma[i] : 1.0);
    }

    std::vector<double> p(base.size());
    for (std::size_t j = 0; j < base.size(); ++j) p[j] = base[j].init;

    std::size_t total = 1;
    for (const auto& ax : axes) total *= ax.values.size();

    GridSearchResult best;
    for (const auto& s : base) best.names.push_back(s.name);
    best.chi_squared = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (std::size_t a = axes.size(); a-- > 0;) {
            idx[a] = rem % axes[a].values.size();
            rem /= axes[a].values.size();
        }
        for (std::size_t a = 0; a < axes.size(); ++a) p[axis_param[a]] = axes[a].values[idx[a]];

        double chi2 = 0.0;
        for (std::size_t k = 0; k < used.size(); ++k) {
            const std::size_t i = used[k];
            const double r = wsq[k] * (spectrum.y[i] - model(spectrum.x[i], p));
            chi2 += r * r;
        }
        if (chi2 < best.chi_squared) {  // strict: ties keep the lowest flat index
            best.chi_squared = chi2;
            best.params = p;
            best.flat_index = flat;
        }
    }
    return best;
}

}  // namespace wgspec
