#pragma once

#include "wgspec/fit.hpp"

#include <utility>
#include <vector>

// Lifetime extraction from a time-correlated photon-counting histogram: a
// single exponential decay convolved with the measured instrument response.

namespace wgspec {

struct DecayHistogram {
    std::vector<double> time_ps;                    // uniform bin centers
    std::vector<double> counts;                     // >= 0
    std::vector<std::pair<double, double>> irf;     // (time_ps, weight), weights sum to 1

    void validate() const;
    double bin_width_ps() const;
    double irf_rms_width_ps() const;
};

// Normalize IRF sample weights to unit sum.
void normalize_irf(std::vector<std::pair<double, double>>& irf);

// Discrete convolution model A * sum_j w_j exp(-rate (t - t_j)) for t >= t_j.
double decay_model_value(double t_ps, double amplitude, double rate_per_ns,
                         const std::vector<std::pair<double, double>>& irf);

// Fit parameters: amplitude, rate_per_ns. Lifetime is 1/rate. Warnings flag
// an IRF much wider than the fitted decay and a histogram span below five
// lifetimes.
FitResult fit_decay(const DecayHistogram& histogram, const FitConfig& config = {});

}  // namespace wgspec
