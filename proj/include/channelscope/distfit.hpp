#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "channelscope/errors.hpp"

namespace channelscope::distfit {

struct PowerLawFit {
    double alpha = 0.0;  // tail exponent, > 1
    double xmin = 0.0;
    std::int64_t n_tail = 0;     // samples >= xmin
    double stderr_alpha = 0.0;   // (alpha - 1) / sqrt(n_tail)
    double ks_distance = 0.0;    // sup |empirical - model CDF| on the tail
};

struct InsufficientDataError : ValidationError {
    using ValidationError::ValidationError;
};
// All tail samples equal xmin; the likelihood has no maximum.
struct DegenerateSampleError : ValidationError {
    using ValidationError::ValidationError;
};

// Continuous maximum-likelihood tail fit over the samples >= xmin:
// alpha = 1 + n / sum(ln(x_i / xmin)). Requires at least `min_tail` tail
// samples (default 10).
PowerLawFit fit_power_law(std::span<const double> samples, double xmin, std::size_t min_tail = 10);

// Scans distinct observed values as xmin candidates and returns the fit with
// the smallest KS distance. Off the default path; callers normally supply
// xmin themselves.
PowerLawFit fit_power_law_auto(std::span<const double> samples, std::size_t min_tail = 10);

enum class Binning { linear, log };

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::int64_t count = 0;
};

// Bins partition [min, max]; every bin is [lo, hi) except the last, which is
// closed, so counts always sum to the input size. A single distinct value
// collapses to one bin. Log binning requires positive values.
std::vector<HistogramBin> histogram(std::span<const double> values, Binning binning, int n_bins);

struct NamedFit {
    std::string quantity;
    PowerLawFit fit;
};

void write_fits_csv(std::span<const NamedFit> fits, const std::filesystem::path& path);
void write_histogram_csv(std::span<const HistogramBin> bins, const std::filesystem::path& path);

}  // namespace channelscope::distfit
