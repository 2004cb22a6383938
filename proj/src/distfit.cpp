#include "channelscope/distfit.hpp"

#include <algorithm>
#include <cmath>

#include "channelscope/csv.hpp"

namespace channelscope::distfit {

namespace {

std::vector<double> tail_sorted(std::span<const double> samples, double xmin) {
    std::vector<double> tail;
    for (double x : samples) {
        if (x >= xmin) tail.push_back(x);
    }
    std::sort(tail.begin(), tail.end());
    return tail;
}

double ks_statistic(const std::vector<double>& tail_asc, double alpha, double xmin) {
    // Model CDF on the tail: F(x) = 1 - (x/xmin)^(1-alpha).
    const double n = static_cast<double>(tail_asc.size());
    double d = 0.0;
    for (std::size_t i = 0; i < tail_asc.size(); ++i) {
        double model = 1.0 - std::pow(tail_asc[i] / xmin, 1.0 - alpha);
        double lo = static_cast<double>(i) / n;
        double hi = static_cast<double>(i + 1) / n;
        d = std::max({d, model - lo, hi - model});
    }
    return d;
}

PowerLawFit fit_sorted_tail(const std::vector<double>& tail_asc, double xmin) {
    double log_sum = 0.0;
    for (double x : tail_asc) log_sum += std::log(x / xmin);
    if (log_sum <= 0.0) {
        throw DegenerateSampleError("all tail samples equal xmin; exponent diverges");
    }
    PowerLawFit fit;
    fit.xmin = xmin;
    fit.n_tail = static_cast<std::int64_t>(tail_asc.size());
    fit.alpha = 1.0 + static_cast<double>(fit.n_tail) / log_sum;
    fit.stderr_alpha = (fit.alpha - 1.0) / std::sqrt(static_cast<double>(fit.n_tail));
    fit.ks_distance = ks_statistic(tail_asc, fit.alpha, xmin);
    return fit;
}

}  // namespace

PowerLawFit fit_power_law(std::span<const double> samples, double xmin, std::size_t min_tail) {
    if (!(xmin > 0.0)) throw ValidationError("xmin must be positive");
    auto tail = tail_sorted(samples, xmin);
    if (tail.size() < min_tail) {
        throw InsufficientDataError("power-law tail has " + std::to_string(tail.size()) +
                                    " samples; need " + std::to_string(min_tail));
    }
    return fit_sorted_tail(tail, xmin);
}

PowerLawFit fit_power_law_auto(std::span<const double> samples, std::size_t min_tail) {
    std::vector<double> positive;
    for (double x : samples) {
        if (x > 0.0) positive.push_back(x);
    }
    std::sort(positive.begin(), positive.end());
    positive.erase(std::unique(positive.begin(), positive.end()), positive.end());
    if (positive.empty()) throw InsufficientDataError("no positive samples");

    // Cap the scan at 256 evenly spaced candidates to keep it O(n * 256).
    std::vector<double> candidates;
    const std::size_t stride = std::max<std::size_t>(1, positive.size() / 256);
    for (std::size_t i = 0; i < positive.size(); i += stride) candidates.push_back(positive[i]);

    bool found = false;
    PowerLawFit best;
    for (double xmin : candidates) {
        auto tail = tail_sorted(samples, xmin);
        if (tail.size() < min_tail) break;  // larger xmin only shrinks the tail
        try {
            PowerLawFit fit = fit_sorted_tail(tail, xmin);
            if (!found || fit.ks_distance < best.ks_distance) {
                best = fit;
                found = true;
            }
        } catch (const DegenerateSampleError&) {
            continue;
        }
    }
    if (!found) throw InsufficientDataError("no xmin candidate leaves a fittable tail");
    return best;
}

std::vector<HistogramBin> histogram(std::span<const double> values, Binning binning, int n_bins) {
    if (n_bins < 1) throw ValidationError("histogram needs at least one bin");
    std::vector<HistogramBin> bins;
    if (values.empty()) return bins;

    auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it, hi = *hi_it;
    if (lo == hi) {
        bins.push_back({lo, hi, static_cast<std::int64_t>(values.size())});
        return bins;
    }
    if (binning == Binning::log && lo <= 0.0) {
        throw ValidationError("log binning requires positive values");
    }

    std::vector<double> edges(static_cast<std::size_t>(n_bins) + 1);
    for (int i = 0; i <= n_bins; ++i) {
        double t = static_cast<double>(i) / n_bins;
        edges[static_cast<std::size_t>(i)] =
            binning == Binning::linear ? lo + (hi - lo) * t : lo * std::pow(hi / lo, t);
    }
    edges.front() = lo;
    edges.back() = hi;

    bins.resize(static_cast<std::size_t>(n_bins));
    for (int i = 0; i < n_bins; ++i) {
        bins[static_cast<std::size_t>(i)].lo = edges[static_cast<std::size_t>(i)];
        bins[static_cast<std::size_t>(i)].hi = edges[static_cast<std::size_t>(i) + 1];
    }
    for (double x : values) {
        auto it = std::upper_bound(edges.begin(), edges.end(), x);
        std::size_t idx = static_cast<std::size_t>(std::distance(edges.begin(), it));
        idx = idx == 0 ? 0 : idx - 1;
        if (idx >= bins.size()) idx = bins.size() - 1;  // x == max lands in the closed last bin
        ++bins[idx].count;
    }
    return bins;
}

void write_fits_csv(std::span<const NamedFit> fits, const std::filesystem::path& path) {
    CsvWriter csv(path, {"quantity", "alpha", "xmin", "n_tail", "stderr", "ks"});
    for (const NamedFit& f : fits) {
        csv.write_row({CsvWriter::cell(f.quantity), CsvWriter::cell(f.fit.alpha),
                       CsvWriter::cell(f.fit.xmin), CsvWriter::cell(f.fit.n_tail),
                       CsvWriter::cell(f.fit.stderr_alpha), CsvWriter::cell(f.fit.ks_distance)});
    }
}

void write_histogram_csv(std::span<const HistogramBin> bins, const std::filesystem::path& path) {
    CsvWriter csv(path, {"bin_lo", "bin_hi", "count"});
    for (const HistogramBin& b : bins) {
        csv.write_row({CsvWriter::cell(b.lo), CsvWriter::cell(b.hi), CsvWriter::cell(b.count)});
    }
}

}  // namespace channelscope::distfit
