#include "lunet/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "lunet/errors.hpp"
#include "lunet/rng.hpp"

namespace lunet {

ConditionReport condition_report(const LUNet& net, std::uint64_t seed) {
    ConditionReport report;
    report.depth = net.depth();
    report.dim = net.dim();
    report.layers.resize(net.depth());
    for (int m = 0; m < net.depth(); ++m) {
        auto& row = report.layers[m];
        const std::uint64_t layer_seed = derive_seed(seed, static_cast<std::uint64_t>(m));
        row.kappa_l = condition_number(net.layer(m).l, layer_seed);
        try {
            row.kappa_u = condition_number(net.layer(m).u, derive_seed(layer_seed, 1));
        } catch (const NearSingularDiagonal&) {
            row.kappa_u = std::numeric_limits<double>::quiet_NaN();
            row.u_near_singular = true;
        }
    }
    return report;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

ProjectionTest projection_normality(const LUNet& net, const std::vector<std::vector<double>>& data,
                                    std::uint64_t seed) {
    if (data.empty()) throw ConfigError("projection_normality: data is empty");

    ProjectionTest test;
    test.seed = seed;

    Rng rng(seed);
    test.direction.resize(net.dim());
    double norm_sq = 0.0;
    for (auto& c : test.direction) {
        c = rng.normal();
        norm_sq += c * c;
    }
    const double inv_norm = 1.0 / std::sqrt(norm_sq);
    for (auto& c : test.direction) c *= inv_norm;

    test.projected.reserve(data.size());
    for (const auto& x : data) {
        const auto z = forward(net, x);
        double dot = 0.0;
        for (int d = 0; d < net.dim(); ++d) dot += test.direction[d] * z[d];
        test.projected.push_back(dot);
    }

    // One-sample KS statistic against the standard normal CDF.
    std::vector<double> sorted(test.projected);
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double cdf = normal_cdf(sorted[i]);
        ks = std::max(ks, cdf - static_cast<double>(i) / n);
        ks = std::max(ks, static_cast<double>(i + 1) / n - cdf);
    }
    test.ks_statistic = ks;
    return test;
}

std::vector<std::size_t> rank_by_likelihood(const LUNet& net,
                                            const std::vector<std::vector<double>>& data) {
    if (data.empty()) throw ConfigError("rank_by_likelihood: data is empty");
    std::vector<double> scores;
    scores.reserve(data.size());
    for (const auto& x : data) scores.push_back(log_density(net, x));

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

std::vector<HistogramRow> normality_histogram(const ProjectionTest& test, int bins) {
    if (bins < 2) throw ConfigError("normality_histogram: bins must be >= 2");
    const auto [min_it, max_it] = std::minmax_element(test.projected.begin(), test.projected.end());
    const double lo = *min_it;
    const double hi = *max_it;
    const double width = (hi - lo) / bins;

    std::vector<HistogramRow> rows(bins);
    constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;
    for (int k = 0; k < bins; ++k) {
        rows[k].bin_center = lo + (k + 0.5) * width;
        rows[k].normal_density = kInvSqrt2Pi * std::exp(-0.5 * rows[k].bin_center * rows[k].bin_center);
    }
    for (double z : test.projected) {
        int k = width > 0.0 ? static_cast<int>((z - lo) / width) : 0;
        if (k >= bins) k = bins - 1;  // the last bin is right-closed
        ++rows[k].count;
    }
    if (width == 0.0) {
        // Degenerate constant sample: all mass sits in the first bin and the
        // center grid collapses onto the single value.
        for (auto& row : rows) row.bin_center = lo;
        for (auto& row : rows) row.normal_density = kInvSqrt2Pi * std::exp(-0.5 * lo * lo);
    }
    return rows;
}

void write_condition_csv(const std::string& path, const ConditionReport& report) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.precision(12);
    out << "layer,kappa_u,kappa_l,u_near_singular\n";
    for (int m = 0; m < report.depth; ++m) {
        const auto& row = report.layers[m];
        out << (m + 1) << ',' << row.kappa_u << ',' << row.kappa_l << ','
            << (row.u_near_singular ? 1 : 0) << '\n';
    }
    if (!out.flush()) throw IoError("write failed: " + path);
}

void write_projection_csv(const std::string& path, const ProjectionTest& test) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.precision(17);
    out << "# seed=" << test.seed << " ks_statistic=" << test.ks_statistic << '\n';
    out << "projected\n";
    for (double z : test.projected) out << z << '\n';
    if (!out.flush()) throw IoError("write failed: " + path);
}

void write_histogram_csv(const std::string& path, const std::vector<HistogramRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.precision(12);
    out << "bin_center,count,normal_density\n";
    for (const auto& row : rows) {
        out << row.bin_center << ',' << row.count << ',' << row.normal_density << '\n';
    }
    if (!out.flush()) throw IoError("write failed: " + path);
}

}  // namespace lunet
