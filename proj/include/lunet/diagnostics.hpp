#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lunet/model.hpp"

namespace lunet {

// Per-layer condition numbers kappa(U), kappa(L). A layer whose U diagonal
// fails the diag_eps check is flagged instead of aborting the report;
// its kappa_u is NaN.
struct ConditionReport {
    struct Layer {
        double kappa_u = 0.0;
        double kappa_l = 0.0;
        bool u_near_singular = false;
    };

    int depth = 0;
    int dim = 0;
    std::vector<Layer> layers;
};

ConditionReport condition_report(const LUNet& net, std::uint64_t seed = 0);

// Projection normality check: draw a random unit direction c from seed,
// collect z_n = c . f(x_n), and compare the empirical distribution of the
// z_n against the standard normal with a one-sample Kolmogorov-Smirnov
// statistic.
struct ProjectionTest {
    std::vector<double> direction;  // unit norm
    std::vector<double> projected;
    double ks_statistic = 0.0;
    std::uint64_t seed = 0;
};

ProjectionTest projection_normality(const LUNet& net, const std::vector<std::vector<double>>& data,
                                    std::uint64_t seed);

// Standard normal CDF.
double normal_cdf(double x);

// Indices sorted by log_density descending; ties keep the original order.
std::vector<std::size_t> rank_by_likelihood(const LUNet& net,
                                            const std::vector<std::vector<double>>& data);

// Equal-width histogram over [min, max] of the projected sample, with the
// standard normal density at each bin center. Bins are half-open except the
// last, which is closed on the right.
struct HistogramRow {
    double bin_center = 0.0;
    std::size_t count = 0;
    double normal_density = 0.0;
};

std::vector<HistogramRow> normality_histogram(const ProjectionTest& test, int bins);

void write_condition_csv(const std::string& path, const ConditionReport& report);
void write_projection_csv(const std::string& path, const ProjectionTest& test);
void write_histogram_csv(const std::string& path, const std::vector<HistogramRow>& rows);

}  // namespace lunet
