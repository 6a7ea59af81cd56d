#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hfrisk/explain.hpp"

namespace hfrisk::svg {

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

struct Box {
    std::string label;
    double whisker_low = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double whisker_high = 0.0;
};

/// Horizontal bars, first entry on top.
std::string bar_chart(const std::string& title, const std::vector<std::pair<std::string, double>>& bars,
                      const std::string& axis_label);

std::string box_plot(const std::string& title, const std::vector<Box>& boxes, const std::string& axis_label);

/// Lines on the unit square with a dashed chance diagonal.
std::string roc_plot(const std::string& title, const std::vector<Series>& curves);

/// One row per ranked feature; points placed by attribution and coloured by
/// the feature value's rank within that feature (low blue, high red).
std::string beeswarm(const std::string& title, const ShapSummary& summary);

std::string escape(const std::string& text);

}  // namespace hfrisk::svg
