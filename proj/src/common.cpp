#include "covshap/common.hpp"

namespace covshap {

const std::array<std::string, kNumMetrics>& metric_names() {
    static const std::array<std::string, kNumMetrics> names = {
        "Den", "NW", "Inc", "Pov", "Uemp", "Uins", "Emp",
        "Lab", "Tran", "MC", "SC", "GI", "Com"};
    return names;
}

const std::array<std::string, kNumMetrics>& metric_long_names() {
    static const std::array<std::string, kNumMetrics> names = {
        "Population Density", "Non-White", "Income", "Poverty",
        "Unemployment", "Uninsured", "Employed", "Labour",
        "Transit", "Mean Commute", "Senior Citizen", "Gini Index",
        "Comorbidities"};
    return names;
}

std::optional<Metric> metric_from_name(std::string_view name) {
    const auto& names = metric_names();
    for (int i = 0; i < kNumMetrics; ++i) {
        if (names[i] == name) return static_cast<Metric>(i);
    }
    return std::nullopt;
}

}  // namespace covshap
