#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace covshap {

// Error taxonomy, mapped to CLI exit codes 2/3/4.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The 13 county-level metrics, in canonical order. This order defines the
// default feature universe used by orderings, models and reports.
enum class Metric : int {
    Den = 0,
    NW,
    Inc,
    Pov,
    Uemp,
    Uins,
    Emp,
    Lab,
    Tran,
    MC,
    SC,
    GI,
    Com
};

inline constexpr int kNumMetrics = 13;

const std::array<std::string, kNumMetrics>& metric_names();
const std::array<std::string, kNumMetrics>& metric_long_names();
std::optional<Metric> metric_from_name(std::string_view name);

inline const std::string& metric_name(Metric m) {
    return metric_names()[static_cast<int>(m)];
}

}  // namespace covshap
