#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "covshap/common.hpp"
#include "covshap/dates.hpp"

namespace covshap {

// One county's census metrics. `com` arrives later from the comorbidity
// merge; counties without a match keep it unset.
struct CountyRecord {
    std::string fips;   // 5 digits, zero-padded
    std::string state;
    double population = 0.0;
    double den = 0.0;
    double nw = 0.0, pov = 0.0, uemp = 0.0, uins = 0.0, emp = 0.0, lab = 0.0,
           tran = 0.0, sc = 0.0;
    double inc = 0.0;
    double mc = 0.0;
    double gi = 0.0;
    std::optional<double> com;

    // Metric value by canonical index; throws if Com is missing.
    double metric(Metric m) const;
};

// Census field -> CSV column name. The 15 fields are the 12 census metrics
// plus fips, state and population (Com joins from the comorbidity file).
struct CensusSchema {
    std::map<std::string, std::string> columns;

    static CensusSchema defaults();
    static const std::vector<std::string>& field_names();
};

struct RejectRow {
    int line = 0;  // 1-based, header = line 1
    std::string fips;
    std::string reason;
};

struct CensusTable {
    std::vector<CountyRecord> records;
    std::vector<RejectRow> rejects;
};

CensusTable load_census(const std::string& path, const CensusSchema& schema);

// Cumulative counts per county, dates ascending, nondecreasing after the
// forward-clamp repair cum[t] := max(cum[t], cum[t-1]).
struct PrevalenceSeries {
    std::string fips;
    std::vector<Date> dates;
    std::vector<long long> cum;
    int repairs = 0;

    // Cumulative count at the latest date <= d; 0 before the first date.
    // Throws DataError when d precedes nothing but exceeds the last date.
    long long at_or_before(Date d) const;
};

struct PrevalenceTable {
    std::vector<PrevalenceSeries> series;
    long long total_repairs = 0;
    int skipped_rows = 0;

    const PrevalenceSeries* find(const std::string& fips) const;
};

// JHU wide format: a FIPS column plus one column per M/D/YY date.
PrevalenceTable load_jhu(const std::string& path);

struct PhaseWindow {
    Date start;
    Date end;
    std::string label;
};

struct RegionSpec {
    std::string label;
    std::set<std::string> states;
};

// "east_coast", "west_coast", "southern" with the paper's state lists;
// "phase1" = 2020-02-01..2020-07-15, "phase2" = 2020-07-16..2021-01-15.
const std::map<std::string, RegionSpec>& builtin_regions();
const std::map<std::string, PhaseWindow>& builtin_phases();

RegionSpec make_region(const std::string& label, const std::set<std::string>& states);
PhaseWindow make_phase(const std::string& label, Date start, Date end);

// New cases (or deaths) per 100k over [start, end]:
// (cum[end] - cum[start-1]) / population * 1e5 with nearest-prior lookups.
double compute_rate(const PrevalenceSeries& series, double population,
                    const PhaseWindow& window);

std::vector<CountyRecord> filter_region(const std::vector<CountyRecord>& records,
                                        const RegionSpec& region);

struct MergeResult {
    int matched = 0;
    std::vector<std::string> missing_fips;
};

// Left-join comorbidity fractions by FIPS; unmatched counties stay flagged
// (com unset).
MergeResult merge_comorbidity(std::vector<CountyRecord>& records,
                              const std::string& path);

// Balanced weekly panel for the econometrics module. Weeks are consecutive
// 7-day blocks from the phase start (trailing partial week dropped);
// y = log10(weekly cases per 100k + 1); covariates z-scored over the panel
// (sample sd).
struct PanelTable {
    std::vector<std::string> county_fips;  // one entry per county
    int n_weeks = 0;
    Eigen::VectorXd y;                  // county-major, week-minor
    Eigen::MatrixXd x;                  // standardized covariates
    std::vector<int> county_index;      // per row
    std::vector<int> week;              // per row
    std::vector<std::string> covariate_names;
    int dropped_incomplete = 0;
    int dropped_missing_com = 0;
};

PanelTable build_panel(const PrevalenceTable& prevalence,
                       const std::vector<CountyRecord>& census,
                       const RegionSpec& region, const PhaseWindow& phase,
                       const std::vector<Metric>& covariates);

}  // namespace covshap
