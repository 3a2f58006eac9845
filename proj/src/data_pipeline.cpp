#include "covshap/data_pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iostream>
#include <numeric>

#include "covshap/csv.hpp"
#include "covshap/stats.hpp"

namespace covshap {

namespace {

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
    auto res = std::from_chars(b, e, out);
    return res.ec == std::errc() && res.ptr == e;
}

std::optional<std::string> normalize_fips(const std::string& raw) {
    std::string digits;
    double v;
    if (!parse_number(raw, v)) return std::nullopt;
    long long n = std::llround(v);
    if (n < 0 || n > 99999 || std::fabs(v - n) > 1e-9) return std::nullopt;
    digits = std::to_string(n);
    return std::string(5 - digits.size(), '0') + digits;
}

}  // namespace

double CountyRecord::metric(Metric m) const {
    switch (m) {
        case Metric::Den: return den;
        case Metric::NW: return nw;
        case Metric::Inc: return inc;
        case Metric::Pov: return pov;
        case Metric::Uemp: return uemp;
        case Metric::Uins: return uins;
        case Metric::Emp: return emp;
        case Metric::Lab: return lab;
        case Metric::Tran: return tran;
        case Metric::MC: return mc;
        case Metric::SC: return sc;
        case Metric::GI: return gi;
        case Metric::Com:
            if (!com) throw DataError("county " + fips + ": comorbidity metric missing");
            return *com;
    }
    throw ValidationError("unknown metric");
}

const std::vector<std::string>& CensusSchema::field_names() {
    static const std::vector<std::string> fields = {
        "fips", "state", "population", "den", "nw",  "pov", "uemp", "uins",
        "emp",  "lab",   "tran",       "mc",  "sc",  "inc", "gi"};
    return fields;
}

CensusSchema CensusSchema::defaults() {
    CensusSchema s;
    for (const auto& f : field_names()) s.columns[f] = f;
    return s;
}

CensusTable load_census(const std::string& path, const CensusSchema& schema) {
    CsvTable csv = read_csv(path);
    std::map<std::string, int> col;
    for (const auto& field : CensusSchema::field_names()) {
        auto it = schema.columns.find(field);
        if (it == schema.columns.end())
            throw ValidationError("census schema: no column mapped for field '" + field + "'");
        int c = csv.col(it->second);
        if (c < 0)
            throw ValidationError("census: missing column '" + it->second +
                                  "' (field '" + field + "')");
        col[field] = c;
    }

    CensusTable table;
    std::set<std::string> seen_fips;
    int line = 1;  // header
    for (const auto& row : csv.rows) {
        ++line;
        auto reject = [&](const std::string& fips, const std::string& reason) {
            table.rejects.push_back({line, fips, reason});
        };
        size_t needed = 0;
        for (auto& [f, c] : col) needed = std::max(needed, static_cast<size_t>(c) + 1);
        if (row.size() < needed) {
            reject("", "short row");
            continue;
        }

        auto fips = normalize_fips(row[col["fips"]]);
        if (!fips) {
            reject(row[col["fips"]], "unparseable fips");
            continue;
        }
        CountyRecord rec;
        rec.fips = *fips;
        rec.state = row[col["state"]];

        bool ok = true;
        auto num = [&](const char* field, double& dst) {
            if (!ok) return;
            if (!parse_number(row[col[field]], dst)) {
                reject(rec.fips, std::string("unparseable numeric in '") + field + "'");
                ok = false;
            }
        };
        num("population", rec.population);
        num("den", rec.den);
        num("nw", rec.nw);
        num("pov", rec.pov);
        num("uemp", rec.uemp);
        num("uins", rec.uins);
        num("emp", rec.emp);
        num("lab", rec.lab);
        num("tran", rec.tran);
        num("mc", rec.mc);
        num("sc", rec.sc);
        num("inc", rec.inc);
        num("gi", rec.gi);
        if (!ok) continue;

        if (rec.population < 1.0) {
            reject(rec.fips, "population out of range");
            continue;
        }
        if (!(rec.den > 0.0)) {
            reject(rec.fips, "density out of range");
            continue;
        }
        bool frac_ok = true;
        for (double f : {rec.nw, rec.pov, rec.uemp, rec.uins, rec.emp, rec.lab,
                         rec.tran, rec.sc, rec.gi}) {
            if (!(f >= 0.0 && f <= 1.0)) frac_ok = false;
        }
        if (!frac_ok) {
            reject(rec.fips, "fraction out of range");
            continue;
        }
        if (rec.mc < 0.0 || rec.inc < 0.0) {
            reject(rec.fips, "negative income or commute");
            continue;
        }
        if (!seen_fips.insert(rec.fips).second) {
            reject(rec.fips, "duplicate fips");
            continue;
        }
        table.records.push_back(std::move(rec));
    }
    return table;
}

long long PrevalenceSeries::at_or_before(Date d) const {
    auto it = std::upper_bound(dates.begin(), dates.end(), d);
    if (it == dates.begin()) return 0;  // before the series starts
    if (d > dates.back())
        throw DataError("county " + fips + ": date " + d.iso() + " beyond series end");
    return cum[static_cast<size_t>(it - dates.begin()) - 1];
}

const PrevalenceSeries* PrevalenceTable::find(const std::string& f) const {
    for (const auto& s : series)
        if (s.fips == f) return &s;
    return nullptr;
}

PrevalenceTable load_jhu(const std::string& path) {
    CsvTable csv = read_csv(path);
    int fips_col = csv.col_ci("FIPS");
    if (fips_col < 0) throw ValidationError("jhu: no FIPS column");

    std::vector<std::pair<Date, int>> date_cols;
    for (size_t c = 0; c < csv.header.size(); ++c) {
        if (auto d = parse_mdy_date(csv.header[c])) date_cols.push_back({*d, static_cast<int>(c)});
    }
    if (date_cols.empty()) throw ValidationError("jhu: no date columns found");
    std::sort(date_cols.begin(), date_cols.end(),
              [](auto& a, auto& b) { return a.first < b.first; });
    for (size_t i = 1; i < date_cols.size(); ++i) {
        if (date_cols[i].first == date_cols[i - 1].first)
            throw ValidationError("jhu: duplicate date column " + date_cols[i].first.iso());
    }

    PrevalenceTable table;
    std::set<std::string> seen;
    for (const auto& row : csv.rows) {
        if (static_cast<int>(row.size()) <= fips_col) {
            ++table.skipped_rows;
            continue;
        }
        auto fips = normalize_fips(row[fips_col]);
        if (!fips) {
            ++table.skipped_rows;
            std::cerr << "warning: jhu row without usable FIPS skipped\n";
            continue;
        }
        if (!seen.insert(*fips).second) {
            ++table.skipped_rows;
            std::cerr << "warning: duplicate FIPS " << *fips << " skipped\n";
            continue;
        }
        PrevalenceSeries s;
        s.fips = *fips;
        s.dates.reserve(date_cols.size());
        s.cum.reserve(date_cols.size());
        long long prev = 0;
        bool ok = true;
        for (const auto& [date, c] : date_cols) {
            double v = 0.0;
            if (static_cast<int>(row.size()) <= c || !parse_number(row[c], v)) {
                ok = false;
                break;
            }
            long long raw = std::llround(v);
            long long cleaned = std::max(raw, prev);
            if (cleaned != raw) ++s.repairs;
            s.dates.push_back(date);
            s.cum.push_back(cleaned);
            prev = cleaned;
        }
        if (!ok) {
            ++table.skipped_rows;
            std::cerr << "warning: jhu row for FIPS " << *fips
                      << " has unparseable counts, skipped\n";
            continue;
        }
        table.total_repairs += s.repairs;
        table.series.push_back(std::move(s));
    }
    return table;
}

const std::map<std::string, RegionSpec>& builtin_regions() {
    static const std::map<std::string, RegionSpec> regions = {
        {"east_coast",
         {"East Coast",
          {"District of Columbia", "New Jersey", "Rhode Island", "Massachusetts",
           "Connecticut", "Maryland", "Delaware", "New York"}}},
        {"southern",
         {"Southern States",
          {"Alabama", "Arkansas", "Florida", "Georgia", "Kentucky", "Louisiana",
           "Mississippi", "North Carolina", "Oklahoma", "South Carolina",
           "Tennessee", "Texas", "Virginia", "West Virginia"}}},
        {"west_coast", {"West Coast", {"California", "Oregon", "Washington"}}},
    };
    return regions;
}

const std::map<std::string, PhaseWindow>& builtin_phases() {
    static const std::map<std::string, PhaseWindow> phases = {
        {"phase1",
         {Date::from_ymd(2020, 2, 1), Date::from_ymd(2020, 7, 15), "Phase I"}},
        {"phase2",
         {Date::from_ymd(2020, 7, 16), Date::from_ymd(2021, 1, 15), "Phase II"}},
    };
    return phases;
}

RegionSpec make_region(const std::string& label, const std::set<std::string>& states) {
    if (states.empty()) throw ValidationError("region '" + label + "': state set is empty");
    return RegionSpec{label, states};
}

PhaseWindow make_phase(const std::string& label, Date start, Date end) {
    if (!(start < end)) throw ValidationError("phase '" + label + "': start must precede end");
    return PhaseWindow{start, end, label};
}

double compute_rate(const PrevalenceSeries& series, double population,
                    const PhaseWindow& window) {
    if (population <= 0.0) throw ValidationError("compute_rate: population must be positive");
    long long at_end = series.at_or_before(window.end);
    long long before_start = series.at_or_before(window.start - 1);
    return static_cast<double>(at_end - before_start) / population * 1e5;
}

std::vector<CountyRecord> filter_region(const std::vector<CountyRecord>& records,
                                        const RegionSpec& region) {
    if (region.states.empty()) throw ValidationError("filter_region: empty region");
    std::vector<CountyRecord> out;
    for (const auto& r : records) {
        if (region.states.count(r.state)) out.push_back(r);
    }
    if (out.empty())
        std::cerr << "warning: region '" << region.label << "' matched no counties\n";
    return out;
}

MergeResult merge_comorbidity(std::vector<CountyRecord>& records, const std::string& path) {
    CsvTable csv = read_csv(path);
    int fips_col = csv.col_ci("fips");
    int com_col = csv.col_ci("com");
    if (com_col < 0) com_col = csv.col_ci("comorbidity");
    if (fips_col < 0) fips_col = 0;
    if (com_col < 0) com_col = 1;
    if (csv.header.size() < 2) throw ValidationError("comorbidity: need FIPS and value columns");

    std::map<std::string, double> lookup;
    for (const auto& row : csv.rows) {
        if (static_cast<int>(row.size()) <= std::max(fips_col, com_col)) continue;
        auto fips = normalize_fips(row[fips_col]);
        double v;
        if (!fips || !parse_number(row[com_col], v)) continue;
        if (v < 0.0 || v > 1.0) continue;
        lookup[*fips] = v;
    }

    MergeResult res;
    for (auto& r : records) {
        auto it = lookup.find(r.fips);
        if (it != lookup.end()) {
            r.com = it->second;
            ++res.matched;
        } else {
            res.missing_fips.push_back(r.fips);
        }
    }
    return res;
}

PanelTable build_panel(const PrevalenceTable& prevalence,
                       const std::vector<CountyRecord>& census,
                       const RegionSpec& region, const PhaseWindow& phase,
                       const std::vector<Metric>& covariates) {
    if (covariates.empty()) throw ValidationError("build_panel: no covariates");
    const int n_weeks = (phase.end - phase.start + 1) / 7;
    if (n_weeks < 2) throw DataError("build_panel: phase shorter than two weeks");

    std::vector<CountyRecord> counties = filter_region(census, region);

    PanelTable panel;
    panel.n_weeks = n_weeks;
    for (const auto& m : covariates) panel.covariate_names.push_back(metric_name(m));

    std::vector<std::vector<double>> rows_y;
    std::vector<const CountyRecord*> kept;
    for (const auto& county : counties) {
        bool com_needed =
            std::find(covariates.begin(), covariates.end(), Metric::Com) != covariates.end();
        if (com_needed && !county.com) {
            ++panel.dropped_missing_com;
            continue;
        }
        const PrevalenceSeries* s = prevalence.find(county.fips);
        if (!s) {
            ++panel.dropped_incomplete;
            continue;
        }
        std::vector<double> ys;
        ys.reserve(n_weeks);
        bool complete = true;
        for (int w = 0; w < n_weeks; ++w) {
            Date week_start = phase.start + 7 * w;
            Date week_end = week_start + 6;
            try {
                long long newcases =
                    s->at_or_before(week_end) - s->at_or_before(week_start - 1);
                if (newcases < 0) newcases = 0;
                double per100k = static_cast<double>(newcases) / county.population * 1e5;
                ys.push_back(std::log10(per100k + 1.0));
            } catch (const DataError&) {
                complete = false;
                break;
            }
        }
        if (!complete) {
            ++panel.dropped_incomplete;
            continue;
        }
        kept.push_back(&county);
        rows_y.push_back(std::move(ys));
    }

    const int n_counties = static_cast<int>(kept.size());
    if (n_counties < 2) throw DataError("build_panel: fewer than 2 counties after balancing");

    const int n = n_counties * n_weeks;
    const int k = static_cast<int>(covariates.size());
    panel.y.resize(n);
    panel.x.resize(n, k);
    panel.county_index.resize(n);
    panel.week.resize(n);
    int r = 0;
    for (int c = 0; c < n_counties; ++c) {
        panel.county_fips.push_back(kept[c]->fips);
        for (int w = 0; w < n_weeks; ++w, ++r) {
            panel.y[r] = rows_y[c][w];
            panel.county_index[r] = c;
            panel.week[r] = w;
            for (int j = 0; j < k; ++j) panel.x(r, j) = kept[c]->metric(covariates[j]);
        }
    }

    // z-score covariates over the panel rows (sample sd)
    for (int j = 0; j < k; ++j) {
        double m = panel.x.col(j).mean();
        double sd = sample_sd(Eigen::VectorXd(panel.x.col(j)));
        if (sd <= 1e-12)
            throw DataError("build_panel: zero-variance covariate '" +
                            panel.covariate_names[j] + "'");
        panel.x.col(j) = (panel.x.col(j).array() - m) / sd;
    }
    return panel;
}

}  // namespace covshap
