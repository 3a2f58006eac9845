#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "covshap/csv.hpp"
#include "covshap/dates.hpp"
#include "covshap/rng.hpp"
#include "covshap/stats.hpp"

using namespace covshap;

TEST_CASE("date round trips and arithmetic") {
    Date d = Date::from_ymd(2020, 2, 1);
    CHECK(d.iso() == "2020-02-01");
    CHECK((d + 29).iso() == "2020-03-01");  // 2020 is a leap year
    CHECK(*parse_iso_date("2021-01-15") - *parse_iso_date("2020-07-16") == 183);
    CHECK(parse_mdy_date("1/22/20")->iso() == "2020-01-22");
    CHECK(parse_mdy_date("12/31/2020")->iso() == "2020-12-31");
    CHECK(!parse_iso_date("2020-13-01"));
    CHECK(!parse_mdy_date("2/30/20"));
    CHECK(!parse_mdy_date("hello"));
}

TEST_CASE("csv parsing handles quotes and crlf") {
    CsvTable t = parse_csv("a,b,c\r\n1,\"x,y\",\"he said \"\"hi\"\"\"\n2,,3\n");
    CHECK(t.header.size() == 3);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "x,y");
    CHECK(t.rows[0][2] == "he said \"hi\"");
    CHECK(t.rows[1][1] == "");
    CHECK(t.col("b") == 1);
    CHECK(t.col("missing") == -1);
    CHECK(t.col_ci("B") == 1);
}

TEST_CASE("csv escape round trip") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("q\"q") == "\"q\"\"q\"");
}

TEST_CASE("format_double round trips") {
    for (double v : {0.1, 1.0 / 3.0, 12345.678901234567, -2.5e-30}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("rng streams are deterministic and decorrelated") {
    auto g1 = make_stream(42, 1, 2, 3);
    auto g2 = make_stream(42, 1, 2, 3);
    CHECK(g1() == g2());
    auto g3 = make_stream(42, 1, 2, 4);
    CHECK(make_stream(42, 1, 2, 3)() != g3());

    auto g = make_stream(7);
    double m = 0.0, m2 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double z = rnorm(g);
        m += z;
        m2 += z * z;
    }
    m /= n;
    m2 /= n;
    CHECK(std::fabs(m) < 0.03);
    CHECK(std::fabs(m2 - 1.0) < 0.05);
}

TEST_CASE("basic statistics") {
    std::vector<double> a = {1, 2, 3, 4};
    std::vector<double> b = {2, 4, 6, 8};
    CHECK(mean(std::span<const double>(a)) == doctest::Approx(2.5));
    CHECK(sample_sd(std::span<const double>(a)) ==
          doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(pearson(std::span<const double>(a), std::span<const double>(b)) ==
          doctest::Approx(1.0));
    std::vector<double> c = {1, 1, 1, 1};
    CHECK(std::isnan(pearson(std::span<const double>(a), std::span<const double>(c))));
}

TEST_CASE("ols recovers coefficients and reports collinearity") {
    Eigen::MatrixXd X(6, 3);
    Eigen::VectorXd y(6);
    X << 1, 0.5, 2, 1, 1.5, 3, 1, 2.5, 1, 1, 3.5, 0, 1, 4.5, 5, 1, 5.5, 4;
    Eigen::VectorXd beta_true(3);
    beta_true << 1.0, 2.0, -0.5;
    y = X * beta_true;
    OlsFit f = ols(X, y);
    CHECK((f.beta - beta_true).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(f.r2 == doctest::Approx(1.0));

    Eigen::MatrixXd Xc(6, 3);
    Xc.col(0) = X.col(0);
    Xc.col(1) = X.col(1);
    Xc.col(2) = 2.0 * X.col(1);  // collinear
    OlsFit fc = ols(Xc, y);
    CHECK(fc.rank == 2);
    CHECK(fc.dropped.size() == 1);
}

TEST_CASE("chi-squared and t tail probabilities") {
    CHECK(chi_squared_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(chi_squared_sf(0.0, 4) == doctest::Approx(1.0));
    CHECK(student_t_two_sided_p(0.0, 10) == doctest::Approx(1.0));
    CHECK(student_t_two_sided_p(2.2281388519649385, 10) ==
          doctest::Approx(0.05).epsilon(1e-6));
}
