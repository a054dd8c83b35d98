#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ebvs/pipeline.hpp"

using namespace ebvs;

namespace {

Schema toy_schema() {
    std::istringstream in(
        "# roles for the toy file\n"
        "y: response\n"
        "x1: locked_in\n"
        "tag: id\n"
        "junk: ignore\n"
        "*: putative\n");
    return Schema::parse(in);
}

const char* kToyCsv =
    "y,x1,z1,z2,tag,junk\n"
    "1.5,0.3,1.0,2.0,a,9\n"
    "2.5,0.1,2.0,1.0,b,9\n"
    "3.5,-0.2,3.0,4.0,c,9\n"
    "4.0,0.4,4.0,3.0,d,9\n";

}  // namespace

TEST_CASE("schema parsing") {
    const Schema s = toy_schema();
    CHECK(s.role_of("y") == ColumnRole::response);
    CHECK(s.role_of("x1") == ColumnRole::locked_in);
    CHECK(s.role_of("tag") == ColumnRole::id);
    CHECK(s.role_of("junk") == ColumnRole::ignore);
    CHECK(s.role_of("anything_else") == ColumnRole::putative);  // '*' default

    SUBCASE("unmapped column without a default is an error") {
        std::istringstream in("y: response\n");
        const Schema strict = Schema::parse(in);
        CHECK_THROWS_AS(strict.role_of("z9"), SchemaError);
    }
    SUBCASE("malformed lines and duplicates are rejected") {
        std::istringstream bad1("y response\n");
        CHECK_THROWS_AS(Schema::parse(bad1), SchemaError);
        std::istringstream bad2("y: response\ny: putative\n");
        CHECK_THROWS_AS(Schema::parse(bad2), SchemaError);
        std::istringstream bad3("*: putative\n*: ignore\n");
        CHECK_THROWS_AS(Schema::parse(bad3), SchemaError);
        std::istringstream bad4("y: nonsense_role\n");
        CHECK_THROWS_AS(Schema::parse(bad4), SchemaError);
    }
    SUBCASE("role names round-trip") {
        for (const auto role : {ColumnRole::response, ColumnRole::locked_in, ColumnRole::putative,
                                ColumnRole::time, ColumnRole::event, ColumnRole::id,
                                ColumnRole::ignore})
            CHECK(role_from_string(to_string(role)) == role);
    }
}

TEST_CASE("CSV parsing under a schema") {
    const Schema schema = toy_schema();
    std::istringstream in(kToyCsv);
    const RawTable table = load_csv(in, schema);

    CHECK(table.names.size() == 6);
    CHECK(table.n_rows() == 4);
    CHECK(table.values.cols() == 4);  // y, x1, z1, z2; id and ignore carry no numbers
    CHECK(table.value_col[4] == -1);
    CHECK(table.value_col[5] == -1);
    REQUIRE(table.id_names.size() == 1);
    CHECK(table.id_names[0] == "tag");
    CHECK(table.id_values[0] == std::vector<std::string>({"a", "b", "c", "d"}));
    CHECK(table.values(2, table.value_col[0]) == 3.5);
    CHECK(table.values(1, table.value_col[2]) == 2.0);

    SUBCASE("a missing value is located precisely") {
        std::istringstream bad(
            "y,x1,z1,z2,tag,junk\n"
            "1.5,0.3,1.0,2.0,a,9\n"
            "2.5,0.1,NA,1.0,b,9\n");
        try {
            load_csv(bad, schema);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.row == 3);  // header is line 1
            CHECK(e.col == 3);
            CHECK(std::string(e.what()).find("NA") != std::string::npos);
        }
    }
    SUBCASE("field-count mismatches are parse errors") {
        std::istringstream bad(
            "y,x1,z1,z2,tag,junk\n"
            "1.5,0.3,1.0\n");
        CHECK_THROWS_AS(load_csv(bad, schema), ParseError);
    }
    SUBCASE("duplicate headers are schema errors") {
        std::istringstream bad("y,z1,z1\n1,2,3\n");
        CHECK_THROWS_AS(load_csv(bad, schema), SchemaError);
    }
    SUBCASE("infinities are rejected") {
        std::istringstream bad(
            "y,x1,z1,z2,tag,junk\n"
            "inf,0.3,1.0,2.0,a,9\n");
        CHECK_THROWS_AS(load_csv(bad, schema), ParseError);
    }
}

TEST_CASE("dataset assembly") {
    const Schema schema = toy_schema();
    std::istringstream in(kToyCsv);
    const RawTable table = load_csv(in, schema);
    FamilySpec family;
    family.family = Family::normal;
    const Dataset data = build_dataset(table, schema, family);

    CHECK(data.n() == 4);
    CHECK(data.j() == 2);
    CHECK(data.k() == 2);
    CHECK(data.x_names == std::vector<std::string>({"(Intercept)", "x1"}));
    CHECK(data.z_names == std::vector<std::string>({"z1", "z2"}));
    CHECK(data.X.col(0).isOnes());
    CHECK(data.X(3, 1) == 0.4);
    CHECK(data.y[0] == 1.5);
    CHECK(data.Z(0, 1) == 2.0);

    SUBCASE("without the automatic intercept") {
        const Dataset bare = build_dataset(table, schema, family, false);
        CHECK(bare.j() == 1);
        CHECK(bare.x_names == std::vector<std::string>({"x1"}));
    }
    SUBCASE("exactly one response required") {
        std::istringstream two("y: response\nx1: response\ntag: id\njunk: ignore\n*: putative\n");
        const Schema s2 = Schema::parse(two);
        std::istringstream csv(kToyCsv);
        const RawTable t2 = load_csv(csv, s2);
        CHECK_THROWS_AS(build_dataset(t2, s2, family), SchemaError);
    }
    SUBCASE("survival roles are redirected") {
        std::istringstream surv("y: response\nx1: time\ntag: id\njunk: ignore\n*: putative\n");
        const Schema s3 = Schema::parse(surv);
        std::istringstream csv(kToyCsv);
        const RawTable t3 = load_csv(csv, s3);
        CHECK_THROWS_AS(build_dataset(t3, s3, family), SchemaError);
    }
}

TEST_CASE("standardization and the way back") {
    Dataset data;
    data.family.family = Family::normal;
    data.y = VectorXd::Zero(3);
    data.X = MatrixXd::Ones(3, 1);
    data.Z.resize(3, 2);
    data.Z.col(0) << 1.0, 2.0, 3.0;
    data.Z.col(1) << 4.0, 0.0, 2.0;
    data.z_names = {"u", "v"};

    const Standardization info = standardize_putative(data);
    CHECK(info.center[0] == doctest::Approx(2.0));
    CHECK(info.scale[0] == doctest::Approx(1.0));
    CHECK(info.center[1] == doctest::Approx(2.0));
    CHECK(info.scale[1] == doctest::Approx(2.0));
    CHECK(data.Z.col(0).mean() == doctest::Approx(0.0));
    CHECK((data.Z.col(1).array().square().sum() / 2.0) == doctest::Approx(1.0));

    SUBCASE("coefficients map back to the raw scale") {
        // fit on standardized columns: intercept a, slope c for column 1
        const double a = 5.0, c = 1.5;
        VectorXd coef(2);
        coef << a, c;
        const VectorXd raw = unstandardize_coef(info, {1}, coef, 1, 0);
        CHECK(raw[1] == doctest::Approx(c / info.scale[1]));
        CHECK(raw[0] == doctest::Approx(a - (c / info.scale[1]) * info.center[1]));
        // predictions agree on both scales for a probe value
        const double z_raw = 3.7;
        const double z_std = (z_raw - info.center[1]) / info.scale[1];
        CHECK(a + c * z_std == doctest::Approx(raw[0] + raw[1] * z_raw));
    }
    SUBCASE("constant columns are refused by name") {
        Dataset flat = data;
        flat.Z.col(1).setConstant(8.0);
        try {
            standardize_putative(flat);
            FAIL("expected ConstantColumnError");
        } catch (const ConstantColumnError& e) {
            CHECK(e.column == "v");
        }
    }
}

TEST_CASE("compositional log-ratio transform") {
    MatrixXd counts(2, 3);
    counts << 10.0, 0.0, 30.0,
               5.0, 5.0, 10.0;
    const std::vector<std::string> names{"taxA", "taxB", "taxC"};
    const LogratioResult lr = compositional_logratio(counts, names, 2);

    CHECK(lr.z.rows() == 2);
    CHECK(lr.z.cols() == 2);
    CHECK(lr.names == std::vector<std::string>({"taxA", "taxB"}));
    CHECK(lr.reference == 2);
    // zeros become 0.5 before closure; ratios are scale free so closure cancels
    CHECK(lr.z(0, 0) == doctest::Approx(std::log(10.0 / 30.0)));
    CHECK(lr.z(0, 1) == doctest::Approx(std::log(0.5 / 30.0)));
    CHECK(lr.z(1, 0) == doctest::Approx(std::log(5.0 / 10.0)));

    SUBCASE("row scaling does not change the output") {
        MatrixXd scaled = counts;
        scaled.row(1) *= 7.0;
        const LogratioResult lr2 = compositional_logratio(scaled, names, 2);
        CHECK((lr2.z - lr.z).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("invalid input") {
        MatrixXd neg = counts;
        neg(0, 0) = -1.0;
        CHECK_THROWS_AS(compositional_logratio(neg, names, 2), ValidationError);
        CHECK_THROWS_AS(compositional_logratio(counts, names, 5), ValidationError);
        CHECK_THROWS_AS(compositional_logratio(MatrixXd::Ones(2, 1), {}, 0), ValidationError);
    }
}

TEST_CASE("survival records expand to a Poisson model") {
    // subjects: A dies at 2, B dies at 3, C censored at 3
    std::vector<SurvivalRecord> recs(3);
    recs[0] = {2.0, true, VectorXd::Constant(1, 1.0), VectorXd()};
    recs[1] = {3.0, true, VectorXd::Constant(1, 2.0), VectorXd()};
    recs[2] = {3.0, false, VectorXd::Constant(1, 3.0), VectorXd()};

    const PoissonExpansion px = survival_to_poisson(recs, {"marker"});
    CHECK(px.cut_times == std::vector<double>({2.0, 3.0}));
    CHECK(px.data.family.family == Family::poisson);
    // interval 1: all three at risk; interval 2: only B and C remain
    REQUIRE(px.data.n() == 5);
    CHECK(px.data.y.sum() == doctest::Approx(2.0));  // two deaths in total
    CHECK(px.data.j() == 2);                         // one indicator per interval
    CHECK(px.data.x_names[0] == "interval_1");
    CHECK(px.data.z_names == std::vector<std::string>({"marker"}));
    for (Eigen::Index r = 0; r < 5; ++r) {
        CHECK(px.data.X.row(r).sum() == doctest::Approx(1.0));  // exactly one interval flag
        CHECK(px.data.offset[r] == doctest::Approx(0.0));       // singleton patterns
    }
    CHECK(px.interval == std::vector<Eigen::Index>({0, 0, 0, 1, 1}));

    SUBCASE("all-censored data cannot be expanded") {
        for (auto& r : recs) r.event = false;
        CHECK_THROWS_AS(survival_to_poisson(recs, {"marker"}), NoEventsError);
    }
    SUBCASE("nonpositive times are invalid") {
        recs[0].time = 0.0;
        CHECK_THROWS_AS(survival_to_poisson(recs, {"marker"}), ValidationError);
    }
}

TEST_CASE("shared covariate patterns pool risk sets") {
    // four subjects with identical covariates; deaths at 1, 2, 4; censoring at 3
    std::vector<SurvivalRecord> recs(4);
    const VectorXd z = VectorXd::Constant(1, 0.7);
    recs[0] = {1.0, true, z, VectorXd()};
    recs[1] = {2.0, true, z, VectorXd()};
    recs[2] = {3.0, false, z, VectorXd()};
    recs[3] = {4.0, true, z, VectorXd()};

    const PoissonExpansion px = survival_to_poisson(recs, {"marker"});
    CHECK(px.cut_times == std::vector<double>({1.0, 2.0, 4.0}));
    REQUIRE(px.data.n() == 3);  // one pooled pattern per interval
    CHECK(px.data.y.isApprox(VectorXd::Ones(3)));
    CHECK(px.data.offset[0] == doctest::Approx(std::log(4.0)));
    CHECK(px.data.offset[1] == doctest::Approx(std::log(3.0)));
    CHECK(px.data.offset[2] == doctest::Approx(std::log(1.0)));
    // risk sets can only shrink over time within a pattern
    for (Eigen::Index r = 1; r < 3; ++r) CHECK(px.data.offset[r] <= px.data.offset[r - 1]);

    SUBCASE("tied death times collapse into one interval") {
        recs[1].time = 1.0;  // now two deaths at t = 1
        const PoissonExpansion tied = survival_to_poisson(recs, {"marker"});
        CHECK(tied.cut_times == std::vector<double>({1.0, 4.0}));
        REQUIRE(tied.data.n() == 2);
        CHECK(tied.data.y[0] == doctest::Approx(2.0));
        CHECK(tied.data.offset[0] == doctest::Approx(std::log(4.0)));
    }
}

TEST_CASE("locked-in covariates ride along through the expansion") {
    std::vector<SurvivalRecord> recs(2);
    recs[0] = {1.0, true, VectorXd::Constant(2, 0.0), VectorXd::Constant(1, 5.0)};
    recs[1] = {2.0, true, VectorXd::Constant(2, 1.0), VectorXd::Constant(1, 6.0)};
    const PoissonExpansion px = survival_to_poisson(recs, {"g1", "g2"}, {"age"});
    CHECK(px.data.j() == 3);  // two intervals + age
    CHECK(px.data.x_names == std::vector<std::string>({"interval_1", "interval_2", "age"}));
    CHECK(px.data.k() == 2);
    // the age value follows each pattern's rows
    for (Eigen::Index r = 0; r < px.data.n(); ++r) {
        const double age = px.data.X(r, 2);
        CHECK((age == 5.0 || age == 6.0));
        CHECK(px.data.Z(r, 0) == (age == 5.0 ? 0.0 : 1.0));
    }
}
