#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ebvs/data.hpp"

namespace ebvs {

enum class ColumnRole { response, locked_in, putative, time, event, id, ignore };

ColumnRole role_from_string(const std::string& s);
std::string to_string(ColumnRole r);

// Column-role map.  Schema files are "name: role" lines; a single "*: role"
// line assigns a default role to every column not named explicitly.
struct Schema {
    std::map<std::string, ColumnRole> roles;
    bool has_default = false;
    ColumnRole default_role = ColumnRole::ignore;

    ColumnRole role_of(const std::string& column) const;  // SchemaError if unmapped
    static Schema parse(std::istream& in);
    static Schema load(const std::string& path);
};

// Parsed CSV: header names plus a dense numeric matrix (id columns are kept
// as raw strings).  UTF-8, comma separated, '.' decimal point, one header row.
struct RawTable {
    std::vector<std::string> names;
    MatrixXd values;                       // N x (#numeric columns), in header order
    std::vector<int> value_col;            // header index -> column in `values` (-1 for id)
    std::vector<std::vector<std::string>> id_values;  // per id column, in header order
    std::vector<std::string> id_names;

    Eigen::Index n_rows() const { return values.rows(); }
};

// Parses a CSV under a schema.  Numeric roles require parseable numbers in
// every row: anything else (including NA/empty) is a ParseError locating the
// cell.  Unknown or duplicate header names are SchemaErrors.
RawTable load_csv(std::istream& in, const Schema& schema);
RawTable load_csv_file(const std::string& path, const Schema& schema);

// Assembles a model-ready Dataset from a parsed table: response column,
// locked-in columns (intercept prepended), putative columns in header order.
Dataset build_dataset(const RawTable& table, const Schema& schema, const FamilySpec& family,
                      bool add_intercept = true);

// Centering/scaling transform recorded so fits can be reported on the
// original scale.
struct Standardization {
    std::vector<std::string> names;
    VectorXd center;
    VectorXd scale;  // sample standard deviations (ddof = 1)
};

// Standardize the putative columns in place to mean 0, sd 1.  A column with
// zero sample variance is a ConstantColumnError.
Standardization standardize_putative(Dataset& data);

// Map coefficients of a fit on standardized putative columns back to the
// original scale.  `coef` is ordered [locked-in..., selected putative...];
// the locked-in intercept (position `intercept_idx`, -1 for none) absorbs
// the centering shift.
VectorXd unstandardize_coef(const Standardization& std_info,
                            const std::vector<Eigen::Index>& selected,
                            const VectorXd& coef, Eigen::Index n_locked,
                            Eigen::Index intercept_idx);

// Additive log-ratio transform for compositional putative data (raw counts).
// Zeros are replaced by 0.5 before closure; rows are renormalized to sum 1;
// output column j is log(z_ij / z_i,ref) with the reference column dropped.
// Negative entries are a ValidationError.
struct LogratioResult {
    MatrixXd z;
    std::vector<std::string> names;  // reference column removed
    Eigen::Index reference;          // index in the *input* column order
};
LogratioResult compositional_logratio(const MatrixXd& counts,
                                      const std::vector<std::string>& names,
                                      Eigen::Index reference);

// One subject in a survival study.
struct SurvivalRecord {
    double time = 0.0;
    bool event = false;
    VectorXd z;        // putative covariates
    VectorXd x;        // locked-in covariates (may be empty)
};

// Piecewise-exponential expansion: one Poisson row per (death time, covariate
// pattern at risk), response = death count, offset = log(risk-set size for
// the pattern), interval indicator columns as locked-in effects.  Tied death
// times collapse to one interval.  Throws NoEventsError when no record has
// an event.
struct PoissonExpansion {
    Dataset data;
    std::vector<double> cut_times;       // distinct event times, ascending
    std::vector<Eigen::Index> interval;  // per expanded row
};
PoissonExpansion survival_to_poisson(const std::vector<SurvivalRecord>& records,
                                     const std::vector<std::string>& z_names,
                                     const std::vector<std::string>& x_names = {});

}  // namespace ebvs
