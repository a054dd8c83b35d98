#include "ebvs/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace ebvs {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_number(const std::string& raw, std::size_t row, std::size_t col) {
    const std::string tok = trim(raw);
    if (tok.empty())
        throw ParseError("empty cell where a number is required", row, col);
    double value = 0.0;
    const char* begin = tok.data();
    const char* end = begin + tok.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw ParseError("cannot parse '" + tok + "' as a number", row, col);
    if (!std::isfinite(value))
        throw ParseError("non-finite value '" + tok + "'", row, col);
    return value;
}

}  // namespace

ColumnRole role_from_string(const std::string& s) {
    if (s == "response") return ColumnRole::response;
    if (s == "locked_in" || s == "locked-in") return ColumnRole::locked_in;
    if (s == "putative") return ColumnRole::putative;
    if (s == "time") return ColumnRole::time;
    if (s == "event") return ColumnRole::event;
    if (s == "id") return ColumnRole::id;
    if (s == "ignore") return ColumnRole::ignore;
    throw SchemaError("unknown column role '" + s + "'");
}

std::string to_string(ColumnRole r) {
    switch (r) {
        case ColumnRole::response: return "response";
        case ColumnRole::locked_in: return "locked_in";
        case ColumnRole::putative: return "putative";
        case ColumnRole::time: return "time";
        case ColumnRole::event: return "event";
        case ColumnRole::id: return "id";
        case ColumnRole::ignore: return "ignore";
    }
    throw ContractViolation("unreachable role value");
}

ColumnRole Schema::role_of(const std::string& column) const {
    const auto it = roles.find(column);
    if (it != roles.end()) return it->second;
    if (has_default) return default_role;
    throw SchemaError("column '" + column + "' is not covered by the schema");
}

Schema Schema::parse(std::istream& in) {
    Schema schema;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t colon = stripped.find(':');
        if (colon == std::string::npos)
            throw SchemaError("schema line " + std::to_string(lineno) +
                              " is not of the form 'column: role'");
        const std::string name = trim(stripped.substr(0, colon));
        const ColumnRole role = role_from_string(trim(stripped.substr(colon + 1)));
        if (name.empty())
            throw SchemaError("schema line " + std::to_string(lineno) + " has an empty column name");
        if (name == "*") {
            if (schema.has_default)
                throw SchemaError("schema declares more than one '*' default role");
            schema.has_default = true;
            schema.default_role = role;
            continue;
        }
        if (!schema.roles.emplace(name, role).second)
            throw SchemaError("column '" + name + "' appears twice in the schema");
    }
    return schema;
}

Schema Schema::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open schema file '" + path + "'");
    return parse(in);
}

RawTable load_csv(std::istream& in, const Schema& schema) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("input has no header row");
    RawTable table;
    table.names = split_csv_line(line);
    for (auto& n : table.names) n = trim(n);

    const std::size_t ncol = table.names.size();
    std::map<std::string, std::size_t> seen;
    for (std::size_t c = 0; c < ncol; ++c) {
        if (table.names[c].empty()) throw SchemaError("header has an empty column name");
        if (!seen.emplace(table.names[c], c).second)
            throw SchemaError("duplicate column '" + table.names[c] + "' in header");
    }

    table.value_col.assign(ncol, -1);
    int next_value = 0;
    for (std::size_t c = 0; c < ncol; ++c) {
        const ColumnRole role = schema.role_of(table.names[c]);  // SchemaError if unmapped
        if (role == ColumnRole::id) {
            table.id_names.push_back(table.names[c]);
            table.id_values.emplace_back();
        } else if (role != ColumnRole::ignore) {
            table.value_col[c] = next_value++;
        }
    }

    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;  // header was line 1
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != ncol)
            throw ParseError("expected " + std::to_string(ncol) + " fields, found " +
                                 std::to_string(fields.size()),
                             lineno, std::min(fields.size(), ncol) + 1);
        std::vector<double> numeric(static_cast<std::size_t>(next_value));
        std::size_t id_idx = 0;
        for (std::size_t c = 0; c < ncol; ++c) {
            if (table.value_col[c] >= 0) {
                numeric[static_cast<std::size_t>(table.value_col[c])] =
                    parse_number(fields[c], lineno, c + 1);
            } else if (schema.role_of(table.names[c]) == ColumnRole::id) {
                table.id_values[id_idx++].push_back(trim(fields[c]));
            }
        }
        rows.push_back(std::move(numeric));
    }

    table.values.resize(static_cast<Eigen::Index>(rows.size()), next_value);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (int c = 0; c < next_value; ++c)
            table.values(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    return table;
}

RawTable load_csv_file(const std::string& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open input file '" + path + "'");
    return load_csv(in, schema);
}

Dataset build_dataset(const RawTable& table, const Schema& schema, const FamilySpec& family,
                      bool add_intercept) {
    std::vector<std::size_t> response, locked, putative;
    for (std::size_t c = 0; c < table.names.size(); ++c) {
        switch (schema.role_of(table.names[c])) {
            case ColumnRole::response: response.push_back(c); break;
            case ColumnRole::locked_in: locked.push_back(c); break;
            case ColumnRole::putative: putative.push_back(c); break;
            case ColumnRole::time:
            case ColumnRole::event:
                throw SchemaError("time/event columns require the survival pipeline");
            default: break;
        }
    }
    if (response.size() != 1)
        throw SchemaError("schema must mark exactly one response column, found " +
                          std::to_string(response.size()));
    if (putative.empty()) throw SchemaError("schema marks no putative columns");

    const Eigen::Index n = table.n_rows();
    if (n == 0) throw SchemaError("input has no data rows");
    Dataset data;
    data.family = family;
    data.y = table.values.col(table.value_col[response[0]]);

    const Eigen::Index j = static_cast<Eigen::Index>(locked.size()) + (add_intercept ? 1 : 0);
    data.X.resize(n, j);
    Eigen::Index xc = 0;
    if (add_intercept) {
        data.X.col(0).setOnes();
        data.x_names.push_back("(Intercept)");
        xc = 1;
    }
    for (std::size_t c : locked) {
        data.X.col(xc++) = table.values.col(table.value_col[c]);
        data.x_names.push_back(table.names[c]);
    }

    data.Z.resize(n, static_cast<Eigen::Index>(putative.size()));
    Eigen::Index zc = 0;
    for (std::size_t c : putative) {
        data.Z.col(zc++) = table.values.col(table.value_col[c]);
        data.z_names.push_back(table.names[c]);
    }
    data.validate();
    return data;
}

Standardization standardize_putative(Dataset& data) {
    const Eigen::Index n = data.n();
    const Eigen::Index k = data.k();
    if (n < 2) throw ValidationError("standardization needs at least two rows");
    Standardization out;
    out.center.resize(k);
    out.scale.resize(k);
    for (Eigen::Index c = 0; c < k; ++c) {
        const double mean = data.Z.col(c).mean();
        const double sd =
            std::sqrt((data.Z.col(c).array() - mean).square().sum() / static_cast<double>(n - 1));
        if (sd == 0.0) throw ConstantColumnError(data.z_name(c));
        data.Z.col(c) = (data.Z.col(c).array() - mean) / sd;
        out.center[c] = mean;
        out.scale[c] = sd;
        out.names.push_back(data.z_name(c));
    }
    return out;
}

VectorXd unstandardize_coef(const Standardization& std_info,
                            const std::vector<Eigen::Index>& selected,
                            const VectorXd& coef, Eigen::Index n_locked,
                            Eigen::Index intercept_idx) {
    if (coef.size() != n_locked + static_cast<Eigen::Index>(selected.size()))
        throw ValidationError("coefficient vector does not match locked + selected layout");
    VectorXd out = coef;
    for (std::size_t i = 0; i < selected.size(); ++i) {
        const Eigen::Index k = selected[i];
        if (k < 0 || k >= std_info.scale.size())
            throw ValidationError("selected index outside the standardization record");
        const Eigen::Index pos = n_locked + static_cast<Eigen::Index>(i);
        out[pos] = coef[pos] / std_info.scale[k];
        if (intercept_idx >= 0) out[intercept_idx] -= out[pos] * std_info.center[k];
    }
    return out;
}

LogratioResult compositional_logratio(const MatrixXd& counts,
                                      const std::vector<std::string>& names,
                                      Eigen::Index reference) {
    const Eigen::Index n = counts.rows();
    const Eigen::Index k = counts.cols();
    if (k < 2) throw ValidationError("log-ratio transform needs at least two components");
    if (reference < 0 || reference >= k)
        throw ValidationError("reference column index out of range");
    if (!names.empty() && static_cast<Eigen::Index>(names.size()) != k)
        throw ValidationError("names length does not match count matrix");
    if ((counts.array() < 0.0).any())
        throw ValidationError("compositional counts must be nonnegative");

    LogratioResult out;
    out.reference = reference;
    out.z.resize(n, k - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        VectorXd row = counts.row(i);
        for (Eigen::Index c = 0; c < k; ++c)
            if (row[c] == 0.0) row[c] = 0.5;  // zero-count replacement before closure
        row /= row.sum();
        const double ref = std::log(row[reference]);
        Eigen::Index oc = 0;
        for (Eigen::Index c = 0; c < k; ++c) {
            if (c == reference) continue;
            out.z(i, oc++) = std::log(row[c]) - ref;
        }
    }
    for (Eigen::Index c = 0; c < k; ++c) {
        if (c == reference) continue;
        out.names.push_back(names.empty() ? ("C" + std::to_string(c + 1)) : names[static_cast<std::size_t>(c)]);
    }
    return out;
}

PoissonExpansion survival_to_poisson(const std::vector<SurvivalRecord>& records,
                                     const std::vector<std::string>& z_names,
                                     const std::vector<std::string>& x_names) {
    if (records.empty()) throw ValidationError("no survival records");
    const Eigen::Index kz = records.front().z.size();
    const Eigen::Index kx = records.front().x.size();
    for (const auto& rec : records) {
        if (rec.z.size() != kz || rec.x.size() != kx)
            throw ValidationError("survival records have inconsistent covariate lengths");
        if (!(rec.time > 0.0)) throw ValidationError("survival times must be positive");
    }
    if (!z_names.empty() && static_cast<Eigen::Index>(z_names.size()) != kz)
        throw ValidationError("z_names length does not match records");
    if (!x_names.empty() && static_cast<Eigen::Index>(x_names.size()) != kx)
        throw ValidationError("x_names length does not match records");

    // distinct event times, ascending; ties collapse into one interval
    std::vector<double> cuts;
    for (const auto& rec : records)
        if (rec.event) cuts.push_back(rec.time);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    if (cuts.empty()) throw NoEventsError("no events in the survival data");

    // covariate patterns, keyed on exact (x, z) equality, in first-seen order
    std::map<std::string, Eigen::Index> pattern_of;
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < records.size(); ++i) {
        std::string key;
        key.append(reinterpret_cast<const char*>(records[i].x.data()), kx * sizeof(double));
        key.append(reinterpret_cast<const char*>(records[i].z.data()), kz * sizeof(double));
        const auto [it, inserted] =
            pattern_of.emplace(key, static_cast<Eigen::Index>(members.size()));
        if (inserted) members.emplace_back();
        members[static_cast<std::size_t>(it->second)].push_back(i);
    }

    const Eigen::Index q = static_cast<Eigen::Index>(cuts.size());
    std::vector<double> y_rows, off_rows;
    std::vector<Eigen::Index> interval_rows, pattern_rows;
    for (Eigen::Index h = 0; h < q; ++h) {
        const double t = cuts[static_cast<std::size_t>(h)];
        for (std::size_t g = 0; g < members.size(); ++g) {
            Eigen::Index at_risk = 0, deaths = 0;
            for (std::size_t i : members[g]) {
                if (records[i].time >= t) {
                    ++at_risk;
                    if (records[i].event && records[i].time == t) ++deaths;
                }
            }
            if (at_risk == 0) continue;
            y_rows.push_back(static_cast<double>(deaths));
            off_rows.push_back(std::log(static_cast<double>(at_risk)));
            interval_rows.push_back(h);
            pattern_rows.push_back(static_cast<Eigen::Index>(g));
        }
    }

    const Eigen::Index rows = static_cast<Eigen::Index>(y_rows.size());
    PoissonExpansion out;
    out.cut_times = cuts;
    out.interval.assign(interval_rows.begin(), interval_rows.end());
    Dataset& d = out.data;
    d.family.family = Family::poisson;
    d.y.resize(rows);
    d.offset.resize(rows);
    d.X = MatrixXd::Zero(rows, q + kx);
    d.Z.resize(rows, kz);
    for (Eigen::Index r = 0; r < rows; ++r) {
        d.y[r] = y_rows[static_cast<std::size_t>(r)];
        d.offset[r] = off_rows[static_cast<std::size_t>(r)];
        d.X(r, interval_rows[static_cast<std::size_t>(r)]) = 1.0;
        const std::size_t subject =
            members[static_cast<std::size_t>(pattern_rows[static_cast<std::size_t>(r)])].front();
        if (kx > 0) d.X.block(r, q, 1, kx) = records[subject].x.transpose();
        d.Z.row(r) = records[subject].z.transpose();
    }
    for (Eigen::Index h = 0; h < q; ++h)
        d.x_names.push_back("interval_" + std::to_string(h + 1));
    for (Eigen::Index c = 0; c < kx; ++c)
        d.x_names.push_back(x_names.empty() ? ("X" + std::to_string(c + 1)) : x_names[static_cast<std::size_t>(c)]);
    for (Eigen::Index c = 0; c < kz; ++c)
        d.z_names.push_back(z_names.empty() ? ("Z" + std::to_string(c + 1)) : z_names[static_cast<std::size_t>(c)]);
    d.validate();
    return out;
}

}  // namespace ebvs
