#include "polyclust/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace polyclust {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

bool is_missing(const std::string& s) { return s.empty() || s == "NA"; }

FeatureKind parse_kind(const std::string& s) {
    if (s == "numeric") return FeatureKind::numeric;
    if (s == "binary") return FeatureKind::binary;
    if (s == "categorical") return FeatureKind::categorical;
    throw ConfigError("unknown feature kind '" + s + "' (expected numeric|binary|categorical)");
}

std::map<std::string, FeatureKind> load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open schema file: " + path);
    std::map<std::string, FeatureKind> schema;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t sep = line.find(':');
        if (sep == std::string::npos) sep = line.find('=');
        if (sep == std::string::npos)
            throw ConfigError("schema line missing ':' separator: " + line);
        std::string name = trim(line.substr(0, sep));
        std::string kind = trim(line.substr(sep + 1));
        if (name.empty()) throw ConfigError("schema line with empty column name: " + line);
        schema[name] = parse_kind(kind);
    }
    return schema;
}

}  // namespace

Dataset Dataset::load_csv(const std::string& path, const std::string& schema_path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open data file: " + path);

    std::map<std::string, FeatureKind> schema;
    if (!schema_path.empty()) schema = load_schema(schema_path);

    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty data file: " + path);
    std::vector<std::string> header = split_csv_line(line);
    if (header.empty()) throw ConfigError("empty header row: " + path);
    const int ncols = static_cast<int>(header.size());

    for (const auto& [name, kind] : schema) {
        (void)kind;
        if (std::find(header.begin(), header.end(), name) == header.end())
            throw ConfigError("schema names unknown column '" + name + "'");
    }

    Dataset ds;
    std::vector<std::vector<std::string>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != ncols)
            throw ConfigError(path + ": line " + std::to_string(lineno) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(ncols));
        bool missing = std::any_of(cells.begin(), cells.end(),
                                   [](const std::string& c) { return is_missing(c); });
        if (missing) {
            ++ds.dropped_rows_;
            ds.warnings_.push_back("dropped line " + std::to_string(lineno) +
                                   " (missing value)");
            continue;
        }
        rows.push_back(std::move(cells));
    }
    const int n = static_cast<int>(rows.size());
    if (n == 0) throw ConfigError("no usable data rows in " + path);

    // Per input column: decide kind, then emit one output column (numeric,
    // binary) or a one-hot block (categorical).
    struct OutCol {
        ColumnInfo info;
        std::vector<double> values;
    };
    std::vector<OutCol> out;

    for (int c = 0; c < ncols; ++c) {
        std::vector<double> parsed(n);
        bool all_numeric = true;
        for (int r = 0; r < n && all_numeric; ++r)
            all_numeric = parse_double(rows[r][c], parsed[r]);

        FeatureKind kind;
        if (auto it = schema.find(header[c]); it != schema.end()) {
            kind = it->second;
            if (kind != FeatureKind::categorical && !all_numeric)
                throw ConfigError("column '" + header[c] + "' declared " +
                                  (kind == FeatureKind::numeric ? "numeric" : "binary") +
                                  " but contains non-numeric cells");
        } else if (all_numeric) {
            bool zero_one = std::all_of(parsed.begin(), parsed.end(),
                                        [](double v) { return v == 0.0 || v == 1.0; });
            kind = zero_one ? FeatureKind::binary : FeatureKind::numeric;
        } else {
            kind = FeatureKind::categorical;
        }

        if (kind == FeatureKind::categorical) {
            std::vector<std::string> cats;  // first appearance order
            for (int r = 0; r < n; ++r)
                if (std::find(cats.begin(), cats.end(), rows[r][c]) == cats.end())
                    cats.push_back(rows[r][c]);
            if (cats.size() == 1) {
                ds.warnings_.push_back("column '" + header[c] +
                                       "' is constant; encoded as all zeros");
                OutCol col;
                col.info = {header[c] + "=" + cats[0], FeatureKind::binary, 0.0, 1.0, false};
                col.values.assign(n, 0.0);
                out.push_back(std::move(col));
                continue;
            }
            for (const auto& cat : cats) {
                OutCol col;
                col.info = {header[c] + "=" + cat, FeatureKind::binary, 0.0, 1.0, false};
                col.values.resize(n);
                for (int r = 0; r < n; ++r) col.values[r] = (rows[r][c] == cat) ? 1.0 : 0.0;
                out.push_back(std::move(col));
            }
            continue;
        }

        if (kind == FeatureKind::binary) {
            for (int r = 0; r < n; ++r)
                if (parsed[r] != 0.0 && parsed[r] != 1.0)
                    throw ConfigError("column '" + header[c] +
                                      "' declared binary but contains value " + rows[r][c]);
            OutCol col;
            col.info = {header[c], FeatureKind::binary, 0.0, 1.0, false};
            col.values = parsed;
            bool constant = std::all_of(parsed.begin(), parsed.end(),
                                        [&](double v) { return v == parsed[0]; });
            if (constant) {
                ds.warnings_.push_back("column '" + header[c] +
                                       "' is constant; encoded as all zeros");
                std::fill(col.values.begin(), col.values.end(), 0.0);
            }
            out.push_back(std::move(col));
            continue;
        }

        // numeric: min-max rescale to [0,1]
        double lo = parsed[0], hi = parsed[0];
        for (double v : parsed) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        OutCol col;
        col.info = {header[c], FeatureKind::numeric, lo, hi, true};
        col.values.resize(n);
        if (lo == hi) {
            ds.warnings_.push_back("column '" + header[c] +
                                   "' is constant; encoded as all zeros");
            col.info.has_range = false;
        } else {
            for (int r = 0; r < n; ++r) col.values[r] = (parsed[r] - lo) / (hi - lo);
        }
        out.push_back(std::move(col));
    }

    const int d = static_cast<int>(out.size());
    ds.points_ = Matrix(n, d);
    ds.columns_.resize(d);
    for (int c = 0; c < d; ++c) {
        ds.columns_[c] = out[c].info;
        for (int r = 0; r < n; ++r) ds.points_(r, c) = out[c].values[r];
    }
    ds.explain_points_ = ds.points_;
    ds.explain_columns_ = ds.columns_;
    ds.finalize();
    return ds;
}

Dataset Dataset::from_matrix(Matrix points, std::vector<std::string> names) {
    Dataset ds;
    const int d = points.cols();
    if (names.empty())
        for (int c = 0; c < d; ++c) names.push_back("f" + std::to_string(c));
    if (static_cast<int>(names.size()) != d)
        throw ConfigError("from_matrix: got " + std::to_string(names.size()) +
                          " names for " + std::to_string(d) + " columns");
    ds.columns_.resize(d);
    for (int c = 0; c < d; ++c) ds.columns_[c] = {names[c], FeatureKind::numeric, 0, 1, false};
    ds.points_ = std::move(points);
    ds.explain_points_ = ds.points_;
    ds.explain_columns_ = ds.columns_;
    ds.finalize();
    return ds;
}

void Dataset::finalize() {
    dist_.clear();
    const int m = n();
    if (m > kDistanceMatrixLimit) return;
    dist_.assign(static_cast<size_t>(m) * m, 0.0);
    for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) {
            double v = euclidean_distance(row(a), row(b));
            dist_[static_cast<size_t>(a) * m + b] = v;
            dist_[static_cast<size_t>(b) * m + a] = v;
        }
    }
}

double Dataset::distance(int a, int b) const {
    if (!dist_.empty()) return dist_[static_cast<size_t>(a) * n() + b];
    return euclidean_distance(row(a), row(b));
}

void Dataset::binarize_explanation(const std::vector<BinarizeCut>& cuts) {
    for (const auto& cut : cuts) {
        if (cut.thresholds.empty())
            throw ConfigError("binarize: no thresholds for feature '" + cut.feature + "'");
    }
    struct OutCol {
        ColumnInfo info;
        int source;       // source column index in the clustering view
        double view_cut;  // indicator threshold in view units; NaN = passthrough
    };
    std::vector<OutCol> plan;
    std::vector<bool> used(cuts.size(), false);
    for (int c = 0; c < d(); ++c) {
        const ColumnInfo& info = columns_[c];
        auto it = std::find_if(cuts.begin(), cuts.end(),
                               [&](const BinarizeCut& b) { return b.feature == info.name; });
        if (it == cuts.end()) {
            plan.push_back({info, c, std::nan("")});
            continue;
        }
        if (info.kind != FeatureKind::numeric)
            throw ConfigError("binarize: feature '" + info.name + "' is not numeric");
        used[it - cuts.begin()] = true;
        for (double thr : it->thresholds) {
            double view_thr = thr;
            std::string label = format_fixed(thr, 2);
            if (info.has_range) view_thr = (thr - info.raw_min) / (info.raw_max - info.raw_min);
            ColumnInfo derived{info.name + ">=" + label, FeatureKind::binary, 0.0, 1.0, false};
            plan.push_back({derived, c, view_thr});
        }
    }
    for (size_t i = 0; i < cuts.size(); ++i)
        if (!used[i]) throw ConfigError("binarize: unknown feature '" + cuts[i].feature + "'");

    Matrix view(n(), static_cast<int>(plan.size()));
    explain_columns_.clear();
    for (size_t c = 0; c < plan.size(); ++c) {
        explain_columns_.push_back(plan[c].info);
        for (int r = 0; r < n(); ++r) {
            double v = points_(r, plan[c].source);
            view(r, static_cast<int>(c)) =
                std::isnan(plan[c].view_cut) ? v : (v >= plan[c].view_cut ? 1.0 : 0.0);
        }
    }
    explain_points_ = std::move(view);
}

}  // namespace polyclust
