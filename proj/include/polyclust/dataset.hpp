#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polyclust/common.hpp"

namespace polyclust {

enum class FeatureKind { numeric, binary, categorical };

// One column of a processed view. One-hot indicator columns are binary.
struct ColumnInfo {
    std::string name;
    FeatureKind kind = FeatureKind::numeric;
    double raw_min = 0.0;
    double raw_max = 1.0;
    bool has_range = false;  // true when min-max rescaling was applied
};

// Binarization request for the explanation view: replace a numeric column
// with one indicator column per threshold (value >= threshold).
// Thresholds are in raw units when the column has a recorded range,
// otherwise in view units.
struct BinarizeCut {
    std::string feature;
    std::vector<double> thresholds;
};

// In-memory dataset with two aligned views over the same rows:
//  - the clustering view (distances, centers) and
//  - the explanation view (hyperplanes), identical unless binarized.
class Dataset {
public:
    // Loads a CSV with a header row. Numeric columns are rescaled to [0,1]
    // by column min/max, categorical columns are one-hot encoded in first
    // appearance order, rows with missing cells ("" or "NA") are dropped.
    // The optional schema file pins column kinds: one "name: kind" per line.
    static Dataset load_csv(const std::string& path, const std::string& schema_path = "");

    // Wraps an already-numeric matrix as-is (no rescaling, no range info).
    static Dataset from_matrix(Matrix points, std::vector<std::string> names = {});

    int n() const { return points_.rows(); }
    int d() const { return points_.cols(); }
    std::span<const double> row(int t) const { return points_.row(t); }
    const Matrix& points() const { return points_; }
    const std::vector<ColumnInfo>& columns() const { return columns_; }

    int explain_d() const { return explain_points_.cols(); }
    std::span<const double> explain_row(int t) const { return explain_points_.row(t); }
    const Matrix& explain_points() const { return explain_points_; }
    const std::vector<ColumnInfo>& explain_columns() const { return explain_columns_; }

    // Euclidean distance on the clustering view. Backed by a precomputed
    // matrix when n() <= kDistanceMatrixLimit.
    double distance(int a, int b) const;
    bool has_distance_matrix() const { return !dist_.empty(); }
    std::span<const double> distance_row(int t) const {
        return {dist_.data() + static_cast<size_t>(t) * n(), static_cast<size_t>(n())};
    }

    // Replaces the explanation view of the listed numeric columns with
    // threshold indicators; all other columns are carried over unchanged.
    void binarize_explanation(const std::vector<BinarizeCut>& cuts);

    const std::vector<std::string>& warnings() const { return warnings_; }
    int dropped_rows() const { return dropped_rows_; }

    bool operator==(const Dataset& o) const {
        return points_ == o.points_ && explain_points_ == o.explain_points_;
    }

    static constexpr int kDistanceMatrixLimit = 5000;

private:
    void finalize();  // builds the distance matrix when small enough

    Matrix points_;
    Matrix explain_points_;
    std::vector<ColumnInfo> columns_;
    std::vector<ColumnInfo> explain_columns_;
    std::vector<double> dist_;
    std::vector<std::string> warnings_;
    int dropped_rows_ = 0;
};

}  // namespace polyclust
