#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fairsens {

enum class Role { feature, sensitive, target, prediction, loss };

const char* role_name(Role r);

struct Column {
    std::string name;
    Role role = Role::feature;
    std::vector<double> values;
};

// Column-major numeric table. Immutable once built: all columns share the
// same length, names are unique, each column has exactly one role.
class DataTable {
public:
    DataTable() = default;
    explicit DataTable(std::vector<Column> columns);

    std::int64_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return columns_.size(); }

    const std::vector<Column>& columns() const { return columns_; }
    const Column& column(std::size_t i) const { return columns_.at(i); }
    const Column& column(const std::string& name) const; // throws SchemaError
    bool has_column(const std::string& name) const;
    std::size_t column_index(const std::string& name) const; // throws SchemaError

    std::vector<std::string> names_with_role(Role r) const;

    // Values of the named columns as an n x k matrix, in the given order.
    Eigen::MatrixXd matrix(const std::vector<std::string>& names) const;

    // Row-resampled copy (bootstrap support).
    DataTable resample(std::span<const std::int64_t> row_indices) const;

    // FNV-1a over names, roles and raw value bits; stable across runs.
    std::uint64_t fingerprint() const;

private:
    std::vector<Column> columns_;
    std::int64_t n_rows_ = 0;
};

// Column-name to role assignments for CSV ingestion. Header columns not
// mentioned default to Role::feature.
struct CsvSchema {
    std::map<std::string, Role> roles;
};

// Parses comma-separated UTF-8 text with a mandatory header row ("." decimal
// point, optional RFC-4180 quoting). Every cell must be numeric.
DataTable load_table(std::istream& source, const CsvSchema& schema);
DataTable load_table_file(const std::string& path, const CsvSchema& schema);

// ranks[i]   = #{j : v[j] <= v[i]}  (R_i)
// geq_counts = #{j : v[j] >= v[i]}  (L_i)
// Ties are resolved by the count definitions themselves; for tie-free input
// the ranks are a permutation of 1..n and R_i + L_i = n + 1.
struct RankVector {
    std::vector<std::int64_t> ranks;
    std::vector<std::int64_t> geq_counts;
    std::int64_t n = 0;
};

RankVector ranks(std::span<const double> values);

struct NeighborMap {
    std::vector<std::int64_t> nn_index; // nn_index[i] != i
    std::uint64_t tie_seed = 0;
};

// Exact Euclidean nearest neighbor of every row (excluding the row itself).
// Ties on the minimal distance are broken uniformly at random among the
// minimizers, keyed by (tie_seed, row), so the result is deterministic.
NeighborMap nearest_neighbors(const Eigen::MatrixXd& points, std::uint64_t tie_seed);

} // namespace fairsens
