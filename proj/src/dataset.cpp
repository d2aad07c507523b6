#include "fairsens/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "fairsens/error.hpp"
#include "fairsens/rng.hpp"

namespace fairsens {

const char* role_name(Role r) {
    switch (r) {
        case Role::feature: return "feature";
        case Role::sensitive: return "sensitive";
        case Role::target: return "target";
        case Role::prediction: return "prediction";
        case Role::loss: return "loss";
    }
    return "unknown";
}

DataTable::DataTable(std::vector<Column> columns) : columns_(std::move(columns)) {
    if (columns_.empty()) fail(errc::empty_input, "table has no columns");
    n_rows_ = static_cast<std::int64_t>(columns_.front().values.size());
    if (n_rows_ < 1) fail(errc::empty_input, "table has no rows");
    std::set<std::string> seen;
    for (const auto& c : columns_) {
        if (static_cast<std::int64_t>(c.values.size()) != n_rows_)
            fail(errc::length_mismatch, "column '" + c.name + "' length differs");
        if (!seen.insert(c.name).second)
            fail(errc::schema_error, "duplicate column name '" + c.name + "'");
    }
}

bool DataTable::has_column(const std::string& name) const {
    for (const auto& c : columns_)
        if (c.name == name) return true;
    return false;
}

std::size_t DataTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i].name == name) return i;
    fail(errc::schema_error, "no column named '" + name + "'");
}

const Column& DataTable::column(const std::string& name) const {
    return columns_[column_index(name)];
}

std::vector<std::string> DataTable::names_with_role(Role r) const {
    std::vector<std::string> out;
    for (const auto& c : columns_)
        if (c.role == r) out.push_back(c.name);
    return out;
}

Eigen::MatrixXd DataTable::matrix(const std::vector<std::string>& names) const {
    Eigen::MatrixXd m(n_rows_, static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
        const auto& v = column(names[j]).values;
        for (std::int64_t i = 0; i < n_rows_; ++i) m(i, static_cast<Eigen::Index>(j)) = v[i];
    }
    return m;
}

DataTable DataTable::resample(std::span<const std::int64_t> row_indices) const {
    std::vector<Column> cols;
    cols.reserve(columns_.size());
    for (const auto& c : columns_) {
        Column nc{c.name, c.role, {}};
        nc.values.reserve(row_indices.size());
        for (std::int64_t i : row_indices) nc.values.push_back(c.values.at(static_cast<std::size_t>(i)));
        cols.push_back(std::move(nc));
    }
    return DataTable(std::move(cols));
}

std::uint64_t DataTable::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& c : columns_) {
        feed(c.name.data(), c.name.size());
        const auto role = static_cast<std::uint8_t>(c.role);
        feed(&role, 1);
        feed(c.values.data(), c.values.size() * sizeof(double));
    }
    return h;
}

namespace {

// One CSV record, honoring quotes; returns false on end of stream.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int ch;
    while ((ch = in.get()) != EOF) {
        any = true;
        char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            break;
        } else if (c == '\r') {
            if (in.peek() == '\n') in.get();
            break;
        } else {
            field.push_back(c);
        }
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
    std::size_t b = 0, e = cell.size();
    while (b < e && (cell[b] == ' ' || cell[b] == '\t')) ++b;
    while (e > b && (cell[e - 1] == ' ' || cell[e - 1] == '\t')) --e;
    double value = 0.0;
    const auto* first = cell.data() + b;
    const auto* last = cell.data() + e;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        fail(errc::parse_error, "non-numeric cell '" + cell + "' at row " + std::to_string(row) +
                                    ", column '" + col + "'");
    return value;
}

} // namespace

DataTable load_table(std::istream& source, const CsvSchema& schema) {
    std::vector<std::string> header;
    if (!read_record(source, header) || (header.size() == 1 && header[0].empty()))
        fail(errc::empty_input, "no header row");

    for (const auto& [name, role] : schema.roles) {
        (void)role;
        if (std::find(header.begin(), header.end(), name) == header.end())
            fail(errc::schema_error, "schema column '" + name + "' not in header");
    }

    std::vector<Column> cols;
    cols.reserve(header.size());
    for (const auto& name : header) {
        Role role = Role::feature;
        if (auto it = schema.roles.find(name); it != schema.roles.end()) role = it->second;
        cols.push_back(Column{name, role, {}});
    }

    std::vector<std::string> fields;
    std::size_t row = 1; // header is row 0
    while (read_record(source, fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue; // trailing blank line
        if (fields.size() != header.size())
            fail(errc::parse_error, "row " + std::to_string(row) + " has " +
                                        std::to_string(fields.size()) + " fields, expected " +
                                        std::to_string(header.size()));
        for (std::size_t j = 0; j < fields.size(); ++j)
            cols[j].values.push_back(parse_cell(fields[j], row, header[j]));
        ++row;
    }
    if (cols.front().values.empty()) fail(errc::empty_input, "no data rows");
    return DataTable(std::move(cols));
}

DataTable load_table_file(const std::string& path, const CsvSchema& schema) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(errc::parse_error, "cannot open '" + path + "'");
    return load_table(f, schema);
}

RankVector ranks(std::span<const double> values) {
    const auto n = static_cast<std::int64_t>(values.size());
    if (n == 0) fail(errc::empty_input, "ranks of empty vector");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    RankVector rv;
    rv.n = n;
    rv.ranks.resize(values.size());
    rv.geq_counts.resize(values.size());
    for (std::int64_t i = 0; i < n; ++i) {
        const double v = values[static_cast<std::size_t>(i)];
        const auto le = std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
        const auto lt = std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
        rv.ranks[static_cast<std::size_t>(i)] = le;
        rv.geq_counts[static_cast<std::size_t>(i)] = n - lt;
    }
    return rv;
}

namespace {

std::int64_t pick_among(const std::vector<std::int64_t>& candidates, std::uint64_t tie_seed,
                        std::int64_t row) {
    if (candidates.size() == 1) return candidates[0];
    const std::uint64_t h = rng::hash_key(tie_seed, static_cast<std::uint64_t>(rng::Stream::nn_tie_break),
                                          static_cast<std::uint64_t>(row), 0);
    return candidates[static_cast<std::size_t>(rng::bounded(h, candidates.size()))];
}

// 1-d fast path: sort once, minimizers are the adjacent distinct values
// (or the rest of an equal-value group, at distance zero).
NeighborMap nearest_neighbors_1d(const Eigen::MatrixXd& points, std::uint64_t tie_seed) {
    const auto n = points.rows();
    std::vector<std::int64_t> order(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
        return points(a, 0) < points(b, 0) || (points(a, 0) == points(b, 0) && a < b);
    });

    // group boundaries over equal values
    std::vector<std::size_t> group_of(static_cast<std::size_t>(n));
    std::vector<std::pair<std::size_t, std::size_t>> groups; // [begin,end) in `order`
    for (std::size_t k = 0; k < order.size();) {
        std::size_t e = k + 1;
        while (e < order.size() && points(order[e], 0) == points(order[k], 0)) ++e;
        for (std::size_t t = k; t < e; ++t) group_of[t] = groups.size();
        groups.emplace_back(k, e);
        k = e;
    }

    NeighborMap nm;
    nm.tie_seed = tie_seed;
    nm.nn_index.resize(static_cast<std::size_t>(n));
    std::vector<std::int64_t> cands;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::int64_t i = order[k];
        const std::size_t g = group_of[k];
        const auto [gb, ge] = groups[g];
        cands.clear();
        if (ge - gb >= 2) {
            // duplicates exist: distance zero beats everything
            for (std::size_t t = gb; t < ge; ++t)
                if (order[t] != i) cands.push_back(order[t]);
        } else {
            const double v = points(i, 0);
            double best = std::numeric_limits<double>::infinity();
            if (g > 0) best = std::min(best, std::abs(v - points(order[groups[g - 1].first], 0)));
            if (g + 1 < groups.size())
                best = std::min(best, std::abs(v - points(order[groups[g + 1].first], 0)));
            if (g > 0 && std::abs(v - points(order[groups[g - 1].first], 0)) == best)
                for (std::size_t t = groups[g - 1].first; t < groups[g - 1].second; ++t)
                    cands.push_back(order[t]);
            if (g + 1 < groups.size() && std::abs(v - points(order[groups[g + 1].first], 0)) == best)
                for (std::size_t t = groups[g + 1].first; t < groups[g + 1].second; ++t)
                    cands.push_back(order[t]);
        }
        std::sort(cands.begin(), cands.end());
        nm.nn_index[static_cast<std::size_t>(i)] = pick_among(cands, tie_seed, i);
    }
    return nm;
}

} // namespace

NeighborMap nearest_neighbors(const Eigen::MatrixXd& points, std::uint64_t tie_seed) {
    const auto n = points.rows();
    const auto d = points.cols();
    if (n < 2) fail(errc::too_few_rows, "nearest neighbors need at least 2 rows");
    if (d < 1) fail(errc::invalid_argument, "points need at least one dimension");
    if (!points.allFinite()) fail(errc::non_finite_input, "points contain non-finite entries");

    if (d == 1) return nearest_neighbors_1d(points, tie_seed);

    NeighborMap nm;
    nm.tie_seed = tie_seed;
    nm.nn_index.resize(static_cast<std::size_t>(n));
    std::vector<std::int64_t> cands;
    for (std::int64_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        cands.clear();
        for (std::int64_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double dist = 0.0;
            for (Eigen::Index k = 0; k < d; ++k) {
                const double diff = points(i, k) - points(j, k);
                dist += diff * diff;
            }
            if (dist < best) {
                best = dist;
                cands.clear();
                cands.push_back(j);
            } else if (dist == best) {
                cands.push_back(j);
            }
        }
        nm.nn_index[static_cast<std::size_t>(i)] = pick_among(cands, tie_seed, i);
    }
    return nm;
}

} // namespace fairsens
