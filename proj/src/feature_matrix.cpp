#include "aes/feature_matrix.hpp"

#include <sstream>

#include "aes/csv.hpp"
#include "aes/error.hpp"

namespace aes {

FeatureMatrix::FeatureMatrix(std::vector<std::string> column_names, std::vector<std::string> row_ids)
    : column_names_(std::move(column_names)), row_ids_(std::move(row_ids)) {
    values_.assign(row_ids_.size() * column_names_.size(), 0.0);
    index_rows();
}

FeatureMatrix::FeatureMatrix(std::vector<std::string> column_names, std::vector<std::string> row_ids,
                             std::vector<double> values)
    : column_names_(std::move(column_names)), row_ids_(std::move(row_ids)), values_(std::move(values)) {
    if (values_.size() != row_ids_.size() * column_names_.size()) {
        std::ostringstream os;
        os << "feature matrix holds " << values_.size() << " values for " << row_ids_.size() << "x"
           << column_names_.size();
        throw ValidationError(os.str());
    }
    index_rows();
}

void FeatureMatrix::index_rows() {
    row_index_.clear();
    row_index_.reserve(row_ids_.size());
    for (std::size_t r = 0; r < row_ids_.size(); ++r) {
        if (!row_index_.emplace(row_ids_[r], r).second) {
            throw ValidationError("duplicate row id '" + row_ids_[r] + "' in feature matrix");
        }
    }
}

std::optional<std::size_t> FeatureMatrix::find_row(const std::string& id) const {
    auto it = row_index_.find(id);
    if (it == row_index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::string> ids) const {
    std::vector<double> values;
    values.reserve(ids.size() * cols());
    for (const auto& id : ids) {
        auto r = find_row(id);
        if (!r) {
            throw ValidationError("essay '" + id + "' not present in feature matrix");
        }
        auto src = row(*r);
        values.insert(values.end(), src.begin(), src.end());
    }
    return FeatureMatrix(column_names_, std::vector<std::string>(ids.begin(), ids.end()), std::move(values));
}

FeatureMatrix FeatureMatrix::aligned_to(std::span<const std::string> ids) const {
    if (ids.size() != rows()) {
        throw ValidationError("row id sets differ in size");
    }
    return select_rows(ids);
}

FeatureMatrix hconcat(std::span<const FeatureMatrix> parts) {
    if (parts.empty()) {
        throw ValidationError("no feature parts to concatenate");
    }
    const auto& ids = parts.front().row_ids();
    std::vector<FeatureMatrix> aligned;
    aligned.reserve(parts.size());
    std::vector<std::string> names;
    std::size_t width = 0;
    for (const auto& p : parts) {
        if (p.rows() != ids.size()) {
            throw ValidationError("row id mismatch between feature parts");
        }
        try {
            aligned.push_back(p.row_ids() == ids ? p : p.aligned_to(ids));
        } catch (const ValidationError&) {
            throw ValidationError("row id mismatch between feature parts");
        }
        names.insert(names.end(), p.column_names().begin(), p.column_names().end());
        width += p.cols();
    }
    std::vector<double> values;
    values.reserve(ids.size() * width);
    for (std::size_t r = 0; r < ids.size(); ++r) {
        for (const auto& p : aligned) {
            auto src = p.row(r);
            values.insert(values.end(), src.begin(), src.end());
        }
    }
    return FeatureMatrix(std::move(names), ids, std::move(values));
}

void write_dense_csv(const std::filesystem::path& path, const FeatureMatrix& m) {
    std::ostringstream os;
    std::vector<std::string> fields;
    fields.reserve(m.cols() + 1);
    fields.push_back("essay_id");
    fields.insert(fields.end(), m.column_names().begin(), m.column_names().end());
    write_csv_row(os, fields);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        fields.clear();
        fields.push_back(m.row_ids()[r]);
        for (double v : m.row(r)) {
            fields.push_back(format_double(v));
        }
        write_csv_row(os, fields);
    }
    write_file(path, os.str());
}

FeatureMatrix read_dense_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    if (table.header.empty() || table.header.front() != "essay_id") {
        throw ValidationError(path.string() + ": first column must be essay_id");
    }
    std::vector<std::string> names(table.header.begin() + 1, table.header.end());
    std::vector<std::string> ids;
    std::vector<double> values;
    ids.reserve(table.rows.size());
    values.reserve(table.rows.size() * names.size());
    for (const auto& row : table.rows) {
        ids.push_back(row.fields[0]);
        for (std::size_t c = 1; c < row.fields.size(); ++c) {
            values.push_back(parse_double(row.fields[c], path.string() + " line " + std::to_string(row.line)));
        }
    }
    return FeatureMatrix(std::move(names), std::move(ids), std::move(values));
}

}  // namespace aes
