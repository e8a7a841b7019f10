#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace aes {

/// Dense row-major table of named numeric columns keyed by essay id.
/// The common input of every learner.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    /// Zero-filled matrix. Throws ValidationError on duplicate row ids.
    FeatureMatrix(std::vector<std::string> column_names, std::vector<std::string> row_ids);
    FeatureMatrix(std::vector<std::string> column_names, std::vector<std::string> row_ids,
                  std::vector<double> values);

    std::size_t rows() const noexcept { return row_ids_.size(); }
    std::size_t cols() const noexcept { return column_names_.size(); }

    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }

    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols(), cols()}; }
    std::span<double> row(std::size_t r) { return {values_.data() + r * cols(), cols()}; }

    const std::vector<std::string>& column_names() const noexcept { return column_names_; }
    const std::vector<std::string>& row_ids() const noexcept { return row_ids_; }
    const std::vector<double>& values() const noexcept { return values_; }

    std::optional<std::size_t> find_row(const std::string& id) const;

    /// Rows in the order given; throws ValidationError for unknown ids.
    FeatureMatrix select_rows(std::span<const std::string> ids) const;

    /// Same rows reordered to match `ids`, which must be a permutation of row_ids().
    FeatureMatrix aligned_to(std::span<const std::string> ids) const;

private:
    void index_rows();

    std::vector<std::string> column_names_;
    std::vector<std::string> row_ids_;
    std::vector<double> values_;
    std::unordered_map<std::string, std::size_t> row_index_;
};

/// Horizontal concatenation; every part is aligned to the first part's row order.
/// Throws ValidationError when the row id sets differ.
FeatureMatrix hconcat(std::span<const FeatureMatrix> parts);

/// Header'd CSV: essay_id followed by one column per feature, %.17g values.
void write_dense_csv(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix read_dense_csv(const std::filesystem::path& path);

}  // namespace aes
