#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "misclassit/dataset.hpp"
#include "misclassit/extensions.hpp"

namespace misclassit {

/// 17 significant digits, locale-independent; "nan"/"inf" for non-finite.
std::string format_double(double v);
/// Locale-independent parse of the whole field; nullopt on failure.
std::optional<double> parse_double(std::string_view s);

/// Rows of a dataset file. Columns: y (blank on non-validation rows),
/// ytilde, optional group, then x1..xp in order.
struct CsvTable {
  std::vector<std::optional<int>> y;
  std::vector<int> ytilde;
  std::optional<std::vector<long>> group;
  Matrix x;
};

/// Throws SchemaError with the offending column or line.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Rows with y present form the validation sample. With `add_intercept` a
/// leading column of ones is inserted.
Dataset to_dataset(const CsvTable& t, bool add_intercept);
/// One group per distinct id, ordered by id.
GroupedDataset to_grouped(const CsvTable& t, bool add_intercept);

/// Validation rows first. An intercept column is not written, so reading
/// back with add_intercept restores it.
void write_csv(std::ostream& out, const Dataset& data);
void write_csv(std::ostream& out, const GroupedDataset& data, const std::vector<long>& ids);

std::vector<double> parse_list(std::string_view s);

}  // namespace misclassit
