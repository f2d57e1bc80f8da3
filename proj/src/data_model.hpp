#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace secoda {

enum class AttrKind { Numerical, Categorical };

struct Attribute {
  std::string name;
  AttrKind kind;
};

// Ordered attribute list. Names are unique and non-empty.
struct Schema {
  std::vector<Attribute> attributes;

  size_t size() const { return attributes.size(); }
  void validate() const;

  // {"attributes": [{"name": "x", "kind": "numerical"}, ...]}
  static Schema from_json(const std::string& text);
  std::string to_json() const;
};

// Cell spellings that mean "missing" during CSV ingestion.
struct MissingTokens {
  std::vector<std::string> tokens{"", "NA"};
  bool contains(std::string_view cell) const;
};

struct MissingCell {};
using CellValue = std::variant<MissingCell, double, std::string>;

struct NumericColumn {
  std::vector<double> values;    // 0.0 where missing
  std::vector<uint8_t> missing;  // 1 where the cell is missing
};

struct CategoricalColumn {
  std::vector<uint32_t> codes;  // index into dictionary; 0 where missing
  std::vector<uint8_t> missing;
  std::vector<std::string> dictionary;  // first-appearance order
};

// Immutable mixed-type table. Numerical cells are finite; anything else
// became Missing during construction. Cases are identified by row index.
class Dataset {
 public:
  const Schema& schema() const { return schema_; }
  size_t rows() const { return rows_; }
  size_t cols() const { return schema_.size(); }

  bool is_missing(size_t col, size_t row) const;
  double numeric_value(size_t col, size_t row) const;
  const std::string& category(size_t col, size_t row) const;
  CellValue cell(size_t col, size_t row) const;

  const NumericColumn& numeric_column(size_t col) const;
  const CategoricalColumn& categorical_column(size_t col) const;

  // Dataset of the first n rows. Dictionaries are kept as-is, so codes
  // remain comparable with the parent's.
  Dataset head(size_t n) const;

  const std::string& missing_render() const { return missing_render_; }

 private:
  friend class DatasetBuilder;
  Schema schema_;
  size_t rows_ = 0;
  // Parallel to schema_: exactly one of the two vectors has an entry per
  // column, found through col_index_.
  std::vector<NumericColumn> numeric_;
  std::vector<CategoricalColumn> categorical_;
  std::vector<uint32_t> col_index_;
  std::string missing_render_;
};

// Row-wise accumulation, then a single freeze into a Dataset.
// Construction is single-threaded.
class DatasetBuilder {
 public:
  explicit DatasetBuilder(Schema schema, std::string missing_render = "");

  // Non-finite numeric values degrade to Missing, keeping the dataset
  // invariant without burdening callers.
  void add_row(const std::vector<CellValue>& cells);
  void add_numeric_row(std::span<const double> values);

  size_t rows() const { return rows_; }
  Dataset build() &&;

 private:
  Dataset data_;
  size_t rows_ = 0;
  // One lookup per categorical column; codes follow first appearance.
  std::vector<std::unordered_map<std::string, uint32_t>> dict_lookup_;
};

// Attribute kinds from sample cells: a column is Numerical iff every
// non-missing cell parses as a finite real (vacuously Numerical when all
// cells are missing).
Schema infer_schema(const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows,
                    const MissingTokens& missing);

// CSV with a header row. With a schema the header must match it; without
// one the schema is inferred from the full file. Cell errors name the
// physical line and the column.
Dataset load_csv_text(const std::string& text, const Schema* schema,
                      const MissingTokens& missing);
Dataset load_csv(const std::string& path, const Schema* schema,
                 const MissingTokens& missing);

std::string write_csv_text(const Dataset& data);
void write_csv(const Dataset& data, const std::string& path);

// "case_id,aas,rank" ordered by case id. Rank 1 is the lowest score and
// tied scores share the smallest rank of their group.
std::string write_scores_text(std::span<const double> scores);
void write_scores(std::span<const double> scores, const std::string& path);

// Ranks as used by write_scores.
std::vector<uint64_t> competition_ranks(std::span<const double> scores);

}  // namespace secoda
