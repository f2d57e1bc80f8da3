#include "data_model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "csv.hpp"
#include "errors.hpp"

namespace secoda {

void Schema::validate() const {
  if (attributes.empty()) {
    throw std::invalid_argument("schema has no attributes");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& attr : attributes) {
    if (attr.name.empty()) {
      throw std::invalid_argument("schema attribute with empty name");
    }
    if (!seen.insert(attr.name).second) {
      throw std::invalid_argument("duplicate attribute name: " + attr.name);
    }
  }
}

Schema Schema::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("schema is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("attributes") ||
      !doc["attributes"].is_array()) {
    throw ParseError("schema must be {\"attributes\": [...]}");
  }
  Schema schema;
  for (const auto& entry : doc["attributes"]) {
    if (!entry.is_object() || !entry.contains("name") ||
        !entry.contains("kind") || !entry["name"].is_string() ||
        !entry["kind"].is_string()) {
      throw ParseError("schema attribute needs string name and kind");
    }
    std::string kind = entry["kind"].get<std::string>();
    AttrKind k;
    if (kind == "numerical") {
      k = AttrKind::Numerical;
    } else if (kind == "categorical") {
      k = AttrKind::Categorical;
    } else {
      throw ParseError("unknown attribute kind: " + kind);
    }
    schema.attributes.push_back({entry["name"].get<std::string>(), k});
  }
  schema.validate();
  return schema;
}

std::string Schema::to_json() const {
  nlohmann::ordered_json doc;
  doc["attributes"] = nlohmann::ordered_json::array();
  for (const auto& attr : attributes) {
    doc["attributes"].push_back(
        {{"name", attr.name},
         {"kind",
          attr.kind == AttrKind::Numerical ? "numerical" : "categorical"}});
  }
  return doc.dump();
}

bool MissingTokens::contains(std::string_view cell) const {
  for (const auto& t : tokens) {
    if (t == cell) return true;
  }
  return false;
}

bool Dataset::is_missing(size_t col, size_t row) const {
  assert(col < cols() && row < rows_);
  if (schema_.attributes[col].kind == AttrKind::Numerical) {
    return numeric_[col_index_[col]].missing[row] != 0;
  }
  return categorical_[col_index_[col]].missing[row] != 0;
}

double Dataset::numeric_value(size_t col, size_t row) const {
  assert(schema_.attributes[col].kind == AttrKind::Numerical);
  return numeric_[col_index_[col]].values[row];
}

const std::string& Dataset::category(size_t col, size_t row) const {
  assert(schema_.attributes[col].kind == AttrKind::Categorical);
  const auto& c = categorical_[col_index_[col]];
  return c.dictionary[c.codes[row]];
}

CellValue Dataset::cell(size_t col, size_t row) const {
  if (is_missing(col, row)) return MissingCell{};
  if (schema_.attributes[col].kind == AttrKind::Numerical) {
    return numeric_value(col, row);
  }
  return category(col, row);
}

const NumericColumn& Dataset::numeric_column(size_t col) const {
  assert(schema_.attributes[col].kind == AttrKind::Numerical);
  return numeric_[col_index_[col]];
}

const CategoricalColumn& Dataset::categorical_column(size_t col) const {
  assert(schema_.attributes[col].kind == AttrKind::Categorical);
  return categorical_[col_index_[col]];
}

Dataset Dataset::head(size_t n) const {
  if (n > rows_) {
    throw std::invalid_argument("head: asked for " + std::to_string(n) +
                                " of " + std::to_string(rows_) + " rows");
  }
  Dataset out;
  out.schema_ = schema_;
  out.rows_ = n;
  out.col_index_ = col_index_;
  out.missing_render_ = missing_render_;
  for (const auto& c : numeric_) {
    out.numeric_.push_back(
        {std::vector<double>(c.values.begin(), c.values.begin() + n),
         std::vector<uint8_t>(c.missing.begin(), c.missing.begin() + n)});
  }
  for (const auto& c : categorical_) {
    out.categorical_.push_back(
        {std::vector<uint32_t>(c.codes.begin(), c.codes.begin() + n),
         std::vector<uint8_t>(c.missing.begin(), c.missing.begin() + n),
         c.dictionary});
  }
  return out;
}

DatasetBuilder::DatasetBuilder(Schema schema, std::string missing_render) {
  schema.validate();
  data_.schema_ = std::move(schema);
  data_.missing_render_ = std::move(missing_render);
  for (const auto& attr : data_.schema_.attributes) {
    if (attr.kind == AttrKind::Numerical) {
      data_.col_index_.push_back(
          static_cast<uint32_t>(data_.numeric_.size()));
      data_.numeric_.emplace_back();
    } else {
      data_.col_index_.push_back(
          static_cast<uint32_t>(data_.categorical_.size()));
      data_.categorical_.emplace_back();
      dict_lookup_.emplace_back();
    }
  }
}

void DatasetBuilder::add_row(const std::vector<CellValue>& cells) {
  if (cells.size() != data_.schema_.size()) {
    throw std::invalid_argument("row arity does not match schema");
  }
  size_t cat_seq = 0;
  for (size_t col = 0; col < cells.size(); ++col) {
    const Attribute& attr = data_.schema_.attributes[col];
    if (attr.kind == AttrKind::Numerical) {
      auto& column = data_.numeric_[data_.col_index_[col]];
      if (const double* v = std::get_if<double>(&cells[col]);
          v != nullptr && std::isfinite(*v)) {
        column.values.push_back(*v);
        column.missing.push_back(0);
      } else if (std::holds_alternative<std::string>(cells[col])) {
        throw std::invalid_argument("string cell in numerical attribute " +
                                    attr.name);
      } else {
        column.values.push_back(0.0);
        column.missing.push_back(1);
      }
    } else {
      auto& column = data_.categorical_[data_.col_index_[col]];
      auto& lookup = dict_lookup_[cat_seq++];
      if (const std::string* v = std::get_if<std::string>(&cells[col])) {
        auto [it, added] = lookup.try_emplace(
            *v, static_cast<uint32_t>(column.dictionary.size()));
        if (added) column.dictionary.push_back(*v);
        column.codes.push_back(it->second);
        column.missing.push_back(0);
      } else if (std::holds_alternative<double>(cells[col])) {
        throw std::invalid_argument("numeric cell in categorical attribute " +
                                    attr.name);
      } else {
        column.codes.push_back(0);
        column.missing.push_back(1);
      }
    }
  }
  ++rows_;
}

void DatasetBuilder::add_numeric_row(std::span<const double> values) {
  if (values.size() != data_.schema_.size()) {
    throw std::invalid_argument("row arity does not match schema");
  }
  for (size_t col = 0; col < values.size(); ++col) {
    if (data_.schema_.attributes[col].kind != AttrKind::Numerical) {
      throw std::invalid_argument("add_numeric_row on categorical attribute");
    }
    auto& column = data_.numeric_[data_.col_index_[col]];
    if (std::isfinite(values[col])) {
      column.values.push_back(values[col]);
      column.missing.push_back(0);
    } else {
      column.values.push_back(0.0);
      column.missing.push_back(1);
    }
  }
  ++rows_;
}

Dataset DatasetBuilder::build() && {
  data_.rows_ = rows_;
  // Dictionaries always carry at least one entry so that code 0 of a
  // fully-missing column still dereferences.
  for (auto& c : data_.categorical_) {
    if (c.dictionary.empty()) c.dictionary.push_back(std::string());
  }
  return std::move(data_);
}

Schema infer_schema(const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows,
                    const MissingTokens& missing) {
  Schema schema;
  for (size_t col = 0; col < header.size(); ++col) {
    bool numerical = true;
    for (const auto& row : rows) {
      const std::string& cell = row[col];
      if (missing.contains(cell)) continue;
      auto parsed = parse_double(cell);
      if (!parsed || !std::isfinite(*parsed)) {
        numerical = false;
        break;
      }
    }
    schema.attributes.push_back(
        {header[col], numerical ? AttrKind::Numerical : AttrKind::Categorical});
  }
  schema.validate();
  return schema;
}

Dataset load_csv_text(const std::string& text, const Schema* schema,
                      const MissingTokens& missing) {
  CsvReader reader(text);
  std::vector<std::string> header;
  size_t line = 0;
  if (!reader.next(header, line)) throw ParseError("empty input");

  std::vector<std::vector<std::string>> rows;
  std::vector<size_t> lines;
  std::vector<std::string> record;
  while (reader.next(record, line)) {
    if (record.size() != header.size()) {
      throw ParseError("line " + std::to_string(line) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(record.size()));
    }
    rows.push_back(std::move(record));
    lines.push_back(line);
    record.clear();
  }

  Schema resolved;
  if (schema != nullptr) {
    resolved = *schema;
    resolved.validate();
    if (resolved.size() != header.size()) {
      throw ParseError("schema has " + std::to_string(resolved.size()) +
                       " attributes but header has " +
                       std::to_string(header.size()));
    }
    for (size_t col = 0; col < header.size(); ++col) {
      if (resolved.attributes[col].name != header[col]) {
        throw ParseError("header column '" + header[col] +
                         "' does not match schema attribute '" +
                         resolved.attributes[col].name + "'");
      }
    }
  } else {
    resolved = infer_schema(header, rows, missing);
  }

  DatasetBuilder builder(resolved, missing.tokens.empty()
                                       ? std::string()
                                       : missing.tokens.front());
  std::vector<CellValue> cells(resolved.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t col = 0; col < resolved.size(); ++col) {
      const std::string& cell = rows[r][col];
      if (missing.contains(cell)) {
        cells[col] = MissingCell{};
        continue;
      }
      if (resolved.attributes[col].kind == AttrKind::Numerical) {
        auto parsed = parse_double(cell);
        if (!parsed) {
          throw ParseError("line " + std::to_string(lines[r]) + ", column " +
                           resolved.attributes[col].name + ": cannot parse '" +
                           cell + "' as a number");
        }
        // Non-finite spellings parse, but the dataset stores only finite
        // values; they degrade to Missing.
        if (std::isfinite(*parsed)) {
          cells[col] = *parsed;
        } else {
          cells[col] = MissingCell{};
        }
      } else {
        cells[col] = cell;
      }
    }
    builder.add_row(cells);
  }
  return std::move(builder).build();
}

Dataset load_csv(const std::string& path, const Schema* schema,
                 const MissingTokens& missing) {
  return load_csv_text(read_file(path), schema, missing);
}

std::string write_csv_text(const Dataset& data) {
  std::string out;
  std::vector<std::string> fields;
  fields.reserve(data.cols());
  for (const auto& attr : data.schema().attributes) {
    fields.push_back(attr.name);
  }
  append_csv_record(out, fields);
  for (size_t row = 0; row < data.rows(); ++row) {
    fields.clear();
    for (size_t col = 0; col < data.cols(); ++col) {
      if (data.is_missing(col, row)) {
        fields.push_back(data.missing_render());
      } else if (data.schema().attributes[col].kind == AttrKind::Numerical) {
        fields.push_back(format_double(data.numeric_value(col, row)));
      } else {
        fields.push_back(data.category(col, row));
      }
    }
    append_csv_record(out, fields);
  }
  return out;
}

void write_csv(const Dataset& data, const std::string& path) {
  write_file(path, write_csv_text(data));
}

std::vector<uint64_t> competition_ranks(std::span<const double> scores) {
  std::vector<uint32_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    return scores[a] < scores[b];
  });
  std::vector<uint64_t> ranks(scores.size());
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    for (size_t k = i; k < j; ++k) ranks[order[k]] = i + 1;
    i = j;
  }
  return ranks;
}

std::string write_scores_text(std::span<const double> scores) {
  std::vector<uint64_t> ranks = competition_ranks(scores);
  std::string out = "case_id,aas,rank\n";
  for (size_t i = 0; i < scores.size(); ++i) {
    out += std::to_string(i);
    out.push_back(',');
    out += format_double(scores[i]);
    out.push_back(',');
    out += std::to_string(ranks[i]);
    out.push_back('\n');
  }
  return out;
}

void write_scores(std::span<const double> scores, const std::string& path) {
  write_file(path, write_scores_text(scores));
}

}  // namespace secoda
