#include "hfrisk/cohort.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_set>

#include "hfrisk/error.hpp"
#include "hfrisk/random.hpp"

namespace hfrisk {

Cohort::Cohort(Schema schema,
               std::vector<double> values,
               std::vector<std::uint8_t> missing,
               std::vector<std::optional<int>> outcome,
               std::vector<std::string> row_ids)
    : schema_(std::move(schema)),
      values_(std::move(values)),
      missing_(std::move(missing)),
      outcome_(std::move(outcome)),
      row_ids_(std::move(row_ids)) {
    const std::size_t n = outcome_.size();
    const std::size_t p = schema_.size();
    if (values_.size() != n * p || missing_.size() != n * p) {
        throw DataError("cohort matrix shape does not match schema width times row count");
    }
    if (row_ids_.size() != n) {
        throw DataError("cohort row_id count does not match row count");
    }
    std::unordered_set<std::string_view> ids;
    ids.reserve(n);
    for (const auto& id : row_ids_) {
        if (!ids.insert(id).second) {
            throw DataError("duplicate row_id '" + id + "'");
        }
    }
    for (const auto& y : outcome_) {
        if (y && *y != 0 && *y != 1) {
            throw DataError("outcome values must be 0, 1 or missing");
        }
    }
    for (std::size_t i = 0; i < n * p; ++i) {
        if (missing_[i]) {
            missing_[i] = 1;
            values_[i] = 0.0;
        }
    }
    for (std::size_t j = 0; j < p; ++j) {
        if (schema_[j].kind != FeatureKind::binary) {
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = i * p + j;
            if (!missing_[k] && values_[k] != 0.0 && values_[k] != 1.0) {
                throw DataError("binary column '" + schema_[j].name + "' holds a value other than 0/1");
            }
        }
    }
}

std::optional<double> Cohort::cell(std::size_t row, std::size_t col) const {
    if (is_missing(row, col)) {
        return std::nullopt;
    }
    return value(row, col);
}

std::size_t Cohort::missing_cells() const {
    return static_cast<std::size_t>(std::count(missing_.begin(), missing_.end(), std::uint8_t{1}));
}

std::size_t Cohort::missing_in_column(std::size_t col) const {
    std::size_t count = 0;
    for (std::size_t i = 0; i < rows(); ++i) {
        count += is_missing(i, col) ? 1 : 0;
    }
    return count;
}

std::vector<double> Cohort::observed_column(std::size_t col) const {
    std::vector<double> out;
    out.reserve(rows());
    for (std::size_t i = 0; i < rows(); ++i) {
        if (!is_missing(i, col)) {
            out.push_back(value(i, col));
        }
    }
    return out;
}

std::vector<int> Cohort::labels() const {
    std::vector<int> out;
    out.reserve(rows());
    for (std::size_t i = 0; i < rows(); ++i) {
        if (!outcome_[i]) {
            throw DataError("row '" + row_ids_[i] + "' has a missing outcome");
        }
        out.push_back(*outcome_[i]);
    }
    return out;
}

std::size_t Cohort::positives() const {
    return static_cast<std::size_t>(
        std::count_if(outcome_.begin(), outcome_.end(), [](const auto& y) { return y && *y == 1; }));
}

Cohort Cohort::select_rows(std::span<const std::size_t> rows) const {
    const std::size_t p = cols();
    std::vector<double> values;
    std::vector<std::uint8_t> missing;
    std::vector<std::optional<int>> outcome;
    std::vector<std::string> ids;
    values.reserve(rows.size() * p);
    missing.reserve(rows.size() * p);
    outcome.reserve(rows.size());
    ids.reserve(rows.size());
    for (std::size_t r : rows) {
        values.insert(values.end(), values_.begin() + r * p, values_.begin() + (r + 1) * p);
        missing.insert(missing.end(), missing_.begin() + r * p, missing_.begin() + (r + 1) * p);
        outcome.push_back(outcome_.at(r));
        ids.push_back(row_ids_[r]);
    }
    return Cohort(schema_, std::move(values), std::move(missing), std::move(outcome), std::move(ids));
}

Cohort Cohort::select_columns(const std::vector<std::size_t>& cols) const {
    const std::size_t p = this->cols();
    std::vector<double> values;
    std::vector<std::uint8_t> missing;
    values.reserve(rows() * cols.size());
    missing.reserve(rows() * cols.size());
    for (std::size_t i = 0; i < rows(); ++i) {
        for (std::size_t c : cols) {
            values.push_back(values_[i * p + c]);
            missing.push_back(missing_[i * p + c]);
        }
    }
    return Cohort(schema_.select(cols), std::move(values), std::move(missing), outcome_, row_ids_);
}

Cohort Cohort::drop_columns(const std::vector<std::string>& names) const {
    std::set<std::string> drop;
    for (const auto& n : names) {
        schema_.require(n);
        drop.insert(n);
    }
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < cols(); ++j) {
        if (!drop.contains(schema_[j].name)) {
            keep.push_back(j);
        }
    }
    return select_columns(keep);
}

Cohort Cohort::with_cell(std::size_t row, std::size_t col, std::optional<double> v) const {
    auto values = values_;
    auto missing = missing_;
    const std::size_t k = row * cols() + col;
    missing.at(k) = v ? 0 : 1;
    values.at(k) = v.value_or(0.0);
    return Cohort(schema_, std::move(values), std::move(missing), outcome_, row_ids_);
}

void require_same_features(const Cohort& a, const Cohort& b) {
    if (a.schema().names() != b.schema().names()) {
        throw SchemaError("cohorts carry different feature columns");
    }
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_number(std::string_view text) {
    text = trim(text);
    if (text.empty()) {
        return std::nullopt;
    }
    if (text.front() == '+') {
        text.remove_prefix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

Cohort read_csv(std::istream& in, const Schema& schema, std::string_view source) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(std::string(source) + ": missing header row");
    }
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
        line.erase(0, 3);  // UTF-8 BOM
    }
    const auto header = split_csv_line(line);
    auto find_column = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t k = 0; k < header.size(); ++k) {
            if (trim(header[k]) == name) return k;
        }
        return std::nullopt;
    };

    const std::size_t p = schema.size();
    std::vector<std::size_t> source_col(p);
    for (std::size_t j = 0; j < p; ++j) {
        auto k = find_column(schema[j].name);
        if (!k) {
            throw SchemaError(std::string(source) + ": required column '" + schema[j].name + "' not found");
        }
        source_col[j] = *k;
    }
    const auto outcome_col = find_column("outcome");
    if (!outcome_col) {
        throw SchemaError(std::string(source) + ": required column 'outcome' not found");
    }
    const auto id_col = find_column("row_id");

    std::vector<double> values;
    std::vector<std::uint8_t> missing;
    std::vector<std::optional<int>> outcome;
    std::vector<std::string> ids;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        auto field = [&](std::size_t k) -> std::string_view {
            return k < fields.size() ? std::string_view(fields[k]) : std::string_view{};
        };
        const std::size_t data_row = outcome.size() + 1;
        for (std::size_t j = 0; j < p; ++j) {
            const auto text = field(source_col[j]);
            auto v = parse_number(text);
            if (schema[j].kind == FeatureKind::binary && !trim(text).empty() &&
                (!v || (*v != 0.0 && *v != 1.0))) {
                throw ParseError(std::string(source) + ": row " + std::to_string(data_row) + ", column '" +
                                 schema[j].name + "': binary value must be 0 or 1, got '" +
                                 std::string(trim(text)) + "'");
            }
            values.push_back(v.value_or(0.0));
            missing.push_back(v ? 0 : 1);
        }
        const auto y_text = field(*outcome_col);
        const auto y = parse_number(y_text);
        if (!trim(y_text).empty() && (!y || (*y != 0.0 && *y != 1.0))) {
            throw ParseError(std::string(source) + ": row " + std::to_string(data_row) +
                             ", column 'outcome': value must be 0, 1 or empty");
        }
        outcome.push_back(y ? std::optional<int>(static_cast<int>(*y)) : std::nullopt);
        if (id_col && !trim(field(*id_col)).empty()) {
            ids.emplace_back(trim(field(*id_col)));
        } else {
            ids.push_back("row" + std::to_string(data_row));
        }
    }
    return Cohort(schema, std::move(values), std::move(missing), std::move(outcome), std::move(ids));
}

Cohort load_csv(const std::filesystem::path& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return read_csv(in, schema, path.string());
}

void write_csv(const Cohort& cohort, std::ostream& out) {
    out << "row_id";
    for (const auto& f : cohort.schema().features()) {
        out << ',' << quote_if_needed(f.name);
    }
    out << ",outcome\n";
    for (std::size_t i = 0; i < cohort.rows(); ++i) {
        out << quote_if_needed(cohort.row_id(i));
        for (std::size_t j = 0; j < cohort.cols(); ++j) {
            out << ',';
            if (!cohort.is_missing(i, j)) {
                out << format_number(cohort.value(i, j));
            }
        }
        out << ',';
        if (auto y = cohort.outcome(i)) {
            out << *y;
        }
        out << '\n';
    }
}

void save_csv(const Cohort& cohort, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    write_csv(cohort, out);
}

// ---------------------------------------------------------------------------
// Splitting

CohortSplit split(const Cohort& cohort, double test_fraction, bool stratified, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("test_fraction must lie strictly between 0 and 1");
    }
    Rng rng(seed);
    std::vector<std::uint8_t> is_test(cohort.rows(), 0);
    auto take = [&](std::vector<std::size_t> group) {
        rng.shuffle(std::span<std::size_t>(group));
        const auto k = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(group.size())));
        for (std::size_t i = 0; i < k; ++i) {
            is_test[group[i]] = 1;
        }
    };
    if (stratified) {
        std::vector<std::size_t> negatives;
        std::vector<std::size_t> positives;
        for (std::size_t i = 0; i < cohort.rows(); ++i) {
            const auto y = cohort.outcome(i);
            if (!y) {
                throw DataError("stratified split requires every outcome to be present");
            }
            (*y == 1 ? positives : negatives).push_back(i);
        }
        if (positives.empty() || negatives.empty()) {
            throw ClassError("stratified split needs both outcome classes");
        }
        take(std::move(negatives));
        take(std::move(positives));
    } else {
        std::vector<std::size_t> all(cohort.rows());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        take(std::move(all));
    }
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (std::size_t i = 0; i < cohort.rows(); ++i) {
        (is_test[i] ? test_rows : train_rows).push_back(i);
    }
    return {cohort.select_rows(train_rows), cohort.select_rows(test_rows)};
}

}  // namespace hfrisk
