#include "sparsear/dataio.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sparsear/errors.hpp"

namespace sparsear {

namespace {

// Whole-file CSV tokenizer: quoted fields may contain delimiters, escaped
// quotes ("") and newlines. Rows are returned with their 1-based file row.
struct CsvRow {
    std::size_t file_row;
    std::vector<std::string> fields;
};

std::vector<CsvRow> tokenize_csv(const std::string& text, char delimiter) {
    std::vector<CsvRow> rows;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool row_started = false;
    std::size_t line = 1;
    std::size_t row_line = 1;

    auto end_field = [&]() {
        fields.push_back(field);
        field.clear();
    };
    auto end_row = [&]() {
        end_field();
        rows.push_back({row_line, std::move(fields)});
        fields = {};
        row_started = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (!row_started) {
            row_started = true;
            row_line = line;
        }
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
            continue;
        }
        if (ch == '"') {
            in_quotes = true;
        } else if (ch == delimiter) {
            end_field();
        } else if (ch == '\n') {
            ++line;
            end_row();
        } else if (ch != '\r') {
            field.push_back(ch);
        }
    }
    if (in_quotes) throw ParseError(row_line, "unterminated quoted field");
    if (row_started || !field.empty() || !fields.empty()) end_row();

    // Drop rows that are entirely empty (e.g. a trailing newline).
    std::vector<CsvRow> out;
    for (auto& r : rows) {
        const bool empty = r.fields.size() == 1 && r.fields[0].empty();
        if (!empty) out.push_back(std::move(r));
    }
    return out;
}

double parse_value(const std::string& s, std::size_t row) {
    std::string trimmed = s;
    const auto first = trimmed.find_first_not_of(" \t");
    const auto last = trimmed.find_last_not_of(" \t");
    if (first == std::string::npos) throw ParseError(row, "empty value");
    trimmed = trimmed.substr(first, last - first + 1);

    const char* begin = trimmed.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw ParseError(row, "not a number: \"" + s + "\"");
    }
    if (!std::isfinite(v)) throw ParseError(row, "non-finite value: \"" + s + "\"");
    return v;
}

TimeSeries difference_once(const TimeSeries& in) {
    if (in.size() < 2) throw TooShort("difference: need at least 2 samples");
    TimeSeries out;
    out.values.resize(in.size() - 1);
    for (std::size_t i = 0; i + 1 < in.size(); ++i) {
        out.values[i] = in.values[i + 1] - in.values[i];
    }
    return out;
}

}  // namespace

PipelineSpec oil_preset() {
    return PipelineSpec{{PipelineStep{PipelineStep::Kind::difference, 1}}};
}

PipelineSpec traffic_preset(std::size_t block_width) {
    return PipelineSpec{{
        PipelineStep{PipelineStep::Kind::downsample, 4},
        PipelineStep{PipelineStep::Kind::block_average, block_width},
        PipelineStep{PipelineStep::Kind::log_transform, 0},
        PipelineStep{PipelineStep::Kind::center, 0},
    }};
}

TimeSeries read_csv(const std::string& path, const ColumnSelector& column, bool has_header,
                    char delimiter) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << file.rdbuf();
    const std::vector<CsvRow> rows = tokenize_csv(buf.str(), delimiter);
    if (rows.empty()) throw ParseError(1, "empty file");

    std::size_t col = 0;
    std::size_t first_data = 0;
    if (const auto* name = std::get_if<std::string>(&column)) {
        if (!has_header) throw ColumnNotFound("column selected by name but file has no header");
        const auto& header = rows[0].fields;
        bool found = false;
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (header[j] == *name) {
                col = j;
                found = true;
                break;
            }
        }
        if (!found) throw ColumnNotFound("no column named \"" + *name + "\"");
        first_data = 1;
    } else {
        col = std::get<std::size_t>(column);
        first_data = has_header ? 1 : 0;
    }

    TimeSeries out;
    out.values.reserve(rows.size() - first_data);
    for (std::size_t i = first_data; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (col >= r.fields.size()) {
            throw ParseError(r.file_row, "row has only " + std::to_string(r.fields.size()) +
                                             " field(s), column " + std::to_string(col) +
                                             " requested");
        }
        out.values.push_back(parse_value(r.fields[col], r.file_row));
    }
    if (out.values.empty()) throw ParseError(rows.back().file_row, "no data rows");
    return out;
}

void write_csv(const std::string& path, const TimeSeries& series, bool with_index,
               const std::string& column_name) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open file for writing: " + path);
    if (with_index) {
        file << "index," << column_name << "\n";
    } else {
        file << column_name << "\n";
    }
    char buf[64];
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", series.values[i]);
        if (with_index) file << i << ',';
        file << buf << "\n";
    }
    if (!file) throw IoError("write failed: " + path);
}

TimeSeries apply_pipeline(const TimeSeries& series, const PipelineSpec& spec) {
    validate_finite(series);
    TimeSeries cur = series;
    for (const auto& step : spec.steps) {
        switch (step.kind) {
            case PipelineStep::Kind::difference: {
                if (step.param != 1 && step.param != 2) {
                    throw InvalidConfig("difference order must be 1 or 2");
                }
                for (std::size_t d = 0; d < step.param; ++d) cur = difference_once(cur);
                break;
            }
            case PipelineStep::Kind::log_transform: {
                for (double& v : cur.values) {
                    if (!(v > 0.0)) {
                        throw NonPositiveForLog("log step requires strictly positive inputs");
                    }
                    v = std::log(v);
                }
                break;
            }
            case PipelineStep::Kind::downsample: {
                if (step.param < 1) throw InvalidConfig("downsample factor must be >= 1");
                if (cur.values.empty()) throw TooShort("downsample: empty series");
                TimeSeries next;
                for (std::size_t i = 0; i < cur.values.size(); i += step.param) {
                    next.values.push_back(cur.values[i]);
                }
                cur = std::move(next);
                break;
            }
            case PipelineStep::Kind::block_average: {
                const std::size_t w = step.param;
                if (w < 1) throw InvalidConfig("block width must be >= 1");
                if (cur.values.size() < w) throw TooShort("block_average: fewer samples than width");
                TimeSeries next;
                const std::size_t blocks = cur.values.size() / w;
                next.values.resize(blocks);
                for (std::size_t b = 0; b < blocks; ++b) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < w; ++i) acc += cur.values[b * w + i];
                    next.values[b] = acc / static_cast<double>(w);
                }
                cur = std::move(next);
                break;
            }
            case PipelineStep::Kind::center: {
                if (cur.values.empty()) throw TooShort("center: empty series");
                double mean = 0.0;
                for (double v : cur.values) mean += v;
                mean /= static_cast<double>(cur.values.size());
                for (double& v : cur.values) v -= mean;
                break;
            }
        }
    }
    return cur;
}

std::pair<TimeSeries, TimeSeries> split(const TimeSeries& series, const SplitSpec& spec) {
    const std::size_t m = series.values.size();
    if (m < 4) throw TooShort("split: need at least 4 samples");
    TimeSeries fit, test;
    if (spec.mode == SplitSpec::Mode::halves) {
        if (!(spec.fit_fraction > 0.0 && spec.fit_fraction < 1.0)) {
            throw InvalidConfig("fit_fraction must be in (0, 1)");
        }
        std::size_t cut = static_cast<std::size_t>(
            std::llround(spec.fit_fraction * static_cast<double>(m)));
        cut = std::min(std::max<std::size_t>(cut, 1), m - 1);
        fit.values.assign(series.values.begin(), series.values.begin() + static_cast<long>(cut));
        test.values.assign(series.values.begin() + static_cast<long>(cut), series.values.end());
    } else {
        for (std::size_t i = 0; i < m; ++i) {
            (i % 2 == 0 ? fit : test).values.push_back(series.values[i]);
        }
    }
    return {fit, test};
}

}  // namespace sparsear
