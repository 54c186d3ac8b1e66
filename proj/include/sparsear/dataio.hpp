#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sparsear/ar_model.hpp"

namespace sparsear {

// One preprocessing step; `param` is the difference order, downsample factor
// or block width where applicable.
struct PipelineStep {
    enum class Kind { difference, log_transform, downsample, block_average, center };
    Kind kind = Kind::center;
    std::size_t param = 1;
};

struct PipelineSpec {
    std::vector<PipelineStep> steps;
};

// Named recipes from the real-data experiments. The block width for the
// traffic recipe depends on the raw sampling rate, so it stays a parameter.
PipelineSpec oil_preset();
PipelineSpec traffic_preset(std::size_t block_width);

struct SplitSpec {
    enum class Mode { halves, even_odd };
    Mode mode = Mode::halves;
    double fit_fraction = 0.5;  // halves only
};

// Column selected either by 0-based index or by header name.
using ColumnSelector = std::variant<std::size_t, std::string>;

// RFC-4180-style reader (quoted fields, configurable delimiter). Throws
// ParseError naming the offending file row on any unparseable or non-finite
// value; ColumnNotFound / IoError as applicable.
TimeSeries read_csv(const std::string& path, const ColumnSelector& column, bool has_header,
                    char delimiter = ',');

// Single numeric column, %.17g precision (values survive a round trip
// exactly), optional 0-based index column.
void write_csv(const std::string& path, const TimeSeries& series, bool with_index = false,
               const std::string& column_name = "value");

TimeSeries apply_pipeline(const TimeSeries& series, const PipelineSpec& spec);

std::pair<TimeSeries, TimeSeries> split(const TimeSeries& series, const SplitSpec& spec);

}  // namespace sparsear
