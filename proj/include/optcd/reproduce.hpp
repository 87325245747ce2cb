#pragma once

#include "optcd/calibration.hpp"
#include "optcd/simkit.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace optcd {

// One line of a side-by-side comparison against a reference value.
struct ComparisonRow {
    enum class Check { Value, Assertion, Info };
    std::string item;      // detector and setting
    std::string quantity;  // arl0, garl5, lorden_max, ...
    double reference = 0.0;  // NaN when there is no reference value
    double reproduced = 0.0;
    double se = 0.0;
    double tolerance = 0.0;  // absolute
    Check check = Check::Value;
    bool pass = true;
};

struct PresetReport {
    std::string preset;
    std::vector<ComparisonRow> rows;
    std::vector<RunReport> runs;
    // Optional plottable side output: header and rows.
    std::string figure_name;
    std::vector<std::string> figure_columns;
    std::vector<std::vector<double>> figure;
    double wall_seconds = 0.0;

    int failures() const;
    bool passed() const { return failures() == 0; }
};

struct ReproduceOptions {
    std::optional<std::int64_t> reps;   // default 10^5
    std::optional<std::uint64_t> seed;  // default fixed per preset
    int workers = 0;
    std::function<void(const std::string&)> log;
};

const std::vector<std::string>& preset_names();

// sec41, sec42, table1, table2. Throws InvalidInput for other names.
PresetReport reproduce(const std::string& preset, const ReproduceOptions& options = {});

// Columns: preset,item,quantity,reference,reproduced,stderr,abs_diff,tolerance,pass
void write_comparison_csv(std::ostream& out, const PresetReport& report);
void write_figure_csv(std::ostream& out, const PresetReport& report);

}  // namespace optcd
