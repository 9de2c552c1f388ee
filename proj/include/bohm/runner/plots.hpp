#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bohm::runner {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Gnuplot data: a `# config_hash=` line, a `#` column line, then one block
// per series separated by two blank lines (select with `index`).
std::string gnuplot_blocks(const std::vector<Series>& series, const std::string& columns, std::uint64_t hash);

// Plain SVG line plot; the first line is `<!-- config_hash=... -->`.
std::string svg_line_plot(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                          const std::string& ylabel, std::uint64_t hash);

}  // namespace bohm::runner
