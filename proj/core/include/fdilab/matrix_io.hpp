#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "fdilab/types.hpp"

namespace fdilab {

/// Time-by-channel complex matrix with column labels. Row t is time instant t+1.
struct ComplexMatrixSeries {
    CMatrix values;
    std::vector<std::string> labels;
};

/// "1.02-0.15j" with round-trip precision.
std::string format_complex(Complex z);
Complex parse_complex(const std::string& text);

void write_matrix_csv(std::ostream& out, const ComplexMatrixSeries& series);
void write_matrix_csv(const std::filesystem::path& path, const ComplexMatrixSeries& series);
ComplexMatrixSeries read_matrix_csv(std::istream& in, const std::string& source = "<stream>");
ComplexMatrixSeries read_matrix_csv(const std::filesystem::path& path);

/// Labels "x1".."xp" for state matrices.
std::vector<std::string> state_labels(int p);

std::vector<std::string> split(const std::string& text, char sep);
std::string trim(const std::string& text);

} // namespace fdilab
