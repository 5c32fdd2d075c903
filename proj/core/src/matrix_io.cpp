#include "fdilab/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fdilab {

namespace {

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_real(const std::string& text, const std::string& whole) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        throw InputError("bad complex number '" + whole + "'");
    return v;
}

} // namespace

std::string format_complex(Complex z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw InputError("cannot serialise non-finite value");
    std::string out = format_real(z.real());
    out += std::signbit(z.imag()) ? '-' : '+';
    out += format_real(std::abs(z.imag()));
    out += 'j';
    return out;
}

Complex parse_complex(const std::string& raw) {
    const std::string text = trim(raw);
    if (text.empty()) throw InputError("empty complex number");
    if (text.back() != 'j') return {parse_real(text, raw), 0.0};

    // The split point is the last sign that is neither leading nor an exponent sign.
    std::size_t split_at = std::string::npos;
    for (std::size_t i = text.size() - 1; i > 0; --i) {
        if ((text[i] == '+' || text[i] == '-') && text[i - 1] != 'e' && text[i - 1] != 'E') {
            split_at = i;
            break;
        }
    }
    const std::string body = text.substr(0, text.size() - 1);
    if (split_at == std::string::npos) {
        // pure imaginary
        std::string im = body;
        if (!im.empty() && im[0] == '+') im.erase(0, 1);
        return {0.0, parse_real(im, raw)};
    }
    const std::string re = text.substr(0, split_at);
    std::string im = body.substr(split_at);
    const bool negative = im[0] == '-';
    im.erase(0, 1);
    double im_val = parse_real(im, raw);
    return {parse_real(re[0] == '+' ? re.substr(1) : re, raw), negative ? -im_val : im_val};
}

void write_matrix_csv(std::ostream& out, const ComplexMatrixSeries& series) {
    if (static_cast<Eigen::Index>(series.labels.size()) != series.values.cols())
        throw InputError("label count does not match column count");
    for (std::size_t j = 0; j < series.labels.size(); ++j)
        out << (j ? "," : "") << series.labels[j];
    out << '\n';
    for (Eigen::Index t = 0; t < series.values.rows(); ++t) {
        for (Eigen::Index j = 0; j < series.values.cols(); ++j)
            out << (j ? "," : "") << format_complex(series.values(t, j));
        out << '\n';
    }
}

void write_matrix_csv(const std::filesystem::path& path, const ComplexMatrixSeries& series) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    write_matrix_csv(out, series);
}

ComplexMatrixSeries read_matrix_csv(std::istream& in, const std::string& source) {
    ComplexMatrixSeries series;
    std::string line;
    if (!std::getline(in, line)) throw InputError(source + ": missing header row");
    for (const auto& l : split(line, ',')) series.labels.push_back(trim(l));
    const auto cols = static_cast<Eigen::Index>(series.labels.size());

    std::vector<std::vector<Complex>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split(line, ',');
        if (static_cast<Eigen::Index>(cells.size()) != cols)
            throw InputError(source + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(cols) + " columns, found " + std::to_string(cells.size()));
        std::vector<Complex> row;
        row.reserve(cells.size());
        try {
            for (const auto& c : cells) row.push_back(parse_complex(c));
        } catch (const InputError& e) {
            throw InputError(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
        rows.push_back(std::move(row));
    }
    series.values.resize(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (Eigen::Index j = 0; j < cols; ++j)
            series.values(static_cast<Eigen::Index>(t), j) = rows[t][static_cast<std::size_t>(j)];
    return series;
}

ComplexMatrixSeries read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return read_matrix_csv(in, path.filename().string());
}

std::vector<std::string> state_labels(int p) {
    std::vector<std::string> out;
    for (int b = 1; b <= p; ++b) out.push_back("x" + std::to_string(b));
    return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!text.empty() && text.back() == sep) out.emplace_back();
    return out;
}

std::string trim(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

} // namespace fdilab
