#include "pmtc/io.hpp"

#include "pmtc/errors.hpp"
#include "pmtc/metrics.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

namespace pmtc {

namespace {

constexpr char kMagic[4] = {'P', 'M', 'T', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &v, sizeof(T));
        std::reverse(bytes, bytes + sizeof(T));
        std::memcpy(&v, bytes, sizeof(T));
        return v;
    }
}

template <typename T>
void put(std::ostream& out, T v) {
    v = to_little(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
    T v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError(path.string() + ": truncated tensor file");
    return to_little(v);
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write to " + path.string() + " failed");
}

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto end = line.find(',', start);
        auto field = line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
            field.remove_suffix(1);
        }
        fields.emplace_back(field);
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return fields;
}

bool is_number(std::string_view s) {
    try {
        parse_double(s);
        return true;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

std::string join(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += fields[i];
    }
    return line;
}

int parse_int(std::string_view s, const std::filesystem::path& path) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw IoError(path.string() + ": expected an integer, got '" + std::string(s) + "'");
    }
    return v;
}

double cell(const std::string& s, const std::filesystem::path& path) {
    try {
        return parse_double(s);
    } catch (const std::invalid_argument&) {
        throw IoError(path.string() + ": expected a number, got '" + s + "'");
    }
}

std::vector<std::string> factor_header(std::vector<std::string> head, Eigen::Index m) {
    for (Eigen::Index k = 0; k < m; ++k) head.push_back("f" + std::to_string(k + 1));
    return head;
}

}  // namespace

void write_tensor(const std::filesystem::path& path, const DenseTensor& x) {
    auto out = open_out(path, std::ios::binary);
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(x.order()));
    for (auto d : x.dims()) put<std::uint64_t>(out, d);
    for (double v : x.data()) put<double>(out, v);
    finish(out, path);
}

DenseTensor read_tensor(const std::filesystem::path& path) {
    auto in = open_in(path, std::ios::binary);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw IoError(path.string() + ": not a PMTC tensor file");
    }
    const auto version = get<std::uint32_t>(in, path);
    if (version != kVersion) throw IoError(path.string() + ": unsupported version " + std::to_string(version));
    const auto order = get<std::uint32_t>(in, path);
    std::vector<std::size_t> dims(order);
    for (auto& d : dims) d = static_cast<std::size_t>(get<std::uint64_t>(in, path));
    std::vector<double> data(product(dims));
    for (auto& v : data) v = get<double>(in, path);
    if (in.peek() != std::char_traits<char>::eof()) throw IoError(path.string() + ": trailing bytes after tensor data");
    return DenseTensor(std::move(dims), std::move(data));
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    if (text == "inf" || text == "+inf" || text == "Inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf" || text == "-Inf") return -std::numeric_limits<double>::infinity();
    if (text == "nan" || text == "NaN" || text == "NA") return std::numeric_limits<double>::quiet_NaN();
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    }
    return v;
}

CsvTable read_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split(line);
        if (first && std::any_of(fields.begin(), fields.end(), [](const auto& f) { return !is_number(f); })) {
            table.header = std::move(fields);
        } else {
            table.rows.push_back(std::move(fields));
        }
        first = false;
    }
    if (in.bad()) throw IoError("read from " + path.string() + " failed");
    return table;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    auto out = open_out(path);
    if (!table.header.empty()) out << join(table.header) << '\n';
    for (const auto& row : table.rows) out << join(row) << '\n';
    finish(out, path);
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    const auto table = read_csv(path);
    if (table.rows.empty()) return Matrix(0, static_cast<Eigen::Index>(table.header.size()));
    const auto cols = table.rows.front().size();
    Matrix m(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (table.rows[i].size() != cols) {
            throw IoError(path.string() + ": row " + std::to_string(i + 1) + " has " +
                          std::to_string(table.rows[i].size()) + " fields, expected " + std::to_string(cols));
        }
        for (std::size_t j = 0; j < cols; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cell(table.rows[i][j], path);
        }
    }
    return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& header) {
    if (!header.empty() && static_cast<Eigen::Index>(header.size()) != m.cols()) {
        throw ShapeError("header has " + std::to_string(header.size()) + " names for " + std::to_string(m.cols()) +
                         " columns");
    }
    CsvTable table{header, {}};
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<std::string> row;
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(format_double(m(i, j)));
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
}

void write_membership_csv(const std::filesystem::path& path, const Membership& m) {
    CsvTable table{{"id", "cluster"}, {}};
    for (std::size_t j = 0; j < m.size(); ++j) table.rows.push_back({std::to_string(j + 1), std::to_string(m[j] + 1)});
    write_csv(path, table);
}

Membership read_membership_csv(const std::filesystem::path& path, std::optional<int> num_clusters) {
    const auto table = read_csv(path);
    std::size_t id_col = 0, cluster_col = 1;
    if (!table.header.empty()) {
        const auto find = [&](const char* name) {
            const auto it = std::find(table.header.begin(), table.header.end(), name);
            if (it == table.header.end()) throw IoError(path.string() + ": missing column '" + name + "'");
            return static_cast<std::size_t>(it - table.header.begin());
        };
        id_col = find("id");
        cluster_col = find("cluster");
    }
    std::vector<int> labels(table.rows.size(), -1);
    int max_label = 0;
    for (const auto& row : table.rows) {
        if (row.size() <= std::max(id_col, cluster_col)) throw IoError(path.string() + ": short membership row");
        const int id = parse_int(row[id_col], path);
        const int c = parse_int(row[cluster_col], path);
        if (id < 1 || id > static_cast<int>(labels.size()) || labels[id - 1] != -1) {
            throw IoError(path.string() + ": ids must be a permutation of 1.." + std::to_string(labels.size()));
        }
        if (c < 1) throw IoError(path.string() + ": cluster labels are 1-based");
        labels[id - 1] = c - 1;
        max_label = std::max(max_label, c);
    }
    const int r = num_clusters.value_or(max_label);
    try {
        return Membership(std::move(labels), r);
    } catch (const std::invalid_argument& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_loadings_csv(const std::filesystem::path& path, const Matrix& loadings) {
    CsvTable table{factor_header({"cluster"}, loadings.cols()), {}};
    for (Eigen::Index a = 0; a < loadings.rows(); ++a) {
        std::vector<std::string> row{std::to_string(a + 1)};
        for (Eigen::Index k = 0; k < loadings.cols(); ++k) row.push_back(format_double(loadings(a, k)));
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
}

Matrix read_loadings_csv(const std::filesystem::path& path) {
    const Matrix raw = read_matrix_csv(path);
    if (raw.cols() < 2) throw IoError(path.string() + ": loadings need a cluster column and at least one factor");
    Matrix b(raw.rows(), raw.cols() - 1);
    std::vector<bool> seen(static_cast<std::size_t>(raw.rows()), false);
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
        const double c = raw(i, 0);
        const auto a = static_cast<Eigen::Index>(c) - 1;
        if (c != std::floor(c) || a < 0 || a >= raw.rows() || seen[static_cast<std::size_t>(a)]) {
            throw IoError(path.string() + ": cluster column must list 1.." + std::to_string(raw.rows()));
        }
        seen[static_cast<std::size_t>(a)] = true;
        b.row(a) = raw.row(i).tail(raw.cols() - 1);
    }
    return b;
}

void write_asset_loadings_csv(const std::filesystem::path& path, const Matrix& loadings, const Membership& m) {
    if (static_cast<std::size_t>(loadings.rows()) != m.size()) throw ShapeError("one loading row per entity expected");
    CsvTable table{factor_header({"id", "cluster"}, loadings.cols()), {}};
    for (Eigen::Index j = 0; j < loadings.rows(); ++j) {
        std::vector<std::string> row{std::to_string(j + 1), std::to_string(m[static_cast<std::size_t>(j)] + 1)};
        for (Eigen::Index k = 0; k < loadings.cols(); ++k) row.push_back(format_double(loadings(j, k)));
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
}

void write_trace_csv(const std::filesystem::path& path, const LloydTrace& trace, const std::vector<Membership>* truth) {
    CsvTable table;
    table.header = truth ? std::vector<std::string>{"iteration", "mode", "cer_vs_truth", "loss"}
                         : std::vector<std::string>{"iteration", "mode", "loss"};
    for (std::size_t k = 0; k < trace.steps.size(); ++k) {
        const auto& step = trace.steps[k];
        for (std::size_t i = 0; i < step.memberships.size(); ++i) {
            std::vector<std::string> row{std::to_string(k), std::to_string(i + 1)};
            if (truth) row.push_back(format_double(cer(step.memberships[i], truth->at(i)).rate));
            row.push_back(format_double(step.loss));
            table.rows.push_back(std::move(row));
        }
    }
    write_csv(path, table);
}

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
    auto out = open_out(path);
    out << "experiment_id,method,replication,mode,metric,value\n";
    for (const auto& r : rows) {
        out << r.experiment_id << ',' << r.method << ',' << r.replication << ',' << r.mode << ',' << r.metric << ','
            << format_double(r.value) << '\n';
    }
    finish(out, path);
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
    const auto table = read_csv(path);
    const std::vector<std::string> expected{"experiment_id", "method", "replication", "mode", "metric", "value"};
    if (table.header != expected) throw IoError(path.string() + ": not a results file");
    std::vector<ResultRow> rows;
    for (const auto& f : table.rows) {
        if (f.size() != 6) throw IoError(path.string() + ": results rows have 6 fields");
        rows.push_back({f[0], f[1], parse_int(f[2], path), parse_int(f[3], path), f[4], cell(f[5], path)});
    }
    return rows;
}

void write_panel_csv(const std::filesystem::path& path, const PanelTable& table, const std::string& x_name) {
    CsvTable csv;
    csv.header.push_back(x_name);
    csv.header.insert(csv.header.end(), table.methods.begin(), table.methods.end());
    for (std::size_t p = 0; p < table.x.size(); ++p) {
        std::vector<std::string> row{format_double(table.x[p])};
        for (const auto& v : table.means[p]) row.push_back(v ? format_double(*v) : "");
        csv.rows.push_back(std::move(row));
    }
    write_csv(path, csv);
}

std::vector<std::string> read_labels(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::vector<std::string> labels;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        auto fields = split(line);
        if (fields.size() == 1 && fields[0].empty()) continue;
        // The last field holds the label, so "t,year" files work too.
        if (first && (fields.back() == "date" || fields.back() == "year" || fields.back() == "period")) {
            first = false;
            continue;
        }
        first = false;
        labels.push_back(fields.back());
    }
    return labels;
}

}  // namespace pmtc
