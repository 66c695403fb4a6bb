#pragma once

#include "pmtc/experiment.hpp"
#include "pmtc/membership.hpp"
#include "pmtc/pmtlloyd.hpp"
#include "pmtc/tensor.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmtc {

// A file that cannot be opened, read, written or parsed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Binary layout: "PMTC", u32 version (1), u32 order, u64 dims[order], then
// the entries as little-endian f64 in storage order (first index fastest).
void write_tensor(const std::filesystem::path& path, const DenseTensor& x);
DenseTensor read_tensor(const std::filesystem::path& path);

// Shortest text that parses back to the same double; "inf", "-inf", "nan"
// for non-finite values.
std::string format_double(double v);
double parse_double(std::string_view text);

struct CsvTable {
    std::vector<std::string> header;  // empty when the file has none
    std::vector<std::vector<std::string>> rows;
};

// Comma-separated, no quoting.  Blank lines are skipped.
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Row-major numeric matrix.  The first line is taken as a header when any of
// its fields is not a number.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& header = {});

// Columns id, cluster; both 1-based on disk.
void write_membership_csv(const std::filesystem::path& path, const Membership& m);
// num_clusters defaults to the largest label found.
Membership read_membership_csv(const std::filesystem::path& path, std::optional<int> num_clusters = std::nullopt);

// Columns cluster, f1..fm (one row per group).
void write_loadings_csv(const std::filesystem::path& path, const Matrix& loadings);
Matrix read_loadings_csv(const std::filesystem::path& path);
// Columns id, cluster, f1..fm (one row per entity).
void write_asset_loadings_csv(const std::filesystem::path& path, const Matrix& loadings, const Membership& m);

// Columns iteration, mode, [cer_vs_truth,] loss.  The CER column appears
// only when truth is given.
void write_trace_csv(const std::filesystem::path& path, const LloydTrace& trace,
                     const std::vector<Membership>* truth = nullptr);

// Columns experiment_id, method, replication, mode, metric, value.
void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

// Columns <x_name>, one per method; empty cells where a method has no value.
void write_panel_csv(const std::filesystem::path& path, const PanelTable& table, const std::string& x_name);

// One label per line, e.g. calendar years.  A first line reading "date",
// "year" or "period" is a header.  With several fields the last one counts.
std::vector<std::string> read_labels(const std::filesystem::path& path);

}  // namespace pmtc
