#pragma once

#include "hybridfpca/fofreg.hpp"
#include "hybridfpca/hpca.hpp"
#include "hybridfpca/selection.hpp"
#include "hybridfpca/tensorcore.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace hybridfpca {

/// Shortest-roundtrip-safe text form ("%.17g").
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; InvalidData if missing.
    [[nodiscard]] std::size_t column(const std::string& name) const;
};

/// Reads a comma-delimited file with a mandatory header. Io if the file
/// cannot be opened, InvalidData on ragged rows.
CsvTable read_csv(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Parses JSON; syntax errors raise InvalidConfig naming `source`, line
/// and column.
nlohmann::json parse_json(const std::string& text, const std::string& source);
nlohmann::json read_json(const std::filesystem::path& path);

/// Tensor with the labels it was read with.
struct LabeledTensor {
    HybridTensor tensor;
    std::vector<std::string> subjects;
    std::vector<std::string> regions;
};

/// Long-form `subject,region,omega,s,value`. Grids are the distinct sorted
/// omega and s values; a (subject, omega) pair with no rows is unobserved.
/// Partial slices and duplicate rows raise InvalidData.
LabeledTensor read_tensor_csv(const std::filesystem::path& path);
std::string format_tensor_csv(const HybridTensor& tensor, const std::vector<std::string>& subjects = {},
                              const std::vector<std::string>& regions = {});
void write_tensor_csv(const std::filesystem::path& path, const HybridTensor& tensor,
                      const std::vector<std::string>& subjects = {}, const std::vector<std::string>& regions = {});

struct LabeledSample {
    FunctionalSample sample;
    std::vector<std::string> subjects;
};

/// `subject,s,value`; every subject must cover the full grid.
LabeledSample read_sample_csv(const std::filesystem::path& path);
std::string format_sample_csv(const FunctionalSample& sample, const std::vector<std::string>& subjects = {});
void write_sample_csv(const std::filesystem::path& path, const FunctionalSample& sample,
                      const std::vector<std::string>& subjects = {});

/// Reorders `sample` to the subject order of `subjects`; Shape error naming
/// the offending label when the sets differ.
FunctionalSample align_subjects(const LabeledSample& sample, const std::vector<std::string>& subjects,
                                const std::string& what);

/// Plain numeric matrix with a header row.
void write_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path, std::vector<std::string>* header = nullptr);

constexpr int kFormatVersion = 1;

void write_hpca_model(const std::filesystem::path& dir, const HpcaModel& model);
HpcaModel read_hpca_model(const std::filesystem::path& dir);

void write_fof_model(const std::filesystem::path& dir, const FofModel& model);
FofModel read_fof_model(const std::filesystem::path& dir);

/// `q,mspe_train,mspe_test,seconds`.
std::string format_selection_csv(const std::vector<double>& mspe_train, const std::vector<double>& mspe_test,
                                 const std::vector<double>& seconds);
/// Aggregated CSV, one CSV per resplit and summary.json under `dir`.
void write_resplit_summary(const std::filesystem::path& dir, const ResplitSummary& summary);

}  // namespace hybridfpca
