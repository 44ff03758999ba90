#pragma once

#include "pstrat/data_model.hpp"
#include "pstrat/estimands.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace pstrat {

/// RFC-4180 table: header row plus string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position, or -1.
  int column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

/// Dataset from a table with columns id,t,p,y followed by covariates.
/// Columns other than id/t/p/y are covariates, in file order. Throws
/// DataError naming the missing column or the bad cell.
Dataset dataset_from_csv(const CsvTable& table);
Dataset read_dataset(const std::filesystem::path& path);
void write_dataset_csv(std::ostream& out, const Dataset& data);

/// Column names of the per-draw table.
std::vector<std::string> draw_columns(const PosteriorDraws& draws);
std::vector<double> draw_row(const PosteriorDraws& draws, std::size_t d, const Standardization& s);

/// One row per kept draw. Parameter columns appear when draws.params is
/// non-empty; coefficients are reported on the original covariate scale.
void write_draws_csv(std::ostream& out, const PosteriorDraws& draws, const Standardization& s);

/// Binary layout (little-endian):
///   "PSDRAWS1" | u64 rows | u64 cols | cols x (u32 length, bytes) | rows x cols f64
void write_draws_binary(std::ostream& out, const PosteriorDraws& draws, const Standardization& s);

struct DrawTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
DrawTable read_draws_binary(std::istream& in);

/// Per-unit modal stratum and posterior label frequencies.
void write_strata_csv(std::ostream& out, const PosteriorSummary& summary,
                      const std::vector<std::string>& ids);

} // namespace pstrat
