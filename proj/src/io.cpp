#include "pstrat/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace pstrat {

int CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return static_cast<int>(k);
  }
  return -1;
}

CsvTable read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, field_started = false;
  char ch;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  while (in.get(ch)) {
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\r') {
      if (in.peek() == '\n') in.get(ch);
      end_record();
    } else if (ch == '\n') {
      end_record();
    } else {
      field += ch;
      field_started = true;
    }
  }
  if (quoted) throw DataError("csv: unterminated quoted field");
  if (field_started || !record.empty()) end_record();

  CsvTable table;
  if (records.empty()) throw DataError("csv: missing header row");
  table.header = std::move(records.front());
  if (!table.header.empty() && table.header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
    table.header[0].erase(0, 3);
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw DataError("csv: row " + std::to_string(r - 1) + " has " + std::to_string(records[r].size()) +
                      " fields, header has " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_csv(in);
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) out << ',';
    const auto& c = cells[k];
    if (c.find_first_of(",\"\r\n") != std::string::npos) {
      out << '"';
      for (char ch : c) {
        if (ch == '"') out << '"';
        out << ch;
      }
      out << '"';
    } else {
      out << c;
    }
  }
  out << "\r\n";
}

namespace {

double parse_number(const std::string& cell, std::size_t row, const std::string& col) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto res = std::from_chars(begin, end, v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != end) {
    throw DataError("row " + std::to_string(row) + ": column '" + col + "' is not a number: '" + cell + "'");
  }
  return v;
}

} // namespace

Dataset dataset_from_csv(const CsvTable& table) {
  for (const char* required : {"id", "t", "p", "y"}) {
    if (table.column(required) < 0) throw DataError(std::string("missing column '") + required + "'");
  }
  const int c_id = table.column("id"), c_t = table.column("t"), c_p = table.column("p"),
            c_y = table.column("y");
  std::vector<int> covariate_cols;
  Dataset d;
  for (std::size_t k = 0; k < table.header.size(); ++k) {
    const int ki = static_cast<int>(k);
    if (ki == c_id || ki == c_t || ki == c_p || ki == c_y) continue;
    covariate_cols.push_back(ki);
    d.covariate_names.push_back(table.header[k]);
  }
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto q = static_cast<Eigen::Index>(covariate_cols.size());
  d.X.resize(n, q);
  d.T.resize(n);
  d.P.resize(n);
  d.Y.resize(n);
  d.ids.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    const auto r = static_cast<std::size_t>(i);
    d.ids[i] = row[c_id];
    const double t = parse_number(row[c_t], r, "t");
    if (t != 0.0 && t != 1.0) throw DataError("row " + std::to_string(r) + ": treatment must be 0 or 1");
    d.T[i] = static_cast<int>(t);
    d.P[i] = parse_number(row[c_p], r, "p");
    d.Y[i] = parse_number(row[c_y], r, "y");
    for (Eigen::Index j = 0; j < q; ++j) {
      d.X(i, j) = parse_number(row[covariate_cols[j]], r, d.covariate_names[j]);
    }
  }
  return d;
}

Dataset read_dataset(const std::filesystem::path& path) {
  return dataset_from_csv(read_csv_file(path));
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  std::vector<std::string> header{"id", "t", "p", "y"};
  for (Eigen::Index j = 0; j < data.q(); ++j) {
    header.push_back(j < static_cast<Eigen::Index>(data.covariate_names.size())
                         ? data.covariate_names[j]
                         : "x" + std::to_string(j + 1));
  }
  write_csv_row(out, header);
  std::vector<std::string> row;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    row.clear();
    row.push_back(i < static_cast<Eigen::Index>(data.ids.size()) ? data.ids[i] : std::to_string(i + 1));
    row.push_back(std::to_string(data.T[i]));
    row.push_back(format_number(data.P[i]));
    row.push_back(format_number(data.Y[i]));
    for (Eigen::Index j = 0; j < data.q(); ++j) row.push_back(format_number(data.X(i, j)));
    write_csv_row(out, row);
  }
}

std::vector<std::string> draw_columns(const PosteriorDraws& draws) {
  std::vector<std::string> cols{"iteration", "eae_plus", "eae_minus", "ede", "ate_p", "ate_y",
                                "n_negative", "n_dissociative", "n_positive", "occupied_0", "occupied_1"};
  if (draws.params.empty()) return cols;
  const auto& p = draws.params.front();
  for (int arm = 0; arm < 2; ++arm) {
    const std::string a = std::to_string(arm);
    for (Eigen::Index j = 0; j < p.post.beta[arm].size(); ++j) cols.push_back("beta" + a + "_" + std::to_string(j));
    cols.push_back("sigma2_p" + a);
  }
  for (int arm = 0; arm < 2; ++arm) {
    const std::string a = std::to_string(arm);
    for (int m = 0; m < p.mix.M(); ++m) {
      const std::string mm = std::to_string(m + 1);
      for (Eigen::Index j = 0; j < p.mix.eta[arm][m].size(); ++j) {
        cols.push_back("eta" + a + "_" + mm + "_" + std::to_string(j));
      }
      cols.push_back("sigma2_y" + a + "_" + mm);
    }
    for (int m = 0; m + 1 < p.mix.M(); ++m) {
      const std::string mm = std::to_string(m + 1);
      for (Eigen::Index j = 0; j < p.mix.eps[arm][m].size(); ++j) {
        cols.push_back("eps" + a + "_" + mm + "_" + std::to_string(j));
      }
    }
  }
  return cols;
}

std::vector<double> draw_row(const PosteriorDraws& draws, std::size_t d, const Standardization& s) {
  const double na = std::nan("");
  const auto& e = draws.effects[d];
  const auto& occ = draws.occupancy[d];
  auto occupied = [&](int arm) {
    int c = 0;
    for (int v : occ[arm]) c += v > 0;
    return static_cast<double>(c);
  };
  std::vector<double> row{static_cast<double>(draws.iteration[d]),
                          e.eae_plus.value_or(na),
                          e.eae_minus.value_or(na),
                          e.ede.value_or(na),
                          e.ate_p,
                          e.ate_y,
                          static_cast<double>(e.counts[0]),
                          static_cast<double>(e.counts[1]),
                          static_cast<double>(e.counts[2]),
                          occupied(0),
                          occupied(1)};
  if (draws.params.empty()) return row;
  const auto& p = draws.params[d];
  auto push = [&](const Eigen::VectorXd& v) { row.insert(row.end(), v.data(), v.data() + v.size()); };
  for (int arm = 0; arm < 2; ++arm) {
    push(s.to_original_scale(p.post.beta[arm]));
    row.push_back(p.post.sigma2[arm]);
  }
  for (int arm = 0; arm < 2; ++arm) {
    for (int m = 0; m < p.mix.M(); ++m) {
      push(s.to_original_scale(p.mix.eta[arm][m]));
      row.push_back(p.mix.sigma2_y[arm][m]);
    }
    for (int m = 0; m + 1 < p.mix.M(); ++m) push(s.to_original_scale(p.mix.eps[arm][m]));
  }
  return row;
}

void write_draws_csv(std::ostream& out, const PosteriorDraws& draws, const Standardization& s) {
  write_csv_row(out, draw_columns(draws));
  std::vector<std::string> cells;
  for (std::size_t d = 0; d < draws.size(); ++d) {
    cells.clear();
    for (double v : draw_row(draws, d, s)) cells.push_back(format_number(v));
    write_csv_row(out, cells);
  }
}

namespace {

static_assert(std::endian::native == std::endian::little, "binary draws assume a little-endian host");

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw DataError("binary draws: truncated file");
  return v;
}

constexpr char kMagic[8] = {'P', 'S', 'D', 'R', 'A', 'W', 'S', '1'};

} // namespace

void write_draws_binary(std::ostream& out, const PosteriorDraws& draws, const Standardization& s) {
  const auto cols = draw_columns(draws);
  out.write(kMagic, sizeof kMagic);
  put<std::uint64_t>(out, draws.size());
  put<std::uint64_t>(out, cols.size());
  for (const auto& c : cols) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.size()));
    out.write(c.data(), static_cast<std::streamsize>(c.size()));
  }
  for (std::size_t d = 0; d < draws.size(); ++d) {
    for (double v : draw_row(draws, d, s)) put<double>(out, v);
  }
}

DrawTable read_draws_binary(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw DataError("binary draws: bad magic");
  }
  DrawTable t;
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  for (std::uint64_t c = 0; c < cols; ++c) {
    const auto len = get<std::uint32_t>(in);
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw DataError("binary draws: truncated header");
    t.columns.push_back(std::move(name));
  }
  t.rows.assign(rows, std::vector<double>(cols));
  for (auto& r : t.rows) {
    for (auto& v : r) v = get<double>(in);
  }
  return t;
}

void write_strata_csv(std::ostream& out, const PosteriorSummary& summary,
                      const std::vector<std::string>& ids) {
  write_csv_row(out, {"id", "modal_stratum", "freq_negative", "freq_dissociative", "freq_positive"});
  for (std::size_t i = 0; i < summary.modal.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    write_csv_row(out, {i < ids.size() ? ids[i] : std::to_string(i + 1), stratum_name(summary.modal[i]),
                        format_number(summary.label_freq(r, 0)), format_number(summary.label_freq(r, 1)),
                        format_number(summary.label_freq(r, 2))});
  }
}

} // namespace pstrat
