#include "drosc/panel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "drosc/errors.hpp"

namespace drosc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw IoError("non-numeric cell at row " + std::to_string(row) + ", column " +
                  std::to_string(col) + ": '" + cell + "'");
  }
  while (pos < cell.size() && (cell[pos] == ' ' || cell[pos] == '\t')) ++pos;
  if (pos != cell.size())
    throw IoError("non-numeric cell at row " + std::to_string(row) + ", column " +
                  std::to_string(col) + ": '" + cell + "'");
  return v;
}

}  // namespace

PanelData make_panel(Vector y, Matrix x, std::size_t t0, std::string treated_name,
                     std::vector<std::string> unit_names, std::vector<std::string> time_labels) {
  PanelData p;
  p.y_treated = std::move(y);
  p.x_controls = std::move(x);
  p.t0 = t0;
  p.treated_name = std::move(treated_name);
  const std::size_t t = p.y_treated.size();
  const std::size_t n = p.x_controls.cols();
  if (t == 0 || p.x_controls.rows() != t)
    throw IoError("panel: row count mismatch between treated series and control matrix");
  if (n < 1) throw IoError("panel: N >= 1 required");
  if (t0 < 1 || t0 > t - 1) throw IoError("t0 out of range");
  for (double v : p.y_treated)
    if (!std::isfinite(v)) throw IoError("panel: non-finite treated outcome");
  for (double v : p.x_controls.data())
    if (!std::isfinite(v)) throw IoError("panel: non-finite control outcome");
  if (unit_names.empty()) {
    for (std::size_t j = 0; j < n; ++j) unit_names.push_back("unit" + std::to_string(j + 1));
  }
  if (unit_names.size() != n) throw IoError("panel: unit name count mismatch");
  if (time_labels.empty()) {
    for (std::size_t r = 0; r < t; ++r) time_labels.push_back(std::to_string(r + 1));
  }
  if (time_labels.size() != t) throw IoError("panel: time label count mismatch");
  p.unit_names = std::move(unit_names);
  p.time_labels = std::move(time_labels);
  return p;
}

PanelData load_panel(const std::string& path, std::size_t t0) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open panel file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty panel file: " + path);
  const auto header = split_csv_line(line);
  if (header.size() < 3)
    throw IoError("header must be time,<treated>,<control-1>,...: " + path);
  const std::size_t n = header.size() - 2;
  std::vector<std::string> time_labels;
  Vector y;
  std::vector<double> xflat;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw IoError("ragged row " + std::to_string(row) + ": expected " +
                    std::to_string(header.size()) + " cells, got " +
                    std::to_string(cells.size()));
    time_labels.push_back(cells[0]);
    y.push_back(parse_cell(cells[1], row, 2));
    for (std::size_t j = 0; j < n; ++j) xflat.push_back(parse_cell(cells[2 + j], row, 3 + j));
  }
  const std::size_t t = y.size();
  if (t < 2) throw IoError("panel needs at least 2 rows: " + path);
  Matrix x(t, n);
  for (std::size_t r = 0; r < t; ++r)
    for (std::size_t j = 0; j < n; ++j) x(r, j) = xflat[r * n + j];
  return make_panel(std::move(y), std::move(x), t0, header[1],
                    std::vector<std::string>(header.begin() + 2, header.end()),
                    std::move(time_labels));
}

void save_panel(const PanelData& panel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write panel file: " + path);
  out << "time," << panel.treated_name;
  for (const auto& u : panel.unit_names) out << ',' << u;
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < panel.t(); ++r) {
    out << panel.time_labels[r];
    std::snprintf(buf, sizeof(buf), "%.17g", panel.y_treated[r]);
    out << ',' << buf;
    for (std::size_t j = 0; j < panel.n(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", panel.x_controls(r, j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

std::pair<PanelView, PanelView> split(const PanelData& panel) {
  return {PanelView{&panel, 0, panel.t0}, PanelView{&panel, panel.t0, panel.t1()}};
}

}  // namespace drosc
