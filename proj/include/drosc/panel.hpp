#pragma once

#include <string>
#include <utility>
#include <vector>

#include "drosc/numerics.hpp"

namespace drosc {

// Treated-unit outcome series plus control-unit outcome matrix with a pre/post
// split at t0. Immutable after construction; safe to share across threads.
struct PanelData {
  Vector y_treated;                     // length T
  Matrix x_controls;                    // T x N, row t = X_t
  std::size_t t0 = 0;                   // pre-treatment length, 1 <= t0 <= T-1
  std::string treated_name;
  std::vector<std::string> unit_names;  // N control labels
  std::vector<std::string> time_labels; // T labels, default "1".."T"

  std::size_t t() const { return y_treated.size(); }
  std::size_t n() const { return x_controls.cols(); }
  std::size_t t1() const { return t() - t0; }
};

// Non-copying row-range view over a panel.
struct PanelView {
  const PanelData* panel = nullptr;
  std::size_t first = 0;
  std::size_t count = 0;

  double y(std::size_t r) const { return panel->y_treated[first + r]; }
  double x(std::size_t r, std::size_t j) const { return panel->x_controls(first + r, j); }
  std::size_t rows() const { return count; }
  std::size_t cols() const { return panel->n(); }
};

// Validates invariants: consistent shapes, finite entries, t0 in range, N >= 1.
PanelData make_panel(Vector y, Matrix x, std::size_t t0, std::string treated_name = "treated",
                     std::vector<std::string> unit_names = {},
                     std::vector<std::string> time_labels = {});

// Wide CSV: header `time,<treated>,<control-1>,...`; first column is the time
// label, second the treated unit, the rest control units.
PanelData load_panel(const std::string& path, std::size_t t0);
void save_panel(const PanelData& panel, const std::string& path);

std::pair<PanelView, PanelView> split(const PanelData& panel);

}  // namespace drosc
