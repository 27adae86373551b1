#pragma once

#include <cstddef>
#include <vector>

#include "nashflow/rational.hpp"

namespace nashflow {

struct LinearSolution {
  bool consistent = false;
  bool unique = false;
  std::vector<Rat> x;  // a particular solution (free variables set to 0)
};

// Exact Gauss-Jordan elimination for A x = b over the rationals, in place
// (A and b are destroyed). Rows may be linearly dependent; the system is
// reported inconsistent when elimination produces 0 = c with c != 0.
inline LinearSolution solve_linear_destructive(std::vector<std::vector<Rat>>& A,
                                               std::vector<Rat>& b, std::size_t n,
                                               std::size_t m) {
  std::vector<int> pivot_col;
  std::size_t row = 0;
  for (std::size_t col = 0; col < n && row < m; ++col) {
    std::size_t p = row;
    while (p < m && A[p][col].sign() == 0) ++p;
    if (p == m) continue;
    std::swap(A[p], A[row]);
    std::swap(b[p], b[row]);
    Rat inv = Rat(1) / A[row][col];
    for (std::size_t j = col; j < n; ++j)
      if (A[row][j].sign() != 0) A[row][j] *= inv;
    b[row] *= inv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == row || A[i][col].sign() == 0) continue;
      Rat f = A[i][col];
      for (std::size_t j = col; j < n; ++j)
        if (A[row][j].sign() != 0) A[i][j] -= f * A[row][j];
      if (b[row].sign() != 0) b[i] -= f * b[row];
    }
    pivot_col.push_back(static_cast<int>(col));
    ++row;
  }
  LinearSolution sol;
  for (std::size_t i = row; i < m; ++i)
    if (b[i].sign() != 0) return sol;  // inconsistent
  sol.consistent = true;
  sol.unique = pivot_col.size() == n;
  sol.x.assign(n, Rat(0));
  for (std::size_t i = 0; i < pivot_col.size(); ++i)
    sol.x[static_cast<std::size_t>(pivot_col[i])] = b[i];
  return sol;
}

inline LinearSolution solve_linear(std::vector<std::vector<Rat>> A, std::vector<Rat> b) {
  const std::size_t n = A.empty() ? 0 : A[0].size();
  return solve_linear_destructive(A, b, n, A.size());
}

// Two-stage elimination for many small variations of one shared system: the
// base rows are Jordan-reduced once, each variation then only reduces its few
// extra rows against the cached pivots. Particular solutions set the free
// variables to zero, matching solve_linear.
class StagedSolver {
public:
  // Reduces the base in place and keeps a reference to it. Returns false if
  // the base alone is inconsistent (no variation can be consistent either).
  bool set_base(std::vector<std::vector<Rat>>& A, std::vector<Rat>& b, std::size_t rows,
                std::size_t cols) {
    base_ = &A;
    rhs_ = &b;
    cols_ = cols;
    pivots_.clear();
    std::size_t row = 0;
    for (std::size_t col = 0; col < cols && row < rows; ++col) {
      std::size_t p = row;
      while (p < rows && A[p][col].sign() == 0) ++p;
      if (p == rows) continue;
      std::swap(A[p], A[row]);
      std::swap(b[p], b[row]);
      Rat inv = Rat(1) / A[row][col];
      for (std::size_t j = 0; j < cols; ++j)
        if (A[row][j].sign() != 0) A[row][j] *= inv;
      b[row] *= inv;
      for (std::size_t i = 0; i < rows; ++i) {
        if (i == row || A[i][col].sign() == 0) continue;
        Rat f = A[i][col];
        for (std::size_t j = 0; j < cols; ++j)
          if (A[row][j].sign() != 0) A[i][j] -= f * A[row][j];
        if (b[row].sign() != 0) b[i] -= f * b[row];
      }
      pivots_.push_back({col, row});
      ++row;
    }
    for (std::size_t i = row; i < rows; ++i)
      if (b[i].sign() != 0) return false;
    return true;
  }

  // Solves base + extra rows; `extra`/`eb` are destroyed. Returns consistency
  // and fills x with a particular solution (free variables zero).
  bool solve(std::vector<std::vector<Rat>>& extra, std::vector<Rat>& eb, std::size_t rows,
             std::vector<Rat>& x) const {
    // reduce the extra rows against the cached base pivots
    for (const auto& [col, brow] : pivots_) {
      const auto& base_row = (*base_)[brow];
      for (std::size_t i = 0; i < rows; ++i) {
        if (extra[i][col].sign() == 0) continue;
        Rat f = extra[i][col];
        for (std::size_t j = 0; j < cols_; ++j)
          if (base_row[j].sign() != 0) extra[i][j] -= f * base_row[j];
        if ((*rhs_)[brow].sign() != 0) eb[i] -= f * (*rhs_)[brow];
      }
    }
    // Jordan among the extra rows
    std::vector<std::pair<std::size_t, std::size_t>> xpivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < cols_ && row < rows; ++col) {
      std::size_t p = row;
      while (p < rows && extra[p][col].sign() == 0) ++p;
      if (p == rows) continue;
      std::swap(extra[p], extra[row]);
      std::swap(eb[p], eb[row]);
      Rat inv = Rat(1) / extra[row][col];
      for (std::size_t j = 0; j < cols_; ++j)
        if (extra[row][j].sign() != 0) extra[row][j] *= inv;
      eb[row] *= inv;
      for (std::size_t i = 0; i < rows; ++i) {
        if (i == row || extra[i][col].sign() == 0) continue;
        Rat f = extra[i][col];
        for (std::size_t j = 0; j < cols_; ++j)
          if (extra[row][j].sign() != 0) extra[i][j] -= f * extra[row][j];
        if (eb[row].sign() != 0) eb[i] -= f * eb[row];
      }
      xpivots.push_back({col, row});
      ++row;
    }
    for (std::size_t i = row; i < rows; ++i)
      if (eb[i].sign() != 0) return false;

    x.assign(cols_, Rat(0));
    for (const auto& [col, r] : xpivots) x[col] = eb[r];
    // base pivot variables: substitute the extra pivots (free vars are zero)
    for (const auto& [col, brow] : pivots_) {
      Rat val = (*rhs_)[brow];
      for (const auto& [xcol, xr] : xpivots)
        if ((*base_)[brow][xcol].sign() != 0) val -= (*base_)[brow][xcol] * x[xcol];
      x[col] = std::move(val);
    }
    return true;
  }

private:
  std::vector<std::vector<Rat>>* base_ = nullptr;
  std::vector<Rat>* rhs_ = nullptr;
  std::vector<std::pair<std::size_t, std::size_t>> pivots_;
  std::size_t cols_ = 0;
};

}  // namespace nashflow
