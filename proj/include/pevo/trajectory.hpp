#pragma once

#include <memory>
#include <variant>
#include <vector>

#include "pevo/grid.hpp"

namespace pevo {

/// Time-stamped sequence of complex fields on a fixed grid.
struct Trajectory {
  std::vector<double> times;
  std::vector<VecC> frames;

  int size() const { return static_cast<int>(times.size()); }
  bool empty() const { return times.empty(); }
  double t0() const { return times.front(); }
  double t1() const { return times.back(); }

  double dt() const;       // uniform spacing (validated)
  bool is_uniform() const;

  /// Piecewise-linear interpolation in t (clamped to the stored range).
  VecC at(double t) const;

  /// Cubic (4-point Lagrange) interpolation on the uniform grid.
  VecC at_cubic(double t) const;

  int index_of(double t) const;  // nearest stored time (within tolerance)
};

Trajectory make_uniform_trajectory(double t_end, int steps, int n);

/// d/dt of the frames by finite differences on the uniform time grid
/// (4th order centered inside, one-sided at the ends).
Trajectory time_derivative(const Trajectory& u);

/// Cumulative integral I(t_m) = int_{t_0}^{t_m} u(s) ds on the uniform grid;
/// each cell integrates the cubic through the four nearest frames.
Trajectory cumulative_time_integral(const Trajectory& u);

/// Graded seminorm sup_t (||g(t)||_n + ||D_t g(t)||_n).
double graded_seminorm(const Grid& g, const Trajectory& u, double n, double h = 1.0);

/// sup_t ||g(t)||_n without the D_t part.
double sup_norm(const Grid& g, const Trajectory& u, double n, double h = 1.0);

Trajectory axpy(const cxd& alpha, const Trajectory& x, const Trajectory& y);  // alpha*x + y
Trajectory scale(const cxd& alpha, const Trajectory& x);

/// The state a linear problem is frozen at: zero, a static field, or a
/// full trajectory (linearly interpolated between stored frames).
class FrozenState {
 public:
  FrozenState() : kind_(Kind::Zero) {}
  explicit FrozenState(VecC field) : kind_(Kind::Static), field_(std::move(field)) {}
  explicit FrozenState(std::shared_ptr<const Trajectory> traj)
      : kind_(Kind::Moving), traj_(std::move(traj)) {}

  bool is_zero() const { return kind_ == Kind::Zero; }
  VecC sample(double t, int n) const {
    switch (kind_) {
      case Kind::Zero: return VecC::Zero(n);
      case Kind::Static: return field_;
      case Kind::Moving: return traj_->at(t);
    }
    return VecC::Zero(n);
  }
  const std::shared_ptr<const Trajectory>& trajectory() const { return traj_; }

 private:
  enum class Kind { Zero, Static, Moving } kind_;
  VecC field_;
  std::shared_ptr<const Trajectory> traj_;
};

}  // namespace pevo
