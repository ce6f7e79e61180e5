#pragma once

#include <functional>
#include <vector>

namespace demailly::detail {

using Vector = std::vector<double>;
using LinearOperator = std::function<Vector(const Vector&)>;

struct KrylovResult {
  Vector x;
  int iterations = 0;
  double residual_norm = 0.0;
  bool converged = false;
};

/// Restarted GMRES with right preconditioning, so `residual_norm` is the
/// true Euclidean norm of b - A x. Starts from x = 0.
KrylovResult gmres(const LinearOperator& apply, const LinearOperator& precondition,
                   const Vector& rhs, double abs_tol, int restart, int max_iters);

/// Preconditioned conjugate gradients for symmetric positive definite A.
/// Stops once `stop(x, r)` accepts the iterate (checked every step) or
/// max_iters is reached.
KrylovResult pcg(const LinearOperator& apply, const LinearOperator& precondition,
                 const Vector& rhs, const std::function<bool(const Vector&, const Vector&)>& stop,
                 int max_iters);

}  // namespace demailly::detail
