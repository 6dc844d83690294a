#pragma once

#include <limits>
#include <vector>

#include "mfg/grid.hpp"

namespace mfg {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Second-order central difference, componentwise.
VectorField gradient(const Field& f);

// Standard (2d+1)-point periodic Laplacian.
Field laplacian(const Field& f);

// Exact negative transpose of `gradient`: <divergence(v), f> = -<v, gradient(f)>.
Field divergence(const VectorField& v);

// Second derivatives: diagonal entries use the 3-point stencil, mixed entries
// the central-central stencil. Entry (i, j) is at index i * d + j.
std::vector<Field> hessian(const Field& f);

// (sum |f|^p h^d)^(1/p); p = kInfinity gives max |f|. Throws DomainError for p < 1.
double lp_norm(const Field& f, double p);

// Left-endpoint rectangle rule in time over frames 0..steps-1:
// (sum_k dt * ||f_k||_p^r)^(1/r). r = kInfinity gives the max over all frames.
double bochner_norm(const Trajectory& traj, double r, double p);

// Same, for a caller-supplied sequence of per-frame spatial norms.
double bochner_from_norms(const std::vector<double>& frame_norms, double dt, double r);

}  // namespace mfg
