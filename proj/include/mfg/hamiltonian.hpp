#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mfg/grid.hpp"

namespace mfg {

// H(x, p) = a(x) (1 + |p|^2)^(gamma/2) + V(x) on a torus grid; x is a node index.
class HamiltonianModel {
 public:
  HamiltonianModel(Field a, Field V, double gamma);

  // Open window 1 + 1/(d+1) < gamma < 2 of the subquadratic growth condition.
  static bool in_growth_window(double gamma, int d) noexcept;

  const TorusGrid& grid() const noexcept { return a_.grid(); }
  int dim() const noexcept { return a_.grid().dim(); }
  const Field& a() const noexcept { return a_; }
  const Field& V() const noexcept { return V_; }
  double gamma() const noexcept { return gamma_; }
  // true when a and V are spatially constant (D_x H == 0).
  bool x_independent() const noexcept { return x_independent_; }

  double h_eval(std::size_t x, std::span<const double> p) const;
  void dp_h(std::size_t x, std::span<const double> p, std::span<double> out) const;
  Eigen::MatrixXd dpp_h(std::size_t x, std::span<const double> p) const;
  // D_pH(x,p).p - H(x,p)
  double l_hat(std::size_t x, std::span<const double> p) const;
  // a((gamma-1)|p|^2 - 1)(1+|p|^2)^((gamma-2)/2) - V, the closed form of l_hat.
  double l_hat_closed_form(std::size_t x, std::span<const double> p) const;
  // L(x, v) = sup_p (-p.v - H(x, p)); one-dimensional concave maximization along -v.
  double legendre_l(std::size_t x, std::span<const double> v) const;

  void dx_h(std::size_t x, std::span<const double> p, std::span<double> out) const;
  Eigen::MatrixXd dxx_h(std::size_t x, std::span<const double> p) const;
  // Entry (i, j) is d^2 H / dp_i dx_j.
  Eigen::MatrixXd dxp_h(std::size_t x, std::span<const double> p) const;

  // H(x, grad(x)) at every node.
  Field hamiltonian_field(const VectorField& grad) const;
  // D_pH(x, grad(x)) at every node.
  VectorField drift_field(const VectorField& grad) const;

 private:
  Field a_;
  Field V_;
  double gamma_;
  bool x_independent_;
  VectorField grad_a_;
  VectorField grad_V_;
  std::vector<Field> hess_a_;
  std::vector<Field> hess_V_;
};

struct AuditSampleSpec {
  double radius = 20.0;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  // Random symmetric matrices drawn per p-sample for the matrix inequalities.
  std::size_t matrices_per_sample = 2;
  double delta = 0.5;
};

struct AuditCertificate {
  std::string assumption;
  std::map<std::string, double> constants;
  std::string samples;
  // max over samples of (lhs - rhs) with the reported constants; <= 0 means the
  // inequality held everywhere it was sampled.
  double residual = 0.0;
  bool pass = false;
  std::string note;
};

// Sample-based check of A1-A9 for the model (A2/A4 use g(m) = m^alpha).
// Deterministic in spec.seed.
std::vector<AuditCertificate> audit_assumptions(const HamiltonianModel& model,
                                                const AuditSampleSpec& spec, double alpha);

}  // namespace mfg
