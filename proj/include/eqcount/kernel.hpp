#pragma once

#include <array>
#include <vector>

#include "eqcount/numeric.hpp"

namespace eqc {

// Pfaffian kernel of the real eigenvalues of the elliptic ensemble, built
// from the planar-Hermite family C_k(x) = (tau/2)^{k/2} H_k(x / sqrt(2 tau)):
// C_0 = 1, C_1 = x, C_{k+1} = x C_k - tau k C_{k-1}. Everything below works
// with the weighted, factorial-normalized values
//   u_k(x) = e^{-x^2 / (2(1+tau))} C_k(x) / sqrt(k!),
// whose three-term recurrence u_{k+1} = (x u_k - tau sqrt(k) u_{k-1}) /
// sqrt(k+1) keeps every intermediate bounded by ~(1+tau)^{k/2}; the
// factorial and power constants that assemble the kernel are taken through
// lgamma, so nothing overflows at any order.

// u_k(x) in sign/log form, valid for any magnitude of x (the recurrence is
// run with a running exponent offset).
SignLog hermite_c(int k, double tau, double x);

// u_0..u_kmax as plain doubles (bulk arguments; values are O(1) there).
// When deriv is non-null it receives d/dx u_k = sqrt(k) u_{k-1} -
// x/(1+tau) u_k.
void weighted_hermite_seq(int kmax, double tau, double x,
                          std::vector<double>& u, std::vector<double>* deriv = nullptr);

// Truncated Mehler sum  sum_{k<=kmax} rho^k H_k(x) H_k(y) / (2^k k!)  via the
// normalized recurrence, and its closed form
// (1-rho^2)^{-1/2} exp(-(rho^2 (x^2+y^2) - 2 rho x y) / (1 - rho^2)).
double mehler_sum(double rho, double x, double y, int kmax);
double mehler_closed(double rho, double x, double y);

// Odd antiderivative of twice the weighted Hermite function:
// Phi_n(x) = c_n - 2 int_x^inf e^{-t^2/(2(1+tau))} C_n(t) dt,  n even,
// c_n = Phi_n(+inf) = sqrt(2 pi (1+tau)) n! / (2^{n/2} (n/2)!).
// phi_big_normalized returns Phi_n(x)/c_n in [-1, 1] (odd in x, 0 at 0);
// phi_big returns Phi_n(x) itself in sign/log form. Odd n is rejected.
double phi_big_normalized(int n, double tau, double x);
double log_phi_big_limit(int n, double tau); // log c_n
SignLog phi_big(int n, double tau, double x);

// S-channel of the kernel on the dilated axis (arguments of order sqrt(n)):
// the u_k(X) u_k(Y) channel sum plus the parity correction; one Phi term for
// even n, the Phi pair / extra Hermite sum / constant term for odd n.
double kernel_s_unscaled(int n, double tau, double X, double Y);
// d/dX of the above, analytic via the Hermite ladder and Phi' = 2 w C.
double kernel_d_unscaled(int n, double tau, double X, double Y);
// sign(Y-X)/2 - int_X^Y S(X,Z) dZ, adaptive quadrature.
double kernel_i_unscaled(int n, double tau, double X, double Y);

// Bulk coordinates: the real spectrum fills (-1-tau, 1+tau) and
// S_n(x, y) = S-unscaled(sqrt(n) x, sqrt(n) y). sqrt(n) S_n(x, x) is the
// density of real eigenvalues.
double kernel_s(int n, double tau, double x, double y);

// 2x2 kernel block [[-i, s], [-st, d]]; st is the S-entry with the
// arguments swapped. d and i live in the same coordinates as (x, y): d is
// the x-derivative of s (so it matches a finite difference of kernel_s) and
// i carries the compensating 1/sqrt(n), which is exactly what makes
// n^{l/2} pf[blocks] the l-point correlation at every l (the sqrt(n)
// factors cancel pairwise through the Pfaffian).
struct KernelBlock {
    double s;
    double st;
    double d;
    double i;
    std::array<double, 4> matrix() const { return {-i, s, -st, d}; }
};

KernelBlock kernel_block(int n, double tau, double x, double y);

// n -> inf limit of the unscaled block at separation eta - xi:
// s = exp(-(xi-eta)^2 / (2(1-tau^2))) / sqrt(2 pi (1-tau^2)),
// d = ds/dxi, i = sign(eta-xi)/2 - erf((eta-xi)/sqrt(2(1-tau^2)))/2.
KernelBlock kernel_asymptotic(double tau, double xi, double eta);

// Frobenius distance between the unscaled finite-n block at
// (sqrt(n) x, sqrt(n) y) and its limit there; decays to 0 in the bulk.
double kernel_residual(int n, double tau, double x, double y);

// Pfaffian of a 2l x 2l matrix (row-major), antisymmetrized first, by
// recursive first-row expansion with sign/log accumulation. Odd dimension
// is rejected; intended for l <= 6.
SignLog pfaffian(const std::vector<double>& a, int dim);

// l-point correlation function of the real eigenvalues,
// rho^l_n(x_1..x_l) = n^{l/2} pf[K(x_i, x_j)]; points must be distinct
// (the Pfaffian vanishes at coincidence), l <= 6, n >= l + 3.
double real_correlation(int n, double tau, const std::vector<double>& points);
SignLog real_correlation_sl(int n, double tau, const std::vector<double>& points);

// Partition-function constant K_n(tau) and the moment prefactor D_{n,l}:
// log K_n = -n(n+1)/4 log n + n/2 log(1+tau) + n(n+1)/4 log 2
//           + sum_{j=1}^n lgamma(j/2),
// log D_{n,l} = log K_{n+l} - log K_n + (n/2 + (n+l)(n+l-1)/4) log((n+l)/n).
struct MomentConstants {
    double log_k;
    double log_d;
};
MomentConstants ensemble_constants(int n, int ell, double tau);

// E prod_i |det(A_n - mu_i)| through the correlation function:
// D_{n,l} e^{n sum mu_i^2 / (2(1+tau))} rho^l_{n+l}(mu~) / |Delta(mu)| with
// mu~_i = sqrt(n/(n+l)) mu_i. mus strictly descending, l <= 4.
SignLog moment_via_kernel(int n, double tau, const std::vector<double>& mus);

} // namespace eqc
