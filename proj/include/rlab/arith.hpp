#pragma once

// Sieved arithmetic functions and exact error terms of the classical lattice
// point problems.  These are the ground-truth oracles for every truncated
// series elsewhere in the library.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

namespace rlab {

inline constexpr double kEulerGamma = 0.57721566490153286061;

// Tables of arithmetic functions on 1..limit.  Index 0 is present and zero so
// that table[n] reads naturally.
struct ArithTables {
  std::uint64_t limit = 0;
  std::vector<std::uint32_t> d;       // divisor count
  std::vector<std::uint32_t> r2;      // representations as a sum of two squares
  std::vector<std::uint8_t> omega;    // distinct prime factors
  std::vector<std::uint8_t> squarefree;
  std::map<int, std::vector<std::uint32_t>> dk;  // k-fold divisor functions, k >= 2

  bool has_k(int k) const { return k == 1 || k == 2 || dk.count(k) > 0; }

  // d_k(n); k = 1 is the constant 1 and k = 2 falls back to d.
  std::uint32_t divisor_k(int k, std::uint64_t n) const;
};

struct SieveLimits {
  // Upper bound on table memory; N whose tables would exceed it is refused.
  std::uint64_t max_bytes = std::uint64_t{3} << 30;
};

ArithTables build_tables(std::uint64_t limit, std::span<const int> k_list,
                         const SieveLimits& caps = {});

// Sum_{n <= x} d(n) by the hyperbola method, O(sqrt x).
std::uint64_t divisor_summatory(std::uint64_t x);

// Number of (a, b) in Z^2 with a^2 + b^2 <= x, origin included.
std::uint64_t lattice_count(std::uint64_t x);

std::uint64_t isqrt(std::uint64_t x);

// Delta(x) = sum_{n<=x} d(n) - x log x - (2 gamma - 1) x.
double delta_exact(double x);
// Same value, additionally cross-checked against the tabulated prefix sum;
// throws range error when x exceeds the tables.
double delta_exact(double x, const ArithTables& tables);

// Delta with the last term halved when x is an integer (the normalisation the
// Voronoi series converges to at jumps).
double delta_midpoint(double x);

// P(x) = #{(a,b): a^2+b^2 <= x} - pi x.
double circle_exact(double x);

struct MainTermCoefficients {
  int k = 1;
  // Main term is x * sum_j coefficients[j] * (log x)^j.
  std::vector<double> coefficients;

  double evaluate(double x) const;
};

MainTermCoefficients residue_polynomial(int k);

// Delta_k(x) = sum_{n<=x} d_k(n) - Res_{s=1} zeta(s)^k x^s / s.
double delta_k_exact(double x, int k, const ArithTables& tables);

// On-disk cache of sieve tables.
void save_tables(const ArithTables& tables, const std::filesystem::path& path);
ArithTables load_tables(const std::filesystem::path& path);
std::filesystem::path cache_path(const std::filesystem::path& dir, std::uint64_t limit,
                                 std::span<const int> k_list);
// Loads a cached table set keyed by (limit, k_list) or builds and stores it.
ArithTables load_or_build_tables(const std::filesystem::path& dir, std::uint64_t limit,
                                 std::span<const int> k_list, const SieveLimits& caps = {});

}  // namespace rlab
