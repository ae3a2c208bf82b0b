#pragma once

#include <cstdint>
#include <iosfwd>

#include "sodeint/rng.hpp"
#include "sodeint/types.hpp"

namespace sodeint {

/// A Wiener path stored as fine-grid increments, one column per driver.
/// Increments are kept (rather than path values) so that coarse increments
/// over any window are exact sums of fine ones: a coarse scheme and a fine
/// reference driven by the same path see literally the same Brownian motion.
struct BrownianPath {
  int num_drivers = 0;
  double fine_dt = 0.0;
  std::int64_t num_fine_steps = 0;
  std::uint64_t seed = 0;
  std::uint64_t sample_index = 0;
  Matrix increments;  // num_fine_steps x num_drivers, entries ~ N(0, fine_dt)

  double horizon() const { return fine_dt * static_cast<double>(num_fine_steps); }
};

/// Draws a fresh path.  T must be an integer multiple of fine_dt (within one
/// part in 1e12); each driver column comes from its own substream keyed by
/// (seed, sample_index, driver), so regeneration is bit-identical and columns
/// are independent.
BrownianPath generate_path(std::uint64_t seed, std::uint64_t sample_index, double T,
                           double fine_dt, int num_drivers);

/// Same, reusing the storage of `out` (hot-loop variant).
void generate_path_into(std::uint64_t seed, std::uint64_t sample_index, double T,
                        double fine_dt, int num_drivers, BrownianPath& out);

/// Per-driver sum of fine increments over [from_index, to_index).
Vector coarsen(const BrownianPath& path, std::int64_t from_index, std::int64_t to_index);

/// Stochastic increments of one step: the Wiener increments dw and the
/// iterated-integral values consumed by Milstein-type schemes.
///
/// iterated(r1, r2) holds the value paired with the coefficient g^{r1,r2},
/// i.e. the double integral with the index order swapped relative to the
/// coefficient.  For every supported structure the matrix is symmetric, so
/// the pairing order cannot be observed; it is kept explicit regardless.
struct StepIncrements {
  double delta = 0.0;
  Vector dw;        // num_drivers
  Matrix iterated;  // num_drivers x num_drivers
  NoiseStructure structure = NoiseStructure::General;
};

/// Builds the increments of one step over fine window [from_index, to_index):
///   - diagonal entries: (dw_r^2 - delta) / 2,
///   - Commutative off-diagonal: dw_{r1} dw_{r2} / 2 (the symmetrized split;
///     only the symmetric sum is ever consumed, and it is exact),
///   - Diagonal off-diagonal entries are zero and must never be consumed,
///   - Additive: everything zero.
/// General structure is rejected: simulating the joint law of the iterated
/// integrals needs a Levy-area approximation, which is out of scope.
StepIncrements iterated_integrals(const BrownianPath& path, std::int64_t from_index,
                                  std::int64_t to_index, NoiseStructure structure);

void iterated_integrals_into(const BrownianPath& path, std::int64_t from_index,
                             std::int64_t to_index, NoiseStructure structure,
                             StepIncrements& out);

/// Binary dump for debugging replay.  Layout, all little-endian:
/// u64 seed, u64 sample_index, u32 num_drivers, f64 fine_dt, u64 count,
/// then count*num_drivers f64 increments in row-major order.
void write_path(std::ostream& os, const BrownianPath& path);
BrownianPath read_path(std::istream& is);

}  // namespace sodeint
