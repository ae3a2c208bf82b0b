#include "sodeint/noise.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace sodeint {

std::string to_string(NoiseStructure s) {
  switch (s) {
    case NoiseStructure::Additive: return "additive";
    case NoiseStructure::Scalar: return "scalar";
    case NoiseStructure::Diagonal: return "diagonal";
    case NoiseStructure::Commutative: return "commutative";
    case NoiseStructure::General: return "general";
  }
  return "?";
}

NoiseStructure noise_structure_from_string(const std::string& name) {
  if (name == "additive") return NoiseStructure::Additive;
  if (name == "scalar") return NoiseStructure::Scalar;
  if (name == "diagonal") return NoiseStructure::Diagonal;
  if (name == "commutative") return NoiseStructure::Commutative;
  if (name == "general") return NoiseStructure::General;
  throw std::invalid_argument("unknown noise structure: " + name);
}

void generate_path_into(std::uint64_t seed, std::uint64_t sample_index, double T,
                        double fine_dt, int num_drivers, BrownianPath& out) {
  if (!(fine_dt > 0.0) || !(T > 0.0)) {
    throw std::invalid_argument("generate_path: T and fine_dt must be positive");
  }
  if (num_drivers < 1) {
    throw std::invalid_argument("generate_path: num_drivers must be >= 1");
  }
  const auto n = static_cast<std::int64_t>(std::llround(T / fine_dt));
  if (n < 1 || std::abs(static_cast<double>(n) * fine_dt - T) > 1e-12 * std::max(1.0, T)) {
    throw std::invalid_argument("generate_path: fine_dt must divide T");
  }
  out.num_drivers = num_drivers;
  out.fine_dt = fine_dt;
  out.num_fine_steps = n;
  out.seed = seed;
  out.sample_index = sample_index;
  out.increments.resize(n, num_drivers);
  const double scale = std::sqrt(fine_dt);
  for (int r = 0; r < num_drivers; ++r) {
    RandomStream stream(seed, sample_index, static_cast<std::uint64_t>(r));
    for (std::int64_t i = 0; i < n; ++i) {
      out.increments(i, r) = scale * stream.normal();
    }
  }
}

BrownianPath generate_path(std::uint64_t seed, std::uint64_t sample_index, double T,
                           double fine_dt, int num_drivers) {
  BrownianPath path;
  generate_path_into(seed, sample_index, T, fine_dt, num_drivers, path);
  return path;
}

Vector coarsen(const BrownianPath& path, std::int64_t from_index, std::int64_t to_index) {
  if (from_index < 0 || to_index > path.num_fine_steps || from_index >= to_index) {
    throw std::out_of_range("coarsen: window out of range");
  }
  return path.increments.middleRows(from_index, to_index - from_index)
      .colwise()
      .sum()
      .transpose();
}

void iterated_integrals_into(const BrownianPath& path, std::int64_t from_index,
                             std::int64_t to_index, NoiseStructure structure,
                             StepIncrements& out) {
  if (structure == NoiseStructure::General) {
    throw std::invalid_argument(
        "iterated_integrals: general noise requires a Levy-area approximation "
        "and is not supported");
  }
  if (structure == NoiseStructure::Scalar && path.num_drivers != 1) {
    throw std::invalid_argument("iterated_integrals: scalar noise means one driver");
  }
  if (from_index < 0 || to_index > path.num_fine_steps || from_index >= to_index) {
    throw std::out_of_range("iterated_integrals: window out of range");
  }
  const int m = path.num_drivers;
  out.structure = structure;
  out.delta = static_cast<double>(to_index - from_index) * path.fine_dt;
  out.dw.resize(m);
  out.iterated.resize(m, m);
  out.dw.noalias() = path.increments.middleRows(from_index, to_index - from_index)
                         .colwise()
                         .sum()
                         .transpose();
  if (structure == NoiseStructure::Additive) {
    out.iterated.setZero();
    return;
  }
  out.iterated.setZero();
  for (int r = 0; r < m; ++r) {
    out.iterated(r, r) = 0.5 * (out.dw[r] * out.dw[r] - out.delta);
  }
  if (structure == NoiseStructure::Commutative) {
    for (int r1 = 0; r1 < m; ++r1) {
      for (int r2 = r1 + 1; r2 < m; ++r2) {
        const double half = 0.5 * (out.dw[r1] * out.dw[r2]);
        out.iterated(r1, r2) = half;
        out.iterated(r2, r1) = half;
      }
    }
  }
}

StepIncrements iterated_integrals(const BrownianPath& path, std::int64_t from_index,
                                  std::int64_t to_index, NoiseStructure structure) {
  StepIncrements inc;
  iterated_integrals_into(path, from_index, to_index, structure, inc);
  return inc;
}

namespace {

template <typename T>
void put_le(std::ostream& os, T value) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!is) throw std::runtime_error("read_path: truncated stream");
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

void write_path(std::ostream& os, const BrownianPath& path) {
  put_le<std::uint64_t>(os, path.seed);
  put_le<std::uint64_t>(os, path.sample_index);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(path.num_drivers));
  put_le<double>(os, path.fine_dt);
  put_le<std::uint64_t>(os, static_cast<std::uint64_t>(path.num_fine_steps));
  for (std::int64_t i = 0; i < path.num_fine_steps; ++i) {
    for (int r = 0; r < path.num_drivers; ++r) put_le<double>(os, path.increments(i, r));
  }
}

BrownianPath read_path(std::istream& is) {
  BrownianPath path;
  path.seed = get_le<std::uint64_t>(is);
  path.sample_index = get_le<std::uint64_t>(is);
  path.num_drivers = static_cast<int>(get_le<std::uint32_t>(is));
  path.fine_dt = get_le<double>(is);
  path.num_fine_steps = static_cast<std::int64_t>(get_le<std::uint64_t>(is));
  if (path.num_drivers < 1 || path.num_fine_steps < 0) {
    throw std::runtime_error("read_path: malformed header");
  }
  path.increments.resize(path.num_fine_steps, path.num_drivers);
  for (std::int64_t i = 0; i < path.num_fine_steps; ++i) {
    for (int r = 0; r < path.num_drivers; ++r) path.increments(i, r) = get_le<double>(is);
  }
  return path;
}

}  // namespace sodeint
