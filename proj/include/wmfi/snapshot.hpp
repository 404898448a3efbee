#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "wmfi/diagnostics.hpp"
#include "wmfi/fluid.hpp"

namespace wmfi {

/// Snapshot layout on disk:
///
///   bytes 0..7    magic "WMFISNAP"
///   bytes 8..15   header length H, uint64 little-endian
///   next H bytes  header, JSON text
///   remainder     payload, float64 little-endian arrays in header order
///
/// The header lists every array with its name, boundary class, role and
/// element count. Prognostic arrays come first (Z, rho, then a, b or zeta, w),
/// followed by optional diagnostic arrays (Psi, Q_F, Q_W, N) and the material
/// loop as interleaved x, y pairs. The checksum is the zlib CRC-32 of the payload.
inline constexpr int kSnapshotSchemaVersion = 1;

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SnapshotArray {
  std::string name;
  /// Boundary class tag, or "none" for the loop.
  std::string bc;
  /// "prognostic", "diagnostic" or "loop".
  std::string role;
  std::string units;
  std::uint64_t count = 0;
};

struct SnapshotHeader {
  int schema_version = kSnapshotSchemaVersion;
  GridSpec grid;
  double time = 0.0;
  std::uint64_t step = 0;
  std::string stage;
  int stage_index = 0;
  WaveModel wave_model = WaveModel::None;
  std::vector<SnapshotArray> arrays;
  std::uint64_t payload_bytes = 0;
  std::uint32_t checksum = 0;
  /// Free-form run metadata (the resolved config, for instance).
  nlohmann::json extra = nlohmann::json::object();
};

struct Snapshot {
  CoupledState state;
  std::uint64_t step = 0;
  std::string stage;
  int stage_index = 0;
  WaveModel wave_model = WaveModel::None;
  /// Diagnostic arrays keyed by name; never needed for a restart.
  std::map<std::string, Field> diagnostics;
  std::optional<MaterialLoop> loop;
  nlohmann::json extra = nlohmann::json::object();
};

/// Adds Psi, Q_F, Q_W and N computed from `d` to the snapshot diagnostics.
void attach_diagnostics(Snapshot& s, const Diagnosed& d, const WaveParams& params);

/// Serialises to memory; the bytes are a pure function of the snapshot.
std::vector<unsigned char> encode_snapshot(const Snapshot& s);
Snapshot decode_snapshot(const std::vector<unsigned char>& bytes);

/// Writes through a temporary file and a rename so a crash never leaves a
/// partial snapshot under the final name.
void write_snapshot(const std::string& path, const Snapshot& s);
Snapshot read_snapshot(const std::string& path);

/// Reads only the magic and the header.
SnapshotHeader inspect_snapshot(const std::string& path);

nlohmann::json header_to_json(const SnapshotHeader& h);

}  // namespace wmfi
