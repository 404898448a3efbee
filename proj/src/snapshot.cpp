#include "wmfi/snapshot.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace wmfi {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'W', 'M', 'F', 'I', 'S', 'N', 'A', 'P'};

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<unsigned char>(v >> (8 * k)));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(p[k]) << (8 * k);
  return v;
}

void put_doubles(std::vector<unsigned char>& out, std::span<const double> values) {
  for (double d : values) put_u64(out, std::bit_cast<std::uint64_t>(d));
}

std::uint32_t crc(const unsigned char* data, std::size_t n) {
  uLong c = crc32(0L, Z_NULL, 0);
  // crc32 takes a uInt length; feed large payloads in chunks.
  while (n > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    c = crc32(c, data, chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(c);
}

std::string bits_hex(double d) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << std::bit_cast<std::uint64_t>(d);
  return os.str();
}

double hex_bits(const std::string& s) {
  std::size_t used = 0;
  const std::uint64_t v = std::stoull(s, &used, 16);
  if (used != s.size()) throw SnapshotError("snapshot: malformed time_bits '" + s + "'");
  return std::bit_cast<double>(v);
}

SnapshotHeader header_from_json(const json& j) {
  SnapshotHeader h;
  try {
    h.schema_version = j.at("schema_version").get<int>();
    if (h.schema_version != kSnapshotSchemaVersion)
      throw SnapshotError("snapshot: unsupported schema version " + std::to_string(h.schema_version) +
                          " (this build reads version " + std::to_string(kSnapshotSchemaVersion) + ")");
    if (j.at("byte_order").get<std::string>() != "little")
      throw SnapshotError("snapshot: unsupported byte order " + j.at("byte_order").dump());
    const json& g = j.at("grid");
    h.grid = GridSpec{g.at("nx").get<int>(), g.at("ny").get<int>(), g.at("Lx").get<double>(), g.at("Ly").get<double>()};
    h.time = j.contains("time_bits") ? hex_bits(j["time_bits"].get<std::string>()) : j.at("time").get<double>();
    h.step = j.at("step").get<std::uint64_t>();
    h.stage = j.at("stage").get<std::string>();
    h.stage_index = j.at("stage_index").get<int>();
    h.wave_model = wave_model_from_string(j.at("wave_model").get<std::string>());
    for (const json& a : j.at("fields")) {
      SnapshotArray arr;
      arr.name = a.at("name").get<std::string>();
      arr.bc = a.at("bc").get<std::string>();
      arr.role = a.at("role").get<std::string>();
      arr.units = a.value("units", std::string{});
      arr.count = a.at("count").get<std::uint64_t>();
      h.arrays.push_back(arr);
    }
    h.payload_bytes = j.at("payload_bytes").get<std::uint64_t>();
    h.checksum = j.at("checksum").get<std::uint32_t>();
    if (j.contains("extra")) h.extra = j["extra"];
  } catch (const json::exception& e) {
    throw SnapshotError(std::string("snapshot: malformed header: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(std::string("snapshot: malformed header: ") + e.what());
  }
  try {
    h.grid.validate();
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(std::string("snapshot: ") + e.what());
  }
  std::uint64_t total = 0;
  for (const SnapshotArray& a : h.arrays) total += a.count;
  if (total * 8 != h.payload_bytes) throw SnapshotError("snapshot: header array counts disagree with payload_bytes");
  return h;
}

// Parses magic + header; returns the header and the payload offset.
std::pair<SnapshotHeader, std::size_t> parse_prefix(const unsigned char* data, std::size_t n) {
  if (n < 16 || std::memcmp(data, kMagic, 8) != 0) throw SnapshotError("snapshot: not a snapshot file (bad magic)");
  const std::uint64_t hlen = get_u64(data + 8);
  if (hlen > n - 16) throw SnapshotError("snapshot: truncated header");
  json j;
  try {
    j = json::parse(data + 16, data + 16 + hlen);
  } catch (const json::exception& e) {
    throw SnapshotError(std::string("snapshot: unreadable header: ") + e.what());
  }
  return {header_from_json(j), static_cast<std::size_t>(16 + hlen)};
}

}  // namespace

json header_to_json(const SnapshotHeader& h) {
  json fields = json::array();
  for (const SnapshotArray& a : h.arrays)
    fields.push_back({{"name", a.name}, {"bc", a.bc}, {"role", a.role}, {"units", a.units}, {"count", a.count}});
  return json{{"schema_version", h.schema_version},
              {"byte_order", "little"},
              {"grid", {{"nx", h.grid.nx}, {"ny", h.grid.ny}, {"Lx", h.grid.Lx}, {"Ly", h.grid.Ly}}},
              {"time", h.time},
              {"time_bits", bits_hex(h.time)},
              {"step", h.step},
              {"stage", h.stage},
              {"stage_index", h.stage_index},
              {"wave_model", to_string(h.wave_model)},
              {"fields", fields},
              {"payload_bytes", h.payload_bytes},
              {"checksum", h.checksum},
              {"extra", h.extra}};
}

void attach_diagnostics(Snapshot& s, const Diagnosed& d, const WaveParams& params) {
  s.diagnostics["Psi"] = d.psi;
  s.diagnostics["Q_F"] = d.Q_F;
  s.diagnostics["Q_W"] = d.Q_W;
  s.diagnostics["N"] = wave_action_density(s.state.wave, params);
}

std::vector<unsigned char> encode_snapshot(const Snapshot& s) {
  const bool harmonic = s.wave_model == WaveModel::Harmonic;
  std::vector<std::pair<std::string, const Field*>> prognostic = {
      {"Z", &s.state.fluid.Z},
      {"rho", &s.state.fluid.rho},
      {harmonic ? "zeta" : "a", &s.state.wave.first},
      {harmonic ? "w" : "b", &s.state.wave.second}};
  const GridSpec& g = s.state.grid();

  SnapshotHeader h;
  h.grid = g;
  h.time = s.state.t;
  h.step = s.step;
  h.stage = s.stage;
  h.stage_index = s.stage_index;
  h.wave_model = s.wave_model;
  h.extra = s.extra;

  std::vector<unsigned char> payload;
  auto add = [&](const std::string& name, const Field& f, const char* role) {
    if (!(f.grid() == g)) throw GridMismatch("snapshot: field '" + name + "' lives on a different grid");
    h.arrays.push_back({name, to_string(f.bc()), role, f.units(), f.size()});
    put_doubles(payload, f.values());
  };
  for (const auto& [name, f] : prognostic) add(name, *f, "prognostic");
  for (const char* name : {"Psi", "Q_F", "Q_W", "N"}) {
    auto it = s.diagnostics.find(name);
    if (it != s.diagnostics.end()) add(name, it->second, "diagnostic");
  }
  for (const auto& [name, f] : s.diagnostics) {
    if (name != "Psi" && name != "Q_F" && name != "Q_W" && name != "N") add(name, f, "diagnostic");
  }
  if (s.loop) {
    std::vector<double> xy;
    xy.reserve(2 * s.loop->markers.size());
    for (const Vec2& m : s.loop->markers) {
      xy.push_back(m.x);
      xy.push_back(m.y);
    }
    h.arrays.push_back({"loop", "none", "loop", "", xy.size()});
    put_doubles(payload, xy);
  }
  h.payload_bytes = payload.size();
  h.checksum = crc(payload.data(), payload.size());

  const std::string text = header_to_json(h).dump();
  std::vector<unsigned char> out(kMagic, kMagic + 8);
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Snapshot decode_snapshot(const std::vector<unsigned char>& bytes) {
  const auto [h, offset] = parse_prefix(bytes.data(), bytes.size());
  const std::size_t available = bytes.size() - offset;
  if (available != h.payload_bytes ||
      crc(bytes.data() + offset, std::min<std::size_t>(available, h.payload_bytes)) != h.checksum) {
    std::ostringstream os;
    os << "snapshot: payload checksum mismatch (" << available << " of " << h.payload_bytes << " bytes present)";
    throw SnapshotError(os.str());
  }

  Snapshot s;
  s.step = h.step;
  s.stage = h.stage;
  s.stage_index = h.stage_index;
  s.wave_model = h.wave_model;
  s.extra = h.extra;
  s.state.t = h.time;

  const unsigned char* p = bytes.data() + offset;
  auto take = [&](std::uint64_t count) {
    std::vector<double> v(count);
    for (std::uint64_t k = 0; k < count; ++k, p += 8) v[k] = std::bit_cast<double>(get_u64(p));
    return v;
  };
  const bool harmonic = h.wave_model == WaveModel::Harmonic;
  const std::string names[4] = {"Z", "rho", harmonic ? "zeta" : "a", harmonic ? "w" : "b"};
  Field* slots[4] = {&s.state.fluid.Z, &s.state.fluid.rho, &s.state.wave.first, &s.state.wave.second};
  int seen = 0;
  for (const SnapshotArray& a : h.arrays) {
    std::vector<double> v = take(a.count);
    if (a.role == "loop") {
      if (a.count % 2 != 0) throw SnapshotError("snapshot: loop array has odd length");
      MaterialLoop loop;
      for (std::size_t k = 0; k < v.size(); k += 2) loop.markers.push_back({v[k], v[k + 1]});
      s.loop = std::move(loop);
      continue;
    }
    if (a.count != h.grid.size()) throw SnapshotError("snapshot: array '" + a.name + "' has the wrong length");
    BcClass bc;
    try {
      bc = bc_from_string(a.bc);
    } catch (const std::invalid_argument& e) {
      throw SnapshotError(std::string("snapshot: ") + e.what());
    }
    Field f(h.grid, bc, std::move(v), a.units);
    if (a.role == "prognostic") {
      if (seen >= 4 || a.name != names[seen])
        throw SnapshotError("snapshot: unexpected prognostic array '" + a.name + "'");
      *slots[seen++] = std::move(f);
    } else {
      s.diagnostics[a.name] = std::move(f);
    }
  }
  if (seen != 4) throw SnapshotError("snapshot: missing prognostic arrays");
  return s;
}

void write_snapshot(const std::string& path, const Snapshot& s) {
  const std::vector<unsigned char> bytes = encode_snapshot(s);
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SnapshotError("snapshot: cannot open '" + tmp + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw SnapshotError("snapshot: write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, target);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("snapshot: cannot open '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_snapshot(bytes);
}

SnapshotHeader inspect_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("snapshot: cannot open '" + path + "'");
  unsigned char prefix[16];
  in.read(reinterpret_cast<char*>(prefix), 16);
  if (in.gcount() != 16 || std::memcmp(prefix, kMagic, 8) != 0)
    throw SnapshotError("snapshot: not a snapshot file (bad magic)");
  const std::uint64_t hlen = get_u64(prefix + 8);
  if (hlen > (std::uint64_t{1} << 30)) throw SnapshotError("snapshot: implausible header length");
  std::vector<unsigned char> buf(16 + hlen);
  std::memcpy(buf.data(), prefix, 16);
  in.read(reinterpret_cast<char*>(buf.data() + 16), static_cast<std::streamsize>(hlen));
  if (static_cast<std::uint64_t>(in.gcount()) != hlen) throw SnapshotError("snapshot: truncated header");
  return parse_prefix(buf.data(), buf.size()).first;
}

}  // namespace wmfi
