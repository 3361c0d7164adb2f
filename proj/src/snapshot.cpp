#include "shockduct/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "shockduct/error.hpp"

namespace shockduct {

namespace {

constexpr char kMagic[4] = {'S', 'H', 'K', 'D'};

template <class T>
void put(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  }
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T take(std::istream& is, const std::filesystem::path& path) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) {
    throw Error(ErrorKind::Io, path.string() + ": truncated snapshot");
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  }
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

std::size_t SnapshotData::points() const {
  std::size_t n = static_cast<std::size_t>(n_xi);
  for (int a = 1; a < d; ++a) n *= static_cast<std::size_t>(n_perp);
  return n;
}

void write_snapshot(const std::filesystem::path& path, const SnapshotData& s) {
  if (s.q.size() != static_cast<std::size_t>(s.d + 1) * s.points()) {
    throw Error(ErrorKind::Domain, "snapshot payload does not match its header");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  os.write(kMagic, 4);
  put<std::uint32_t>(os, s.version);
  put<std::int64_t>(os, s.d);
  put<std::int64_t>(os, s.n_xi);
  put<std::int64_t>(os, s.n_perp);
  put<double>(os, s.L);
  put<double>(os, s.t);
  put<double>(os, s.frame_speed);
  for (double v : s.q) put<double>(os, v);
  if (!os) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

SnapshotData read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot read " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorKind::Io, path.string() + ": not a snapshot (bad magic)");
  }
  SnapshotData s;
  s.version = take<std::uint32_t>(is, path);
  if (s.version != kSnapshotVersion) {
    throw Error(ErrorKind::Io, path.string() + ": snapshot version " + std::to_string(s.version) +
                                   ", expected " + std::to_string(kSnapshotVersion));
  }
  const auto d = take<std::int64_t>(is, path);
  const auto n_xi = take<std::int64_t>(is, path);
  const auto n_perp = take<std::int64_t>(is, path);
  if (d < 1 || d > 3 || n_xi < 1 || n_perp < 1 || n_xi > (1 << 24) || n_perp > (1 << 16)) {
    throw Error(ErrorKind::Io, path.string() + ": implausible snapshot header");
  }
  s.d = static_cast<int>(d);
  s.n_xi = static_cast<int>(n_xi);
  s.n_perp = static_cast<int>(n_perp);
  s.L = take<double>(is, path);
  s.t = take<double>(is, path);
  s.frame_speed = take<double>(is, path);
  s.q.resize(static_cast<std::size_t>(s.d + 1) * s.points());
  for (double& v : s.q) v = take<double>(is, path);
  if (is.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::Io, path.string() + ": trailing bytes after snapshot payload");
  }
  return s;
}

SnapshotData to_snapshot(const DuctState& st) {
  SnapshotData s;
  s.d = st.grid.d;
  s.n_xi = st.grid.n_xi;
  s.n_perp = st.grid.n_perp;
  s.L = st.grid.L;
  s.t = st.t;
  s.frame_speed = st.frame_speed;
  s.q = st.q;
  return s;
}

DuctState duct_from_snapshot(const SnapshotData& s, std::int64_t step) {
  DuctState st;
  st.grid = {s.d, s.n_xi, s.n_perp, s.L};
  st.grid.validate();
  st.t = s.t;
  st.step = step;
  st.frame_speed = s.frame_speed;
  st.q = s.q;
  return st;
}

SnapshotData to_snapshot(const PeriodicState& st) {
  SnapshotData s;
  s.d = st.d;
  s.n_xi = st.n;
  s.n_perp = st.n;
  s.L = 0.5;
  s.t = st.t;
  s.frame_speed = 0.0;
  s.q = st.q;
  return s;
}

PeriodicState periodic_from_snapshot(const SnapshotData& s, double mean_rho,
                                     const std::array<double, 3>& mean_m, std::int64_t step) {
  if (s.n_xi != s.n_perp) throw Error(ErrorKind::Io, "periodic snapshot must be square");
  PeriodicState st;
  st.d = s.d;
  st.n = s.n_xi;
  st.t = s.t;
  st.step = step;
  st.mean_rho = mean_rho;
  st.mean_m = mean_m;
  st.q = s.q;
  return st;
}

}  // namespace shockduct
