// Binary cache for sieve tables.
//
// Layout (all integers little-endian):
//   "RLAB"            4 bytes magic
//   version           u16
//   N                 u64
//   k list            u64 count, then count x u64
//   d, r2, omega      each u64 count, then count x u64
//   squarefree        u64 count, then count x u8
//   d_k for each k    u64 count, then count x u64 (k ascending)

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rlab/arith.hpp"
#include "rlab/error.hpp"

namespace rlab {

namespace {

constexpr char kMagic[4] = {'R', 'L', 'A', 'B'};
constexpr std::uint16_t kVersion = 1;

void put_bytes(std::ostream& os, std::uint64_t v, int width) {
  char buf[8];
  for (int i = 0; i < width; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(buf, width);
}

std::uint64_t get_bytes(std::istream& is, int width) {
  unsigned char buf[8] = {};
  is.read(reinterpret_cast<char*>(buf), width);
  if (!is) fail(ErrorKind::config, "truncated table cache");
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= std::uint64_t{buf[i]} << (8 * i);
  return v;
}

template <class T>
void put_u64_array(std::ostream& os, const std::vector<T>& v) {
  put_bytes(os, v.size(), 8);
  for (T x : v) put_bytes(os, static_cast<std::uint64_t>(x), 8);
}

template <class T>
std::vector<T> get_u64_array(std::istream& is, std::uint64_t expect) {
  const std::uint64_t n = get_bytes(is, 8);
  if (n != expect) fail(ErrorKind::config, "table cache length mismatch");
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(get_bytes(is, 8));
  return v;
}

}  // namespace

void save_tables(const ArithTables& t, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorKind::config, "cannot write cache file " + tmp.string());
    os.write(kMagic, 4);
    put_bytes(os, kVersion, 2);
    put_bytes(os, t.limit, 8);
    std::vector<std::uint64_t> ks;
    for (const auto& [k, tab] : t.dk) ks.push_back(static_cast<std::uint64_t>(k));
    put_u64_array(os, ks);
    put_u64_array(os, t.d);
    put_u64_array(os, t.r2);
    put_u64_array(os, t.omega);
    put_bytes(os, t.squarefree.size(), 8);
    os.write(reinterpret_cast<const char*>(t.squarefree.data()),
             static_cast<std::streamsize>(t.squarefree.size()));
    for (const auto& [k, tab] : t.dk) put_u64_array(os, tab);
    if (!os) fail(ErrorKind::config, "failed writing cache file " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ArithTables load_tables(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::config, "cannot open cache file " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || !std::equal(magic, magic + 4, kMagic)) fail(ErrorKind::config, "bad cache magic");
  if (get_bytes(is, 2) != kVersion) fail(ErrorKind::config, "unsupported cache version");
  ArithTables t;
  t.limit = get_bytes(is, 8);
  const std::uint64_t n1 = t.limit + 1;
  const std::uint64_t nk = get_bytes(is, 8);
  std::vector<int> ks(nk);
  for (auto& k : ks) k = static_cast<int>(get_bytes(is, 8));
  t.d = get_u64_array<std::uint32_t>(is, n1);
  t.r2 = get_u64_array<std::uint32_t>(is, n1);
  t.omega = get_u64_array<std::uint8_t>(is, n1);
  if (get_bytes(is, 8) != n1) fail(ErrorKind::config, "table cache length mismatch");
  t.squarefree.resize(n1);
  is.read(reinterpret_cast<char*>(t.squarefree.data()), static_cast<std::streamsize>(n1));
  if (!is) fail(ErrorKind::config, "truncated table cache");
  for (int k : ks) t.dk[k] = get_u64_array<std::uint32_t>(is, n1);
  return t;
}

std::filesystem::path cache_path(const std::filesystem::path& dir, std::uint64_t limit,
                                 std::span<const int> k_list) {
  std::vector<int> ks(k_list.begin(), k_list.end());
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  std::ostringstream name;
  name << "tables_N" << limit << "_k";
  if (ks.empty()) name << "none";
  for (std::size_t i = 0; i < ks.size(); ++i) name << (i ? "-" : "") << ks[i];
  name << ".bin";
  return dir / name.str();
}

ArithTables load_or_build_tables(const std::filesystem::path& dir, std::uint64_t limit,
                                 std::span<const int> k_list, const SieveLimits& caps) {
  const auto path = cache_path(dir, limit, k_list);
  if (std::filesystem::exists(path)) return load_tables(path);
  ArithTables t = build_tables(limit, k_list, caps);
  save_tables(t, path);
  return t;
}

}  // namespace rlab
