#include <boost/crc.hpp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "l1sq/error.hpp"
#include "l1sq/parallel.hpp"
#include "l1sq/search.hpp"

namespace l1sq {
namespace {

constexpr char kIndexMagic[6] = {'L', '1', 'I', 'X', '1', '\0'};
constexpr unsigned char kIndexVersion = 1;

}  // namespace

std::uint64_t crc64(std::string_view bytes) {
  // CRC-64/XZ: reflected ECMA-182 polynomial, all-ones init and xorout.
  boost::crc_optimal<64, 0x42F0E1EBA9EA3693ull, ~0ull, ~0ull, true, true> crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

void write_index(std::ostream& out, const SearchIndex& index) {
  std::ostringstream payload(std::ios::binary);
  payload.write(kIndexMagic, sizeof(kIndexMagic));
  payload.put(static_cast<char>(kIndexVersion));
  const ProjectionPool& pool = index.pool();
  for (std::uint64_t v : {static_cast<std::uint64_t>(pool.k), static_cast<std::uint64_t>(pool.d),
                          static_cast<std::uint64_t>(pool.ambient_dim),
                          static_cast<std::uint64_t>(index.size()),
                          static_cast<std::uint64_t>(index.rank()), pool.master_seed.value}) {
    detail::write_u64_le(payload, v);
  }
  for (const std::string& label : index.labels()) {
    detail::write_u64_le(payload, label.size());
    payload.write(label.data(), static_cast<std::streamsize>(label.size()));
  }
  for (const Subspace& s : index.subspaces()) write_dmat(payload, s.basis());
  for (std::size_t j = 0; j < pool.k; ++j)
    for (std::size_t i = 0; i < index.size(); ++i) write_dmat(payload, index.projected(j, i));

  const std::string bytes = std::move(payload).str();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  detail::write_u64_le(out, crc64(bytes));
  if (!out) throw Error(ErrorCode::kIoError, "failed writing index");
}

SearchIndex read_index(std::istream& in, std::size_t threads) {
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::istringstream s(bytes, std::ios::binary);

  char magic[sizeof(kIndexMagic)];
  if (!s.read(magic, sizeof(magic)) || std::memcmp(magic, kIndexMagic, sizeof(magic)) != 0) {
    throw Error(ErrorCode::kFormatError, "bad L1IX1 magic");
  }
  const int version = s.get();
  if (version != kIndexVersion) {
    throw Error(ErrorCode::kFormatError, "unsupported index version " + std::to_string(version));
  }
  const std::uint64_t k = detail::read_u64_le(s);
  const std::uint64_t d = detail::read_u64_le(s);
  const std::uint64_t dim = detail::read_u64_le(s);
  const std::uint64_t n = detail::read_u64_le(s);
  const std::uint64_t r = detail::read_u64_le(s);
  const Seed master{detail::read_u64_le(s)};
  // Every DMAT1 block takes at least 22 bytes, so counts beyond the file
  // size are malformed.
  if (k == 0 || d == 0 || dim == 0 || n == 0 || r == 0 || n > bytes.size() ||
      k * n > bytes.size()) {
    throw Error(ErrorCode::kFormatError, "implausible index header");
  }

  std::vector<std::string> labels(n);
  for (std::string& label : labels) {
    const std::uint64_t len = detail::read_u64_le(s);
    if (len > bytes.size()) throw Error(ErrorCode::kFormatError, "label length");
    label.resize(len);
    if (!s.read(label.data(), static_cast<std::streamsize>(len))) {
      throw Error(ErrorCode::kFormatError, "truncated label");
    }
  }
  std::vector<Subspace> subspaces;
  subspaces.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    DenseMatrix basis = read_dmat(s);
    if (basis.rows() != dim || basis.cols() != r) {
      throw Error(ErrorCode::kFormatError, "ambient basis shape");
    }
    subspaces.push_back(Subspace::from_orthonormal(std::move(basis), 1e-8));
  }
  std::vector<std::vector<DenseMatrix>> projected(k, std::vector<DenseMatrix>(n));
  for (auto& row : projected) {
    for (DenseMatrix& m : row) {
      m = read_dmat(s);
      if (m.rows() != d || m.cols() != r) {
        throw Error(ErrorCode::kFormatError, "projected basis shape");
      }
    }
  }
  const auto payload_end = static_cast<std::size_t>(s.tellg());
  const std::uint64_t stored = detail::read_u64_le(s);
  if (s.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::kFormatError, "trailing bytes after checksum");
  }
  if (crc64(std::string_view(bytes).substr(0, payload_end)) != stored) {
    throw Error(ErrorCode::kChecksumMismatch, "index checksum mismatch");
  }

  ProjectionPool pool = ProjectionPool::generate(k, d, dim, master, threads);
  return SearchIndex(std::move(pool), std::move(subspaces), std::move(labels),
                     std::move(projected));
}

void save_index(const SearchIndex& index, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  write_index(out, index);
}

SearchIndex load_index(const std::filesystem::path& path, std::size_t threads) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_index(in, threads);
}

double projection_consistency_error(const SearchIndex& index) {
  double worst = 0.0;
  for (std::size_t j = 0; j < index.pool().k; ++j) {
    for (std::size_t i = 0; i < index.size(); ++i) {
      const DenseMatrix fresh = matmul(index.pool().matrices[j], index.subspaces()[i].basis());
      const auto stored = index.projected(j, i).values();
      for (std::size_t e = 0; e < stored.size(); ++e) {
        worst = std::max(worst, std::abs(stored[e] - fresh.values()[e]));
      }
    }
  }
  return worst;
}

}  // namespace l1sq
