#include <hsvd/block_store.hpp>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace hsvd {
namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(b.data(), b.size());
}

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(b.data(), b.size());
}

std::uint64_t le_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint32_t le_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

BlockHeader parse_header(std::istream& in) {
  std::array<unsigned char, kBlockHeaderBytes> h{};
  in.read(reinterpret_cast<char*>(h.data()), h.size());
  const auto got = static_cast<std::size_t>(in.gcount());
  // A short file whose prefix already disagrees with the magic is not ours at all.
  const std::size_t magic_seen = std::min(got, kBlockMagic.size() - 1);
  if (std::memcmp(h.data(), kBlockMagic.data(), magic_seen) != 0)
    throw Error(ErrorKind::BadMagic, "not an HSVDBLK file");
  if (got < kBlockHeaderBytes) throw Error(ErrorKind::TruncatedFile, "header shorter than 16 bytes");
  if (h[7] != static_cast<unsigned char>(kBlockMagic[7]))
    throw Error(ErrorKind::BadVersion, "unsupported HSVDBLK version byte");
  BlockHeader header{le_u32(h.data() + 8), le_u32(h.data() + 12)};
  if (header.rows == 0 || header.cols == 0) throw Error(ErrorKind::Empty, "block has a zero dimension");
  return header;
}

void check_dims(const MatrixXd& m) {
  require_nonempty(m, "block");
  if (m.rows() > 0xffffffffLL || m.cols() > 0xffffffffLL)
    throw Error(ErrorKind::InvalidArgument, "block dimension exceeds 32 bits");
}

}  // namespace

void write_block(std::ostream& out, const MatrixXd& m) {
  check_dims(m);
  if (!all_finite(m)) throw Error(ErrorKind::NonFinitePayload, "refusing to write NaN or Inf");
  out.write(kBlockMagic.data(), static_cast<std::streamsize>(kBlockMagic.size()));
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  const double* data = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(data[i]));
  if (!out) throw Error(ErrorKind::Io, "write failed");
}

MatrixXd read_block(std::istream& in) {
  const BlockHeader header = parse_header(in);
  const auto count = static_cast<std::size_t>(header.rows) * header.cols;
  std::vector<unsigned char> payload(count * 8);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(in.gcount()) != payload.size())
    throw Error(ErrorKind::TruncatedFile, "payload shorter than rows*cols*8 bytes");
  if (in.peek() != std::char_traits<char>::eof())
    throw Error(ErrorKind::TruncatedFile, "trailing bytes after payload");

  MatrixXd m(header.rows, header.cols);
  double* data = m.data();
  for (std::size_t i = 0; i < count; ++i) data[i] = std::bit_cast<double>(le_u64(payload.data() + 8 * i));
  if (!all_finite(m)) throw Error(ErrorKind::NonFinitePayload, "payload contains NaN or Inf");
  return m;
}

void write_block(const std::filesystem::path& path, const MatrixXd& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (path.empty() || !out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  write_block(out, m);
}

MatrixXd read_block(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (path.empty() || !in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return read_block(in);
}

BlockHeader read_block_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (path.empty() || !in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  const BlockHeader header = parse_header(in);
  const auto expected = kBlockHeaderBytes + 8ull * header.rows * header.cols;
  if (std::filesystem::file_size(path) != expected)
    throw Error(ErrorKind::TruncatedFile, "'" + path.string() + "' size disagrees with its header");
  return header;
}

std::vector<Eigen::Index> balanced_widths(Eigen::Index n_cols, Eigen::Index m) {
  if (m < 1 || m > n_cols) throw Error(ErrorKind::BadWidths, "block count must lie in [1, N]");
  std::vector<Eigen::Index> widths(static_cast<std::size_t>(m), n_cols / m);
  for (Eigen::Index i = 0; i < n_cols % m; ++i) ++widths[static_cast<std::size_t>(i)];
  return widths;
}

BlockSet BlockSet::in_memory(std::vector<MatrixXd> blocks) {
  if (blocks.empty()) throw Error(ErrorKind::BadWidths, "block set needs at least one block");
  BlockSet set;
  set.rows_ = blocks.front().rows();
  for (const auto& b : blocks) {
    require_nonempty(b, "block");
    if (b.rows() != set.rows_) throw Error(ErrorKind::RowMismatch, "blocks must share the row count");
    set.widths_.push_back(b.cols());
  }
  set.blocks_ = std::move(blocks);
  set.finish_layout();
  return set;
}

BlockSet BlockSet::from_files(Eigen::Index rows, std::vector<std::filesystem::path> paths) {
  if (paths.empty()) throw Error(ErrorKind::BadWidths, "block set needs at least one block");
  BlockSet set;
  set.rows_ = rows;
  for (const auto& p : paths) {
    const BlockHeader h = read_block_header(p);
    if (h.rows != rows) throw Error(ErrorKind::RowMismatch, "'" + p.string() + "' has the wrong row count");
    set.widths_.push_back(h.cols);
  }
  set.paths_ = std::move(paths);
  set.finish_layout();
  return set;
}

void BlockSet::finish_layout() {
  offsets_.assign(widths_.size() + 1, 0);
  std::partial_sum(widths_.begin(), widths_.end(), offsets_.begin() + 1);
}

MatrixXd BlockSet::load(Eigen::Index i) const {
  const auto k = static_cast<std::size_t>(i);
  if (i < 0 || k >= widths_.size()) throw Error(ErrorKind::InvalidArgument, "block index out of range");
  if (!file_backed()) return blocks_[k];
  MatrixXd m = read_block(paths_[k]);
  if (m.rows() != rows_ || m.cols() != widths_[k])
    throw Error(ErrorKind::RowMismatch, "'" + paths_[k].string() + "' changed shape since it was opened");
  return m;
}

BlockSet partition(const MatrixXd& a, Eigen::Index m, const std::vector<Eigen::Index>& widths) {
  require_nonempty(a, "matrix");
  std::vector<Eigen::Index> w = widths;
  if (w.empty()) {
    w = balanced_widths(a.cols(), m);
  } else {
    if (static_cast<Eigen::Index>(w.size()) != m)
      throw Error(ErrorKind::BadWidths, "width list length differs from block count");
    Eigen::Index sum = 0;
    for (auto x : w) {
      if (x <= 0) throw Error(ErrorKind::BadWidths, "block widths must be positive");
      sum += x;
    }
    if (sum != a.cols()) throw Error(ErrorKind::BadWidths, "block widths do not sum to N");
  }
  std::vector<MatrixXd> blocks;
  blocks.reserve(w.size());
  Eigen::Index col = 0;
  for (auto x : w) {
    blocks.emplace_back(a.middleCols(col, x));
    col += x;
  }
  return BlockSet::in_memory(std::move(blocks));
}

MatrixXd concatenate(const BlockSet& blocks) {
  MatrixXd a(blocks.rows(), blocks.cols());
  for (Eigen::Index i = 0; i < blocks.size(); ++i) a.middleCols(blocks.offset(i), blocks.width(i)) = blocks.load(i);
  return a;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << "D=" << manifest.rows << '\n'
      << "N=" << manifest.cols << '\n'
      << "M=" << manifest.block_paths.size() << '\n';
  for (const auto& p : manifest.block_paths) out << p.generic_string() << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open manifest '" + path.string() + "'");
  auto field = [&](std::string_view key) -> Eigen::Index {
    std::string line;
    if (!std::getline(in, line) || line.rfind(std::string(key) + "=", 0) != 0)
      throw Error(ErrorKind::BadManifest, "expected '" + std::string(key) + "=' line");
    try {
      std::size_t used = 0;
      const long long v = std::stoll(line.substr(key.size() + 1), &used);
      if (used != line.size() - key.size() - 1 || v <= 0) throw std::invalid_argument("range");
      return static_cast<Eigen::Index>(v);
    } catch (const std::exception&) {
      throw Error(ErrorKind::BadManifest, "bad value in '" + line + "'");
    }
  };
  Manifest m;
  m.rows = field("D");
  m.cols = field("N");
  const Eigen::Index count = field("M");
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    m.block_paths.emplace_back(line);
  }
  if (static_cast<Eigen::Index>(m.block_paths.size()) != count)
    throw Error(ErrorKind::BadManifest, "manifest lists a different number of blocks than M");
  return m;
}

std::filesystem::path write_block_set(const std::filesystem::path& dir, const BlockSet& blocks) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + dir.string() + "'");
  Manifest manifest{blocks.rows(), blocks.cols(), {}};
  for (Eigen::Index i = 0; i < blocks.size(); ++i) {
    std::ostringstream name;
    name << "block_" << std::setw(5) << std::setfill('0') << i << ".bin";
    write_block(dir / name.str(), blocks.load(i));
    manifest.block_paths.emplace_back(name.str());
  }
  const auto path = dir / "manifest.txt";
  write_manifest(path, manifest);
  return path;
}

BlockSet open_block_set(const std::filesystem::path& manifest_path) {
  const Manifest m = read_manifest(manifest_path);
  const auto base = manifest_path.parent_path();
  std::vector<std::filesystem::path> paths;
  for (const auto& p : m.block_paths) paths.push_back(p.is_absolute() ? p : base / p);
  BlockSet set = BlockSet::from_files(m.rows, std::move(paths));
  if (set.cols() != m.cols) throw Error(ErrorKind::BadWidths, "block widths do not sum to the manifest's N");
  return set;
}

}  // namespace hsvd
