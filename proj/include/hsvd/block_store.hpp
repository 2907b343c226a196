#pragma once

// Column-block decomposition A = [A^1 | ... | A^M] and the HSVDBLK1 file format.
//
// HSVDBLK1 layout (all little-endian):
//   bytes 0..7    magic "HSVDBLK1"
//   bytes 8..11   rows, uint32
//   bytes 12..15  cols, uint32
//   bytes 16..    rows*cols IEEE-754 binary64 values, column-major
//
// Manifest layout (UTF-8 text, one entry per line):
//   D=<rows>
//   N=<total cols>
//   M=<block count>
//   <path of block 1>
//   ...
//   <path of block M>
// Relative block paths are resolved against the manifest's directory.

#include <hsvd/matrix_core.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace hsvd {

inline constexpr std::string_view kBlockMagic = "HSVDBLK1";
inline constexpr std::size_t kBlockHeaderBytes = 16;

struct BlockHeader {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
};

void write_block(std::ostream& out, const MatrixXd& m);
MatrixXd read_block(std::istream& in);

void write_block(const std::filesystem::path& path, const MatrixXd& m);
MatrixXd read_block(const std::filesystem::path& path);
BlockHeader read_block_header(const std::filesystem::path& path);

/// Balanced widths: the first N mod m blocks get ceil(N/m) columns, the rest floor(N/m).
std::vector<Eigen::Index> balanced_widths(Eigen::Index n_cols, Eigen::Index m);

/// An ordered list of D-row column blocks, held in memory or as HSVDBLK1 files.
///
/// File-backed blocks are read on demand by load(); nothing is cached, so a
/// set whose total size exceeds memory can still be processed one block at a
/// time. Immutable after construction; load() may be called concurrently.
class BlockSet {
 public:
  static BlockSet in_memory(std::vector<MatrixXd> blocks);
  static BlockSet from_files(Eigen::Index rows, std::vector<std::filesystem::path> paths);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return offsets_.back(); }
  Eigen::Index size() const { return static_cast<Eigen::Index>(widths_.size()); }
  bool file_backed() const { return !paths_.empty(); }

  const std::vector<Eigen::Index>& widths() const { return widths_; }
  Eigen::Index width(Eigen::Index i) const { return widths_.at(static_cast<std::size_t>(i)); }
  /// First column of block i within A.
  Eigen::Index offset(Eigen::Index i) const { return offsets_.at(static_cast<std::size_t>(i)); }

  MatrixXd load(Eigen::Index i) const;
  const std::vector<std::filesystem::path>& paths() const { return paths_; }

 private:
  BlockSet() = default;
  void finish_layout();

  Eigen::Index rows_ = 0;
  std::vector<Eigen::Index> widths_;
  std::vector<Eigen::Index> offsets_;
  std::vector<MatrixXd> blocks_;
  std::vector<std::filesystem::path> paths_;
};

/// Splits `a` into m contiguous column blocks (balanced unless widths are given).
BlockSet partition(const MatrixXd& a, Eigen::Index m, const std::vector<Eigen::Index>& widths = {});

/// [A^1 | ... | A^M]
MatrixXd concatenate(const BlockSet& blocks);

struct Manifest {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<std::filesystem::path> block_paths;  // as written in the file
};

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

/// Writes every block as <dir>/block_<i>.bin plus <dir>/manifest.txt; returns the manifest path.
std::filesystem::path write_block_set(const std::filesystem::path& dir, const BlockSet& blocks);

/// Opens a manifest as a file-backed BlockSet, validating every block header.
BlockSet open_block_set(const std::filesystem::path& manifest_path);

}  // namespace hsvd
