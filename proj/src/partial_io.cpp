#include <hsvd/csv.hpp>
#include <hsvd/partial_io.hpp>

#include <fstream>
#include <string>

namespace hsvd {
namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

}  // namespace

void save_partial(const std::filesystem::path& stem, const PartialSVDd& part) {
  write_block(with_suffix(stem, ".bin"), scaled_left(part.factors));
  std::ofstream meta(with_suffix(stem, ".meta"), std::ios::trunc);
  if (!meta) throw Error(ErrorKind::Io, "cannot write '" + stem.string() + ".meta'");
  meta << "first=" << part.source.first << '\n' << "width=" << part.source.width << '\n' << "sigma=";
  for (Eigen::Index j = 0; j < part.factors.rank(); ++j) meta << (j ? "," : "") << format_double(part.factors.sigma(j));
  meta << '\n';
  if (!meta) throw Error(ErrorKind::Io, "write failed for '" + stem.string() + ".meta'");
}

PartialSVDd load_partial(const std::filesystem::path& stem) {
  const MatrixXd scaled = read_block(with_suffix(stem, ".bin"));
  std::ifstream meta(with_suffix(stem, ".meta"));
  if (!meta) throw Error(ErrorKind::Io, "cannot open '" + stem.string() + ".meta'");

  PartialSVDd part;
  std::vector<double> sigma;
  bool have_first = false, have_width = false, have_sigma = false;
  std::string line;
  while (std::getline(meta, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "first") {
      part.source.first = static_cast<Eigen::Index>(parse_int(value));
      have_first = true;
    } else if (key == "width") {
      part.source.width = static_cast<Eigen::Index>(parse_int(value));
      have_width = true;
    } else if (key == "sigma") {
      sigma = parse_double_list(value);
      have_sigma = true;
    }
  }
  if (!have_first || !have_width || !have_sigma)
    throw Error(ErrorKind::BadManifest, "'" + stem.string() + ".meta' is missing first, width or sigma");
  if (static_cast<Eigen::Index>(sigma.size()) != scaled.cols())
    throw Error(ErrorKind::ShapeMismatch, "sigma count differs from stored columns");

  auto& f = part.factors;
  f.sigma = Eigen::Map<const VectorXd>(sigma.data(), static_cast<Eigen::Index>(sigma.size()));
  f.u = scaled;
  for (Eigen::Index j = 0; j < f.u.cols(); ++j)
    if (f.sigma(j) > 0.0) f.u.col(j) /= f.sigma(j);
  f.rank_hint = numerical_rank(f.sigma);
  return part;
}

}  // namespace hsvd
