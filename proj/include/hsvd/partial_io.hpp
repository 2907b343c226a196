#pragma once

// Stored partial SVDs, so that later blocks can be merged into an earlier run.
//
// <stem>.bin   HSVDBLK1 matrix U*diag(sigma), D x k
// <stem>.meta  text: "first=<col>", "width=<cols>", "sigma=<s1>,<s2>,..."

#include <hsvd/merge_engine.hpp>

#include <filesystem>

namespace hsvd {

void save_partial(const std::filesystem::path& stem, const PartialSVDd& part);
PartialSVDd load_partial(const std::filesystem::path& stem);

}  // namespace hsvd
