#include <hsvd/csv.hpp>
#include <hsvd/metrics.hpp>

namespace hsvd {

void write_comparison_row(std::ostream& out, const ComparisonReport& r) {
  out << (CsvRow() << static_cast<std::int64_t>(r.k) << r.e_sigma << r.e_vec << r.vectors_well_separated
                   << r.max_angle() << r.procrustes_residual << r.bound_value << r.bound_satisfied);
}

}  // namespace hsvd
