// SPDX-License-Identifier: Apache-2.0
#include "simolab/linalg.hpp"

#include <cmath>
#include <limits>

#include "simolab/errors.hpp"

namespace simo {

double Determinant::abs() const { return singular ? 0.0 : std::exp(log_abs); }

cplx Determinant::value() const { return singular ? cplx{0.0, 0.0} : phase * std::exp(log_abs); }

Determinant lu_determinant(const CMatrix& m)
{
    require(m.rows() == m.cols(), ErrorCode::dimension_mismatch, "determinant of a non-square matrix");
    Determinant d;
    if (m.rows() == 0) return d;
    const Eigen::PartialPivLU<CMatrix> lu(m);
    const CMatrix& f = lu.matrixLU();
    d.phase = cplx(static_cast<double>(lu.permutationP().determinant()), 0.0);
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
        const cplx p = f(i, i);
        const double a = std::abs(p);
        if (a == 0.0) {
            d.singular = true;
            d.log_abs = -std::numeric_limits<double>::infinity();
            d.phase = 0.0;
            return d;
        }
        d.log_abs += std::log(a);
        d.phase *= p / a;
    }
    return d;
}

double condition_number(const CMatrix& m)
{
    if (m.size() == 0) return std::numeric_limits<double>::infinity();
    const Eigen::JacobiSVD<CMatrix> svd(m);
    const auto& s = svd.singularValues();
    const double lo = s[s.size() - 1];
    if (lo == 0.0 || m.rows() < m.cols()) return std::numeric_limits<double>::infinity();
    return s[0] / lo;
}

bool has_full_column_rank(const CMatrix& m, double tol)
{
    if (m.rows() < m.cols() || m.cols() == 0) return false;
    const Eigen::JacobiSVD<CMatrix> svd(m);
    const auto& s = svd.singularValues();
    return s[s.size() - 1] > tol * s[0];
}

} // namespace simo
