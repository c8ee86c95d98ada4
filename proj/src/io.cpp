// SPDX-License-Identifier: Apache-2.0
#include "simolab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "simolab/errors.hpp"

namespace simo::io {

using nlohmann::json;

json matrix_to_json(const CMatrix& a)
{
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        json rr = json::array(), ri = json::array();
        for (Eigen::Index k = 0; k < a.cols(); ++k) {
            rr.push_back(a(i, k).real());
            ri.push_back(a(i, k).imag());
        }
        re.push_back(std::move(rr));
        im.push_back(std::move(ri));
    }
    return json{{"n", a.rows()}, {"q", a.cols()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

CMatrix matrix_from_json(const json& j)
{
    try {
        const int n = j.at("n").get<int>();
        const int q = j.at("q").get<int>();
        const json& re = j.at("re");
        const json& im = j.at("im");
        if (n < 1 || q < 1) fail(ErrorCode::io, "matrix dimensions must be positive");
        if (re.size() != static_cast<std::size_t>(n) || im.size() != static_cast<std::size_t>(n))
            fail(ErrorCode::io, "row count differs from n");
        CMatrix a(n, q);
        for (int i = 0; i < n; ++i) {
            if (re[i].size() != static_cast<std::size_t>(q) || im[i].size() != static_cast<std::size_t>(q))
                fail(ErrorCode::io, "column count differs from q");
            for (int k = 0; k < q; ++k) a(i, k) = cplx(re[i][k].get<double>(), im[i][k].get<double>());
        }
        return a;
    } catch (const json::exception& e) {
        fail(ErrorCode::io, std::string("malformed matrix JSON: ") + e.what());
    }
}

json vector_to_json(const CVector& v)
{
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        re.push_back(v[i].real());
        im.push_back(v[i].imag());
    }
    return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

CVector vector_from_json(const json& j)
{
    try {
        const json& re = j.at("re");
        const json& im = j.at("im");
        if (re.size() != im.size()) fail(ErrorCode::io, "re/im length mismatch");
        CVector v(static_cast<Eigen::Index>(re.size()));
        for (std::size_t i = 0; i < re.size(); ++i) v[static_cast<Eigen::Index>(i)] = cplx(re[i].get<double>(), im[i].get<double>());
        return v;
    } catch (const json::exception& e) {
        fail(ErrorCode::io, std::string("malformed vector JSON: ") + e.what());
    }
}

json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorCode::io, path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

CovarianceFactor read_covariance(const std::filesystem::path& path)
{
    return CovarianceFactor::from_matrix(matrix_from_json(read_json(path)));
}

void write_covariance(const std::filesystem::path& path, const CovarianceFactor& a)
{
    write_text(path, matrix_to_json(a.matrix()).dump(2) + "\n");
}

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

} // namespace simo::io
