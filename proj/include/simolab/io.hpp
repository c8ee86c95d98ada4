// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "simolab/model.hpp"
#include "simolab/types.hpp"

namespace simo::io {

// {"n": int, "q": int, "re": [[..]], "im": [[..]]}
nlohmann::json matrix_to_json(const CMatrix& a);
CMatrix matrix_from_json(const nlohmann::json& j);

// {"re": [..], "im": [..]}
nlohmann::json vector_to_json(const CVector& v);
CVector vector_from_json(const nlohmann::json& j);

CovarianceFactor read_covariance(const std::filesystem::path& path);
void write_covariance(const std::filesystem::path& path, const CovarianceFactor& a);

nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

// 17 significant digits, '.' separator, no locale.
std::string format_double(double v);

} // namespace simo::io
