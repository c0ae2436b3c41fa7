#pragma once

#include <filesystem>
#include <string>

#include "newsgraph/core/matrix.hpp"
#include "newsgraph/sbsvd/sbsvd.hpp"

namespace newsgraph::sbsvd {

// Factor dump: 8-byte magic "NGFIXQ32", u32 rows, u32 cols (big-endian),
// then rows*cols big-endian int64 raw values in row-major order.
inline constexpr char kFactorMagic[8] = {'N', 'G', 'F', 'I', 'X', 'Q', '3', '2'};

std::string encode_factors(const FixedMatrix& m);
FixedMatrix decode_factors(const std::string& bytes);
void write_factors(const std::filesystem::path& path, const FixedMatrix& m);
FixedMatrix read_factors(const std::filesystem::path& path);

/// JSON with hyperparameters, lambda and rsbe as raw integers, and the
/// per-epoch float trace.
std::string report_to_json(const TrainReport& report);

}  // namespace newsgraph::sbsvd
