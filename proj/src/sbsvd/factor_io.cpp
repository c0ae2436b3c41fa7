#include "newsgraph/sbsvd/factor_io.hpp"

#include <cstring>
#include "json.hpp"

#include "newsgraph/core/errors.hpp"
#include "newsgraph/core/hash.hpp"
#include "newsgraph/core/io.hpp"

namespace newsgraph::sbsvd {

std::string encode_factors(const FixedMatrix& m) {
  std::string out(16 + 8 * m.size(), '\0');
  auto* p = reinterpret_cast<std::uint8_t*>(out.data());
  std::memcpy(p, kFactorMagic, 8);
  put_be32(p + 8, static_cast<std::uint32_t>(m.rows()));
  put_be32(p + 12, static_cast<std::uint32_t>(m.cols()));
  p += 16;
  for (Fixed x : m.values()) {
    put_be64(p, static_cast<std::uint64_t>(x.raw()));
    p += 8;
  }
  return out;
}

FixedMatrix decode_factors(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kFactorMagic, 8) != 0) {
    throw FormatError("not a factor dump (bad magic)");
  }
  const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data());
  const std::size_t rows = get_be32(p + 8);
  const std::size_t cols = get_be32(p + 12);
  if (bytes.size() != 16 + 8 * rows * cols) throw FormatError("factor dump has wrong length");
  std::vector<Fixed> data(rows * cols);
  p += 16;
  for (auto& x : data) {
    x = Fixed::from_raw(static_cast<std::int64_t>(get_be64(p)));
    p += 8;
  }
  return FixedMatrix(rows, cols, std::move(data));
}

void write_factors(const std::filesystem::path& path, const FixedMatrix& m) {
  write_text_file(path, encode_factors(m));
}

FixedMatrix read_factors(const std::filesystem::path& path) {
  return decode_factors(read_text_file(path));
}

std::string report_to_json(const TrainReport& report) {
  nlohmann::ordered_json j;
  j["k"] = report.params.k;
  j["beta"] = report.params.beta;
  j["gamma"] = report.params.gamma;
  j["epochs"] = report.params.epochs;
  j["seed"] = report.params.seed;
  j["lambda_raw"] = report.lambda.raw();
  j["rsbe_raw"] = report.rsbe.raw();
  j["rsbe"] = report.rsbe.to_double();
  j["epoch_errors"] = report.epoch_errors;
  return j.dump(2) + "\n";
}

}  // namespace newsgraph::sbsvd
