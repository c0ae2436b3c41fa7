#include "newsgraph/core/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "newsgraph/core/errors.hpp"

namespace newsgraph {

namespace {

template <typename T>
T parse_number(std::string_view text, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError(std::string("bad ") + what + ": '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_votes(std::ostream& out, const VoteMatrix& votes) {
  out << "users=" << votes.num_users() << " edges=" << votes.num_edges() << '\n';
  for (const auto& e : votes.entries()) {
    out << e.user << ',' << e.edge << ',' << to_int(e.value) << '\n';
  }
}

VoteMatrix read_votes(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("vote file is empty");
  std::size_t users = 0, edges = 0;
  {
    std::string_view header(line);
    const auto space = header.find(' ');
    if (header.substr(0, 6) != "users=" || space == std::string_view::npos ||
        header.substr(space + 1, 6) != "edges=") {
      throw FormatError("vote file header must be 'users=<n> edges=<m>'");
    }
    users = parse_number<std::size_t>(header.substr(6, space - 6), "user count");
    edges = parse_number<std::size_t>(header.substr(space + 7), "edge count");
  }
  std::vector<VoteEntry> entries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 3) throw FormatError("vote record must have 3 fields: " + line);
    entries.push_back({parse_number<std::uint32_t>(f[0], "user index"),
                       parse_number<std::uint32_t>(f[1], "edge index"),
                       vote_from_int(parse_number<int>(f[2], "vote value"))});
  }
  return VoteMatrix(users, edges, std::move(entries));
}

void write_votes(const std::filesystem::path& path, const VoteMatrix& votes) {
  auto out = open_out(path);
  write_votes(out, votes);
}

VoteMatrix read_votes(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_votes(in);
}

void write_stakes(std::ostream& out, const StakeLedger& ledger) {
  auto stakes = ledger.stakes();
  for (std::size_t i = 0; i < stakes.size(); ++i) {
    if (stakes[i] != Fixed{}) out << i << ',' << stakes[i].raw() << '\n';
  }
}

StakeLedger read_stakes(std::istream& in, std::size_t num_users) {
  StakeLedger ledger(num_users);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 2) throw FormatError("stake record must have 2 fields: " + line);
    ledger.set_stake(parse_number<std::size_t>(f[0], "user index"),
                     Fixed::from_raw(parse_number<std::int64_t>(f[1], "stake raw")));
  }
  return ledger;
}

void write_stakes(const std::filesystem::path& path, const StakeLedger& ledger) {
  auto out = open_out(path);
  write_stakes(out, ledger);
}

StakeLedger read_stakes(const std::filesystem::path& path, std::size_t num_users) {
  auto in = open_in(path);
  return read_stakes(in, num_users);
}

std::string read_text_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

}  // namespace newsgraph
