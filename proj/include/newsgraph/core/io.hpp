#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "newsgraph/core/stake_ledger.hpp"
#include "newsgraph/core/vote_matrix.hpp"

namespace newsgraph {

// Vote file:   "users=<n> edges=<m>\n" followed by "user,edge,value\n" rows.
// Stake file:  "user,stakeRaw\n" rows, stakeRaw being the Q31.32 raw integer.

void write_votes(std::ostream& out, const VoteMatrix& votes);
VoteMatrix read_votes(std::istream& in);
void write_votes(const std::filesystem::path& path, const VoteMatrix& votes);
VoteMatrix read_votes(const std::filesystem::path& path);

void write_stakes(std::ostream& out, const StakeLedger& ledger);
/// Users missing from the file keep a zero stake.
StakeLedger read_stakes(std::istream& in, std::size_t num_users);
void write_stakes(const std::filesystem::path& path, const StakeLedger& ledger);
StakeLedger read_stakes(const std::filesystem::path& path, std::size_t num_users);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace newsgraph
