#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "newsgraph/core/fixed_point.hpp"

namespace newsgraph {

using Tokens = Fixed;

enum class BondKind { Solver, Attester, Deposit };

/// Per-user stakes plus a token ledger of named accounts.
///
/// Every movement of tokens is a transfer between two accounts, so the sum of
/// all balances always equals the total minted. Bonds, deposits and locked
/// stakes live in escrow accounts named after their owner.
class StakeLedger {
 public:
  static Fixed max_stake() { return Fixed::from_int(5); }

  StakeLedger() = default;
  explicit StakeLedger(std::size_t num_users) : stakes_(num_users) {}
  static StakeLedger uniform(std::size_t num_users, Fixed stake);

  std::size_t num_users() const { return stakes_.size(); }
  /// Requires 0 < amount <= 5.
  void set_stake(std::size_t user, Fixed amount);
  /// Zero for users that never staked.
  Fixed stake(std::size_t user) const;
  std::span<const Fixed> stakes() const { return stakes_; }

  void mint(const std::string& account, Tokens amount);
  /// Throws DomainError on a negative amount or insufficient balance.
  void transfer(const std::string& from, const std::string& to, Tokens amount);
  Tokens balance(const std::string& account) const;
  Tokens total_supply() const;
  Tokens minted() const { return minted_; }
  const std::map<std::string, Tokens>& accounts() const { return balances_; }

  void post_bond(const std::string& actor, BondKind kind, Tokens amount);
  Tokens bond(const std::string& actor, BondKind kind) const;
  /// Moves the whole bond to `beneficiary`; returns the amount moved.
  Tokens forfeit_bond(const std::string& actor, BondKind kind,
                      const std::string& beneficiary);
  void release_bond(const std::string& actor, BondKind kind);

  static std::string escrow_account(const std::string& actor, BondKind kind);

 private:
  std::vector<Fixed> stakes_;
  std::map<std::string, Tokens> balances_;
  Tokens minted_;
};

}  // namespace newsgraph
