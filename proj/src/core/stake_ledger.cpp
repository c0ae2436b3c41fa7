#include "newsgraph/core/stake_ledger.hpp"

#include "newsgraph/core/errors.hpp"

namespace newsgraph {

StakeLedger StakeLedger::uniform(std::size_t num_users, Fixed stake) {
  StakeLedger ledger(num_users);
  for (std::size_t i = 0; i < num_users; ++i) ledger.set_stake(i, stake);
  return ledger;
}

void StakeLedger::set_stake(std::size_t user, Fixed amount) {
  if (user >= stakes_.size()) throw DomainError("stake: user index out of range");
  if (amount <= Fixed{} || amount > max_stake()) {
    throw DomainError("stake must be in (0, 5] tokens, got " + amount.to_string());
  }
  stakes_[user] = amount;
}

Fixed StakeLedger::stake(std::size_t user) const {
  if (user >= stakes_.size()) throw DomainError("stake: user index out of range");
  return stakes_[user];
}

void StakeLedger::mint(const std::string& account, Tokens amount) {
  if (amount < Tokens{}) throw DomainError("cannot mint a negative amount");
  balances_[account] += amount;
  minted_ += amount;
}

void StakeLedger::transfer(const std::string& from, const std::string& to, Tokens amount) {
  if (amount < Tokens{}) throw DomainError("cannot transfer a negative amount");
  if (balance(from) < amount) {
    throw DomainError("insufficient balance in account '" + from + "'");
  }
  balances_[from] -= amount;
  balances_[to] += amount;
}

Tokens StakeLedger::balance(const std::string& account) const {
  auto it = balances_.find(account);
  return it == balances_.end() ? Tokens{} : it->second;
}

Tokens StakeLedger::total_supply() const {
  Tokens sum;
  for (const auto& [_, amount] : balances_) sum += amount;
  return sum;
}

std::string StakeLedger::escrow_account(const std::string& actor, BondKind kind) {
  switch (kind) {
    case BondKind::Solver: return "bond/solver/" + actor;
    case BondKind::Attester: return "bond/attester/" + actor;
    case BondKind::Deposit: return "deposit/" + actor;
  }
  return "bond/?/" + actor;
}

void StakeLedger::post_bond(const std::string& actor, BondKind kind, Tokens amount) {
  transfer(actor, escrow_account(actor, kind), amount);
}

Tokens StakeLedger::bond(const std::string& actor, BondKind kind) const {
  return balance(escrow_account(actor, kind));
}

Tokens StakeLedger::forfeit_bond(const std::string& actor, BondKind kind,
                                 const std::string& beneficiary) {
  const Tokens amount = bond(actor, kind);
  transfer(escrow_account(actor, kind), beneficiary, amount);
  return amount;
}

void StakeLedger::release_bond(const std::string& actor, BondKind kind) {
  transfer(escrow_account(actor, kind), actor, bond(actor, kind));
}

}  // namespace newsgraph
