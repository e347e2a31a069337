#pragma once

#include "fincds/rational.hpp"

#include <map>
#include <string>
#include <vector>

namespace fincds {

/// A debt contract (reference < 0) or a CDS (reference is a bank index).
/// A CDS obliges the debtor to pay the creditor (1 - r_reference) times the
/// notional.
struct Contract {
    int debtor = -1;
    int creditor = -1;
    int reference = -1;
    Rational notional;

    bool is_cds() const { return reference >= 0; }
};

/// Banks with external assets plus the contract list. Bank ids are opaque
/// strings; the dense index order is the insertion order.
class FinancialSystem {
  public:
    int add_bank(const std::string& id, Rational external_assets = Rational(0));
    void add_debt(const std::string& debtor, const std::string& creditor, Rational notional);
    void add_cds(const std::string& debtor, const std::string& creditor, const std::string& reference,
                 Rational notional);
    void add_contract_indexed(int debtor, int creditor, int reference, Rational notional);

    int bank_count() const { return static_cast<int>(ids_.size()); }
    const std::vector<std::string>& bank_ids() const { return ids_; }
    const std::string& bank_id(int index) const { return ids_.at(index); }
    int bank_index(const std::string& id) const;  // throws UnknownBank
    bool has_bank(const std::string& id) const { return index_.count(id) > 0; }

    const Rational& external_assets(int index) const { return externals_.at(index); }
    void set_external_assets(int index, Rational e) { externals_.at(index) = std::move(e); }
    const std::vector<Contract>& contracts() const { return contracts_; }

  private:
    std::vector<std::string> ids_;
    std::vector<Rational> externals_;
    std::vector<Contract> contracts_;
    std::map<std::string, int> index_;
};

/// Merges duplicate contracts on the same (debtor, creditor) pair or
/// (debtor, creditor, reference) triple by summing notionals and drops
/// zero-notional contracts. Rejects self-contracts and CDSes whose three
/// participants are not pairwise distinct.
FinancialSystem normalize_system(const FinancialSystem& sys);

struct NonDegeneracyReport {
    bool ok = true;
    // (bank index, violated condition): 1 = CDS debtor with zero external
    // assets and no debt obligation, 2 = reference bank with no debt
    // obligation.
    std::vector<std::pair<int, int>> violations;
};

/// Both structural conditions for non-degeneracy: every CDS debtor has
/// positive external assets or writes a positive-notional debt contract,
/// and every reference bank writes a positive-notional debt contract.
NonDegeneracyReport check_nondegenerate(const FinancialSystem& sys);

}  // namespace fincds
