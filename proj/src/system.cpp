#include "fincds/system.hpp"

#include "fincds/errors.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace fincds {

int FinancialSystem::add_bank(const std::string& id, Rational external_assets) {
    if (external_assets < 0)
        throw Error(ErrorCode::MalformedContract, "negative external assets for bank '" + id + "'");
    auto it = index_.find(id);
    if (it != index_.end()) {
        externals_[it->second] += external_assets;
        return it->second;
    }
    int idx = static_cast<int>(ids_.size());
    ids_.push_back(id);
    externals_.push_back(std::move(external_assets));
    index_[id] = idx;
    return idx;
}

int FinancialSystem::bank_index(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error(ErrorCode::UnknownBank, "no bank with id '" + id + "'");
    return it->second;
}

void FinancialSystem::add_contract_indexed(int debtor, int creditor, int reference, Rational notional) {
    if (notional < 0) throw Error(ErrorCode::MalformedContract, "negative notional");
    int n = bank_count();
    if (debtor < 0 || debtor >= n || creditor < 0 || creditor >= n || reference >= n)
        throw Error(ErrorCode::UnknownBank, "contract endpoint out of range");
    contracts_.push_back(Contract{debtor, creditor, reference, std::move(notional)});
}

void FinancialSystem::add_debt(const std::string& debtor, const std::string& creditor, Rational notional) {
    add_contract_indexed(bank_index(debtor), bank_index(creditor), -1, std::move(notional));
}

void FinancialSystem::add_cds(const std::string& debtor, const std::string& creditor,
                              const std::string& reference, Rational notional) {
    add_contract_indexed(bank_index(debtor), bank_index(creditor), bank_index(reference),
                         std::move(notional));
}

FinancialSystem normalize_system(const FinancialSystem& sys) {
    FinancialSystem out;
    for (int i = 0; i < sys.bank_count(); ++i) out.add_bank(sys.bank_id(i), sys.external_assets(i));

    // Merge by (debtor, creditor, reference), keeping first-occurrence order.
    std::vector<Contract> merged;
    std::map<std::tuple<int, int, int>, std::size_t> slot;
    for (const Contract& c : sys.contracts()) {
        if (c.debtor == c.creditor)
            throw Error(ErrorCode::MalformedContract,
                        "self contract at bank '" + sys.bank_id(c.debtor) + "'");
        if (c.is_cds() && (c.reference == c.debtor || c.reference == c.creditor))
            throw Error(ErrorCode::MalformedContract,
                        "CDS participants not pairwise distinct at debtor '" + sys.bank_id(c.debtor) + "'");
        auto key = std::make_tuple(c.debtor, c.creditor, c.reference);
        auto it = slot.find(key);
        if (it == slot.end()) {
            slot[key] = merged.size();
            merged.push_back(c);
        } else {
            merged[it->second].notional += c.notional;
        }
    }
    for (Contract& c : merged)
        if (c.notional != 0) out.add_contract_indexed(c.debtor, c.creditor, c.reference, c.notional);
    return out;
}

NonDegeneracyReport check_nondegenerate(const FinancialSystem& sys) {
    std::set<int> debt_writers;
    std::set<int> cds_debtors;
    std::set<int> references;
    for (const Contract& c : sys.contracts()) {
        if (c.notional == 0) continue;
        if (c.is_cds()) {
            cds_debtors.insert(c.debtor);
            references.insert(c.reference);
        } else {
            debt_writers.insert(c.debtor);
        }
    }
    NonDegeneracyReport report;
    std::set<std::pair<int, int>> seen;
    for (int b : cds_debtors)
        if (sys.external_assets(b) == 0 && !debt_writers.count(b)) seen.insert({b, 1});
    for (int b : references)
        if (!debt_writers.count(b)) seen.insert({b, 2});
    report.violations.assign(seen.begin(), seen.end());
    report.ok = report.violations.empty();
    return report;
}

}  // namespace fincds
