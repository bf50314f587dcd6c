//! Per-agent double-entry micro accounting.
//!
//! Each agent owns one [`Ledger`]: a chart of accounts plus an append-only
//! journal. Balances are maintained incrementally but are always
//! reproducible by folding the journal from scratch — the two views must
//! agree exactly, and tests enforce it.
//!
//! Conventions:
//!
//! * Asset and Expense accounts are debit-normal; Liability, Equity, and
//!   Revenue accounts are credit-normal. A balance on the wrong side is an
//!   error unless the account was opened as contra.
//! * The journal is append-only. Corrections are reversing entries; nothing
//!   is ever mutated or deleted.
//! * Entries on the same date keep their insertion order.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::money::{Currency, Money};

/// Owner of a ledger. Agent ids are short lowercase names from scenarios.
pub type OwnerId = String;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AccountId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EntryId(pub u64);

/// The five classical account kinds. Revenue and Expense close into Equity
/// when a balance sheet is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum AccountKind {
    Asset,
    Liability,
    Equity,
    Revenue,
    Expense,
}

impl AccountKind {
    pub fn is_debit_normal(&self) -> bool {
        matches!(self, AccountKind::Asset | AccountKind::Expense)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            AccountKind::Asset => "asset",
            AccountKind::Liability => "liability",
            AccountKind::Equity => "equity",
            AccountKind::Revenue => "revenue",
            AccountKind::Expense => "expense",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "asset" => AccountKind::Asset,
            "liability" => AccountKind::Liability,
            "equity" => AccountKind::Equity,
            "revenue" => AccountKind::Revenue,
            "expense" => AccountKind::Expense,
            _ => return None,
        })
    }
}

/// Who is on the other side of a claim account.
///
/// `Agent` claims enter the pairwise debt check directly. `BillHolder`
/// resolves through the bill registry to the current holder (the debtor of a
/// negotiable instrument owes the bearer, whoever that is). `Depositors`
/// marks a bank's pooled deposit liability, checked against the sum of all
/// customer deposit assets at that bank. `NoteBearers` marks the central
/// bank's banknote register in a gold-based system.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Counterparty {
    Agent(OwnerId),
    BillHolder(u64),
    Depositors,
    NoteBearers,
}

/// How an account participates in money flows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum MoneyRole {
    /// Not money: products, claims, equity, revenue, expense.
    None,
    /// Physical cash (banknotes) held by the agent.
    Cash,
    /// A deposit held as an asset ("money" as a command over money).
    Deposit,
    /// A bank's pooled deposit liability; issuing it pays, redeeming it receives.
    DepositPool,
}

/// Claim classification used by the debt-invariance breakdown and the
/// lifecycle reconciliation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ClaimCategory {
    Trade,
    Loan,
    Interbank,
    Boe,
    Restitution,
    DepositMoney,
    BearerNotes,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Account {
    pub id: AccountId,
    pub owner: OwnerId,
    pub name: String,
    pub kind: AccountKind,
    pub counterparty: Option<Counterparty>,
    /// True when the balance is someone's legal claim; false for registers
    /// like the central bank's circulating-money account.
    pub claim: bool,
    /// Contra accounts may carry an abnormal-side balance.
    pub contra: bool,
    pub money_role: MoneyRole,
    pub category: Option<ClaimCategory>,
}

/// Specification for opening an account.
#[derive(Debug, Clone)]
pub struct AccountSpec {
    pub name: String,
    pub kind: AccountKind,
    pub counterparty: Option<Counterparty>,
    pub claim: bool,
    pub contra: bool,
    pub money_role: MoneyRole,
    pub category: Option<ClaimCategory>,
}

impl AccountSpec {
    /// Plain account: no counterparty, no claim, not money.
    pub fn plain(name: &str, kind: AccountKind) -> Self {
        AccountSpec {
            name: name.to_string(),
            kind,
            counterparty: None,
            claim: false,
            contra: false,
            money_role: MoneyRole::None,
            category: None,
        }
    }

    pub fn counterparty(mut self, cp: Counterparty) -> Self {
        self.counterparty = Some(cp);
        self
    }

    pub fn claim(mut self, category: ClaimCategory) -> Self {
        self.claim = true;
        self.category = Some(category);
        self
    }

    pub fn contra(mut self) -> Self {
        self.contra = true;
        self
    }

    pub fn money(mut self, role: MoneyRole) -> Self {
        self.money_role = role;
        self
    }
}

/// One immutable journal line: a debit and a credit within a single agent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JournalEntry {
    pub id: EntryId,
    pub date: NaiveDate,
    pub debit: AccountId,
    pub credit: AccountId,
    pub amount: Money,
    pub memo: String,
    pub contract_ref: Option<u64>,
    pub macro_ref: Option<u64>,
}

/// The balance sheet of one agent at a date. Revenue and expense are folded
/// into equity. `assets = liabilities + equity` holds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BalanceSheet {
    pub assets: i64,
    pub liabilities: i64,
    pub equity: i64,
}

impl BalanceSheet {
    pub fn is_zero(&self) -> bool {
        self.assets == 0 && self.liabilities == 0 && self.equity == 0
    }
}

/// A per-agent double-entry ledger.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ledger {
    pub owner: OwnerId,
    accounts: BTreeMap<AccountId, Account>,
    names: BTreeMap<String, AccountId>,
    journal: Vec<JournalEntry>,
    /// Incremental (debit_total, credit_total) per account.
    totals: BTreeMap<AccountId, (i64, i64)>,
}

impl Ledger {
    pub fn new(owner: OwnerId) -> Self {
        Ledger {
            owner,
            accounts: BTreeMap::new(),
            names: BTreeMap::new(),
            journal: Vec::new(),
            totals: BTreeMap::new(),
        }
    }

    /// Opens an account with a caller-assigned id. Names are unique per owner.
    pub fn open_account(&mut self, id: AccountId, spec: AccountSpec) -> Result<AccountId> {
        if self.names.contains_key(&spec.name) {
            return Err(Error::DuplicateAccount {
                agent: self.owner.clone(),
                name: spec.name,
            });
        }
        let account = Account {
            id,
            owner: self.owner.clone(),
            name: spec.name.clone(),
            kind: spec.kind,
            counterparty: spec.counterparty,
            claim: spec.claim,
            contra: spec.contra,
            money_role: spec.money_role,
            category: spec.category,
        };
        self.names.insert(spec.name, id);
        self.accounts.insert(id, account);
        self.totals.insert(id, (0, 0));
        Ok(id)
    }

    pub fn account(&self, id: AccountId) -> Option<&Account> {
        self.accounts.get(&id)
    }

    pub fn account_by_name(&self, name: &str) -> Option<&Account> {
        self.names.get(name).and_then(|id| self.accounts.get(id))
    }

    pub fn accounts(&self) -> impl Iterator<Item = &Account> {
        self.accounts.values()
    }

    pub fn journal(&self) -> &[JournalEntry] {
        &self.journal
    }

    /// Signed balance in the account's normal orientation: a debit-normal
    /// account reports debits minus credits, a credit-normal account the
    /// reverse. Normally non-negative; contra accounts may go negative.
    pub fn balance(&self, id: AccountId) -> i64 {
        let (d, c) = self.totals.get(&id).copied().unwrap_or((0, 0));
        let acct = &self.accounts[&id];
        if acct.kind.is_debit_normal() {
            d - c
        } else {
            c - d
        }
    }

    pub fn balance_by_name(&self, name: &str) -> i64 {
        match self.names.get(name) {
            Some(id) => self.balance(*id),
            None => 0,
        }
    }

    /// Posts one entry. Validates existence, positivity, distinct accounts,
    /// currency, and the normal-side rule; on any error nothing changes.
    pub fn post(
        &mut self,
        id: EntryId,
        date: NaiveDate,
        debit: AccountId,
        credit: AccountId,
        amount: Money,
        memo: String,
        contract_ref: Option<u64>,
        macro_ref: Option<u64>,
        system_currency: Currency,
    ) -> Result<EntryId> {
        if amount.amount <= 0 {
            return Err(Error::NonPositiveAmount);
        }
        if amount.currency != system_currency {
            return Err(Error::CurrencyMismatch(
                amount.currency.to_string(),
                system_currency.to_string(),
            ));
        }
        if debit == credit {
            return Err(Error::SameAccount);
        }
        for acct in [debit, credit] {
            if !self.accounts.contains_key(&acct) {
                return Err(Error::UnknownAccount {
                    agent: self.owner.clone(),
                    name: format!("#{}", acct.0),
                });
            }
        }
        // Simulate the new balances before committing.
        for (acct_id, is_debit) in [(debit, true), (credit, false)] {
            let (d, c) = self.totals[&acct_id];
            let (d, c) = if is_debit {
                (d.checked_add(amount.amount).ok_or(Error::AmountOverflow)?, c)
            } else {
                (d, c.checked_add(amount.amount).ok_or(Error::AmountOverflow)?)
            };
            let acct = &self.accounts[&acct_id];
            let normal = if acct.kind.is_debit_normal() { d - c } else { c - d };
            if normal < 0 && !acct.contra {
                return Err(Error::AbnormalBalance {
                    agent: self.owner.clone(),
                    account: acct.name.clone(),
                    balance: normal,
                });
            }
        }
        self.totals.get_mut(&debit).unwrap().0 += amount.amount;
        self.totals.get_mut(&credit).unwrap().1 += amount.amount;
        self.journal.push(JournalEntry {
            id,
            date,
            debit,
            credit,
            amount,
            memo,
            contract_ref,
            macro_ref,
        });
        Ok(id)
    }

    /// All accounts with their signed balance in debit orientation
    /// (debit-normal positive, credit-normal negative). The signed balances
    /// sum to zero — double-entry closure.
    pub fn trial_balance(&self) -> Vec<(&Account, i64)> {
        self.accounts
            .values()
            .map(|a| {
                let (d, c) = self.totals[&a.id];
                (a, d - c)
            })
            .collect()
    }

    /// Sum of all debits and credits ever posted; equal by construction and
    /// re-checked by the brute-force oracle in tests.
    pub fn journal_totals(&self) -> (i64, i64) {
        self.totals
            .values()
            .fold((0, 0), |(d, c), (ad, ac)| (d + ad, c + ac))
    }

    /// Balance sheet at `as_of`, computed by a from-scratch fold over the
    /// journal (entries dated after `as_of` are ignored). Revenue and
    /// expense fold into equity.
    pub fn balance_sheet(&self, as_of: NaiveDate) -> BalanceSheet {
        let mut totals: BTreeMap<AccountId, (i64, i64)> = BTreeMap::new();
        for e in &self.journal {
            if e.date > as_of {
                continue;
            }
            totals.entry(e.debit).or_insert((0, 0)).0 += e.amount.amount;
            totals.entry(e.credit).or_insert((0, 0)).1 += e.amount.amount;
        }
        let mut assets = 0i64;
        let mut liabilities = 0i64;
        let mut equity = 0i64;
        for (id, (d, c)) in &totals {
            let acct = &self.accounts[id];
            match acct.kind {
                AccountKind::Asset => assets += d - c,
                AccountKind::Expense => equity -= d - c,
                AccountKind::Liability => liabilities += c - d,
                AccountKind::Equity | AccountKind::Revenue => equity += c - d,
            }
        }
        BalanceSheet {
            assets,
            liabilities,
            equity,
        }
    }

    /// Recomputes per-account totals by folding the journal; the oracle for
    /// the incremental `totals` map.
    pub fn recomputed_totals(&self) -> BTreeMap<AccountId, (i64, i64)> {
        let mut totals: BTreeMap<AccountId, (i64, i64)> = BTreeMap::new();
        for id in self.accounts.keys() {
            totals.insert(*id, (0, 0));
        }
        for e in &self.journal {
            totals.get_mut(&e.debit).unwrap().0 += e.amount.amount;
            totals.get_mut(&e.credit).unwrap().1 += e.amount.amount;
        }
        totals
    }

    pub fn incremental_totals(&self) -> &BTreeMap<AccountId, (i64, i64)> {
        &self.totals
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn ledger_with_cash_and_loan() -> (Ledger, AccountId, AccountId) {
        let mut l = Ledger::new("agent".to_string());
        let cash = l
            .open_account(
                AccountId(1),
                AccountSpec::plain("cash", AccountKind::Asset).money(MoneyRole::Cash),
            )
            .unwrap();
        let loan = l
            .open_account(AccountId(2), AccountSpec::plain("loan payable", AccountKind::Liability))
            .unwrap();
        (l, cash, loan)
    }

    #[test]
    fn fresh_account_is_empty() {
        let (l, cash, _) = ledger_with_cash_and_loan();
        assert_eq!(l.balance(cash), 0);
    }

    #[test]
    fn duplicate_account_name_rejected() {
        let mut l = Ledger::new("a".to_string());
        l.open_account(AccountId(1), AccountSpec::plain("Cash", AccountKind::Asset))
            .unwrap();
        let err = l
            .open_account(AccountId(2), AccountSpec::plain("Cash", AccountKind::Asset))
            .unwrap_err();
        assert!(matches!(err, Error::DuplicateAccount { .. }));
    }

    #[test]
    fn loan_payout_updates_both_balances() {
        let (mut l, cash, loan) = ledger_with_cash_and_loan();
        l.post(
            EntryId(1),
            date("2001-01-01"),
            cash,
            loan,
            Money::eur(10_000_000),
            "payout".into(),
            None,
            None,
            Currency::EUR,
        )
        .unwrap();
        assert_eq!(l.balance(cash), 10_000_000);
        assert_eq!(l.balance(loan), 10_000_000);
    }

    #[test]
    fn zero_amount_rejected() {
        let (mut l, cash, loan) = ledger_with_cash_and_loan();
        let err = l
            .post(
                EntryId(1),
                date("2001-01-01"),
                cash,
                loan,
                Money::eur(0),
                String::new(),
                None,
                None,
                Currency::EUR,
            )
            .unwrap_err();
        assert_eq!(err, Error::NonPositiveAmount);
    }

    #[test]
    fn overdraft_is_abnormal_balance() {
        let (mut l, cash, loan) = ledger_with_cash_and_loan();
        l.post(
            EntryId(1),
            date("2001-01-01"),
            cash,
            loan,
            Money::eur(10),
            String::new(),
            None,
            None,
            Currency::EUR,
        )
        .unwrap();
        let err = l
            .post(
                EntryId(2),
                date("2001-01-02"),
                loan,
                cash,
                Money::eur(50),
                "withdraw".into(),
                None,
                None,
                Currency::EUR,
            )
            .unwrap_err();
        assert!(matches!(err, Error::AbnormalBalance { balance: -40, .. }));
        // failed post mutated nothing
        assert_eq!(l.balance(cash), 10);
        assert_eq!(l.journal().len(), 1);
    }

    #[test]
    fn currency_mismatch_rejected() {
        let (mut l, cash, loan) = ledger_with_cash_and_loan();
        let usd = Money::new(10, Currency::new("USD").unwrap());
        let err = l
            .post(EntryId(1), date("2001-01-01"), cash, loan, usd, String::new(), None, None, Currency::EUR)
            .unwrap_err();
        assert!(matches!(err, Error::CurrencyMismatch(_, _)));
    }

    #[test]
    fn empty_trial_balance_sums_to_zero() {
        let l = Ledger::new("a".to_string());
        assert!(l.trial_balance().is_empty());
        assert_eq!(l.journal_totals(), (0, 0));
    }

    #[test]
    fn single_entry_trial_balance() {
        let (mut l, cash, loan) = ledger_with_cash_and_loan();
        l.post(
            EntryId(1),
            date("2001-01-01"),
            cash,
            loan,
            Money::eur(100),
            String::new(),
            None,
            None,
            Currency::EUR,
        )
        .unwrap();
        let tb = l.trial_balance();
        assert_eq!(tb.len(), 2);
        let signed_sum: i64 = tb.iter().map(|(_, b)| b).sum();
        assert_eq!(signed_sum, 0);
        assert_eq!(l.journal_totals(), (100, 100));
    }

    #[test]
    fn fresh_agent_balance_sheet_is_zero() {
        let l = Ledger::new("a".to_string());
        let bs = l.balance_sheet(date("2001-01-01"));
        assert!(bs.is_zero());
    }

    #[test]
    fn balance_sheet_identity_holds() {
        let (mut l, cash, loan) = ledger_with_cash_and_loan();
        let equity = l
            .open_account(AccountId(3), AccountSpec::plain("equity", AccountKind::Equity))
            .unwrap();
        let revenue = l
            .open_account(AccountId(4), AccountSpec::plain("revenue", AccountKind::Revenue))
            .unwrap();
        l.post(EntryId(1), date("2001-01-01"), cash, loan, Money::eur(500), String::new(), None, None, Currency::EUR).unwrap();
        l.post(EntryId(2), date("2001-01-02"), cash, equity, Money::eur(40), String::new(), None, None, Currency::EUR).unwrap();
        l.post(EntryId(3), date("2001-01-03"), cash, revenue, Money::eur(7), String::new(), None, None, Currency::EUR).unwrap();
        let bs = l.balance_sheet(date("2001-01-03"));
        assert_eq!(bs.assets, 547);
        assert_eq!(bs.liabilities, 500);
        assert_eq!(bs.equity, 47);
        assert_eq!(bs.assets, bs.liabilities + bs.equity);
        // as_of filters later entries
        let earlier = l.balance_sheet(date("2001-01-01"));
        assert_eq!(earlier.assets, 500);
        assert_eq!(earlier.equity, 0);
    }

    #[test]
    fn incremental_totals_match_journal_fold() {
        let (mut l, cash, loan) = ledger_with_cash_and_loan();
        for i in 0..20 {
            l.post(
                EntryId(i),
                date("2001-01-01"),
                cash,
                loan,
                Money::eur(1 + i as i64),
                String::new(),
                None,
                None,
                Currency::EUR,
            )
            .unwrap();
        }
        assert_eq!(&l.recomputed_totals(), l.incremental_totals());
    }
}
