//! The quadruple-accounting layer.
//!
//! A [`System`] holds one double-entry ledger per agent. Cross-agent
//! transactions are [`MacroBooking`]s: one booking with one micro leg per
//! involved agent, applied atomically. The only single-leg bookings are the
//! central bank's money issuance and destruction.
//!
//! After every applied booking the system re-verifies:
//!
//! * the debt invariance — Σ receivables = Σ liabilities, and pairwise:
//!   the receivable of A against B equals the payable of B against A;
//! * the payment flow of the booking — money leaving the payer leg equals
//!   money arriving at the payee leg;
//! * money conservation — issued − destroyed = Σ cash across all agents;
//! * deposit conservation — a bank's pooled deposit liability equals the
//!   sum of customer deposit assets held against it;
//! * gold backing (gold regime) — outstanding banknotes are covered by
//!   vault gold at the issue price.
//!
//! A violation rolls the booking back; the ledgers are left bit-identical
//! to the pre-state.
//!
//! Deposits are modeled with one pooled liability account per bank (the
//! omnibus "deposits" account) while every customer holds a per-bank
//! deposit asset. The pooled pair is checked in aggregate, which is what
//! lets two customers of the same bank — or two banks over their central
//! bank accounts — transfer deposits in a two-leg booking without touching
//! the intermediary's books.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::Serialize;

use crate::boe::BillOfExchange;
use crate::contracts::{ContractStore, OwnershipRegistry};
use crate::error::{Error, Result};
use crate::issuance::{IssuedMoneyRegister, Regime};
use crate::ledger::{
    Account, AccountId, AccountKind, AccountSpec, ClaimCategory, Counterparty, EntryId,
    JournalEntry, Ledger, MoneyRole,
};
use crate::money::{Currency, Money};
use crate::schedule::RepaymentSchedule;

pub type AgentId = String;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BookingId(pub u64);

/// Sector of an agent. Exactly one central bank exists per system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AgentRole {
    CentralBank,
    Bank,
    Company,
    Household,
    GoldMiner,
}

impl AgentRole {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "central_bank" => AgentRole::CentralBank,
            "bank" => AgentRole::Bank,
            "company" => AgentRole::Company,
            "household" => AgentRole::Household,
            "gold_miner" => AgentRole::GoldMiner,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            AgentRole::CentralBank => "central_bank",
            AgentRole::Bank => "bank",
            AgentRole::Company => "company",
            AgentRole::Household => "household",
            AgentRole::GoldMiner => "gold_miner",
        }
    }

    pub fn is_bank(&self) -> bool {
        matches!(self, AgentRole::Bank)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agent {
    pub id: AgentId,
    pub name: String,
    pub role: AgentRole,
    /// Credibility rating 0–100, gating central bank loans.
    pub credibility: u8,
}

/// What a macro booking does; drives reporting and lifecycle tracking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BookingKind {
    Delivery,
    BoECreation,
    BoEDiscount,
    BoETransfer,
    BoESettlement,
    LoanGrant,
    LoanRepay,
    Withdrawal,
    DepositTransfer,
    Issue,
    Destroy,
    GoldPurchase,
    RestitutionSettlement,
    Other,
}

impl BookingKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BookingKind::Delivery => "delivery",
            BookingKind::BoECreation => "boe_creation",
            BookingKind::BoEDiscount => "boe_discount",
            BookingKind::BoETransfer => "boe_transfer",
            BookingKind::BoESettlement => "boe_settlement",
            BookingKind::LoanGrant => "loan_grant",
            BookingKind::LoanRepay => "loan_repay",
            BookingKind::Withdrawal => "withdrawal",
            BookingKind::DepositTransfer => "deposit_transfer",
            BookingKind::Issue => "issue",
            BookingKind::Destroy => "destroy",
            BookingKind::GoldPurchase => "gold_purchase",
            BookingKind::RestitutionSettlement => "restitution_settlement",
            BookingKind::Other => "other",
        }
    }
}

/// One applied micro leg: the journal entries booked in one agent's ledger.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BookingLeg {
    pub agent: AgentId,
    /// Leg label such as `1a`; the letter is the leg position.
    pub label: String,
    pub entries: Vec<EntryId>,
}

/// An applied macro booking. Arity 1 is reserved for the central bank's
/// issue and destroy bookings; everything else has two legs that reference
/// each other through the entries' `macro_ref`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacroBooking {
    pub id: BookingId,
    /// Ordinal label: booking `3` has legs `3a` and `3b`.
    pub label: String,
    pub desc: String,
    pub date: NaiveDate,
    pub kind: BookingKind,
    pub legs: Vec<BookingLeg>,
}

impl MacroBooking {
    pub fn display_label(&self) -> String {
        let legs: Vec<&str> = self.legs.iter().map(|l| l.label.as_str()).collect();
        legs.join("/")
    }
}

// ---------------------------------------------------------------------------
// Booking drafts
// ---------------------------------------------------------------------------

/// One entry to post, accounts referenced by name.
#[derive(Debug, Clone)]
pub struct EntryDraft {
    pub debit: String,
    pub credit: String,
    pub amount: i64,
    pub memo: String,
    pub contract_ref: Option<u64>,
}

impl EntryDraft {
    pub fn new(debit: &str, credit: &str, amount: i64, memo: &str) -> Self {
        EntryDraft {
            debit: debit.to_string(),
            credit: credit.to_string(),
            amount,
            memo: memo.to_string(),
            contract_ref: None,
        }
    }

    pub fn with_contract(mut self, id: u64) -> Self {
        self.contract_ref = Some(id);
        self
    }
}

#[derive(Debug, Clone)]
pub struct LegDraft {
    pub agent: AgentId,
    pub entries: Vec<EntryDraft>,
    /// Accounts to open before posting, if missing.
    pub ensure: Vec<AccountSpec>,
}

impl LegDraft {
    pub fn new(agent: &str) -> Self {
        LegDraft {
            agent: agent.to_string(),
            entries: Vec::new(),
            ensure: Vec::new(),
        }
    }

    pub fn ensure(mut self, spec: AccountSpec) -> Self {
        self.ensure.push(spec);
        self
    }

    pub fn entry(mut self, e: EntryDraft) -> Self {
        self.entries.push(e);
        self
    }
}

#[derive(Debug, Clone)]
pub struct BookingDraft {
    pub desc: String,
    pub date: NaiveDate,
    pub kind: BookingKind,
    pub legs: Vec<LegDraft>,
}

impl BookingDraft {
    pub fn new(date: NaiveDate, kind: BookingKind, desc: &str) -> Self {
        BookingDraft {
            desc: desc.to_string(),
            date,
            kind,
            legs: Vec::new(),
        }
    }

    pub fn leg(mut self, leg: LegDraft) -> Self {
        self.legs.push(leg);
        self
    }
}

// ---------------------------------------------------------------------------
// Invariance reports
// ---------------------------------------------------------------------------

/// Key of one directed claim relation in the pairwise debt check.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum PairKey {
    /// `creditor` holds a claim against `debtor`.
    Agents { creditor: AgentId, debtor: AgentId },
    /// Pooled deposits at `bank`: all depositors against the bank.
    DepositPool { bank: AgentId },
    /// Outstanding banknotes against the central bank (gold regime, or the
    /// fiat register when non-claim accounts are toggled into the scan).
    Banknotes,
}

impl PairKey {
    pub fn display(&self) -> String {
        match self {
            PairKey::Agents { creditor, debtor } => format!("{creditor}->{debtor}"),
            PairKey::DepositPool { bank } => format!("depositors->{bank}"),
            PairKey::Banknotes => "note bearers->central bank".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairViolation {
    pub pair: String,
    pub lhs: i64,
    pub rhs: i64,
}

/// Result of the debt-invariance scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DebtReport {
    pub total_receivables: i64,
    pub total_liabilities: i64,
    /// Directed pair -> (receivable side, payable side).
    pub pairs: BTreeMap<String, (i64, i64)>,
    pub by_category: BTreeMap<String, i64>,
    pub violations: Vec<PairViolation>,
}

impl DebtReport {
    pub fn holds(&self) -> bool {
        self.total_receivables == self.total_liabilities && self.violations.is_empty()
    }
}

/// Result of the payment-invariance scan over a period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PaymentReport {
    pub total_expenditures: i64,
    pub total_revenues: i64,
    pub violations: Vec<PairViolation>,
}

impl PaymentReport {
    pub fn holds(&self) -> bool {
        self.total_expenditures == self.total_revenues && self.violations.is_empty()
    }
}

/// The combined export shape:
/// `{date, total_receivables, total_liabilities, total_expenditures,
///   total_revenues, violations:[{pair, lhs, rhs}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvarianceReport {
    pub date: NaiveDate,
    pub total_receivables: i64,
    pub total_liabilities: i64,
    pub total_expenditures: i64,
    pub total_revenues: i64,
    pub violations: Vec<PairViolation>,
}

// ---------------------------------------------------------------------------
// Account naming
// ---------------------------------------------------------------------------

/// Canonical account names. These appear verbatim in exports; treat them as
/// part of the file format.
pub mod names {
    pub const CASH: &str = "cash";
    pub const DEPOSIT_POOL: &str = "deposits";
    pub const GOLD: &str = "gold";
    pub const OPENING_EQUITY: &str = "opening equity";
    pub const OPENING_RESERVES: &str = "opening reserves";
    pub const SALES_REVENUE: &str = "sales revenue";
    pub const COGS: &str = "cost of goods sold";
    pub const CONSUMPTION: &str = "consumption";
    pub const INTEREST_REVENUE: &str = "interest revenue";
    pub const INTEREST_EXPENSE: &str = "interest expense";
    pub const DISCOUNT_REVENUE: &str = "discount revenue";
    pub const DISCOUNT_EXPENSE: &str = "discount expense";
    pub const TRANSFER_REVENUE: &str = "transfer revenue";
    pub const TRANSFER_EXPENSE: &str = "transfer expense";
    pub const REGISTER_FIAT: &str = "circulating m";
    pub const REGISTER_GOLD: &str = "banknotes issued";

    pub fn deposit_at(bank: &str) -> String {
        format!("deposit@{bank}")
    }
    pub fn receivable(cp: &str) -> String {
        format!("receivable:{cp}")
    }
    pub fn payable(cp: &str) -> String {
        format!("payable:{cp}")
    }
    pub fn loan_receivable(cp: &str) -> String {
        format!("loan receivable:{cp}")
    }
    pub fn loan_payable(cp: &str) -> String {
        format!("loan payable:{cp}")
    }
    pub fn interbank_receivable(cp: &str) -> String {
        format!("interbank receivable:{cp}")
    }
    pub fn interbank_payable(cp: &str) -> String {
        format!("interbank payable:{cp}")
    }
    pub fn boe_receivable(bill: u64) -> String {
        format!("boe receivable:{bill}")
    }
    pub fn boe_payable(bill: u64) -> String {
        format!("boe payable:{bill}")
    }
    pub fn restitution_receivable(cp: &str) -> String {
        format!("restitution receivable:{cp}")
    }
    pub fn restitution_payable(cp: &str) -> String {
        format!("restitution payable:{cp}")
    }
    pub fn product(id: &str) -> String {
        format!("product:{id}")
    }
}

// ---------------------------------------------------------------------------
// System
// ---------------------------------------------------------------------------

/// The whole economy: agents, ledgers, contracts, bills, the issued-money
/// register, and the applied booking log.
///
/// All mutation goes through `&mut self` methods and is therefore serial.
/// The struct is `Clone`; a clone is a consistent snapshot that can be read
/// from any thread.
#[derive(Debug, Clone, Serialize)]
pub struct System {
    currency: Currency,
    regime: Regime,
    clock: NaiveDate,
    agents: BTreeMap<AgentId, Agent>,
    central_bank: Option<AgentId>,
    ledgers: BTreeMap<AgentId, Ledger>,
    bookings: Vec<MacroBooking>,
    pub(crate) register: IssuedMoneyRegister,
    pub(crate) contracts: ContractStore,
    pub(crate) ownership: OwnershipRegistry,
    pub(crate) bills: BTreeMap<u64, BillOfExchange>,
    pub(crate) schedules: BTreeMap<String, RepaymentSchedule>,
    credibility_threshold: u8,
    next_account: u64,
    next_entry: u64,
    next_booking: u64,
    pub(crate) next_contract: u64,
    pub(crate) next_disposition: u64,
    pub(crate) next_restitution: u64,
    pub(crate) next_bill: u64,
}

impl System {
    pub fn new(currency: Currency, regime: Regime) -> Self {
        System {
            currency,
            regime,
            clock: NaiveDate::from_ymd_opt(2001, 1, 1).unwrap(),
            agents: BTreeMap::new(),
            central_bank: None,
            ledgers: BTreeMap::new(),
            bookings: Vec::new(),
            register: IssuedMoneyRegister::default(),
            contracts: ContractStore::default(),
            ownership: OwnershipRegistry::default(),
            bills: BTreeMap::new(),
            schedules: BTreeMap::new(),
            credibility_threshold: 50,
            next_account: 1,
            next_entry: 1,
            next_booking: 1,
            next_contract: 1,
            next_disposition: 1,
            next_restitution: 1,
            next_bill: 1,
        }
    }

    pub fn currency(&self) -> Currency {
        self.currency
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn clock(&self) -> NaiveDate {
        self.clock
    }

    pub fn set_clock(&mut self, date: NaiveDate) {
        self.clock = date;
    }

    pub fn credibility_threshold(&self) -> u8 {
        self.credibility_threshold
    }

    pub fn set_credibility_threshold(&mut self, t: u8) {
        self.credibility_threshold = t;
    }

    pub fn register(&self) -> &IssuedMoneyRegister {
        &self.register
    }

    pub fn bookings(&self) -> &[MacroBooking] {
        &self.bookings
    }

    pub fn bills(&self) -> impl Iterator<Item = &BillOfExchange> {
        self.bills.values()
    }

    pub fn bill(&self, id: u64) -> Result<&BillOfExchange> {
        self.bills.get(&id).ok_or(Error::UnknownBill(id))
    }

    pub fn contracts(&self) -> &ContractStore {
        &self.contracts
    }

    pub fn ownership(&self) -> &OwnershipRegistry {
        &self.ownership
    }

    pub fn schedules(&self) -> &BTreeMap<String, RepaymentSchedule> {
        &self.schedules
    }

    pub fn money(&self, amount: i64) -> Money {
        Money::new(amount, self.currency)
    }

    // ---- agents ----

    pub fn add_agent(&mut self, id: &str, role: AgentRole, credibility: u8) -> Result<()> {
        if self.agents.contains_key(id) {
            return Err(Error::DuplicateAgent(id.to_string()));
        }
        if role == AgentRole::CentralBank {
            if self.central_bank.is_some() {
                return Err(Error::DuplicateAgent(format!(
                    "{id}: a central bank already exists"
                )));
            }
            self.central_bank = Some(id.to_string());
        }
        self.agents.insert(
            id.to_string(),
            Agent {
                id: id.to_string(),
                name: id.to_string(),
                role,
                credibility,
            },
        );
        self.ledgers.insert(id.to_string(), Ledger::new(id.to_string()));
        Ok(())
    }

    pub fn agent(&self, id: &str) -> Result<&Agent> {
        self.agents.get(id).ok_or_else(|| Error::UnknownAgent(id.to_string()))
    }

    pub fn agents(&self) -> impl Iterator<Item = &Agent> {
        self.agents.values()
    }

    pub fn set_credibility(&mut self, id: &str, rating: u8) -> Result<()> {
        self.agents
            .get_mut(id)
            .ok_or_else(|| Error::UnknownAgent(id.to_string()))?
            .credibility = rating;
        Ok(())
    }

    /// The central bank of the system; exactly one must have been declared.
    pub fn central_bank(&self) -> Result<AgentId> {
        self.central_bank.clone().ok_or(Error::CentralBankMissing)
    }

    pub fn ledger(&self, id: &str) -> Result<&Ledger> {
        self.ledgers.get(id).ok_or_else(|| Error::UnknownAgent(id.to_string()))
    }

    pub fn ledgers(&self) -> impl Iterator<Item = (&AgentId, &Ledger)> {
        self.ledgers.iter()
    }

    /// Balance of a named account, zero if the account was never opened.
    pub fn balance(&self, agent: &str, account: &str) -> i64 {
        self.ledgers
            .get(agent)
            .map(|l| l.balance_by_name(account))
            .unwrap_or(0)
    }

    pub fn balance_sheet(&self, agent: &str, as_of: NaiveDate) -> Result<crate::ledger::BalanceSheet> {
        Ok(self.ledger(agent)?.balance_sheet(as_of))
    }

    pub fn trial_balance(&self, agent: &str) -> Result<Vec<(String, i64)>> {
        Ok(self
            .ledger(agent)?
            .trial_balance()
            .into_iter()
            .map(|(a, b)| (a.name.clone(), b))
            .collect())
    }

    /// Looks up an applied entry by agent and id.
    pub fn entry(&self, agent: &str, id: EntryId) -> Option<&JournalEntry> {
        let journal = self.ledgers.get(agent)?.journal();
        journal
            .binary_search_by_key(&id, |e| e.id)
            .ok()
            .map(|i| &journal[i])
    }

    fn account_of_entry<'a>(&'a self, agent: &str, acct: AccountId) -> &'a Account {
        self.ledgers[agent].account(acct).expect("entry references opened account")
    }

    // ---- account plumbing ----

    /// Opens the account if missing. An existing account must agree on kind;
    /// the richer metadata comes from the first opener.
    pub(crate) fn ensure_account(&mut self, agent: &str, spec: AccountSpec) -> Result<AccountId> {
        let ledger = self
            .ledgers
            .get_mut(agent)
            .ok_or_else(|| Error::UnknownAgent(agent.to_string()))?;
        if let Some(acct) = ledger.account_by_name(&spec.name) {
            return Ok(acct.id);
        }
        let id = AccountId(self.next_account);
        self.next_account += 1;
        ledger.open_account(id, spec)
    }

    /// Public account opening with the plain five-field surface.
    pub fn open_account(
        &mut self,
        owner: &str,
        name: &str,
        kind: AccountKind,
        counterparty: Option<AgentId>,
        claim: bool,
    ) -> Result<AccountId> {
        let mut spec = AccountSpec::plain(name, kind);
        if let Some(cp) = counterparty {
            self.agent(&cp)?;
            spec = spec.counterparty(Counterparty::Agent(cp));
        }
        if claim {
            spec = spec.claim(ClaimCategory::Trade);
        }
        let ledger = self
            .ledgers
            .get_mut(owner)
            .ok_or_else(|| Error::UnknownAgent(owner.to_string()))?;
        let id = AccountId(self.next_account);
        self.next_account += 1;
        ledger.open_account(id, spec)
    }

    /// Cash account spec depends on the regime: gold-based banknotes are
    /// claims on the central bank, fiat cash is nobody's liability.
    pub(crate) fn cash_spec(&self, agent: &str) -> AccountSpec {
        let base = AccountSpec::plain(names::CASH, AccountKind::Asset).money(MoneyRole::Cash);
        match (&self.regime, &self.central_bank) {
            (Regime::GoldBased { .. }, Some(cb)) if agent != cb => base
                .counterparty(Counterparty::Agent(cb.clone()))
                .claim(ClaimCategory::BearerNotes),
            _ => base,
        }
    }

    pub(crate) fn ensure_cash(&mut self, agent: &str) -> Result<AccountId> {
        let spec = self.cash_spec(agent);
        self.ensure_account(agent, spec)
    }

    pub(crate) fn ensure_deposit_pool(&mut self, bank: &str) -> Result<AccountId> {
        self.ensure_account(
            bank,
            AccountSpec::plain(names::DEPOSIT_POOL, AccountKind::Liability)
                .counterparty(Counterparty::Depositors)
                .claim(ClaimCategory::DepositMoney)
                .money(MoneyRole::DepositPool),
        )
    }

    pub(crate) fn ensure_deposit_at(&mut self, customer: &str, bank: &str) -> Result<AccountId> {
        self.ensure_account(
            customer,
            AccountSpec::plain(&names::deposit_at(bank), AccountKind::Asset)
                .counterparty(Counterparty::Agent(bank.to_string()))
                .claim(ClaimCategory::DepositMoney)
                .money(MoneyRole::Deposit),
        )
    }

    pub(crate) fn ensure_claim_pair(
        &mut self,
        creditor: &str,
        debtor: &str,
        category: ClaimCategory,
    ) -> Result<()> {
        let (recv, pay) = claim_account_names(category, creditor, debtor);
        self.ensure_account(
            creditor,
            AccountSpec::plain(&recv, AccountKind::Asset)
                .counterparty(Counterparty::Agent(debtor.to_string()))
                .claim(category),
        )?;
        self.ensure_account(
            debtor,
            AccountSpec::plain(&pay, AccountKind::Liability)
                .counterparty(Counterparty::Agent(creditor.to_string()))
                .claim(category),
        )?;
        Ok(())
    }

    // ---- posting ----

    /// Posts journal entries outside the macro-booking path: opening
    /// endowments, production, consumption. The batch is atomic and the
    /// invariances are verified afterwards exactly like for a booking.
    pub(crate) fn post_internal(
        &mut self,
        date: NaiveDate,
        legs: Vec<LegDraft>,
        what: &str,
    ) -> Result<Vec<EntryId>> {
        let snapshot = self.snapshot_ledgers(legs.iter().map(|l| l.agent.clone()));
        match self.apply_legs(date, &legs, None) {
            Ok(applied) => {
                if let Err(e) = self.verify_invariants() {
                    self.restore_ledgers(snapshot);
                    return Err(Error::InvarianceViolation {
                        label: what.to_string(),
                        detail: e.to_string(),
                    });
                }
                Ok(applied.into_iter().flat_map(|(_, ids)| ids).collect())
            }
            Err(e) => {
                self.restore_ledgers(snapshot);
                Err(e)
            }
        }
    }

    /// Applies a macro booking atomically: open missing accounts, post every
    /// leg, then re-verify the system invariances. Any failure restores the
    /// ledgers bit-identically and reports the cause.
    pub fn post_macro_booking(&mut self, draft: BookingDraft) -> Result<BookingId> {
        let ordinal = self.bookings.len() as u64 + 1;
        let label = ordinal.to_string();
        // arity and leg sanity
        if draft.legs.is_empty() || draft.legs.len() > 2 {
            return Err(Error::ArityViolation(format!("{label} ({})", draft.desc)));
        }
        let singleton_kind = matches!(draft.kind, BookingKind::Issue | BookingKind::Destroy);
        if draft.legs.len() == 1 {
            let cb = self.central_bank()?;
            if !singleton_kind || draft.legs[0].agent != cb {
                return Err(Error::ArityViolation(format!("{label} ({})", draft.desc)));
            }
        }
        if draft.legs.len() == 2 && draft.legs[0].agent == draft.legs[1].agent {
            return Err(Error::ArityViolation(format!("{label} ({})", draft.desc)));
        }
        // every entry draft debits and credits the same amount, so a leg can
        // only be unbalanced by being empty
        for leg in &draft.legs {
            self.agent(&leg.agent)?;
            if leg.entries.is_empty() {
                return Err(Error::LegImbalance {
                    label: label.clone(),
                    agent: leg.agent.clone(),
                    debits: 0,
                    credits: 0,
                });
            }
        }

        let booking_id = BookingId(self.next_booking);
        let snapshot = self.snapshot_ledgers(draft.legs.iter().map(|l| l.agent.clone()));
        let applied = match self.apply_legs(draft.date, &draft.legs, Some(booking_id.0)) {
            Ok(applied) => applied,
            Err(e) => {
                self.restore_ledgers(snapshot);
                return Err(e);
            }
        };

        // build the booking record before verification so the payment check
        // can inspect it
        let letters = ["a", "b"];
        let legs: Vec<BookingLeg> = applied
            .into_iter()
            .enumerate()
            .map(|(i, (agent, entries))| BookingLeg {
                agent,
                label: format!("{label}{}", letters[i]),
                entries,
            })
            .collect();
        let booking = MacroBooking {
            id: booking_id,
            label: label.clone(),
            desc: draft.desc.clone(),
            date: draft.date,
            kind: draft.kind,
            legs,
        };

        if let Err(detail) = self.verify_booking_flows(&booking) {
            self.restore_ledgers(snapshot);
            return Err(Error::InvarianceViolation {
                label: format!("{label} ({})", draft.desc),
                detail,
            });
        }
        if let Err(e) = self.verify_invariants() {
            self.restore_ledgers(snapshot);
            return Err(Error::InvarianceViolation {
                label: format!("{label} ({})", draft.desc),
                detail: e.to_string(),
            });
        }

        self.next_booking += 1;
        self.clock = draft.date;
        self.bookings.push(booking);
        Ok(booking_id)
    }

    fn apply_legs(
        &mut self,
        date: NaiveDate,
        legs: &[LegDraft],
        macro_ref: Option<u64>,
    ) -> Result<Vec<(AgentId, Vec<EntryId>)>> {
        let mut applied = Vec::new();
        for leg in legs {
            for spec in &leg.ensure {
                self.ensure_account(&leg.agent, spec.clone())?;
            }
            let mut ids = Vec::new();
            for e in &leg.entries {
                let ledger = self
                    .ledgers
                    .get(&leg.agent)
                    .ok_or_else(|| Error::UnknownAgent(leg.agent.clone()))?;
                let debit = ledger
                    .account_by_name(&e.debit)
                    .ok_or_else(|| Error::UnknownAccount {
                        agent: leg.agent.clone(),
                        name: e.debit.clone(),
                    })?
                    .id;
                let credit = ledger
                    .account_by_name(&e.credit)
                    .ok_or_else(|| Error::UnknownAccount {
                        agent: leg.agent.clone(),
                        name: e.credit.clone(),
                    })?
                    .id;
                let entry_id = EntryId(self.next_entry);
                let amount = Money::new(e.amount, self.currency);
                self.ledgers.get_mut(&leg.agent).unwrap().post(
                    entry_id,
                    date,
                    debit,
                    credit,
                    amount,
                    e.memo.clone(),
                    e.contract_ref,
                    macro_ref,
                )?;
                self.next_entry += 1;
                ids.push(entry_id);
            }
            applied.push((leg.agent.clone(), ids));
        }
        Ok(applied)
    }

    fn snapshot_ledgers(
        &self,
        agents: impl Iterator<Item = AgentId>,
    ) -> (Vec<(AgentId, Ledger)>, u64, u64) {
        let mut saved = Vec::new();
        for a in agents {
            if let Some(l) = self.ledgers.get(&a) {
                if !saved.iter().any(|(id, _)| *id == a) {
                    saved.push((a, l.clone()));
                }
            }
        }
        (saved, self.next_entry, self.next_account)
    }

    fn restore_ledgers(&mut self, snapshot: (Vec<(AgentId, Ledger)>, u64, u64)) {
        let (saved, next_entry, next_account) = snapshot;
        for (agent, ledger) in saved {
            self.ledgers.insert(agent, ledger);
        }
        self.next_entry = next_entry;
        self.next_account = next_account;
    }

    // ---- money movement helpers ----

    /// Entry drafts moving `amount` of money from `payer` to `payee`.
    /// Returns (payer delta entries, payee delta entries, account specs).
    /// Cash moves cash; deposits route through a bank: the payer's own pool
    /// if the payer is the bank, the payee's pool if the payee is the bank,
    /// the central bank between two banks, and a shared bank otherwise.
    pub(crate) fn money_movement(
        &mut self,
        payer: &str,
        payee: &str,
        amount: i64,
        medium: Medium,
    ) -> Result<MoneyMovement> {
        if amount <= 0 {
            return Err(Error::NonPositiveAmount);
        }
        match medium {
            Medium::Cash => {
                self.ensure_cash(payer)?;
                self.ensure_cash(payee)?;
                let have = self.balance(payer, names::CASH);
                if have < amount {
                    return Err(Error::InsufficientFunds {
                        agent: payer.to_string(),
                        need: amount,
                        have,
                    });
                }
                Ok(MoneyMovement {
                    payer_credit: names::CASH.to_string(),
                    payee_debit: names::CASH.to_string(),
                })
            }
            Medium::Deposit => {
                let bank = self.route_bank(payer, payee, amount)?;
                let payer_credit = if payer == bank {
                    self.ensure_deposit_pool(payer)?;
                    names::DEPOSIT_POOL.to_string()
                } else {
                    self.ensure_deposit_at(payer, &bank)?;
                    let have = self.balance(payer, &names::deposit_at(&bank));
                    if have < amount {
                        return Err(Error::InsufficientFunds {
                            agent: payer.to_string(),
                            need: amount,
                            have,
                        });
                    }
                    names::deposit_at(&bank)
                };
                let payee_debit = if payee == bank {
                    self.ensure_deposit_pool(payee)?;
                    names::DEPOSIT_POOL.to_string()
                } else {
                    self.ensure_deposit_at(payee, &bank)?;
                    names::deposit_at(&bank)
                };
                Ok(MoneyMovement {
                    payer_credit,
                    payee_debit,
                })
            }
            Medium::Auto => {
                if self.balance(payer, names::CASH) >= amount {
                    self.money_movement(payer, payee, amount, Medium::Cash)
                } else {
                    self.money_movement(payer, payee, amount, Medium::Deposit)
                }
            }
        }
    }

    /// The bank whose books a deposit payment routes through.
    fn route_bank(&self, payer: &str, payee: &str, amount: i64) -> Result<AgentId> {
        let payer_role = self.agent(payer)?.role;
        let payee_role = self.agent(payee)?.role;
        if payer_role.is_bank() && payee_role.is_bank() {
            return self.central_bank();
        }
        if payer_role.is_bank() || payer_role == AgentRole::CentralBank {
            return Ok(payer.to_string());
        }
        if payee_role.is_bank() || payee_role == AgentRole::CentralBank {
            return Ok(payee.to_string());
        }
        // two non-banks: a bank where the payer has sufficient funds,
        // smallest id first for determinism
        for (id, agent) in &self.agents {
            if agent.role.is_bank() && self.balance(payer, &names::deposit_at(id)) >= amount {
                return Ok(id.clone());
            }
        }
        Err(Error::InsufficientFunds {
            agent: payer.to_string(),
            need: amount,
            have: 0,
        })
    }

    /// Total money-like funds (cash plus deposits) of one agent.
    pub fn free_funds(&self, agent: &str) -> i64 {
        let Ok(ledger) = self.ledger(agent) else { return 0 };
        ledger
            .accounts()
            .filter(|a| matches!(a.money_role, MoneyRole::Cash | MoneyRole::Deposit))
            .map(|a| ledger.balance(a.id))
            .sum()
    }

    // ---- invariance scans ----

    /// The debt invariance: Σ receivables = Σ liabilities over all claim
    /// accounts, and every directed pair matches. Non-claim registers are
    /// excluded unless `include_nonclaims` toggles them in — in which case
    /// both totals grow by exactly the circulating-money register.
    pub fn debt_invariance(&self, include_nonclaims: bool) -> DebtReport {
        let mut pairs: BTreeMap<PairKey, (i64, i64)> = BTreeMap::new();
        let mut by_category: BTreeMap<String, i64> = BTreeMap::new();
        let mut total_recv = 0i64;
        let mut total_pay = 0i64;
        let cb = self.central_bank.as_deref().unwrap_or("");
        let cb_cash = self.balance(cb, names::CASH);

        for (agent, ledger) in &self.ledgers {
            for acct in ledger.accounts() {
                let bal = ledger.balance(acct.id);
                let scanned = acct.claim
                    || (include_nonclaims
                        && (acct.money_role == MoneyRole::Cash
                            || acct.category == Some(ClaimCategory::BearerNotes)));
                if !scanned {
                    continue;
                }
                match acct.kind {
                    AccountKind::Asset => {
                        let key = match (&acct.counterparty, acct.category) {
                            (Some(Counterparty::Agent(bank)), Some(ClaimCategory::DepositMoney)) => {
                                PairKey::DepositPool { bank: bank.clone() }
                            }
                            (_, Some(ClaimCategory::BearerNotes)) | (None, _)
                                if acct.money_role == MoneyRole::Cash =>
                            {
                                // own vault notes are no claim on oneself
                                if agent == cb && !include_nonclaims {
                                    continue;
                                }
                                PairKey::Banknotes
                            }
                            (Some(Counterparty::Agent(cp)), _) => PairKey::Agents {
                                creditor: agent.clone(),
                                debtor: cp.clone(),
                            },
                            _ => continue,
                        };
                        total_recv += bal;
                        if let Some(cat) = acct.category {
                            *by_category.entry(format!("{cat:?}")).or_default() += bal;
                        }
                        pairs.entry(key).or_default().0 += bal;
                    }
                    AccountKind::Liability => {
                        let (key, eff) = match &acct.counterparty {
                            Some(Counterparty::Agent(cp)) => (
                                PairKey::Agents {
                                    creditor: cp.clone(),
                                    debtor: agent.clone(),
                                },
                                bal,
                            ),
                            Some(Counterparty::BillHolder(bill)) => {
                                let holder = self
                                    .bills
                                    .get(bill)
                                    .map(|b| b.holder.clone())
                                    .unwrap_or_default();
                                (
                                    PairKey::Agents {
                                        creditor: holder,
                                        debtor: agent.clone(),
                                    },
                                    bal,
                                )
                            }
                            Some(Counterparty::Depositors) => {
                                (PairKey::DepositPool { bank: agent.clone() }, bal)
                            }
                            Some(Counterparty::NoteBearers) => {
                                // outstanding notes: issued register minus own vault
                                (PairKey::Banknotes, bal - cb_cash)
                            }
                            None if acct.category == Some(ClaimCategory::BearerNotes) => {
                                // fiat register, only reachable when toggled in
                                (PairKey::Banknotes, bal)
                            }
                            None => continue,
                        };
                        total_pay += eff;
                        pairs.entry(key).or_default().1 += eff;
                    }
                    _ => {}
                }
            }
        }

        let mut violations = Vec::new();
        for (key, (recv, pay)) in &pairs {
            if recv != pay {
                violations.push(PairViolation {
                    pair: key.display(),
                    lhs: *recv,
                    rhs: *pay,
                });
            }
        }
        DebtReport {
            total_receivables: total_recv,
            total_liabilities: total_pay,
            pairs: pairs
                .into_iter()
                .map(|(k, v)| (k.display(), v))
                .collect(),
            by_category,
            violations,
        }
    }

    /// Net money flow of one leg: inflow − outflow across cash, deposit,
    /// and pooled-deposit accounts.
    fn leg_flow(&self, agent: &str, entries: &[EntryId]) -> i64 {
        let mut net = 0i64;
        for id in entries {
            let Some(e) = self.entry(agent, *id) else { continue };
            let debit = self.account_of_entry(agent, e.debit);
            let credit = self.account_of_entry(agent, e.credit);
            match debit.money_role {
                MoneyRole::Cash | MoneyRole::Deposit => net += e.amount.amount,
                MoneyRole::DepositPool => net += e.amount.amount,
                MoneyRole::None => {}
            }
            match credit.money_role {
                MoneyRole::Cash | MoneyRole::Deposit => net -= e.amount.amount,
                MoneyRole::DepositPool => net -= e.amount.amount,
                MoneyRole::None => {}
            }
        }
        net
    }

    /// Payer-side expenditure must equal payee-side revenue within one
    /// booking. Singleton issue/destroy bookings carry no payment flow.
    fn verify_booking_flows(&self, booking: &MacroBooking) -> std::result::Result<(), String> {
        if booking.legs.len() < 2 {
            return Ok(());
        }
        let a = self.leg_flow(&booking.legs[0].agent, &booking.legs[0].entries);
        let b = self.leg_flow(&booking.legs[1].agent, &booking.legs[1].entries);
        if a + b != 0 {
            return Err(format!(
                "payment flow mismatch: {} moves {a}, {} moves {b}",
                booking.legs[0].agent, booking.legs[1].agent
            ));
        }
        Ok(())
    }

    /// The payment invariance over a period: summed payer-side expenditures
    /// equal summed payee-side revenues across all money-moving bookings.
    /// Claims-only bookings (deliveries, endorsements without a price) do
    /// not move money and are skipped.
    pub fn payment_invariance(&self, from: NaiveDate, to: NaiveDate) -> PaymentReport {
        let mut exp = 0i64;
        let mut rev = 0i64;
        let mut violations = Vec::new();
        for booking in &self.bookings {
            if booking.date < from || booking.date > to || booking.legs.len() < 2 {
                continue;
            }
            let a = self.leg_flow(&booking.legs[0].agent, &booking.legs[0].entries);
            let b = self.leg_flow(&booking.legs[1].agent, &booking.legs[1].entries);
            if a + b != 0 {
                violations.push(PairViolation {
                    pair: format!("booking {}", booking.display_label()),
                    lhs: a,
                    rhs: b,
                });
            }
            exp += (-a.min(0)) + (-b.min(0));
            rev += a.max(0) + b.max(0);
        }
        PaymentReport {
            total_expenditures: exp,
            total_revenues: rev,
            violations,
        }
    }

    /// Total cash in the system, vault included.
    pub fn cash_census(&self) -> i64 {
        let mut total = 0;
        for ledger in self.ledgers.values() {
            for acct in ledger.accounts() {
                if acct.money_role == MoneyRole::Cash {
                    total += ledger.balance(acct.id);
                }
            }
        }
        total
    }

    /// Verifies money conservation, deposit conservation, and gold backing.
    fn verify_stocks(&self) -> std::result::Result<(), String> {
        let net = self.register.net_issued();
        let cash = self.cash_census();
        if net != cash {
            return Err(format!(
                "money conservation broken: register nets {net}, cash census {cash}"
            ));
        }
        // deposit conservation per bank
        let mut pools: BTreeMap<AgentId, i64> = BTreeMap::new();
        let mut holdings: BTreeMap<AgentId, i64> = BTreeMap::new();
        for (agent, ledger) in &self.ledgers {
            for acct in ledger.accounts() {
                match acct.money_role {
                    MoneyRole::DepositPool => {
                        *pools.entry(agent.clone()).or_default() += ledger.balance(acct.id);
                    }
                    MoneyRole::Deposit => {
                        if let Some(Counterparty::Agent(bank)) = &acct.counterparty {
                            *holdings.entry(bank.clone()).or_default() += ledger.balance(acct.id);
                        }
                    }
                    _ => {}
                }
            }
        }
        for bank in pools.keys().chain(holdings.keys()) {
            let pool = pools.get(bank).copied().unwrap_or(0);
            let held = holdings.get(bank).copied().unwrap_or(0);
            if pool != held {
                return Err(format!(
                    "deposit conservation broken at {bank}: pool {pool}, customer holdings {held}"
                ));
            }
        }
        // gold backing
        if let Regime::GoldBased { unit_price } = self.regime {
            if let Some(cb) = &self.central_bank {
                let register = self.balance(cb, names::REGISTER_GOLD);
                let vault = self.balance(cb, names::CASH);
                let outstanding = register - vault;
                let gold_value = self.ownership.gold_weight(cb) as i64 * unit_price;
                if outstanding != gold_value {
                    return Err(format!(
                        "gold backing broken: outstanding notes {outstanding}, vault gold value {gold_value}"
                    ));
                }
            }
        }
        Ok(())
    }

    /// All structural invariances; run after every booking.
    pub fn verify_invariants(&self) -> Result<()> {
        let debt = self.debt_invariance(false);
        if !debt.holds() {
            let detail = if let Some(v) = debt.violations.first() {
                format!("debt pair {}: {} vs {}", v.pair, v.lhs, v.rhs)
            } else {
                format!(
                    "debt totals: receivables {} vs liabilities {}",
                    debt.total_receivables, debt.total_liabilities
                )
            };
            return Err(Error::InvarianceViolation {
                label: "state".to_string(),
                detail,
            });
        }
        self.verify_stocks().map_err(|detail| Error::InvarianceViolation {
            label: "state".to_string(),
            detail,
        })?;
        Ok(())
    }

    /// Deep verification: structural invariances plus the from-scratch
    /// journal fold, the per-agent closure, the balance-sheet identity, and
    /// the payment invariance over all bookings so far.
    pub fn verify_deep(&self) -> Result<()> {
        self.verify_invariants()?;
        for (agent, ledger) in &self.ledgers {
            if &ledger.recomputed_totals() != ledger.incremental_totals() {
                return Err(Error::InvarianceViolation {
                    label: "state".to_string(),
                    detail: format!("incremental balances of {agent} diverge from journal fold"),
                });
            }
            let (d, c) = ledger.journal_totals();
            if d != c {
                return Err(Error::InvarianceViolation {
                    label: "state".to_string(),
                    detail: format!("double-entry closure broken for {agent}: {d} vs {c}"),
                });
            }
            let bs = ledger.balance_sheet(self.clock);
            if bs.assets != bs.liabilities + bs.equity {
                return Err(Error::InvarianceViolation {
                    label: "state".to_string(),
                    detail: format!("balance sheet identity broken for {agent}"),
                });
            }
        }
        let pay = self.payment_invariance(NaiveDate::MIN, NaiveDate::MAX);
        if !pay.holds() {
            return Err(Error::InvarianceViolation {
                label: "state".to_string(),
                detail: format!(
                    "payment invariance: expenditures {} vs revenues {}",
                    pay.total_expenditures, pay.total_revenues
                ),
            });
        }
        Ok(())
    }

    /// Combined export report at a date over a period.
    pub fn invariance_report(&self, date: NaiveDate, from: NaiveDate, to: NaiveDate) -> InvarianceReport {
        let debt = self.debt_invariance(false);
        let pay = self.payment_invariance(from, to);
        let mut violations = debt.violations;
        violations.extend(pay.violations);
        InvarianceReport {
            date,
            total_receivables: debt.total_receivables,
            total_liabilities: debt.total_liabilities,
            total_expenditures: pay.total_expenditures,
            total_revenues: pay.total_revenues,
            violations,
        }
    }

    // ---- interbank clearing and settlement ----

    /// Bilateral netting of mutual interbank claims, residual settled by a
    /// central-bank-deposit transfer. Idempotent: with no mutual claims no
    /// booking is produced.
    pub fn clear(&mut self, bank_a: &str, bank_b: &str, date: NaiveDate) -> Result<Vec<BookingId>> {
        for bank in [bank_a, bank_b] {
            if !self.agent(bank)?.role.is_bank() {
                return Err(Error::NotABank(bank.to_string()));
            }
        }
        let a_claims_b = self.balance(bank_a, &names::interbank_receivable(bank_b));
        let b_claims_a = self.balance(bank_b, &names::interbank_receivable(bank_a));
        let mut out = Vec::new();

        let netted = a_claims_b.min(b_claims_a);
        if netted > 0 {
            self.ensure_claim_pair(bank_a, bank_b, ClaimCategory::Interbank)?;
            self.ensure_claim_pair(bank_b, bank_a, ClaimCategory::Interbank)?;
            let draft = BookingDraft::new(date, BookingKind::Other, "bilateral netting")
                .leg(LegDraft::new(bank_a).entry(EntryDraft::new(
                    &names::interbank_payable(bank_b),
                    &names::interbank_receivable(bank_b),
                    netted,
                    "net mutual claims",
                )))
                .leg(LegDraft::new(bank_b).entry(EntryDraft::new(
                    &names::interbank_payable(bank_a),
                    &names::interbank_receivable(bank_a),
                    netted,
                    "net mutual claims",
                )));
            out.push(self.post_macro_booking(draft)?);
        }

        let (creditor, debtor, residual) = if a_claims_b > b_claims_a {
            (bank_a, bank_b, a_claims_b - b_claims_a)
        } else {
            (bank_b, bank_a, b_claims_a - a_claims_b)
        };
        if residual > 0 {
            let cb = self.central_bank()?;
            let have = self.balance(debtor, &names::deposit_at(&cb));
            if have < residual {
                return Err(Error::InsufficientCentralBankDeposit {
                    need: residual,
                    have,
                });
            }
            self.ensure_deposit_at(creditor, &cb)?;
            let draft = BookingDraft::new(date, BookingKind::DepositTransfer, "settle residual")
                .leg(LegDraft::new(debtor).entry(EntryDraft::new(
                    &names::interbank_payable(creditor),
                    &names::deposit_at(&cb),
                    residual,
                    "residual settled via central bank deposit",
                )))
                .leg(LegDraft::new(creditor).entry(EntryDraft::new(
                    &names::deposit_at(&cb),
                    &names::interbank_receivable(debtor),
                    residual,
                    "residual received via central bank deposit",
                )));
            out.push(self.post_macro_booking(draft)?);
        }
        Ok(out)
    }

    /// Settles an open interbank claim in paper money.
    pub fn settle_in_cash(
        &mut self,
        payer: &str,
        payee: &str,
        amount: i64,
        date: NaiveDate,
    ) -> Result<BookingId> {
        if amount <= 0 {
            return Err(Error::NonPositiveAmount);
        }
        for bank in [payer, payee] {
            if !self.agent(bank)?.role.is_bank() {
                return Err(Error::NotABank(bank.to_string()));
            }
        }
        let open = self.balance(payee, &names::interbank_receivable(payer));
        if open < amount {
            return Err(Error::NoOpenClaim);
        }
        self.ensure_cash(payer)?;
        self.ensure_cash(payee)?;
        let draft = BookingDraft::new(date, BookingKind::Other, "cash settlement")
            .leg(LegDraft::new(payer).entry(EntryDraft::new(
                &names::interbank_payable(payee),
                names::CASH,
                amount,
                "settle residual claim in cash",
            )))
            .leg(LegDraft::new(payee).entry(EntryDraft::new(
                names::CASH,
                &names::interbank_receivable(payer),
                amount,
                "residual claim settled in cash",
            )));
        self.post_macro_booking(draft)
    }
}

/// Payment medium selection for money movements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Medium {
    Cash,
    Deposit,
    /// Cash when sufficient, deposits otherwise.
    Auto,
}

impl Medium {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "cash" => Medium::Cash,
            "deposit" => Medium::Deposit,
            "auto" => Medium::Auto,
            _ => return None,
        })
    }
}

/// Resolved account names for one money movement.
pub(crate) struct MoneyMovement {
    pub payer_credit: String,
    pub payee_debit: String,
}

/// Receivable/payable account names per claim category.
pub(crate) fn claim_account_names(
    category: ClaimCategory,
    creditor: &str,
    debtor: &str,
) -> (String, String) {
    match category {
        ClaimCategory::Trade => (names::receivable(debtor), names::payable(creditor)),
        ClaimCategory::Loan => (names::loan_receivable(debtor), names::loan_payable(creditor)),
        ClaimCategory::Interbank => (
            names::interbank_receivable(debtor),
            names::interbank_payable(creditor),
        ),
        ClaimCategory::Restitution => (
            names::restitution_receivable(debtor),
            names::restitution_payable(creditor),
        ),
        ClaimCategory::Boe | ClaimCategory::DepositMoney | ClaimCategory::BearerNotes => {
            unreachable!("bill, deposit, and banknote accounts are opened by their own ops")
        }
    }
}
