//! # moma-core
//!
//! A deterministic monetary macro accounting engine.
//!
//! The engine models an economy as a network of per-agent double-entry
//! ledgers. Cross-agent transactions are *macro bookings*: atomic pairs of
//! micro bookings, one in each party's ledger ("quadruple accounting").
//! After every applied booking the engine re-verifies the system-wide
//! invariances:
//!
//! * **debt invariance** — the sum of receivables equals the sum of
//!   liabilities, pairwise per creditor/debtor relation;
//! * **payment invariance** — for every money movement, the payer-side
//!   expenditure equals the payee-side revenue;
//! * **money conservation** — issued minus destroyed money equals the cash
//!   held across all agents, at all times.
//!
//! On top of the ledger network sit three domain layers:
//!
//! * [`contracts`] — obligation contracts, disposition contracts, and
//!   restitution claims (the Separation and Abstraction principles);
//! * [`boe`] — the Bill of Exchange lifecycle: draw, accept, discount,
//!   endorse, interbank transfer, presentment, settlement, protest, and
//!   recourse over a hash-linked endorsement chain;
//! * [`issuance`] — money creation and destruction under fiat and
//!   gold-based regimes, central-bank and commercial-bank loan plumbing.
//!
//! The [`scenario`] module replays dated event scripts (built-in or from
//! `.moma` files) deterministically: identical input produces byte-identical
//! reports.
//!
//! All amounts are exact integers in minor units; rates are exact rationals.
//! No floating point participates in any balance or invariance computation.

pub mod boe;
pub mod check;
pub mod contracts;
pub mod error;
pub mod export;
pub mod issuance;
pub mod ledger;
pub mod lifecycle;
pub mod macro_ledger;
pub mod money;
pub mod rational;
pub mod scenario;
pub mod schedule;

pub use boe::{BillOfExchange, BillState, BoeId, Endorsement};
pub use contracts::{
    interest_rate, markup_profit, relative_price, ContractId, ContractKind, ContractStatus,
    DispositionContract, ObligationContract, RestitutionClaim, Thing,
};
pub use error::{Error, Result};
pub use issuance::{IssuedMoneyRegister, Regime};
pub use ledger::{
    Account, AccountId, AccountKind, BalanceSheet, Counterparty, EntryId, JournalEntry, Ledger,
    MoneyRole,
};
pub use macro_ledger::{
    Agent, AgentId, AgentRole, BookingId, BookingKind, InvarianceReport, MacroBooking, System,
};
pub use money::{Currency, Money};
pub use rational::Rational;
pub use scenario::{builtin, run, RunOptions, RunReport, Scenario, BUILTIN_NAMES};
pub use schedule::{liquidity_match, RepaymentSchedule};
