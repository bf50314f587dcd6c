//! Engine-wide error type.
//!
//! Every fallible operation in the crate returns [`Result`]. Scenario
//! execution wraps the underlying error with the offending event index and
//! date so a failing script line can be pinpointed.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    // ---- ledger ----
    #[error("account '{name}' already exists for agent '{agent}'")]
    DuplicateAccount { agent: String, name: String },
    #[error("unknown account '{name}' for agent '{agent}'")]
    UnknownAccount { agent: String, name: String },
    #[error("unknown agent '{0}'")]
    UnknownAgent(String),
    #[error("agent '{0}' already declared")]
    DuplicateAgent(String),
    #[error("entry would span agents '{0}' and '{1}'; micro entries are per-agent")]
    CrossAgentEntry(String, String),
    #[error("amount must be positive")]
    NonPositiveAmount,
    #[error("currency mismatch: {0} vs {1}")]
    CurrencyMismatch(String, String),
    #[error("posting would leave non-contra account '{account}' of '{agent}' with an abnormal balance of {balance}")]
    AbnormalBalance {
        agent: String,
        account: String,
        balance: i64,
    },
    #[error("debit and credit account must differ")]
    SameAccount,
    #[error("amount overflows the 64-bit minor-unit range")]
    AmountOverflow,

    // ---- macro ledger ----
    #[error("singleton bookings are reserved for the central bank (booking '{0}')")]
    ArityViolation(String),
    #[error("leg of agent '{agent}' in booking '{label}' does not balance: debits {debits}, credits {credits}")]
    LegImbalance {
        label: String,
        agent: String,
        debits: i64,
        credits: i64,
    },
    #[error("invariance violated after booking '{label}': {detail}")]
    InvarianceViolation { label: String, detail: String },
    #[error("agent '{0}' is not a bank")]
    NotABank(String),
    #[error("insufficient central bank deposit: need {need}, have {have}")]
    InsufficientCentralBankDeposit { need: i64, have: i64 },
    #[error("no open claim between the parties to settle")]
    NoOpenClaim,
    #[error("exactly one central bank must exist in the system")]
    CentralBankMissing,

    // ---- contracts ----
    #[error("a contract needs two distinct parties")]
    SelfContract,
    #[error("promises do not fit the contract kind: {0}")]
    IllTypedPromises(String),
    #[error("agent '{agent}' does not own {thing}")]
    NotOwner { agent: String, thing: String },
    #[error("disposition already executed")]
    AlreadyExecuted,
    #[error("contract already invalidated")]
    AlreadyInvalidated,
    #[error("restitution claim already settled")]
    AlreadySettled,
    #[error("unknown contract id {0}")]
    UnknownContract(u64),
    #[error("unknown disposition id {0}")]
    UnknownDisposition(u64),
    #[error("unknown restitution claim id {0}")]
    UnknownRestitution(u64),
    #[error("interest rate is undefined for a zero payout")]
    ZeroPayout,
    #[error("relative price is undefined for a zero denominator price")]
    ZeroDenominator,
    #[error("markup must be strictly greater than one")]
    MarkupNotAboveOne,

    // ---- bill of exchange ----
    #[error("maturity must lie strictly after the issue date")]
    PastMaturity,
    #[error("face value must be positive")]
    NonPositiveFace,
    #[error("bill {bill} is in state {state}, operation requires {expected}")]
    WrongState {
        bill: u64,
        state: String,
        expected: String,
    },
    #[error("discount rate out of range: the discount must be non-negative and below the face value")]
    RateOutOfRange,
    #[error("bill is not endorsable")]
    NotEndorsable,
    #[error("agent '{0}' is not the current holder of the bill")]
    NotHolder(String),
    #[error("cannot transfer a bill to its current holder")]
    SelfTransfer,
    #[error("presentment before maturity")]
    TooEarly,
    #[error("agent '{agent}' lacks funds: need {need}, have {have}")]
    InsufficientFunds {
        agent: String,
        need: i64,
        have: i64,
    },
    #[error("agent '{0}' is not a recourse debtor of the bill")]
    NotRecourseDebtor(String),
    #[error("unknown bill id {0}")]
    UnknownBill(u64),
    #[error("no open underlying claim of at least the face value exists between payee and drawee")]
    NoUnderlyingClaim,

    // ---- issuance ----
    #[error("only the central bank may perform this operation (caller '{0}')")]
    NotCentralBank(String),
    #[error("operation requires the fiat regime; the system runs gold-based money")]
    GoldRegime,
    #[error("operation requires the gold-based regime; the system runs fiat money")]
    NotGoldRegime,
    #[error("credibility rating {rating} of '{agent}' is below the threshold {threshold}")]
    BelowCredibilityRating {
        agent: String,
        rating: u8,
        threshold: u8,
    },
    #[error("insufficient deposit: need {need}, have {have}")]
    InsufficientDeposit { need: i64, have: i64 },
    #[error("insufficient central bank vault cash: need {need}, have {have}")]
    InsufficientVaultCash { need: i64, have: i64 },
    #[error("insufficient bank cash: need {need}, have {have}")]
    InsufficientBankCash { need: i64, have: i64 },

    // ---- scenarios ----
    #[error("unknown built-in scenario '{0}'")]
    UnknownScenario(String),
    #[error("scenario parse error at line {line}, column {col}: {msg}")]
    ScenarioParse { line: usize, col: usize, msg: String },
    #[error("event {index} ({date} {command}) failed: {source}")]
    ScenarioEvent {
        index: usize,
        date: chrono::NaiveDate,
        command: String,
        #[source]
        source: Box<Error>,
    },
    #[error("scenario assertion failed: {0}")]
    ScenarioAssertion(String),
    #[error("repayment schedule needs a positive principal")]
    NonPositivePrincipal,
    #[error("date outside the schedule horizon")]
    OutOfHorizon,
    #[error("unknown schedule id '{0}'")]
    UnknownSchedule(String),
    #[error("unknown product id '{0}'")]
    UnknownProduct(String),

    // ---- reporting / verification ----
    #[error("unknown report view '{0}'")]
    UnknownView(String),
    #[error("journal verification failed at row {row}: {msg}")]
    CheckFailed { row: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
