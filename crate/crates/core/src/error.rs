use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("residue {value} is out of range for modulus {modulus}")]
    ResidueOutOfRange { value: u64, modulus: u64 },

    #[error("p^{level} does not fit the 63-bit working range (p = {p})")]
    PrecisionExceeded { p: u64, level: u32 },

    #[error("enumeration needs {required} points but the budget is {budget}")]
    BudgetExceeded { required: u64, budget: u64 },

    #[error("{0} is divisible by p and has no multiplicative order")]
    ZeroResidue(u64),

    #[error("residue {rep} does not lie on a {length}-cycle at level {level}")]
    NotACycle { rep: u64, length: u64, level: u32 },

    #[error("map is undefined at {0} (denominator divisible by p)")]
    Pole(u64),

    #[error("{0} is not a periodic point of the given length")]
    NotPeriodic(String),

    #[error("the multiplier of the orbit is divisible by p (tails case)")]
    DerivativeDivisibleByP,

    #[error("h' = 1 and h has no nonvanishing higher Taylor coefficient: the map is linear")]
    LinearIdentity,

    #[error("no nonvanishing Taylor coefficient of order 2..={0} was found")]
    OrderSearchExhausted(usize),

    #[error("surrogate polynomial would have degree {degree}, above the budget {budget}")]
    DegreeTooLarge { degree: u128, budget: u128 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
