use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EconomicsError {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("discount rate must be >= 0, got {0}")]
    NegativeRate(f64),
    #[error("lifetime must be >= 1 year, got {0}")]
    ShortLifetime(f64),
}

/// Capital recovery factor: the constant yearly payment, as a fraction of
/// the upfront investment, that repays it over `lifetime` years at `rate`.
///
/// Falls back to straight-line `1 / lifetime` when `rate` is zero.
pub fn annuity_factor(rate: f64, lifetime: f64) -> Result<f64, EconomicsError> {
    if !rate.is_finite() {
        return Err(EconomicsError::NonFinite("rate"));
    }
    if !lifetime.is_finite() {
        return Err(EconomicsError::NonFinite("lifetime"));
    }
    if rate < 0.0 {
        return Err(EconomicsError::NegativeRate(rate));
    }
    if lifetime < 1.0 {
        return Err(EconomicsError::ShortLifetime(lifetime));
    }
    if rate == 0.0 {
        return Ok(1.0 / lifetime);
    }
    // -expm1(-n ln(1+r)) = 1 - (1+r)^-n, accurate for tiny rates too.
    let denom = -(-lifetime * rate.ln_1p()).exp_m1();
    Ok(rate / denom)
}

/// `investment × (annuity + fom_frac)`: yearly capital plus fixed O&M.
pub fn annualized_capital(investment: f64, rate: f64, lifetime: f64, fom_frac: f64) -> Result<f64, EconomicsError> {
    if !investment.is_finite() {
        return Err(EconomicsError::NonFinite("investment"));
    }
    if !fom_frac.is_finite() {
        return Err(EconomicsError::NonFinite("fom_frac"));
    }
    Ok(investment * annuity_factor(rate, lifetime)? + investment * fom_frac)
}
