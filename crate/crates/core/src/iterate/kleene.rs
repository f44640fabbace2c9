use super::{check_guard, require_clean, residual_norm, Driver, IterationTrace, Method, StopRule};
use crate::error::{Error, Result};
use crate::scalar::Field;
use crate::system::SppSystem;

/// `κ^(k+1) = f(κ^(k))` from `κ^(0) = 0`.
pub fn kleene_run<F: Field>(sys: &SppSystem, field: &F, stop: &StopRule) -> Result<IterationTrace<F::Elem>> {
    if stop.target_certified_bits.is_some() {
        return Err(Error::InvalidStopRule("certified bits are only available for Newton".into()));
    }
    require_clean(sys)?;
    let compiled = sys.compile(field);
    let driver = Driver::new(field, stop)?;

    let mut x = field.zeros(sys.len());
    let mut iterates = Vec::new();
    let mut residuals = Vec::new();
    for k in 0.. {
        let fx = compiled.eval(&x);
        let r = residual_norm(compiled.zero(), &x, &fx);
        iterates.push(x);
        residuals.push(r);
        if let Some(reason) = driver.should_stop(k, residuals.last().unwrap()) {
            return Ok(IterationTrace {
                method: Method::Kleene,
                iterates,
                residuals,
                solver_notes: Vec::new(),
                stop_reason: reason,
                certificate: None,
            });
        }
        check_guard(&driver.guard, &fx, k + 1)?;
        x = fx;
    }
    unreachable!()
}
