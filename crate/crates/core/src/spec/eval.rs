use crate::error::Result;
use crate::maxplus::MaxPlusMatrix;
use crate::num::Num;

use super::ast::TimeDiffProposition;

/// Truth of `t_i ∼ α` at state `x`, where `t_i = (A ⊗ x)_i - x_i`.
pub fn evaluate_timediff(a: &MaxPlusMatrix, x: &[Num], prop: &TimeDiffProposition) -> Result<bool> {
    let y = a.mat_vec(x)?;
    let t = y[prop.index] - x[prop.index];
    Ok(prop.op.holds(t, prop.alpha))
}

/// All time differences `(A ⊗ x) - x`.
pub fn time_differences(a: &MaxPlusMatrix, x: &[Num]) -> Result<Vec<Num>> {
    let y = a.mat_vec(x)?;
    Ok(y.iter().zip(x).map(|(&yi, &xi)| yi - xi).collect())
}
