use super::tensor::Tensor;
use super::NnError;

#[derive(Debug, Clone, PartialEq)]
pub struct LossOutput {
    /// Mean (optionally class-weighted) negative log-likelihood.
    pub loss: f64,
    pub probs: Tensor,
    /// dLoss/dLogits.
    pub grad: Tensor,
}

/// Row-wise softmax with the row max subtracted first.
pub fn softmax(logits: &Tensor) -> Result<Tensor, NnError> {
    let (_, classes) = logits.dims2("softmax input")?;
    let mut probs = logits.clone();
    for row in probs.data_mut().chunks_exact_mut(classes) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        row.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(probs)
}

/// Softmax cross-entropy over `logits: [B, K]`. With `class_weights`, each
/// sample's term and gradient are scaled by the weight of its gold class.
pub fn softmax_cross_entropy(
    logits: &Tensor,
    gold: &[usize],
    class_weights: Option<&[f64]>,
) -> Result<LossOutput, NnError> {
    let (batch, classes) = logits.dims2("loss logits")?;
    if gold.len() != batch {
        return Err(NnError::Shape(format!("{} labels for {batch} rows", gold.len())));
    }
    if let Some(&bad) = gold.iter().find(|&&g| g >= classes) {
        return Err(NnError::Index { index: bad, bound: classes });
    }
    if class_weights.is_some_and(|w| w.len() != classes) {
        return Err(NnError::Shape(format!("class weights must have {classes} entries")));
    }
    let probs = softmax(logits)?;
    let mut grad = probs.clone();
    let mut loss = 0.0;
    let ld = logits.data();
    for (r, &y) in gold.iter().enumerate() {
        let row = &ld[r * classes..(r + 1) * classes];
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        let weight = class_weights.map_or(1.0, |w| w[y]);
        loss += weight * (log_sum - (row[y] - max));
        let g = &mut grad.data_mut()[r * classes..(r + 1) * classes];
        g[y] -= 1.0;
        g.iter_mut().for_each(|v| *v *= weight / batch as f64);
    }
    Ok(LossOutput { loss: loss / batch as f64, probs, grad })
}
