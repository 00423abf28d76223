use crate::error::{Error, Result};

/// `P(assigned j | prepared i)` over the first `levels` levels. Shots
/// prepared in a higher level are ignored; assignments to a higher level
/// count as errors.
pub fn confusion_matrix(assignments: &[u8], labels: &[u8], levels: usize) -> Result<Vec<Vec<f64>>> {
    if assignments.len() != labels.len() {
        return Err(Error::SizeMismatch { expected: labels.len(), got: assignments.len() });
    }
    if !(2..=3).contains(&levels) {
        return Err(Error::InvalidInput(format!("readout error is defined for 2 or 3 levels, not {levels}")));
    }
    let mut counts = vec![vec![0usize; 3]; levels];
    let mut totals = vec![0usize; levels];
    for (&a, &l) in assignments.iter().zip(labels) {
        let l = l as usize;
        if l < levels {
            totals[l] += 1;
            counts[l][(a as usize).min(2)] += 1;
        }
    }
    if let Some(i) = totals.iter().position(|&t| t == 0) {
        return Err(Error::InsufficientData(format!("no shots prepared in level {i}")));
    }
    Ok(counts.iter().zip(&totals).map(|(row, &t)| row[..levels].iter().map(|&c| c as f64 / t as f64).collect()).collect())
}

/// `ε^(N) = 1 − (1/N) Σ_i P(i|i)` from a confusion matrix.
pub fn readout_error_from_confusion(confusion: &[Vec<f64>]) -> f64 {
    let n = confusion.len() as f64;
    1.0 - confusion.iter().enumerate().map(|(i, row)| row[i]).sum::<f64>() / n
}

/// `N`-level readout error of classified shots.
pub fn readout_error(assignments: &[u8], labels: &[u8], levels: usize) -> Result<f64> {
    Ok(readout_error_from_confusion(&confusion_matrix(assignments, labels, levels)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_and_arithmetic() {
        let labels: Vec<u8> = (0..300).map(|i| (i % 3) as u8).collect();
        assert_eq!(readout_error(&labels, &labels, 3).unwrap(), 0.0);
        assert_eq!(readout_error(&labels, &labels, 2).unwrap(), 0.0);
        let all_zero = vec![0u8; 300];
        assert!((readout_error(&all_zero, &labels, 3).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let c = vec![vec![0.98, 0.02, 0.0], vec![0.02, 0.97, 0.01], vec![0.0, 0.07, 0.93]];
        assert!((readout_error_from_confusion(&c) - 0.04).abs() < 1e-15);
        assert!(readout_error(&[0, 0], &[0, 0], 2).is_err());
        assert!(readout_error(&[0], &[0, 1], 2).is_err());
    }
}
