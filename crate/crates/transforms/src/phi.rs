use crate::TransformError;

fn interior(v: &[f64], what: &str) -> Result<(), TransformError> {
    if v.is_empty() || v.iter().any(|&x| !(x > 0.0)) {
        return Err(TransformError::Boundary(format!("{what} has a non-positive component")));
    }
    if (v.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(TransformError::Boundary(format!("{what} does not sum to one")));
    }
    Ok(())
}

/// Formula without domain checks; also meaningful on the boundary.
pub fn phi_unchecked(first: &[f64], second: &[f64], pass: usize) -> Vec<f64> {
    let p = first[pass];
    first
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != pass)
        .map(|(_, &x)| x)
        .chain(second.iter().map(|&x| p * x))
        .collect()
}

/// Maps interior mixes at the earlier and later information set to one mix at the merged set.
///
/// Merged actions are the earlier set's actions without `pass`, followed by the later set's.
pub fn phi(first: &[f64], second: &[f64], pass: usize) -> Result<Vec<f64>, TransformError> {
    if pass >= first.len() {
        return Err(TransformError::Dimension(format!("pass index {pass} out of range")));
    }
    interior(first, "first mix")?;
    interior(second, "second mix")?;
    Ok(phi_unchecked(first, second, pass))
}

/// Inverse of [`phi`]; `m` is the number of non-pass actions at the earlier set.
pub fn phi_inverse(star: &[f64], m: usize, pass: usize) -> Result<(Vec<f64>, Vec<f64>), TransformError> {
    if m >= star.len() || pass > m {
        return Err(TransformError::Dimension(format!("cannot split {} actions at {m}", star.len())));
    }
    interior(star, "merged mix")?;
    let tail: f64 = star[m..].iter().sum();
    let mut first: Vec<f64> = star[..m].to_vec();
    first.insert(pass, tail);
    let second = star[m..].iter().map(|x| x / tail).collect();
    Ok((first, second))
}
