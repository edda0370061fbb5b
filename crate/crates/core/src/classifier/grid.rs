use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::logistic::{train_linear, ClassWeighting};
use super::{ClassifierError, Matrix};

/// Candidate costs for the grid search.
pub const COST_GRID: [f64; 6] = [0.001, 0.01, 0.1, 1.0, 10.0, 100.0];
/// Cost used when the validation split cannot be stratified.
pub const FALLBACK_COST: f64 = 1.0;
/// Minimum members per class for a stratified one-third split.
pub const MIN_CLASS_FOR_SPLIT: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CostSelection {
    pub cost: f64,
    /// Set when the grid search was skipped for lack of examples.
    pub fallback: bool,
    /// `(C, validation F1)` for every evaluated grid point.
    pub validation_f1: Vec<(f64, f64)>,
}

impl CostSelection {
    pub fn fixed(cost: f64) -> Self {
        Self {
            cost,
            fallback: false,
            validation_f1: Vec::new(),
        }
    }
}

/// Splits indices into `(train, validation)` with one third of each class
/// (rounded, at least one) in validation. `None` if a class has fewer than
/// three members.
pub fn stratified_split(y: &[bool], seed: u64) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut validation = Vec::new();
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if idx.len() < MIN_CLASS_FOR_SPLIT {
            return None;
        }
        idx.shuffle(&mut rng);
        let n_val = ((idx.len() as f64 / 3.0).round() as usize).clamp(1, idx.len() - 1);
        validation.extend_from_slice(&idx[..n_val]);
        train.extend_from_slice(&idx[n_val..]);
    }
    train.sort_unstable();
    validation.sort_unstable();
    Some((train, validation))
}

/// F1 with an undefined value counted as 0.
fn f1_or_zero(truth: &[bool], decisions: impl Iterator<Item = bool>) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&t, d) in truth.iter().zip(decisions) {
        match (t, d) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            _ => {}
        }
    }
    if tp == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    }
}

/// Picks the grid cost with the highest validation F1 on a stratified
/// one-third split of standardized rows. Ties go to the smaller cost.
pub fn select_cost(
    x: &Matrix,
    y: &[bool],
    weighting: ClassWeighting,
    seed: u64,
) -> Result<CostSelection, ClassifierError> {
    let Some((train, validation)) = stratified_split(y, seed) else {
        return Ok(CostSelection {
            cost: FALLBACK_COST,
            fallback: true,
            validation_f1: Vec::new(),
        });
    };
    let xt = x.select_rows(&train);
    let yt: Vec<bool> = train.iter().map(|&i| y[i]).collect();
    let xv = x.select_rows(&validation);
    let yv: Vec<bool> = validation.iter().map(|&i| y[i]).collect();
    let mut scores = Vec::with_capacity(COST_GRID.len());
    let mut best = (COST_GRID[0], f64::NEG_INFINITY);
    for &c in &COST_GRID {
        let model = train_linear(&xt, &yt, c, weighting)?;
        let f1 = f1_or_zero(&yv, xv.iter_rows().map(|r| model.decision_value(r) > 0.0));
        scores.push((c, f1));
        if f1 > best.1 {
            best = (c, f1);
        }
    }
    Ok(CostSelection {
        cost: best.0,
        fallback: false,
        validation_f1: scores,
    })
}
