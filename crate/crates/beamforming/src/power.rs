use crate::BeamformingError;

/// Water-filling outcome: `powers[k] = max(level - g_k s2, 0) / g_k`, with
/// `sum_k max(level - g_k s2, 0) = budget`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterFilling {
    pub powers: Vec<f64>,
    /// Water level `1/mu`.
    pub level: f64,
}

impl WaterFilling {
    pub fn active(&self) -> usize {
        self.powers.iter().filter(|&&p| p > 0.0).count()
    }
}

fn check(gains: &[f64], noise: f64, budget: f64) -> Result<(), BeamformingError> {
    if gains.is_empty() {
        return Err(BeamformingError::EmptyGains);
    }
    if let Some(&g) = gains.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(BeamformingError::BadGain(g));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(BeamformingError::BadNoise(noise));
    }
    if !(budget.is_finite() && budget > 0.0) {
        return Err(BeamformingError::BadBudget(budget));
    }
    Ok(())
}

/// Solves the water level exactly: users enter in order of increasing
/// `g_k s2` and the level for `m` active users is `(budget + sum g s2) / m`.
pub fn water_filling(gains: &[f64], noise: f64, budget: f64) -> Result<WaterFilling, BeamformingError> {
    check(gains, noise, budget)?;
    let mut floors: Vec<f64> = gains.iter().map(|g| g * noise).collect();
    floors.sort_by(f64::total_cmp);
    let mut sum = 0.0;
    let mut level = 0.0;
    for (m, &f) in floors.iter().enumerate() {
        sum += f;
        level = (budget + sum) / (m + 1) as f64;
        if floors.get(m + 1).map_or(true, |&next| level <= next) {
            break;
        }
    }
    let powers = gains.iter().map(|g| (level - g * noise).max(0.0) / g).collect();
    Ok(WaterFilling { powers, level })
}

/// Water-filling powers, scaled down proportionally if they exceed the budget.
pub fn allocate_power(gains: &[f64], noise: f64, budget: f64) -> Result<Vec<f64>, BeamformingError> {
    let mut p = water_filling(gains, noise, budget)?.powers;
    let total: f64 = p.iter().sum();
    if total > budget {
        let s = budget / total;
        p.iter_mut().for_each(|x| *x *= s);
    }
    Ok(p)
}
