//! Time-to-solution under the restart and rewind protocols.

use serde::{Deserialize, Serialize};

use super::{CostModel, CostReport, Units};
use crate::error::{Error, Result};
use crate::schedule::ScheduleData;

/// Truncation tolerance used when the series evaluator runs alongside the chain.
pub const SERIES_TOL: f64 = 1e-12;

const SERIES_MAX_TERMS: usize = 50_000_000;

/// Checks `gaps.len() == fidelities.len() + 1`, `F_j` in `[0, 1]`, gaps positive.
pub fn validate_profile(fidelities: &[f64], gaps: &[f64]) -> Result<()> {
    if fidelities.is_empty() || gaps.len() != fidelities.len() + 1 {
        return Err(Error::InvalidParameter(format!(
            "profile needs L >= 1 fidelities and L + 1 gaps, got {} and {}",
            fidelities.len(),
            gaps.len()
        )));
    }
    if let Some(f) = fidelities.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(Error::InvalidParameter(format!("fidelity {f} outside [0, 1]")));
    }
    if let Some(g) = gaps.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(Error::InvalidParameter(format!("gap {g} is not positive and finite")));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence epsilon {epsilon} outside (0, 1)")));
    }
    Ok(())
}

/// `ln(eps) / ln(1 - p)`, 1 when `p = 1`, infinite when `p = 0`.
pub fn repetitions(p: f64, epsilon: f64) -> f64 {
    if p >= 1.0 {
        1.0
    } else if p <= 0.0 {
        f64::INFINITY
    } else {
        epsilon.ln() / (-p).ln_1p()
    }
}

pub fn tts_plain_profile(fidelities: &[f64], gaps: &[f64], epsilon: f64) -> Result<CostReport> {
    validate_profile(fidelities, gaps)?;
    check_epsilon(epsilon)?;
    let p: f64 = fidelities.iter().product();
    let r = repetitions(p, epsilon);
    let per_step: Vec<f64> = gaps[1..].iter().map(|g| 1.0 / g).collect();
    let t_total: f64 = per_step.iter().sum();
    Ok(CostReport {
        model: CostModel::Plain,
        units: Units::HubbardTime,
        tts: r * t_total,
        repetitions: Some(r),
        success_prob: p,
        per_step,
        epsilon,
        step_gaps: gaps.to_vec(),
        fidelities: fidelities.to_vec(),
        normalized_tts: None,
        series_tts: None,
    })
}

/// Restart protocol: `R * sum_{j>=1} 1/Delta_j` with `R = ln(eps)/ln(1 - prod F_j)`.
pub fn tts_plain(data: &ScheduleData, epsilon: f64) -> Result<CostReport> {
    let mut report = tts_plain_profile(&data.fidelities, &data.gaps(), epsilon)?;
    report.normalized_tts = Some(tts_plain_profile(&data.fidelities, &data.normalized_gaps(), epsilon)?.tts);
    Ok(report)
}

fn check_step(f: f64, d_prev: f64, d: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidParameter(format!("fidelity {f} outside (0, 1]")));
    }
    if f == 0.0 {
        return Err(Error::Divergent("rewind step with zero fidelity never succeeds".into()));
    }
    if !(d_prev > 0.0 && d > 0.0 && d_prev.is_finite() && d.is_finite()) {
        return Err(Error::InvalidParameter(format!("gaps must be positive, got {d_prev}, {d}")));
    }
    Ok(())
}

/// Average rewind step cost from the printed double series
///
/// `F/D + 2 sum_{k1>=1} sum_{k2=0}^{k1} (1-F)^{2 k1} F^{2 k2 + 1} ((k1+k2+1)/D + (k1+k2)/D_prev)`,
///
/// truncated once a bound on the remaining `k1` terms drops below `tol`.
pub fn rewind_step_series(f: f64, d_prev: f64, d: f64, tol: f64) -> Result<f64> {
    check_step(f, d_prev, d)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("series tolerance {tol} must be positive")));
    }
    let (a, b) = (1.0 / d, 1.0 / d_prev);
    let q = (1.0 - f) * (1.0 - f);
    let mut total = f * a;
    if q == 0.0 {
        return Ok(total);
    }
    // g(k) bounds the k1 = k term since every F^{2 k2 + 1} <= 1
    let g = |k: f64| 2.0 * q.powf(k) * (k + 1.0) * ((2.0 * k + 1.0) * a + 2.0 * k * b);
    let f2 = f * f;
    // s0 = sum_{k2<=k1} F^{2 k2 + 1}, s1 = sum_{k2<=k1} k2 F^{2 k2 + 1}
    let (mut s0, mut s1) = (f, 0.0);
    let mut f_pow = f;
    let mut q_pow = 1.0;
    for k1 in 1..=SERIES_MAX_TERMS {
        let k = k1 as f64;
        f_pow *= f2;
        s0 += f_pow;
        s1 += k * f_pow;
        q_pow *= q;
        total += 2.0 * q_pow * (((k + 1.0) * a + k * b) * s0 + (a + b) * s1);
        let next = g(k + 1.0);
        let ratio = g(k + 2.0) / next;
        if next == 0.0 || (ratio < 1.0 && next / (1.0 - ratio) < tol) {
            return Ok(total);
        }
    }
    Err(Error::Divergent(format!(
        "series at F = {f} not converged after {SERIES_MAX_TERMS} terms"
    )))
}

/// Expected rewind step cost from the absorbing four-state walk:
/// `1/D + (1/D_prev + 1/D) / (2F)` for `F < 1`, `1/D` at `F = 1`.
pub fn rewind_step_chain(f: f64, d_prev: f64, d: f64) -> Result<f64> {
    check_step(f, d_prev, d)?;
    if f == 1.0 {
        return Ok(1.0 / d);
    }
    Ok(1.0 / d + (1.0 / d_prev + 1.0 / d) / (2.0 * f))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RewindEvaluator {
    #[default]
    Chain,
    Series { tol: f64 },
}

impl RewindEvaluator {
    pub fn step(&self, f: f64, d_prev: f64, d: f64) -> Result<f64> {
        match *self {
            RewindEvaluator::Chain => rewind_step_chain(f, d_prev, d),
            RewindEvaluator::Series { tol } => rewind_step_series(f, d_prev, d, tol),
        }
    }
}

/// Per-step rewind costs `A_j`, `j = 1..=L`; step 1 rewinds to the `s = 0` ground state.
pub fn rewind_steps(fidelities: &[f64], gaps: &[f64], evaluator: RewindEvaluator) -> Result<Vec<f64>> {
    validate_profile(fidelities, gaps)?;
    fidelities
        .iter()
        .enumerate()
        .map(|(i, &f)| evaluator.step(f, gaps[i], gaps[i + 1]))
        .collect()
}

pub fn tts_rewind_profile(
    fidelities: &[f64],
    gaps: &[f64],
    evaluator: RewindEvaluator,
) -> Result<CostReport> {
    let per_step = rewind_steps(fidelities, gaps, evaluator)?;
    Ok(CostReport {
        model: CostModel::Rewind,
        units: Units::HubbardTime,
        tts: per_step.iter().sum(),
        repetitions: None,
        success_prob: fidelities.iter().product(),
        per_step,
        epsilon: 0.0,
        step_gaps: gaps.to_vec(),
        fidelities: fidelities.to_vec(),
        normalized_tts: None,
        series_tts: None,
    })
}

/// Rewind TTS `sum_j A_j` with the chosen evaluator; the printed-series value
/// and the window-normalized value ride along for comparison.
pub fn tts_rewind(data: &ScheduleData, evaluator: RewindEvaluator) -> Result<CostReport> {
    let gaps = data.gaps();
    let mut report = tts_rewind_profile(&data.fidelities, &gaps, evaluator)?;
    let series = RewindEvaluator::Series { tol: SERIES_TOL };
    report.series_tts = Some(rewind_steps(&data.fidelities, &gaps, series)?.iter().sum());
    report.normalized_tts = Some(tts_rewind_profile(&data.fidelities, &data.normalized_gaps(), evaluator)?.tts);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Straight double loop over the printed indices, no rearrangement.
    fn naive_series(f: f64, d_prev: f64, d: f64, k_max: usize) -> f64 {
        let mut total = f / d;
        for k1 in 1..=k_max {
            for k2 in 0..=k1 {
                let (k1f, k2f) = (k1 as f64, k2 as f64);
                total += 2.0
                    * (1.0 - f).powi(2 * k1 as i32)
                    * f.powi(2 * k2 as i32 + 1)
                    * ((k1f + k2f + 1.0) / d + (k1f + k2f) / d_prev);
            }
        }
        total
    }

    #[test]
    fn plain_example() {
        let r = tts_plain_profile(&[0.5], &[1.0, 0.5], 0.01).unwrap();
        assert!((r.repetitions.unwrap() - 6.6439).abs() < 1e-4);
        assert!((r.tts - 13.2877).abs() < 1e-3);
        let exact = 2.0 * 0.01f64.ln() / 0.5f64.ln();
        assert!((r.tts - exact).abs() < 1e-12);
        r.validate().unwrap();
    }

    #[test]
    fn plain_deterministic_success() {
        let r = tts_plain_profile(&[1.0, 1.0], &[3.0, 0.5, 0.25], 0.01).unwrap();
        assert_eq!(r.repetitions, Some(1.0));
        assert_eq!(r.tts, 6.0);
    }

    #[test]
    fn plain_zero_success_is_infinite() {
        let r = tts_plain_profile(&[0.0], &[1.0, 1.0], 0.01).unwrap();
        assert!(r.tts.is_infinite());
        assert!(tts_plain_profile(&[0.5], &[1.0, 1.0], 1.0).is_err());
        assert!(tts_plain_profile(&[0.5], &[1.0], 0.1).is_err());
    }

    #[test]
    fn chain_examples() {
        assert_eq!(rewind_step_chain(0.5, 1.0, 1.0).unwrap(), 3.0);
        assert_eq!(rewind_step_chain(1.0, 7.0, 0.25).unwrap(), 4.0);
        assert!((rewind_step_chain(0.8, 0.5, 0.4).unwrap() - 5.3125).abs() < 1e-12);
        assert!(matches!(rewind_step_chain(0.0, 1.0, 1.0), Err(Error::Divergent(_))));
    }

    #[test]
    fn chain_solves_the_absorbing_walk() {
        // E_a = c + (1-F) E_d, E_d = p + F E_b + (1-F) E_a, E_b = c + F E_d
        for &(f, dp, d) in &[(0.3, 0.7, 1.9), (0.5, 1.0, 1.0), (0.95, 2.0, 0.5)] {
            let (c, p) = (1.0 / d, 1.0 / dp);
            let m = nalgebra::Matrix3::new(1.0, -(1.0 - f), 0.0, -(1.0 - f), 1.0, -f, 0.0, -f, 1.0);
            let rhs = nalgebra::Vector3::new(c, p, c);
            let e = m.lu().solve(&rhs).unwrap();
            assert!((e[0] - rewind_step_chain(f, dp, d).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn series_examples() {
        assert_eq!(rewind_step_series(1.0, 1.0, 0.25, 1e-10).unwrap(), 4.0);
        let v = rewind_step_series(0.5, 1.0, 1.0, 1e-10).unwrap();
        assert!((v - 2.2496).abs() < 1e-4, "{v}");
        assert!((v - naive_series(0.5, 1.0, 1.0, 200)).abs() < 1e-10);
        let half = rewind_step_series(0.5, 0.5, 0.5, 1e-12).unwrap();
        assert!((half - 2.0 * rewind_step_series(0.5, 1.0, 1.0, 1e-12).unwrap()).abs() < 1e-9);
        assert!(matches!(rewind_step_series(0.0, 1.0, 1.0, 1e-10), Err(Error::Divergent(_))));
    }

    #[test]
    fn series_matches_naive_loop() {
        for &(f, dp, d) in &[(0.3, 0.5, 1.0), (0.8, 2.0, 0.4), (0.05, 1.0, 1.0)] {
            let fast = rewind_step_series(f, dp, d, 1e-11).unwrap();
            let slow = naive_series(f, dp, d, 800);
            assert!((fast - slow).abs() < 1e-9 * slow.max(1.0), "{f}: {fast} vs {slow}");
        }
    }

    #[test]
    fn rewind_profile_uses_initial_gap() {
        let r = tts_rewind_profile(&[0.5], &[1.0, 1.0], RewindEvaluator::Chain).unwrap();
        assert_eq!(r.tts, 3.0);
        let r = tts_rewind_profile(&[0.5], &[0.5, 1.0], RewindEvaluator::Chain).unwrap();
        assert_eq!(r.tts, 1.0 + 3.0);
        let r = tts_rewind_profile(&[1.0, 1.0], &[1.0, 0.5, 0.25], RewindEvaluator::Chain).unwrap();
        assert_eq!(r.tts, 6.0);
        r.validate().unwrap();
    }

    proptest! {
        #[test]
        fn chain_decreasing_in_f(f1 in 0.01f64..0.99, df in 0.001f64..0.5, d in 0.05f64..5.0) {
            let f2 = (f1 + df).min(0.999);
            prop_assume!(f2 > f1);
            prop_assert!(rewind_step_chain(f2, d, d).unwrap() < rewind_step_chain(f1, d, d).unwrap());
        }

        #[test]
        fn chain_limit_at_one(d in 0.05f64..5.0) {
            let near = rewind_step_chain(1.0 - 1e-9, d, d).unwrap();
            prop_assert!((near - 2.0 / d).abs() < 1e-6 * (2.0 / d));
            prop_assert_eq!(rewind_step_chain(1.0, d, d).unwrap(), 1.0 / d);
        }

        #[test]
        fn costs_homogeneous_in_gaps(f in 0.05f64..1.0, dp in 0.05f64..5.0, d in 0.05f64..5.0, c in 0.1f64..10.0) {
            let a = rewind_step_chain(f, dp, d).unwrap();
            let b = rewind_step_chain(f, c * dp, c * d).unwrap();
            prop_assert!((a - c * b).abs() < 1e-10 * a);
            let a = rewind_step_series(f, dp, d, 1e-13).unwrap();
            let b = rewind_step_series(f, c * dp, c * d, 1e-13).unwrap();
            prop_assert!((a - c * b).abs() < 1e-8 * a.max(1.0));
            let p = tts_plain_profile(&[f], &[dp, d], 0.01).unwrap().tts;
            let q = tts_plain_profile(&[f], &[c * dp, c * d], 0.01).unwrap().tts;
            prop_assert!((p - c * q).abs() < 1e-10 * p);
        }

        #[test]
        fn plain_per_step_consistent(fs in proptest::collection::vec(0.05f64..1.0, 1..6), g0 in 0.1f64..3.0) {
            let gaps: Vec<f64> = (0..=fs.len()).map(|i| g0 + 0.1 * i as f64).collect();
            let r = tts_plain_profile(&fs, &gaps, 0.01).unwrap();
            prop_assert!(r.validate().is_ok());
        }
    }
}
