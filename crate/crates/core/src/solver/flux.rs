use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radial model flux `a(ξ) = (δ + |ξ|²)^{(p-2)/2} ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSpec {
    pub p: f64,
    pub delta: f64,
}

impl FluxSpec {
    pub fn new(p: f64, delta: f64) -> Result<Self> {
        let s = Self { p, delta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::OutOfRange(format!("p = {} must exceed 1", self.p)));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::OutOfRange(format!("delta = {} not in [0, 1]", self.delta)));
        }
        Ok(())
    }

    /// Lower ellipticity constant `min(1, p-1)`.
    pub fn l(&self) -> f64 {
        (self.p - 1.0).min(1.0)
    }

    /// Upper constant `max(1, p-1) + 2`, which dominates the operator norm
    /// of the Jacobian and the flux magnitude.
    #[allow(non_snake_case)]
    pub fn L(&self) -> f64 {
        (self.p - 1.0).max(1.0) + 2.0
    }

    /// Bound for the sum of absolute Jacobian entries in `dim` components.
    pub fn entrywise_bound(&self, dim: usize) -> f64 {
        dim as f64 * (1.0 + (self.p - 2.0).abs())
    }

    /// Whether the energy is C¹ everywhere.
    pub fn is_smooth(&self) -> bool {
        self.p >= 2.0 || self.delta > 0.0
    }

    pub fn omega(&self, xi: &[f64]) -> f64 {
        self.delta + xi.iter().map(|x| x * x).sum::<f64>()
    }
}

fn check_point(xi: &[f64], spec: &FluxSpec) -> Result<f64> {
    if let Some(k) = xi.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index: k });
    }
    let w = spec.omega(xi);
    if w == 0.0 && spec.p < 2.0 {
        return Err(Error::Singular);
    }
    Ok(w)
}

pub fn flux(xi: &[f64], spec: &FluxSpec) -> Result<Vec<f64>> {
    let w = check_point(xi, spec)?;
    let s = if spec.p == 2.0 { 1.0 } else { w.powf((spec.p - 2.0) / 2.0) };
    Ok(xi.iter().map(|x| s * x).collect())
}

/// `ω^{(p-2)/2} (I + (p-2) ξξᵀ/ω)`.
pub fn flux_jacobian(xi: &[f64], spec: &FluxSpec) -> Result<DMatrix<f64>> {
    let w = check_point(xi, spec)?;
    let d = xi.len();
    let s = if spec.p == 2.0 { 1.0 } else { w.powf((spec.p - 2.0) / 2.0) };
    let mut j = DMatrix::identity(d, d) * s;
    if w > 0.0 && spec.p != 2.0 {
        let c = s * (spec.p - 2.0) / w;
        for a in 0..d {
            for b in 0..d {
                j[(a, b)] += c * xi[a] * xi[b];
            }
        }
    }
    Ok(j)
}

/// Extreme ratios observed over random `(ξ, η)`, normalized by the weight
/// `ω^{(p-2)/2}` (or `ω^{(p-1)/2}` for the flux magnitude).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticityReport {
    pub samples: usize,
    pub l_emp: f64,
    pub operator_emp: f64,
    pub entrywise_emp: f64,
    pub magnitude_emp: f64,
    pub l: f64,
    #[serde(rename = "L")]
    pub big_l: f64,
    pub entrywise_bound: f64,
}

/// Sample `ξ` over several scales and check the structure conditions.
/// A violation is an error carrying the offending sample.
pub fn ellipticity_check(spec: &FluxSpec, dim: usize, samples: usize, seed: u64) -> Result<EllipticityReport> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = EllipticityReport {
        samples,
        l_emp: f64::INFINITY,
        operator_emp: 0.0,
        entrywise_emp: 0.0,
        magnitude_emp: 0.0,
        l: spec.l(),
        big_l: spec.L(),
        entrywise_bound: spec.entrywise_bound(dim),
    };
    let tol = 1e-10;
    for k in 0..samples {
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let xi: Vec<f64> = (0..dim).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        let w = spec.omega(&xi);
        if w == 0.0 {
            continue;
        }
        let j = flux_jacobian(&xi, spec)?;
        let weight = w.powf((spec.p - 2.0) / 2.0);
        let eig = j.clone().symmetric_eigen().eigenvalues;
        let lo = eig.min() / weight;
        let hi = eig.iter().fold(0.0f64, |m, e| m.max(e.abs())) / weight;
        let sum = j.iter().map(|v| v.abs()).sum::<f64>() / weight;
        let a = flux(&xi, spec)?;
        let mag = a.iter().fold(0.0f64, |m, v| m.max(v.abs())) / w.powf((spec.p - 1.0) / 2.0);
        rep.l_emp = rep.l_emp.min(lo);
        rep.operator_emp = rep.operator_emp.max(hi);
        rep.entrywise_emp = rep.entrywise_emp.max(sum);
        rep.magnitude_emp = rep.magnitude_emp.max(mag);
        if lo < spec.l() * (1.0 - tol)
            || hi > spec.L() * (1.0 + tol)
            || sum > rep.entrywise_bound * (1.0 + tol)
            || mag > spec.L() * (1.0 + tol)
        {
            return Err(Error::Invariant(format!(
                "structure condition violated at sample {k}: xi = {xi:?}, lower {lo}, operator {hi}, entrywise {sum}, magnitude {mag}"
            )));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let s2 = FluxSpec::new(2.0, 0.3).unwrap();
        assert_eq!(flux(&[0.0; 6], &s2).unwrap(), vec![0.0; 6]);
        assert_eq!(flux(&[1.5, -2.0], &s2).unwrap(), vec![1.5, -2.0]);
        let s3 = FluxSpec::new(3.0, 0.0).unwrap();
        let a = flux(&[3.0, 4.0, 0.0, 0.0, 0.0, 0.0], &s3).unwrap();
        assert_eq!(a, vec![15.0, 20.0, 0.0, 0.0, 0.0, 0.0]);
        let s = FluxSpec::new(1.5, 0.0).unwrap();
        assert_eq!(flux(&[0.0; 3], &s), Err(Error::Singular));
        assert!(FluxSpec::new(1.0, 0.0).is_err());
        assert!(FluxSpec::new(2.0, 1.5).is_err());
    }

    #[test]
    fn jacobian_eigenvalues() {
        let s = FluxSpec::new(4.0, 0.0).unwrap();
        let mut e1 = vec![0.0; 6];
        e1[0] = 1.0;
        let mut eig: Vec<f64> = flux_jacobian(&e1, &s).unwrap().symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let expected = [3.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        assert!(eig.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-14));
        let id = flux_jacobian(&[0.3, 0.1, -2.0], &FluxSpec::new(2.0, 0.5).unwrap()).unwrap();
        assert_eq!(id, DMatrix::identity(3, 3));
    }

    #[test]
    fn structure_conditions_on_samples() {
        for &(p, delta) in &[(2.0, 0.0), (3.0, 0.0), (4.0, 1.0), (1.5, 0.5), (6.0, 0.1)] {
            let spec = FluxSpec::new(p, delta).unwrap();
            let r = ellipticity_check(&spec, 8, 10_000, 1).unwrap();
            assert!(r.l_emp >= spec.l() * (1.0 - 1e-12));
        }
    }

    proptest! {
        #[test]
        fn jacobian_matches_finite_differences(
            p in 2.0f64..5.0, delta in 0.0f64..1.0,
            xi in proptest::collection::vec(-2.0f64..2.0, 8),
            k in 0usize..8,
        ) {
            let spec = FluxSpec::new(p, delta).unwrap();
            prop_assume!(spec.omega(&xi) > 1e-2);
            let j = flux_jacobian(&xi, &spec).unwrap();
            let h = 1e-6;
            let mut xp = xi.clone();
            let mut xm = xi.clone();
            xp[k] += h;
            xm[k] -= h;
            let ap = flux(&xp, &spec).unwrap();
            let am = flux(&xm, &spec).unwrap();
            for i in 0..8 {
                let fd = (ap[i] - am[i]) / (2.0 * h);
                prop_assert!((fd - j[(i, k)]).abs() < 1e-6 * (1.0 + j[(i, k)].abs()));
            }
        }
    }
}
