use std::collections::HashMap;
use std::sync::Mutex;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Monomial, PolyField};

/// Exact Haar integrals of polynomial fields on SU(n).
///
/// Balanced moments of order `k ≤ min(n, 3)` use the unitary Weingarten
/// function (phase-invariant integrands agree on U(n) and SU(n)); moments of
/// pure type `(n, 0)` or `(0, n)` come from the determinant. Terms that are
/// not invariant under the diagonal torus vanish; any other moment is refused.
#[derive(Debug)]
pub struct HaarMoments {
    n: usize,
    cache: Mutex<HashMap<Monomial, f64>>,
}

impl Clone for HaarMoments {
    fn clone(&self) -> Self {
        Self { n: self.n, cache: Mutex::new(self.cache.lock().expect("cache").clone()) }
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for i in 0..k {
            if !prefix.contains(&i) {
                prefix.push(i);
                rec(prefix, k, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), k, &mut out);
    out
}

/// Sign of a permutation given as an index tuple, or 0 on repeats.
fn levi_civita(idx: &[usize]) -> f64 {
    let mut sign = 1.0;
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            if idx[i] == idx[j] {
                return 0.0;
            }
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Cycle lengths of a permutation, descending.
fn cycle_type(p: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let (mut len, mut i) = (0, s);
        while !seen[i] {
            seen[i] = true;
            i = p[i];
            len += 1;
        }
        out.push(len);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

fn weingarten(cycles: &[usize], n: f64) -> f64 {
    let n2 = n * n;
    match cycles {
        [1] => 1.0 / n,
        [1, 1] => 1.0 / (n2 - 1.0),
        [2] => -1.0 / (n * (n2 - 1.0)),
        [1, 1, 1] => (n2 - 2.0) / (n * (n2 - 1.0) * (n2 - 4.0)),
        [2, 1] => -1.0 / ((n2 - 1.0) * (n2 - 4.0)),
        [3] => 2.0 / (n * (n2 - 1.0) * (n2 - 4.0)),
        _ => unreachable!("order ≤ 3"),
    }
}

impl HaarMoments {
    pub fn new(n: usize) -> Self {
        Self { n, cache: Mutex::new(HashMap::new()) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `∫ u dg` with the probability Haar measure.
    pub fn integrate(&self, u: &PolyField) -> Result<f64> {
        if u.n() != self.n {
            return Err(Error::SizeMismatch { left: self.n, right: u.n() });
        }
        let mut total = 0.0;
        for (m, c) in u.terms() {
            total += c * self.moment(m)?;
        }
        Ok(total)
    }

    pub fn moment(&self, m: &Monomial) -> Result<f64> {
        if let Some(&v) = self.cache.lock().expect("cache").get(m) {
            return Ok(v);
        }
        let v = self.compute(m)?;
        self.cache.lock().expect("cache").insert(m.clone(), v);
        Ok(v)
    }

    fn compute(&self, m: &Monomial) -> Result<f64> {
        let n = self.n;
        let vars = m.vars();
        let d = vars.len();
        if d == 0 {
            return Ok(1.0);
        }
        // Re z = (z + z̄)/2, Im z = -i/2 z + i/2 z̄.
        let entry = |v: u16| {
            let e = v as usize / 2;
            (e / n, e % n, v % 2 == 1)
        };
        let mut total = Complex64::new(0.0, 0.0);
        let mut z = Vec::with_capacity(d);
        let mut zb = Vec::with_capacity(d);
        for mask in 0u32..(1 << d) {
            z.clear();
            zb.clear();
            let mut coeff = Complex64::new(1.0, 0.0);
            for (t, &v) in vars.iter().enumerate() {
                let (a, b, imag) = entry(v);
                let conj = mask >> t & 1 == 1;
                let c = match (imag, conj) {
                    (false, _) => Complex64::new(0.5, 0.0),
                    (true, false) => Complex64::new(0.0, -0.5),
                    (true, true) => Complex64::new(0.0, 0.5),
                };
                coeff *= c;
                if conj { zb.push((a, b)) } else { z.push((a, b)) }
            }
            let (k, l) = (z.len(), zb.len());
            if !torus_invariant(&z, &zb, n) {
                continue;
            }
            let value = if k == l {
                if k > n.min(3) {
                    return Err(Error::Unsupported(format!(
                        "balanced Haar moment of order {k} on SU({n})"
                    )));
                }
                balanced(&z, &zb, n)
            } else if (k == n && l == 0) || (k == 0 && l == n) {
                let t = if l == 0 { &z } else { &zb };
                let rows: Vec<usize> = t.iter().map(|e| e.0).collect();
                let cols: Vec<usize> = t.iter().map(|e| e.1).collect();
                let fact: f64 = (1..=n).map(|i| i as f64).product();
                levi_civita(&rows) * levi_civita(&cols) / fact
            } else {
                return Err(Error::Unsupported(format!(
                    "Haar moment of type ({k}, {l}) on SU({n})"
                )));
            };
            total += coeff * value;
        }
        Ok(total.re)
    }
}

/// Invariance under left and right multiplication by the diagonal torus:
/// the per-row (and per-column) excess of `z` over `z̄` factors must agree.
fn torus_invariant(z: &[(usize, usize)], zb: &[(usize, usize)], n: usize) -> bool {
    let mut rows = vec![0i64; n];
    let mut cols = vec![0i64; n];
    for &(a, b) in z {
        rows[a] += 1;
        cols[b] += 1;
    }
    for &(a, b) in zb {
        rows[a] -= 1;
        cols[b] -= 1;
    }
    rows.iter().all(|&r| r == rows[0]) && cols.iter().all(|&c| c == cols[0])
}

/// `∫ Π z_{i_t j_t} Π z̄_{i'_t j'_t}` by the Weingarten sum over `σ, τ ∈ S_k`.
fn balanced(z: &[(usize, usize)], zb: &[(usize, usize)], n: usize) -> f64 {
    let k = z.len();
    let perms = permutations(k);
    let rows: Vec<&Vec<usize>> =
        perms.iter().filter(|s| (0..k).all(|t| z[t].0 == zb[s[t]].0)).collect();
    let cols: Vec<&Vec<usize>> =
        perms.iter().filter(|s| (0..k).all(|t| z[t].1 == zb[s[t]].1)).collect();
    let mut total = 0.0;
    for s in &rows {
        for t in &cols {
            // Cycle type of σ⁻¹τ.
            let mut inv = vec![0; k];
            for (i, &si) in s.iter().enumerate() {
                inv[si] = i;
            }
            let comp: Vec<usize> = (0..k).map(|i| inv[t[i]]).collect();
            total += weingarten(&cycle_type(&comp), n as f64);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{apply_field, Monomial};
    use crate::haar::{haar_quadrature, mean_and_stderr};
    use crate::lie::su_frame;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn re(a: usize, b: usize) -> PolyField {
        PolyField::re_entry(3, a, b, 3)
    }

    fn im(a: usize, b: usize) -> PolyField {
        PolyField::im_entry(3, a, b, 3)
    }

    #[test]
    fn known_moments() {
        let h = HaarMoments::new(3);
        let a11 = PolyField::abs2_entry(3, 0, 0, 2).unwrap();
        assert!((h.integrate(&a11).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        // |g_11|² ~ Beta(1, n-1): E|g_11|⁴ = 2/(n(n+1)), E|g_11|⁶ = 6/(n(n+1)(n+2)).
        assert!((h.integrate(&a11.mul(&a11)).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        let a6 = a11.mul(&a11).mul(&a11);
        assert!((h.integrate(&a6).unwrap() - 0.1).abs() < 1e-15);
        // E|g_11|²|g_22|² = 1/(n²-1) + ... via Weingarten: Wg[1,1] = 1/8.
        let a22 = PolyField::abs2_entry(3, 1, 1, 2).unwrap();
        assert!((h.integrate(&a11.mul(&a22)).unwrap() - 1.0 / 8.0).abs() < 1e-15);
        assert_eq!(h.integrate(&re(0, 1)).unwrap(), 0.0);
    }

    #[test]
    fn real_part_of_determinant_is_one() {
        let h = HaarMoments::new(3);
        // det g = Σ_σ sgn σ Π g_{k σ(k)}; its real part is expanded term by term.
        let perms = permutations(3);
        let mut det_re = PolyField::zero(3, 3);
        for p in perms {
            let s = levi_civita(&p);
            let (a, b, c) = ((0, p[0]), (1, p[1]), (2, p[2]));
            // Re(xyz) for complex x, y, z.
            let rr = re(a.0, a.1).mul(&re(b.0, b.1)).mul(&re(c.0, c.1));
            let rii = re(a.0, a.1).mul(&im(b.0, b.1)).mul(&im(c.0, c.1));
            let iri = im(a.0, a.1).mul(&re(b.0, b.1)).mul(&im(c.0, c.1));
            let iir = im(a.0, a.1).mul(&im(b.0, b.1)).mul(&re(c.0, c.1));
            det_re = det_re.axpy(s, &rr.sub(&rii).sub(&iri).sub(&iir));
        }
        assert!((h.integrate(&det_re).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn refuses_unsupported_orders() {
        let h = HaarMoments::new(3);
        let a = PolyField::abs2_entry(3, 0, 0, 2).unwrap();
        let a8 = a.mul(&a).mul(&a).mul(&a);
        assert!(matches!(h.integrate(&a8), Err(Error::Unsupported(_))));
    }

    #[test]
    fn agrees_with_monte_carlo() {
        let h = HaarMoments::new(3);
        let q = haar_quadrature(3, 60_000, 77).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..6 {
            let vars: Vec<u16> = (0..4).map(|_| rng.random_range(0..6u16)).collect();
            let m = Monomial::from_vars(vars);
            let exact = h.moment(&m).unwrap();
            let (mc, se) = mean_and_stderr(&q, |p| m.eval(&p.values)).unwrap();
            assert!((mc - exact).abs() < 4.0 * se + 1e-12, "{m:?}: {mc} vs {exact} ± {se}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn integration_by_parts_is_exact(seed in any::<u64>(), i in 0usize..8) {
            let f = su_frame(3).unwrap();
            let h = HaarMoments::new(3);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut field = || {
                let terms: Vec<(Monomial, f64)> = (0..6)
                    .map(|_| {
                        let d = rng.random_range(0..=2);
                        let vars = (0..d).map(|_| rng.random_range(0..18u16)).collect();
                        (Monomial::from_vars(vars), rng.random_range(-1.0..1.0))
                    })
                    .collect();
                PolyField::from_terms(3, 2, terms).unwrap()
            };
            let (u, v) = (field(), field());
            let x = &f.fields()[i];
            let lhs = apply_field(x, &u).unwrap().mul(&v).add(&u.mul(&apply_field(x, &v).unwrap()));
            prop_assert!(h.integrate(&lhs).unwrap().abs() < 1e-12);
        }
    }
}
