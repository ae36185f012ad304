//! Cartan subalgebras and the real root-space decomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::algebra::{LieAlgebra, StructureConstants};
use super::element::{bracket_unchecked, AlgebraElement};
use crate::error::{Error, Result};

/// Relative eigenvalue gap below which two values of `(ad T)²` are grouped.
pub const CLUSTER_TOL: f64 = 1e-8;

const INVARIANT_TOL: f64 = 1e-10;

/// A positive root: coordinates in the Cartan basis and the root vector itself.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveRoot {
    pub coords: Vec<f64>,
    pub vector: AlgebraElement,
}

/// Orthonormal real pair spanning one root space, with `[odd, even] = −R`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootPair {
    pub odd: AlgebraElement,
    pub even: AlgebraElement,
    pub root_index: usize,
}

/// Output of the root-space decomposition.
#[derive(Debug, Clone)]
pub struct RootDatum {
    algebra: LieAlgebra,
    cartan_basis: Vec<AlgebraElement>,
    positive_roots: Vec<PositiveRoot>,
    pairs: Vec<RootPair>,
    root_basis_indices: Vec<usize>,
}

/// Largest residuals of the structural identities, from [`RootDatum::verify`].
#[derive(Debug, Clone, Default, Serialize)]
pub struct RootPropertyReport {
    pub cartan_commute: f64,
    pub pair_bracket: f64,
    pub even_root_bracket: f64,
    pub root_odd_bracket: f64,
    pub unpaired_cartan_component: f64,
    pub cartan_action_leak: f64,
    pub pair_orthonormality: f64,
}

impl RootPropertyReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.cartan_commute,
            self.pair_bracket,
            self.even_root_bracket,
            self.root_odd_bracket,
            self.unpaired_cartan_component,
            self.cartan_action_leak,
            self.pair_orthonormality,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn ad_of(sc: &StructureConstants, coords: &[f64]) -> DMatrix<f64> {
    let d = sc.dim();
    let mut m = DMatrix::zeros(d, d);
    for (i, &c) in coords.iter().enumerate() {
        if c != 0.0 {
            m += sc.ad_matrix(i) * c;
        }
    }
    m
}

fn snap(v: &mut DVector<f64>) {
    for x in v.iter_mut() {
        if x.abs() < 1e-12 {
            *x = 0.0;
        }
    }
    let n = v.norm();
    if n > 0.0 {
        *v /= n;
    }
}

fn unit(d: usize, i: usize) -> DVector<f64> {
    DVector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 })
}

fn commutant(sc: &StructureConstants, set: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let d = sc.dim();
    let mut m = DMatrix::zeros(d * set.len(), d);
    for (s_idx, s) in set.iter().enumerate() {
        let ad = ad_of(sc, s.as_slice());
        m.view_mut((s_idx * d, 0), (d, d)).copy_from(&ad);
    }
    // Scale-aware kernel: eigenvalues of MᵀM relative to the largest.
    let mtm = m.transpose() * &m;
    let eig = SymmetricEigen::new(mtm);
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    (0..d)
        .filter(|&k| eig.eigenvalues[k].abs() <= 1e-18 * top.max(1e-300) || top == 0.0)
        .map(|k| eig.eigenvectors.column(k).into_owned())
        .collect()
}

/// Greedy maximal commutative subalgebra, starting from the first basis element.
///
/// Each step solves the commuting-kernel problem for the current set and adds
/// the normalized projection of the first basis element that has a component
/// in the kernel outside the current span.
pub fn cartan_subalgebra(algebra: &LieAlgebra) -> Result<Vec<AlgebraElement>> {
    let report = algebra.is_compact_semisimple();
    if !report.compact_semisimple {
        return Err(Error::NotSemisimple(format!(
            "Killing eigenvalues {:?}",
            report.killing_eigenvalues
        )));
    }
    let sc = algebra.structure_constants()?;
    let d = algebra.dimension();
    let mut set: Vec<DVector<f64>> = vec![unit(d, 0)];
    loop {
        let kernel = commutant(&sc, &set);
        let mut next = None;
        for b in 0..d {
            let e = unit(d, b);
            let mut v = DVector::zeros(d);
            for k in &kernel {
                v.axpy(k.dot(&e), k, 1.0);
            }
            for s in &set {
                let c = s.dot(&v);
                v.axpy(-c, s, 1.0);
            }
            if v.norm() > 1e-8 {
                snap(&mut v);
                next = Some(v);
                break;
            }
        }
        match next {
            Some(v) => set.push(v),
            None => break,
        }
    }
    let kernel = commutant(&sc, &set);
    if kernel.len() != set.len() {
        return Err(Error::Invariant(format!(
            "commutant has dimension {} but the torus has {}",
            kernel.len(),
            set.len()
        )));
    }
    Ok(set.iter().map(|v| algebra.element(v.as_slice())).collect())
}

impl RootDatum {
    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn cartan_basis(&self) -> &[AlgebraElement] {
        &self.cartan_basis
    }

    pub fn positive_roots(&self) -> &[PositiveRoot] {
        &self.positive_roots
    }

    pub fn pairs(&self) -> &[RootPair] {
        &self.pairs
    }

    pub fn root_basis_indices(&self) -> &[usize] {
        &self.root_basis_indices
    }

    /// Rank ν.
    pub fn rank(&self) -> usize {
        self.cartan_basis.len()
    }

    /// Check the structural identities of the horizontal basis.
    ///
    /// For every pair `(X_o, X_e)` with root `R`:
    /// `[X_o, X_e] = −R`, `[X_e, R] = −|R|² X_o`, `[R, X_o] = −|R|² X_e`;
    /// brackets of non-paired horizontal elements have no Cartan component;
    /// `[X_o, T]` and `[X_e, T]` stay in `span{X_o, X_e}`.
    pub fn verify(&self) -> RootPropertyReport {
        let alg = &self.algebra;
        let mut rep = RootPropertyReport::default();
        for (i, a) in self.cartan_basis.iter().enumerate() {
            for b in &self.cartan_basis[i + 1..] {
                rep.cartan_commute = rep.cartan_commute.max(bracket_unchecked(a, b).max_abs());
            }
        }
        let horizontal: Vec<&AlgebraElement> =
            self.pairs.iter().flat_map(|p| [&p.odd, &p.even]).collect();
        for (i, x) in horizontal.iter().enumerate() {
            for (j, y) in horizontal.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                rep.pair_orthonormality =
                    rep.pair_orthonormality.max((alg.inner_unchecked(x, y) - target).abs());
            }
        }
        for p in &self.pairs {
            let r = &self.positive_roots[p.root_index].vector;
            let r2 = alg.inner_unchecked(r, r);
            rep.pair_bracket =
                rep.pair_bracket.max(bracket_unchecked(&p.odd, &p.even).add(r).max_abs());
            rep.even_root_bracket = rep
                .even_root_bracket
                .max(bracket_unchecked(&p.even, r).add(&p.odd.scale(r2)).max_abs());
            rep.root_odd_bracket = rep
                .root_odd_bracket
                .max(bracket_unchecked(r, &p.odd).add(&p.even.scale(r2)).max_abs());
            for t in &self.cartan_basis {
                for x in [&p.odd, &p.even] {
                    let b = bracket_unchecked(x, t);
                    let co = alg.inner_unchecked(&b, &p.odd);
                    let ce = alg.inner_unchecked(&b, &p.even);
                    let leak = b.sub(&p.odd.scale(co)).sub(&p.even.scale(ce)).max_abs();
                    rep.cartan_action_leak = rep.cartan_action_leak.max(leak);
                }
            }
        }
        for (i, x) in horizontal.iter().enumerate() {
            for (j, y) in horizontal.iter().enumerate() {
                let paired = i / 2 == j / 2;
                if paired {
                    continue;
                }
                let b = bracket_unchecked(x, y);
                for t in &self.cartan_basis {
                    rep.unpaired_cartan_component =
                        rep.unpaired_cartan_component.max(alg.inner_unchecked(&b, t).abs());
                }
            }
        }
        rep
    }

    pub(crate) fn check(&self) -> Result<RootPropertyReport> {
        let rep = self.verify();
        if rep.max_residual() > INVARIANT_TOL {
            return Err(Error::Invariant(format!("root datum residuals {rep:?}")));
        }
        Ok(rep)
    }
}

fn generic_weights(nu: usize) -> Vec<f64> {
    // Irrational, pairwise unrelated weights; a fixed choice keeps the output deterministic.
    let w: Vec<f64> = (0..nu)
        .map(|k| {
            let x = ((k as f64) + 2.0).sqrt() * std::f64::consts::E;
            0.5 + x.fract()
        })
        .collect();
    let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    w.into_iter().map(|x| x / n).collect()
}

/// Simultaneous eigendecomposition of `{ad T : T ∈ cartan}` into real root pairs.
pub fn root_space_decomposition(
    algebra: &LieAlgebra,
    cartan: &[AlgebraElement],
) -> Result<RootDatum> {
    let d = algebra.dimension();
    let nu = cartan.len();
    if nu == 0 {
        return Err(Error::Precondition("empty Cartan subalgebra".into()));
    }
    let sc = algebra.structure_constants()?;
    let tcoords: Vec<DVector<f64>> = cartan
        .iter()
        .map(|t| algebra.coordinates(t).map(DVector::from_vec))
        .collect::<Result<_>>()?;
    for (i, a) in tcoords.iter().enumerate() {
        for (j, b) in tcoords.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            if (a.dot(b) - target).abs() > 1e-10 {
                return Err(Error::Precondition("Cartan basis is not orthonormal".into()));
            }
        }
    }
    if commutant(&sc, &tcoords).len() != nu {
        return Err(Error::Precondition("not a maximal commutative subalgebra".into()));
    }
    let ads: Vec<DMatrix<f64>> = tcoords.iter().map(|t| ad_of(&sc, t.as_slice())).collect();
    let w = generic_weights(nu);
    let mut generic = DMatrix::zeros(d, d);
    for (a, wk) in ads.iter().zip(&w) {
        generic += a * *wk;
    }
    let sq = &generic * &generic;
    let sym = (&sq + sq.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if scale == 0.0 {
        return Err(Error::NotSemisimple("ad T vanishes identically".into()));
    }
    // Group sorted eigenvalues into clusters.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut min_gap = f64::INFINITY;
    for &k in &order {
        let v = eig.eigenvalues[k];
        match clusters.last_mut() {
            Some(c) if (eig.eigenvalues[*c.last().unwrap()] - v).abs() <= CLUSTER_TOL * scale => {
                c.push(k)
            }
            Some(c) => {
                min_gap = min_gap.min((eig.eigenvalues[*c.last().unwrap()] - v).abs() / scale);
                clusters.push(vec![k]);
            }
            None => clusters.push(vec![k]),
        }
    }
    let mut root_spaces = Vec::new();
    let mut zero_dim = 0;
    for c in &clusters {
        let v = eig.eigenvalues[c[0]];
        if v.abs() <= CLUSTER_TOL * scale {
            zero_dim += c.len();
        } else if c.len() == 2 {
            root_spaces.push(c.clone());
        } else {
            return Err(Error::Degenerate { gap: min_gap });
        }
    }
    if zero_dim != nu {
        return Err(Error::Degenerate { gap: min_gap });
    }
    struct Found {
        first_index: usize,
        odd: DVector<f64>,
        even: DVector<f64>,
        coords: Vec<f64>,
    }
    let mut found = Vec::new();
    for c in root_spaces {
        let v1 = eig.eigenvectors.column(c[0]).into_owned();
        let v2 = eig.eigenvectors.column(c[1]).into_owned();
        let project = |e: &DVector<f64>| -> DVector<f64> { &v1 * v1.dot(e) + &v2 * v2.dot(e) };
        // Invariance of the plane under every ad T_k.
        for ad in &ads {
            for v in [&v1, &v2] {
                let img = ad * v;
                let leak = (&img - project(&img)).norm();
                if leak > 1e-8 * (1.0 + img.norm()) {
                    return Err(Error::Degenerate { gap: min_gap });
                }
            }
        }
        let (first_index, mut odd) = (0..d)
            .map(|b| (b, project(&unit(d, b))))
            .find(|(_, p)| p.norm() > 1e-8)
            .expect("two-dimensional space has a nonzero projection");
        snap(&mut odd);
        let mut even = DVector::zeros(d);
        for cand in [&v1, &v2] {
            let mut e = cand - &odd * odd.dot(cand);
            if e.norm() > 1e-6 {
                snap(&mut e);
                even = e;
                break;
            }
        }
        let mut coords: Vec<f64> = ads.iter().map(|ad| -(ad * &odd).dot(&even)).collect();
        let first = coords.iter().copied().find(|c| c.abs() > 1e-10).unwrap_or(0.0);
        if first < 0.0 {
            even = -even;
            coords.iter_mut().for_each(|c| *c = -*c);
        }
        for c in coords.iter_mut() {
            if c.abs() < 1e-13 {
                *c = 0.0;
            }
        }
        found.push(Found { first_index, odd, even, coords });
    }
    found.sort_by_key(|f| f.first_index);
    let mut positive_roots = Vec::new();
    let mut pairs = Vec::new();
    for (j, f) in found.iter().enumerate() {
        let vector = AlgebraElement::combination(algebra.n(), &f.coords, cartan);
        positive_roots.push(PositiveRoot { coords: f.coords.clone(), vector });
        pairs.push(RootPair {
            odd: algebra.element(f.odd.as_slice()),
            even: algebra.element(f.even.as_slice()),
            root_index: j,
        });
    }
    // Greedy leftmost independent subset of positive roots spanning the torus.
    let mut chosen: Vec<usize> = Vec::new();
    let mut ortho: Vec<DVector<f64>> = Vec::new();
    for (j, r) in positive_roots.iter().enumerate() {
        let mut v = DVector::from_vec(r.coords.clone());
        let n0 = v.norm();
        for q in &ortho {
            let c = q.dot(&v);
            v.axpy(-c, q, 1.0);
        }
        if v.norm() > 1e-10 * n0.max(1.0) {
            let nv = v.norm();
            ortho.push(v / nv);
            chosen.push(j);
        }
        if chosen.len() == nu {
            break;
        }
    }
    if chosen.len() != nu {
        return Err(Error::Invariant("positive roots do not span the Cartan subalgebra".into()));
    }
    let datum = RootDatum {
        algebra: algebra.clone(),
        cartan_basis: cartan.to_vec(),
        positive_roots,
        pairs,
        root_basis_indices: chosen,
    };
    datum.check()?;
    Ok(datum)
}

/// Cartan subalgebra and root datum in one call.
pub fn decompose(algebra: &LieAlgebra) -> Result<RootDatum> {
    let cartan = cartan_subalgebra(algebra)?;
    root_space_decomposition(algebra, &cartan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::algebra::su_basis;

    #[test]
    fn rank_of_su_n() {
        for n in 2..=4 {
            let alg = su_basis(n).unwrap();
            assert_eq!(cartan_subalgebra(&alg).unwrap().len(), n - 1);
        }
    }

    #[test]
    fn su3_cartan_is_t1_t2() {
        let alg = su_basis(3).unwrap();
        let t = cartan_subalgebra(&alg).unwrap();
        assert!(t[0].sub(&alg.basis()[0]).max_abs() < 1e-14);
        assert!(t[1].sub(&alg.basis()[1]).max_abs() < 1e-14);
    }

    #[test]
    fn non_semisimple_is_refused() {
        let alg = su_basis(3).unwrap();
        let line = LieAlgebra::from_matrices(
            vec![alg.basis()[0].entries().clone()],
            crate::lie::algebra::Metric::Trace { scale: 0.5 },
        )
        .unwrap();
        assert!(matches!(cartan_subalgebra(&line), Err(Error::NotSemisimple(_))));
    }

    #[test]
    fn su2_has_one_positive_root() {
        let rd = decompose(&su_basis(2).unwrap()).unwrap();
        assert_eq!(rd.positive_roots().len(), 1);
        assert!(rd.verify().max_residual() < 1e-10);
    }

    #[test]
    fn su3_pairs_are_the_gell_mann_pairs() {
        let alg = su_basis(3).unwrap();
        let rd = decompose(&alg).unwrap();
        for (j, p) in rd.pairs().iter().enumerate() {
            assert!(p.odd.sub(&alg.basis()[2 + 2 * j]).max_abs() < 1e-14, "pair {j} odd");
            assert!(p.even.sub(&alg.basis()[3 + 2 * j]).max_abs() < 1e-14, "pair {j} even");
        }
        assert_eq!(rd.root_basis_indices(), &[0, 1]);
    }

    #[test]
    fn non_maximal_torus_is_rejected() {
        let alg = su_basis(3).unwrap();
        let t = vec![alg.basis()[0].clone()];
        assert!(matches!(root_space_decomposition(&alg, &t), Err(Error::Precondition(_))));
    }
}
