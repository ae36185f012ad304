use super::element::{bracket_unchecked, AlgebraElement};
use super::roots::RootDatum;
use crate::error::{Error, Result};

/// Horizontal root-pair fields plus (possibly ε-scaled) vertical root vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    horizontal: Vec<AlgebraElement>,
    vertical: Vec<AlgebraElement>,
    unscaled_vertical: Vec<AlgebraElement>,
    epsilon: f64,
}

impl Frame {
    /// Build from explicit fields at ε = 1.
    pub fn new(horizontal: Vec<AlgebraElement>, vertical: Vec<AlgebraElement>) -> Result<Self> {
        let all_sizes = horizontal.iter().chain(&vertical).map(|e| e.size());
        let n = horizontal.first().map(|e| e.size()).unwrap_or(0);
        for s in all_sizes {
            if s != n {
                return Err(Error::SizeMismatch { left: n, right: s });
            }
        }
        Ok(Self { unscaled_vertical: vertical.clone(), horizontal, vertical, epsilon: 1.0 })
    }

    pub fn horizontal(&self) -> &[AlgebraElement] {
        &self.horizontal
    }

    /// Vertical fields, already multiplied by ε.
    pub fn vertical(&self) -> &[AlgebraElement] {
        &self.vertical
    }

    pub fn unscaled_vertical(&self) -> &[AlgebraElement] {
        &self.unscaled_vertical
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Matrix size of the fields.
    pub fn n(&self) -> usize {
        self.horizontal.first().map(|e| e.size()).unwrap_or(0)
    }

    /// Horizontal followed by scaled vertical fields (the ε-gradient frame).
    pub fn fields(&self) -> Vec<AlgebraElement> {
        self.horizontal.iter().chain(&self.vertical).cloned().collect()
    }

    /// `2n + 2ν` where `2n` is the horizontal count and `ν` the vertical count.
    pub fn homogeneous_dimension(&self) -> usize {
        self.horizontal.len() + 2 * self.vertical.len()
    }

    /// Copy with vertical fields scaled by `eps ∈ (0, 1]`, from the unscaled ones.
    pub fn with_epsilon(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::OutOfRange(format!("epsilon {eps} not in (0, 1]")));
        }
        Ok(Self {
            horizontal: self.horizontal.clone(),
            vertical: self.unscaled_vertical.iter().map(|v| v.scale(eps)).collect(),
            unscaled_vertical: self.unscaled_vertical.clone(),
            epsilon: eps,
        })
    }
}

/// Frame with horizontal = all root pairs and vertical = the selected root basis.
pub fn horizontal_frame(rootdatum: &RootDatum) -> Result<Frame> {
    rootdatum.check()?;
    let horizontal: Vec<AlgebraElement> = rootdatum
        .pairs()
        .iter()
        .flat_map(|p| [p.odd.clone(), p.even.clone()])
        .collect();
    let vertical: Vec<AlgebraElement> = rootdatum
        .root_basis_indices()
        .iter()
        .map(|&j| rootdatum.positive_roots()[j].vector.clone())
        .collect();
    let alg = rootdatum.algebra();
    for h in &horizontal {
        for v in &vertical {
            if alg.inner_unchecked(h, v).abs() > 1e-10 {
                return Err(Error::Invariant("vertical field is not orthogonal to ℋ".into()));
            }
        }
    }
    Frame::new(horizontal, vertical)
}

/// Root-pair frame of `su(n)` under the default trace metric.
pub fn su_frame(n: usize) -> Result<Frame> {
    horizontal_frame(&super::roots::decompose(&super::algebra::su_basis(n)?)?)
}

/// Scale the vertical fields of an ε = 1 frame.
pub fn epsilon_frame(frame: &Frame, eps: f64) -> Result<Frame> {
    if frame.epsilon != 1.0 {
        return Err(Error::Precondition(format!(
            "epsilon_frame expects an unscaled frame, got epsilon {}",
            frame.epsilon
        )));
    }
    frame.with_epsilon(eps)
}

fn rank_insert(span: &mut Vec<Vec<f64>>, v: &[f64], tol: f64) -> bool {
    let mut r = v.to_vec();
    let n0 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n0 <= tol {
        return false;
    }
    for q in span.iter() {
        let c: f64 = q.iter().zip(&r).map(|(a, b)| a * b).sum();
        r.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
    }
    let n = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > tol * n0.max(1.0) {
        r.iter_mut().for_each(|x| *x /= n);
        span.push(r);
        true
    } else {
        false
    }
}

/// Dimension of the smallest bracket-closed subspace containing the horizontal fields.
pub fn hormander_rank(frame: &Frame) -> usize {
    let mut span: Vec<Vec<f64>> = Vec::new();
    let mut elems: Vec<AlgebraElement> = Vec::new();
    for h in frame.horizontal() {
        if rank_insert(&mut span, &h.to_real_vec(), 1e-9) {
            elems.push(h.clone());
        }
    }
    let mut frontier = elems.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for f in &frontier {
            for h in frame.horizontal() {
                let b = bracket_unchecked(h, f);
                if rank_insert(&mut span, &b.to_real_vec(), 1e-9) {
                    next.push(b);
                }
            }
        }
        frontier = next;
    }
    span.len()
}

/// Rank of the full frame (horizontal and vertical together) under brackets.
pub fn full_frame_rank(frame: &Frame) -> usize {
    let all = Frame::new(frame.fields(), vec![]).expect("sizes already checked");
    hormander_rank(&all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::algebra::su_basis;
    use crate::lie::roots::decompose;

    fn su3_frame() -> Frame {
        horizontal_frame(&decompose(&su_basis(3).unwrap()).unwrap()).unwrap()
    }

    #[test]
    fn counts_and_q() {
        let f = su3_frame();
        assert_eq!(f.horizontal().len(), 6);
        assert_eq!(f.vertical().len(), 2);
        assert_eq!(f.homogeneous_dimension(), 10);
    }

    #[test]
    fn hormander() {
        let f = su3_frame();
        assert_eq!(hormander_rank(&f), 8);
        assert_eq!(full_frame_rank(&f), 8);
        let su2 = horizontal_frame(&decompose(&su_basis(2).unwrap()).unwrap()).unwrap();
        assert_eq!(hormander_rank(&su2), 3);
    }

    #[test]
    fn epsilon_scaling() {
        let f = su3_frame();
        assert_eq!(epsilon_frame(&f, 1.0).unwrap(), f);
        assert!(epsilon_frame(&f, 0.0).is_err());
        assert!(epsilon_frame(&f, 1.5).is_err());
        let half = epsilon_frame(&f, 0.5).unwrap();
        assert!(epsilon_frame(&half, 0.5).is_err());
        let b = bracket_unchecked(&half.horizontal()[0], &half.horizontal()[1]);
        assert!(b.add(&half.vertical()[0].scale(1.0 / 0.5)).max_abs() < 1e-14);
    }
}
