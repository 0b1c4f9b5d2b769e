//! Lie algebra arithmetic: structure constants, invariant inner product, and
//! the adjoint (conjugation) action used for gauge-equivariance tests.
//!
//! Algebras are represented abstractly by structure constants plus the Gram
//! matrix of an invariant inner product, so any compact algebra can be added.
//! `su2` and `u1` are built in.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which built-in algebra this is; custom algebras have no adjoint support.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraKind {
    Su2,
    U1,
    Custom,
}

/// A finite-dimensional real Lie algebra with an invariant inner product.
///
/// `structure[a][b][k]` holds the coefficients of `[e_a, e_b] = sum_k c_abk e_k`
/// and `gram[a][b] = <e_a, e_b>`. Immutable after construction.
#[derive(Clone, Debug)]
pub struct LieAlgebra<S> {
    dim: usize,
    structure: Vec<S>,
    gram: Vec<S>,
    kind: AlgebraKind,
}

/// Coefficients of an algebra element in the basis `e_1..e_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieVector<S>(pub Vec<S>);

impl<S: Real> LieVector<S> {
    pub fn zeros(m: usize) -> Self {
        LieVector(vec![S::zero(); m])
    }

    pub fn basis(m: usize, a: usize) -> Self {
        let mut v = vec![S::zero(); m];
        v[a] = S::one();
        LieVector(v)
    }
}

/// The three-dimensional algebra of skew-Hermitian traceless 2x2 matrices, in
/// the basis `e_a = -(i/2) sigma_a`. Structure constants are the Levi-Civita
/// symbol and the trace inner product gives `G = I/2`.
pub fn su2<S: Real>() -> LieAlgebra<S> {
    let mut c = vec![S::zero(); 27];
    for (a, b, k, s) in [
        (0, 1, 2, 1.0),
        (1, 0, 2, -1.0),
        (1, 2, 0, 1.0),
        (2, 1, 0, -1.0),
        (2, 0, 1, 1.0),
        (0, 2, 1, -1.0),
    ] {
        c[(a * 3 + b) * 3 + k] = S::lit(s);
    }
    let mut g = vec![S::zero(); 9];
    for a in 0..3 {
        g[a * 3 + a] = S::lit(0.5);
    }
    LieAlgebra {
        dim: 3,
        structure: c,
        gram: g,
        kind: AlgebraKind::Su2,
    }
}

/// The one-dimensional abelian algebra of the circle group, `G = [1]`.
pub fn u1<S: Real>() -> LieAlgebra<S> {
    LieAlgebra {
        dim: 1,
        structure: vec![S::zero()],
        gram: vec![S::one()],
        kind: AlgebraKind::U1,
    }
}

impl<S: Real> LieAlgebra<S> {
    /// Build a custom algebra from raw structure constants and Gram matrix.
    pub fn custom(dim: usize, structure: Vec<S>, gram: Vec<S>) -> Result<Self> {
        if structure.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim * dim,
                got: structure.len(),
            });
        }
        if gram.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: gram.len(),
            });
        }
        Ok(LieAlgebra {
            dim,
            structure,
            gram,
            kind: AlgebraKind::Custom,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    /// Structure constant `c_abk` of `[e_a, e_b] = sum_k c_abk e_k`.
    #[inline]
    pub fn c(&self, a: usize, b: usize, k: usize) -> S {
        self.structure[(a * self.dim + b) * self.dim + k]
    }

    /// Gram matrix entry `<e_a, e_b>`.
    #[inline]
    pub fn g(&self, a: usize, b: usize) -> S {
        self.gram[a * self.dim + b]
    }

    fn check_len(&self, v: &LieVector<S>) -> Result<()> {
        if v.0.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.0.len(),
            });
        }
        Ok(())
    }

    /// Lie bracket `[x, y]` in coefficients.
    pub fn bracket(&self, x: &LieVector<S>, y: &LieVector<S>) -> Result<LieVector<S>> {
        self.check_len(x)?;
        self.check_len(y)?;
        let m = self.dim;
        let mut z = vec![S::zero(); m];
        for a in 0..m {
            if x.0[a] == S::zero() {
                continue;
            }
            for b in 0..m {
                let xy = x.0[a] * y.0[b];
                if xy == S::zero() {
                    continue;
                }
                for k in 0..m {
                    z[k] += xy * self.c(a, b, k);
                }
            }
        }
        Ok(LieVector(z))
    }

    /// Invariant inner product `<x, y> = x^T G y`.
    pub fn inner(&self, x: &LieVector<S>, y: &LieVector<S>) -> Result<S> {
        self.check_len(x)?;
        self.check_len(y)?;
        let m = self.dim;
        let mut acc = S::zero();
        for a in 0..m {
            for b in 0..m {
                acc += x.0[a] * self.g(a, b) * y.0[b];
            }
        }
        Ok(acc)
    }

    /// Matrix of the conjugation action `xi -> g xi g^-1` in the basis, for a
    /// constant group element. For `su2` the element is `exp(angle * axis.e)`,
    /// for `u1` conjugation is trivially the identity. Row-major `m x m`.
    pub fn adjoint_rotation(&self, axis: [S; 3], angle: S) -> Result<Vec<S>> {
        match self.kind {
            AlgebraKind::U1 => Ok(vec![S::one()]),
            AlgebraKind::Su2 => {
                let n2 = axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2];
                if n2 == S::zero() {
                    return Err(Error::InvalidParameter {
                        name: "axis",
                        reason: "zero rotation axis".into(),
                    });
                }
                let inv = n2.sqrt().recip();
                let n = [axis[0] * inv, axis[1] * inv, axis[2] * inv];
                // Rodrigues: R = I + sin(t) K + (1-cos(t)) K^2 with K = [n]_x
                let (s, c) = (angle.sin(), angle.cos());
                let k = [
                    [S::zero(), -n[2], n[1]],
                    [n[2], S::zero(), -n[0]],
                    [-n[1], n[0], S::zero()],
                ];
                let mut r = vec![S::zero(); 9];
                for i in 0..3 {
                    for j in 0..3 {
                        let mut k2 = S::zero();
                        for l in 0..3 {
                            k2 += k[i][l] * k[l][j];
                        }
                        let id = if i == j { S::one() } else { S::zero() };
                        r[i * 3 + j] = id + s * k[i][j] + (S::one() - c) * k2;
                    }
                }
                Ok(r)
            }
            AlgebraKind::Custom => Err(Error::UnsupportedAlgebra),
        }
    }

    /// Apply a rotation matrix from [`Self::adjoint_rotation`] to a coefficient vector.
    pub fn rotate(&self, r: &[S], x: &LieVector<S>) -> LieVector<S> {
        let m = self.dim;
        let mut out = vec![S::zero(); m];
        for i in 0..m {
            for j in 0..m {
                out[i] += r[i * m + j] * x.0[j];
            }
        }
        LieVector(out)
    }

    /// Largest violation of bracket antisymmetry over all basis triples.
    pub fn antisymmetry_defect(&self) -> S {
        let m = self.dim;
        let mut worst = S::zero();
        for a in 0..m {
            for b in 0..m {
                for k in 0..m {
                    worst = worst.max((self.c(a, b, k) + self.c(b, a, k)).abs());
                }
            }
        }
        worst
    }

    /// Largest violation of the Jacobi identity over all basis triples.
    pub fn jacobi_defect(&self) -> S {
        let m = self.dim;
        let mut worst = S::zero();
        for a in 0..m {
            for b in 0..m {
                for d in 0..m {
                    for k in 0..m {
                        // [[a,b],d] + [[b,d],a] + [[d,a],b] = 0
                        let mut acc = S::zero();
                        for l in 0..m {
                            acc += self.c(a, b, l) * self.c(l, d, k)
                                + self.c(b, d, l) * self.c(l, a, k)
                                + self.c(d, a, l) * self.c(l, b, k);
                        }
                        worst = worst.max(acc.abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest violation of `<[x,e],f> + <e,[x,f]> = 0` over all basis triples.
    pub fn invariance_defect(&self) -> S {
        let m = self.dim;
        let mut worst = S::zero();
        for x in 0..m {
            for e in 0..m {
                for f in 0..m {
                    let mut acc = S::zero();
                    for k in 0..m {
                        acc += self.c(x, e, k) * self.g(k, f) + self.c(x, f, k) * self.g(e, k);
                    }
                    worst = worst.max(acc.abs());
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// 2x2 complex matrix as [[(re, im); 2]; 2], the independent oracle for su(2).
    type C = (f64, f64);
    type M2 = [[C; 2]; 2];

    fn cmul(a: C, b: C) -> C {
        (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
    }
    fn cadd(a: C, b: C) -> C {
        (a.0 + b.0, a.1 + b.1)
    }
    fn mmul(a: &M2, b: &M2) -> M2 {
        let mut out = [[(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = cadd(cmul(a[i][0], b[0][j]), cmul(a[i][1], b[1][j]));
            }
        }
        out
    }
    fn msub(a: &M2, b: &M2) -> M2 {
        let mut out = [[(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = (a[i][j].0 - b[i][j].0, a[i][j].1 - b[i][j].1);
            }
        }
        out
    }

    /// Basis e_a = -(i/2) sigma_a built from the Pauli matrices directly.
    fn pauli_basis() -> [M2; 3] {
        let s1: M2 = [[(0., 0.), (1., 0.)], [(1., 0.), (0., 0.)]];
        let s2: M2 = [[(0., 0.), (0., -1.)], [(0., 1.), (0., 0.)]];
        let s3: M2 = [[(1., 0.), (0., 0.)], [(0., 0.), (-1., 0.)]];
        let scale = |m: &M2| {
            let mut out = [[(0.0, 0.0); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] = cmul((0.0, -0.5), m[i][j]);
                }
            }
            out
        };
        [scale(&s1), scale(&s2), scale(&s3)]
    }

    fn trace_inner(a: &M2, b: &M2) -> f64 {
        // tr(a^* b), real part (imaginary part vanishes for this basis)
        let mut re = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let conj = (a[j][i].0, -a[j][i].1);
                re += cmul(conj, b[j][i]).0;
            }
        }
        re
    }

    #[test]
    fn su2_structure_matches_pauli_oracle() {
        let e = pauli_basis();
        let alg = su2::<f64>();
        // [e_a, e_b] expanded in the basis via the trace inner product
        for a in 0..3 {
            for b in 0..3 {
                let br = msub(&mmul(&e[a], &e[b]), &mmul(&e[b], &e[a]));
                for k in 0..3 {
                    // coefficient of e_k: <e_k, [e_a,e_b]> / <e_k,e_k>
                    let coef = trace_inner(&e[k], &br) / trace_inner(&e[k], &e[k]);
                    assert!(
                        (coef - alg.c(a, b, k)).abs() < 1e-15,
                        "c[{a}][{b}][{k}]"
                    );
                }
            }
        }
        for a in 0..3 {
            for b in 0..3 {
                assert!((trace_inner(&e[a], &e[b]) - alg.g(a, b)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn su2_bracket_examples() {
        let alg = su2::<f64>();
        let e1 = LieVector::basis(3, 0);
        let e2 = LieVector::basis(3, 1);
        let z = alg.bracket(&e1, &e2).unwrap();
        assert_eq!(z.0, vec![0.0, 0.0, 1.0]);
        assert!((alg.inner(&e1, &e1).unwrap() - 0.5).abs() < 1e-15);
        assert!(alg.inner(&e1, &e2).unwrap().abs() < 1e-15);
        let x = LieVector(vec![1.0, 2.0, 3.0]);
        let xx = alg.bracket(&x, &x).unwrap();
        assert_eq!(xx.0, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn u1_is_abelian() {
        let alg = u1::<f64>();
        let x = LieVector(vec![5.0]);
        let y = LieVector(vec![7.0]);
        assert_eq!(alg.bracket(&x, &y).unwrap().0, vec![0.0]);
        assert!((alg.inner(&x, &x).unwrap() - 25.0).abs() < 1e-15);
        assert_eq!(alg.jacobi_defect(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let alg = su2::<f64>();
        let x = LieVector(vec![1.0, 2.0]);
        let y = LieVector::basis(3, 0);
        assert!(alg.bracket(&x, &y).is_err());
        assert!(alg.inner(&x, &y).is_err());
    }

    #[test]
    fn algebra_identities_hold() {
        for alg in [su2::<f64>(), u1::<f64>()] {
            assert!(alg.antisymmetry_defect() <= 1e-14);
            assert!(alg.jacobi_defect() <= 1e-14);
            assert!(alg.invariance_defect() <= 1e-14);
        }
    }

    #[test]
    fn random_identities_on_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for alg in [su2::<f64>(), u1::<f64>()] {
            let m = alg.dim();
            for _ in 0..200 {
                let rv = |rng: &mut ChaCha8Rng| {
                    LieVector((0..m).map(|_| rng.gen_range(-1.0..1.0)).collect())
                };
                let (x, y, z) = (rv(&mut rng), rv(&mut rng), rv(&mut rng));
                let xy = alg.bracket(&x, &y).unwrap();
                let yx = alg.bracket(&y, &x).unwrap();
                for k in 0..m {
                    assert!((xy.0[k] + yx.0[k]).abs() <= 1e-14);
                }
                // Jacobi
                let j1 = alg.bracket(&xy, &z).unwrap();
                let j2 = alg.bracket(&alg.bracket(&y, &z).unwrap(), &x).unwrap();
                let j3 = alg.bracket(&alg.bracket(&z, &x).unwrap(), &y).unwrap();
                for k in 0..m {
                    assert!((j1.0[k] + j2.0[k] + j3.0[k]).abs() <= 1e-14);
                }
                // invariance
                let lhs = alg.inner(&xy, &z).unwrap() + alg.inner(&y, &alg.bracket(&x, &z).unwrap()).unwrap();
                assert!(lhs.abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn adjoint_rotation_axis_e3() {
        let alg = su2::<f64>();
        let r = alg
            .adjoint_rotation([0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_2)
            .unwrap();
        let e1 = alg.rotate(&r, &LieVector::basis(3, 0));
        // quarter turn in the (e1, e2) plane
        assert!((e1.0[0]).abs() < 1e-15);
        assert!((e1.0[1] - 1.0).abs() < 1e-15);
        assert!((e1.0[2]).abs() < 1e-15);
    }

    #[test]
    fn adjoint_rotation_preserves_gram_and_bracket() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let alg = su2::<f64>();
        for _ in 0..50 {
            let axis = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0f64),
            ];
            if axis.iter().map(|x| x * x).sum::<f64>() < 1e-3 {
                continue;
            }
            let angle = rng.gen_range(-3.0..3.0);
            let r = alg.adjoint_rotation(axis, angle).unwrap();
            // R G R^T = G
            for i in 0..3 {
                for j in 0..3 {
                    let mut acc = 0.0;
                    for a in 0..3 {
                        for b in 0..3 {
                            acc += r[i * 3 + a] * alg.g(a, b) * r[j * 3 + b];
                        }
                    }
                    assert!((acc - alg.g(i, j)).abs() < 1e-13);
                }
            }
            // bracket(Rx, Ry) = R bracket(x, y)
            let x = LieVector(vec![
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ]);
            let y = LieVector(vec![
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ]);
            let lhs = alg
                .bracket(&alg.rotate(&r, &x), &alg.rotate(&r, &y))
                .unwrap();
            let rhs = alg.rotate(&r, &alg.bracket(&x, &y).unwrap());
            for k in 0..3 {
                assert!((lhs.0[k] - rhs.0[k]).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn u1_adjoint_is_identity() {
        let alg = u1::<f64>();
        let r = alg.adjoint_rotation([1.0, 0.0, 0.0], 0.7).unwrap();
        assert_eq!(r, vec![1.0]);
    }

    #[test]
    fn custom_algebra_has_no_adjoint() {
        let alg = LieAlgebra::custom(1, vec![0.0], vec![2.0]).unwrap();
        assert!(alg.adjoint_rotation([0.0, 0.0, 1.0], 1.0).is_err());
    }
}
