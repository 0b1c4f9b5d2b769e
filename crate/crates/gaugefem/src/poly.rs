//! Exact bivariate polynomial arithmetic on coefficients.
//!
//! Per-element fields are true polynomials; differentiation, traces and
//! integrals are computed symbolically so that no operation introduces
//! discretization error beyond floating-point roundoff.

use crate::scalar::Real;

/// Dense bivariate polynomial, triangular coefficient storage.
///
/// The coefficient of `x^(n-j) y^j` (total degree `n`) sits at
/// `coeffs[n(n+1)/2 + j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly2<S> {
    deg: usize,
    coeffs: Vec<S>,
}

#[inline]
fn tri(n: usize) -> usize {
    n * (n + 1) / 2
}

impl<S: Real> Poly2<S> {
    pub fn zero(deg: usize) -> Self {
        Poly2 {
            deg,
            coeffs: vec![S::zero(); tri(deg + 1)],
        }
    }

    pub fn constant(c: S) -> Self {
        Poly2 {
            deg: 0,
            coeffs: vec![c],
        }
    }

    pub fn deg(&self) -> usize {
        self.deg
    }

    /// Coefficient of `x^i y^j`; zero outside the stored degree.
    pub fn coeff(&self, i: usize, j: usize) -> S {
        let n = i + j;
        if n > self.deg {
            S::zero()
        } else {
            self.coeffs[tri(n) + j]
        }
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, v: S) {
        let n = i + j;
        assert!(n <= self.deg, "monomial degree exceeds allocation");
        self.coeffs[tri(n) + j] = v;
    }

    pub fn add_coeff(&mut self, i: usize, j: usize, v: S) {
        let n = i + j;
        assert!(n <= self.deg, "monomial degree exceeds allocation");
        self.coeffs[tri(n) + j] += v;
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> S {
        self.coeffs
            .iter()
            .fold(S::zero(), |acc, c| acc.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == S::zero())
    }

    pub fn scale(&self, s: S) -> Self {
        Poly2 {
            deg: self.deg,
            coeffs: self.coeffs.iter().map(|c| *c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let deg = self.deg.max(other.deg);
        let mut out = Poly2::zero(deg);
        for n in 0..=deg {
            for j in 0..=n {
                out.coeffs[tri(n) + j] = self.coeff(n - j, j) + other.coeff(n - j, j);
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-S::one()))
    }

    /// In-place `self += s * other`, growing the degree if needed.
    pub fn axpy(&mut self, s: S, other: &Self) {
        if other.deg > self.deg {
            let mut grown = Poly2::zero(other.deg);
            for n in 0..=self.deg {
                for j in 0..=n {
                    grown.coeffs[tri(n) + j] = self.coeffs[tri(n) + j];
                }
            }
            *self = grown;
        }
        for n in 0..=other.deg {
            for j in 0..=n {
                self.coeffs[tri(n) + j] += s * other.coeffs[tri(n) + j];
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let deg = self.deg + other.deg;
        let mut out = Poly2::zero(deg);
        for n1 in 0..=self.deg {
            for j1 in 0..=n1 {
                let a = self.coeffs[tri(n1) + j1];
                if a == S::zero() {
                    continue;
                }
                for n2 in 0..=other.deg {
                    for j2 in 0..=n2 {
                        let b = other.coeffs[tri(n2) + j2];
                        if b == S::zero() {
                            continue;
                        }
                        out.coeffs[tri(n1 + n2) + j1 + j2] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Partial derivative in `x`.
    pub fn dx(&self) -> Self {
        let deg = self.deg.saturating_sub(1);
        let mut out = Poly2::zero(deg);
        for n in 1..=self.deg {
            for j in 0..=n {
                let i = n - j;
                if i == 0 {
                    continue;
                }
                out.coeffs[tri(n - 1) + j] += S::of_usize(i) * self.coeffs[tri(n) + j];
            }
        }
        out
    }

    /// Partial derivative in `y`.
    pub fn dy(&self) -> Self {
        let deg = self.deg.saturating_sub(1);
        let mut out = Poly2::zero(deg);
        for n in 1..=self.deg {
            for j in 1..=n {
                out.coeffs[tri(n - 1) + j - 1] += S::of_usize(j) * self.coeffs[tri(n) + j];
            }
        }
        out
    }

    pub fn eval(&self, x: S, y: S) -> S {
        // powers up to deg, then direct accumulation
        let mut px = vec![S::one(); self.deg + 1];
        let mut py = vec![S::one(); self.deg + 1];
        for k in 1..=self.deg {
            px[k] = px[k - 1] * x;
            py[k] = py[k - 1] * y;
        }
        let mut acc = S::zero();
        for n in 0..=self.deg {
            for j in 0..=n {
                let c = self.coeffs[tri(n) + j];
                if c != S::zero() {
                    acc += c * px[n - j] * py[j];
                }
            }
        }
        acc
    }

    /// Substitute the affine map `x -> ax*x + bx*y + cx`, `y -> ay*x + by*y + cy`.
    pub fn compose_affine(&self, ax: S, bx: S, cx: S, ay: S, by: S, cy: S) -> Self {
        let lin_x = {
            let mut p = Poly2::zero(1);
            p.set_coeff(0, 0, cx);
            p.set_coeff(1, 0, ax);
            p.set_coeff(0, 1, bx);
            p
        };
        let lin_y = {
            let mut p = Poly2::zero(1);
            p.set_coeff(0, 0, cy);
            p.set_coeff(1, 0, ay);
            p.set_coeff(0, 1, by);
            p
        };
        let mut pow_x: Vec<Poly2<S>> = vec![Poly2::constant(S::one())];
        let mut pow_y: Vec<Poly2<S>> = vec![Poly2::constant(S::one())];
        for k in 1..=self.deg {
            pow_x.push(pow_x[k - 1].mul(&lin_x));
            pow_y.push(pow_y[k - 1].mul(&lin_y));
        }
        let mut out = Poly2::zero(self.deg);
        for n in 0..=self.deg {
            for j in 0..=n {
                let c = self.coeffs[tri(n) + j];
                if c != S::zero() {
                    out.axpy(c, &pow_x[n - j].mul(&pow_y[j]));
                }
            }
        }
        out
    }

    /// Restrict to the segment `p + t (q - p)`, `t in [0, 1]`.
    pub fn on_segment(&self, p: [S; 2], q: [S; 2]) -> Poly1<S> {
        let lx = Poly1 {
            coeffs: vec![p[0], q[0] - p[0]],
        };
        let ly = Poly1 {
            coeffs: vec![p[1], q[1] - p[1]],
        };
        let mut pow_x: Vec<Poly1<S>> = vec![Poly1::constant(S::one())];
        let mut pow_y: Vec<Poly1<S>> = vec![Poly1::constant(S::one())];
        for k in 1..=self.deg {
            pow_x.push(pow_x[k - 1].mul(&lx));
            pow_y.push(pow_y[k - 1].mul(&ly));
        }
        let mut out = Poly1::zero(self.deg);
        for n in 0..=self.deg {
            for j in 0..=n {
                let c = self.coeffs[tri(n) + j];
                if c != S::zero() {
                    out.axpy(c, &pow_x[n - j].mul(&pow_y[j]));
                }
            }
        }
        out
    }

    /// Exact integral over the reference triangle (0,0), (1,0), (0,1):
    /// `int x^i y^j = i! j! / (i+j+2)!`.
    pub fn integrate_ref(&self) -> S {
        let mut acc = S::zero();
        for n in 0..=self.deg {
            for j in 0..=n {
                let c = self.coeffs[tri(n) + j];
                if c != S::zero() {
                    acc += c * ref_monomial_integral::<S>(n - j, j);
                }
            }
        }
        acc
    }
}

/// `int_{ref tri} x^i y^j = i! j! / (i+j+2)!` as a scalar.
pub fn ref_monomial_integral<S: Real>(i: usize, j: usize) -> S {
    // i!j!/(i+j+2)! = prod_{k=1..j} k/(i+k) / ((i+j+1)(i+j+2))
    let mut v = 1.0f64;
    for k in 1..=j {
        v *= k as f64 / (i + k) as f64;
    }
    v /= ((i + j + 1) * (i + j + 2)) as f64;
    S::lit(v)
}

/// Dense univariate polynomial in `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly1<S> {
    pub coeffs: Vec<S>,
}

impl<S: Real> Poly1<S> {
    pub fn zero(deg: usize) -> Self {
        Poly1 {
            coeffs: vec![S::zero(); deg + 1],
        }
    }

    pub fn constant(c: S) -> Self {
        Poly1 { coeffs: vec![c] }
    }

    pub fn deg(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn axpy(&mut self, s: S, other: &Self) {
        if other.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), S::zero());
        }
        for (k, c) in other.coeffs.iter().enumerate() {
            self.coeffs[k] += s * *c;
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Poly1::zero(self.deg() + other.deg());
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == S::zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out.coeffs[i + j] += *a * *b;
            }
        }
        out
    }

    pub fn eval(&self, t: S) -> S {
        let mut acc = S::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + *c;
        }
        acc
    }

    /// Exact integral over [0, 1].
    pub fn integral_01(&self) -> S {
        let mut acc = S::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            acc += *c / S::of_usize(k + 1);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_poly(rng: &mut ChaCha8Rng, deg: usize) -> Poly2<f64> {
        let mut p = Poly2::zero(deg);
        for n in 0..=deg {
            for j in 0..=n {
                p.set_coeff(n - j, j, rng.gen_range(-1.0..1.0));
            }
        }
        p
    }

    #[test]
    fn eval_mul_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a = random_poly(&mut rng, 3);
            let b = random_poly(&mut rng, 4);
            let ab = a.mul(&b);
            let (x, y) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            assert!((ab.eval(x, y) - a.eval(x, y) * b.eval(x, y)).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_poly(&mut rng, 3);
        let b = random_poly(&mut rng, 3);
        let lhs = a.mul(&b).dx();
        let rhs = a.dx().mul(&b).add(&a.mul(&b.dx()));
        assert!(lhs.sub(&rhs).max_abs() < 1e-12);
    }

    #[test]
    fn mixed_partials_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_poly(&mut rng, 6);
        assert!(p.dx().dy().sub(&p.dy().dx()).max_abs() < 1e-12);
    }

    #[test]
    fn compose_affine_matches_eval() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = random_poly(&mut rng, 4);
        let m = [0.3, -0.7, 0.2, 1.1, 0.5, -0.4];
        let q = p.compose_affine(m[0], m[1], m[2], m[3], m[4], m[5]);
        for _ in 0..20 {
            let (x, y) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let direct = p.eval(m[0] * x + m[1] * y + m[2], m[3] * x + m[4] * y + m[5]);
            assert!((q.eval(x, y) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn segment_restriction_matches_eval() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_poly(&mut rng, 5);
        let (a, b) = ([0.2, 0.9], [1.4, -0.3]);
        let r = p.on_segment(a, b);
        for _ in 0..20 {
            let t = rng.gen_range(0.0..1.0);
            let x = a[0] + t * (b[0] - a[0]);
            let y = a[1] + t * (b[1] - a[1]);
            assert!((r.eval(t) - p.eval(x, y)).abs() < 1e-12);
        }
    }

    #[test]
    fn reference_integrals() {
        // int 1 = 1/2, int x = 1/6, int x*y = 1/24
        let one = Poly2::<f64>::constant(1.0);
        assert!((one.integrate_ref() - 0.5).abs() < 1e-16);
        let mut x = Poly2::<f64>::zero(1);
        x.set_coeff(1, 0, 1.0);
        assert!((x.integrate_ref() - 1.0 / 6.0).abs() < 1e-16);
        let mut xy = Poly2::<f64>::zero(2);
        xy.set_coeff(1, 1, 1.0);
        assert!((xy.integrate_ref() - 1.0 / 24.0).abs() < 1e-16);
    }

    #[test]
    fn univariate_integral() {
        // int_0^1 t^3 = 1/4
        let t3 = Poly1::<f64> {
            coeffs: vec![0.0, 0.0, 0.0, 1.0],
        };
        assert!((t3.integral_01() - 0.25).abs() < 1e-16);
    }
}
