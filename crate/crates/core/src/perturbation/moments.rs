//! Expectations of polynomials in two independent geometric variables.

use std::ops::{Add, Mul, Sub};

const DEG: usize = 5;

/// Polynomial in `(k, m)` with degree at most 4 in each variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Poly2 {
    c: [[f64; DEG]; DEG],
}

impl Poly2 {
    pub fn constant(x: f64) -> Self {
        let mut c = [[0.0; DEG]; DEG];
        c[0][0] = x;
        Self { c }
    }

    pub fn k() -> Self {
        let mut c = [[0.0; DEG]; DEG];
        c[1][0] = 1.0;
        Self { c }
    }

    pub fn m() -> Self {
        let mut c = [[0.0; DEG]; DEG];
        c[0][1] = 1.0;
        Self { c }
    }

    pub fn scale(mut self, s: f64) -> Self {
        self.c.iter_mut().flatten().for_each(|x| *x *= s);
        self
    }

    pub fn eval(&self, k: f64, m: f64) -> f64 {
        let mut total = 0.0;
        for i in (0..DEG).rev() {
            let mut row = 0.0;
            for j in (0..DEG).rev() {
                row = row * m + self.c[i][j];
            }
            total = total * k + row;
        }
        total
    }

    /// `E[p(k, m)]` for independent geometric `k`, `m` with means `na`, `nb`.
    pub fn expect(&self, na: f64, nb: f64) -> f64 {
        let mk: Vec<f64> = (0..DEG).map(|j| geometric_moment(na, j)).collect();
        let mm: Vec<f64> = (0..DEG).map(|j| geometric_moment(nb, j)).collect();
        let mut total = 0.0;
        for i in 0..DEG {
            for j in 0..DEG {
                total += self.c[i][j] * mk[i] * mm[j];
            }
        }
        total
    }
}

impl Add for Poly2 {
    type Output = Poly2;
    fn add(mut self, rhs: Poly2) -> Poly2 {
        for i in 0..DEG {
            for j in 0..DEG {
                self.c[i][j] += rhs.c[i][j];
            }
        }
        self
    }
}

impl Sub for Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: Poly2) -> Poly2 {
        self + rhs.scale(-1.0)
    }
}

impl Mul for Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: Poly2) -> Poly2 {
        let mut c = [[0.0; DEG]; DEG];
        for (i1, row1) in self.c.iter().enumerate() {
            for (j1, &a) in row1.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (i2, row2) in rhs.c.iter().enumerate() {
                    for (j2, &b) in row2.iter().enumerate() {
                        if b == 0.0 {
                            continue;
                        }
                        assert!(i1 + i2 < DEG && j1 + j2 < DEG, "polynomial degree overflow");
                        c[i1 + i2][j1 + j2] += a * b;
                    }
                }
            }
        }
        Poly2 { c }
    }
}

/// Stirling numbers of the second kind `S(j, i)` for `j ≤ 4`.
const STIRLING2: [[f64; DEG]; DEG] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 1.0, 0.0, 0.0],
    [0.0, 1.0, 3.0, 1.0, 0.0],
    [0.0, 1.0, 7.0, 6.0, 1.0],
];

/// `E[k^j]` for a geometric distribution `(1−v)v^k` with mean `n`,
/// from the factorial moments `E[k(k−1)…(k−i+1)] = i!·nⁱ`.
pub(crate) fn geometric_moment(n: f64, j: usize) -> f64 {
    let mut total = 0.0;
    let mut fact = 1.0;
    let mut pow = 1.0;
    for i in 0..=j {
        if i > 0 {
            fact *= i as f64;
            pow *= n;
        }
        total += STIRLING2[j][i] * fact * pow;
    }
    total
}
