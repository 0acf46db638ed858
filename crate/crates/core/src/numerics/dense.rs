use num_complex::Complex64;

/// Small dense complex matrix (row-major). Used for Krylov projections and
/// the dense eigensolver fallback; not intended for large dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    a: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![Complex64::ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.a {
            *v *= c;
        }
        out
    }

    pub fn add_scaled(&mut self, c: Complex64, other: &Self) {
        assert_eq!(self.n, other.n);
        for (x, y) in self.a.iter_mut().zip(&other.a) {
            *x += c * y;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                if aik == Complex64::ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    /// y = A x for a dense vector.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }

    pub fn one_norm(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Solve A x = b in place via LU with partial pivoting. Returns None on
    /// a numerically singular pivot.
    pub fn solve_many(mut self, mut rhs: DenseMatrix) -> Option<DenseMatrix> {
        let n = self.n;
        assert_eq!(rhs.n, n);
        for col in 0..n {
            let mut piv = col;
            let mut best = self[(col, col)].norm();
            for r in col + 1..n {
                let v = self[(r, col)].norm();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < f64::MIN_POSITIVE {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    let tmp = self[(col, j)];
                    self[(col, j)] = self[(piv, j)];
                    self[(piv, j)] = tmp;
                    let tmp = rhs[(col, j)];
                    rhs[(col, j)] = rhs[(piv, j)];
                    rhs[(piv, j)] = tmp;
                }
            }
            let inv = Complex64::ONE / self[(col, col)];
            for r in col + 1..n {
                let f = self[(r, col)] * inv;
                if f == Complex64::ZERO {
                    continue;
                }
                for j in col..n {
                    let v = self[(col, j)];
                    self[(r, j)] -= f * v;
                }
                for j in 0..n {
                    let v = rhs[(col, j)];
                    rhs[(r, j)] -= f * v;
                }
            }
        }
        for col in (0..n).rev() {
            let inv = Complex64::ONE / self[(col, col)];
            for j in 0..n {
                rhs[(col, j)] *= inv;
            }
            for r in 0..col {
                let f = self[(r, col)];
                if f == Complex64::ZERO {
                    continue;
                }
                for j in 0..n {
                    let v = rhs[(col, j)];
                    rhs[(r, j)] -= f * v;
                }
            }
        }
        Some(rhs)
    }

    /// Matrix exponential by scaling-and-squaring with a [13/13] Padé
    /// approximant (Higham 2005, fixed order).
    pub fn expm(&self) -> Self {
        const THETA_13: f64 = 5.371920351148152;
        let b: [f64; 14] = [
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ];
        let norm = self.one_norm();
        let s = if norm > THETA_13 {
            (norm / THETA_13).log2().ceil() as i32
        } else {
            0
        };
        let a = self.scaled(Complex64::new(0.5f64.powi(s), 0.0));
        let n = self.n;
        let id = Self::identity(n);
        let a2 = a.matmul(&a);
        let a4 = a2.matmul(&a2);
        let a6 = a2.matmul(&a4);

        // u_odd = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
        let mut w1 = a6.scaled(Complex64::new(b[13], 0.0));
        w1.add_scaled(Complex64::new(b[11], 0.0), &a4);
        w1.add_scaled(Complex64::new(b[9], 0.0), &a2);
        let mut w = a6.matmul(&w1);
        w.add_scaled(Complex64::new(b[7], 0.0), &a6);
        w.add_scaled(Complex64::new(b[5], 0.0), &a4);
        w.add_scaled(Complex64::new(b[3], 0.0), &a2);
        w.add_scaled(Complex64::new(b[1], 0.0), &id);
        let u = a.matmul(&w);

        // v_even = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
        let mut z1 = a6.scaled(Complex64::new(b[12], 0.0));
        z1.add_scaled(Complex64::new(b[10], 0.0), &a4);
        z1.add_scaled(Complex64::new(b[8], 0.0), &a2);
        let mut v = a6.matmul(&z1);
        v.add_scaled(Complex64::new(b[6], 0.0), &a6);
        v.add_scaled(Complex64::new(b[4], 0.0), &a4);
        v.add_scaled(Complex64::new(b[2], 0.0), &a2);
        v.add_scaled(Complex64::new(b[0], 0.0), &id);

        // (V - U) F = (V + U)
        let mut vm = v.clone();
        vm.add_scaled(Complex64::new(-1.0, 0.0), &u);
        let mut vp = v;
        vp.add_scaled(Complex64::ONE, &u);
        let mut f = vm
            .solve_many(vp)
            .expect("Padé denominator is singular; input norm out of range");
        for _ in 0..s {
            f = f.matmul(&f);
        }
        f
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.a[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.a[i * self.n + j]
    }
}
