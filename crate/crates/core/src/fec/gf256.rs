//! Arithmetic over GF(2^8) with primitive polynomial x^8 + x^4 + x^3 + x^2 + 1.

const PRIMITIVE_POLY: u16 = 0x11D;

struct Tables {
    exp: [u8; 512],
    log: [u8; 256],
}

const fn build_tables() -> Tables {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x: u16 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = x as u8;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x100 != 0 {
            x ^= PRIMITIVE_POLY;
        }
        i += 1;
    }
    while i < 512 {
        exp[i] = exp[i - 255];
        i += 1;
    }
    Tables { exp, log }
}

static TABLES: Tables = build_tables();

#[inline]
pub fn mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        0
    } else {
        TABLES.exp[TABLES.log[a as usize] as usize + TABLES.log[b as usize] as usize]
    }
}

#[inline]
pub fn inv(a: u8) -> u8 {
    assert!(a != 0, "zero has no inverse in GF(256)");
    TABLES.exp[255 - TABLES.log[a as usize] as usize]
}

/// `a^e` for a field element `a`.
pub fn pow(a: u8, e: usize) -> u8 {
    if e == 0 {
        return 1;
    }
    if a == 0 {
        return 0;
    }
    TABLES.exp[(TABLES.log[a as usize] as usize * e) % 255]
}

/// `dst += c * src`, element-wise.
pub fn mul_add_slice(dst: &mut [u8], src: &[u8], c: u8) {
    match c {
        0 => {}
        1 => dst.iter_mut().zip(src).for_each(|(d, s)| *d ^= s),
        _ => {
            let lc = TABLES.log[c as usize] as usize;
            for (d, &s) in dst.iter_mut().zip(src) {
                if s != 0 {
                    *d ^= TABLES.exp[lc + TABLES.log[s as usize] as usize];
                }
            }
        }
    }
}

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    pub size: usize,
    pub data: Vec<u8>,
}

impl Matrix {
    pub fn from_rows(rows: &[&[u8]]) -> Self {
        let size = rows.len();
        let mut data = Vec::with_capacity(size * size);
        for r in rows {
            assert_eq!(r.len(), size);
            data.extend_from_slice(r);
        }
        Self { size, data }
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.size..(r + 1) * self.size]
    }

    /// Gauss-Jordan inverse, `None` when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        let n = self.size;
        let mut a = self.data.clone();
        let mut out = vec![0u8; n * n];
        for i in 0..n {
            out[i * n + i] = 1;
        }
        for col in 0..n {
            let pivot = (col..n).find(|&r| a[r * n + col] != 0)?;
            if pivot != col {
                for c in 0..n {
                    a.swap(pivot * n + c, col * n + c);
                    out.swap(pivot * n + c, col * n + c);
                }
            }
            let scale = inv(a[col * n + col]);
            for c in 0..n {
                a[col * n + c] = mul(a[col * n + c], scale);
                out[col * n + c] = mul(out[col * n + c], scale);
            }
            for r in 0..n {
                let f = a[r * n + col];
                if r == col || f == 0 {
                    continue;
                }
                for c in 0..n {
                    a[r * n + c] ^= mul(f, a[col * n + c]);
                    out[r * n + c] ^= mul(f, out[col * n + c]);
                }
            }
        }
        Some(Matrix { size: n, data: out })
    }

    /// Whether the matrix is invertible, by forward elimination only.
    pub fn is_invertible(&self) -> bool {
        let n = self.size;
        let mut a = self.data.clone();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| a[r * n + col] != 0) else {
                return false;
            };
            if pivot != col {
                for c in col..n {
                    a.swap(pivot * n + c, col * n + c);
                }
            }
            let scale = inv(a[col * n + col]);
            for r in col + 1..n {
                let f = mul(a[r * n + col], scale);
                if f == 0 {
                    continue;
                }
                for c in col..n {
                    a[r * n + c] ^= mul(f, a[col * n + c]);
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Carry-less multiply with polynomial reduction, no tables.
    fn slow_mul(mut a: u8, mut b: u8) -> u8 {
        let mut p = 0u8;
        while b != 0 {
            if b & 1 != 0 {
                p ^= a;
            }
            let hi = a & 0x80;
            a <<= 1;
            if hi != 0 {
                a ^= (PRIMITIVE_POLY & 0xFF) as u8;
            }
            b >>= 1;
        }
        p
    }

    #[test]
    fn table_multiply_matches_shift_and_add() {
        for a in 0..=255u8 {
            for b in 0..=255u8 {
                assert_eq!(mul(a, b), slow_mul(a, b));
            }
        }
    }

    #[test]
    fn inverses() {
        for a in 1..=255u8 {
            assert_eq!(mul(a, inv(a)), 1);
        }
        assert_eq!(pow(2, 8), 0x1D);
        assert_eq!(pow(0, 0), 1);
    }

    #[test]
    fn matrix_inverse_round_trip() {
        let m = Matrix::from_rows(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]]);
        let i = m.inverse().unwrap();
        assert!(m.is_invertible());
        // m * i = identity
        for r in 0..3 {
            for c in 0..3 {
                let mut s = 0u8;
                for k in 0..3 {
                    s ^= mul(m.row(r)[k], i.row(k)[c]);
                }
                assert_eq!(s, (r == c) as u8);
            }
        }
        let singular = Matrix::from_rows(&[&[1, 2], &[2, 4]]);
        assert!(singular.inverse().is_none());
        assert!(!singular.is_invertible());
    }
}
