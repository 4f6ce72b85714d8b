//! Exact QUBO <-> Ising conversion via `x = (s + 1) / 2`.

use std::collections::BTreeMap;

use num_rational::Rational64;

use super::{Qubo, QuboBuilder, QuboError};

/// `offset + Σ h_i s_i + Σ_{i<j} J_ij s_i s_j` over spins `s ∈ {-1, +1}`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IsingModel {
    pub n: usize,
    pub h: BTreeMap<usize, Rational64>,
    pub j: BTreeMap<(usize, usize), Rational64>,
    pub offset: Rational64,
}

fn add(map: &mut BTreeMap<usize, Rational64>, i: usize, v: Rational64) {
    *map.entry(i).or_insert_with(|| Rational64::from_integer(0)) += v;
}

impl IsingModel {
    pub fn energy(&self, spins: &[i8]) -> Result<Rational64, QuboError> {
        if spins.len() != self.n {
            return Err(QuboError::LengthMismatch {
                expected: self.n,
                got: spins.len(),
            });
        }
        if let Some((index, &value)) = spins.iter().enumerate().find(|(_, s)| s.abs() != 1) {
            return Err(QuboError::InvalidSpin { index, value });
        }
        let s = |i: usize| Rational64::from_integer(i64::from(spins[i]));
        let mut e = self.offset;
        for (&i, &h) in &self.h {
            e += h * s(i);
        }
        for (&(i, j), &c) in &self.j {
            e += c * s(i) * s(j);
        }
        Ok(e)
    }

    /// Inverse substitution `s = 2x - 1`. Fails if a resulting coefficient is
    /// not an integer.
    pub fn to_qubo(&self) -> Result<Qubo, QuboError> {
        let mut lin: BTreeMap<usize, Rational64> = BTreeMap::new();
        let mut offset = self.offset;
        for (&i, &h) in &self.h {
            add(&mut lin, i, h * 2);
            offset -= h;
        }
        let mut quad = Vec::with_capacity(self.j.len());
        for (&(i, j), &c) in &self.j {
            quad.push((i, j, c * 4));
            add(&mut lin, i, -c * 2);
            add(&mut lin, j, -c * 2);
            offset += c;
        }

        let integral = |v: Rational64, what: String| {
            if v.is_integer() {
                Ok(v.to_integer())
            } else {
                Err(QuboError::NonIntegral {
                    what,
                    value: v.to_string(),
                })
            }
        };
        let mut b = QuboBuilder::new(self.n);
        b.add_offset(integral(offset, "offset".into())?);
        for (i, v) in lin {
            b.add_linear(i, integral(v, format!("linear {i}"))?);
        }
        for (i, j, v) in quad {
            b.add_quadratic(i, j, integral(v, format!("quadratic ({i}, {j})"))?);
        }
        Ok(b.build())
    }
}

impl Qubo {
    pub fn to_ising(&self) -> IsingModel {
        let half = Rational64::new(1, 2);
        let quarter = Rational64::new(1, 4);
        let mut h = BTreeMap::new();
        let mut j = BTreeMap::new();
        let mut offset = Rational64::from_integer(self.offset());
        for (&i, &a) in self.linear() {
            let a = Rational64::from_integer(a);
            add(&mut h, i, a * half);
            offset += a * half;
        }
        for (&(u, v), &b) in self.quadratic() {
            let b = Rational64::from_integer(b);
            j.insert((u, v), b * quarter);
            add(&mut h, u, b * quarter);
            add(&mut h, v, b * quarter);
            offset += b * quarter;
        }
        h.retain(|_, v: &mut Rational64| *v != Rational64::from_integer(0));
        j.retain(|_, v: &mut Rational64| *v != Rational64::from_integer(0));
        IsingModel {
            n: self.num_variables(),
            h,
            j,
            offset,
        }
    }
}
