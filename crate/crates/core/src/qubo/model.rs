use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::QuboError;

/// Integer QUBO: `offset + Σ a_i x_i + Σ_{i<j} b_ij x_i x_j`.
///
/// Zero coefficients are never stored and quadratic keys always satisfy
/// `i < j`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qubo {
    n: usize,
    linear: BTreeMap<usize, i64>,
    quadratic: BTreeMap<(usize, usize), i64>,
    offset: i64,
}

/// Accumulates coefficients; duplicate entries add up.
#[derive(Debug, Clone, Default)]
pub struct QuboBuilder {
    n: usize,
    linear: BTreeMap<usize, i64>,
    quadratic: BTreeMap<(usize, usize), i64>,
    offset: i64,
}

impl QuboBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            ..Self::default()
        }
    }

    pub fn add_linear(&mut self, i: usize, coefficient: i64) -> &mut Self {
        assert!(i < self.n, "variable {i} out of range {}", self.n);
        *self.linear.entry(i).or_insert(0) += coefficient;
        self
    }

    /// `x_i * x_i = x_i`, so a diagonal entry lands in the linear part.
    pub fn add_quadratic(&mut self, i: usize, j: usize, coefficient: i64) -> &mut Self {
        assert!(
            i < self.n && j < self.n,
            "pair ({i}, {j}) out of range {}",
            self.n
        );
        if i == j {
            return self.add_linear(i, coefficient);
        }
        let key = if i < j { (i, j) } else { (j, i) };
        *self.quadratic.entry(key).or_insert(0) += coefficient;
        self
    }

    pub fn add_offset(&mut self, value: i64) -> &mut Self {
        self.offset += value;
        self
    }

    pub fn build(mut self) -> Qubo {
        self.linear.retain(|_, c| *c != 0);
        self.quadratic.retain(|_, c| *c != 0);
        Qubo {
            n: self.n,
            linear: self.linear,
            quadratic: self.quadratic,
            offset: self.offset,
        }
    }
}

impl Qubo {
    pub fn builder(n: usize) -> QuboBuilder {
        QuboBuilder::new(n)
    }

    pub fn num_variables(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn linear(&self) -> &BTreeMap<usize, i64> {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), i64> {
        &self.quadratic
    }

    pub fn linear_coefficient(&self, i: usize) -> i64 {
        self.linear.get(&i).copied().unwrap_or(0)
    }

    pub fn quadratic_coefficient(&self, i: usize, j: usize) -> i64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.quadratic.get(&key).copied().unwrap_or(0)
    }

    pub fn energy(&self, assignment: &[bool]) -> Result<i64, QuboError> {
        if assignment.len() != self.n {
            return Err(QuboError::LengthMismatch {
                expected: self.n,
                got: assignment.len(),
            });
        }
        let linear: i64 = self
            .linear
            .iter()
            .filter(|(i, _)| assignment[**i])
            .map(|(_, c)| *c)
            .sum();
        let quadratic: i64 = self
            .quadratic
            .iter()
            .filter(|((i, j), _)| assignment[*i] && assignment[*j])
            .map(|(_, c)| *c)
            .sum();
        Ok(self.offset + linear + quadratic)
    }

    /// Largest absolute linear or quadratic coefficient (0 for an empty model).
    pub fn max_abs_coefficient(&self) -> i64 {
        self.linear
            .values()
            .chain(self.quadratic.values())
            .map(|c| c.abs())
            .max()
            .unwrap_or(0)
    }

    /// Per-variable neighbour lists `(j, b_ij)`, sorted by `j`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, i64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (&(i, j), &c) in &self.quadratic {
            adj[i].push((j, c));
            adj[j].push((i, c));
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        adj
    }

    /// Sub-model over `vars` with every other variable fixed to 0.
    /// Variable `vars[k]` becomes index `k`.
    pub fn restrict(&self, vars: &[usize]) -> Qubo {
        let position: BTreeMap<usize, usize> =
            vars.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let mut b = QuboBuilder::new(vars.len());
        b.add_offset(self.offset);
        for (&v, &k) in &position {
            b.add_linear(k, self.linear_coefficient(v));
        }
        for (&(i, j), &c) in &self.quadratic {
            if let (Some(&a), Some(&bb)) = (position.get(&i), position.get(&j)) {
                b.add_quadratic(a, bb, c);
            }
        }
        b.build()
    }

    /// Text export: `n offset`, then `lin i a_i` and `quad i j b_ij` lines in
    /// index order.
    pub fn to_export(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.n, self.offset).unwrap();
        for (i, c) in &self.linear {
            writeln!(out, "lin {i} {c}").unwrap();
        }
        for ((i, j), c) in &self.quadratic {
            writeln!(out, "quad {i} {j} {c}").unwrap();
        }
        out
    }

    pub fn from_export(text: &str) -> Result<Qubo, QuboError> {
        let err = |line: usize, message: &str| QuboError::ExportParse {
            line,
            message: message.to_string(),
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hl, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
        let mut head = header.split_whitespace();
        let n: usize = head
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(hl, "bad variable count"))?;
        let offset: i64 = head
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(hl, "bad offset"))?;
        if head.next().is_some() {
            return Err(err(hl, "trailing fields in header"));
        }

        let mut b = QuboBuilder::new(n);
        b.add_offset(offset);
        for (ln, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let index = |s: &str| -> Result<usize, QuboError> {
                let i: usize = s.parse().map_err(|_| err(ln, "bad index"))?;
                if i >= n {
                    return Err(err(ln, "index out of range"));
                }
                Ok(i)
            };
            let coef = |s: &str| -> Result<i64, QuboError> {
                s.parse().map_err(|_| err(ln, "bad coefficient"))
            };
            match fields.as_slice() {
                ["lin", i, c] => {
                    b.add_linear(index(i)?, coef(c)?);
                }
                ["quad", i, j, c] => {
                    let (i, j) = (index(i)?, index(j)?);
                    if i == j {
                        return Err(err(ln, "quadratic term on the diagonal"));
                    }
                    b.add_quadratic(i, j, coef(c)?);
                }
                _ => return Err(err(ln, "expected `lin i a` or `quad i j b`")),
            }
        }
        Ok(b.build())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> Qubo {
        let mut b = Qubo::builder(3);
        b.add_linear(0, 2)
            .add_linear(1, -3)
            .add_quadratic(2, 0, 5)
            .add_quadratic(0, 1, 1)
            .add_quadratic(1, 0, -1)
            .add_offset(7);
        b.build()
    }

    #[test]
    fn builder_merges_and_drops_zeros() {
        let q = sample();
        assert_eq!(q.quadratic().len(), 1);
        assert_eq!(q.quadratic_coefficient(2, 0), 5);
        assert_eq!(q.linear().len(), 2);
        assert_eq!(q.offset(), 7);
    }

    #[test]
    fn energy_by_hand() {
        let q = sample();
        assert_eq!(q.energy(&[false, false, false]).unwrap(), 7);
        assert_eq!(q.energy(&[true, false, true]).unwrap(), 7 + 2 + 5);
        assert_eq!(q.energy(&[true, true, true]).unwrap(), 7 + 2 - 3 + 5);
        assert!(matches!(
            q.energy(&[true]),
            Err(QuboError::LengthMismatch {
                expected: 3,
                got: 1
            })
        ));
    }

    #[test]
    fn export_format() {
        assert_eq!(sample().to_export(), "3 7\nlin 0 2\nlin 1 -3\nquad 0 2 5\n");
    }

    #[test]
    fn export_parse_errors() {
        assert!(Qubo::from_export("").is_err());
        assert!(Qubo::from_export("2 0\nlin 5 1\n").is_err());
        assert!(Qubo::from_export("2 0\nquad 1 1 1\n").is_err());
        match Qubo::from_export("2 0\nlin 0 1\nbogus\n") {
            Err(QuboError::ExportParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn restrict_fixes_other_variables_to_zero() {
        let q = sample();
        let r = q.restrict(&[2, 0]);
        for bits in 0..4u8 {
            let sub = [bits & 1 != 0, bits & 2 != 0];
            let full = [sub[1], false, sub[0]];
            assert_eq!(r.energy(&sub).unwrap(), q.energy(&full).unwrap());
        }
    }

    fn arb_qubo() -> impl Strategy<Value = Qubo> {
        (1usize..8).prop_flat_map(|n| {
            (
                proptest::collection::vec(-20i64..20, n),
                proptest::collection::vec((0..n, 0..n, -20i64..20), 0..12),
                -50i64..50,
            )
                .prop_map(move |(lin, quad, off)| {
                    let mut b = Qubo::builder(n);
                    for (i, c) in lin.into_iter().enumerate() {
                        b.add_linear(i, c);
                    }
                    for (i, j, c) in quad {
                        b.add_quadratic(i, j, c);
                    }
                    b.add_offset(off);
                    b.build()
                })
        })
    }

    proptest! {
        #[test]
        fn export_round_trips(q in arb_qubo()) {
            let text = q.to_export();
            let back = Qubo::from_export(&text).unwrap();
            prop_assert_eq!(&back, &q);
            prop_assert_eq!(back.to_export(), text);
        }
    }
}
